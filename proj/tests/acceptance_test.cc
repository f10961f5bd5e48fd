// Copyright 2026 The lastiter Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance gate: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are pinned below; the process exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "lastiter/lastiter.hpp"

namespace {

using namespace lastiter;

constexpr double kL = 1.0;
constexpr double kD = 1.0;
constexpr double kEtaUpper = 1.0 / (30.0 * kL);

// Pinned tolerances.
constexpr double kPpMonotoneTol = 1e-9;      // relative to Ham(z^0)
constexpr double kCertificateRelTol = 1e-8;  // certificate vs simulation
constexpr double kClosedFormRelTol = 1e-8;   // closed form vs simulation
constexpr double kTightnessConstant = 40.0;
constexpr double kTightnessMatchTol = 1e-10;
constexpr double kTwoCliTol = 1e-9;

// Pinned runtime limits (seconds).
constexpr double kC1Seconds = 5.0;
constexpr double kC4Seconds = 10.0;
constexpr double kC7Seconds = 60.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // <= 0: none
  std::function<Outcome()> run;
};

Trace EgOnHard(Index n, double nu, double eta, std::size_t T) {
  const OperatorHandle op = AsOperator(MakeHardInstance({n, nu, kD}));
  SolverConfig cfg;
  cfg.eta = eta;
  cfg.T = T;
  return RunEg(op, cfg);
}

// Criteria 1 and 2 share the grid.
Outcome EgUpperBounds(bool gap) {
  Outcome out;
  double worst = std::numeric_limits<double>::infinity();
  const std::vector<std::size_t> horizons{10, 100, 1000, 10000};
  std::size_t checks = 0;
  for (Index n : {2, 8}) {
    auto check = [&](const Trace& tr, std::size_t T) {
      const double t = static_cast<double>(T);
      const double observed = gap ? tr.losses[T].gap_bilinear : tr.losses[T].sqrt_ham;
      const double bound = gap ? 2.0 * std::sqrt(2.0) * kD * kD / (kEtaUpper * std::sqrt(t))
                               : 2.0 * kD / (kEtaUpper * std::sqrt(t));
      worst = std::min(worst, bound - observed);
      ++checks;
      if (!(observed <= bound)) out.pass = false;
    };
    for (double nu : {kL, kL / 2.0}) {
      const Trace tr = EgOnHard(n, nu, kEtaUpper, horizons.back());
      for (std::size_t T : horizons) check(tr, T);
    }
    for (std::size_t T : horizons) {
      check(EgOnHard(n, kL / std::sqrt(static_cast<double>(T)), kEtaUpper, T), T);
    }
  }
  out.detail = fmt::format("{} checks, min slack {:.6g}", checks, worst);
  return out;
}

Outcome PpBounds() {
  Outcome out;
  double worst = std::numeric_limits<double>::infinity();
  double worst_mono = std::numeric_limits<double>::infinity();
  for (Index n : {2, 8}) {
    for (double nu : {kL, kL / 2.0}) {
      const BilinearInstance inst = MakeHardInstance({n, nu, kD});
      for (double eta : {0.1, 1.0, 10.0}) {
        SolverConfig cfg;
        cfg.method = Method::kPP;
        cfg.eta = eta;
        cfg.T = 10000;
        const Trace tr = RunPpAffine(inst, cfg);
        const double scale = tr.losses[0].ham;
        for (std::size_t t = 1; t <= cfg.T; ++t) {
          const double slack = kD / (eta * std::sqrt(static_cast<double>(t))) - tr.losses[t].sqrt_ham;
          worst = std::min(worst, slack);
          if (!(slack >= 0.0)) out.pass = false;
          const double mono = tr.losses[t - 1].ham - tr.losses[t].ham + kPpMonotoneTol * scale;
          worst_mono = std::min(worst_mono, mono);
          if (!(mono >= 0.0)) out.pass = false;
        }
      }
    }
  }
  out.detail = fmt::format("min bound slack {:.6g}, min monotone slack {:.6g}", worst, worst_mono);
  return out;
}

double RelDiff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Outcome ScliCertificates() {
  Outcome out;
  const double eta = 1.0 / (2.0 * kL);
  const ScliSpec spec = ScliSpec::Extragradient(eta);
  const double k = 2.0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  double worst_rel = 0.0;
  for (std::size_t T : {10u, 100u, 1000u}) {
    const double t = static_cast<double>(T);
    struct Item {
      LossKind kind;
      double bound;
    };
    const Item items[] = {
        {LossKind::kHam, kL * kL * kD * kD / (20.0 * t * k * k)},
        {LossKind::kGap, kL * kD * kD / (k * std::sqrt(20.0 * t))},
        {LossKind::kFunc, kL * kD * kD / (36.0 * k * std::sqrt(t))},
    };
    for (const Item& it : items) {
      const NuCertificate c = WorstCaseNuSearch(spec, kL, kD, T, it.kind);
      worst_ratio = std::min(worst_ratio, c.loss_value / it.bound);
      if (!(c.loss_value >= it.bound)) out.pass = false;
      // Re-validate by direct simulation at nu*.
      const BilinearInstance inst = MakeHardInstance({2, c.nu_star, kD});
      const Trace tr = SimulateScli(spec, inst, std::nullopt, c.horizon);
      const LossRecord& r = tr.losses[c.horizon];
      double sim = 0.0;
      switch (it.kind) {
        case LossKind::kHam: sim = r.ham; break;
        case LossKind::kGap: sim = kD * r.sqrt_ham; break;
        default: sim = r.func_loss; break;
      }
      const double rel = RelDiff(c.loss_value, sim);
      worst_rel = std::max(worst_rel, rel);
      if (!(rel <= kCertificateRelTol)) out.pass = false;
      if (it.kind == LossKind::kGap && !(r.gap_bilinear >= it.bound)) out.pass = false;
    }
  }
  out.detail = fmt::format("min certificate/bound {:.4f}, max sim deviation {:.3g}", worst_ratio,
                           worst_rel);
  return out;
}

Outcome ClosedFormEquivalence() {
  Outcome out;
  std::mt19937_64 rng(20260101);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int specs = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 1 + trial % 6;
    const Index n = 2 * (1 + trial % 3);
    const double nu = 0.05 + unit(rng);
    const BilinearInstance inst = MakeHardInstance({n, nu, kD});
    ScliSpec spec;
    // Rejection-sample a consistent spec that does not expand at nu.
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw Error("could not draw a non-expansive spec");
      const double eta = (0.1 + 0.8 * unit(rng)) / nu;
      std::vector<double> c(k, 0.0);
      c[0] = -eta * (0.5 + unit(rng));
      if (k >= 2) c[1] = eta * eta * (0.5 + unit(rng));
      for (int j = 2; j < k; ++j) c[j] = std::pow(eta, j + 1) * 0.2 * normal(rng);
      spec = ScliSpec::Consistent(k, c);
      if (k == 1) {
        // Degree-0 N always expands (|1 + i nu n0| > 1); keep the growth over
        // 1e4 steps below e^0.05.
        spec = ScliSpec::Consistent(1, {-(0.001 + 0.002 * unit(rng)) / nu});
        break;
      }
      if (Profile(spec, nu).magnitude <= 1.0) break;
    }
    ++specs;
    const std::size_t T = 10000;
    const Trace tr = SimulateScli(spec, inst, std::nullopt, T);
    for (std::size_t t = 0; t <= T; ++t) {
      const Vector cf = ClosedFormIterate(spec, inst, t).vec();
      const double rel = (cf - tr.iterates[t]).norm() / std::max(tr.iterates[t].norm(), kD);
      worst = std::max(worst, rel);
    }
  }
  out.pass = worst <= kClosedFormRelTol;
  out.detail = fmt::format("{} specs, t <= 1e4, max relative deviation {:.3g}", specs, worst);
  return out;
}

Outcome Separation() {
  Outcome out;
  SeparationOptions opts;  // n = 2, L = 1, D = 1, eta = 1/2, T in [10, 1e4]
  const SeparationReport rep = RunSeparationReport(opts);
  const RateFit& a = rep.last_fit;
  const RateFit& b = rep.averaged_fit;
  out.pass = a.exponent_alpha >= -0.55 && a.exponent_alpha <= -0.45 && b.exponent_alpha >= -1.1 &&
             b.exponent_alpha <= -0.9 && a.r_squared >= 0.98 && b.r_squared >= 0.98 &&
             rep.difference_ok;
  out.detail = fmt::format("last alpha {:.4f} (r2 {:.4f}), averaged alpha {:.4f} (r2 {:.4f}), eta {}",
                           a.exponent_alpha, a.r_squared, b.exponent_alpha, b.r_squared, opts.eta);
  return out;
}

Outcome LemmaBattery() {
  Outcome out;
  const auto reports = RunTheoryBattery();
  std::size_t trials = 0, violations = 0;
  for (const auto& r : reports) {
    trials += r.trials;
    violations += r.violations;
    if (!r.passed()) {
      out.pass = false;
      fmt::print("    {} violated: {}\n", r.name, r.witness.dump());
    }
  }
  out.detail = fmt::format("{} checks, {} trials, {} violations", reports.size(), trials, violations);
  return out;
}

Outcome Tightness() {
  Outcome out;
  double worst_ham = 0.0, worst_gap = 0.0, worst_match = 0.0;
  for (int k : {3, 5, 9, 17}) {
    const ScliSpec spec = BuildTightnessSpec(k, kL);
    NuSearchOptions o;
    o.nu_min = 1e-9 * kL;
    const NuCertificate ham = WorstCaseNuSearch(spec, kL, kD, 1, LossKind::kHam, o);
    const NuCertificate gap = WorstCaseNuSearch(spec, kL, kD, 1, LossKind::kGapExact, o);
    const double kk = static_cast<double>(k);
    worst_ham = std::max(worst_ham, ham.loss_value / (kL * kL * kD * kD / (kk * kk)));
    worst_gap = std::max(worst_gap, gap.loss_value / (kL * kD * kD / kk));
    if (!(ham.loss_value <= kTightnessConstant * kL * kL * kD * kD / (kk * kk))) out.pass = false;
    if (!(gap.loss_value <= kTightnessConstant * kL * kD * kD / kk)) out.pass = false;

    // z^1 of the spec against the averaged EG iterate at T = floor((k-1)/2).
    const BilinearInstance inst = MakeHardInstance({2, gap.nu_star, kD});
    const Vector z1 = SimulateScli(spec, inst, std::nullopt, 1).iterates[1];
    const std::size_t T = static_cast<std::size_t>((k - 1) / 2);
    const Trace avg = AverageTrace(EgOnHard(2, gap.nu_star, 1.0 / (2.0 * kL), T), AsOperator(inst));
    const double d = (z1 - avg.averaged_iterates[T]).norm();
    worst_match = std::max(worst_match, d);
    if (!(d <= kTightnessMatchTol)) out.pass = false;
  }
  out.detail = fmt::format("max Ham k^2/(L^2 D^2) {:.3f}, max Gap k/(L D^2) {:.3f} (limit {}), "
                           "max |z1 - avg EG| {:.3g}",
                           worst_ham, worst_gap, kTightnessConstant, worst_match);
  return out;
}

Outcome TwoCli() {
  Outcome out;
  double worst = 0.0;
  for (double eta : {kEtaUpper, 0.5 / kL}) {
    for (Index n : {2, 8}) {
      const BilinearInstance inst = MakeHardInstance({n, kL, kD});
      worst = std::max(worst, AveragedEgAs2CliCheck(inst, eta, 1000).max_deviation);
    }
  }
  out.pass = worst <= kTwoCliTol;
  out.detail = fmt::format("max deviation {:.3g} over T = 1000", worst);
  return out;
}

Outcome TimeVaryingLowerBound() {
  Outcome out;
  double worst = std::numeric_limits<double>::infinity();
  // Geometric schedule is indexed from t = 1 so that every step stays strictly
  // below 1/L: eta_t = 0.99^{t+1} / L.
  const StepSchedule schedules[] = {
      {ScheduleKind::kConstant, 0.9, 1.0},
      {ScheduleKind::kInverseSqrt, 1.0, 1.0},
      {ScheduleKind::kGeometric, 0.99, 0.99},
  };
  for (const StepSchedule& s : schedules) {
    for (std::size_t T : {100u, 10000u}) {
      const double t = static_cast<double>(T);
      const BilinearInstance inst = MakeHardInstance({2, kL / std::sqrt(t), kD});
      SolverConfig cfg;
      cfg.method = Method::kEGTimeVarying;
      cfg.T = T;
      const Trace tr = RunEgTimeVarying(AsOperator(inst), s.Materialize(T, kL), cfg);
      const double slack = tr.losses[T].gap_bilinear - kL * kD * kD / (4.0 * std::sqrt(t));
      worst = std::min(worst, slack);
      if (!(slack >= 0.0)) out.pass = false;
    }
  }
  out.detail = fmt::format("min slack {:.6g}", worst);
  return out;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "EG last-iterate operator-norm bound", kC1Seconds, [] { return EgUpperBounds(false); }},
      {2, "EG last-iterate gap bound", 0.0, [] { return EgUpperBounds(true); }},
      {3, "PP bound and monotone Hamiltonian", 0.0, PpBounds},
      {4, "SCLI lower-bound certificates", kC4Seconds, ScliCertificates},
      {5, "closed form equals simulation", 0.0, ClosedFormEquivalence},
      {6, "last vs averaged rate separation", 0.0, Separation},
      {7, "lemma battery", kC7Seconds, LemmaBattery},
      {8, "tightness construction", 0.0, Tightness},
      {9, "averaged EG as a 2-CLI", 0.0, TwoCli},
      {10, "time-varying EG lower bound", 0.0, TimeVaryingLowerBound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0.0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += fmt::format("; exceeded {} s limit", c.time_limit);
    }
    fmt::print("{} criterion {:>2} {}: {} [{:.2f} s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
               o.detail, secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
