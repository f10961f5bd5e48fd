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

// Experiment grids over horizons, log-log rate fits and per-horizon bound
// checks.

#ifndef LASTITER_HARNESS_HPP_
#define LASTITER_HARNESS_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "lastiter/core.hpp"
#include "lastiter/metrics.hpp"
#include "lastiter/problem.hpp"
#include "lastiter/scli.hpp"
#include "lastiter/solvers.hpp"

namespace lastiter {

// ---------------------------------------------------------------------------
// Rate fits.

struct RateFit {
  double exponent_alpha = 0.0;
  double log_constant = 0.0;
  double r_squared = 0.0;
  double T_min = 0.0;
  double T_max = 0.0;
  std::size_t points = 0;
};

// Least squares on (log T, log loss) over horizons in [T_min, T_max]:
// loss ~ exp(log_constant) T^alpha.
inline RateFit FitRate(const std::vector<std::pair<double, double>>& table,
                       double T_min = 0.0,
                       double T_max = std::numeric_limits<double>::infinity()) {
  std::vector<std::pair<double, double>> pts;
  std::string bad;
  for (const auto& [T, loss] : table) {
    if (T < T_min || T > T_max) continue;
    if (!(loss > 0.0) || !std::isfinite(loss)) {
      bad += (bad.empty() ? "" : ", ") + fmt::format("{}", T);
      continue;
    }
    pts.emplace_back(std::log(T), std::log(loss));
  }
  if (!bad.empty()) throw Error("non-positive loss at horizons: " + bad);
  if (pts.size() < 5) {
    throw PreconditionError(fmt::format("rate fit needs >= 5 points, got {}", pts.size()));
  }
  const double m = static_cast<double>(pts.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pts) sx += x, sy += y;
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("rate fit needs at least two distinct horizons");
  RateFit fit;
  fit.exponent_alpha = sxy / sxx;
  fit.log_constant = my - fit.exponent_alpha * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.T_min = std::exp(pts.front().first);
  fit.T_max = std::exp(pts.front().first);
  for (const auto& p : pts) {
    fit.T_min = std::min(fit.T_min, std::exp(p.first));
    fit.T_max = std::max(fit.T_max, std::exp(p.first));
  }
  fit.points = pts.size();
  return fit;
}

// Roughly `per_decade` log-spaced integer horizons in [lo, hi], deduplicated.
inline std::vector<std::size_t> LogGrid(std::size_t lo, std::size_t hi, int per_decade = 5) {
  if (lo < 1 || hi < lo) throw PreconditionError("log grid needs 1 <= lo <= hi");
  std::vector<std::size_t> out;
  const double a = std::log10(static_cast<double>(lo));
  const double b = std::log10(static_cast<double>(hi));
  const int steps = std::max(1, static_cast<int>(std::lround((b - a) * per_decade)));
  for (int i = 0; i <= steps; ++i) {
    const auto T = static_cast<std::size_t>(std::llround(std::pow(10.0, a + (b - a) * i / steps)));
    if (out.empty() || T > out.back()) out.push_back(T);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bound checks.

enum class BoundKind {
  kEgUpper,        // ||F(z^T)|| <= 2D / (eta sqrt(T))
  kEgGapUpper,     // Gap(z^T) <= 2 sqrt(2) D^2 / (eta sqrt(T))
  kPpUpper,        // ||F(z^T)|| <= D / (eta sqrt(T))
  kScliLowerHam,   // Ham >= L^2 D^2 / (20 T k^2)
  kScliLowerGap,   // Gap >= L D^2 / (k sqrt(20 T))
  kScliLowerFunc,  // max_{T, 2T} |f - f*| >= L D^2 / (36 k sqrt(T))
  kTimeVaryingLower,  // Gap >= L D^2 / (4 sqrt(T)) at nu = L / sqrt(T)
};

inline const char* BoundKindName(BoundKind kind) {
  switch (kind) {
    case BoundKind::kEgUpper: return "EG_UB";
    case BoundKind::kEgGapUpper: return "EG_GAP_UB";
    case BoundKind::kPpUpper: return "PP_UB";
    case BoundKind::kScliLowerHam: return "SCLI_LB_HAM";
    case BoundKind::kScliLowerGap: return "SCLI_LB_GAP";
    case BoundKind::kScliLowerFunc: return "SCLI_LB_FUNC";
    case BoundKind::kTimeVaryingLower: return "TIMEVARYING_LB";
  }
  return "UNKNOWN";
}

inline BoundKind ParseBoundKind(const std::string& s) {
  for (BoundKind k : {BoundKind::kEgUpper, BoundKind::kEgGapUpper, BoundKind::kPpUpper,
                      BoundKind::kScliLowerHam, BoundKind::kScliLowerGap,
                      BoundKind::kScliLowerFunc, BoundKind::kTimeVaryingLower}) {
    if (s == BoundKindName(k)) return k;
  }
  throw PreconditionError("unknown bound kind '" + s + "'");
}

inline bool IsLowerBound(BoundKind kind) {
  return kind == BoundKind::kScliLowerHam || kind == BoundKind::kScliLowerGap ||
         kind == BoundKind::kScliLowerFunc || kind == BoundKind::kTimeVaryingLower;
}

// Facts about the run that decide whether a bound applies.
struct BoundHypotheses {
  std::optional<Method> method;
  double L = 1.0;
  double D = 1.0;
  double eta = std::numeric_limits<double>::quiet_NaN();
  double Lambda = 0.0;
  // SCLI lower bounds.
  int k = 0;
  bool consistent = false;
  // Time-varying lower bound.
  std::vector<double> schedule;
  bool nu_is_L_over_sqrtT = false;
};

enum class BoundStatus { kPass, kFail, kNotApplicable };

inline const char* BoundStatusName(BoundStatus s) {
  switch (s) {
    case BoundStatus::kPass: return "pass";
    case BoundStatus::kFail: return "fail";
    case BoundStatus::kNotApplicable: return "not_applicable";
  }
  return "unknown";
}

struct BoundRow {
  std::size_t T = 0;
  double observed = 0.0;
  double bound = 0.0;
  // Positive when the inequality holds: bound - observed for upper bounds,
  // observed - bound for lower bounds.
  double slack = 0.0;
  bool pass = false;
};

struct BoundCheck {
  BoundKind kind = BoundKind::kEgUpper;
  BoundStatus status = BoundStatus::kNotApplicable;
  std::string reason;
  std::vector<BoundRow> rows;
};

inline double BoundValue(BoundKind kind, const BoundHypotheses& h, std::size_t T) {
  const double t = static_cast<double>(T);
  const double k = static_cast<double>(h.k);
  switch (kind) {
    case BoundKind::kEgUpper: return 2.0 * h.D / (h.eta * std::sqrt(t));
    case BoundKind::kEgGapUpper:
      return 2.0 * std::sqrt(2.0) * h.D * h.D / (h.eta * std::sqrt(t));
    case BoundKind::kPpUpper: return h.D / (h.eta * std::sqrt(t));
    case BoundKind::kScliLowerHam: return h.L * h.L * h.D * h.D / (20.0 * t * k * k);
    case BoundKind::kScliLowerGap: return h.L * h.D * h.D / (k * std::sqrt(20.0 * t));
    case BoundKind::kScliLowerFunc: return h.L * h.D * h.D / (36.0 * k * std::sqrt(t));
    case BoundKind::kTimeVaryingLower: return h.L * h.D * h.D / (4.0 * std::sqrt(t));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Empty when the hypotheses of `kind` hold, otherwise the reason they do not.
inline std::optional<std::string> BoundHypothesisFailure(BoundKind kind,
                                                         const BoundHypotheses& h) {
  switch (kind) {
    case BoundKind::kEgUpper:
    case BoundKind::kEgGapUpper: {
      if (h.method != Method::kEG) return "bound is for constant-step extragradient";
      double limit = 1.0 / (30.0 * h.L);
      if (h.Lambda > 0.0) limit = std::min(limit, 5.0 / (h.Lambda * h.D));
      if (!(h.eta > 0.0) || h.eta > limit) {
        return fmt::format("eta = {} outside (0, {}]", h.eta, limit);
      }
      return std::nullopt;
    }
    case BoundKind::kPpUpper:
      if (h.method != Method::kPP) return "bound is for the proximal point method";
      if (!(h.eta > 0.0)) return "PP bound needs eta > 0";
      return std::nullopt;
    case BoundKind::kScliLowerHam:
    case BoundKind::kScliLowerGap:
    case BoundKind::kScliLowerFunc:
      if (h.k < 1) return "SCLI bound needs a degree budget k >= 1";
      if (!h.consistent) return "SCLI bound needs a consistent spec";
      return std::nullopt;
    case BoundKind::kTimeVaryingLower:
      if (h.schedule.empty()) return "time-varying bound needs the step schedule";
      if (!h.nu_is_L_over_sqrtT) return "time-varying bound is stated at nu = L / sqrt(T)";
      for (double e : h.schedule) {
        if (!(e > 0.0) || !(e < 1.0 / h.L)) return "schedule leaves (0, 1/L)";
      }
      return std::nullopt;
  }
  return "unknown bound";
}

// `observed` holds (T, value) with the value matching the bound: ||F|| for
// EG_UB / PP_UB, the ball gap for the gap bounds, Ham for SCLI_LB_HAM and the
// max over {T, 2T} of |f - f*| for SCLI_LB_FUNC.
inline BoundCheck CheckBounds(BoundKind kind, const BoundHypotheses& h,
                              const std::vector<std::pair<std::size_t, double>>& observed) {
  BoundCheck out;
  out.kind = kind;
  if (auto why = BoundHypothesisFailure(kind, h)) {
    out.status = BoundStatus::kNotApplicable;
    out.reason = *why;
    return out;
  }
  if (kind == BoundKind::kTimeVaryingLower) {
    for (const auto& [T, v] : observed) {
      if (h.schedule.size() < T) {
        out.status = BoundStatus::kNotApplicable;
        out.reason = "schedule shorter than horizon";
        return out;
      }
    }
  }
  bool all = true;
  for (const auto& [T, v] : observed) {
    BoundRow row;
    row.T = T;
    row.observed = v;
    row.bound = BoundValue(kind, h, T);
    row.slack = IsLowerBound(kind) ? v - row.bound : row.bound - v;
    row.pass = row.slack >= 0.0;
    all = all && row.pass;
    out.rows.push_back(row);
  }
  out.status = all ? BoundStatus::kPass : BoundStatus::kFail;
  return out;
}

// ---------------------------------------------------------------------------
// Worker pool.

// Runs fn(0..count-1) on up to `threads` workers; results land by index.
// The first exception is rethrown after all workers finish.
inline void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& fn,
                        unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Experiments.

enum class NuMode { kFixed, kInverseSqrtT, kWorstCase };

inline const char* NuModeName(NuMode m) {
  switch (m) {
    case NuMode::kFixed: return "fixed";
    case NuMode::kInverseSqrtT: return "L_over_sqrtT";
    case NuMode::kWorstCase: return "worst_case";
  }
  return "unknown";
}

enum class ScheduleKind { kConstant, kInverseSqrt, kGeometric };

// eta_t = scale / L, (scale / L) / sqrt(t + 2) or (scale / L) ratio^t.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double scale = 0.9;
  double ratio = 0.99;

  std::vector<double> Materialize(std::size_t T, double L) const {
    std::vector<double> out(T);
    for (std::size_t t = 0; t < T; ++t) {
      const double base = scale / L;
      switch (kind) {
        case ScheduleKind::kConstant: out[t] = base; break;
        case ScheduleKind::kInverseSqrt: out[t] = base / std::sqrt(t + 2.0); break;
        case ScheduleKind::kGeometric: out[t] = base * std::pow(ratio, static_cast<double>(t)); break;
      }
    }
    return out;
  }
};

struct ExperimentConfig {
  std::string name = "experiment";
  // Hard instance family; nu follows nu_mode.
  HardInstanceParams instance{2, 1.0, 1.0};
  double L = 1.0;
  NuMode nu_mode = NuMode::kFixed;
  LossKind nu_loss = LossKind::kGapExact;  // objective of the worst-case search
  // A general bilinear instance replaces the hard family when set.
  std::optional<BilinearInstance> custom_instance;

  Method method = Method::kEG;
  std::optional<ScliSpec> spec;  // runs the SCLI recursion instead of `method`
  double eta = 1.0 / 30.0;
  StepSchedule schedule;  // for Method::kEGTimeVarying

  std::vector<std::size_t> T_grid = LogGrid(10, 10000);
  bool averaged = false;
  std::vector<BoundKind> bounds;
  double fit_T_min = 100.0;
  double fit_T_max = std::numeric_limits<double>::infinity();
  bool strict_stepsize = false;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  void Validate() const {
    if (T_grid.empty()) throw PreconditionError("T_grid is empty");
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
      if (T_grid[i] < 1) throw PreconditionError("every horizon must be >= 1");
      if (i > 0 && T_grid[i] <= T_grid[i - 1]) {
        throw PreconditionError("T_grid must be strictly increasing");
      }
    }
    if (!(L > 0.0)) throw PreconditionError("L must be positive");
    if (nu_mode == NuMode::kWorstCase && !spec && method != Method::kEG) {
      throw PreconditionError("worst-case nu needs an SCLI spec or constant-step EG");
    }
    if (spec) spec->Validate();
  }
};

struct ExperimentRow {
  std::size_t T = 0;
  double nu = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
  LossRecord last;
  std::optional<LossRecord> averaged;
  // max(|f(z^T) - f*|, |f(z^{2T}) - f*|), filled when SCLI_LB_FUNC is requested.
  double func_loss_max_T_2T = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
  std::map<std::string, RateFit> fits;
  std::vector<BoundCheck> bound_checks;
  std::vector<std::string> warnings;

  // True when no applicable bound check failed.
  bool bounds_ok() const {
    for (const auto& b : bound_checks) {
      if (b.status == BoundStatus::kFail) return false;
    }
    return true;
  }
};

namespace internal {

inline ScliSpec SpecForSearch(const ExperimentConfig& cfg) {
  if (cfg.spec) return *cfg.spec;
  return ScliSpec::Extragradient(cfg.eta);
}

inline double NuForHorizon(const ExperimentConfig& cfg, std::size_t T) {
  switch (cfg.nu_mode) {
    case NuMode::kFixed: return cfg.instance.nu;
    case NuMode::kInverseSqrtT: return cfg.L / std::sqrt(static_cast<double>(T));
    case NuMode::kWorstCase:
      return WorstCaseNuSearch(SpecForSearch(cfg), cfg.L, cfg.instance.D, T, cfg.nu_loss).nu_star;
  }
  return cfg.instance.nu;
}

inline Trace RunOne(const ExperimentConfig& cfg, const BilinearInstance& inst, std::size_t T) {
  if (cfg.spec) {
    Trace tr = SimulateScli(*cfg.spec, inst, std::nullopt, T);
    return cfg.averaged ? AverageTrace(std::move(tr), AsOperator(inst)) : tr;
  }
  const OperatorHandle op = AsOperator(inst);
  SolverConfig sc;
  sc.method = cfg.method;
  sc.eta = cfg.eta;
  sc.T = T;
  sc.strict_stepsize = cfg.strict_stepsize;
  if (cfg.method == Method::kEGTimeVarying) sc.schedule = cfg.schedule.Materialize(T, cfg.L);
  Trace tr = RunSolver(op, sc);
  return cfg.averaged ? AverageTrace(std::move(tr), op) : tr;
}

inline bool WantsFuncMax(const ExperimentConfig& cfg) {
  return std::find(cfg.bounds.begin(), cfg.bounds.end(), BoundKind::kScliLowerFunc) !=
         cfg.bounds.end();
}

inline ExperimentRow RowFromTrace(const Trace& tr, std::size_t T, double nu, bool func_max) {
  ExperimentRow row;
  row.T = T;
  row.nu = nu;
  row.last = tr.losses.at(T);
  if (!tr.averaged_losses.empty()) row.averaged = tr.averaged_losses.at(T);
  if (func_max && tr.losses.size() > 2 * T) {
    row.func_loss_max_T_2T = std::max(tr.losses[T].func_loss, tr.losses[2 * T].func_loss);
  }
  return row;
}

inline ExperimentRow DivergedRow(std::size_t T, double nu, const DivergenceError& e) {
  ExperimentRow row;
  row.T = T;
  row.nu = nu;
  row.status = fmt::format("diverged at t={}", e.iteration());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.last.ham = row.last.sqrt_ham = row.last.gap_linearized = nan;
  return row;
}

}  // namespace internal

// Runs the configured solver for each horizon. When the instance does not
// depend on T, one run to the largest horizon serves every row; otherwise each
// horizon runs on its own instance in the worker pool. Divergence becomes a
// labeled row.
inline ExperimentResult RunExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  ExperimentResult res;
  res.config = cfg;
  const bool func_max = internal::WantsFuncMax(cfg);
  const bool per_T = !cfg.custom_instance && cfg.nu_mode != NuMode::kFixed;
  auto instance_for = [&](double nu) {
    if (cfg.custom_instance) return *cfg.custom_instance;
    HardInstanceParams p = cfg.instance;
    p.nu = nu;
    return MakeHardInstance(p);
  };
  auto horizon_for = [&](std::size_t T) { return func_max ? 2 * T : T; };

  res.rows.resize(cfg.T_grid.size());
  bool shared_ok = false;
  if (!per_T) {
    const double nu = cfg.custom_instance ? std::numeric_limits<double>::quiet_NaN()
                                          : cfg.instance.nu;
    try {
      const Trace tr =
          internal::RunOne(cfg, instance_for(cfg.instance.nu), horizon_for(cfg.T_grid.back()));
      for (std::size_t i = 0; i < cfg.T_grid.size(); ++i) {
        res.rows[i] = internal::RowFromTrace(tr, cfg.T_grid[i], nu, func_max);
      }
      for (const auto& w : tr.warnings) res.warnings.push_back(w);
      shared_ok = true;
    } catch (const DivergenceError&) {
      // Fall through to per-horizon runs so rows before the blow-up survive.
    }
  }
  if (!shared_ok) {
    std::vector<std::vector<std::string>> warns(cfg.T_grid.size());
    ParallelFor(
        cfg.T_grid.size(),
        [&](std::size_t i) {
          const std::size_t T = cfg.T_grid[i];
          const double nu = cfg.custom_instance ? std::numeric_limits<double>::quiet_NaN()
                                                : internal::NuForHorizon(cfg, T);
          try {
            const Trace tr = internal::RunOne(cfg, instance_for(cfg.custom_instance ? 1.0 : nu),
                                              horizon_for(T));
            res.rows[i] = internal::RowFromTrace(tr, T, nu, func_max);
            if (i == 0) warns[i] = tr.warnings;
          } catch (const DivergenceError& e) {
            res.rows[i] = internal::DivergedRow(T, nu, e);
          }
        },
        cfg.threads);
    for (const auto& w : warns) res.warnings.insert(res.warnings.end(), w.begin(), w.end());
  }

  // Rate fits over ok rows in the fit window.
  auto fit_metric = [&](const std::string& name, auto getter) {
    std::vector<std::pair<double, double>> table;
    for (const auto& row : res.rows) {
      if (row.status != "ok") continue;
      const auto v = getter(row);
      if (!v) continue;
      table.emplace_back(static_cast<double>(row.T), *v);
    }
    std::size_t in_window = 0;
    for (const auto& [T, v] : table) {
      if (T >= cfg.fit_T_min && T <= cfg.fit_T_max) ++in_window;
    }
    if (in_window < 5) {
      res.warnings.push_back(fmt::format("no {} fit: {} horizons in the fit window, need 5",
                                         name, in_window));
      return;
    }
    try {
      res.fits[name] = FitRate(table, cfg.fit_T_min, cfg.fit_T_max);
    } catch (const Error& e) {
      res.warnings.push_back(fmt::format("no {} fit: {}", name, e.what()));
    }
  };
  using Opt = std::optional<double>;
  fit_metric("sqrt_ham", [](const ExperimentRow& r) -> Opt { return r.last.sqrt_ham; });
  fit_metric("gap_bilinear", [](const ExperimentRow& r) -> Opt { return r.last.gap_bilinear; });
  if (cfg.averaged) {
    fit_metric("avg_sqrt_ham", [](const ExperimentRow& r) -> Opt {
      return r.averaged ? Opt(r.averaged->sqrt_ham) : std::nullopt;
    });
    fit_metric("avg_gap_bilinear", [](const ExperimentRow& r) -> Opt {
      return r.averaged ? Opt(r.averaged->gap_bilinear) : std::nullopt;
    });
  }

  // Bound checks.
  BoundHypotheses h;
  h.method = cfg.spec ? std::nullopt : std::optional<Method>(cfg.method);
  h.L = cfg.custom_instance ? cfg.custom_instance->L() : cfg.L;
  h.D = cfg.custom_instance ? cfg.custom_instance->D() : cfg.instance.D;
  h.eta = cfg.eta;
  if (cfg.spec) {
    h.k = cfg.spec->k();
    h.consistent = CheckConsistency(*cfg.spec).consistent;
  } else if (cfg.method == Method::kEG) {
    h.k = 2;
    h.consistent = true;
  }
  if (cfg.method == Method::kEGTimeVarying && !cfg.spec) {
    h.schedule = cfg.schedule.Materialize(cfg.T_grid.back(), cfg.L);
  }
  h.nu_is_L_over_sqrtT = !cfg.custom_instance && cfg.nu_mode == NuMode::kInverseSqrtT;
  for (BoundKind kind : cfg.bounds) {
    std::vector<std::pair<std::size_t, double>> obs;
    for (const auto& row : res.rows) {
      if (row.status != "ok") continue;
      double v = 0.0;
      switch (kind) {
        case BoundKind::kEgUpper:
        case BoundKind::kPpUpper: v = row.last.sqrt_ham; break;
        case BoundKind::kScliLowerHam: v = row.last.ham; break;
        case BoundKind::kEgGapUpper:
        case BoundKind::kScliLowerGap:
        case BoundKind::kTimeVaryingLower: v = row.last.gap_bilinear; break;
        case BoundKind::kScliLowerFunc: v = row.func_loss_max_T_2T; break;
      }
      obs.emplace_back(row.T, v);
    }
    res.bound_checks.push_back(CheckBounds(kind, h, obs));
  }
  if (cfg.T_grid.size() == 1) res.warnings.push_back("single horizon: no rate fit");
  return res;
}

// ---------------------------------------------------------------------------
// Last-iterate versus averaged-iterate separation.

struct SeparationOptions {
  Index n = 2;
  double L = 1.0;
  double D = 1.0;
  // Must lie in (0, 1/L). At 1/(30 L) the worst-case nu sits at the bottom of
  // the search range for every T <= 1e4, so the grid is still pre-asymptotic.
  double eta = 0.5;
  std::vector<std::size_t> T_grid = LogGrid(10, 10000);
  double fit_T_min = 100.0;
  double fit_T_max = 10000.0;
};

struct SeparationRow {
  std::size_t T = 0;
  double nu_worst = 0.0;
  double last_gap_worst = 0.0;       // simulated, per-T worst-case nu
  double last_gap_closed_form = 0.0; // closed form at the same nu
  double last_sqrt_ham_worst = 0.0;  // simulated, worst case for sqrt(Ham)
  double lower_sqrt_ham = 0.0;       // L D / (k sqrt(20 T))
  double upper_sqrt_ham = 0.0;       // 2 D / (eta sqrt(T))
  bool bracket_ok = false;
  double last_gap_inv_sqrt = 0.0;    // nu = L / sqrt(T)
  double last_gap_fixed = 0.0;       // nu = L
  double avg_gap_fixed = 0.0;        // averaged iterate, nu = L
};

struct SeparationReport {
  SeparationOptions options;
  std::vector<SeparationRow> rows;
  RateFit last_fit;
  RateFit averaged_fit;
  double exponent_difference = 0.0;
  bool difference_ok = false;
  bool bracket_ok = false;
};

inline SeparationReport RunSeparationReport(const SeparationOptions& opts) {
  if (!(opts.L > 0.0) || !(opts.eta > 0.0) || !(opts.eta < 1.0 / opts.L)) {
    throw PreconditionError("separation report needs 0 < eta < 1/L");
  }
  std::size_t in_window = 0;
  for (std::size_t i = 0; i < opts.T_grid.size(); ++i) {
    if (i > 0 && opts.T_grid[i] <= opts.T_grid[i - 1]) {
      throw PreconditionError("T_grid must be strictly increasing");
    }
    const double T = static_cast<double>(opts.T_grid[i]);
    if (T >= opts.fit_T_min && T <= opts.fit_T_max) ++in_window;
  }
  if (in_window < 5) {
    throw PreconditionError(
        fmt::format("separation report needs >= 5 horizons in the fit range, got {}", in_window));
  }
  SeparationReport rep;
  rep.options = opts;
  const ScliSpec eg = ScliSpec::Extragradient(opts.eta);
  const std::size_t T_max = opts.T_grid.back();
  auto eg_trace = [&](double nu, std::size_t T, bool avg) {
    const BilinearInstance inst = MakeHardInstance({opts.n, nu, opts.D});
    const OperatorHandle op = AsOperator(inst);
    SolverConfig sc;
    sc.eta = opts.eta;
    sc.T = T;
    Trace tr = RunEg(op, sc);
    return avg ? AverageTrace(std::move(tr), op) : tr;
  };

  const Trace fixed = eg_trace(opts.L, T_max, true);
  rep.rows.resize(opts.T_grid.size());
  ParallelFor(opts.T_grid.size(), [&](std::size_t i) {
    const std::size_t T = opts.T_grid[i];
    SeparationRow& row = rep.rows[i];
    row.T = T;
    const NuCertificate gap_cert =
        WorstCaseNuSearch(eg, opts.L, opts.D, T, LossKind::kGapExact);
    row.nu_worst = gap_cert.nu_star;
    row.last_gap_closed_form = gap_cert.loss_value;
    row.last_gap_worst = eg_trace(gap_cert.nu_star, T, false).losses.back().gap_bilinear;
    const NuCertificate ham_cert = WorstCaseNuSearch(eg, opts.L, opts.D, T, LossKind::kHam);
    row.last_sqrt_ham_worst = eg_trace(ham_cert.nu_star, T, false).losses.back().sqrt_ham;
    const double t = static_cast<double>(T);
    row.lower_sqrt_ham = opts.L * opts.D / (2.0 * std::sqrt(20.0 * t));
    row.upper_sqrt_ham = 2.0 * opts.D / (opts.eta * std::sqrt(t));
    row.bracket_ok = row.lower_sqrt_ham <= row.last_sqrt_ham_worst &&
                     row.last_sqrt_ham_worst <= row.upper_sqrt_ham;
    row.last_gap_inv_sqrt =
        eg_trace(opts.L / std::sqrt(t), T, false).losses.back().gap_bilinear;
    row.last_gap_fixed = fixed.losses[T].gap_bilinear;
    row.avg_gap_fixed = fixed.averaged_losses[T].gap_bilinear;
  });

  std::vector<std::pair<double, double>> last, avg;
  rep.bracket_ok = true;
  for (const auto& row : rep.rows) {
    last.emplace_back(static_cast<double>(row.T), row.last_gap_worst);
    avg.emplace_back(static_cast<double>(row.T), row.avg_gap_fixed);
    rep.bracket_ok = rep.bracket_ok && row.bracket_ok;
  }
  rep.last_fit = FitRate(last, opts.fit_T_min, opts.fit_T_max);
  rep.averaged_fit = FitRate(avg, opts.fit_T_min, opts.fit_T_max);
  rep.exponent_difference = rep.last_fit.exponent_alpha - rep.averaged_fit.exponent_alpha;
  rep.difference_ok = rep.exponent_difference >= 0.4 && rep.exponent_difference <= 0.6;
  return rep;
}

}  // namespace lastiter

#endif  // LASTITER_HARNESS_HPP_
