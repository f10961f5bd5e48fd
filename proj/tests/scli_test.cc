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

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "lastiter/scli.hpp"
#include "test_util.hpp"

namespace lastiter {
namespace {

// Random consistent spec with deg N <= k - 1 that contracts on the hard
// instance at nu: q0(nu i) = 1 + nu i N(nu i) with |q0| < 1 is arranged by
// scaling the first coefficient.
ScliSpec RandomConsistentSpec(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> n(k);
  n[0] = -0.5 + 0.1 * normal(rng);
  for (int j = 1; j < k; ++j) n[j] = 0.1 * normal(rng) / (j + 1);
  return ScliSpec::Consistent(k, n);
}

TEST(ScliSpecTest, ExtragradientCoefficients) {
  const ScliSpec eg = ScliSpec::Extragradient(0.1);
  EXPECT_EQ(eg.k(), 2);
  EXPECT_EQ(eg.c0_coeffs(), (std::vector<double>{1.0, -0.1, 0.1 * 0.1}));
  EXPECT_EQ(eg.n_coeffs(), (std::vector<double>{-0.1, 0.1 * 0.1}));
  EXPECT_TRUE(CheckConsistency(eg).consistent);
}

TEST(ScliSpecTest, ValidationAndConsistency) {
  EXPECT_THROW(ScliSpec(0, {}, {1.0}).Validate(), PreconditionError);
  EXPECT_THROW(ScliSpec(1, {1.0, 2.0}, {1.0}).Validate(), PreconditionError);
  EXPECT_THROW(ScliSpec(1, {1.0}, {1.0, 1.0, 1.0}).Validate(), PreconditionError);
  EXPECT_THROW(ScliSpec(1, {}, {}).Validate(), PreconditionError);
  const ScliSpec bad(2, {-0.1, 0.01}, {1.0, -0.2, 0.01});
  EXPECT_FALSE(CheckConsistency(bad).consistent);
  EXPECT_NEAR(CheckConsistency(bad).residual, 0.1, 1e-15);
  EXPECT_THROW(ClosedFormIterate(bad, MakeHardInstance({2, 1.0, 1.0}), 3), PreconditionError);
  // C0 = [0] with k = 1 has no consistent N of degree 0.
  const ScliSpec zero(1, {}, {0.0});
  EXPECT_FALSE(CheckConsistency(zero).consistent);
}

TEST(ScliSpecTest, IdentityMakesNoProgress) {
  const BilinearInstance inst = MakeHardInstance({2, 1.0, 1.0});
  const Trace tr = SimulateScli(ScliSpec::Identity(), inst, std::nullopt, 10);
  for (const auto& z : tr.iterates) EXPECT_EQ(z.norm(), 0.0);
  EXPECT_NEAR(HamiltonianClosedForm(ScliSpec::Identity(), {2, 1.0, 1.0}, 10), 1.0, 1e-15);
}

TEST(ScliSpecTest, ExtragradientSpecReproducesSolver) {
  const BilinearInstance inst = testing::RandomInstance(3, 21);
  const double eta = 0.3 / inst.L();
  SolverConfig cfg;
  cfg.eta = eta;
  cfg.T = 200;
  const Trace eg = RunEg(AsOperator(inst), cfg);
  const Trace sc = SimulateScli(ScliSpec::Extragradient(eta), inst, std::nullopt, 200);
  for (std::size_t t = 0; t <= 200; ++t) {
    EXPECT_NEAR((eg.iterates[t] - sc.iterates[t]).norm(), 0.0, 1e-12);
  }
}

TEST(ScliSpecTest, ProfileOfExtragradient) {
  const double eta = 0.2, nu = 0.7;
  const SpectralProfile p = Profile(ScliSpec::Extragradient(eta), nu);
  const std::complex<double> expect(1.0 - eta * eta * nu * nu, -eta * nu);
  EXPECT_NEAR(std::abs(p.q0_at_nui - expect), 0.0, 1e-15);
  EXPECT_NEAR(p.magnitude, std::abs(expect), 1e-15);
  EXPECT_GE(p.phase_theta, 0.0);
  EXPECT_LT(p.phase_theta, 2.0 * std::numbers::pi);
}

TEST(ClosedFormTest, IterateMatchesSimulationForRandomSpecs) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 1 + trial % 6;
    const double nu = 0.3 + 0.1 * trial;
    ScliSpec spec = RandomConsistentSpec(k, rng);
    for (int draw = 0; draw < 100 && Profile(spec, nu).magnitude > 1.0; ++draw) {
      spec = RandomConsistentSpec(k, rng);
    }
    // Expanding specs (always the case for k = 1) are compared over a horizon
    // where the iterates stay below ~1e6.
    const double mag = Profile(spec, nu).magnitude;
    const std::size_t horizon =
        mag <= 1.0 ? 300 : std::min<std::size_t>(300, std::log(1e6) / std::log(mag));
    const BilinearInstance inst = MakeHardInstance({4, nu, 1.0});
    const Trace tr = SimulateScli(spec, inst, std::nullopt, horizon);
    for (std::size_t t : {std::size_t{0}, std::size_t{1}, horizon / 2, horizon}) {
      const Vector cf = ClosedFormIterate(spec, inst, t).vec();
      EXPECT_LE((cf - tr.iterates[t]).norm(), 1e-10 * (1.0 + cf.norm()))
          << "k=" << k << " t=" << t;
    }
  }
}

TEST(ClosedFormTest, LossesMatchSimulation) {
  const ScliSpec spec = ScliSpec::Extragradient(0.5);
  for (double nu : {0.05, 0.3, 1.0}) {
    const HardInstanceParams p{2, nu, 1.7};
    const BilinearInstance inst = MakeHardInstance(p);
    const Trace tr = SimulateScli(spec, inst, std::nullopt, 400);
    const double fstar = EvalF(inst, inst.z_star());
    for (std::size_t t : {1u, 10u, 100u, 400u}) {
      const Vector& z = tr.iterates[t];
      const double ham = tr.losses[t].ham;
      EXPECT_NEAR(HamiltonianClosedForm(spec, p, t), ham, 1e-12 * (1.0 + ham));
      EXPECT_NEAR(GapClosedForm(spec, p, t), p.D * tr.losses[t].sqrt_ham, 1e-12);
      EXPECT_NEAR(GapExactClosedForm(spec, p, t), tr.losses[t].gap_bilinear, 1e-12);
      EXPECT_NEAR(FunctionValueClosedForm(spec, p, t), EvalF(inst, z) - fstar, 1e-12);
    }
  }
}

TEST(NuSearchTest, MatchesBruteForceScan) {
  const ScliSpec spec = ScliSpec::Extragradient(0.5);
  for (std::size_t t : {10u, 100u, 1000u}) {
    for (LossKind kind : {LossKind::kHam, LossKind::kGap, LossKind::kGapExact}) {
      const NuCertificate c = WorstCaseNuSearch(spec, 1.0, 1.0, t, kind);
      const double lo = 1.0 / (40.0 * t * 4.0);
      double best = 0.0;
      for (int i = 0; i <= 200000; ++i) {
        const double nu = std::exp(std::log(lo) + (0.0 - std::log(lo)) * i / 200000.0);
        best = std::max(best, ClosedFormLoss(spec, nu, 1.0, t, kind));
      }
      EXPECT_GE(c.loss_value, best * (1.0 - 1e-6)) << LossKindName(kind) << " t=" << t;
      EXPECT_NEAR(ClosedFormLoss(spec, c.nu_star, 1.0, t, kind), c.loss_value, 1e-15);
    }
  }
}

TEST(NuSearchTest, FunctionValueUsesBothHorizons) {
  const ScliSpec spec = ScliSpec::Extragradient(0.5);
  const NuCertificate c = WorstCaseNuSearch(spec, 1.0, 1.0, 50, LossKind::kFunc);
  EXPECT_TRUE(c.horizon == 50u || c.horizon == 100u);
  EXPECT_GE(c.loss_value, WorstCaseNuSearch(spec, 1.0, 1.0, 50, LossKind::kFunc,
                                            {.grid_points = 10000, .nu_tol = 1e-10,
                                             .nu_min = std::nullopt})
                                  .loss_value - 1e-15);
  EXPECT_THROW(WorstCaseNuSearch(spec, 1.0, 1.0, 0, LossKind::kHam), PreconditionError);
}

TEST(TightnessTest, ExactCoefficientsForKThree) {
  // T = 1: N' = N / 2 with N = u - 1 in u = eta A.
  const ScliSpec spec = BuildTightnessSpec(3, 1.0);
  const auto& ex = *spec.exact();
  ASSERT_EQ(ex.n_u.size(), 2u);
  EXPECT_EQ(ex.n_u[0], Rational(-1, 2));
  EXPECT_EQ(ex.n_u[1], Rational(1, 2));
  EXPECT_EQ(spec.n_coeffs(), (std::vector<double>{-0.25, 0.125}));
  EXPECT_TRUE(CheckConsistency(spec).consistent);
  EXPECT_TRUE(CheckConsistency(spec).exact);
  EXPECT_THROW(BuildTightnessSpec(2, 1.0), PreconditionError);
  EXPECT_THROW(BuildTightnessSpec(65, 1.0), PreconditionError);
}

TEST(TightnessTest, ExactCoefficientsForKFive) {
  // T = 2: N' = (C0 + 2) N / 3 = (3 - u + u^2)(u - 1) / 3.
  const ScliSpec spec = BuildTightnessSpec(5, 1.0);
  const auto& n = spec.exact()->n_u;
  ASSERT_EQ(n.size(), 4u);
  EXPECT_EQ(n[0], Rational(-1));
  EXPECT_EQ(n[1], Rational(4, 3));
  EXPECT_EQ(n[2], Rational(-2, 3));
  EXPECT_EQ(n[3], Rational(1, 3));
}

TEST(TightnessTest, DegreeBudgetAndRationalPointEvaluation) {
  // N'(u) = sum_{i=0}^{T-1} (T - i) (1 - u + u^2)^i (u - 1) / (T + 1).
  for (int k : {3, 4, 5, 9, 17, 64}) {
    const ScliSpec spec = BuildTightnessSpec(k, 1.0);
    EXPECT_NO_THROW(spec.Validate());
    const int T = (k - 1) / 2;
    EXPECT_EQ(spec.n_coeffs().size(), static_cast<std::size_t>(2 * T));
    if (k > 17) continue;
    for (const Rational u : {Rational(1, 3), Rational(-2, 5), Rational(3, 2)}) {
      Rational expect(0), c0 = Rational(1) - u + u * u, pw(1);
      for (int i = 0; i < T; ++i) {
        expect += Rational(T - i) * pw;
        pw *= c0;
      }
      expect = expect * (u - Rational(1)) / Rational(T + 1);
      Rational have(0), up(1);
      for (const Rational& c : spec.exact()->n_u) {
        have += c * up;
        up *= u;
      }
      EXPECT_EQ(have, expect) << "k=" << k;
    }
  }
}

TEST(TightnessTest, FirstIterateIsAveragedExtragradient) {
  for (int k : {3, 5, 9, 17}) {
    const BilinearInstance inst = testing::RandomInstance(2, 31 + k);
    const ScliSpec spec = BuildTightnessSpec(k, inst.L());
    const Vector z1 = SimulateScli(spec, inst, std::nullopt, 1).iterates[1];
    SolverConfig cfg;
    cfg.eta = 1.0 / (2.0 * inst.L());
    cfg.T = (k - 1) / 2;
    const OperatorHandle op = AsOperator(inst);
    const Trace avg = AverageTrace(RunEg(op, cfg), op);
    EXPECT_NEAR((z1 - avg.averaged_iterates.back()).norm(), 0.0, 1e-12) << "k=" << k;
  }
}

TEST(TwoCliTest, RecurrenceMatchesAveragedExtragradient) {
  const BilinearInstance inst = testing::RandomInstance(3, 8);
  const TwoCliCheck c = AveragedEgAs2CliCheck(inst, 0.5 / inst.L(), 500);
  EXPECT_LE(c.max_deviation, 1e-10);
  EXPECT_EQ(c.recurrence.size(), 501u);
  const TwoCliCheck from_start =
      AveragedEgAs2CliCheck(inst, 0.1, 100, SaddlePoint(Vector::Ones(6), 3));
  EXPECT_LE(from_start.max_deviation, 1e-10);
}

TEST(MatrixPolyTest, HornerAndPower) {
  const Matrix A{{0.0, 1.0}, {-1.0, 0.0}};
  const Matrix p = MatrixPoly({1.0, 2.0, 3.0}, A);  // I + 2A + 3A^2 = -2I + 2A
  EXPECT_NEAR((p - Matrix{{-2.0, 2.0}, {-2.0, -2.0}}).norm(), 0.0, 1e-15);
  EXPECT_NEAR((MatrixPower(A, 4) - Matrix::Identity(2, 2)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((MatrixPower(A, 0) - Matrix::Identity(2, 2)).norm(), 0.0, 0.0);
}

}  // namespace
}  // namespace lastiter
