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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "lastiter/metrics.hpp"
#include "test_util.hpp"

namespace lastiter {
namespace {

// Brute-force ball gap for half = 2: f is linear in each block, so the optima
// lie on the circles of radius D around x*, y*; sample them densely.
double BruteForceGap(const BilinearInstance& inst, const Vector& z, double D) {
  const Vector& zs = inst.z_star();
  double best_max = -1e300, best_min = 1e300;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double th = 2.0 * std::numbers::pi * i / m;
    Vector zy = z, zx = z;
    zy(2) = zs(2) + D * std::cos(th);
    zy(3) = zs(3) + D * std::sin(th);
    zx(0) = zs(0) + D * std::cos(th);
    zx(1) = zs(1) + D * std::sin(th);
    best_max = std::max(best_max, EvalF(inst, zy));
    best_min = std::min(best_min, EvalF(inst, zx));
  }
  return best_max - best_min;
}

TEST(GapTest, OriginOnHardInstanceIsSqrtTwo) {
  const BilinearInstance inst = MakeHardInstance({2, 1.0, 1.0});
  const GapRegion region = DefaultGapRegion(inst);
  EXPECT_NEAR(GapBilinear(inst, region, Vector::Zero(2)), std::sqrt(2.0), 1e-15);
  // In one dimension the ball is an interval: brute force over its endpoints.
  const Vector& zs = inst.z_star();
  double fmax = -1e300, fmin = 1e300;
  for (double s : {-1.0, 1.0}) {
    fmax = std::max(fmax, EvalF(inst, Vector{{0.0, zs(1) + s}}));
    fmin = std::min(fmin, EvalF(inst, Vector{{zs(0) + s, 0.0}}));
  }
  EXPECT_NEAR(fmax - fmin, std::sqrt(2.0), 1e-15);
}

TEST(GapTest, ClosedFormMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const BilinearInstance inst = testing::RandomInstance(2, seed);
    const Vector z = testing::RandomPoint(4, seed + 10);
    const GapRegion region = DefaultGapRegion(inst, std::nullopt, 1.3);
    EXPECT_NEAR(GapBilinear(inst, region, z), BruteForceGap(inst, z, 1.3), 1e-8);
  }
}

TEST(GapTest, SandwichAroundOperatorNorm) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const BilinearInstance inst = testing::RandomInstance(1 + seed % 4, seed);
    const GapRegion region = DefaultGapRegion(inst, std::nullopt, 0.5 + seed % 3);
    const Vector z = testing::RandomPoint(inst.n(), seed * 7, 3.0);
    const double gap = GapBilinear(inst, region, z);
    const double lower = GapOperatorNorm(inst, region, z);
    const OperatorHandle op = AsOperator(inst);
    const double upper = GapLinearized(op, region, z);
    EXPECT_LE(lower, gap * (1.0 + 1e-14));
    EXPECT_LE(gap, upper * (1.0 + 1e-14));
    EXPECT_GE(gap, 0.0);
  }
}

TEST(GapTest, RequiresCenteredRegion) {
  const BilinearInstance inst = MakeHardInstance({2, 1.0, 1.0});
  const GapRegion off = MakeGapRegion(Vector::Zero(2), 1, 1.0);
  EXPECT_THROW(GapBilinear(inst, off, Vector::Zero(2)), PreconditionError);
  EXPECT_THROW(MakeGapRegion(Vector::Zero(2), 1, -1.0), PreconditionError);
}

TEST(GapTest, DefaultRadiusIsDistanceFromStart) {
  const BilinearInstance inst = MakeHardInstance({2, 1.0, 1.0});
  const Vector z0{{1.0, 2.0}};
  EXPECT_NEAR(DefaultGapRegion(inst, z0).radius, (z0 - inst.z_star()).norm(), 1e-15);
  EXPECT_NEAR(DefaultGapRegion(inst).radius, 1.0, 1e-15);
}

TEST(LossesTest, ZeroAtSaddlePoint) {
  const BilinearInstance inst = testing::RandomInstance(3, 2);
  const OperatorHandle op = AsOperator(inst);
  const LossRecord r = EvaluateLosses(op, DefaultGapRegion(inst), inst.z_star());
  EXPECT_NEAR(r.ham, 0.0, 1e-20);
  EXPECT_NEAR(r.gap_bilinear, 0.0, 1e-9);
  EXPECT_NEAR(r.func_loss, 0.0, 1e-12);
  EXPECT_NEAR(r.dist_to_star, 0.0, 0.0);
  EXPECT_TRUE(r.in_region);
}

TEST(LossesTest, BlackBoxOperatorLeavesBilinearEntriesNan) {
  const OperatorHandle op = WrapGeneralOperator([](const Vector& z) -> Vector { return 2.0 * z; },
                                                nullptr, 2, 1, 2.0);
  const LossRecord r = EvaluateLosses(op, MakeGapRegion(Vector::Zero(2), 1, 1.0), Vector{{3.0, 4.0}});
  EXPECT_DOUBLE_EQ(r.sqrt_ham, 10.0);
  EXPECT_DOUBLE_EQ(r.ham, 100.0);
  EXPECT_DOUBLE_EQ(r.gap_linearized, 10.0 * std::sqrt(2.0));
  EXPECT_TRUE(std::isnan(r.gap_bilinear));
  EXPECT_TRUE(std::isnan(r.func_loss));
  EXPECT_FALSE(r.in_region);
}

TEST(LossesTest, FunctionValueAndHamiltonianByHand) {
  const BilinearInstance inst = MakeHardInstance({2, 1.0, 1.0});
  EXPECT_NEAR(FunctionValueLoss(inst, Vector{{1.0, 1.0}}), 1.5 + std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(Hamiltonian(AsOperator(inst), Vector::Zero(2)), 1.0, 1e-15);
  EXPECT_NEAR(DistanceToStar(inst, Vector::Zero(2)), 1.0, 1e-15);
}

}  // namespace
}  // namespace lastiter
