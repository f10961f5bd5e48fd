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

// Solution-quality functionals.
//
// Hamiltonian      ||F(z)||^2 (no 1/2 factor).
// Ball gap         max_{y' in B(y*, D)} f(x, y') - min_{x' in B(x*, D)} f(x', y).
//                  For bilinear f this is D ||M^T x + b2|| + D ||M y + b1||, and
//                  D ||F(z)|| <= gap <= sqrt(2) D ||F(z)||.
// Linearized gap   sqrt(2) D ||F(z)||, an upper bound on the ball gap of any
//                  convex-concave f.

#ifndef LASTITER_METRICS_HPP_
#define LASTITER_METRICS_HPP_

#include <cmath>
#include <limits>
#include <optional>

#include "lastiter/core.hpp"
#include "lastiter/problem.hpp"

namespace lastiter {

// X' x Y' = B(x*, D) x B(y*, D).
struct GapRegion {
  Vector center;
  Index split = 0;
  double radius = 0.0;
};

inline GapRegion MakeGapRegion(const Vector& center, Index split, double radius) {
  if (!(radius >= 0.0)) throw PreconditionError("gap region radius must be >= 0");
  return GapRegion{center, split, radius};
}

// Centered at the saddle point; radius defaults to ||z0 - z*||.
inline GapRegion DefaultGapRegion(const BilinearInstance& inst,
                                  const std::optional<Vector>& z0 = std::nullopt,
                                  std::optional<double> radius = std::nullopt) {
  double r = inst.D();
  if (radius) {
    r = *radius;
  } else if (z0) {
    CheckDimension("DefaultGapRegion", *z0, inst.n());
    r = (*z0 - inst.z_star()).norm();
  }
  return MakeGapRegion(inst.z_star(), inst.half(), r);
}

inline bool InsideRegion(const GapRegion& region, const Vector& z) {
  const Index nx = region.split;
  const Index ny = z.size() - nx;
  const double slack = 1e-12 * (1.0 + region.radius);
  return (z.head(nx) - region.center.head(nx)).norm() <= region.radius + slack &&
         (z.tail(ny) - region.center.tail(ny)).norm() <= region.radius + slack;
}

inline double Hamiltonian(const OperatorHandle& op, const Vector& z) {
  return op(z).squaredNorm();
}

// Exact ball gap of a bilinear game. The region must be centered at z*; the
// closed form comes from maximizing a linear function over a ball.
inline double GapBilinear(const BilinearInstance& inst, const GapRegion& region,
                          const Vector& z) {
  CheckDimension("GapBilinear", z, inst.n());
  CheckDimension("GapBilinear region center", region.center, inst.n());
  const double off = (region.center - inst.z_star()).norm();
  if (off > 1e-12 * (1.0 + inst.z_star().norm())) {
    throw PreconditionError(
        "GapBilinear closed form needs the region centered at the saddle point");
  }
  const Index h = inst.half();
  const auto x = z.head(h);
  const auto y = z.tail(h);
  const double dual = (inst.M().transpose() * x + inst.b2()).norm();
  const double primal = (inst.M() * y + inst.b1()).norm();
  return region.radius * (dual + primal);
}

// D ||A z + b||: the lower end of the bilinear gap sandwich, and the quantity
// the spectral closed forms track.
inline double GapOperatorNorm(const BilinearInstance& inst, const GapRegion& region,
                              const Vector& z) {
  return region.radius * EvalOperator(inst, z).norm();
}

inline double GapLinearized(const OperatorHandle& op, const GapRegion& region,
                            const Vector& z) {
  return std::sqrt(2.0) * region.radius * op(z).norm();
}

// |f(z) - f(z*)|.
inline double FunctionValueLoss(const BilinearInstance& inst, const Vector& z) {
  return std::abs(EvalF(inst, z) - EvalF(inst, inst.z_star()));
}

inline double DistanceToStar(const BilinearInstance& inst, const Vector& z) {
  CheckDimension("DistanceToStar", z, inst.n());
  return (z - inst.z_star()).norm();
}

// One row of per-iterate losses. Entries that need a bilinear instance or a
// known solution are NaN for black-box operators.
struct LossRecord {
  double ham = 0.0;
  double sqrt_ham = 0.0;
  double gap_bilinear = std::numeric_limits<double>::quiet_NaN();
  double gap_linearized = 0.0;
  double func_loss = std::numeric_limits<double>::quiet_NaN();
  double dist_to_star = std::numeric_limits<double>::quiet_NaN();
  bool in_region = false;
};

inline LossRecord EvaluateLosses(const OperatorHandle& op, const GapRegion& region,
                                 const Vector& z) {
  LossRecord rec;
  const Vector f = op(z);
  rec.sqrt_ham = f.norm();
  rec.ham = rec.sqrt_ham * rec.sqrt_ham;
  rec.gap_linearized = std::sqrt(2.0) * region.radius * rec.sqrt_ham;
  if (op.bilinear) {
    rec.gap_bilinear = GapBilinear(*op.bilinear, region, z);
    rec.func_loss = FunctionValueLoss(*op.bilinear, z);
  }
  if (op.solution) rec.dist_to_star = (z - *op.solution).norm();
  rec.in_region = region.center.size() == z.size() && InsideRegion(region, z);
  return rec;
}

}  // namespace lastiter

#endif  // LASTITER_METRICS_HPP_
