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

// Saddle-point problems and their monotone operators.
//
// A convex-concave f(x, y) induces F(z) = (grad_x f, -grad_y f), which is
// monotone. The bilinear family
//
//   f(x, y) = x^T M y + b1^T x + b2^T y
//
// has the affine operator F(z) = A z + b with A = [[0, M], [-M^T, 0]] and
// b = (b1, -b2). `BilinearInstance` stores one member of that family together
// with its exact saddle point; `MakeHardInstance` builds the one-parameter
// family M = nu I used by the lower-bound experiments. `OperatorHandle` is the
// type-erased view every solver consumes.

#ifndef LASTITER_PROBLEM_HPP_
#define LASTITER_PROBLEM_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "lastiter/core.hpp"

namespace lastiter {

// Parameters of the hard bilinear instance: M = nu I, b1 = b2 = (nu D / sqrt(n)) 1.
struct HardInstanceParams {
  Index n = 2;
  double nu = 1.0;
  double D = 1.0;
};

class BilinearInstance {
 public:
  // Validates shapes and invertibility of M, then derives A, b, z*, D and L.
  BilinearInstance(Matrix M, Vector b1, Vector b2)
      : M_(std::move(M)), b1_(std::move(b1)), b2_(std::move(b2)) {
    const Index half = M_.rows();
    if (half == 0 || M_.cols() != half) {
      throw PreconditionError("bilinear instance needs a square, non-empty M");
    }
    CheckDimension("bilinear instance b1", b1_, half);
    CheckDimension("bilinear instance b2", b2_, half);
    if (!M_.allFinite() || !b1_.allFinite() || !b2_.allFinite()) {
      throw PreconditionError("bilinear instance data must be finite");
    }
    Eigen::JacobiSVD<Matrix> svd(M_);
    const auto& sv = svd.singularValues();
    L_ = sv(0);
    sigma_min_ = sv(sv.size() - 1);
    if (!(sigma_min_ > 0.0) ||
        sigma_min_ <= std::numeric_limits<double>::epsilon() * L_ * half) {
      throw PreconditionError("bilinear instance M must be full rank");
    }

    A_ = Matrix::Zero(2 * half, 2 * half);
    A_.topRightCorner(half, half) = M_;
    A_.bottomLeftCorner(half, half) = -M_.transpose();
    b_.resize(2 * half);
    b_ << b1_, -b2_;

    z_star_ = A_.partialPivLu().solve(-b_);
    D_ = z_star_.norm();
  }

  Index n() const { return A_.rows(); }
  Index half() const { return M_.rows(); }

  const Matrix& M() const { return M_; }
  const Vector& b1() const { return b1_; }
  const Vector& b2() const { return b2_; }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  const Vector& z_star() const { return z_star_; }
  // ||A^{-1} b||, the distance from the origin to the saddle point.
  double D() const { return D_; }
  // Largest singular value of M (equivalently the operator norm of A).
  double L() const { return L_; }
  double sigma_min() const { return sigma_min_; }

  // Set only for instances produced by MakeHardInstance.
  const std::optional<HardInstanceParams>& hard_params() const {
    return hard_params_;
  }

 private:
  friend BilinearInstance MakeHardInstance(const HardInstanceParams& params);

  Matrix M_;
  Vector b1_;
  Vector b2_;
  Matrix A_;
  Vector b_;
  Vector z_star_;
  double D_ = 0.0;
  double L_ = 0.0;
  double sigma_min_ = 0.0;
  std::optional<HardInstanceParams> hard_params_;
};

inline BilinearInstance MakeHardInstance(const HardInstanceParams& params) {
  if (params.n <= 0 || params.n % 2 != 0) {
    throw PreconditionError("hard instance dimension must be even and positive, got " +
                            std::to_string(params.n));
  }
  if (!(params.nu > 0.0) || !std::isfinite(params.nu)) {
    throw PreconditionError("hard instance needs nu > 0");
  }
  // D = 0 is allowed: it yields the already-solved instance b = 0.
  if (!(params.D >= 0.0) || !std::isfinite(params.D)) {
    throw PreconditionError("hard instance needs D >= 0");
  }
  const Index half = params.n / 2;
  const double entry =
      params.nu * params.D / std::sqrt(static_cast<double>(params.n));
  BilinearInstance inst(params.nu * Matrix::Identity(half, half),
                        Vector::Constant(half, entry),
                        Vector::Constant(half, entry));
  inst.hard_params_ = params;
  return inst;
}

// F(z) = A z + b.
inline Vector EvalOperator(const BilinearInstance& inst, const Vector& z) {
  CheckDimension("EvalOperator", z, inst.n());
  return inst.A() * z + inst.b();
}

inline Vector EvalOperator(const BilinearInstance& inst, const SaddlePoint& z) {
  return EvalOperator(inst, z.vec());
}

// f(x, y) = x^T M y + b1^T x + b2^T y.
inline double EvalF(const BilinearInstance& inst, const Vector& z) {
  CheckDimension("EvalF", z, inst.n());
  const Index h = inst.half();
  const auto x = z.head(h);
  const auto y = z.tail(h);
  return x.dot(inst.M() * y) + inst.b1().dot(x) + inst.b2().dot(y);
}

inline double EvalF(const BilinearInstance& inst, const SaddlePoint& z) {
  return EvalF(inst, z.vec());
}

// Type-erased monotone operator. Solvers only need `value`; metrics and
// theory checks use the optional pieces when present.
struct OperatorHandle {
  using ValueFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  ValueFn value;
  JacobianFn jacobian;  // empty when unavailable
  Index dim = 0;
  Index split = 0;
  double lipschitz_L = std::numeric_limits<double>::infinity();
  std::optional<double> jac_lipschitz_Lambda;
  std::optional<Vector> solution;  // a zero of F, when known
  std::shared_ptr<const BilinearInstance> bilinear;  // set for affine bilinear ops

  Vector operator()(const Vector& z) const {
    CheckDimension("OperatorHandle", z, dim);
    return value(z);
  }

  bool has_jacobian() const { return static_cast<bool>(jacobian); }
  bool has_lipschitz() const { return std::isfinite(lipschitz_L); }
};

inline OperatorHandle WrapGeneralOperator(OperatorHandle::ValueFn value_fn,
                                          OperatorHandle::JacobianFn jacobian_fn,
                                          Index dim, Index split,
                                          double lipschitz_L,
                                          std::optional<double> lambda = std::nullopt) {
  OperatorHandle op;
  op.value = std::move(value_fn);
  op.jacobian = std::move(jacobian_fn);
  op.dim = dim;
  op.split = split;
  op.lipschitz_L = lipschitz_L;
  op.jac_lipschitz_Lambda = lambda;
  return op;
}

// Bilinear instances go through the same wrapping path as black-box operators;
// the constant Jacobian gives Lambda = 0.
inline OperatorHandle AsOperator(const BilinearInstance& inst) {
  auto shared = std::make_shared<const BilinearInstance>(inst);
  OperatorHandle op = WrapGeneralOperator(
      [shared](const Vector& z) -> Vector { return shared->A() * z + shared->b(); },
      [shared](const Vector&) -> Matrix { return shared->A(); }, inst.n(),
      inst.half(), inst.L(), 0.0);
  op.solution = inst.z_star();
  op.bilinear = std::move(shared);
  return op;
}

struct MonotonicityReport {
  bool monotone = true;
  std::size_t pairs = 0;
  // Smallest <F(z) - F(z'), z - z'> seen, normalized by ||z - z'||^2.
  double worst_inner = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
};

// Randomized monotonicity guardrail for black-box operators. Points are drawn
// from N(0, scale^2 I); a pair fails when the inner product drops below
// -1e-8 * scale * ||z - z'||.
inline MonotonicityReport SpotCheckMonotone(const OperatorHandle& op,
                                            std::uint64_t seed,
                                            std::size_t pairs = 256,
                                            double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  MonotonicityReport report;
  report.tolerance = 1e-8 * scale;
  Vector z(op.dim), w(op.dim);
  for (std::size_t p = 0; p < pairs; ++p) {
    for (Index i = 0; i < op.dim; ++i) z(i) = normal(rng);
    for (Index i = 0; i < op.dim; ++i) w(i) = normal(rng);
    const Vector d = z - w;
    const double dn = d.norm();
    if (dn == 0.0) continue;
    const double inner = (op(z) - op(w)).dot(d);
    report.worst_inner = std::min(report.worst_inner, inner / (dn * dn));
    if (inner < -report.tolerance * dn) report.monotone = false;
    ++report.pairs;
  }
  return report;
}

}  // namespace lastiter

#endif  // LASTITER_PROBLEM_HPP_
