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

// Stationary canonical linear iterative methods with one step of memory.
//
// On an affine operator F(z) = A z + b such a method iterates
//
//   z^t = C0(A) z^{t-1} + N(A) b,
//
// where N and C0 are real polynomials of degree <= k-1 and <= k. The method is
// consistent (its fixed point is -A^{-1} b for every b) iff C0 = I + N(A) A.
// For consistent methods started at the origin
//
//   z^t = (C0(A)^t - I) A^{-1} b,
//
// and on the hard family M = nu I every loss reduces to scalar arithmetic on
// q0(nu i), the value of the C0 polynomial at the eigenvalue nu i of A.

#ifndef LASTITER_SCLI_HPP_
#define LASTITER_SCLI_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include "lastiter/core.hpp"
#include "lastiter/metrics.hpp"
#include "lastiter/problem.hpp"
#include "lastiter/solvers.hpp"

namespace lastiter {

using Rational = boost::rational<std::int64_t>;
using Complex = std::complex<double>;

// Dense polynomial helpers; coefficient i multiplies y^i.

template <class T>
std::vector<T> PolyAdd(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out(std::max(a.size(), b.size()), T(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

template <class T>
std::vector<T> PolyMul(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<T> out(a.size() + b.size() - 1, T(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

template <class T, class S>
std::vector<T> PolyScale(std::vector<T> a, const S& s) {
  for (auto& c : a) c *= s;
  return a;
}

// Horner evaluation for scalar (real, complex or rational) arguments.
template <class Coeff, class Arg>
Arg PolyEval(const std::vector<Coeff>& coeffs, const Arg& y) {
  Arg acc(0);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * y + Arg(*it);
  return acc;
}

// Horner evaluation of sum_j c_j A^j.
inline Matrix MatrixPoly(const std::vector<double>& coeffs, const Matrix& A) {
  const Index n = A.rows();
  Matrix acc = Matrix::Zero(n, n);
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    acc = acc * A;
    acc.diagonal().array() += *it;
  }
  return acc;
}

// Repeated squaring.
inline Matrix MatrixPower(Matrix base, std::size_t t) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  while (t > 0) {
    if (t & 1U) result = result * base;
    t >>= 1U;
    if (t > 0) base = base * base;
  }
  return result;
}

// Exact coefficients in the scaled variable u = s A: the A^j coefficient of
// C0 is s^j c0_u[j] and that of N is s^{j+1} n_u[j].
struct ExactCoefficients {
  std::vector<Rational> n_u;
  std::vector<Rational> c0_u;
  double scale = 1.0;
};

class ScliSpec {
 public:
  ScliSpec() = default;
  ScliSpec(int k, std::vector<double> n_coeffs, std::vector<double> c0_coeffs)
      : k_(k), n_(std::move(n_coeffs)), c0_(std::move(c0_coeffs)) {}

  // C0 = 1 + y N(y).
  static ScliSpec Consistent(int k, std::vector<double> n_coeffs) {
    std::vector<double> c0(n_coeffs.size() + 1, 0.0);
    c0[0] = 1.0;
    for (std::size_t j = 0; j < n_coeffs.size(); ++j) c0[j + 1] = n_coeffs[j];
    return ScliSpec(k, std::move(n_coeffs), std::move(c0));
  }

  // Extragradient with constant step: C0 = 1 - eta y + eta^2 y^2, N = -eta + eta^2 y.
  static ScliSpec Extragradient(double eta) {
    return ScliSpec(2, {-eta, eta * eta}, {1.0, -eta, eta * eta});
  }

  // z^t = z^{t-1}: no progress.
  static ScliSpec Identity() { return ScliSpec(1, {}, {1.0}); }

  static ScliSpec FromExact(int k, ExactCoefficients exact) {
    std::vector<double> n(exact.n_u.size()), c0(exact.c0_u.size());
    for (std::size_t j = 0; j < n.size(); ++j) {
      n[j] = boost::rational_cast<double>(exact.n_u[j]) *
             std::pow(exact.scale, static_cast<double>(j + 1));
    }
    for (std::size_t j = 0; j < c0.size(); ++j) {
      c0[j] = boost::rational_cast<double>(exact.c0_u[j]) *
              std::pow(exact.scale, static_cast<double>(j));
    }
    ScliSpec spec(k, std::move(n), std::move(c0));
    spec.exact_ = std::move(exact);
    return spec;
  }

  int k() const { return k_; }
  const std::vector<double>& n_coeffs() const { return n_; }
  const std::vector<double>& c0_coeffs() const { return c0_; }
  const std::optional<ExactCoefficients>& exact() const { return exact_; }

  // Degree budget: k >= 1, deg N <= k - 1, deg C0 <= k, C0 non-empty.
  void Validate() const {
    if (k_ < 1) {
      throw PreconditionError("SCLI degree budget k must be >= 1 (got " +
                              std::to_string(k_) + ")");
    }
    if (c0_.empty()) throw PreconditionError("SCLI spec has no C0 coefficients");
    if (n_.size() > static_cast<std::size_t>(k_)) {
      throw PreconditionError("SCLI inversion polynomial exceeds degree k - 1");
    }
    if (c0_.size() > static_cast<std::size_t>(k_) + 1) {
      throw PreconditionError("SCLI C0 polynomial exceeds degree k");
    }
    for (double c : n_) {
      if (!std::isfinite(c)) throw PreconditionError("non-finite SCLI coefficient");
    }
    for (double c : c0_) {
      if (!std::isfinite(c)) throw PreconditionError("non-finite SCLI coefficient");
    }
  }

  Complex q0(Complex y) const { return PolyEval(c0_, y); }

 private:
  int k_ = 1;
  std::vector<double> n_;
  std::vector<double> c0_;
  std::optional<ExactCoefficients> exact_;
};

struct ConsistencyResult {
  bool consistent = false;
  // max_j |c0_j - [j == 0] - n_{j-1}|
  double residual = 0.0;
  bool exact = false;
};

inline ConsistencyResult CheckConsistency(const ScliSpec& spec) {
  ConsistencyResult res;
  if (spec.exact()) {
    const auto& ex = *spec.exact();
    const std::size_t len = std::max(ex.c0_u.size(), ex.n_u.size() + 1);
    Rational worst(0);
    for (std::size_t j = 0; j < len; ++j) {
      Rational expected(j == 0 ? 1 : 0);
      if (j >= 1 && j - 1 < ex.n_u.size()) expected += ex.n_u[j - 1];
      const Rational have = j < ex.c0_u.size() ? ex.c0_u[j] : Rational(0);
      worst = std::max(worst, boost::abs(have - expected));
    }
    res.exact = true;
    res.consistent = worst == Rational(0);
    res.residual = boost::rational_cast<double>(worst);
    return res;
  }
  const auto& n = spec.n_coeffs();
  const auto& c0 = spec.c0_coeffs();
  const std::size_t len = std::max(c0.size(), n.size() + 1);
  double scale = 1.0;
  for (double c : n) scale = std::max(scale, std::abs(c));
  for (double c : c0) scale = std::max(scale, std::abs(c));
  for (std::size_t j = 0; j < len; ++j) {
    double expected = j == 0 ? 1.0 : 0.0;
    if (j >= 1 && j - 1 < n.size()) expected += n[j - 1];
    const double have = j < c0.size() ? c0[j] : 0.0;
    res.residual = std::max(res.residual, std::abs(have - expected));
  }
  res.consistent = res.residual <= 1e-12 * scale;
  return res;
}

// q0(nu i) in polar form.
struct SpectralProfile {
  double nu = 0.0;
  Complex q0_at_nui;
  double magnitude = 0.0;
  double phase_theta = 0.0;  // in [0, 2 pi)
};

inline SpectralProfile Profile(const ScliSpec& spec, double nu) {
  SpectralProfile p;
  p.nu = nu;
  p.q0_at_nui = spec.q0(Complex(0.0, nu));
  p.magnitude = std::abs(p.q0_at_nui);
  double theta = std::arg(p.q0_at_nui);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  if (theta >= 2.0 * std::numbers::pi) theta = 0.0;
  p.phase_theta = theta;
  return p;
}

// Runs the recurrence with C0(A) and N(A) materialized by Horner's rule.
inline Trace SimulateScli(const ScliSpec& spec, const BilinearInstance& inst,
                          const std::optional<SaddlePoint>& z0, std::size_t T) {
  spec.Validate();
  const OperatorHandle op = AsOperator(inst);
  SolverConfig cfg;
  cfg.T = T;
  cfg.z0 = z0;
  const Vector start = internal::StartPoint(op, cfg);
  Trace tr = internal::StartTrace(op, cfg, start);
  const Matrix C0 = MatrixPoly(spec.c0_coeffs(), inst.A());
  const Vector Nb = MatrixPoly(spec.n_coeffs(), inst.A()) * inst.b();
  Vector z = start;
  for (std::size_t t = 0; t < T; ++t) {
    Vector next = C0 * z + Nb;
    internal::CheckIterate(next, t + 1, "SCLI");
    z = next;
    internal::Append(tr, op, std::move(next));
  }
  return tr;
}

namespace internal {

inline void RequireConsistent(const ScliSpec& spec, const char* what) {
  spec.Validate();
  if (!CheckConsistency(spec).consistent) {
    throw PreconditionError(std::string(what) +
                            " requires a consistent spec (C0 = I + N(A) A)");
  }
}

// |q|^p computed in the log domain so large horizons neither overflow nor
// underflow prematurely.
inline double PowAbs(double magnitude, double p) {
  if (p == 0.0) return 1.0;
  if (magnitude == 0.0) return 0.0;
  return std::exp(p * std::log(magnitude));
}

// q^p for integer p via its polar form.
inline Complex PolarPow(const SpectralProfile& prof, double p) {
  return std::polar(PowAbs(prof.magnitude, p), p * std::arg(prof.q0_at_nui));
}

}  // namespace internal

// (C0(A)^t - I) A^{-1} b, the iterate of a consistent spec started at 0.
inline SaddlePoint ClosedFormIterate(const ScliSpec& spec, const BilinearInstance& inst,
                                     std::size_t t) {
  internal::RequireConsistent(spec, "ClosedFormIterate");
  const Matrix C0 = MatrixPoly(spec.c0_coeffs(), inst.A());
  const Vector ainv_b = -inst.z_star();
  Vector z = MatrixPower(C0, t) * ainv_b - ainv_b;
  return SaddlePoint(std::move(z), inst.half());
}

// ||C0(A)^t b||^2 = |q0(nu i)|^{2t} ||b||^2 with ||b|| = nu D.
inline double HamiltonianClosedForm(const ScliSpec& spec, const HardInstanceParams& params,
                                    std::size_t t) {
  internal::RequireConsistent(spec, "HamiltonianClosedForm");
  const auto prof = Profile(spec, params.nu);
  const double bnorm = params.nu * params.D;
  return internal::PowAbs(prof.magnitude, 2.0 * static_cast<double>(t)) * bnorm * bnorm;
}

// D ||C0(A)^t b|| = D ||F(z^t)||, the lower end of the ball-gap sandwich.
inline double GapClosedForm(const ScliSpec& spec, const HardInstanceParams& params,
                            std::size_t t) {
  internal::RequireConsistent(spec, "GapClosedForm");
  const auto prof = Profile(spec, params.nu);
  return params.D * internal::PowAbs(prof.magnitude, static_cast<double>(t)) *
         params.nu * params.D;
}

// Exact ball gap at z^t on the hard family started at 0. With
// w = q0(nu i)^t (1 - i), z^t - z* = (D / sqrt(n)) (Re w 1, -Im w 1), hence
// gap = nu D^2 (|Re w| + |Im w|) / sqrt(2).
inline double GapExactClosedForm(const ScliSpec& spec, const HardInstanceParams& params,
                                 std::size_t t) {
  internal::RequireConsistent(spec, "GapExactClosedForm");
  const auto prof = Profile(spec, params.nu);
  const Complex w = internal::PolarPow(prof, static_cast<double>(t)) * Complex(1.0, -1.0);
  return params.nu * params.D * params.D * (std::abs(w.real()) + std::abs(w.imag())) /
         std::numbers::sqrt2;
}

// f(z^t) - f(z*) = (nu D^2 / 2) Re(q0(nu i)^{2t}).
inline double FunctionValueClosedForm(const ScliSpec& spec,
                                      const HardInstanceParams& params, std::size_t t) {
  internal::RequireConsistent(spec, "FunctionValueClosedForm");
  const auto prof = Profile(spec, params.nu);
  const Complex q2t = internal::PolarPow(prof, 2.0 * static_cast<double>(t));
  return 0.5 * params.nu * params.D * params.D * q2t.real();
}

enum class LossKind { kHam, kGap, kFunc, kGapExact };

inline const char* LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kHam: return "ham";
    case LossKind::kGap: return "gap";
    case LossKind::kFunc: return "func";
    case LossKind::kGapExact: return "gap_exact";
  }
  return "unknown";
}

// Closed-form loss of a consistent spec on the hard instance with parameter nu.
inline double ClosedFormLoss(const ScliSpec& spec, double nu, double D, std::size_t t,
                             LossKind kind) {
  const HardInstanceParams params{2, nu, D};
  switch (kind) {
    case LossKind::kHam: return HamiltonianClosedForm(spec, params, t);
    case LossKind::kGap: return GapClosedForm(spec, params, t);
    case LossKind::kFunc: return std::abs(FunctionValueClosedForm(spec, params, t));
    case LossKind::kGapExact: return GapExactClosedForm(spec, params, t);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct NuSearchOptions {
  std::size_t grid_points = 10000;
  double nu_tol = 1e-10;
  // Lower end of the grid; defaults to L / (40 t k^2).
  std::optional<double> nu_min;
};

struct NuCertificate {
  double nu_star = 0.0;
  double loss_value = 0.0;
  // Horizon at which the loss was attained (t, or 2t for the function value).
  std::size_t horizon = 0;
  LossKind loss = LossKind::kHam;
};

namespace internal {

inline NuCertificate SearchOneHorizon(const ScliSpec& spec, double L, double D,
                                      std::size_t t, LossKind kind,
                                      const NuSearchOptions& opts, double nu_lo) {
  const std::size_t m = std::max<std::size_t>(opts.grid_points, 2);
  std::vector<double> grid(m);
  const double log_lo = std::log(nu_lo);
  const double log_hi = std::log(L);
  for (std::size_t i = 0; i < m; ++i) {
    grid[i] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                    static_cast<double>(m - 1));
  }
  grid.front() = nu_lo;
  grid.back() = L;

  auto loss_at = [&](double nu) { return ClosedFormLoss(spec, nu, D, t, kind); };

  // Ascending scan with strict comparison keeps the lowest nu on ties.
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double v = loss_at(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  // Golden-section refinement on the neighbouring bracket.
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[best + 1 >= m ? m - 1 : best + 1];
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = loss_at(c), fd = loss_at(d);
  while (b - a > opts.nu_tol * std::max(1.0, b)) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = loss_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = loss_at(d);
    }
  }
  NuCertificate cert{grid[best], best_val, t, kind};
  const double mid = 0.5 * (a + b);
  const double fmid = loss_at(mid);
  if (fmid > cert.loss_value) {
    cert.nu_star = mid;
    cert.loss_value = fmid;
  }
  return cert;
}

}  // namespace internal

// Maximizes the closed-form loss over nu in [L / (40 t k^2), L] (log grid plus
// golden-section refinement). For kFunc the larger of the searches at t and 2t
// is returned. The result is a constructive witness: the hard instance with
// nu = nu_star attains loss_value.
inline NuCertificate WorstCaseNuSearch(const ScliSpec& spec, double L, double D,
                                       std::size_t t, LossKind kind,
                                       const NuSearchOptions& opts = {}) {
  internal::RequireConsistent(spec, "WorstCaseNuSearch");
  if (!(L > 0.0) || !(D >= 0.0)) throw PreconditionError("nu search needs L > 0, D >= 0");
  if (t == 0) throw PreconditionError("nu search needs t >= 1");
  auto lower_for = [&](std::size_t horizon) {
    if (opts.nu_min) return *opts.nu_min;
    const double k = static_cast<double>(spec.k());
    return L / (40.0 * static_cast<double>(horizon) * k * k);
  };
  NuCertificate cert = internal::SearchOneHorizon(spec, L, D, t, kind, opts, lower_for(t));
  if (kind == LossKind::kFunc) {
    NuCertificate twice =
        internal::SearchOneHorizon(spec, L, D, 2 * t, kind, opts, lower_for(t));
    if (twice.loss_value > cert.loss_value) cert = twice;
  }
  return cert;
}

// Consistent spec whose first iterate equals the averaged EG iterate
// (z^0 + ... + z^T) / (T + 1) started at z^0 = 0, with T = floor((k - 1) / 2).
// Since z^t = (C0^{t-1} + ... + I) N b,
//
//   N'(A) = (C0^{T-1} + 2 C0^{T-2} + ... + T I) N(A) / (T + 1),
//
// of degree 2T - 1 <= k - 1, with C0, N the extragradient polynomials for step
// eta. Coefficients are kept exactly in u = eta A.
inline ScliSpec BuildTightnessSpec(int k, double L,
                                   std::optional<double> eta_override = std::nullopt) {
  if (k < 3) throw PreconditionError("tightness construction needs k >= 3");
  if (k > 64) throw PreconditionError("tightness construction supports k <= 64");
  if (!(L > 0.0)) throw PreconditionError("tightness construction needs L > 0");
  const double eta = eta_override.value_or(1.0 / (2.0 * L));
  const int T = (k - 1) / 2;
  const std::vector<Rational> c0_eg{Rational(1), Rational(-1), Rational(1)};
  const std::vector<Rational> n_eg{Rational(-1), Rational(1)};

  std::vector<Rational> weighted{Rational(0)};
  std::vector<Rational> power{Rational(1)};
  for (int i = 0; i < T; ++i) {
    weighted = PolyAdd(weighted, PolyScale(power, Rational(T - i)));
    power = PolyMul(power, c0_eg);
  }
  ExactCoefficients ex;
  ex.scale = eta;
  ex.n_u = PolyScale(PolyMul(weighted, n_eg), Rational(1, T + 1));
  ex.c0_u.assign(ex.n_u.size() + 1, Rational(0));
  ex.c0_u[0] = Rational(1);
  for (std::size_t j = 0; j < ex.n_u.size(); ++j) ex.c0_u[j + 1] = ex.n_u[j];
  return ScliSpec::FromExact(k, std::move(ex));
}

struct TwoCliCheck {
  double max_deviation = 0.0;
  std::vector<Vector> recurrence;  // v^0..v^T from the two-term recurrence
};

// Averaged EG iterates satisfy the time-varying two-step recurrence
//
//   v^{t+1} = (I + C0) (t+1)/(t+2) v^t - C0 t/(t+2) v^{t-1} + N b / (t+2),
//
// with I + C0 = 2I - eta A + (eta A)^2 and N b = eta(-I + eta A) b. Returns the
// largest ||v^t - mean(z^0..z^t)|| against RunEg + AverageTrace.
inline TwoCliCheck AveragedEgAs2CliCheck(const BilinearInstance& inst, double eta,
                                         std::size_t T,
                                         const std::optional<SaddlePoint>& z0 = std::nullopt) {
  if (!(eta > 0.0)) throw PreconditionError("2-CLI check needs eta > 0");
  const Index n = inst.n();
  const Matrix eA = eta * inst.A();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix C0 = I - eA + eA * eA;
  const Matrix two_step = I + C0;
  const Vector Nb = eta * (-inst.b() + eA * inst.b());

  TwoCliCheck out;
  out.recurrence.reserve(T + 1);
  const Vector start = z0 ? z0->vec() : Vector::Zero(n);
  CheckDimension("AveragedEgAs2CliCheck z0", start, n);
  out.recurrence.push_back(start);
  Vector prev = start;  // v^{t-1}; unused at t = 0 because its weight is zero
  for (std::size_t t = 0; t < T; ++t) {
    const double td = static_cast<double>(t);
    const Vector& cur = out.recurrence.back();
    Vector next = two_step * cur * ((td + 1.0) / (td + 2.0)) -
                  C0 * prev * (td / (td + 2.0)) + Nb / (td + 2.0);
    prev = cur;
    out.recurrence.push_back(std::move(next));
  }

  const OperatorHandle op = AsOperator(inst);
  SolverConfig cfg;
  cfg.eta = eta;
  cfg.T = T;
  cfg.z0 = z0;
  const Trace avg = AverageTrace(RunEg(op, cfg), op);
  for (std::size_t t = 0; t <= T; ++t) {
    out.max_deviation = std::max(out.max_deviation,
                                 (out.recurrence[t] - avg.averaged_iterates[t]).norm());
  }
  return out;
}

}  // namespace lastiter

#endif  // LASTITER_SCLI_HPP_
