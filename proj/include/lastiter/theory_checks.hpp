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

// Randomized verifiers for the matrix and polynomial inequalities behind the
// last-iterate bounds. Each check draws seeded trials from an in-hypothesis
// distribution (plus structured adversarial cases), records the slack of the
// inequality (positive means satisfied) and keeps the worst trial as a JSON
// witness that can be replayed.

#ifndef LASTITER_THEORY_CHECKS_HPP_
#define LASTITER_THEORY_CHECKS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lastiter/core.hpp"
#include "lastiter/problem.hpp"

namespace lastiter {

struct CheckReport {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  nlohmann::json witness;
  nlohmann::json data = nlohmann::json::object();

  bool passed() const { return violations == 0; }

  // Records one trial; a trial violates when margin < -tolerance.
  void Record(double margin, const std::function<nlohmann::json()>& describe) {
    ++trials;
    if (!(margin >= -tolerance)) ++violations;
    if (margin < worst_margin || (std::isnan(margin) && !std::isnan(worst_margin))) {
      worst_margin = margin;
      witness = describe();
    }
  }

  // Folds another report into this one (used by batteries over parameters).
  void Merge(const CheckReport& other) {
    trials += other.trials;
    violations += other.violations;
    if (other.worst_margin < worst_margin) {
      worst_margin = other.worst_margin;
      witness = other.witness;
    }
  }
};

inline nlohmann::json ToJson(const CheckReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["trials"] = r.trials;
  j["violations"] = r.violations;
  j["worst_margin"] = r.worst_margin;
  j["tolerance"] = r.tolerance;
  j["seed"] = r.seed;
  j["witness"] = r.witness;
  j["data"] = r.data;
  return j;
}

inline nlohmann::json MatrixToJson(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix MatrixFromJson(const nlohmann::json& j) {
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows == 0 ? 0 : static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

inline nlohmann::json VectorToJson(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

// splitmix64 finalizer; per-trial seeds are DeriveSeed(master, trial).
inline std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double SpectralNorm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

inline double MinEigenvalueSymmetric(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline Matrix GaussianMatrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline Vector GaussianVector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// P + S with P PSD and S antisymmetric, so the symmetric part is PSD. The
// `psd_weight` in [0, 1] trades between the two parts.
inline Matrix RandomMonotoneMatrix(Index n, std::mt19937_64& rng, double psd_weight = 0.5) {
  const Matrix G = GaussianMatrix(n, n, rng);
  const Matrix H = GaussianMatrix(n, n, rng);
  Matrix P = G * G.transpose() / static_cast<double>(n);
  Matrix S = (H - H.transpose()) / 2.0;
  return psd_weight * P + (1.0 - psd_weight) * S;
}

inline Matrix RescaleToNorm(const Matrix& m, double target) {
  const double s = SpectralNorm(m);
  if (s == 0.0) return m;
  return m * (target / s);
}

// ---------------------------------------------------------------------------
// Polynomial lemmas.

// Chebyshev polynomial of the first kind, valid for any real argument.
inline double ChebyshevT(int k, double x) {
  if (std::abs(x) <= 1.0) return std::cos(k * std::acos(x));
  const double v = std::cosh(k * std::acosh(std::abs(x)));
  return (x < 0.0 && (k % 2 != 0)) ? -v : v;
}

// Real polynomial with r(0) = 1, stored either by coefficients or by roots.
struct UnitPoly {
  std::string kind;
  std::vector<double> coeffs;  // used when roots is empty
  std::vector<double> roots;   // r(y) = prod (1 - y / root)
  // Chebyshev form: T_k((hi + lo - 2y) / (hi - lo)) / T_k((hi + lo) / (hi - lo)).
  int cheb_degree = 0;
  double cheb_lo = 0.0;
  double cheb_hi = 0.0;

  double operator()(double y) const {
    if (cheb_degree > 0) {
      const double w = cheb_hi - cheb_lo;
      return ChebyshevT(cheb_degree, (cheb_hi + cheb_lo - 2.0 * y) / w) /
             ChebyshevT(cheb_degree, (cheb_hi + cheb_lo) / w);
    }
    if (!roots.empty()) {
      double acc = 1.0;
      for (double r : roots) acc *= 1.0 - y / r;
      return acc;
    }
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * y + *it;
    return acc;
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["kind"] = kind;
    if (cheb_degree > 0) {
      j["chebyshev"] = {{"degree", cheb_degree}, {"lo", cheb_lo}, {"hi", cheb_hi}};
    } else if (!roots.empty()) {
      j["roots"] = roots;
    } else {
      j["coeffs"] = coeffs;
    }
    return j;
  }
};

inline UnitPoly ChebyshevUnitPoly(int degree, double lo, double hi) {
  UnitPoly p;
  p.kind = "chebyshev";
  p.cheb_degree = degree;
  p.cheb_lo = lo;
  p.cheb_hi = hi;
  return p;
}

// Maximizes g over [lo, hi] on a mixed linear/logarithmic grid followed by
// golden-section refinement around the best grid point.
inline double SupOnInterval(const std::function<double(double)>& g, double lo, double hi,
                            std::size_t points = 4096) {
  std::vector<double> grid;
  grid.reserve(2 * points);
  for (std::size_t i = 0; i < points; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(points - 1);
    grid.push_back(lo + (hi - lo) * s);
    grid.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * s));
  }
  std::sort(grid.begin(), grid.end());
  grid.front() = lo;
  grid.back() = hi;
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = g(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = g(c), fd = g(d);
  for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d, d = c, fd = fc, c = b - kInvPhi * (b - a), fc = g(c);
    } else {
      a = c, c = d, fc = fd, d = a + kInvPhi * (b - a), fd = g(d);
    }
  }
  return std::max({best_val, fc, fd});
}

namespace internal {

// Draws one r with r(0) = 1 and degree <= k. `lo`, `hi` is the interval the
// lemma looks at, used to place roots adversarially.
inline UnitPoly DrawUnitPoly(int k, double lo, double hi, std::mt19937_64& rng,
                             std::size_t trial) {
  std::uniform_int_distribution<int> deg_dist(1, k);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  const double log_lo = std::log(lo), log_hi = std::log(hi);
  UnitPoly p;
  switch (trial % 5) {
    case 0: {
      // Scaled Chebyshev on a random sub-interval [lo', hi] with lo' >= lo.
      const double sub_lo = std::exp(log_lo + (log_hi - log_lo) * 0.5 * unit(rng) * unit(rng));
      p = ChebyshevUnitPoly(deg_dist(rng), trial % 10 == 0 ? lo : sub_lo, hi);
      p.kind = "chebyshev_scaled";
      break;
    }
    case 1: {
      p.kind = "roots_log_uniform";
      const int d = deg_dist(rng);
      for (int j = 0; j < d; ++j) p.roots.push_back(std::exp(log_lo + (log_hi - log_lo) * unit(rng)));
      break;
    }
    case 2: {
      // Jittered Chebyshev nodes of [lo, hi].
      p.kind = "roots_chebyshev_jitter";
      const int d = deg_dist(rng);
      for (int j = 0; j < d; ++j) {
        const double node = std::cos((2.0 * j + 1.0) * std::numbers::pi / (2.0 * d));
        const double y = 0.5 * (hi + lo) - 0.5 * (hi - lo) * node;
        p.roots.push_back(std::clamp(y * (1.0 + 0.05 * normal(rng)), lo, hi));
      }
      break;
    }
    case 3: {
      p.kind = "gaussian_coeffs";
      const int d = deg_dist(rng);
      p.coeffs.push_back(1.0);
      for (int j = 1; j <= d; ++j) p.coeffs.push_back(normal(rng) / std::pow(hi, j));
      break;
    }
    default: {
      p.kind = "roots_uniform";
      const int d = deg_dist(rng);
      for (int j = 0; j < d; ++j) p.roots.push_back(lo + (hi - lo) * unit(rng));
      break;
    }
  }
  return p;
}

}  // namespace internal

// sup_{y in [mu, L]} |r(y)| > 1 - 6 k^2 / (sqrt(L / mu) - 1)^2 for every real r
// with r(0) = 1 and degree <= k, provided k <= sqrt(L / mu) - 1.
inline double ChebyshevLemmaBound(int k, double L, double mu) {
  const double s = std::sqrt(L / mu) - 1.0;
  return 1.0 - 6.0 * k * k / (s * s);
}

inline double ChebyshevLemmaMargin(const UnitPoly& r, int k, double L, double mu) {
  const double sup = SupOnInterval([&](double y) { return std::abs(r(y)); }, mu, L);
  return sup - ChebyshevLemmaBound(k, L, mu);
}

inline CheckReport CheckChebyshevLemma(int k, double L, double mu, std::size_t trials,
                                       std::uint64_t seed) {
  if (k < 1 || !(L > mu) || !(mu > 0.0)) {
    throw PreconditionError("Chebyshev lemma needs k >= 1 and L > mu > 0");
  }
  if (static_cast<double>(k) > std::sqrt(L / mu) - 1.0) {
    throw PreconditionError("Chebyshev lemma needs k <= sqrt(L / mu) - 1");
  }
  CheckReport rep;
  rep.name = "chebyshev_lemma";
  rep.seed = seed;
  rep.tolerance = 0.0;
  rep.data = {{"k", k}, {"L", L}, {"mu", mu}, {"bound", ChebyshevLemmaBound(k, L, mu)}};
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    UnitPoly r = i == 0 ? ChebyshevUnitPoly(k, mu, L) : internal::DrawUnitPoly(k, mu, L, rng, i);
    const double margin = ChebyshevLemmaMargin(r, k, L, mu);
    rep.Record(margin, [&] {
      return nlohmann::json{{"poly", r.ToJson()}, {"k", k}, {"L", L}, {"mu", mu}, {"margin", margin}};
    });
  }
  return rep;
}

// sup_{y in [L / (20 t k^2), L]} y |r(y)|^t > L / (40 t k^2).
inline double K2LemmaBound(int k, int t, double L) {
  return L / (40.0 * t * static_cast<double>(k) * k);
}

// Margin sup - bound; the sup is taken in the log domain and capped at e^700.
inline double K2LemmaMargin(const UnitPoly& r, int k, int t, double L) {
  const double mu = L / (20.0 * t * static_cast<double>(k) * k);
  const double log_sup = SupOnInterval(
      [&](double y) {
        const double a = std::abs(r(y));
        return a == 0.0 ? -std::numeric_limits<double>::infinity()
                        : std::log(y) + t * std::log(a);
      },
      mu, L);
  return std::exp(std::min(log_sup, 700.0)) - K2LemmaBound(k, t, L);
}

inline CheckReport CheckK2Lemma(int k, int t, double L, std::size_t trials, std::uint64_t seed) {
  if (k < 1 || t < 1 || !(L > 0.0)) throw PreconditionError("k2 lemma needs k, t >= 1 and L > 0");
  const double mu = L / (20.0 * t * static_cast<double>(k) * k);
  CheckReport rep;
  rep.name = "k2_lemma";
  rep.seed = seed;
  rep.tolerance = 0.0;
  rep.data = {{"k", k}, {"t", t}, {"L", L}, {"bound", K2LemmaBound(k, t, L)}};
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    UnitPoly r;
    if (i == 0) {
      r.kind = "constant";
      r.coeffs = {1.0};
    } else {
      r = internal::DrawUnitPoly(k, mu, L, rng, i);
    }
    const double margin = K2LemmaMargin(r, k, t, L);
    rep.Record(margin, [&] {
      return nlohmann::json{{"poly", r.ToJson()}, {"k", k}, {"t", t}, {"L", L}, {"margin", margin}};
    });
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Matrix lemmas.

// sqrt(1 + 26 ||A - B||^2) - ||I - A + A B|| for ||A||, ||B|| <= 1/30 with PSD
// symmetric parts.
inline double AbDiffMargin(const Matrix& A, const Matrix& B) {
  const Index n = A.rows();
  const double lhs = SpectralNorm(Matrix::Identity(n, n) - A + A * B);
  const double diff = SpectralNorm(A - B);
  return std::sqrt(1.0 + 26.0 * diff * diff) - lhs;
}

inline CheckReport CheckAbDiff(Index n, std::size_t trials, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "ab_diff";
  rep.seed = seed;
  rep.tolerance = 1e-12;
  constexpr double kNormCap = 1.0 / 30.0;
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix A, B;
    std::string kind;
    switch (i % 6) {
      case 0:
        kind = "independent";
        A = RescaleToNorm(RandomMonotoneMatrix(n, rng, unit(rng)), kNormCap * unit(rng));
        B = RescaleToNorm(RandomMonotoneMatrix(n, rng, unit(rng)), kNormCap * unit(rng));
        break;
      case 1: {
        kind = "near_equal";
        A = RescaleToNorm(RandomMonotoneMatrix(n, rng, unit(rng)), kNormCap * (0.5 + 0.5 * unit(rng)));
        const Matrix P = RescaleToNorm(RandomMonotoneMatrix(n, rng, unit(rng)), 1e-3 * kNormCap * unit(rng));
        B = A + P;
        if (SpectralNorm(B) > kNormCap) B = RescaleToNorm(B, kNormCap);
        break;
      }
      case 2: {
        kind = "rank_one";
        const Vector u = GaussianVector(n, rng), v = GaussianVector(n, rng), w = GaussianVector(n, rng);
        A = RescaleToNorm(u * u.transpose() + (v * w.transpose() - w * v.transpose()), kNormCap * unit(rng));
        const Vector p = GaussianVector(n, rng);
        B = RescaleToNorm(p * p.transpose(), kNormCap * unit(rng));
        break;
      }
      case 3:
        kind = "antisymmetric_dominant";
        A = RescaleToNorm(RandomMonotoneMatrix(n, rng, 1e-3 * unit(rng)), kNormCap);
        B = RescaleToNorm(RandomMonotoneMatrix(n, rng, 1e-3 * unit(rng)), kNormCap);
        break;
      case 4:
        kind = "equal";
        A = RescaleToNorm(RandomMonotoneMatrix(n, rng, unit(rng)), kNormCap * unit(rng));
        B = A;
        break;
      default:
        kind = "a_zero";
        A = Matrix::Zero(n, n);
        B = RescaleToNorm(RandomMonotoneMatrix(n, rng, unit(rng)), kNormCap * unit(rng));
        break;
    }
    const double margin = AbDiffMargin(A, B);
    const double diff = SpectralNorm(A - B);
    if (diff > 1e-8) {
      const double lhs = SpectralNorm(Matrix::Identity(n, n) - A + A * B);
      max_ratio = std::max(max_ratio, (lhs * lhs - 1.0) / (diff * diff));
    }
    rep.Record(margin, [&] {
      return nlohmann::json{{"kind", kind}, {"A", MatrixToJson(A)}, {"B", MatrixToJson(B)}, {"margin", margin}};
    });
  }
  rep.data = {{"n", n}, {"empirical_max_constant", max_ratio}};
  return rep;
}

// X X^T <= 2 Y Y^T + 2 ||X - Y||^2 I: returns the smallest eigenvalue of the
// right side minus the left.
inline double XyMargin(const Matrix& X, const Matrix& Y) {
  const Index n = X.rows();
  const double d = SpectralNorm(X - Y);
  const Matrix gap = 2.0 * Y * Y.transpose() + 2.0 * d * d * Matrix::Identity(n, n) -
                     X * X.transpose();
  return MinEigenvalueSymmetric(gap);
}

// S R + R S <= 4 S^2 + 4 ||S - R||^2 I for symmetric PSD S, R.
inline double SrMargin(const Matrix& S, const Matrix& R) {
  const Index n = S.rows();
  const double d = SpectralNorm(S - R);
  const Matrix gap = 4.0 * S * S + 4.0 * d * d * Matrix::Identity(n, n) - (S * R + R * S);
  return MinEigenvalueSymmetric(gap);
}

inline CheckReport CheckXySrInequalities(Index n, std::size_t trials, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "xy_sr_inequalities";
  rep.seed = seed;
  double worst_xy = std::numeric_limits<double>::infinity();
  double worst_sr = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double scale = std::exp(4.0 * (unit(rng) - 0.5));
    Matrix X = scale * GaussianMatrix(n, n, rng);
    Matrix Y = (i % 3 == 0) ? Matrix(X + 1e-3 * scale * GaussianMatrix(n, n, rng))
                            : Matrix(scale * GaussianMatrix(n, n, rng));
    const Matrix G = GaussianMatrix(n, n, rng);
    const Matrix S = scale * G * G.transpose() / static_cast<double>(n);
    Matrix R;
    if (i % 3 == 1) {
      const Vector v = GaussianVector(n, rng);
      R = S + 1e-3 * scale * v * v.transpose();
    } else {
      const Matrix H = GaussianMatrix(n, n, rng);
      R = scale * H * H.transpose() / static_cast<double>(n);
    }
    const double tol = 1e-9 * (1.0 + std::max({X.squaredNorm(), Y.squaredNorm(),
                                                S.squaredNorm(), R.squaredNorm()}));
    const double xy = XyMargin(X, Y);
    const double sr = SrMargin(S, R);
    worst_xy = std::min(worst_xy, xy / (1.0 + scale * scale));
    worst_sr = std::min(worst_sr, sr / (1.0 + scale * scale));
    // Normalize so the shared tolerance field is meaningful across scales.
    const double margin = std::min(xy, sr) + tol;
    if (xy < -tol || sr < -tol) ++violations;
    rep.tolerance = 0.0;
    rep.Record(margin, [&] {
      return nlohmann::json{{"X", MatrixToJson(X)}, {"Y", MatrixToJson(Y)},
                            {"S", MatrixToJson(S)}, {"R", MatrixToJson(R)},
                            {"xy_margin", xy}, {"sr_margin", sr}, {"tol", tol}};
    });
  }
  rep.violations = violations;
  rep.data = {{"n", n}, {"worst_xy_relative", worst_xy}, {"worst_sr_relative", worst_sr}};
  return rep;
}

// Central differences with step 1e-6 (1 + |w_j|).
inline Matrix FiniteDifferenceJacobian(const OperatorHandle& op, const Vector& w) {
  const Index n = op.dim;
  Matrix J(n, n);
  Vector wp = w, wm = w;
  for (Index j = 0; j < n; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(w(j)));
    wp(j) = w(j) + h;
    wm(j) = w(j) - h;
    J.col(j) = (op(wp) - op(wm)) / (2.0 * h);
    wp(j) = w(j);
    wm(j) = w(j);
  }
  return J;
}

// lambda_min(dF(w) + dF(w)^T) >= -tol at random w.
inline CheckReport CheckJacobianPsd(const OperatorHandle& op, std::size_t trials,
                                    std::uint64_t seed, bool allow_finite_difference = true) {
  if (!op.has_jacobian() && !allow_finite_difference) {
    throw PreconditionError("operator has no Jacobian and finite differences are disabled");
  }
  CheckReport rep;
  rep.name = "jacobian_psd";
  rep.seed = seed;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    Vector w = GaussianVector(op.dim, rng);
    if (op.solution) w += *op.solution;
    const Matrix J = op.has_jacobian() ? op.jacobian(w) : FiniteDifferenceJacobian(op, w);
    const double scale = SpectralNorm(J);
    const double tol = (op.has_jacobian() ? 1e-9 : 1e-5) * (1.0 + scale);
    const double lam = MinEigenvalueSymmetric(J + J.transpose());
    worst = std::min(worst, lam);
    rep.tolerance = 0.0;
    rep.Record(lam + tol, [&] {
      return nlohmann::json{{"w", VectorToJson(w)}, {"lambda_min", lam}, {"tol", tol}};
    });
  }
  rep.data = {{"min_eigenvalue", worst}, {"finite_difference", !op.has_jacobian()}};
  return rep;
}

// F(x) = A x + b + eps (tanh(x), tanh(y)) for a bilinear instance: the
// operator of f + eps sum log cosh(x_i) - eps sum log cosh(y_i). Its Jacobian
// is Lipschitz with constant eps * 4 / (3 sqrt(3)).
inline OperatorHandle MakeSmoothPerturbedBilinear(const BilinearInstance& inst, double eps) {
  auto shared = std::make_shared<const BilinearInstance>(inst);
  const double lambda = eps * 4.0 / (3.0 * std::sqrt(3.0));
  return WrapGeneralOperator(
      [shared, eps](const Vector& z) -> Vector {
        return shared->A() * z + shared->b() + eps * z.array().tanh().matrix();
      },
      [shared, eps](const Vector& z) -> Matrix {
        Matrix J = shared->A();
        const Eigen::ArrayXd c = z.array().cosh();
        J.diagonal().array() += eps / (c * c);
        return J;
      },
      inst.n(), inst.half(), inst.L() + eps, lambda);
}

namespace internal {

// Composite Simpson rule for int_0^1 dF(p0 + alpha (p1 - p0)) d alpha.
inline Matrix SimpsonJacobianAverage(const OperatorHandle& op, const Vector& p0,
                                     const Vector& p1, int panels) {
  const Vector d = p1 - p0;
  Matrix acc = op.jacobian(p0) + op.jacobian(p1);
  for (int i = 1; i < panels; ++i) {
    const double a = static_cast<double>(i) / panels;
    acc += (i % 2 == 1 ? 4.0 : 2.0) * op.jacobian(p0 + a * d);
  }
  return acc / (3.0 * panels);
}

// Doubles the panel count from `panels` until successive estimates agree,
// capped at 4096 panels.
inline Matrix AdaptiveJacobianAverage(const OperatorHandle& op, const Vector& p0,
                                      const Vector& p1, int panels) {
  Matrix prev = SimpsonJacobianAverage(op, p0, p1, panels);
  while (true) {
    if (panels * 2 > 4096) break;
    panels *= 2;
    Matrix next = SimpsonJacobianAverage(op, p0, p1, panels);
    const double change = (next - prev).norm();
    prev = std::move(next);
    if (change <= 1e-13 * (1.0 + prev.norm())) return prev;
  }
  throw Error("Jacobian quadrature did not stabilize within 4096 panels");
}

}  // namespace internal

struct AbDecomposition {
  Matrix A_z;
  Matrix B_z;
  double residual = 0.0;
  double diff_norm = 0.0;
  double diff_bound = 0.0;
};

// A_z, B_z are averages of dF along the two extragradient segments, so that
// F(z - eta F(z - eta F(z))) = F(z) - eta A_z F(z) + eta^2 A_z B_z F(z).
inline AbDecomposition DecomposeExtragradientStep(const OperatorHandle& op, const Vector& z,
                                                  double eta, int panels = 64) {
  if (!op.has_jacobian()) throw PreconditionError("decomposition needs an analytic Jacobian");
  const Vector Fz = op(z);
  const Vector half = z - eta * Fz;
  const Vector Fh = op(half);
  const Vector full = z - eta * Fh;
  AbDecomposition out;
  out.B_z = internal::AdaptiveJacobianAverage(op, half, z, panels);
  out.A_z = internal::AdaptiveJacobianAverage(op, full, z, panels);
  const Vector rhs = Fz - eta * out.A_z * Fz + eta * eta * out.A_z * out.B_z * Fz;
  out.residual = (op(full) - rhs).norm();
  out.diff_norm = SpectralNorm(out.A_z - out.B_z);
  out.diff_bound = 0.5 * eta * op.jac_lipschitz_Lambda.value_or(0.0) * (Fz - Fh).norm();
  return out;
}

// Checks the decomposition residual (<= 1e-8 (1 + ||F(z)||)), the bound
// ||A_z - B_z|| <= (eta Lambda / 2) ||F(z) - F(z - eta F(z))||, the norm bounds
// ||A_z||, ||B_z|| <= L and PSD symmetric parts.
inline CheckReport CheckAbExistDecomposition(const OperatorHandle& op, double eta,
                                             std::size_t trials, std::uint64_t seed,
                                             int panels = 64) {
  if (!op.has_jacobian()) throw PreconditionError("decomposition check needs a Jacobian");
  if (!op.jac_lipschitz_Lambda) throw PreconditionError("decomposition check needs Lambda");
  CheckReport rep;
  rep.name = "ab_exist_decomposition";
  rep.seed = seed;
  rep.tolerance = 0.0;
  double worst_residual = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    Vector z = 2.0 * GaussianVector(op.dim, rng);
    if (op.solution) z += *op.solution;
    const AbDecomposition dec = DecomposeExtragradientStep(op, z, eta, panels);
    const double fz = op(z).norm();
    const double tol = 1e-9 * (1.0 + op.lipschitz_L);
    const double margins[] = {
        1e-8 * (1.0 + fz) - dec.residual,
        dec.diff_bound + tol - dec.diff_norm,
        op.lipschitz_L + tol - SpectralNorm(dec.A_z),
        op.lipschitz_L + tol - SpectralNorm(dec.B_z),
        MinEigenvalueSymmetric(dec.A_z + dec.A_z.transpose()) + tol,
        MinEigenvalueSymmetric(dec.B_z + dec.B_z.transpose()) + tol,
    };
    const double margin = *std::min_element(std::begin(margins), std::end(margins));
    worst_residual = std::max(worst_residual, dec.residual);
    rep.Record(margin, [&] {
      return nlohmann::json{{"z", VectorToJson(z)}, {"eta", eta}, {"residual", dec.residual},
                            {"diff_norm", dec.diff_norm}, {"diff_bound", dec.diff_bound}};
    });
  }
  rep.data = {{"max_residual", worst_residual}};
  return rep;
}

// ||F(x)||^2 <= ||F(x + eta F(x))||^2 at random x.
inline double PpMonotoneMargin(const OperatorHandle& op, const Vector& x, double eta) {
  const Vector fx = op(x);
  return op(x + eta * fx).squaredNorm() - fx.squaredNorm();
}

inline CheckReport CheckPpMonotone(const OperatorHandle& op, double eta, std::size_t trials,
                                   std::uint64_t seed) {
  if (!(eta > 0.0)) throw PreconditionError("PP monotonicity check needs eta > 0");
  CheckReport rep;
  rep.name = "pp_monotone";
  rep.seed = seed;
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    Vector x = GaussianVector(op.dim, rng);
    if (op.solution) x += *op.solution;
    const double lhs = op(x).squaredNorm();
    const double tol = 1e-9 * (1.0 + lhs);
    const double margin = PpMonotoneMargin(op, x, eta) + tol;
    rep.Record(margin, [&] {
      return nlohmann::json{{"x", VectorToJson(x)}, {"eta", eta}, {"tol", tol}};
    });
  }
  return rep;
}

// The same inequality over freshly drawn monotone affine operators
// F(x) = P x + c with P = (PSD) + (antisymmetric).
inline CheckReport CheckPpMonotoneRandomAffine(Index n, std::size_t trials, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "pp_monotone_random_affine";
  rep.seed = seed;
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(DeriveSeed(seed, i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Matrix P = RandomMonotoneMatrix(n, rng, unit(rng));
    const Vector c = GaussianVector(n, rng);
    const double eta = std::exp(6.0 * (unit(rng) - 0.5));
    const Vector x = GaussianVector(n, rng);
    const Vector fx = P * x + c;
    const Vector fy = P * (x + eta * fx) + c;
    const double lhs = fx.squaredNorm();
    const double margin = fy.squaredNorm() - lhs + 1e-9 * (1.0 + lhs);
    rep.Record(margin, [&] {
      return nlohmann::json{{"P", MatrixToJson(P)}, {"c", VectorToJson(c)},
                            {"x", VectorToJson(x)}, {"eta", eta}};
    });
  }
  return rep;
}

struct BatteryOptions {
  std::uint64_t seed = 20260101;
  std::size_t matrix_trials = 10000;
  std::size_t poly_trials = 200;
};

// The full lemma battery: polynomial lemmas over (k, kappa) and (k, t) grids,
// matrix lemmas at n in {2, 4, 8}, PP monotonicity, Jacobian PSD and the
// extragradient decomposition on an affine and a smooth non-affine operator.
inline std::vector<CheckReport> RunTheoryBattery(const BatteryOptions& opts = {}) {
  std::vector<CheckReport> out;
  std::uint64_t stream = 0;
  auto next_seed = [&] { return DeriveSeed(opts.seed, 1000000 + stream++); };

  CheckReport cheb;
  cheb.name = "chebyshev_lemma";
  cheb.seed = opts.seed;
  for (int k = 1; k <= 10; ++k) {
    for (double kappa : {100.0, 1000.0, 10000.0}) {
      if (k > std::sqrt(kappa) - 1.0) continue;
      cheb.Merge(CheckChebyshevLemma(k, 1.0, 1.0 / kappa, opts.poly_trials, next_seed()));
    }
    const double tight_kappa = (k + 1.0) * (k + 1.0);
    cheb.Merge(CheckChebyshevLemma(k, 1.0, 1.0 / tight_kappa, opts.poly_trials, next_seed()));
  }
  out.push_back(std::move(cheb));

  CheckReport k2;
  k2.name = "k2_lemma";
  k2.seed = opts.seed;
  for (int k = 1; k <= 8; ++k) {
    for (int t : {1, 10, 100}) k2.Merge(CheckK2Lemma(k, t, 1.0, opts.poly_trials, next_seed()));
  }
  out.push_back(std::move(k2));

  CheckReport ab;
  ab.name = "ab_diff";
  ab.seed = opts.seed;
  ab.tolerance = 1e-12;
  double max_const = 0.0;
  for (Index n : {2, 4, 8}) {
    CheckReport r = CheckAbDiff(n, opts.matrix_trials, next_seed());
    max_const = std::max(max_const, r.data["empirical_max_constant"].get<double>());
    ab.Merge(r);
  }
  ab.data = {{"empirical_max_constant", max_const}};
  out.push_back(std::move(ab));

  out.push_back(CheckXySrInequalities(4, opts.matrix_trials, next_seed()));
  out.push_back(CheckPpMonotoneRandomAffine(4, opts.matrix_trials, next_seed()));

  const BilinearInstance inst = MakeHardInstance({4, 1.0, 1.0});
  const OperatorHandle affine = AsOperator(inst);
  const BilinearInstance coupled(Matrix{{1.0, 0.5}, {-0.3, 0.8}}, Vector{{0.4, -0.2}},
                                 Vector{{0.1, 0.3}});
  const OperatorHandle smooth = MakeSmoothPerturbedBilinear(coupled, 0.1);
  out.push_back(CheckAbExistDecomposition(affine, 1.0 / (30.0 * affine.lipschitz_L), 100, next_seed()));
  CheckReport smooth_rep =
      CheckAbExistDecomposition(smooth, 1.0 / (30.0 * smooth.lipschitz_L), 100, next_seed());
  smooth_rep.name = "ab_exist_decomposition_smooth";
  out.push_back(std::move(smooth_rep));
  out.push_back(CheckJacobianPsd(affine, 200, next_seed()));
  CheckReport jac_smooth = CheckJacobianPsd(smooth, 200, next_seed());
  jac_smooth.name = "jacobian_psd_smooth";
  out.push_back(std::move(jac_smooth));
  return out;
}

}  // namespace lastiter

#endif  // LASTITER_THEORY_CHECKS_HPP_
