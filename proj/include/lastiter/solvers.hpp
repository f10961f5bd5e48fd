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

// Iterative solvers for monotone operators. Every solver returns a full
// `Trace`: all iterates z^0..z^T, optionally the extrapolated half steps, and
// a `LossRecord` per iterate.
//
//   EG   z^{t+1/2} = z^t - eta F(z^t),  z^{t+1} = z^t - eta F(z^{t+1/2})
//   PP   z^{t+1} = z^t - eta F(z^{t+1})
//   GDA  z^{t+1} = z^t - eta F(z^t)

#ifndef LASTITER_SOLVERS_HPP_
#define LASTITER_SOLVERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lastiter/core.hpp"
#include "lastiter/metrics.hpp"
#include "lastiter/problem.hpp"

namespace lastiter {

enum class Method { kEG, kEGTimeVarying, kPP, kGDA };

inline const char* MethodName(Method m) {
  switch (m) {
    case Method::kEG: return "eg";
    case Method::kEGTimeVarying: return "eg_timevarying";
    case Method::kPP: return "pp";
    case Method::kGDA: return "gda";
  }
  return "unknown";
}

struct SolverConfig {
  Method method = Method::kEG;
  double eta = 0.1;
  std::vector<double> schedule;  // per-step sizes for kEGTimeVarying
  std::size_t T = 100;
  std::optional<SaddlePoint> z0;  // defaults to the origin
  bool record_halfsteps = false;
  // Upper-bound step-size regime violations throw instead of warning.
  bool strict_stepsize = false;
  std::optional<double> gap_radius;
};

struct Trace {
  Index split = 0;
  GapRegion region;
  std::vector<Vector> iterates;
  std::vector<Vector> halfsteps;
  std::vector<LossRecord> losses;
  std::vector<Vector> averaged_iterates;
  std::vector<LossRecord> averaged_losses;
  std::vector<std::size_t> inner_iterations;
  std::vector<std::string> warnings;

  std::size_t horizon() const { return iterates.empty() ? 0 : iterates.size() - 1; }
  const Vector& last() const { return iterates.back(); }
};

// Any coordinate beyond this magnitude counts as divergence.
inline constexpr double kDivergenceThreshold = 1e12;

namespace internal {

inline void CheckIterate(const Vector& z, std::size_t t, const char* method) {
  if (!z.allFinite()) {
    throw DivergenceError(std::string(method) + ": non-finite iterate", t);
  }
  if (z.size() > 0 && z.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
    throw DivergenceError(std::string(method) + ": iterate exceeded 1e12", t);
  }
}

inline Vector StartPoint(const OperatorHandle& op, const SolverConfig& cfg) {
  if (!cfg.z0) return Vector::Zero(op.dim);
  CheckDimension("solver z0", cfg.z0->vec(), op.dim);
  return cfg.z0->vec();
}

// Gap balls are centered at z*. Hard instances keep their own D as radius;
// otherwise the radius is ||z0 - z*|| unless overridden.
inline GapRegion TraceRegion(const OperatorHandle& op, const SolverConfig& cfg,
                             const Vector& z0) {
  if (op.solution) {
    double radius = (z0 - *op.solution).norm();
    if (op.bilinear && op.bilinear->hard_params()) radius = op.bilinear->D();
    if (cfg.gap_radius) radius = *cfg.gap_radius;
    return MakeGapRegion(*op.solution, op.split, radius);
  }
  return GapRegion{z0, op.split,
                   cfg.gap_radius.value_or(std::numeric_limits<double>::quiet_NaN())};
}

inline Trace StartTrace(const OperatorHandle& op, const SolverConfig& cfg,
                        const Vector& z0) {
  Trace tr;
  tr.split = op.split;
  tr.region = TraceRegion(op, cfg, z0);
  tr.iterates.reserve(cfg.T + 1);
  tr.losses.reserve(cfg.T + 1);
  tr.iterates.push_back(z0);
  tr.losses.push_back(EvaluateLosses(op, tr.region, z0));
  return tr;
}

inline void Append(Trace& tr, const OperatorHandle& op, Vector z) {
  tr.losses.push_back(EvaluateLosses(op, tr.region, z));
  tr.iterates.push_back(std::move(z));
}

// One extragradient step; shared by the constant and time-varying variants
// so that a constant schedule reproduces RunEg bit for bit.
inline Vector EgStep(const OperatorHandle& op, const Vector& z, double eta,
                     Vector* half) {
  Vector h = z - eta * op(z);
  Vector next = z - eta * op(h);
  if (half) *half = std::move(h);
  return next;
}

// Warns (or throws under strict mode) when eta is outside
// eta <= min{5 / (Lambda D), 1 / (30 L)}. Lambda = 0 drops the first term.
inline void CheckEgStepRegime(const OperatorHandle& op, const SolverConfig& cfg,
                              const Vector& z0, Trace& tr) {
  if (!op.has_lipschitz()) return;
  double limit = 1.0 / (30.0 * op.lipschitz_L);
  if (op.jac_lipschitz_Lambda && *op.jac_lipschitz_Lambda > 0.0) {
    if (!op.solution) {
      tr.warnings.push_back(
          "step-size regime not verified: Lambda > 0 but the distance to the "
          "solution is unknown");
      return;
    }
    const double d = (z0 - *op.solution).norm();
    if (d > 0.0) limit = std::min(limit, 5.0 / (*op.jac_lipschitz_Lambda * d));
  }
  if (cfg.eta > limit) {
    std::ostringstream msg;
    msg << "eta = " << cfg.eta << " exceeds the last-iterate upper-bound regime ("
        << limit << ")";
    if (cfg.strict_stepsize) throw PreconditionError(msg.str());
    tr.warnings.push_back(msg.str());
  }
}

}  // namespace internal

inline Trace RunEg(const OperatorHandle& op, const SolverConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw PreconditionError("EG needs eta > 0");
  const Vector z0 = internal::StartPoint(op, cfg);
  Trace tr = internal::StartTrace(op, cfg, z0);
  internal::CheckEgStepRegime(op, cfg, z0, tr);
  Vector z = z0;
  Vector half;
  for (std::size_t t = 0; t < cfg.T; ++t) {
    Vector next = internal::EgStep(op, z, cfg.eta, cfg.record_halfsteps ? &half : nullptr);
    internal::CheckIterate(next, t + 1, "EG");
    if (cfg.record_halfsteps) tr.halfsteps.push_back(half);
    z = next;
    internal::Append(tr, op, std::move(next));
  }
  return tr;
}

// EG with step eta_t at step t. Every eta_t must lie in (0, 1/L).
inline Trace RunEgTimeVarying(const OperatorHandle& op,
                              const std::vector<double>& schedule,
                              const SolverConfig& cfg) {
  if (schedule.size() < cfg.T) {
    throw PreconditionError("step schedule has " + std::to_string(schedule.size()) +
                            " entries, horizon needs " + std::to_string(cfg.T));
  }
  const double upper = op.has_lipschitz() ? 1.0 / op.lipschitz_L
                                          : std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < cfg.T; ++t) {
    if (!(schedule[t] > 0.0) || !(schedule[t] < upper)) {
      throw PreconditionError("eta_" + std::to_string(t) + " = " +
                              std::to_string(schedule[t]) +
                              " is outside the open interval (0, 1/L)");
    }
  }
  const Vector z0 = internal::StartPoint(op, cfg);
  Trace tr = internal::StartTrace(op, cfg, z0);
  Vector z = z0;
  Vector half;
  for (std::size_t t = 0; t < cfg.T; ++t) {
    Vector next =
        internal::EgStep(op, z, schedule[t], cfg.record_halfsteps ? &half : nullptr);
    internal::CheckIterate(next, t + 1, "EG (time-varying)");
    if (cfg.record_halfsteps) tr.halfsteps.push_back(half);
    z = next;
    internal::Append(tr, op, std::move(next));
  }
  return tr;
}

// Proximal point on a bilinear instance: each step solves
// (I + eta A) z^{t+1} = z^t - eta b exactly.
inline Trace RunPpAffine(const BilinearInstance& inst, const SolverConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw PreconditionError("PP needs eta > 0");
  const OperatorHandle op = AsOperator(inst);
  const Matrix system =
      Matrix::Identity(inst.n(), inst.n()) + cfg.eta * inst.A();
  const Eigen::PartialPivLU<Matrix> lu(system);
  if (!(std::abs(lu.determinant()) > 0.0)) {
    throw PreconditionError("I + eta A is singular");
  }
  const Vector z0 = internal::StartPoint(op, cfg);
  Trace tr = internal::StartTrace(op, cfg, z0);
  const Vector shift = cfg.eta * inst.b();
  Vector z = z0;
  for (std::size_t t = 0; t < cfg.T; ++t) {
    Vector next = lu.solve(z - shift);
    internal::CheckIterate(next, t + 1, "PP");
    const double residual = (next - z + cfg.eta * EvalOperator(inst, next)).norm();
    const double scale = z.norm() + shift.norm() + 1e-300;
    if (residual > 1e-10 * scale) {
      throw Error("PP implicit step residual " + std::to_string(residual) +
                  " too large at iteration " + std::to_string(t + 1));
    }
    z = next;
    internal::Append(tr, op, std::move(next));
  }
  return tr;
}

// Proximal point for a black-box operator. The implicit step is solved by the
// Picard iteration w <- z^t - eta F(w), a contraction when eta L < 1.
// Without `inner_tol` the stopping rule is ||w_{k+1} - w_k|| <= 1e-12 (1 + ||z^t||).
inline Trace RunPpGeneral(const OperatorHandle& op, const SolverConfig& cfg,
                          std::optional<double> inner_tol = std::nullopt,
                          std::size_t inner_max_iters = 10000) {
  if (!(cfg.eta > 0.0)) throw PreconditionError("PP needs eta > 0");
  if (!op.has_lipschitz() || !(cfg.eta * op.lipschitz_L < 1.0)) {
    throw PreconditionError(
        "fixed-point proximal step needs a finite L with eta * L < 1");
  }
  const Vector z0 = internal::StartPoint(op, cfg);
  Trace tr = internal::StartTrace(op, cfg, z0);
  tr.inner_iterations.reserve(cfg.T);
  Vector z = z0;
  for (std::size_t t = 0; t < cfg.T; ++t) {
    const double tol = inner_tol.value_or(1e-12 * (1.0 + z.norm()));
    Vector w = z;
    double step = std::numeric_limits<double>::infinity();
    std::size_t k = 0;
    while (k < inner_max_iters) {
      Vector next = z - cfg.eta * op(w);
      step = (next - w).norm();
      w = std::move(next);
      ++k;
      if (!(step > tol)) break;
    }
    if (step > tol || !std::isfinite(step)) throw InnerSolveError(t + 1, step);
    internal::CheckIterate(w, t + 1, "PP");
    tr.inner_iterations.push_back(k);
    z = w;
    internal::Append(tr, op, std::move(w));
  }
  return tr;
}

// Simultaneous gradient descent-ascent.
inline Trace RunGda(const OperatorHandle& op, const SolverConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw PreconditionError("GDA needs eta > 0");
  const Vector z0 = internal::StartPoint(op, cfg);
  Trace tr = internal::StartTrace(op, cfg, z0);
  Vector z = z0;
  for (std::size_t t = 0; t < cfg.T; ++t) {
    Vector next = z - cfg.eta * op(z);
    internal::CheckIterate(next, t + 1, "GDA");
    z = next;
    internal::Append(tr, op, std::move(next));
  }
  return tr;
}

// Dispatches on cfg.method. PP uses the exact affine solve when the operator
// carries a bilinear instance.
inline Trace RunSolver(const OperatorHandle& op, const SolverConfig& cfg) {
  switch (cfg.method) {
    case Method::kEG: return RunEg(op, cfg);
    case Method::kEGTimeVarying: return RunEgTimeVarying(op, cfg.schedule, cfg);
    case Method::kPP:
      if (op.bilinear) return RunPpAffine(*op.bilinear, cfg);
      return RunPpGeneral(op, cfg);
    case Method::kGDA: return RunGda(op, cfg);
  }
  throw PreconditionError("unknown method");
}

// Running means v^t = (z^0 + ... + z^t) / (t + 1), with losses re-evaluated at
// the averaged points.
inline Trace AverageTrace(Trace tr, const OperatorHandle& op) {
  if (tr.iterates.empty()) throw PreconditionError("cannot average an empty trace");
  tr.averaged_iterates.clear();
  tr.averaged_losses.clear();
  tr.averaged_iterates.reserve(tr.iterates.size());
  tr.averaged_losses.reserve(tr.iterates.size());
  Vector sum = Vector::Zero(tr.iterates.front().size());
  for (std::size_t t = 0; t < tr.iterates.size(); ++t) {
    sum += tr.iterates[t];
    Vector mean = sum / static_cast<double>(t + 1);
    tr.averaged_losses.push_back(EvaluateLosses(op, tr.region, mean));
    tr.averaged_iterates.push_back(std::move(mean));
  }
  return tr;
}

}  // namespace lastiter

#endif  // LASTITER_SOLVERS_HPP_
