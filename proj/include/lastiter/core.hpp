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

// Basic vocabulary shared by every lastiter header: dense vector/matrix
// aliases, the exception hierarchy, and the SaddlePoint value type.

#ifndef LASTITER_CORE_HPP_
#define LASTITER_CORE_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace lastiter {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, Index expected, Index actual)
      : Error(what + ": expected dimension " + std::to_string(expected) +
              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  Index expected() const { return expected_; }
  Index actual() const { return actual_; }

 private:
  Index expected_;
  Index actual_;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// An iterate became non-finite or left the divergence threshold.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// The implicit-step fixed-point loop of the proximal point method stalled.
class InnerSolveError : public Error {
 public:
  InnerSolveError(std::size_t iteration, double residual)
      : Error("implicit step did not converge at outer iteration " +
              std::to_string(iteration) +
              " (last residual " + std::to_string(residual) + ")"),
        iteration_(iteration),
        residual_(residual) {}

  std::size_t iteration() const { return iteration_; }
  double residual() const { return residual_; }

 private:
  std::size_t iteration_;
  double residual_;
};

inline bool AllFinite(const Vector& v) { return v.allFinite(); }

// Throws DimensionError unless `v` has `expected` entries.
inline void CheckDimension(const char* context, const Vector& v,
                           Index expected) {
  if (v.size() != expected) throw DimensionError(context, expected, v.size());
}

// z = (x, y) with x the first `split` coordinates.
class SaddlePoint {
 public:
  SaddlePoint(Vector data, Index split) : data_(std::move(data)), split_(split) {
    if (split_ <= 0 || split_ >= data_.size()) {
      throw PreconditionError("SaddlePoint split must satisfy 0 < n_x < n (n=" +
                              std::to_string(data_.size()) +
                              ", n_x=" + std::to_string(split_) + ")");
    }
    if (!AllFinite(data_)) {
      throw PreconditionError("SaddlePoint entries must be finite");
    }
  }

  static SaddlePoint Zero(Index n, Index split) {
    return SaddlePoint(Vector::Zero(n), split);
  }

  const Vector& vec() const { return data_; }
  Index size() const { return data_.size(); }
  Index split() const { return split_; }
  Index size_x() const { return split_; }
  Index size_y() const { return data_.size() - split_; }

  Eigen::VectorBlock<const Vector> x() const { return data_.head(split_); }
  Eigen::VectorBlock<const Vector> y() const {
    return data_.tail(data_.size() - split_);
  }

 private:
  Vector data_;
  Index split_;
};

}  // namespace lastiter

#endif  // LASTITER_CORE_HPP_
