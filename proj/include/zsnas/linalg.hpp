/*
 * Copyright 2026 The zsnas Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace zsnas {

/// Dense square matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  static SquareMatrix identity(std::size_t n);
  static SquareMatrix diagonal(const std::vector<double>& d);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  const std::vector<double>& data() const { return a_; }

  double frobenius_norm() const;
  /// max |a_ij - a_ji|
  double max_asymmetry() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline constexpr double kKappaSentinel = std::numeric_limits<double>::infinity();

struct EigenResult {
  std::vector<double> values;  // ascending
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// tol * ||A||_F. Throws ErrorKind::kNumeric after max_sweeps.
EigenResult jacobi_eigenvalues(const SquareMatrix& a, double tol = 1e-12,
                               int max_sweeps = 100);

/// lambda_max / lambda_min of a symmetric PSD matrix. Returns kKappaSentinel
/// when lambda_min <= 1e-12 * lambda_max. Rejects inputs whose asymmetry
/// exceeds 1e-8.
double condition_number(const SquareMatrix& theta);

}  // namespace zsnas
