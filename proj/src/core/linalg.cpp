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

#include "zsnas/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zsnas/error.hpp"

namespace zsnas {

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(const std::vector<double>& d) {
  SquareMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

double SquareMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

double SquareMatrix::max_asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

namespace {

double off_diagonal_norm(const SquareMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenResult jacobi_eigenvalues(const SquareMatrix& input, double tol, int max_sweeps) {
  const std::size_t n = input.size();
  SquareMatrix a = input;
  // Work on the symmetrised matrix so tiny asymmetries cannot stall rotation.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));

  const double threshold = tol * a.frobenius_norm();
  EigenResult result;
  while (off_diagonal_norm(a) >= threshold && threshold > 0.0) {
    if (result.sweeps == max_sweeps) {
      std::ostringstream msg;
      msg << "Jacobi eigensolver did not converge in " << max_sweeps << " sweeps";
      fail(ErrorKind::kNumeric, msg.str());
    }
    ++result.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
      }
  }
  result.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.values[i] = a(i, i);
  std::sort(result.values.begin(), result.values.end());
  return result;
}

double condition_number(const SquareMatrix& theta) {
  if (theta.size() == 0) fail(ErrorKind::kInvalidArgument, "empty matrix");
  const double asym = theta.max_asymmetry();
  if (!(asym <= 1e-8)) {
    std::ostringstream msg;
    msg << "matrix is not symmetric (max |A - A^T| = " << asym << ")";
    fail(ErrorKind::kInvalidArgument, msg.str());
  }
  for (double v : theta.data())
    if (!std::isfinite(v)) fail(ErrorKind::kNumeric, "matrix has non-finite entries");
  const auto eig = jacobi_eigenvalues(theta);
  const double lo = eig.values.front(), hi = eig.values.back();
  if (!(hi > 0.0) || lo <= 1e-12 * hi) return kKappaSentinel;
  return hi / lo;
}

}  // namespace zsnas
