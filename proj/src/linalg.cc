// Copyright 2026 The mixform Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mixform/linalg.h"

#include <lapacke.h>

#include <string>

#include "mixform/errors.h"

namespace mixform::linalg {
namespace {

lapack_logical select_stable(const double* re, const double* /*im*/) {
  return *re < 0.0;
}

}  // namespace

OrderedSchur ordered_real_schur(const Eigen::MatrixXd& A) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  OrderedSchur out;
  // Column-major copy; dgees overwrites it with T.
  out.T = A;
  out.U.resize(n, n);
  Eigen::VectorXd wr(n), wi(n);
  lapack_int sdim = 0;
  if (n == 0) return out;
  const lapack_int info = LAPACKE_dgees(
      LAPACK_COL_MAJOR, 'V', 'S', select_stable, n, out.T.data(), n, &sdim,
      wr.data(), wi.data(), out.U.data(), n);
  if (info > 0 && info <= n) {
    throw NumericalError("dgees: QR iteration failed to converge");
  }
  if (info == n + 1) {
    throw IllConditioned(
        "dgees: eigenvalues too close to reorder the Schur form", 0.0);
  }
  if (info == n + 2) {
    throw NumericalError(
        "dgees: rounding changed which eigenvalues satisfy the selector");
  }
  if (info < 0) {
    throw NumericalError("dgees: illegal argument " + std::to_string(-info));
  }
  out.stable_count = sdim;
  out.eigenvalues.resize(n);
  for (lapack_int i = 0; i < n; ++i) out.eigenvalues(i) = {wr(i), wi(i)};
  return out;
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
  if (A.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue iteration failed");
  }
  return es.eigenvalues().real().maxCoeff();
}

}  // namespace mixform::linalg
