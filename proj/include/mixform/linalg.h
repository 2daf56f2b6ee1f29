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

#pragma once

#include <Eigen/Dense>

namespace mixform::linalg {

// Real Schur form A = U T U^T with the eigenvalues of negative real part
// moved to the leading block of T.
struct OrderedSchur {
  Eigen::MatrixXd T;
  Eigen::MatrixXd U;
  Eigen::VectorXcd eigenvalues;  // in the order they appear on diag(T)
  int stable_count = 0;
};

// Wraps LAPACK dgees with a Re(lambda) < 0 selector. Throws NumericalError if
// the QR iteration fails or reordering loses accuracy.
OrderedSchur ordered_real_schur(const Eigen::MatrixXd& A);

// Largest real part over the spectrum of A.
double spectral_abscissa(const Eigen::MatrixXd& A);

inline bool is_hurwitz(const Eigen::MatrixXd& A, double margin) {
  return spectral_abscissa(A) < -margin;
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& X) {
  return 0.5 * (X + X.transpose());
}

}  // namespace mixform::linalg
