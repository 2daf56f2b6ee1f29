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

// Dense Lyapunov/Riccati stack and H2-optimal state feedback.

#include <Eigen/Dense>

#include "mixform/traffic_model.h"

namespace mixform {

struct SolverOptions {
  int newton_max_iter = 20;
  // CARE residual ||A'P + PA - PBR^-1B'P + Q||_F scaled by
  // ||Q||_F + 2||A'P||_F + ||PBR^-1B'P||_F.
  double residual_tol = 1e-10;
  // Accepted closed loops satisfy max Re(lambda) < -hurwitz_margin.
  double hurwitz_margin = 1e-9;
  // Hamiltonian eigenvalues closer than this to the imaginary axis abort.
  double imaginary_axis_tol = 1e-10;
};

// Solves A X + X A^T + W = 0 by Bartels-Stewart on the real Schur form of A.
// Requires max Re(lambda(A)) < -margin; throws SpectrumError otherwise and
// IllConditioned when a diagonal block system is numerically singular.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& W, double margin = 0.0);

// ||A X + X A^T + W||_F / max(||W||_F, tiny)
double lyapunov_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& W);

struct CareSolution {
  Eigen::MatrixXd P;
  double residual = 0.0;  // relative, see SolverOptions::residual_tol
  int newton_steps = 0;
};

// Stabilizing solution of A'P + PA - P B R^-1 B' P + Q = 0.
//
// The stable invariant subspace of the Hamiltonian [A -BR^-1B'; -Q -A'] is
// extracted from an ordered real Schur form, P = U21 U11^-1 is symmetrized,
// then refined by Newton-Kleinman steps (one Lyapunov solve each) until the
// residual is within tolerance or stops decreasing.
//
// Throws SpectrumError for Hamiltonian eigenvalues on the imaginary axis,
// StabilizabilityError when the stable subspace is not m-dimensional or not
// a graph, and ConvergenceError carrying the final residual otherwise.
CareSolution solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                        const SolverOptions& opts = {});

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P);

struct H2Synthesis {
  Eigen::MatrixXd P;  // m x m Riccati solution
  Eigen::MatrixXd K;  // k x m, u = -K x_r
  double value = 0.0;  // optimal squared H2 norm Tr(H_r' P H_r)
  double riccati_residual = 0.0;
  double closed_loop_abscissa = 0.0;  // max Re(lambda(A_r - B_r K))
};

H2Synthesis synthesize(const ReducedRealization& rr,
                       const SolverOptions& opts = {});

// Squared H2 norm from disturbance to z = [Q_r^1/2; -R^1/2 K] x_r under
// u = -K x_r, via the closed-loop observability Gramian. Throws
// SpectrumError when A_r - B_r K is not Hurwitz.
double closed_loop_h2(const ReducedRealization& rr, const Eigen::MatrixXd& K);

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-15;
  int max_intervals = 4000;
  // Finite range is [0, cutoff_factor * max(1, ||A_cl||_F)]; the rest is
  // handled by the analytic c / omega^2 tail.
  double cutoff_factor = 1e4;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;  // quadrature error plus tail bound
  double cutoff = 0.0;
  double tail = 0.0;
  int intervals = 0;
};

// (1/pi) * integral_0^inf ||G(j w)||_F^2 dw by adaptive Gauss-Kronrod.
// Same quantity as closed_loop_h2, computed in the frequency domain.
// Throws QuadratureError with the achieved estimate on non-convergence.
QuadratureResult h2_quadrature(const ReducedRealization& rr,
                               const Eigen::MatrixXd& K,
                               const QuadratureOptions& opts = {});

}  // namespace mixform
