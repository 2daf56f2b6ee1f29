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

#include "mixform/h2.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mixform/errors.h"
#include "mixform/linalg.h"

namespace mixform {
namespace {

struct Block {
  Eigen::Index start;
  Eigen::Index size;
};

// 1x1 and 2x2 diagonal blocks of a quasi-upper-triangular matrix.
std::vector<Block> diagonal_blocks(const Eigen::MatrixXd& T) {
  std::vector<Block> blocks;
  const Eigen::Index n = T.rows();
  for (Eigen::Index i = 0; i < n;) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      blocks.push_back({i, 2});
      i += 2;
    } else {
      blocks.push_back({i, 1});
      i += 1;
    }
  }
  return blocks;
}

double relative_norm(double num, double den) {
  return num / std::max(den, std::numeric_limits<double>::min());
}

}  // namespace

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& W, double margin) {
  const Eigen::Index m = A.rows();
  if (A.cols() != m || W.rows() != m || W.cols() != m) {
    throw InvalidInput("solve_lyapunov: dimension mismatch");
  }
  if (m == 0) return Eigen::MatrixXd(0, 0);

  Eigen::RealSchur<Eigen::MatrixXd> schur(A);
  if (schur.info() != Eigen::Success) {
    throw NumericalError("solve_lyapunov: real Schur iteration failed");
  }
  const Eigen::MatrixXd& T = schur.matrixT();
  const Eigen::MatrixXd& U = schur.matrixU();

  const auto blocks = diagonal_blocks(T);
  double abscissa = -std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    // Real part of a 2x2 standardized block is its (equal) diagonal mean.
    const double re = b.size == 1
                          ? T(b.start, b.start)
                          : 0.5 * (T(b.start, b.start) +
                                   T(b.start + 1, b.start + 1));
    abscissa = std::max(abscissa, re);
  }
  if (!(abscissa < -margin)) {
    std::ostringstream os;
    os << "solve_lyapunov: A is not Hurwitz (max Re(lambda) = " << abscissa
       << ")";
    throw SpectrumError(os.str(), abscissa);
  }

  // T Y + Y T' = C with C = -U' W U, solved block by block from the
  // bottom-right corner. Y is symmetric, so only blocks i <= j are solved.
  const Eigen::MatrixXd C = -(U.transpose() * W * U);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(m, m);
  const double scale = std::max(1.0, T.norm());

  for (auto jb = blocks.rbegin(); jb != blocks.rend(); ++jb) {
    const auto [j0, nj] = *jb;
    for (auto ib = blocks.rbegin(); ib != blocks.rend(); ++ib) {
      const auto [i0, ni] = *ib;
      if (i0 > j0) {
        Y.block(i0, j0, ni, nj) = Y.block(j0, i0, nj, ni).transpose();
        continue;
      }
      Eigen::MatrixXd rhs = C.block(i0, j0, ni, nj);
      const Eigen::Index below = m - (i0 + ni);
      if (below > 0) {
        rhs.noalias() -= T.block(i0, i0 + ni, ni, below) *
                         Y.block(i0 + ni, j0, below, nj);
      }
      const Eigen::Index right = m - (j0 + nj);
      if (right > 0) {
        rhs.noalias() -= Y.block(i0, j0 + nj, ni, right) *
                         T.block(j0, j0 + nj, nj, right).transpose();
      }
      // (I (x) T_ii + T_jj (x) I) vec(Y_ij) = vec(rhs)
      const Eigen::Index sz = ni * nj;
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(sz, sz);
      const Eigen::MatrixXd Tii = T.block(i0, i0, ni, ni);
      const Eigen::MatrixXd Tjj = T.block(j0, j0, nj, nj);
      for (Eigen::Index q = 0; q < nj; ++q) {
        K.block(q * ni, q * ni, ni, ni) += Tii;
        for (Eigen::Index r = 0; r < nj; ++r) {
          K.block(q * ni, r * ni, ni, ni).diagonal().array() += Tjj(q, r);
        }
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
      const auto& sv = svd.singularValues();
      const double smin = sv(sv.size() - 1);
      if (!(smin > 1e-14 * scale)) {
        std::ostringstream os;
        os << "solve_lyapunov: singular block system (sigma_min = " << smin
           << ", ||T|| = " << scale << ")";
        throw IllConditioned(os.str(), smin > 0 ? sv(0) / smin
                                                : std::numeric_limits<double>::infinity());
      }
      const Eigen::VectorXd y = K.fullPivLu().solve(
          Eigen::Map<const Eigen::VectorXd>(rhs.data(), sz));
      Y.block(i0, j0, ni, nj) = Eigen::Map<const Eigen::MatrixXd>(y.data(), ni, nj);
    }
  }
  return linalg::symmetrize(U * Y * U.transpose());
}

double lyapunov_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& X,
                         const Eigen::MatrixXd& W) {
  return relative_norm((A * X + X * A.transpose() + W).norm(), W.norm());
}

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd BtP = B.transpose() * P;
  const Eigen::MatrixXd AtP = A.transpose() * P;
  const Eigen::MatrixXd quad = BtP.transpose() * R.llt().solve(BtP);
  const Eigen::MatrixXd res = AtP + AtP.transpose() - quad + Q;
  const double scale = Q.norm() + 2.0 * AtP.norm() + quad.norm();
  return relative_norm(res.norm(), scale > 0.0 ? scale : 1.0);
}

CareSolution solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                        const SolverOptions& opts) {
  const Eigen::Index m = A.rows();
  const Eigen::Index k = B.cols();
  if (A.cols() != m || B.rows() != m || Q.rows() != m || Q.cols() != m ||
      R.rows() != k || R.cols() != k) {
    throw InvalidInput("solve_care: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> r_llt(R);
  if (k > 0 && r_llt.info() != Eigen::Success) {
    throw InvalidInput("solve_care: R must be positive definite");
  }
  const Eigen::MatrixXd G =
      k > 0 ? Eigen::MatrixXd(B * r_llt.solve(B.transpose()))
            : Eigen::MatrixXd::Zero(m, m);

  Eigen::MatrixXd ham(2 * m, 2 * m);
  ham << A, -G, -Q, -A.transpose();
  const auto schur = linalg::ordered_real_schur(ham);

  const double closest = schur.eigenvalues.real().cwiseAbs().minCoeff();
  if (closest < opts.imaginary_axis_tol) {
    std::ostringstream os;
    os << "solve_care: Hamiltonian eigenvalue within " << closest
       << " of the imaginary axis";
    throw SpectrumError(os.str(), closest);
  }
  if (schur.stable_count != m) {
    std::ostringstream os;
    os << "solve_care: stable invariant subspace has dimension "
       << schur.stable_count << ", expected " << m
       << " (pair is not stabilizable)";
    throw StabilizabilityError(os.str());
  }

  const Eigen::MatrixXd U11 = schur.U.topLeftCorner(m, m);
  const Eigen::MatrixXd U21 = schur.U.bottomLeftCorner(m, m);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(U11);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) {
    throw StabilizabilityError(
        "solve_care: stable subspace is not the graph of a matrix");
  }
  // P = U21 U11^-1  <=>  U11' P' = U21'
  Eigen::MatrixXd P = linalg::symmetrize(
      U11.transpose().fullPivLu().solve(U21.transpose()).transpose());

  CareSolution sol{P, care_residual(A, B, Q, R, P), 0};
  while (sol.newton_steps < opts.newton_max_iter &&
         (sol.residual > opts.residual_tol || sol.newton_steps == 0)) {
    const Eigen::MatrixXd K = r_llt.solve(B.transpose() * sol.P);
    const Eigen::MatrixXd Ak = A - B * K;
    Eigen::MatrixXd next;
    try {
      next = solve_lyapunov(Ak.transpose(),
                            Q + K.transpose() * R * K);
    } catch (const NumericalError&) {
      break;
    }
    const double res = care_residual(A, B, Q, R, next);
    if (!(res < sol.residual)) break;
    sol.P = std::move(next);
    sol.residual = res;
    ++sol.newton_steps;
  }
  if (!(sol.residual <= opts.residual_tol)) {
    std::ostringstream os;
    os << "solve_care: Newton refinement stalled at relative residual "
       << sol.residual;
    throw ConvergenceError(os.str(), sol.residual);
  }
  return sol;
}

H2Synthesis synthesize(const ReducedRealization& rr,
                       const SolverOptions& opts) {
  H2Synthesis out;
  const auto care = solve_care(rr.A_r, rr.B_r, rr.Q_r, rr.R, opts);
  out.P = care.P;
  out.riccati_residual = care.residual;
  out.K = rr.R.llt().solve(rr.B_r.transpose() * out.P);
  const Eigen::MatrixXd a_cl = rr.A_r - rr.B_r * out.K;
  out.closed_loop_abscissa = linalg::spectral_abscissa(a_cl);
  if (!(out.closed_loop_abscissa < -opts.hurwitz_margin)) {
    std::ostringstream os;
    os << "synthesize: closed loop not Hurwitz (max Re(lambda) = "
       << out.closed_loop_abscissa << ")";
    throw SpectrumError(os.str(), out.closed_loop_abscissa);
  }
  out.value = (rr.H_r.transpose() * out.P * rr.H_r).trace();
  return out;
}

double closed_loop_h2(const ReducedRealization& rr, const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd a_cl = rr.A_r - rr.B_r * K;
  const Eigen::MatrixXd weight = rr.Q_r + K.transpose() * rr.R * K;
  Eigen::MatrixXd gramian;
  try {
    gramian = solve_lyapunov(a_cl.transpose(), weight);
  } catch (const SpectrumError& e) {
    throw SpectrumError(
        "closed_loop_h2: closed loop unstable, H2 norm is infinite",
        e.max_real_part());
  }
  return (rr.H_r.transpose() * gramian * rr.H_r).trace();
}

namespace {

// Gauss-Kronrod 7/15 abscissae and weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b, integral, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

template <typename F>
Interval gauss_kronrod(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace

QuadratureResult h2_quadrature(const ReducedRealization& rr,
                               const Eigen::MatrixXd& K,
                               const QuadratureOptions& opts) {
  const Eigen::MatrixXd a_cl = rr.A_r - rr.B_r * K;
  const Eigen::Index m = a_cl.rows();
  const Eigen::MatrixXd weight = rr.Q_r + K.transpose() * rr.R * K;

  Eigen::EigenSolver<Eigen::MatrixXd> es(a_cl, false);
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const double abscissa = lambda.real().maxCoeff();
  if (!(abscissa < 0.0)) {
    throw SpectrumError(
        "h2_quadrature: closed loop unstable, H2 norm is infinite", abscissa);
  }

  const Eigen::MatrixXcd h = rr.H_r.cast<std::complex<double>>();
  const Eigen::MatrixXcd wc = weight.cast<std::complex<double>>();
  const Eigen::MatrixXcd ac = a_cl.cast<std::complex<double>>();
  const auto integrand = [&](double omega) {
    Eigen::MatrixXcd res =
        std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(m, m) - ac;
    const Eigen::MatrixXcd x = res.partialPivLu().solve(h);
    return (x.adjoint() * wc * x).trace().real();
  };

  const double a_norm = std::max(1.0, a_cl.norm());
  const double cutoff = opts.cutoff_factor * a_norm;

  // Initial partition: log-spaced between the slowest and fastest modes,
  // with extra breakpoints at resonant frequencies.
  std::vector<double> breaks{0.0, cutoff};
  const double lo = std::max(1e-6, lambda.cwiseAbs().minCoeff() * 1e-2);
  for (double w = lo; w < cutoff; w *= 2.0) breaks.push_back(w);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double w = std::abs(lambda(i).imag());
    if (w > 0.0 && w < cutoff) breaks.push_back(w);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::priority_queue<Interval> queue;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const auto iv = gauss_kronrod(integrand, breaks[i], breaks[i + 1]);
    total += iv.integral;
    error += iv.error;
    queue.push(iv);
  }

  // f(w) = c / w^2 + O(w^-4) with c = Tr(H' W H); the w^-3 term vanishes
  // because A, H, W are real.
  const double c = (rr.H_r.transpose() * weight * rr.H_r).trace();
  const double tail = c / cutoff;
  const double ratio = a_norm / cutoff;
  const double tail_bound = rr.H_r.squaredNorm() * weight.norm() * a_norm *
                            a_norm / std::pow(cutoff, 3) /
                            std::pow(1.0 - ratio, 3);

  const auto converged = [&] {
    const double goal =
        std::max(opts.abs_tol, opts.rel_tol * std::abs(total + tail));
    return error <= goal;
  };
  while (!converged() && static_cast<int>(queue.size()) < opts.max_intervals) {
    const Interval worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = gauss_kronrod(integrand, worst.a, mid);
    const auto right = gauss_kronrod(integrand, mid, worst.b);
    total += left.integral + right.integral - worst.integral;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }

  QuadratureResult out;
  out.cutoff = cutoff;
  out.tail = tail / std::numbers::pi;
  out.value = (total + tail) / std::numbers::pi;
  out.error_estimate = (error + tail_bound) / std::numbers::pi;
  out.intervals = static_cast<int>(queue.size());
  if (!converged()) {
    std::ostringstream os;
    os << "h2_quadrature: no convergence after " << out.intervals
       << " intervals (error estimate " << out.error_estimate << ")";
    throw QuadratureError(os.str(), out.error_estimate);
  }
  return out;
}

}  // namespace mixform
