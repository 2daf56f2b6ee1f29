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

// Ring-road mixed traffic model: optimal velocity car-following for human
// drivers, its linearization, the 2n-state error dynamics with autonomous
// vehicles as inputs, and the (2n-1)-state realization with the conserved
// spacing-sum mode removed.

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mixform {

// Nonlinear optimal velocity model of a human driver.
struct HdvParams {
  double alpha = 0.6;  // 1/s
  double beta = 0.9;   // 1/s
  double v_max = 30.0;
  double s_st = 5.0;
  double s_go = 35.0;
};

// Throws InvalidInput unless alpha, beta, v_max > 0 and s_st < s_go.
void validate(const HdvParams& p);

// Coefficients of the linearized human-driver dynamics
//   d/dt v_i = alpha1 * s_i - alpha2 * v_i + alpha3 * v_{i-1}.
struct LinearHdvCoeffs {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
};

// Throws InvalidInput unless alpha1 > 0 and alpha2 > alpha3 > 0.
void validate(const LinearHdvCoeffs& c);

struct Equilibrium {
  double s_star = 0.0;
  double v_star = 0.0;
};

// Set of autonomous-vehicle indices on a ring of n vehicles. Indices are
// 1-based; vehicle i follows vehicle i-1 and vehicle 1 follows vehicle n.
class Formation {
 public:
  // Sorts `members`; throws InvalidInput on duplicates, out-of-range indices,
  // an empty set or n < 1.
  Formation(int n, std::vector<int> members);

  // Parses "1-4-7-10".
  static Formation parse(int n, std::string_view text);

  int n() const { return n_; }
  int size() const { return static_cast<int>(members_.size()); }
  std::span<const int> members() const { return members_; }
  bool contains(int index) const;

  // Every index i moves to ((i - 1 + shift) mod n) + 1.
  Formation rotated(int shift) const;
  // Copy with `index` added (no-op if already present).
  Formation with(int index) const;
  bool is_subset_of(const Formation& other) const;

  // "1-4-7-10"
  std::string to_string() const;

  friend bool operator==(const Formation&, const Formation&) = default;
  friend auto operator<=>(const Formation&, const Formation&) = default;

 private:
  int n_;
  std::vector<int> members_;
};

// How the gammas enter the cost matrices.
enum class CostScaling {
  kLinear,   // Q = diag(gamma_s.., gamma_v..), R = gamma_u * I
  kSquared,  // Q = diag(gamma_s^2.., gamma_v^2..), R = gamma_u^2 * I
};

struct PerformanceWeights {
  double gamma_s = 0.01;
  double gamma_v = 0.05;
  double gamma_u = 0.1;
  CostScaling scaling = CostScaling::kLinear;

  double spacing_cost() const;
  double velocity_cost() const;
  double input_cost() const;
};

void validate(const PerformanceWeights& w);

// Full error-state model x = [s~_1..s~_n, v~_1..v~_n]:
//   dx/dt = A x + B u + H w.
struct StateSpace {
  int n = 0;
  Eigen::MatrixXd A;  // 2n x 2n
  Eigen::MatrixXd B;  // 2n x k
  Eigen::MatrixXd H;  // 2n x n
};

// Minimal realization on the invariant subspace sum_i s~_i = 0, with
// reduced state [s~_1..s~_{n-1}, v~_1..v~_n]. Plain aggregate so that
// hand-built test systems can use the same solvers.
struct ReducedRealization {
  int m = 0;
  Eigen::MatrixXd A_r;  // m x m
  Eigen::MatrixXd B_r;  // m x k
  Eigen::MatrixXd H_r;  // m x n
  Eigen::MatrixXd Q_r;  // m x m, T^T Q T
  Eigen::MatrixXd R;    // k x k
  Eigen::MatrixXd T;    // 2n x m lift
  Eigen::MatrixXd E;    // m x 2n deletion of s~_n
  // Full-state cost Q (diagonal), kept for reporting.
  Eigen::VectorXd q_full;
};

// Desired velocity V(s): 0 below s_st, v_max above s_go, cosine ramp between.
double desired_velocity(double s, const HdvParams& p);
// dV/ds; zero outside the open ramp.
double desired_velocity_slope(double s, const HdvParams& p);

// Right-hand side F(s, s_dot, v) = alpha (V(s) - v) + beta s_dot.
double ovm_acceleration(const HdvParams& p, double s, double s_dot, double v);

Equilibrium equilibrium(const HdvParams& p, double s_star);

// alpha1 = alpha V'(s*), alpha2 = alpha + beta, alpha3 = beta. Throws
// DegenerateEquilibrium if s* is not strictly inside (s_st, s_go).
LinearHdvCoeffs linearize(const HdvParams& p, double s_star);

// alpha + 2 beta - V'(s*); string stable iff >= 0. No validation.
double string_stability_index(const HdvParams& p, double s_star);
inline bool is_string_stable(const HdvParams& p, double s_star) {
  return string_stability_index(p, s_star) >= 0.0;
}

StateSpace build_state_space(const LinearHdvCoeffs& c, const Formation& f);

ReducedRealization reduce(const StateSpace& ss, const PerformanceWeights& w);

}  // namespace mixform
