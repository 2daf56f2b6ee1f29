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

#include "mixform/traffic_model.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mixform/errors.h"

namespace mixform {

void validate(const HdvParams& p) {
  if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.v_max > 0.0)) {
    throw InvalidInput("OVM parameters require alpha, beta, v_max > 0");
  }
  if (!(p.s_st < p.s_go)) {
    throw InvalidInput("OVM parameters require s_st < s_go");
  }
}

void validate(const LinearHdvCoeffs& c) {
  if (!(c.alpha1 > 0.0)) {
    throw InvalidInput("linearized coefficients require alpha1 > 0");
  }
  if (!(c.alpha2 > c.alpha3) || !(c.alpha3 > 0.0)) {
    throw InvalidInput("linearized coefficients require alpha2 > alpha3 > 0");
  }
}

Formation::Formation(int n, std::vector<int> members)
    : n_(n), members_(std::move(members)) {
  if (n_ < 1) throw InvalidInput("formation needs n >= 1");
  if (members_.empty()) {
    throw InvalidInput("formation needs at least one autonomous vehicle");
  }
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw InvalidInput("formation indices must be distinct");
  }
  if (members_.front() < 1 || members_.back() > n_) {
    throw InvalidInput("formation index out of range 1.." + std::to_string(n_));
  }
}

Formation Formation::parse(int n, std::string_view text) {
  std::vector<int> out;
  while (!text.empty()) {
    const auto dash = text.find('-');
    const auto token = text.substr(0, dash);
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() ||
        token.empty()) {
      throw InvalidInput("cannot parse formation '" + std::string(text) + "'");
    }
    out.push_back(value);
    if (dash == std::string_view::npos) break;
    text.remove_prefix(dash + 1);
    if (text.empty()) throw InvalidInput("trailing '-' in formation");
  }
  return Formation(n, std::move(out));
}

bool Formation::contains(int index) const {
  return std::binary_search(members_.begin(), members_.end(), index);
}

Formation Formation::rotated(int shift) const {
  std::vector<int> out;
  out.reserve(members_.size());
  const int s = ((shift % n_) + n_) % n_;
  for (int i : members_) out.push_back((i - 1 + s) % n_ + 1);
  return Formation(n_, std::move(out));
}

Formation Formation::with(int index) const {
  if (contains(index)) return *this;
  std::vector<int> out = members_;
  out.push_back(index);
  return Formation(n_, std::move(out));
}

bool Formation::is_subset_of(const Formation& other) const {
  return n_ == other.n_ &&
         std::includes(other.members_.begin(), other.members_.end(),
                       members_.begin(), members_.end());
}

std::string Formation::to_string() const {
  std::ostringstream os;
  for (std::size_t r = 0; r < members_.size(); ++r) {
    if (r) os << '-';
    os << members_[r];
  }
  return os.str();
}

double PerformanceWeights::spacing_cost() const {
  return scaling == CostScaling::kLinear ? gamma_s : gamma_s * gamma_s;
}
double PerformanceWeights::velocity_cost() const {
  return scaling == CostScaling::kLinear ? gamma_v : gamma_v * gamma_v;
}
double PerformanceWeights::input_cost() const {
  return scaling == CostScaling::kLinear ? gamma_u : gamma_u * gamma_u;
}

void validate(const PerformanceWeights& w) {
  if (!(w.gamma_s > 0.0) || !(w.gamma_v > 0.0) || !(w.gamma_u > 0.0)) {
    throw InvalidInput("performance weights must be strictly positive");
  }
}

double desired_velocity(double s, const HdvParams& p) {
  if (s <= p.s_st) return 0.0;
  if (s >= p.s_go) return p.v_max;
  const double phase = std::numbers::pi * (s - p.s_st) / (p.s_go - p.s_st);
  return 0.5 * p.v_max * (1.0 - std::cos(phase));
}

double desired_velocity_slope(double s, const HdvParams& p) {
  if (s <= p.s_st || s >= p.s_go) return 0.0;
  const double width = p.s_go - p.s_st;
  return p.v_max * std::numbers::pi / (2.0 * width) *
         std::sin(std::numbers::pi * (s - p.s_st) / width);
}

double ovm_acceleration(const HdvParams& p, double s, double s_dot, double v) {
  return p.alpha * (desired_velocity(s, p) - v) + p.beta * s_dot;
}

Equilibrium equilibrium(const HdvParams& p, double s_star) {
  return {s_star, desired_velocity(s_star, p)};
}

LinearHdvCoeffs linearize(const HdvParams& p, double s_star) {
  validate(p);
  if (!(s_star > p.s_st && s_star < p.s_go)) {
    std::ostringstream os;
    os << "equilibrium spacing " << s_star << " is outside the ramp ("
       << p.s_st << ", " << p.s_go << "); V'(s*) = 0 gives alpha1 = 0";
    throw DegenerateEquilibrium(os.str());
  }
  return {p.alpha * desired_velocity_slope(s_star, p), p.alpha + p.beta,
          p.beta};
}

double string_stability_index(const HdvParams& p, double s_star) {
  return p.alpha + 2.0 * p.beta - desired_velocity_slope(s_star, p);
}

StateSpace build_state_space(const LinearHdvCoeffs& c, const Formation& f) {
  const int n = f.n();
  const int k = f.size();
  StateSpace ss;
  ss.n = n;
  ss.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ss.B = Eigen::MatrixXd::Zero(2 * n, k);
  ss.H = Eigen::MatrixXd::Zero(2 * n, n);
  for (int i = 0; i < n; ++i) {
    const int pred = (i + n - 1) % n;
    // ds_i/dt = v_{i-1} - v_i
    ss.A(i, n + i) += -1.0;
    ss.A(i, n + pred) += 1.0;
    if (!f.contains(i + 1)) {
      ss.A(n + i, i) = c.alpha1;
      ss.A(n + i, n + i) += -c.alpha2;
      ss.A(n + i, n + pred) += c.alpha3;
    }
    ss.H(n + i, i) = 1.0;
  }
  const auto members = f.members();
  for (int r = 0; r < k; ++r) ss.B(n + members[r] - 1, r) = 1.0;
  return ss;
}

ReducedRealization reduce(const StateSpace& ss, const PerformanceWeights& w) {
  validate(w);
  const int n = ss.n;
  const int m = 2 * n - 1;
  const auto k = ss.B.cols();

  ReducedRealization rr;
  rr.m = m;
  rr.T = Eigen::MatrixXd::Zero(2 * n, m);
  rr.E = Eigen::MatrixXd::Zero(m, 2 * n);
  for (int i = 0; i < n - 1; ++i) {
    rr.T(i, i) = 1.0;
    rr.T(n - 1, i) = -1.0;
    rr.E(i, i) = 1.0;
  }
  for (int i = 0; i < n; ++i) {
    rr.T(n + i, n - 1 + i) = 1.0;
    rr.E(n - 1 + i, n + i) = 1.0;
  }

  rr.A_r = rr.E * ss.A * rr.T;
  rr.B_r = rr.E * ss.B;
  rr.H_r = rr.E * ss.H;

  rr.q_full.resize(2 * n);
  rr.q_full.head(n).setConstant(w.spacing_cost());
  rr.q_full.tail(n).setConstant(w.velocity_cost());
  rr.Q_r = rr.T.transpose() * rr.q_full.asDiagonal() * rr.T;
  rr.R = w.input_cost() * Eigen::MatrixXd::Identity(k, k);
  return rr;
}

}  // namespace mixform
