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

#include "mixform/simulator.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mixform/csv.h"
#include "mixform/errors.h"
#include "mixform/parallel.h"

namespace mixform {

void validate(const SimConfig& cfg) {
  if (cfg.n < 1) throw InvalidInput("simulation needs n >= 1");
  validate(cfg.params);
  validate(cfg.weights);
  if (!(cfg.dt > 0.0) || !(cfg.horizon > cfg.dt)) {
    throw InvalidInput("simulation needs dt > 0 and horizon > dt");
  }
  if (cfg.record_stride < 1) throw InvalidInput("record_stride must be >= 1");
  if (cfg.formation && cfg.formation->n() != cfg.n) {
    throw InvalidInput("formation ring size does not match n");
  }
  const int k = cfg.formation ? cfg.formation->size() : 0;
  if (cfg.K.rows() != k || (k > 0 && cfg.K.cols() != 2 * cfg.n - 1)) {
    std::ostringstream os;
    os << "gain is " << cfg.K.rows() << "x" << cfg.K.cols() << ", expected "
       << k << "x" << 2 * cfg.n - 1;
    throw InvalidInput(os.str());
  }
  const auto& d = cfg.disturbance;
  if (!std::isfinite(d.magnitude)) {
    throw InvalidInput("disturbance magnitude must be finite");
  }
  if (d.target && (*d.target < 1 || *d.target > cfg.n)) {
    throw InvalidInput("disturbance target out of range");
  }
  if (d.kind == DisturbanceKind::kBandLimitedNoise && !(d.bandwidth > 0.0)) {
    throw InvalidInput("noise bandwidth must be positive");
  }
}

namespace {

// Acceleration disturbance w_i(t) for every vehicle.
class DisturbanceSignal {
 public:
  DisturbanceSignal(const DisturbanceSpec& spec, int n) : spec_(spec), n_(n) {
    if (spec.kind != DisturbanceKind::kBandLimitedNoise) return;
    // Gaussian knots every half period of the bandwidth, linearly
    // interpolated, zero outside [0, duration].
    knot_dt_ = 0.5 / spec.bandwidth;
    const int knots = static_cast<int>(std::ceil(spec.duration / knot_dt_)) + 1;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    knots_ = Eigen::MatrixXd::Zero(knots, n);
    for (int i = 0; i < n; ++i) {
      if (!targets(i)) continue;
      for (int q = 0; q < knots; ++q) knots_(q, i) = spec.magnitude * normal(rng);
    }
  }

  bool targets(int i) const { return !spec_.target || *spec_.target == i + 1; }

  // `mid` is the midpoint of the current step; window edges are only
  // crossed between steps.
  void fill(double t, double mid, Eigen::VectorXd& w) const {
    w.setZero(n_);
    switch (spec_.kind) {
      case DisturbanceKind::kNone:
      case DisturbanceKind::kImpulse:
        return;
      case DisturbanceKind::kBrakePulse:
        if (mid >= 0.0 && mid < spec_.duration) {
          for (int i = 0; i < n_; ++i) {
            if (targets(i)) w(i) = -spec_.magnitude;
          }
        }
        return;
      case DisturbanceKind::kBandLimitedNoise: {
        if (mid < 0.0 || mid >= spec_.duration) return;
        const double pos = t / knot_dt_;
        const auto q = static_cast<Eigen::Index>(pos);
        if (q + 1 >= knots_.rows()) return;
        const double frac = pos - static_cast<double>(q);
        w = (1.0 - frac) * knots_.row(q).transpose() +
            frac * knots_.row(q + 1).transpose();
        return;
      }
    }
  }

 private:
  DisturbanceSpec spec_;
  int n_;
  double knot_dt_ = 0.0;
  Eigen::MatrixXd knots_;
};

class RingDynamics {
 public:
  explicit RingDynamics(const SimConfig& cfg)
      : cfg_(cfg),
        n_(cfg.n),
        eq_(equilibrium(cfg.params, cfg.s_star)),
        signal_(cfg.disturbance, cfg.n),
        autonomous_(cfg.n, -1) {
    if (cfg.linearized) coeffs_ = linearize(cfg.params, cfg.s_star);
    if (cfg.formation) {
      const auto m = cfg.formation->members();
      for (std::size_t r = 0; r < m.size(); ++r) {
        autonomous_[m[r] - 1] = static_cast<int>(r);
      }
    }
  }

  const Equilibrium& eq() const { return eq_; }

  // u = -K E x~ with x~ the deviation from equilibrium.
  Eigen::VectorXd control(const Eigen::VectorXd& x) const {
    if (cfg_.K.rows() == 0) return Eigen::VectorXd();
    Eigen::VectorXd reduced(2 * n_ - 1);
    for (int i = 0; i < n_ - 1; ++i) reduced(i) = x(i) - eq_.s_star;
    for (int i = 0; i < n_; ++i) reduced(n_ - 1 + i) = x(n_ + i) - eq_.v_star;
    return -cfg_.K * reduced;
  }

  Eigen::VectorXd rhs(double t, double mid, const Eigen::VectorXd& x) const {
    Eigen::VectorXd dx(2 * n_);
    Eigen::VectorXd w;
    signal_.fill(t, mid, w);
    const Eigen::VectorXd u = control(x);
    const auto& p = cfg_.params;
    for (int i = 0; i < n_; ++i) {
      const int pred = (i + n_ - 1) % n_;
      const double s = x(i);
      const double v = x(n_ + i);
      const double v_pred = x(n_ + pred);
      dx(i) = v_pred - v;
      double accel;
      if (autonomous_[i] >= 0) {
        accel = u(autonomous_[i]);
      } else if (cfg_.linearized) {
        accel = coeffs_.alpha1 * (s - eq_.s_star) -
                coeffs_.alpha2 * (v - eq_.v_star) +
                coeffs_.alpha3 * (v_pred - eq_.v_star);
      } else {
        accel = p.alpha * (desired_velocity(s, p) - v) + p.beta * (v_pred - v);
      }
      dx(n_ + i) = accel + w(i);
    }
    return dx;
  }

  const DisturbanceSignal& signal() const { return signal_; }
  bool is_autonomous(int i) const { return autonomous_[i] >= 0; }
  int input_row(int i) const { return autonomous_[i]; }

 private:
  const SimConfig& cfg_;
  int n_;
  Equilibrium eq_;
  LinearHdvCoeffs coeffs_;
  DisturbanceSignal signal_;
  std::vector<int> autonomous_;
};

}  // namespace

Trajectory simulate(const SimConfig& cfg) {
  validate(cfg);
  const int n = cfg.n;
  RingDynamics dyn(cfg);

  Eigen::VectorXd x(2 * n);
  x.head(n).setConstant(dyn.eq().s_star);
  x.tail(n).setConstant(dyn.eq().v_star);
  if (cfg.disturbance.kind == DisturbanceKind::kImpulse) {
    for (int i = 0; i < n; ++i) {
      if (dyn.signal().targets(i)) x(n + i) += cfg.disturbance.magnitude;
    }
  }

  const auto steps = static_cast<long>(std::llround(cfg.horizon / cfg.dt));
  const long samples = steps / cfg.record_stride + 1 +
                       (steps % cfg.record_stride != 0 ? 1 : 0);

  Trajectory traj;
  traj.n = n;
  traj.ring_length = n * cfg.s_star;
  traj.eq = dyn.eq();
  traj.time.reserve(samples);
  traj.spacing.resize(samples, n);
  traj.velocity.resize(samples, n);
  traj.control = Eigen::MatrixXd::Zero(samples, n);

  long row = 0;
  const auto record = [&](double t) {
    traj.time.push_back(t);
    traj.spacing.row(row) = x.head(n).transpose();
    traj.velocity.row(row) = x.tail(n).transpose();
    const Eigen::VectorXd u = dyn.control(x);
    for (int i = 0; i < n; ++i) {
      if (dyn.is_autonomous(i)) traj.control(row, i) = u(dyn.input_row(i));
    }
    ++row;
  };

  record(0.0);
  const double h = cfg.dt;
  for (long step = 1; step <= steps; ++step) {
    const double t = (step - 1) * h;
    const double mid = t + 0.5 * h;
    const Eigen::VectorXd k1 = dyn.rhs(t, mid, x);
    const Eigen::VectorXd k2 = dyn.rhs(mid, mid, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = dyn.rhs(mid, mid, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = dyn.rhs(t + h, mid, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double now = step * h;
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "simulation produced a non-finite state at t = " << now;
      throw NumericalError(os.str());
    }
    Eigen::Index worst = 0;
    if (x.head(n).minCoeff(&worst) <= 0.0) {
      std::ostringstream os;
      os << "collision: spacing of vehicle " << worst + 1
         << " reached zero at t = " << now;
      throw CollisionError(os.str(), now, static_cast<int>(worst) + 1);
    }
    if (step % cfg.record_stride == 0 || step == steps) record(now);
  }
  return traj;
}

double output_energy(const Trajectory& traj, const PerformanceWeights& w) {
  const double qs = w.spacing_cost();
  const double qv = w.velocity_cost();
  const double r = w.input_cost();
  const auto cost = [&](Eigen::Index row) {
    const auto ds = traj.spacing.row(row).array() - traj.eq.s_star;
    const auto dv = traj.velocity.row(row).array() - traj.eq.v_star;
    return qs * ds.square().sum() + qv * dv.square().sum() +
           r * traj.control.row(row).squaredNorm();
  };
  double energy = 0.0;
  for (std::size_t i = 1; i < traj.time.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    energy += 0.5 * (traj.time[i] - traj.time[i - 1]) *
              (cost(row - 1) + cost(row));
  }
  return energy;
}

double impulse_energy(const SimConfig& cfg, int channel) {
  SimConfig lin = cfg;
  lin.linearized = true;
  lin.record_stride = 1;
  lin.disturbance.kind = DisturbanceKind::kImpulse;
  lin.disturbance.target = channel;
  validate(lin);
  if (lin.disturbance.magnitude == 0.0) return 0.0;

  const auto traj = simulate(lin);
  const auto last = static_cast<Eigen::Index>(traj.time.size()) - 1;
  const double residual =
      std::sqrt((traj.spacing.row(last).array() - traj.eq.s_star).square().sum() +
                (traj.velocity.row(last).array() - traj.eq.v_star).square().sum()) /
      std::abs(lin.disturbance.magnitude);
  if (residual > 1e-4) {
    std::ostringstream os;
    os << "impulse response on channel " << channel
       << " has not decayed by t = " << lin.horizon
       << " (relative state norm " << residual << "); extend the horizon";
    throw HorizonTooShort(os.str(), residual);
  }
  return output_energy(traj, lin.weights);
}

double channel_summed_impulse_energy(const SimConfig& cfg, int threads) {
  std::vector<double> energy(cfg.n);
  parallel_for(energy.size(), threads, [&](std::size_t i) {
    energy[i] = impulse_energy(cfg, static_cast<int>(i) + 1);
  });
  double total = 0.0;
  for (double e : energy) total += e;
  return total;
}

namespace {

FormationMetrics metrics_for(const SimConfig& cfg, double band, int threads) {
  const auto traj = simulate(cfg);
  FormationMetrics m;
  m.output_energy = output_energy(traj, cfg.weights);
  const Eigen::MatrixXd dev =
      (traj.velocity.array() - traj.eq.v_star).abs().matrix();
  m.peak_velocity_deviation = dev.maxCoeff();
  for (Eigen::Index r = dev.rows() - 1; r >= 0; --r) {
    if (dev.row(r).maxCoeff() > band) {
      m.settling_time = traj.time[static_cast<std::size_t>(r)];
      break;
    }
  }
  SimConfig unit = cfg;
  unit.disturbance.magnitude = 1.0;
  m.impulse_h2 = channel_summed_impulse_energy(unit, threads);
  return m;
}

}  // namespace

FormationComparison compare_formations(const SimConfig& a, const SimConfig& b,
                                       double settle_band, int threads) {
  const auto& da = a.disturbance;
  const auto& db = b.disturbance;
  const bool same =
      a.n == b.n && a.params.alpha == b.params.alpha &&
      a.params.beta == b.params.beta && a.params.v_max == b.params.v_max &&
      a.params.s_st == b.params.s_st && a.params.s_go == b.params.s_go &&
      a.s_star == b.s_star && a.weights.gamma_s == b.weights.gamma_s &&
      a.weights.gamma_v == b.weights.gamma_v &&
      a.weights.gamma_u == b.weights.gamma_u &&
      a.weights.scaling == b.weights.scaling && a.dt == b.dt &&
      a.horizon == b.horizon && a.linearized == b.linearized &&
      da.kind == db.kind && da.target == db.target &&
      da.magnitude == db.magnitude && da.duration == db.duration &&
      da.bandwidth == db.bandwidth && da.seed == db.seed;
  if (!same) {
    throw InvalidInput(
        "compare_formations: configs differ in more than formation and gain");
  }
  FormationComparison out;
  out.a = metrics_for(a, settle_band, threads);
  out.b = metrics_for(b, settle_band, threads);
  if (out.a.output_energy < out.b.output_energy) {
    out.lower_energy = -1;
  } else if (out.b.output_energy < out.a.output_energy) {
    out.lower_energy = 1;
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "time,vehicle,spacing,velocity,control\n";
  for (std::size_t r = 0; r < traj.time.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const std::string t = format_number(traj.time[r]);
    for (int i = 0; i < traj.n; ++i) {
      os << t << ',' << i + 1 << ',' << format_number(traj.spacing(row, i))
         << ',' << format_number(traj.velocity(row, i)) << ','
         << format_number(traj.control(row, i)) << '\n';
    }
  }
}

}  // namespace mixform
