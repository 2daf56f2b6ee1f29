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

// Time-domain ring-road simulation with autonomous vehicles applying a
// synthesized state feedback, and the impulse-energy check of H2 values.

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "mixform/traffic_model.h"

namespace mixform {

enum class DisturbanceKind { kNone, kImpulse, kBrakePulse, kBandLimitedNoise };

struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::kBrakePulse;
  // Disturbed vehicle (1-based); nullopt disturbs every vehicle with
  // independent realizations.
  std::optional<int> target = 1;
  // Acceleration amplitude in m/s^2. For kImpulse it is the area of the
  // acceleration impulse, i.e. an instantaneous velocity jump in m/s.
  double magnitude = 1.0;
  double duration = 1.0;   // s, pulse length or noise window
  double bandwidth = 1.0;  // Hz, noise only
  std::uint64_t seed = 0;
};

struct SimConfig {
  int n = 0;
  // nullopt: every vehicle is human-driven and K must have zero rows.
  std::optional<Formation> formation;
  HdvParams params;
  double s_star = 20.0;  // ring length is n * s_star
  PerformanceWeights weights;
  Eigen::MatrixXd K;  // k x (2n - 1), u = -K E x~
  double dt = 0.01;
  double horizon = 100.0;
  DisturbanceSpec disturbance;
  // Integrate the linearized error dynamics instead of the nonlinear model.
  bool linearized = false;
  // Keep every `record_stride`-th step (the last step is always kept).
  int record_stride = 1;
};

// Throws InvalidInput on inconsistent dimensions or parameters.
void validate(const SimConfig& cfg);

struct Trajectory {
  int n = 0;
  double ring_length = 0.0;
  Equilibrium eq;
  std::vector<double> time;
  // One row per recorded sample, one column per vehicle.
  Eigen::MatrixXd spacing;
  Eigen::MatrixXd velocity;
  Eigen::MatrixXd control;  // zero for human-driven vehicles
};

// Fixed-step RK4. Throws CollisionError when a spacing reaches zero and
// NumericalError on non-finite states.
Trajectory simulate(const SimConfig& cfg);

// Integral of z'z = x~' Q x~ + u' R u along a trajectory (trapezoidal).
double output_energy(const Trajectory& traj, const PerformanceWeights& w);

// Output energy of the linearized closed loop after an impulse of
// cfg.disturbance.magnitude on the acceleration of vehicle `channel`.
// Throws HorizonTooShort if the state has not decayed by 1e-4 of its initial
// norm at the horizon.
double impulse_energy(const SimConfig& cfg, int channel);

// Sum of impulse_energy over all n channels; equals the squared H2 norm for
// a unit impulse.
double channel_summed_impulse_energy(const SimConfig& cfg, int threads = 1);

struct FormationMetrics {
  double output_energy = 0.0;
  double peak_velocity_deviation = 0.0;
  double settling_time = 0.0;  // last time any |v - v*| exceeds the band
  double impulse_h2 = 0.0;     // channel-summed unit impulse energy
};

struct FormationComparison {
  FormationMetrics a;
  FormationMetrics b;
  // -1 if A has lower output energy, 1 if B does, 0 if equal.
  int lower_energy = 0;
};

// Both configs must agree on everything except formation and gain.
FormationComparison compare_formations(const SimConfig& a, const SimConfig& b,
                                       double settle_band = 0.01,
                                       int threads = 1);

// CSV with header time,vehicle,spacing,velocity,control; one row per
// (sample, vehicle); %.9g floats.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace mixform
