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

#include <stdexcept>
#include <string>

namespace mixform {

// Bad user input or a violated precondition. The CLI maps it to exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Equilibrium spacing at or outside the desired-velocity ramp (zero slope).
class DegenerateEquilibrium : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Any failure of the numerics. The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix that should be Hurwitz is not (or Hamiltonian eigenvalues sit on
// the imaginary axis).
class SpectrumError : public NumericalError {
 public:
  SpectrumError(const std::string& what, double max_real_part)
      : NumericalError(what), max_real_part_(max_real_part) {}
  double max_real_part() const { return max_real_part_; }

 private:
  double max_real_part_;
};

class IllConditioned : public NumericalError {
 public:
  IllConditioned(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class StabilizabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double error_estimate)
      : NumericalError(what), error_estimate_(error_estimate) {}
  double error_estimate() const { return error_estimate_; }

 private:
  double error_estimate_;
};

class CollisionError : public NumericalError {
 public:
  CollisionError(const std::string& what, double time, int vehicle)
      : NumericalError(what), time_(time), vehicle_(vehicle) {}
  double time() const { return time_; }
  int vehicle() const { return vehicle_; }

 private:
  double time_;
  int vehicle_;
};

// Trajectory had not decayed by the end of the horizon.
class HorizonTooShort : public NumericalError {
 public:
  HorizonTooShort(const std::string& what, double residual_norm)
      : NumericalError(what), residual_norm_(residual_norm) {}
  double residual_norm() const { return residual_norm_; }

 private:
  double residual_norm_;
};

}  // namespace mixform
