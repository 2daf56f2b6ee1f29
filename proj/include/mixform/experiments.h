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

// Experiment runners behind the command-line tool. Every runner returns
// plain records; the writers produce the CSV/JSON files.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixform/formation_search.h"
#include "mixform/h2.h"
#include "mixform/traffic_model.h"

namespace mixform {

// Grid along one parameter axis. JSON form is either an explicit array or
// {"min": a, "max": b, "count": c, "endpoints": bool}; with endpoints=false
// the values are the c cell midpoints of [a, b].
struct GridSpec {
  std::vector<double> values;

  static GridSpec linspace(double lo, double hi, int count);
  static GridSpec midpoints(double lo, double hi, int count);
  static GridSpec from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
  int n = 12;
  int k = 4;
  PerformanceWeights weights;
  // alpha/beta here are unused; the grids supply them.
  HdvParams ovm;
  GridSpec alpha_grid = GridSpec::linspace(0.1, 1.5, 8);
  GridSpec beta_grid = GridSpec::linspace(0.1, 1.5, 8);
  GridSpec s_star_grid = GridSpec::midpoints(5.0, 35.0, 7);
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

// Keys: n, k, gamma_s, gamma_v, gamma_u, v_max, s_st, s_go, alpha_grid,
// beta_grid, s_star_grid, seed, threads, out, and optionally
// "weight_scaling": "linear" | "squared". Missing keys keep their defaults;
// unknown keys and invalid values throw InvalidInput.
ExperimentConfig parse_config(const nlohmann::json& j,
                              ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path,
                             ExperimentConfig base = {});
void validate(const ExperimentConfig& cfg);

struct SweepRecord {
  double alpha = 0.0;
  double beta = 0.0;
  double s_star = 0.0;
  double xi = 0.0;
  // Set when the cell could not be evaluated; the fields below are empty.
  std::optional<std::string> error;
  FormationClass best_class = FormationClass::kAbnormal;
  FormationClass worst_class = FormationClass::kAbnormal;
  double best_J = 0.0;
  double worst_J = 0.0;
  std::string best_formation;
  std::string worst_formation;
};

// One record per grid cell, alpha outer, beta middle, s* inner. Cells are
// evaluated in parallel; a failing cell becomes an error record.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg);

inline constexpr const char* kSweepHeader =
    "alpha,beta,s_star,xi,best_class,worst_class,best_J,worst_J,"
    "best_formation,worst_formation";

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rows);

struct Table1Row {
  double alpha;
  double beta;
  double s_star;
  SearchResult search;
};

// The three published OVM settings at n = 12, k = 4.
std::vector<Table1Row> run_table1(const PerformanceWeights& w, int threads);

struct ScaleRow {
  int n;
  std::string platoon;
  std::string uniform;
  double J_platoon;
  double J_uniform;
  double gap;  // J_uniform - J_platoon
};

std::vector<ScaleRow> run_scale(const std::vector<int>& n_list, int k,
                                const HdvParams& p, double s_star,
                                const PerformanceWeights& w, int threads);

void write_scale_csv(std::ostream& os, const std::vector<ScaleRow>& rows);

struct EvalReport {
  Formation formation;
  FormationClass cls;
  LinearHdvCoeffs coeffs;
  PerformanceWeights weights;
  H2Synthesis synthesis;
  double J;
};

EvalReport run_eval(const Formation& f, const LinearHdvCoeffs& c,
                    const PerformanceWeights& w);

// {"n", "formation", "class", "J", "value", "P_trace", "riccati_residual",
//  "closed_loop_abscissa", "alpha1", "alpha2", "alpha3", "gamma_s",
//  "gamma_v", "gamma_u", "weight_scaling", "K": [[...], ...]}
nlohmann::json to_json(const EvalReport& r);

// Reads the "K" matrix of an exported evaluation.
Eigen::MatrixXd gain_from_json(const nlohmann::json& j);

std::string describe(const CounterexampleReport& r);

}  // namespace mixform
