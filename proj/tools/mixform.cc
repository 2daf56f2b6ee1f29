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

// Command-line front end: table1, sweep, scale, counterexample, eval,
// simulate. Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixform/csv.h"
#include "mixform/errors.h"
#include "mixform/experiments.h"
#include "mixform/formation_search.h"
#include "mixform/simulator.h"

namespace {

using namespace mixform;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalFlags {
  std::string config;
  std::string out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma_s, gamma_v, gamma_u;
  bool squared_weights = false;
};

struct ModelFlags {
  std::optional<int> n;
  std::optional<int> k;
  double alpha = 0.6;
  double beta = 0.9;
  double s_star = 20.0;
  std::optional<double> alpha1, alpha2, alpha3;
};

ExperimentConfig resolve(const GlobalFlags& g, const ModelFlags* m) {
  ExperimentConfig cfg;
  if (!g.config.empty()) cfg = load_config(g.config);
  if (g.threads) cfg.threads = *g.threads;
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.out = g.out;
  if (g.gamma_s) cfg.weights.gamma_s = *g.gamma_s;
  if (g.gamma_v) cfg.weights.gamma_v = *g.gamma_v;
  if (g.gamma_u) cfg.weights.gamma_u = *g.gamma_u;
  if (g.squared_weights) cfg.weights.scaling = CostScaling::kSquared;
  if (m) {
    if (m->n) cfg.n = *m->n;
    if (m->k) cfg.k = *m->k;
  }
  validate(cfg);
  return cfg;
}

LinearHdvCoeffs coeffs_from(const ModelFlags& m, const ExperimentConfig& cfg) {
  if (m.alpha1 || m.alpha2 || m.alpha3) {
    if (!(m.alpha1 && m.alpha2 && m.alpha3)) {
      throw InvalidInput("--alpha1, --alpha2 and --alpha3 go together");
    }
    LinearHdvCoeffs c{*m.alpha1, *m.alpha2, *m.alpha3};
    validate(c);
    return c;
  }
  HdvParams p = cfg.ovm;
  p.alpha = m.alpha;
  p.beta = m.beta;
  return linearize(p, m.s_star);
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw InvalidInput("cannot open output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void add_model_flags(CLI::App* cmd, ModelFlags& m, bool with_k) {
  cmd->add_option("--n", m.n, "Number of vehicles on the ring");
  if (with_k) cmd->add_option("--k", m.k, "Number of autonomous vehicles");
  cmd->add_option("--alpha", m.alpha, "OVM sensitivity alpha (1/s)");
  cmd->add_option("--beta", m.beta, "OVM sensitivity beta (1/s)");
  cmd->add_option("--s-star", m.s_star, "Equilibrium spacing (m)");
  cmd->add_option("--alpha1", m.alpha1, "Linearized spacing gain");
  cmd->add_option("--alpha2", m.alpha2, "Linearized own-velocity gain");
  cmd->add_option("--alpha3", m.alpha3, "Linearized predecessor-velocity gain");
}

int cmd_table1(const GlobalFlags& g) {
  const auto cfg = resolve(g, nullptr);
  const auto rows = run_table1(cfg.weights, cfg.threads);
  std::cout << "n = 12, k = 4, gamma = (" << cfg.weights.gamma_s << ", "
            << cfg.weights.gamma_v << ", " << cfg.weights.gamma_u << ")\n";
  for (const auto& r : rows) {
    const auto& best = r.search.best();
    const auto& worst = r.search.worst();
    std::cout << "alpha=" << r.alpha << " beta=" << r.beta
              << " s*=" << r.s_star << "  best " << best.formation.to_string()
              << " [" << to_string(classify(best.formation))
              << "] J=" << format_number(best.J) << "  worst "
              << worst.formation.to_string() << " ["
              << to_string(classify(worst.formation))
              << "] J=" << format_number(worst.J) << '\n';
  }
  if (!cfg.out.empty()) {
    Output out(cfg.out);
    out.stream() << "alpha,beta,s_star,best_formation,best_class,best_J,"
                    "worst_formation,worst_class,worst_J\n";
    for (const auto& r : rows) {
      const auto& best = r.search.best();
      const auto& worst = r.search.worst();
      out.stream() << format_number(r.alpha) << ',' << format_number(r.beta)
                   << ',' << format_number(r.s_star) << ','
                   << best.formation.to_string() << ','
                   << to_string(classify(best.formation)) << ','
                   << format_number(best.J) << ','
                   << worst.formation.to_string() << ','
                   << to_string(classify(worst.formation)) << ','
                   << format_number(worst.J) << '\n';
    }
  }
  return 0;
}

int cmd_sweep(const GlobalFlags& g, const ModelFlags& m) {
  const auto cfg = resolve(g, &m);
  const auto rows = run_sweep(cfg);
  Output out(cfg.out);
  write_sweep_csv(out.stream(), rows);
  int failed = 0;
  for (const auto& r : rows) {
    if (r.error) {
      ++failed;
      std::cerr << "cell alpha=" << r.alpha << " beta=" << r.beta
                << " s*=" << r.s_star << ": " << *r.error << '\n';
    }
  }
  if (failed) std::cerr << failed << " of " << rows.size() << " cells failed\n";
  return 0;
}

int cmd_scale(const GlobalFlags& g, const ModelFlags& m,
              const std::vector<int>& n_list) {
  const auto cfg = resolve(g, &m);
  HdvParams p = cfg.ovm;
  p.alpha = m.alpha;
  p.beta = m.beta;
  const auto rows =
      run_scale(n_list, m.k.value_or(cfg.k), p, m.s_star, cfg.weights, cfg.threads);
  Output out(cfg.out);
  write_scale_csv(out.stream(), rows);
  return 0;
}

int cmd_counterexample(const GlobalFlags& g, std::optional<int> n) {
  const auto cfg = resolve(g, nullptr);
  const auto report = reproduce_counterexample(n, cfg.weights.scaling);
  Output out(cfg.out);
  out.stream() << describe(report);
  return 0;
}

int cmd_eval(const GlobalFlags& g, const ModelFlags& m,
             const std::string& formation) {
  const auto cfg = resolve(g, &m);
  const auto f = Formation::parse(m.n.value_or(cfg.n), formation);
  const auto report = run_eval(f, coeffs_from(m, cfg), cfg.weights);
  Output out(cfg.out);
  out.stream() << to_json(report).dump(2) << '\n';
  return 0;
}

struct SimFlags {
  std::string formation = "none";
  std::string gain_file;
  double dt = 0.01;
  double horizon = 100.0;
  std::string kind = "brake-pulse";
  int target = 1;
  bool all_vehicles = false;
  double magnitude = 1.0;
  double duration = 1.0;
  double bandwidth = 1.0;
  bool linearized = false;
  int stride = 10;
};

DisturbanceKind parse_kind(const std::string& s) {
  if (s == "none") return DisturbanceKind::kNone;
  if (s == "impulse") return DisturbanceKind::kImpulse;
  if (s == "brake-pulse") return DisturbanceKind::kBrakePulse;
  if (s == "band-limited-noise") return DisturbanceKind::kBandLimitedNoise;
  throw InvalidInput("unknown disturbance kind '" + s + "'");
}

int cmd_simulate(const GlobalFlags& g, const ModelFlags& m, const SimFlags& s) {
  const auto cfg = resolve(g, &m);
  SimConfig sim;
  sim.n = m.n.value_or(cfg.n);
  sim.params = cfg.ovm;
  sim.params.alpha = m.alpha;
  sim.params.beta = m.beta;
  sim.s_star = m.s_star;
  sim.weights = cfg.weights;
  sim.dt = s.dt;
  sim.horizon = s.horizon;
  sim.linearized = s.linearized;
  sim.record_stride = s.stride;
  sim.disturbance.kind = parse_kind(s.kind);
  sim.disturbance.target =
      s.all_vehicles ? std::nullopt : std::optional<int>(s.target);
  sim.disturbance.magnitude = s.magnitude;
  sim.disturbance.duration = s.duration;
  sim.disturbance.bandwidth = s.bandwidth;
  sim.disturbance.seed = cfg.seed;
  if (s.formation != "none") {
    sim.formation = Formation::parse(sim.n, s.formation);
    if (!s.gain_file.empty()) {
      std::ifstream in(s.gain_file);
      if (!in) throw InvalidInput("cannot open gain file '" + s.gain_file + "'");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput(std::string("gain file is not valid JSON: ") + e.what());
      }
      sim.K = gain_from_json(j);
    } else {
      const auto coeffs = linearize(sim.params, sim.s_star);
      sim.K = synthesize(reduce(build_state_space(coeffs, *sim.formation),
                                sim.weights))
                  .K;
    }
  } else {
    sim.K = Eigen::MatrixXd(0, 2 * sim.n - 1);
  }
  const auto traj = simulate(sim);
  Output out(cfg.out);
  write_trajectory_csv(out.stream(), traj);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal formation of autonomous vehicles on a ring road"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--config", g.config, "JSON experiment config");
  app.add_option("--out", g.out, "Output path (default stdout)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for noise disturbances");
  app.add_option("--gamma-s", g.gamma_s, "Spacing-error weight");
  app.add_option("--gamma-v", g.gamma_v, "Velocity-error weight");
  app.add_option("--gamma-u", g.gamma_u, "Control-input weight");
  app.add_flag("--squared-weights", g.squared_weights,
               "Use gamma^2 as cost weights instead of gamma");

  auto* table1 = app.add_subcommand("table1", "Best formations for the three reference OVM settings");

  ModelFlags sweep_m;
  auto* sweep = app.add_subcommand("sweep", "Best/worst formation over an (alpha, beta, s*) grid");
  sweep->add_option("--n", sweep_m.n, "Number of vehicles");
  sweep->add_option("--k", sweep_m.k, "Number of autonomous vehicles");

  ModelFlags scale_m;
  std::vector<int> n_list{8, 12, 16, 20, 24};
  auto* scale = app.add_subcommand("scale", "Platoon vs uniform formation across ring sizes");
  add_model_flags(scale, scale_m, true);
  scale->add_option("--n-list", n_list, "Ring sizes")->delimiter(',');

  std::optional<int> ce_n;
  auto* counter = app.add_subcommand("counterexample", "Reproduce the non-submodularity instance");
  counter->add_option("--n", ce_n, "Ring size override");

  ModelFlags eval_m;
  std::string eval_formation;
  auto* eval = app.add_subcommand("eval", "Synthesize and export the gain for one formation");
  add_model_flags(eval, eval_m, false);
  eval->add_option("--formation", eval_formation, "e.g. 1-4-7-10")->required();

  ModelFlags sim_m;
  SimFlags sim_f;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate the ring road and export the trajectory");
  add_model_flags(simulate_cmd, sim_m, false);
  simulate_cmd->add_option("--formation", sim_f.formation, "e.g. 1-4-7-10, or none");
  simulate_cmd->add_option("--gain", sim_f.gain_file, "Gain JSON exported by eval");
  simulate_cmd->add_option("--dt", sim_f.dt, "Step size (s)");
  simulate_cmd->add_option("--horizon", sim_f.horizon, "Duration (s)");
  simulate_cmd->add_option("--disturbance", sim_f.kind,
                           "none | impulse | brake-pulse | band-limited-noise");
  simulate_cmd->add_option("--target", sim_f.target, "Disturbed vehicle");
  simulate_cmd->add_flag("--all-vehicles", sim_f.all_vehicles, "Disturb every vehicle");
  simulate_cmd->add_option("--magnitude", sim_f.magnitude, "Disturbance amplitude (m/s^2)");
  simulate_cmd->add_option("--duration", sim_f.duration, "Disturbance duration (s)");
  simulate_cmd->add_option("--bandwidth", sim_f.bandwidth, "Noise bandwidth (Hz)");
  simulate_cmd->add_flag("--linearized", sim_f.linearized, "Integrate the linearized model");
  simulate_cmd->add_option("--stride", sim_f.stride, "Record every n-th step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*table1) return cmd_table1(g);
    if (*sweep) return cmd_sweep(g, sweep_m);
    if (*scale) return cmd_scale(g, scale_m, n_list);
    if (*counter) return cmd_counterexample(g, ce_n);
    if (*eval) return cmd_eval(g, eval_m, eval_formation);
    if (*simulate_cmd) return cmd_simulate(g, sim_m, sim_f);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
