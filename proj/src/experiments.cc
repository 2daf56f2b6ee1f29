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

#include "mixform/experiments.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mixform/csv.h"
#include "mixform/errors.h"
#include "mixform/parallel.h"

namespace mixform {

using nlohmann::json;

GridSpec GridSpec::linspace(double lo, double hi, int count) {
  if (count < 1) throw InvalidInput("grid count must be >= 1");
  GridSpec g;
  if (count == 1) {
    g.values = {lo};
    return g;
  }
  for (int i = 0; i < count; ++i) {
    g.values.push_back(lo + (hi - lo) * i / (count - 1));
  }
  return g;
}

GridSpec GridSpec::midpoints(double lo, double hi, int count) {
  if (count < 1) throw InvalidInput("grid count must be >= 1");
  GridSpec g;
  for (int i = 0; i < count; ++i) {
    g.values.push_back(lo + (hi - lo) * (i + 0.5) / count);
  }
  return g;
}

GridSpec GridSpec::from_json(const json& j) {
  try {
    if (j.is_array()) {
      GridSpec g;
      for (const auto& v : j) g.values.push_back(v.get<double>());
      if (g.values.empty()) throw InvalidInput("grid must be nonempty");
      return g;
    }
    if (j.is_object()) {
      const double lo = j.at("min").get<double>();
      const double hi = j.at("max").get<double>();
      const int count = j.at("count").get<int>();
      const bool endpoints = j.value("endpoints", true);
      return endpoints ? linspace(lo, hi, count) : midpoints(lo, hi, count);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad grid spec: ") + e.what());
  }
  throw InvalidInput("grid spec must be an array or {min, max, count}");
}

ExperimentConfig parse_config(const json& j, ExperimentConfig cfg) {
  if (!j.is_object()) throw InvalidInput("config must be a JSON object");
  static const std::set<std::string> known{
      "n",       "k",          "gamma_s",    "gamma_v",     "gamma_u",
      "v_max",   "s_st",       "s_go",       "alpha_grid",  "beta_grid",
      "s_star_grid", "seed",   "threads",    "out",         "weight_scaling"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw InvalidInput("unknown config key '" + key + "'");
  }
  try {
    cfg.n = j.value("n", cfg.n);
    cfg.k = j.value("k", cfg.k);
    cfg.weights.gamma_s = j.value("gamma_s", cfg.weights.gamma_s);
    cfg.weights.gamma_v = j.value("gamma_v", cfg.weights.gamma_v);
    cfg.weights.gamma_u = j.value("gamma_u", cfg.weights.gamma_u);
    cfg.ovm.v_max = j.value("v_max", cfg.ovm.v_max);
    cfg.ovm.s_st = j.value("s_st", cfg.ovm.s_st);
    cfg.ovm.s_go = j.value("s_go", cfg.ovm.s_go);
    if (j.contains("alpha_grid")) cfg.alpha_grid = GridSpec::from_json(j["alpha_grid"]);
    if (j.contains("beta_grid")) cfg.beta_grid = GridSpec::from_json(j["beta_grid"]);
    if (j.contains("s_star_grid")) cfg.s_star_grid = GridSpec::from_json(j["s_star_grid"]);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.out = j.value("out", cfg.out);
    if (j.contains("weight_scaling")) {
      const auto s = j["weight_scaling"].get<std::string>();
      if (s == "linear") {
        cfg.weights.scaling = CostScaling::kLinear;
      } else if (s == "squared") {
        cfg.weights.scaling = CostScaling::kSquared;
      } else {
        throw InvalidInput("weight_scaling must be 'linear' or 'squared'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad config value: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, std::move(base));
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 1 || cfg.k < 1 || cfg.k > cfg.n) {
    throw InvalidInput("config needs 1 <= k <= n");
  }
  validate(cfg.weights);
  if (!(cfg.ovm.v_max > 0.0) || !(cfg.ovm.s_st < cfg.ovm.s_go)) {
    throw InvalidInput("config needs v_max > 0 and s_st < s_go");
  }
  for (const auto* g : {&cfg.alpha_grid, &cfg.beta_grid, &cfg.s_star_grid}) {
    if (g->values.empty()) throw InvalidInput("grids must be nonempty");
  }
  for (double a : cfg.alpha_grid.values) {
    if (!(a > 0.0)) throw InvalidInput("alpha grid values must be positive");
  }
  for (double b : cfg.beta_grid.values) {
    if (!(b > 0.0)) throw InvalidInput("beta grid values must be positive");
  }
  if (cfg.threads < 1) throw InvalidInput("threads must be >= 1");
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  struct Cell {
    double alpha, beta, s_star;
  };
  std::vector<Cell> cells;
  for (double a : cfg.alpha_grid.values) {
    for (double b : cfg.beta_grid.values) {
      for (double s : cfg.s_star_grid.values) cells.push_back({a, b, s});
    }
  }
  std::vector<SweepRecord> rows(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    const auto& cell = cells[i];
    HdvParams p = cfg.ovm;
    p.alpha = cell.alpha;
    p.beta = cell.beta;
    SweepRecord& rec = rows[i];
    rec.alpha = cell.alpha;
    rec.beta = cell.beta;
    rec.s_star = cell.s_star;
    rec.xi = string_stability_index(p, cell.s_star);
    try {
      const auto coeffs = linearize(p, cell.s_star);
      const auto result = brute_force(cfg.n, cfg.k, coeffs, cfg.weights);
      rec.best_class = classify(result.best().formation);
      rec.worst_class = classify(result.worst().formation);
      rec.best_J = result.best().J;
      rec.worst_J = result.worst().J;
      rec.best_formation = result.best().formation.to_string();
      rec.worst_formation = result.worst().formation.to_string();
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.alpha) << ',' << format_number(r.beta) << ','
       << format_number(r.s_star) << ',' << format_number(r.xi) << ',';
    if (r.error) {
      os << "error,error,,,,\n";
      continue;
    }
    os << to_string(r.best_class) << ',' << to_string(r.worst_class) << ','
       << format_number(r.best_J) << ',' << format_number(r.worst_J) << ','
       << r.best_formation << ',' << r.worst_formation << '\n';
  }
}

std::vector<Table1Row> run_table1(const PerformanceWeights& w, int threads) {
  const double settings[3][3] = {{1.4, 1.8, 10.0}, {0.6, 0.9, 20.0},
                                 {0.9, 1.3, 16.0}};
  std::vector<Table1Row> rows;
  for (const auto& s : settings) {
    HdvParams p;
    p.alpha = s[0];
    p.beta = s[1];
    SearchOptions opts;
    opts.threads = threads;
    rows.push_back({s[0], s[1], s[2],
                    brute_force(12, 4, linearize(p, s[2]), w, opts)});
  }
  return rows;
}

std::vector<ScaleRow> run_scale(const std::vector<int>& n_list, int k,
                                const HdvParams& p, double s_star,
                                const PerformanceWeights& w, int threads) {
  const auto coeffs = linearize(p, s_star);
  for (int n : n_list) {
    if (n < k) throw InvalidInput("scale study needs n >= k for every n");
  }
  std::vector<ScaleRow> rows(n_list.size());
  parallel_for(n_list.size(), threads, [&](std::size_t i) {
    const int n = n_list[i];
    const auto platoon = platoon_formation(n, k);
    const auto uniform = even_formation(n, k);
    const double jp = evaluate(platoon, coeffs, w);
    const double ju = platoon == uniform ? jp : evaluate(uniform, coeffs, w);
    rows[i] = {n, platoon.to_string(), uniform.to_string(), jp, ju, ju - jp};
  });
  return rows;
}

void write_scale_csv(std::ostream& os, const std::vector<ScaleRow>& rows) {
  os << "n,J_platoon,J_uniform,gap,platoon_formation,uniform_formation\n";
  for (const auto& r : rows) {
    os << r.n << ',' << format_number(r.J_platoon) << ','
       << format_number(r.J_uniform) << ',' << format_number(r.gap) << ','
       << r.platoon << ',' << r.uniform << '\n';
  }
}

EvalReport run_eval(const Formation& f, const LinearHdvCoeffs& c,
                    const PerformanceWeights& w) {
  validate(c);
  const auto rr = reduce(build_state_space(c, f), w);
  auto syn = synthesize(rr);
  const double j = -syn.value;
  return {f, classify(f), c, w, std::move(syn), j};
}

json to_json(const EvalReport& r) {
  json k = json::array();
  for (Eigen::Index i = 0; i < r.synthesis.K.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.synthesis.K.cols(); ++j) {
      row.push_back(r.synthesis.K(i, j));
    }
    k.push_back(std::move(row));
  }
  return {
      {"n", r.formation.n()},
      {"formation", r.formation.to_string()},
      {"class", std::string(to_string(r.cls))},
      {"J", r.J},
      {"value", r.synthesis.value},
      {"P_trace", r.synthesis.P.trace()},
      {"riccati_residual", r.synthesis.riccati_residual},
      {"closed_loop_abscissa", r.synthesis.closed_loop_abscissa},
      {"alpha1", r.coeffs.alpha1},
      {"alpha2", r.coeffs.alpha2},
      {"alpha3", r.coeffs.alpha3},
      {"gamma_s", r.weights.gamma_s},
      {"gamma_v", r.weights.gamma_v},
      {"gamma_u", r.weights.gamma_u},
      {"weight_scaling",
       r.weights.scaling == CostScaling::kLinear ? "linear" : "squared"},
      {"K", std::move(k)},
  };
}

Eigen::MatrixXd gain_from_json(const json& j) {
  try {
    const auto& rows = j.at("K");
    if (!rows.is_array()) throw InvalidInput("gain 'K' must be an array");
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd K(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != c) {
        throw InvalidInput("gain 'K' rows have different lengths");
      }
      for (Eigen::Index q = 0; q < c; ++q) K(i, q) = rows[i][q].get<double>();
    }
    return K;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("bad gain file: ") + e.what());
  }
}

std::string describe(const CounterexampleReport& r) {
  using D = CounterexampleData;
  const auto& s = r.report;
  std::ostringstream os;
  os << "ring size n = " << r.n
     << (r.n_overridden ? " (override)" : " (selected by scan)") << '\n';
  os << "scanned:";
  for (const auto& [n, dev] : r.scanned) {
    os << " n=" << n << " max|dJ|=" << format_number(dev);
  }
  os << '\n';
  const std::string s1e = s.S1.with(s.e).to_string();
  const std::string s2e = s.S2.with(s.e).to_string();
  os << "J(" << s.S1.to_string() << ") = " << format_number(s.J_S1)
     << "  target " << D::targets[0] << '\n';
  os << "J(" << s1e << ") = " << format_number(s.J_S1e) << "  target "
     << D::targets[1] << '\n';
  os << "J(" << s.S2.to_string() << ") = " << format_number(s.J_S2)
     << "  target " << D::targets[2] << '\n';
  os << "J(" << s2e << ") = " << format_number(s.J_S2e) << "  target "
     << D::targets[3] << '\n';
  os << "gain on small set = " << format_number(s.gain_small)
     << ", gain on large set = " << format_number(s.gain_large) << '\n';
  os << "diminishing returns " << (s.holds ? "holds" : "VIOLATED")
     << "; values " << (r.values_match ? "match" : "do not match")
     << " targets within " << D::tolerance << " (max |dJ| = "
     << format_number(r.max_deviation) << ")\n";
  return os.str();
}

}  // namespace mixform
