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

#include "mixform/formation_search.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mixform/errors.h"
#include "mixform/parallel.h"

namespace mixform {

std::string_view to_string(FormationClass c) {
  switch (c) {
    case FormationClass::kPlatoon:
      return "Platoon";
    case FormationClass::kUniform:
      return "Uniform";
    case FormationClass::kAbnormal:
      return "Abnormal";
    case FormationClass::kSingle:
      return "Single";
    case FormationClass::kFull:
      return "Full";
  }
  return "?";
}

std::vector<int> circular_gaps(const Formation& f) {
  const auto m = f.members();
  const int k = f.size();
  std::vector<int> gaps(k);
  for (int r = 0; r < k; ++r) {
    const int next = r + 1 < k ? m[r + 1] : m[0] + f.n();
    gaps[r] = next - m[r];
  }
  return gaps;
}

FormationClass classify(const Formation& f) {
  const int k = f.size();
  if (k == 1) return FormationClass::kSingle;
  if (k == f.n()) return FormationClass::kFull;
  const auto gaps = circular_gaps(f);
  if (std::count(gaps.begin(), gaps.end(), 1) == k - 1) {
    return FormationClass::kPlatoon;
  }
  const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
  if (*hi - *lo <= 1) return FormationClass::kUniform;
  return FormationClass::kAbnormal;
}

Formation canonicalize(const Formation& f) {
  Formation best = f;
  for (int shift = 1; shift < f.n(); ++shift) {
    Formation r = f.rotated(shift);
    if (std::lexicographical_compare(r.members().begin(), r.members().end(),
                                     best.members().begin(),
                                     best.members().end())) {
      best = std::move(r);
    }
  }
  return best;
}

std::vector<Formation> enumerate_formations(int n, int k, bool use_symmetry) {
  if (n < 1 || k < 1 || k > n) {
    throw InvalidInput("enumerate_formations requires 1 <= k <= n");
  }
  std::vector<Formation> out;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 1);
  while (true) {
    Formation f(n, idx);
    if (!use_symmetry || canonicalize(f) == f) out.push_back(std::move(f));
    // Advance to the next k-subset in lexicographic order.
    int r = k - 1;
    while (r >= 0 && idx[r] == n - k + r + 1) --r;
    if (r < 0) break;
    ++idx[r];
    for (int q = r + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
  }
  return out;
}

Formation even_formation(int n, int k) {
  std::vector<int> m(k);
  for (int r = 0; r < k; ++r) m[r] = 1 + static_cast<int>((1LL * r * n) / k);
  return Formation(n, std::move(m));
}

Formation platoon_formation(int n, int k) {
  std::vector<int> m(k);
  std::iota(m.begin(), m.end(), 1);
  return Formation(n, std::move(m));
}

double evaluate(const Formation& f, const LinearHdvCoeffs& c,
                const PerformanceWeights& w, const SolverOptions& opts) {
  validate(c);
  const auto rr = reduce(build_state_space(c, f), w);
  return -synthesize(rr, opts).value;
}

SearchResult brute_force(int n, int k, const LinearHdvCoeffs& c,
                         const PerformanceWeights& w,
                         const SearchOptions& opts) {
  if (k < 1) throw InvalidInput("brute_force requires k >= 1");
  validate(c);
  validate(w);
  auto formations = enumerate_formations(n, k, opts.use_symmetry);
  std::vector<double> values(formations.size());
  parallel_for(formations.size(), opts.threads, [&](std::size_t i) {
    try {
      values[i] = evaluate(formations[i], c, w, opts.solver);
    } catch (const NumericalError& e) {
      throw NumericalError("formation " + formations[i].to_string() + ": " +
                           e.what());
    }
  });

  SearchResult out;
  out.evaluations = static_cast<int>(formations.size());
  out.ranking.reserve(formations.size());
  for (std::size_t i = 0; i < formations.size(); ++i) {
    out.ranking.push_back({std::move(formations[i]), values[i]});
  }
  std::stable_sort(out.ranking.begin(), out.ranking.end(),
                   [](const RankedFormation& a, const RankedFormation& b) {
                     return a.J > b.J;
                   });
  return out;
}

namespace {

bool beats(double candidate, double leader) {
  return candidate > leader + 1e-12 * std::abs(leader);
}

}  // namespace

GreedyResult greedy(int n, int k, const LinearHdvCoeffs& c,
                    const PerformanceWeights& w, const SolverOptions& opts) {
  if (k < 1 || k > n) throw InvalidInput("greedy requires 1 <= k <= n");
  std::vector<int> chosen;
  std::vector<GreedyStep> trace;
  double current = 0.0;
  for (int step = 0; step < k; ++step) {
    GreedyStep s{0, 0.0, {}};
    for (int idx = 1; idx <= n; ++idx) {
      if (std::find(chosen.begin(), chosen.end(), idx) != chosen.end()) {
        continue;
      }
      auto members = chosen;
      members.push_back(idx);
      const double j = evaluate(Formation(n, members), c, w, opts);
      const double marginal = step == 0 ? j : j - current;
      s.candidates.push_back({idx, j, marginal});
      if (s.added == 0 || beats(j, s.J)) {
        s.added = idx;
        s.J = j;
      }
    }
    chosen.push_back(s.added);
    current = s.J;
    trace.push_back(std::move(s));
  }
  return {Formation(n, chosen), current, std::move(trace)};
}

SubmodularityReport submodularity_check(const Formation& S1,
                                        const Formation& S2, int e,
                                        const LinearHdvCoeffs& c,
                                        const PerformanceWeights& w,
                                        const SolverOptions& opts) {
  if (!S1.is_subset_of(S2)) {
    throw InvalidInput("submodularity_check requires S1 subset of S2 (" +
                       S1.to_string() + " vs " + S2.to_string() + ")");
  }
  if (e < 1 || e > S2.n() || S2.contains(e)) {
    throw InvalidInput("submodularity_check requires e outside S2");
  }
  const double j1 = evaluate(S1, c, w, opts);
  const double j1e = evaluate(S1.with(e), c, w, opts);
  const double j2 = evaluate(S2, c, w, opts);
  const double j2e = evaluate(S2.with(e), c, w, opts);
  const double small = j1e - j1;
  const double large = j2e - j2;
  return {S1, S2, e, j1, j1e, j2, j2e, small, large, small >= large};
}

namespace {

CounterexampleReport counterexample_at(int n, CostScaling scaling,
                                       const SolverOptions& opts) {
  using D = CounterexampleData;
  auto w = D::weights();
  w.scaling = scaling;
  const Formation s1(n, {D::s1.begin(), D::s1.end()});
  const Formation s2(n, {D::s2.begin(), D::s2.end()});
  auto report = submodularity_check(s1, s2, D::e, D::coeffs, w, opts);
  const std::array<double, 4> got{report.J_S1, report.J_S1e, report.J_S2,
                                  report.J_S2e};
  double dev = 0.0;
  for (int i = 0; i < 4; ++i) {
    dev = std::max(dev, std::abs(got[i] - D::targets[i]));
  }
  return {n, std::move(report), dev, dev <= D::tolerance, false, {{n, dev}}};
}

}  // namespace

CounterexampleReport reproduce_counterexample(std::optional<int> n_override,
                                              CostScaling scaling,
                                              const SolverOptions& opts) {
  using D = CounterexampleData;
  if (n_override) {
    if (*n_override < D::s2.back()) {
      throw InvalidInput("counterexample ring size " +
                         std::to_string(*n_override) +
                         " is smaller than the largest index " +
                         std::to_string(D::s2.back()));
    }
    auto out = counterexample_at(*n_override, scaling, opts);
    out.n_overridden = true;
    return out;
  }
  auto best = counterexample_at(D::default_n, scaling, opts);
  if (best.values_match) return best;
  std::vector<std::pair<int, double>> scanned = best.scanned;
  for (int n : D::scan_n) {
    if (n == D::default_n) continue;
    auto candidate = counterexample_at(n, scaling, opts);
    scanned.emplace_back(n, candidate.max_deviation);
    if (candidate.max_deviation < best.max_deviation) {
      best = std::move(candidate);
    }
  }
  best.scanned = std::move(scanned);
  return best;
}

}  // namespace mixform
