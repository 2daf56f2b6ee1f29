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
#include <numeric>
#include <random>
#include <set>

#include "gtest/gtest.h"
#include "mixform/errors.h"

namespace mixform {
namespace {

const PerformanceWeights kWeights{0.01, 0.05, 0.1};

std::vector<int> Members(const Formation& f) {
  return {f.members().begin(), f.members().end()};
}

long long Binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int Totient(int d) {
  int count = 0;
  for (int i = 1; i <= d; ++i) count += std::gcd(i, d) == 1;
  return count;
}

// Burnside: binary necklaces of length n with k ones.
long long NecklaceCount(int n, int k) {
  long long sum = 0;
  for (int d = 1; d <= std::gcd(n, k); ++d) {
    if (n % d == 0 && k % d == 0) sum += Totient(d) * Binomial(n / d, k / d);
  }
  return sum / n;
}

TEST(Canonicalize, Examples) {
  EXPECT_EQ(canonicalize(Formation(12, {2, 5, 8, 11})),
            Formation(12, {1, 4, 7, 10}));
  EXPECT_EQ(canonicalize(Formation(12, {1, 4, 7, 10})),
            Formation(12, {1, 4, 7, 10}));
  EXPECT_EQ(canonicalize(Formation(4, {3, 4})), Formation(4, {1, 2}));
  EXPECT_EQ(canonicalize(Formation(12, {1, 6, 7, 8})),
            Formation(12, {1, 2, 3, 8}));
}

TEST(Canonicalize, IdempotentAndRotationBlind) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 14);
    const int k = 1 + static_cast<int>(rng() % n);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 1);
    std::shuffle(all.begin(), all.end(), rng);
    const Formation f(n, {all.begin(), all.begin() + k});
    const Formation c = canonicalize(f);
    EXPECT_EQ(canonicalize(c), c);
    EXPECT_EQ(canonicalize(f.rotated(static_cast<int>(rng() % n))), c);
  }
}

TEST(Enumerate, PublishedCounts) {
  EXPECT_EQ(enumerate_formations(12, 4, true).size(), 43u);
  EXPECT_EQ(enumerate_formations(12, 2, true).size(), 6u);
  EXPECT_EQ(enumerate_formations(4, 2, false).size(), 6u);
}

TEST(Enumerate, MatchesBurnsideAndExpandsToAllSubsets) {
  for (int n = 1; n <= 12; ++n) {
    for (int k = 1; k <= n; ++k) {
      const auto reps = enumerate_formations(n, k, true);
      ASSERT_EQ(static_cast<long long>(reps.size()), NecklaceCount(n, k))
          << n << "," << k;
      std::set<std::vector<int>> expanded;
      for (const auto& f : reps) {
        EXPECT_EQ(canonicalize(f), f);
        for (int s = 0; s < n; ++s) expanded.insert(Members(f.rotated(s)));
      }
      EXPECT_EQ(static_cast<long long>(expanded.size()), Binomial(n, k));
      const auto all = enumerate_formations(n, k, false);
      EXPECT_EQ(static_cast<long long>(all.size()), Binomial(n, k));
    }
  }
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(Formation(12, {1, 2, 3, 4})), FormationClass::kPlatoon);
  EXPECT_EQ(classify(Formation(12, {1, 4, 7, 10})), FormationClass::kUniform);
  EXPECT_EQ(classify(Formation(12, {1, 6, 7, 8})), FormationClass::kAbnormal);
  EXPECT_EQ(classify(Formation(12, {5})), FormationClass::kSingle);
  EXPECT_EQ(classify(Formation(3, {1, 2, 3})), FormationClass::kFull);
  EXPECT_EQ(classify(Formation(10, {1, 4, 7})), FormationClass::kUniform);
  EXPECT_EQ(to_string(FormationClass::kAbnormal), "Abnormal");
}

TEST(Classify, Partition) {
  for (int n = 3; n <= 12; ++n) {
    for (int k = 2; k < n; ++k) {
      EXPECT_EQ(classify(platoon_formation(n, k)), FormationClass::kPlatoon);
      const auto even = classify(even_formation(n, k));
      EXPECT_EQ(even, k == n - 1 ? FormationClass::kPlatoon
                                 : FormationClass::kUniform)
          << n << "," << k;
      for (const auto& f : enumerate_formations(n, k, true)) {
        const auto gaps = circular_gaps(f);
        EXPECT_EQ(std::accumulate(gaps.begin(), gaps.end(), 0), n);
        const auto c = classify(f);
        EXPECT_TRUE(c == FormationClass::kPlatoon ||
                    c == FormationClass::kUniform ||
                    c == FormationClass::kAbnormal);
      }
    }
  }
}

TEST(Evaluate, RejectsEmptyFormation) {
  EXPECT_THROW(Formation(4, {}), InvalidInput);
  EXPECT_THROW(brute_force(4, 0, {0.5, 2.5, 0.5}, kWeights), InvalidInput);
}

TEST(Evaluate, NegativeAndRotationInvariant) {
  const LinearHdvCoeffs c = linearize(HdvParams{}, 20.0);
  const Formation f(10, {1, 2, 6});
  const double j = evaluate(f, c, kWeights);
  EXPECT_LT(j, 0.0);
  for (int s = 1; s < 10; ++s) {
    EXPECT_NEAR(evaluate(f.rotated(s), c, kWeights), j, 1e-8 * std::abs(j));
  }
}

TEST(Counterexample, PublishedValuesAndViolation) {
  const auto r = reproduce_counterexample();
  EXPECT_TRUE(r.values_match);
  EXPECT_FALSE(r.n_overridden);
  EXPECT_NEAR(r.report.J_S1, -0.5003, 1e-2);
  EXPECT_NEAR(r.report.J_S1e, -0.5982, 1e-2);
  EXPECT_NEAR(r.report.J_S2, -0.6910, 1e-2);
  EXPECT_NEAR(r.report.J_S2e, -0.7860, 1e-2);
  EXPECT_NEAR(r.report.gain_small, -0.098, 1e-2);
  EXPECT_NEAR(r.report.gain_large, -0.095, 1e-2);
  EXPECT_LT(r.report.gain_small, r.report.gain_large);
  EXPECT_FALSE(r.report.holds);
  ASSERT_FALSE(r.scanned.empty());
  EXPECT_EQ(r.scanned.front().first, 10);
}

TEST(Counterexample, OverrideIsHonored) {
  const auto r = reproduce_counterexample(10);
  EXPECT_EQ(r.n, 10);
  EXPECT_TRUE(r.n_overridden);
  EXPECT_THROW(reproduce_counterexample(9), InvalidInput);
}

TEST(Submodularity, DegenerateContainmentHolds) {
  const Formation s(8, {2, 5});
  const auto r = submodularity_check(s, s, 7, {0.5, 2.5, 0.5}, kWeights);
  EXPECT_EQ(r.gain_small, r.gain_large);
  EXPECT_TRUE(r.holds);
}

TEST(Submodularity, ContainmentViolationsRejected) {
  const LinearHdvCoeffs c{0.5, 2.5, 0.5};
  EXPECT_THROW(submodularity_check(Formation(8, {1, 2}), Formation(8, {2, 3}),
                                   5, c, kWeights),
               InvalidInput);
  EXPECT_THROW(submodularity_check(Formation(8, {1}), Formation(8, {1, 2}), 2,
                                   c, kWeights),
               InvalidInput);
  EXPECT_THROW(submodularity_check(Formation(8, {1}), Formation(9, {1, 2}), 3,
                                   c, kWeights),
               InvalidInput);
}

TEST(BruteForce, Table1Classes) {
  struct Row {
    double alpha, beta, s_star;
    FormationClass best;
  };
  for (const Row& row : {Row{1.4, 1.8, 10.0, FormationClass::kPlatoon},
                         Row{0.6, 0.9, 20.0, FormationClass::kUniform}}) {
    HdvParams p;
    p.alpha = row.alpha;
    p.beta = row.beta;
    const auto r = brute_force(12, 4, linearize(p, row.s_star), kWeights);
    EXPECT_EQ(r.evaluations, 43);
    EXPECT_EQ(r.ranking.size(), 43u);
    EXPECT_EQ(classify(r.best().formation), row.best);
  }
  HdvParams p;
  p.alpha = 0.9;
  p.beta = 1.3;
  const auto r = brute_force(12, 4, linearize(p, 16.0), kWeights);
  EXPECT_EQ(r.best().formation, canonicalize(Formation(12, {1, 6, 7, 8})));
}

TEST(BruteForce, RankingSortedAndThreadIndependent) {
  const LinearHdvCoeffs c = linearize(HdvParams{}, 20.0);
  const auto a = brute_force(10, 3, c, kWeights);
  SearchOptions opts;
  opts.threads = 4;
  const auto b = brute_force(10, 3, c, kWeights, opts);
  ASSERT_EQ(a.ranking.size(), b.ranking.size());
  for (std::size_t i = 0; i < a.ranking.size(); ++i) {
    EXPECT_EQ(a.ranking[i].formation, b.ranking[i].formation);
    EXPECT_EQ(a.ranking[i].J, b.ranking[i].J);
    if (i > 0) EXPECT_GE(a.ranking[i - 1].J, a.ranking[i].J);
  }
  EXPECT_GE(a.best().J, a.worst().J);
}

TEST(BruteForce, SymmetryReductionAgrees) {
  const LinearHdvCoeffs c = linearize(HdvParams{}, 18.0);
  for (int n = 2; n <= 8; ++n) {
    for (int k = 1; k <= n; ++k) {
      SearchOptions full;
      full.use_symmetry = false;
      const auto a = brute_force(n, k, c, kWeights);
      const auto b = brute_force(n, k, c, kWeights, full);
      EXPECT_NEAR(a.best().J, b.best().J, 1e-8) << n << "," << k;
      EXPECT_NEAR(a.worst().J, b.worst().J, 1e-8) << n << "," << k;
    }
  }
}

TEST(BruteForce, FailuresNameTheFormation) {
  SearchOptions opts;
  opts.solver.hurwitz_margin = 1e6;  // unattainable decay rate
  try {
    brute_force(4, 1, {0.5, 2.5, 0.5}, kWeights, opts);
    FAIL() << "expected a numerical error";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("formation 1"), std::string::npos)
        << e.what();
  }
}

TEST(Greedy, SingleVehicleMatchesBruteForce) {
  const LinearHdvCoeffs c = linearize(HdvParams{}, 20.0);
  const auto g = greedy(12, 1, c, kWeights);
  const auto b = brute_force(12, 1, c, kWeights);
  EXPECT_NEAR(g.J, b.best().J, 1e-12);
  // All singletons tie, so the smallest index wins.
  EXPECT_EQ(g.formation, Formation(12, {1}));
}

TEST(Greedy, NeverBeatsBruteForce) {
  const LinearHdvCoeffs c = CounterexampleData::coeffs;
  for (int k = 1; k <= 4; ++k) {
    const auto g = greedy(10, k, c, kWeights);
    const auto b = brute_force(10, k, c, kWeights);
    EXPECT_LE(g.J, b.best().J + 1e-12);
    EXPECT_EQ(g.formation.size(), k);
    ASSERT_EQ(g.trace.size(), static_cast<std::size_t>(k));
    EXPECT_EQ(g.trace.back().J, g.J);
    for (const auto& step : g.trace) {
      for (const auto& cand : step.candidates) {
        EXPECT_LE(cand.J, step.J + 1e-12 * std::abs(step.J));
      }
    }
  }
}

}  // namespace
}  // namespace mixform
