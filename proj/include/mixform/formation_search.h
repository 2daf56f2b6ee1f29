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

// Formation value J(S) = -min_K ||G_S||_2^2 and searches over formations.

#include <array>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "mixform/h2.h"
#include "mixform/traffic_model.h"

namespace mixform {

enum class FormationClass { kPlatoon, kUniform, kAbnormal, kSingle, kFull };

std::string_view to_string(FormationClass c);

// Circular gaps between consecutive members; they sum to n.
std::vector<int> circular_gaps(const Formation& f);

// Single for k = 1, Full for k = n. Otherwise Platoon when k-1 gaps are 1,
// Uniform when max gap - min gap <= 1, Abnormal for everything else. The
// Abnormal label is a residual category, not a structural property.
FormationClass classify(const Formation& f);

// Lexicographically smallest member list over all n rotations.
Formation canonicalize(const Formation& f);

// With symmetry: one canonical representative per rotation class (binary
// necklaces with k ones), in lexicographic order. Without: all C(n, k)
// subsets in lexicographic order.
std::vector<Formation> enumerate_formations(int n, int k, bool use_symmetry);

// Most evenly spaced formation: members 1 + floor(r n / k).
Formation even_formation(int n, int k);
// {1, ..., k}
Formation platoon_formation(int n, int k);

double evaluate(const Formation& f, const LinearHdvCoeffs& c,
                const PerformanceWeights& w, const SolverOptions& opts = {});

struct RankedFormation {
  Formation formation;
  double J;
};

struct SearchOptions {
  bool use_symmetry = true;
  int threads = 1;
  SolverOptions solver;
};

struct SearchResult {
  // Sorted by J descending; ties keep enumeration order.
  std::vector<RankedFormation> ranking;
  int evaluations = 0;

  const RankedFormation& best() const { return ranking.front(); }
  const RankedFormation& worst() const { return ranking.back(); }
};

// Evaluates every formation of size k (one per rotation class by default).
// A failing evaluation aborts with a NumericalError naming the formation.
SearchResult brute_force(int n, int k, const LinearHdvCoeffs& c,
                         const PerformanceWeights& w,
                         const SearchOptions& opts = {});

struct GreedyCandidate {
  int index;
  double J;
  double marginal;  // J(S + index) - J(S); equals J for the first step
};

struct GreedyStep {
  int added;
  double J;
  std::vector<GreedyCandidate> candidates;
};

struct GreedyResult {
  Formation formation;
  double J;
  std::vector<GreedyStep> trace;
};

// Grows S from the best singleton by the largest marginal gain. Candidates
// within 1e-12 relative of the leader count as ties and the smallest index
// wins. No approximation guarantee: J is not submodular.
GreedyResult greedy(int n, int k, const LinearHdvCoeffs& c,
                    const PerformanceWeights& w, const SolverOptions& opts = {});

struct SubmodularityReport {
  Formation S1;
  Formation S2;
  int e;
  double J_S1;
  double J_S1e;
  double J_S2;
  double J_S2e;
  double gain_small;  // J(S1 + e) - J(S1)
  double gain_large;  // J(S2 + e) - J(S2)
  bool holds;         // gain_small >= gain_large
};

// Requires S1 subset of S2 and e not in S2; throws InvalidInput otherwise.
SubmodularityReport submodularity_check(const Formation& S1,
                                        const Formation& S2, int e,
                                        const LinearHdvCoeffs& c,
                                        const PerformanceWeights& w,
                                        const SolverOptions& opts = {});

// Published non-submodularity instance: alpha = (0.5, 2.5, 0.5),
// gamma = (0.01, 0.05, 0.1), S1 = {4,9,10}, S2 = {2,3,4,9,10}, e = 1.
struct CounterexampleData {
  static constexpr LinearHdvCoeffs coeffs{0.5, 2.5, 0.5};
  static constexpr std::array<int, 3> s1{4, 9, 10};
  static constexpr std::array<int, 5> s2{2, 3, 4, 9, 10};
  static constexpr int e = 1;
  // J(S1), J(S1 + e), J(S2), J(S2 + e)
  static constexpr std::array<double, 4> targets{-0.5003, -0.5982, -0.6910,
                                                 -0.7860};
  static constexpr double tolerance = 1e-2;
  static constexpr int default_n = 10;
  static constexpr std::array<int, 3> scan_n{10, 11, 12};
  static PerformanceWeights weights() { return {0.01, 0.05, 0.1}; }
};

struct CounterexampleReport {
  int n;
  SubmodularityReport report;
  double max_deviation;  // max |J - target| over the four values at n
  bool values_match;     // max_deviation <= tolerance
  bool n_overridden;
  // (n, max_deviation) for every ring size tried, in order.
  std::vector<std::pair<int, double>> scanned;
};

// Without an override, tries the default ring size and, if the four values
// miss the targets, scans the candidate sizes and keeps the closest. With an
// override, uses it as given; n smaller than the largest index is rejected
// with InvalidInput.
CounterexampleReport reproduce_counterexample(
    std::optional<int> n_override = std::nullopt,
    CostScaling scaling = CostScaling::kLinear,
    const SolverOptions& opts = {});

}  // namespace mixform
