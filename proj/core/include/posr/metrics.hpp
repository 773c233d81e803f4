// Copyright 2026 The POSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POSR_METRICS_H_
#define POSR_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "posr/game.hpp"
#include "posr/mdp.hpp"

namespace posr {

inline constexpr uint64_t kDefaultEnumerationCap = uint64_t{1} << 20;

// Exact per-player swap regret of a policy sequence against the induced MDP
// sequence: max over all swap functions phi of
// sum_t V_t(pi_t) - V_t(phi(pi_t)), by brute force with lexicographic
// tie-breaking on phi's table.
struct SwapRegretResult {
  double value = 0.0;
  SwapFunction phi;
  bool lower_bound = false;  // true when produced by the restricted search
};

SwapRegretResult SwapRegretExact(std::span<const InducedMdp> mdps,
                                 std::span<const PolicyTable> policies,
                                 uint64_t cap = kDefaultEnumerationCap);

// Restricted search (identity, constant swaps, greedy 1-cell perturbations);
// a labeled lower bound for instances past the enumeration cap.
SwapRegretResult SwapRegretLowerBound(std::span<const InducedMdp> mdps,
                                      std::span<const PolicyTable> policies);

uint64_t SwapFunctionCount(const InducedMdp& mdp);
uint64_t DeterministicPolicyCount(const InducedMdp& mdp);

struct ExternalRegretResult {
  double value = 0.0;
  std::vector<int> argmax_policy;  // deterministic comparator, -1 at terminal
};

ExternalRegretResult ExternalRegretExact(std::span<const InducedMdp> mdps,
                                         std::span<const PolicyTable> policies,
                                         uint64_t cap = kDefaultEnumerationCap);

// Convenience: induced-MDP sequence for one player along a profile sequence.
std::vector<InducedMdp> EpisodeMdps(const MarkovGame& game,
                                    std::span<const std::vector<PolicyTable>> profiles,
                                    int player);

// Best fixed-deviation gain of the uniform mixture over the profile
// sequence; by definition equals swap regret / T.
double MixtureCeGain(std::span<const InducedMdp> mdps,
                     std::span<const PolicyTable> policies,
                     uint64_t cap = kDefaultEnumerationCap);

// |direct swap value of phi - occupancy-weighted decomposition|, the
// value-difference identity applied to the maximizing swap.
double DecompositionResidual(std::span<const InducedMdp> mdps,
                             std::span<const PolicyTable> policies,
                             const SwapFunction& phi);

// Single-state (bandit) swap regret via the per-action decomposition:
// max_psi sum_t <q_t, x_t - psi(x_t)> = sum_a max_b sum_t x_t(a)(q_t(a) - q_t(b)).
double BanditSwapRegret(std::span<const std::vector<double>> losses,
                        std::span<const std::vector<double>> strategies);

// sum_t w_t <x_t - comparator, loss_t>.
double WeightedRegret(std::span<const std::vector<double>> iterates,
                      std::span<const std::vector<double>> losses,
                      std::span<const double> weights,
                      std::span<const double> comparator);

// ---- Theorem right-hand sides ------------------------------------------

double Thm31Rhs(int H, int S, int A, int m, double gamma, double epsilon, int T);
double Thm34Rhs(int H, int S, int Ai, int Amax, int m, double gamma, double eta,
                double epsilon, int T, double path1_all, double path2_all);
double Thm35Rhs(int H, int S, int A, int m, double gamma, double epsilon, int T);
double Thm37Rhs(int H, int Ai, int m, double gamma, double eta, double epsilon,
                int T, double path2_all, double state_l1_path2);
double ThmF1Rhs(int H, int A, int m, double gamma, double eta, double epsilon,
                int T, double path2_all);
double CorF3Rhs(int H, int S, int A, int m, int T);

double DefaultEta(int H, int m, int S, int A);

struct ResidualRow {
  std::string name;
  int player = -1;  // -1: not player specific
  double lhs = 0.0;
  double rhs = 0.0;
  bool applicable = true;
  std::string note;
  double residual() const { return rhs - lhs; }
};

struct BoundCheckInput {
  int H = 0, S = 0, A = 0, m = 0, T = 0;
  double eta = 0.0, gamma = 0.0, epsilon = 0.0;
  std::vector<int> action_counts;
  std::vector<double> swap_regrets;  // per player, exact
  std::vector<double> path1, path2;  // per player, summed over t = 1..T
  // Optional per-(player, state) data enabling the per-state RVU rows:
  // max over action swaps of sum_t <Q^_t(s,.), pi_t - psi(pi_t)> and the
  // own-row L1 path length sum_t ||pi_t(.|s) - pi_{t+1}(.|s)||_1^2.
  std::vector<std::vector<double>> state_swap_regret;
  std::vector<std::vector<double>> state_l1_path2;
  bool independent_transitions = false;
};

// RHS - LHS per applicable theorem; precondition violations are emitted as
// inapplicable rows with a note, never silently dropped.
std::vector<ResidualRow> BoundResiduals(const BoundCheckInput& in);

// ---- Report rows ---------------------------------------------------------

struct RegretCheckpointRow {
  int episode = 0;
  int player = 0;
  double swap_regret = 0.0;
  double external_regret = 0.0;
  double ce_gap = 0.0;
  double path1 = 0.0;
  double path2 = 0.0;
  bool swap_is_lower_bound = false;
};

std::string RegretReportCsv(std::span<const RegretCheckpointRow> rows,
                            std::span<const std::string> header_comments);
std::string ResidualTableText(std::span<const ResidualRow> rows);

}  // namespace posr

#endif  // POSR_METRICS_H_
