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

#ifndef POSR_MDP_H_
#define POSR_MDP_H_

#include <vector>

#include "posr/game.hpp"

namespace posr {

// Single-agent MDP seen by one player once the opponents' policies are
// marginalized out. Self-contained: carries its own layer structure so the
// evaluators below need no game handle.
struct InducedMdp {
  int player = 0;
  int horizon = 0;
  int action_count = 0;
  std::vector<std::vector<int>> layers;
  std::vector<int> layer_of;
  // loss[s][a] in [0,1]; kernel[s][a][k] over the next layer's k-th state.
  std::vector<std::vector<double>> loss;
  std::vector<std::vector<std::vector<double>>> kernel;

  int num_states() const { return static_cast<int>(layer_of.size()); }
  int initial_state() const { return layers.front().front(); }
  bool is_terminal(int s) const { return layer_of[s] == horizon; }
};

struct ValueTables {
  std::vector<double> v;                  // per state; terminal = 0
  std::vector<std::vector<double>> q;     // per decision state, per own action
};

struct OccupancyMeasure {
  std::vector<double> q;  // per state; each layer sums to 1
};

// Exact expectation over the product of the opponents' per-state
// distributions: l^i(s,a) = E[l | a^i = a], P^i = E[P | a^i = a].
InducedMdp InduceMdp(const MarkovGame& game, const std::vector<PolicyTable>& profile,
                     int player);

// Backward induction: Q(s,a) = l(s,a) + sum_s' P(s'|s,a) V(s'),
// V(s) = <pi(.|s), Q(s,.)>, V(terminal) = 0.
ValueTables Evaluate(const InducedMdp& mdp, const PolicyTable& policy);

// Forward pass from q(s1) = 1.
OccupancyMeasure Occupancy(const InducedMdp& mdp, const PolicyTable& policy);

// V^{i,profile}(s1) by backward induction over the full joint-action
// distribution; agrees with Evaluate(InduceMdp(...), pi^i) to 1e-10.
double JointValue(const MarkovGame& game, const std::vector<PolicyTable>& profile,
                  int player);

// Optimal value of the induced MDP (min over deterministic policies by DP)
// and one minimizing deterministic policy.
struct MdpOptimum {
  double value = 0.0;
  std::vector<int> action;  // per state; -1 at terminal
};
MdpOptimum SolveOptimal(const InducedMdp& mdp);

}  // namespace posr

#endif  // POSR_MDP_H_
