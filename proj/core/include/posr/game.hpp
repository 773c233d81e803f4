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

#ifndef POSR_GAME_H_
#define POSR_GAME_H_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace posr {

// Fails loudly on contract violations; all preconditions in this library are
// programmer errors, not recoverable conditions.
#define POSR_CHECK(cond, msg)                                        \
  do {                                                               \
    if (!(cond)) throw std::runtime_error(std::string("posr: ") + (msg)); \
  } while (0)

inline constexpr double kRowSumTol = 1e-12;

using PolicyRow = std::vector<double>;           // distribution over own actions
using PolicyTable = std::vector<PolicyRow>;      // indexed by state id; empty at terminal

// Mixed-radix indexing of joint actions; player 0 is the most significant digit.
class JointActionSpace {
 public:
  explicit JointActionSpace(std::vector<int> counts);

  int size() const { return size_; }
  int players() const { return static_cast<int>(counts_.size()); }
  int count(int player) const { return counts_[player]; }

  int Encode(std::span<const int> actions) const;
  void Decode(int index, std::span<int> actions) const;
  // Own action of `player` inside joint index `index`.
  int ActionOf(int index, int player) const;

 private:
  std::vector<int> counts_;
  std::vector<int> strides_;
  int size_ = 1;
};

// Layered finite-horizon general-sum Markov game. States are dense global
// ids grouped into H+1 layers; layer 1 and layer H+1 are singletons, losses
// and transitions exist on layers 1..H only.
struct MarkovGame {
  int horizon = 0;
  std::vector<std::vector<int>> layers;       // size horizon + 1
  std::vector<int> action_counts;             // per player
  // transition[s][joint][k]: probability of the k-th state of the next layer.
  std::vector<std::vector<std::vector<double>>> transition;
  // losses[player][s][joint] in [0, 1].
  std::vector<std::vector<std::vector<double>>> losses;

  std::vector<int> layer_of;                  // per state id
  std::vector<int> index_in_layer;            // per state id

  int num_players() const { return static_cast<int>(action_counts.size()); }
  int num_states() const { return static_cast<int>(layer_of.size()); }
  // Non-terminal state count; this is the S of the parameter formulas.
  int num_decision_states() const { return num_states() - 1; }
  int initial_state() const { return layers.front().front(); }
  int terminal_state() const { return layers.back().front(); }
  bool is_terminal(int s) const { return layer_of[s] == horizon; }
  int max_action_count() const;

  JointActionSpace joint_actions() const { return JointActionSpace(action_counts); }

  // Rebuilds layer_of / index_in_layer from `layers`. Call after filling fields.
  void ReindexLayers();
};

struct ValidationReport {
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

// Structural invariants: row sums within 1e-12, losses in [0,1], singleton
// first/last layers, complete transition and loss tables, dense state ids.
ValidationReport ValidateGame(const MarkovGame& game);

// Per-player swap function phi: (state, own action) -> own action.
// Rows are indexed by state id; terminal rows are empty.
struct SwapFunction {
  std::vector<std::vector<int>> map;

  bool IsIdentityAt(int s) const {
    for (int a = 0; a < static_cast<int>(map[s].size()); ++a)
      if (map[s][a] != a) return false;
    return true;
  }
};

// phi(pi)(a|s) = sum_{a': phi(s,a')=a} pi(a'|s). Mass preserving per state.
PolicyRow ApplyActionSwap(std::span<const int> swap_row, const PolicyRow& row);
PolicyTable ApplySwap(const PolicyTable& policy, const SwapFunction& phi);

// Uniform policy over every decision state of `game` for `player`.
PolicyTable UniformPolicy(const MarkovGame& game, int player);

// || pi - pi~ ||_{inf,1}: max over states of the L1 row difference.
double PolicyInf1Distance(const PolicyTable& a, const PolicyTable& b);

struct PathLengths {
  std::vector<double> first_order;   // per player: sum_t ||.||_{inf,1}
  std::vector<double> second_order;  // per player: sum_t ||.||^2_{inf,1}
};

// Path lengths of a jointly generated profile sequence (>= 2 profiles).
// profiles[t][i] is player i's policy table at episode t+1.
PathLengths ComputePathLengths(
    const std::vector<std::vector<PolicyTable>>& profiles);

}  // namespace posr

#endif  // POSR_GAME_H_
