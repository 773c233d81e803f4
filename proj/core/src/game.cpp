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

#include "posr/game.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace posr {

JointActionSpace::JointActionSpace(std::vector<int> counts)
    : counts_(std::move(counts)) {
  strides_.resize(counts_.size());
  for (int i = static_cast<int>(counts_.size()) - 1; i >= 0; --i) {
    strides_[i] = size_;
    size_ *= counts_[i];
  }
}

int JointActionSpace::Encode(std::span<const int> actions) const {
  int idx = 0;
  for (size_t i = 0; i < counts_.size(); ++i) idx += actions[i] * strides_[i];
  return idx;
}

void JointActionSpace::Decode(int index, std::span<int> actions) const {
  for (size_t i = 0; i < counts_.size(); ++i) {
    actions[i] = (index / strides_[i]) % counts_[i];
  }
}

int JointActionSpace::ActionOf(int index, int player) const {
  return (index / strides_[player]) % counts_[player];
}

int MarkovGame::max_action_count() const {
  return *std::max_element(action_counts.begin(), action_counts.end());
}

void MarkovGame::ReindexLayers() {
  int total = 0;
  for (const auto& layer : layers) total += static_cast<int>(layer.size());
  layer_of.assign(total, -1);
  index_in_layer.assign(total, -1);
  for (int h = 0; h < static_cast<int>(layers.size()); ++h) {
    for (int k = 0; k < static_cast<int>(layers[h].size()); ++k) {
      const int s = layers[h][k];
      POSR_CHECK(s >= 0 && s < total, "state ids must be dense in [0, N)");
      POSR_CHECK(layer_of[s] == -1, "state id appears in two layers");
      layer_of[s] = h;
      index_in_layer[s] = k;
    }
  }
  for (int s = 0; s < total; ++s)
    POSR_CHECK(layer_of[s] >= 0, "state id missing from the layer partition");
}

namespace {

std::string JointActionLabel(const JointActionSpace& space, int joint) {
  std::vector<int> a(space.players());
  space.Decode(joint, a);
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ")";
  return os.str();
}

}  // namespace

ValidationReport ValidateGame(const MarkovGame& game) {
  ValidationReport report;
  auto add = [&](const std::string& s) { report.issues.push_back(s); };

  if (game.horizon < 1) add("horizon must be >= 1");
  if (static_cast<int>(game.layers.size()) != game.horizon + 1)
    add("expected horizon + 1 layers");
  if (game.layers.empty()) return report;
  if (game.layers.front().size() != 1) add("layer 1 must be a singleton");
  if (game.layers.back().size() != 1) add("layer H+1 must be a singleton");
  if (game.action_counts.empty()) add("at least one player required");
  for (int i = 0; i < static_cast<int>(game.action_counts.size()); ++i)
    if (game.action_counts[i] < 1) add("player " + std::to_string(i) + " has no actions");
  if (!report.ok()) return report;

  const JointActionSpace space = game.joint_actions();
  const int n = game.num_states();
  if (static_cast<int>(game.transition.size()) != n)
    add("transition table must be indexed by every state id");
  if (static_cast<int>(game.losses.size()) != game.num_players())
    add("one loss table per player required");
  if (!report.ok()) return report;

  for (int h = 0; h < game.horizon; ++h) {
    const int next_size = static_cast<int>(game.layers[h + 1].size());
    for (int s : game.layers[h]) {
      if (static_cast<int>(game.transition[s].size()) != space.size()) {
        add("state " + std::to_string(s) + ": transition rows missing for some joint actions");
        continue;
      }
      for (int j = 0; j < space.size(); ++j) {
        const auto& row = game.transition[s][j];
        if (static_cast<int>(row.size()) != next_size) {
          add("state " + std::to_string(s) + ", joint action " +
              JointActionLabel(space, j) + ": row length mismatch");
          continue;
        }
        double sum = 0.0;
        bool nonneg = true;
        for (double p : row) {
          sum += p;
          nonneg = nonneg && p >= 0.0;
        }
        if (!nonneg)
          add("state " + std::to_string(s) + ", joint action " +
              JointActionLabel(space, j) + ": negative transition probability");
        if (std::abs(sum - 1.0) > kRowSumTol)
          add("state " + std::to_string(s) + ", joint action " +
              JointActionLabel(space, j) + ": row sums to " + std::to_string(sum));
      }
    }
  }

  for (int i = 0; i < game.num_players(); ++i) {
    if (static_cast<int>(game.losses[i].size()) != n) {
      add("player " + std::to_string(i) + ": loss table must cover every state id");
      continue;
    }
    for (int h = 0; h < game.horizon; ++h) {
      for (int s : game.layers[h]) {
        if (static_cast<int>(game.losses[i][s].size()) != space.size()) {
          add("player " + std::to_string(i) + ", state " + std::to_string(s) +
              ": loss entries missing for some joint actions");
          continue;
        }
        for (int j = 0; j < space.size(); ++j) {
          const double v = game.losses[i][s][j];
          if (!(v >= 0.0 && v <= 1.0))
            add("player " + std::to_string(i) + ", state " + std::to_string(s) +
                ", joint action " + JointActionLabel(space, j) + ": loss " +
                std::to_string(v) + " outside [0,1]");
        }
      }
    }
  }
  return report;
}

PolicyRow ApplyActionSwap(std::span<const int> swap_row, const PolicyRow& row) {
  PolicyRow out(row.size(), 0.0);
  for (size_t a = 0; a < row.size(); ++a) out[swap_row[a]] += row[a];
  return out;
}

PolicyTable ApplySwap(const PolicyTable& policy, const SwapFunction& phi) {
  PolicyTable out(policy.size());
  for (size_t s = 0; s < policy.size(); ++s) {
    if (policy[s].empty()) continue;
    out[s] = ApplyActionSwap(phi.map[s], policy[s]);
  }
  return out;
}

PolicyTable UniformPolicy(const MarkovGame& game, int player) {
  PolicyTable policy(game.num_states());
  const int d = game.action_counts[player];
  for (int s = 0; s < game.num_states(); ++s) {
    if (!game.is_terminal(s)) policy[s].assign(d, 1.0 / d);
  }
  return policy;
}

double PolicyInf1Distance(const PolicyTable& a, const PolicyTable& b) {
  POSR_CHECK(a.size() == b.size(), "policy tables of different sizes");
  double best = 0.0;
  for (size_t s = 0; s < a.size(); ++s) {
    double l1 = 0.0;
    for (size_t k = 0; k < a[s].size(); ++k) l1 += std::abs(a[s][k] - b[s][k]);
    best = std::max(best, l1);
  }
  return best;
}

PathLengths ComputePathLengths(
    const std::vector<std::vector<PolicyTable>>& profiles) {
  POSR_CHECK(profiles.size() >= 2, "need at least two profiles");
  const int m = static_cast<int>(profiles.front().size());
  PathLengths out;
  out.first_order.assign(m, 0.0);
  out.second_order.assign(m, 0.0);
  for (size_t t = 0; t + 1 < profiles.size(); ++t) {
    for (int i = 0; i < m; ++i) {
      const double d = PolicyInf1Distance(profiles[t + 1][i], profiles[t][i]);
      out.first_order[i] += d;
      out.second_order[i] += d * d;
    }
  }
  return out;
}

}  // namespace posr
