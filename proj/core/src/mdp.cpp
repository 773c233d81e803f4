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

#include "posr/mdp.hpp"

#include <cmath>

namespace posr {

InducedMdp InduceMdp(const MarkovGame& game, const std::vector<PolicyTable>& profile,
                     int player) {
  POSR_CHECK(static_cast<int>(profile.size()) == game.num_players(),
             "profile size does not match the player count");
  const int m = game.num_players();
  const int d = game.action_counts[player];
  for (int j = 0; j < m; ++j) {
    POSR_CHECK(static_cast<int>(profile[j].size()) == game.num_states(),
               "profile rows do not match the state count");
  }

  InducedMdp mdp;
  mdp.player = player;
  mdp.horizon = game.horizon;
  mdp.action_count = d;
  mdp.layers = game.layers;
  mdp.layer_of = game.layer_of;
  mdp.loss.assign(game.num_states(), {});
  mdp.kernel.assign(game.num_states(), {});

  const JointActionSpace space = game.joint_actions();
  std::vector<int> actions(m);
  for (int h = 0; h < game.horizon; ++h) {
    const int next_size = static_cast<int>(game.layers[h + 1].size());
    for (int s : game.layers[h]) {
      mdp.loss[s].assign(d, 0.0);
      mdp.kernel[s].assign(d, std::vector<double>(next_size, 0.0));
      for (int j = 0; j < space.size(); ++j) {
        space.Decode(j, actions);
        double w = 1.0;
        for (int k = 0; k < m; ++k) {
          if (k == player) continue;
          w *= profile[k][s][actions[k]];
        }
        if (w == 0.0) continue;
        const int a = actions[player];
        mdp.loss[s][a] += w * game.losses[player][s][j];
        const auto& row = game.transition[s][j];
        auto& out = mdp.kernel[s][a];
        for (int k = 0; k < next_size; ++k) out[k] += w * row[k];
      }
    }
  }
  return mdp;
}

ValueTables Evaluate(const InducedMdp& mdp, const PolicyTable& policy) {
  ValueTables vt;
  vt.v.assign(mdp.num_states(), 0.0);
  vt.q.assign(mdp.num_states(), {});
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const auto& next_layer = mdp.layers[h + 1];
    for (int s : mdp.layers[h]) {
      auto& qs = vt.q[s];
      qs.assign(mdp.action_count, 0.0);
      double v = 0.0;
      for (int a = 0; a < mdp.action_count; ++a) {
        double q = mdp.loss[s][a];
        const auto& row = mdp.kernel[s][a];
        for (size_t k = 0; k < next_layer.size(); ++k)
          q += row[k] * vt.v[next_layer[k]];
        qs[a] = q;
        v += policy[s][a] * q;
      }
      vt.v[s] = v;
    }
  }
  return vt;
}

OccupancyMeasure Occupancy(const InducedMdp& mdp, const PolicyTable& policy) {
  OccupancyMeasure occ;
  occ.q.assign(mdp.num_states(), 0.0);
  occ.q[mdp.initial_state()] = 1.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    const auto& next_layer = mdp.layers[h + 1];
    for (int s : mdp.layers[h]) {
      const double qs = occ.q[s];
      if (qs == 0.0) continue;
      for (int a = 0; a < mdp.action_count; ++a) {
        const double w = qs * policy[s][a];
        if (w == 0.0) continue;
        const auto& row = mdp.kernel[s][a];
        for (size_t k = 0; k < next_layer.size(); ++k)
          occ.q[next_layer[k]] += w * row[k];
      }
    }
  }
  return occ;
}

double JointValue(const MarkovGame& game, const std::vector<PolicyTable>& profile,
                  int player) {
  const int m = game.num_players();
  const JointActionSpace space = game.joint_actions();
  std::vector<double> v(game.num_states(), 0.0);
  std::vector<int> actions(m);
  for (int h = game.horizon - 1; h >= 0; --h) {
    const auto& next_layer = game.layers[h + 1];
    for (int s : game.layers[h]) {
      double vs = 0.0;
      for (int j = 0; j < space.size(); ++j) {
        space.Decode(j, actions);
        double w = 1.0;
        for (int k = 0; k < m; ++k) w *= profile[k][s][actions[k]];
        if (w == 0.0) continue;
        double tail = game.losses[player][s][j];
        const auto& row = game.transition[s][j];
        for (size_t k = 0; k < next_layer.size(); ++k)
          tail += row[k] * v[next_layer[k]];
        vs += w * tail;
      }
      v[s] = vs;
    }
  }
  return v[game.initial_state()];
}

MdpOptimum SolveOptimal(const InducedMdp& mdp) {
  MdpOptimum opt;
  opt.action.assign(mdp.num_states(), -1);
  std::vector<double> v(mdp.num_states(), 0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const auto& next_layer = mdp.layers[h + 1];
    for (int s : mdp.layers[h]) {
      double best = 0.0;
      int best_a = -1;
      for (int a = 0; a < mdp.action_count; ++a) {
        double q = mdp.loss[s][a];
        const auto& row = mdp.kernel[s][a];
        for (size_t k = 0; k < next_layer.size(); ++k)
          q += row[k] * v[next_layer[k]];
        if (best_a < 0 || q < best) {
          best = q;
          best_a = a;
        }
      }
      v[s] = best;
      opt.action[s] = best_a;
    }
  }
  opt.value = v[mdp.initial_state()];
  return opt;
}

}  // namespace posr
