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

#include "posr/estimation.hpp"

#include <algorithm>
#include <cmath>

namespace posr {

Trajectory SampleEpisode(const MarkovGame& game,
                         const std::vector<PolicyTable>& profile,
                         const SplitRng& run_rng, uint64_t episode) {
  const int m = game.num_players();
  const JointActionSpace space = game.joint_actions();
  SplitRng episode_rng = run_rng.Child(episode);
  std::vector<SplitRng> action_rng;
  action_rng.reserve(m);
  for (int i = 0; i < m; ++i) action_rng.push_back(episode_rng.Child(i));
  SplitRng env_rng = episode_rng.Child(m);

  Trajectory traj;
  traj.steps.resize(game.horizon);
  int s = game.initial_state();
  for (int h = 0; h < game.horizon; ++h) {
    TrajectoryStep& step = traj.steps[h];
    step.state = s;
    step.actions.resize(m);
    for (int i = 0; i < m; ++i)
      step.actions[i] = action_rng[i].NextIndex(profile[i][s]);
    step.joint_index = space.Encode(step.actions);
    step.losses.resize(m);
    for (int i = 0; i < m; ++i)
      step.losses[i] = game.losses[i][s][step.joint_index];
    const int k = env_rng.NextIndex(game.transition[s][step.joint_index]);
    s = game.layers[h + 1][k];
  }
  traj.terminal_state = s;
  return traj;
}

QEstimate EstimateQ(const MarkovGame& game, std::span<const Trajectory> block,
                    int player, bool divide_by_block_size) {
  const int d = game.action_counts[player];
  QEstimate est;
  est.q.assign(game.num_states(), {});
  est.visits.assign(game.num_states(), {});
  for (int s = 0; s < game.num_states(); ++s) {
    if (game.is_terminal(s)) continue;
    est.q[s].assign(d, 0.0);
    est.visits[s].assign(d, 0);
  }

  std::vector<double> tail(game.horizon + 1, 0.0);
  for (const Trajectory& traj : block) {
    POSR_CHECK(static_cast<int>(traj.steps.size()) == game.horizon,
               "trajectory length does not match the horizon");
    tail[game.horizon] = 0.0;
    for (int h = game.horizon - 1; h >= 0; --h)
      tail[h] = tail[h + 1] + traj.steps[h].losses[player];
    for (int h = 0; h < game.horizon; ++h) {
      const TrajectoryStep& step = traj.steps[h];
      const int a = step.actions[player];
      est.visits[step.state][a] += 1;
      est.q[step.state][a] += tail[h];
    }
  }

  const double b = static_cast<double>(block.size());
  for (int s = 0; s < game.num_states(); ++s) {
    if (game.is_terminal(s)) continue;
    for (int a = 0; a < d; ++a) {
      if (est.visits[s][a] == 0) {
        est.unvisited.emplace_back(s, a);
        est.q[s][a] = 0.0;
      } else {
        est.q[s][a] /= divide_by_block_size ? b : est.visits[s][a];
      }
    }
  }
  return est;
}

ReachabilityResult MinReachability(const MarkovGame& game) {
  ReachabilityResult result;
  result.per_state.assign(game.num_states(), 1.0);
  const JointActionSpace space = game.joint_actions();
  std::vector<double> r(game.num_states(), 0.0);

  for (int z = 0; z < game.num_states(); ++z) {
    const int target_layer = game.layer_of[z];
    if (target_layer == 0) {
      result.per_state[z] = 1.0;
      continue;
    }
    for (int s : game.layers[target_layer]) r[s] = (s == z) ? 1.0 : 0.0;
    for (int h = target_layer - 1; h >= 0; --h) {
      const auto& next_layer = game.layers[h + 1];
      for (int s : game.layers[h]) {
        double best = 0.0;
        for (int j = 0; j < space.size(); ++j) {
          double v = 0.0;
          const auto& row = game.transition[s][j];
          for (size_t k = 0; k < next_layer.size(); ++k)
            v += row[k] * r[next_layer[k]];
          if (j == 0 || v < best) best = v;
        }
        r[s] = best;
      }
    }
    result.per_state[z] = r[game.initial_state()];
  }

  result.beta = result.per_state[0];
  result.argmin_state = 0;
  for (int z = 1; z < game.num_states(); ++z) {
    if (result.per_state[z] < result.beta) {
      result.beta = result.per_state[z];
      result.argmin_state = z;
    }
  }
  return result;
}

int TheoremBlockLength(int horizon, int num_decision_states, int max_actions,
                       int num_players, double gamma, double beta, double epsilon,
                       double delta, int T) {
  POSR_CHECK(beta > 0.0, "block sizing requires beta > 0");
  POSR_CHECK(epsilon > 0.0 && delta > 0.0, "epsilon and delta must be positive");
  const double log_term = std::log(static_cast<double>(num_players) *
                                   num_decision_states * max_actions * T / delta);
  const double b = 2.0 * horizon * horizon * log_term /
                   (gamma * beta * epsilon * epsilon);
  return std::max(1, static_cast<int>(std::ceil(b)));
}

BlockedRunLog RunBlocked(const MarkovGame& game, std::vector<PosrAgent>& agents,
                         int episodes, int block_length, uint64_t seed,
                         bool divide_by_block_size) {
  const int m = game.num_players();
  POSR_CHECK(static_cast<int>(agents.size()) == m, "one agent per player required");
  POSR_CHECK(block_length >= 1, "block length must be >= 1");

  BlockedRunLog log;
  log.seed = seed;
  log.block_length = block_length;
  log.requested_episodes = episodes;
  const int blocks = episodes / block_length;
  POSR_CHECK(blocks >= 1, "fewer episodes than one block");
  log.episodes = blocks * block_length;

  SplitRng run_rng(seed);
  std::vector<Trajectory> block(block_length);
  uint64_t episode = 0;
  for (int j = 0; j < blocks; ++j) {
    std::vector<PolicyTable> profile;
    profile.reserve(m);
    for (const PosrAgent& agent : agents) profile.push_back(agent.policy());
    log.block_profiles.push_back(profile);

    for (int b = 0; b < block_length; ++b) {
      block[b] = SampleEpisode(game, profile, run_rng, episode++);
      std::vector<double> returns(m, 0.0);
      for (const TrajectoryStep& step : block[b].steps)
        for (int i = 0; i < m; ++i) returns[i] += step.losses[i];
      log.realized_returns.push_back(std::move(returns));
    }

    std::vector<QEstimate> round;
    round.reserve(m);
    for (int i = 0; i < m; ++i)
      round.push_back(EstimateQ(game, block, i, divide_by_block_size));
    log.estimates.push_back(round);
    for (int i = 0; i < m; ++i) agents[i].Update(log.estimates.back()[i].q);
  }

  std::vector<PolicyTable> final_profile;
  for (const PosrAgent& agent : agents) final_profile.push_back(agent.policy());
  log.block_profiles.push_back(std::move(final_profile));
  return log;
}

}  // namespace posr
