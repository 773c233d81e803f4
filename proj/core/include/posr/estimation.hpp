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

#ifndef POSR_ESTIMATION_H_
#define POSR_ESTIMATION_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "posr/game.hpp"
#include "posr/learner.hpp"
#include "posr/rng.hpp"

namespace posr {

struct TrajectoryStep {
  int state = 0;
  int joint_index = 0;
  std::vector<int> actions;   // one per player
  std::vector<double> losses;  // one per player, read from the game
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;  // one per layer h = 1..H
  int terminal_state = 0;
};

// One exact episode simulation. Per-(episode, player) action streams and a
// per-episode environment stream are derived from `run_rng` by key, so the
// trajectory depends only on (seed, episode), never on scheduling.
Trajectory SampleEpisode(const MarkovGame& game,
                         const std::vector<PolicyTable>& profile,
                         const SplitRng& run_rng, uint64_t episode);

struct QEstimate {
  std::vector<std::vector<double>> q;   // [state id][own action], 0 if unvisited
  std::vector<std::vector<int>> visits;
  std::vector<std::pair<int, int>> unvisited;  // flagged (state, action) cells
};

// Blocked estimator: per (s,a), the mean over visiting episodes of the tail
// loss sum from the state's layer through H. All trajectories must come from
// one fixed profile. With `divide_by_block_size` the literal 1/B
// normalization is used instead of the visit count.
QEstimate EstimateQ(const MarkovGame& game, std::span<const Trajectory> block,
                    int player, bool divide_by_block_size = false);

struct ReachabilityResult {
  double beta = 0.0;
  int argmin_state = 0;
  std::vector<double> per_state;  // min reach probability per state id
};

// For every state, the minimum over product Markov policies of the reach
// probability, by backward DP with a min over joint actions (the min of the
// multilinear objective sits at a deterministic joint action per state).
ReachabilityResult MinReachability(const MarkovGame& game);

struct BlockConfig {
  int block_length = 1;   // B
  double epsilon = 0.0;   // target accuracy of the Q estimate
  double delta = 0.0;     // confidence
  double beta = 0.0;      // reachability constant used to size B
};

// B = ceil(2 H^2 ln(m S A T / delta) / (gamma beta eps^2)).
int TheoremBlockLength(int horizon, int num_decision_states, int max_actions,
                       int num_players, double gamma, double beta, double epsilon,
                       double delta, int T);

struct BlockedRunLog {
  uint64_t seed = 0;
  int block_length = 1;
  int episodes = 0;            // T rounded down to a multiple of B
  int requested_episodes = 0;
  // Profile held during block j; the last entry is the post-final-update
  // profile, so decimated path lengths are well defined.
  std::vector<std::vector<PolicyTable>> block_profiles;
  std::vector<std::vector<QEstimate>> estimates;        // [block][player]
  std::vector<std::vector<double>> realized_returns;    // [episode][player]
};

// T/B policy updates; within each block the profile is frozen, B episodes
// are sampled, then every player updates from its own QEstimate.
BlockedRunLog RunBlocked(const MarkovGame& game, std::vector<PosrAgent>& agents,
                         int episodes, int block_length, uint64_t seed,
                         bool divide_by_block_size = false);

}  // namespace posr

#endif  // POSR_ESTIMATION_H_
