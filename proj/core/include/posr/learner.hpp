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

#ifndef POSR_LEARNER_H_
#define POSR_LEARNER_H_

#include <span>
#include <vector>

#include "posr/game.hpp"
#include "posr/simplex.hpp"

namespace posr {

// One optimistic-OMD base algorithm with 1-step recency bias. Each round
// applies two prox steps with the same loss: the intermediate iterate and,
// eagerly, the next primary iterate (whose hint is that same loss).
struct OomdBase {
  TruncatedPoint primary;       // x_t, the iterate combined into the policy
  TruncatedPoint intermediate;  // x~_{t-1}
  std::vector<double> prev_loss;  // g_{t-1}; zero before the first round

  static OomdBase Init(int d) {
    OomdBase b;
    b.primary = UniformPoint(d);
    b.intermediate = UniformPoint(d);
    b.prev_loss.assign(d, 0.0);
    return b;
  }
};

void OomdStep(OomdBase& base, std::span<const double> loss, double eta,
              double gamma);

// Unique pi with pi(a') = sum_a pi(a) rows[a](a'), i.e. B^T pi = pi for the
// row-stochastic matrix B whose rows are the base iterates. Direct solve of
// the stacked system (B^T - I; 1^T) pi = (0; 1) by least squares, power
// iteration as fallback; residual always verified.
struct StationaryResult {
  TruncatedPoint pi;
  double residual = 0.0;  // max_a |(B^T pi - pi)(a)|
  bool used_power_iteration = false;
};
StationaryResult StationaryDistribution(const std::vector<TruncatedPoint>& rows);

// State space an agent learns over; detaches the learner from the concrete
// game representation (joint games and independent-transition games both
// produce one per player).
struct AgentSpace {
  int num_states = 0;
  int horizon = 0;
  int action_count = 0;
  std::vector<int> decision_states;
};

AgentSpace AgentSpaceFor(const MarkovGame& game, int player);

// Per-(state, action) OOMD bases over the gamma-truncated simplex, combined
// per state into the policy through the stationary distribution.
class PosrAgent {
 public:
  // Requires gamma <= 1/(2 A_i); bases and policy start uniform.
  PosrAgent(AgentSpace space, int player, double gamma, double eta);

  // One round: builds g^{s,a} = pi_t(a|s) * q_hat(s, .), steps every base,
  // and recombines each state's policy. q_hat rows are indexed by state id.
  void Update(const std::vector<std::vector<double>>& q_hat);

  const PolicyTable& policy() const { return policy_; }
  const OomdBase& base(int state, int action) const { return bases_[state][action]; }
  const AgentSpace& space() const { return space_; }
  int player() const { return player_; }
  double gamma() const { return gamma_; }
  double eta() const { return eta_; }

  // Residual of the last stationary solve, for invariant checks.
  double last_combine_residual() const { return last_combine_residual_; }

  std::vector<std::vector<OomdBase>>& mutable_bases() { return bases_; }
  PolicyTable& mutable_policy() { return policy_; }

 private:
  AgentSpace space_;
  int player_;
  double gamma_;
  double eta_;
  std::vector<std::vector<OomdBase>> bases_;  // [state id][action]
  PolicyTable policy_;
  double last_combine_residual_ = 0.0;
};

enum class FtrlRegularizer { kEntropy, kLogBarrier };

// Per-state FTRL policy optimization over the action simplex; the baseline
// the scripted environment is built to defeat.
class FtrlAgent {
 public:
  FtrlAgent(AgentSpace space, double eta, FtrlRegularizer reg);

  void Update(const std::vector<std::vector<double>>& q_hat);

  const PolicyTable& policy() const { return policy_; }
  const std::vector<std::vector<double>>& cumulative() const { return cumulative_; }
  FtrlRegularizer regularizer() const { return reg_; }

 private:
  AgentSpace space_;
  double eta_;
  FtrlRegularizer reg_;
  std::vector<std::vector<double>> cumulative_;  // [state id][action]
  PolicyTable policy_;
};

}  // namespace posr

#endif  // POSR_LEARNER_H_
