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

#ifndef POSR_EXPERIMENTS_H_
#define POSR_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "posr/estimation.hpp"
#include "posr/game.hpp"
#include "posr/learner.hpp"
#include "posr/metrics.hpp"
#include "posr/rng.hpp"

namespace posr {

// ---- Configuration --------------------------------------------------------

struct GeneratorParams {
  int players = 2;
  int horizon = 2;
  int states_per_layer = 2;  // layers 2..H; layers 1 and H+1 are singletons
  int actions = 2;
};

struct ExperimentConfig {
  std::string mode = "full_info";  // full_info | bandit_blocked | ftrl_demo |
                                   // independent_transition
  std::string game_file;           // empty: use the generator
  GeneratorParams generator;
  uint64_t seed = 1;
  int T = 1000;
  // Negative means "resolve from the theorem defaults".
  double eta = -1.0;
  double gamma = -1.0;
  double epsilon = -1.0;
  double delta = -1.0;
  int block = -1;
  int checkpoints = 32;
  std::string out = "out";
};

nlohmann::json ConfigToJson(const ExperimentConfig& config);
ExperimentConfig ConfigFromJson(const nlohmann::json& j);

struct ResolvedParams {
  double eta = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  int block = 1;
  std::vector<std::string> provenance;  // one line per resolved parameter
};

// eta = 1/(96 H^2 m sqrt(SA)); gamma = min(m H sqrt(S) A T^{-1/4}, 1/(2A)).
// An explicitly supplied gamma above 1/(2A) is a hard error.
ResolvedParams ResolveFullInfoParams(int H, int S, int A, int m, int T,
                                     const ExperimentConfig& config);
// Adds the blocked-mode epsilon/gamma/B resolution on top (requires beta).
ResolvedParams ResolveBanditParams(int H, int S, int A, int m, int T, double beta,
                                   const ExperimentConfig& config);
// Independent-transition mode: gamma defaults to 1/T (the log-regret tuning),
// eta to the usual 1/(96 H^2 m sqrt(SA)) with S the per-player state count.
ResolvedParams ResolveIndependentParams(int H, int S, int A, int m, int T,
                                        const ExperimentConfig& config);

// ---- Generators and scripted environments ---------------------------------

// Losses i.i.d. uniform [0,1]; transition rows Dirichlet(1), floored at 0.05
// and renormalized so every state stays reachable. Byte-deterministic in the
// seed.
MarkovGame GenerateRandomGame(const GeneratorParams& params, uint64_t seed);

// Single-agent layered MDP whose kernel switches once at T/3: a five-state
// construction on which FTRL policy optimization provably pays Omega(T)
// while an optimistic-OMD learner adapts.
struct ScriptedNonStationaryMdp {
  MarkovGame phase1;
  MarkovGame phase2;
  int switch_episode = 0;  // episodes t <= switch_episode use phase1
  int episodes = 0;        // T rounded down to a multiple of 3
  // Kernel total variation at the switch under both norm conventions.
  double variation_flat_l1 = 0.0;
  double variation_inf1 = 0.0;

  const MarkovGame& at(int episode) const {
    return episode <= switch_episode ? phase1 : phase2;
  }
  static constexpr int kStart = 0, kDetour = 1, kFork = 2, kSafe = 3, kLossy = 4;
};

ScriptedNonStationaryMdp BuildFtrlCounterexample(int T);

// Markov game variant where each player owns its state chain; joint actions
// and joint states couple the losses only.
struct IndependentGame {
  int horizon = 0;
  std::vector<int> action_counts;
  // Per player: own layered state space and own kernel.
  std::vector<std::vector<std::vector<int>>> layers;  // [player][layer][k]
  std::vector<std::vector<int>> layer_of;             // [player][own state]
  std::vector<std::vector<std::vector<std::vector<double>>>> kernel;
  // loss[player][layer][joint_state][joint_action] with mixed-radix indexes
  // over the players' layer-h states and actions (player 0 most significant).
  std::vector<std::vector<std::vector<std::vector<double>>>> loss;

  int num_players() const { return static_cast<int>(action_counts.size()); }
  int own_states(int player) const { return static_cast<int>(layer_of[player].size()); }
  int own_decision_states(int player) const { return own_states(player) - 1; }
};

IndependentGame GenerateIndependentGame(const GeneratorParams& params,
                                        uint64_t seed);

// Player's own-chain MDP: the kernel is the player's own (episode-invariant)
// chain; losses marginalize the opponents' occupancies and policies.
InducedMdp InduceOwnMdp(const IndependentGame& game,
                        const std::vector<PolicyTable>& profile, int player);

// ---- Run loops -------------------------------------------------------------

std::vector<int> LogSpacedCheckpoints(int T, int count);

struct PlayerCheckpointData {
  double swap_regret = 0.0;
  bool swap_is_lower_bound = false;
  SwapFunction swap_arg;
  double external_regret = 0.0;
  double ce_gap = 0.0;
  double path1 = 0.0;
  double path2 = 0.0;
};

struct FullInfoRunResult {
  ResolvedParams params;
  uint64_t seed = 0;
  int T = 0;
  std::vector<int> checkpoints;
  std::vector<std::vector<PolicyTable>> profiles;              // T + 1
  std::vector<std::vector<InducedMdp>> mdps;                   // [player][t]
  std::vector<std::vector<std::vector<std::vector<double>>>> q_tables;  // [player][t][s][a]
  std::vector<std::vector<double>> values;                     // [t][player]
  std::vector<RegretCheckpointRow> report;
  std::vector<std::vector<ResidualRow>> checkpoint_residuals;  // per checkpoint
  std::vector<ResidualRow> final_residuals;
  std::vector<double> decomposition_residuals;                 // per player
  bool independent_transitions = false;
};

FullInfoRunResult RunFullInfo(const MarkovGame& game, int T,
                              const ResolvedParams& params, int checkpoint_count,
                              uint64_t seed);

FullInfoRunResult RunIndependentFullInfo(const IndependentGame& game, int T,
                                         const ResolvedParams& params,
                                         int checkpoint_count, uint64_t seed);

// Deterministic re-derivation of a result from a stored profile trajectory
// (profiles.size() == T + 1); the `report` subcommand is built on these.
FullInfoRunResult RebuildFullInfoFromProfiles(
    const MarkovGame& game, const std::vector<std::vector<PolicyTable>>& profiles,
    const ResolvedParams& params, int checkpoint_count, uint64_t seed);
FullInfoRunResult RebuildIndependentFromProfiles(
    const IndependentGame& game,
    const std::vector<std::vector<PolicyTable>>& profiles,
    const ResolvedParams& params, int checkpoint_count, uint64_t seed);

struct BanditRunResult {
  ResolvedParams params;
  uint64_t seed = 0;
  BlockedRunLog log;
  // Exact Q per block per player, for estimator accuracy accounting.
  std::vector<std::vector<std::vector<std::vector<double>>>> exact_q;
  std::vector<RegretCheckpointRow> report;
  std::vector<double> swap_regret_full;       // per player, whole T episodes
  std::vector<double> swap_regret_decimated;  // per player, one point per block
  std::vector<int> checkpoints;
};

BanditRunResult RunBandit(const MarkovGame& game, int T,
                          const ResolvedParams& params, int checkpoint_count,
                          uint64_t seed);
BanditRunResult BuildBanditResult(const MarkovGame& game, BlockedRunLog log,
                                  const ResolvedParams& params,
                                  int checkpoint_count);

struct ScriptedRunResult {
  double regret = 0.0;             // vs. the exact best policy in hindsight
  double best_fixed_loss = 0.0;    // total loss of that comparator
  double total_loss = 0.0;
  std::vector<double> values;      // per-episode V^{pi_t}(s1; P_t)
  std::vector<double> prob_lossy_at_fork;  // pi_t(b | fork state)
};

ScriptedRunResult RunFtrlOnScripted(const ScriptedNonStationaryMdp& env,
                                    double eta, FtrlRegularizer reg);
ScriptedRunResult RunPosrOnScripted(const ScriptedNonStationaryMdp& env,
                                    double gamma, double eta);

// Demo parameter defaults for POSR on the scripted environment.
double ScriptedDemoGamma(int T, int actions);
double ScriptedDemoEta(int horizon);

struct FtrlDemoResult {
  int T = 0;
  std::vector<double> eta_grid;
  // [regularizer][eta index]
  std::vector<std::vector<ScriptedRunResult>> ftrl;
  ScriptedRunResult posr_large;  // at T
  ScriptedRunResult posr_small;  // at T / 10
  int small_T = 0;
  double variation_flat_l1 = 0.0;
  double variation_inf1 = 0.0;
};

FtrlDemoResult RunFtrlDemo(int T, const std::vector<double>& eta_grid);

// ---- Reports ---------------------------------------------------------------

struct ReportFiles {
  std::string run_log_csv;
  std::string blocks_csv;  // bandit mode only
  std::string regret_report_csv;
  std::string summary_txt;
  std::string regret_svg;
};

ReportFiles RenderFullInfoReports(const FullInfoRunResult& run,
                                  const ExperimentConfig& config);
ReportFiles RenderBanditReports(const BanditRunResult& run, const MarkovGame& game,
                                const ExperimentConfig& config);
std::string RenderFtrlDemoSummary(const FtrlDemoResult& demo);

// Writes the rendered files into `out_dir` (created if needed) plus the run
// record JSON; byte-deterministic given identical inputs.
void EmitReports(const std::string& out_dir, const ReportFiles& files,
                 const nlohmann::json& run_record);

nlohmann::json FullInfoRunRecord(const FullInfoRunResult& run,
                                 const ExperimentConfig& config,
                                 const MarkovGame* game);
nlohmann::json BanditRunRecord(const BanditRunResult& run,
                               const ExperimentConfig& config,
                               const MarkovGame& game);

// Rebuilds reports from a stored run record (the `report` subcommand).
struct RecomputedReports {
  ReportFiles files;
  std::string mode;
};
RecomputedReports RecomputeFromRecord(const nlohmann::json& record);

std::string RegretSvg(std::span<const RegretCheckpointRow> rows, int players);

}  // namespace posr

#endif  // POSR_EXPERIMENTS_H_
