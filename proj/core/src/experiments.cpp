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

#include "posr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "posr/mdp.hpp"

namespace posr {

using nlohmann::json;

// ---- Configuration --------------------------------------------------------

json ConfigToJson(const ExperimentConfig& config) {
  json j;
  j["mode"] = config.mode;
  if (!config.game_file.empty()) j["game"] = config.game_file;
  j["generator"] = {{"players", config.generator.players},
                    {"horizon", config.generator.horizon},
                    {"states_per_layer", config.generator.states_per_layer},
                    {"actions", config.generator.actions}};
  j["seed"] = config.seed;
  j["T"] = config.T;
  if (config.eta >= 0) j["eta"] = config.eta;
  if (config.gamma >= 0) j["gamma"] = config.gamma;
  if (config.epsilon >= 0) j["epsilon"] = config.epsilon;
  if (config.delta >= 0) j["delta"] = config.delta;
  if (config.block >= 0) j["block"] = config.block;
  j["checkpoints"] = config.checkpoints;
  j["out"] = config.out;
  return j;
}

ExperimentConfig ConfigFromJson(const json& j) {
  ExperimentConfig config;
  if (j.contains("mode")) config.mode = j.at("mode").get<std::string>();
  if (j.contains("game")) config.game_file = j.at("game").get<std::string>();
  if (j.contains("generator")) {
    const json& g = j.at("generator");
    if (g.contains("players")) config.generator.players = g.at("players").get<int>();
    if (g.contains("horizon")) config.generator.horizon = g.at("horizon").get<int>();
    if (g.contains("states_per_layer"))
      config.generator.states_per_layer = g.at("states_per_layer").get<int>();
    if (g.contains("actions")) config.generator.actions = g.at("actions").get<int>();
  }
  if (j.contains("seed")) config.seed = j.at("seed").get<uint64_t>();
  if (j.contains("T")) config.T = j.at("T").get<int>();
  if (j.contains("eta") && !j.at("eta").is_null()) config.eta = j.at("eta").get<double>();
  if (j.contains("gamma") && !j.at("gamma").is_null())
    config.gamma = j.at("gamma").get<double>();
  if (j.contains("epsilon") && !j.at("epsilon").is_null())
    config.epsilon = j.at("epsilon").get<double>();
  if (j.contains("delta") && !j.at("delta").is_null())
    config.delta = j.at("delta").get<double>();
  if (j.contains("block") && !j.at("block").is_null())
    config.block = j.at("block").get<int>();
  if (j.contains("checkpoints")) config.checkpoints = j.at("checkpoints").get<int>();
  if (j.contains("out")) config.out = j.at("out").get<std::string>();
  return config;
}

namespace {

std::string FormatParam(const char* name, double value, const char* origin) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s = %.12g (%s)", name, value, origin);
  return buf;
}

}  // namespace

ResolvedParams ResolveFullInfoParams(int H, int S, int A, int m, int T,
                                     const ExperimentConfig& config) {
  ResolvedParams p;
  p.epsilon = config.epsilon >= 0 ? config.epsilon : 0.0;
  p.delta = config.delta >= 0 ? config.delta : 0.1;

  if (config.eta >= 0) {
    p.eta = config.eta;
    p.provenance.push_back(FormatParam("eta", p.eta, "explicit"));
  } else {
    p.eta = DefaultEta(H, m, S, A);
    p.provenance.push_back(
        FormatParam("eta", p.eta, "default: 1/(96 H^2 m sqrt(S A))"));
  }

  const double gamma_cap = 1.0 / (2.0 * A);
  if (config.gamma >= 0) {
    POSR_CHECK(config.gamma <= gamma_cap + 1e-15,
               "gamma must satisfy gamma <= 1/(2A)");
    p.gamma = config.gamma;
    p.provenance.push_back(FormatParam("gamma", p.gamma, "explicit"));
  } else {
    const double formula =
        m * H * std::sqrt(static_cast<double>(S)) * A * std::pow(T, -0.25);
    p.gamma = std::min(formula, gamma_cap);
    p.provenance.push_back(FormatParam(
        "gamma", p.gamma,
        formula <= gamma_cap ? "default: m H sqrt(S) A T^{-1/4}"
                             : "default: m H sqrt(S) A T^{-1/4}, capped at 1/(2A)"));
  }
  p.block = 1;
  return p;
}

ResolvedParams ResolveBanditParams(int H, int S, int A, int m, int T, double beta,
                                   const ExperimentConfig& config) {
  ResolvedParams p;
  p.delta = config.delta >= 0 ? config.delta : 0.1;
  p.provenance.push_back(FormatParam("delta", p.delta,
                                     config.delta >= 0 ? "explicit" : "default"));

  if (config.eta >= 0) {
    p.eta = config.eta;
    p.provenance.push_back(FormatParam("eta", p.eta, "explicit"));
  } else {
    p.eta = DefaultEta(H, m, S, A);
    p.provenance.push_back(
        FormatParam("eta", p.eta, "default: 1/(96 H^2 m sqrt(S A))"));
  }

  const double gamma_cap = 1.0 / (2.0 * A);
  const double log_term =
      std::log(static_cast<double>(m) * S * A * T / p.delta);
  if (config.gamma >= 0) {
    POSR_CHECK(config.gamma <= gamma_cap + 1e-15,
               "gamma must satisfy gamma <= 1/(2A)");
    p.gamma = config.gamma;
    p.provenance.push_back(FormatParam("gamma", p.gamma, "explicit"));
  } else {
    const double formula =
        std::pow(H, 4.0 / 9) * std::pow(S, 1.0 / 3) * std::pow(A, 5.0 / 9) *
        std::pow(m, 2.0 / 3) * std::pow(beta, -1.0 / 9) *
        std::pow(log_term * std::log(static_cast<double>(T)), 1.0 / 9) *
        std::pow(T, -1.0 / 9);
    p.gamma = std::min(formula, gamma_cap);
    p.provenance.push_back(FormatParam(
        "gamma", p.gamma,
        formula <= gamma_cap
            ? "default: H^{4/9} S^{1/3} A^{5/9} m^{2/3} beta^{-1/9} (ln(mSAT/d) ln T)^{1/9} T^{-1/9}"
            : "default bandit formula, capped at 1/(2A)"));
  }

  if (config.epsilon >= 0) {
    p.epsilon = config.epsilon;
    p.provenance.push_back(FormatParam("epsilon", p.epsilon, "explicit"));
  } else {
    p.epsilon = 6.0 * H * H * std::sqrt(static_cast<double>(m)) *
                std::pow(S, 0.25) * std::pow(A, 0.75) *
                std::pow(log_term * std::log(1.0 / p.gamma), 0.25) *
                std::pow(beta * p.gamma * T, -0.25);
    p.provenance.push_back(FormatParam(
        "epsilon", p.epsilon,
        "default: 6 H^2 sqrt(m) S^{1/4} A^{3/4} (ln(mSAT/d) ln(1/g))^{1/4} (b g T)^{-1/4}"));
  }

  if (config.block >= 0) {
    p.block = std::max(1, config.block);
    p.provenance.push_back(FormatParam("B", p.block, "explicit"));
  } else {
    p.block = TheoremBlockLength(H, S, A, m, p.gamma, beta, p.epsilon, p.delta, T);
    p.provenance.push_back(FormatParam(
        "B", p.block, "default: ceil(2 H^2 ln(mSAT/delta) / (gamma beta eps^2))"));
  }
  return p;
}

ResolvedParams ResolveIndependentParams(int H, int S, int A, int m, int T,
                                        const ExperimentConfig& config) {
  ResolvedParams p;
  p.epsilon = config.epsilon >= 0 ? config.epsilon : 0.0;
  p.delta = config.delta >= 0 ? config.delta : 0.1;
  if (config.eta >= 0) {
    p.eta = config.eta;
    p.provenance.push_back(FormatParam("eta", p.eta, "explicit"));
  } else {
    p.eta = DefaultEta(H, m, S, A);
    p.provenance.push_back(
        FormatParam("eta", p.eta, "default: 1/(96 H^2 m sqrt(S A))"));
  }
  const double gamma_cap = 1.0 / (2.0 * A);
  if (config.gamma >= 0) {
    POSR_CHECK(config.gamma <= gamma_cap + 1e-15,
               "gamma must satisfy gamma <= 1/(2A)");
    p.gamma = config.gamma;
    p.provenance.push_back(FormatParam("gamma", p.gamma, "explicit"));
  } else {
    POSR_CHECK(T >= 2 * A, "independent mode default gamma = 1/T needs T >= 2A");
    p.gamma = 1.0 / T;
    p.provenance.push_back(FormatParam("gamma", p.gamma, "default: 1/T"));
  }
  p.block = 1;
  return p;
}

// ---- Generators ------------------------------------------------------------

namespace {

constexpr double kGeneratorFloor = 0.05;

std::vector<double> DirichletRow(SplitRng& rng, int n) {
  std::vector<double> row(n);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    // -log(U) is Exp(1); normalizing exponentials samples Dirichlet(1).
    double u = rng.NextDouble();
    if (u <= 0.0) u = 0x1.0p-53;
    row[k] = -std::log(u);
    sum += row[k];
  }
  for (double& v : row) v /= sum;
  // Floor and renormalize so no next state is effectively unreachable.
  sum = 0.0;
  for (double& v : row) {
    v = std::max(v, kGeneratorFloor);
    sum += v;
  }
  for (double& v : row) v /= sum;
  return row;
}

}  // namespace

MarkovGame GenerateRandomGame(const GeneratorParams& params, uint64_t seed) {
  POSR_CHECK(params.players >= 1 && params.players <= 4,
             "generator supports 1..4 players");
  POSR_CHECK(params.actions >= 1 && params.actions <= 4,
             "generator supports 1..4 actions");
  POSR_CHECK(params.horizon >= 1, "horizon must be >= 1");
  POSR_CHECK(params.states_per_layer >= 1, "states_per_layer must be >= 1");

  MarkovGame game;
  game.horizon = params.horizon;
  game.action_counts.assign(params.players, params.actions);
  int next_id = 0;
  game.layers.resize(params.horizon + 1);
  game.layers[0] = {next_id++};
  for (int h = 1; h < params.horizon; ++h) {
    for (int k = 0; k < params.states_per_layer; ++k)
      game.layers[h].push_back(next_id++);
  }
  game.layers[params.horizon] = {next_id++};
  game.ReindexLayers();

  const JointActionSpace space = game.joint_actions();
  SplitRng rng(seed);
  SplitRng transition_rng = rng.Child(0);
  SplitRng loss_rng = rng.Child(1);

  game.transition.assign(game.num_states(), {});
  for (int h = 0; h < game.horizon; ++h) {
    const int next_size = static_cast<int>(game.layers[h + 1].size());
    for (int s : game.layers[h]) {
      game.transition[s].resize(space.size());
      for (int j = 0; j < space.size(); ++j)
        game.transition[s][j] = DirichletRow(transition_rng, next_size);
    }
  }

  game.losses.assign(params.players, std::vector<std::vector<double>>(game.num_states()));
  for (int i = 0; i < params.players; ++i) {
    for (int h = 0; h < game.horizon; ++h) {
      for (int s : game.layers[h]) {
        game.losses[i][s].resize(space.size());
        for (int j = 0; j < space.size(); ++j)
          game.losses[i][s][j] = loss_rng.NextDouble();
      }
    }
  }
  return game;
}

ScriptedNonStationaryMdp BuildFtrlCounterexample(int T) {
  POSR_CHECK(T >= 3, "need at least 3 episodes");
  ScriptedNonStationaryMdp env;
  env.episodes = (T / 3) * 3;  // rounded down to a multiple of 3
  env.switch_episode = env.episodes / 3;

  auto build = [](bool first_phase) {
    MarkovGame g;
    g.horizon = 3;
    g.layers = {{ScriptedNonStationaryMdp::kStart},
                {ScriptedNonStationaryMdp::kDetour, ScriptedNonStationaryMdp::kFork},
                {ScriptedNonStationaryMdp::kSafe, ScriptedNonStationaryMdp::kLossy},
                {5}};
    g.action_counts = {2};
    g.ReindexLayers();
    g.transition.assign(g.num_states(), {});
    g.losses.assign(1, std::vector<std::vector<double>>(g.num_states()));

    auto det_row = [](int size, int hit) {
      std::vector<double> row(size, 0.0);
      row[hit] = 1.0;
      return row;
    };
    // Layer 1 -> layer 2: both actions move to the detour state in the first
    // phase and to the fork state afterwards.
    const int layer2_target = first_phase ? 0 : 1;  // index within layer 2
    g.transition[ScriptedNonStationaryMdp::kStart] = {det_row(2, layer2_target),
                                                      det_row(2, layer2_target)};
    // Detour always falls into the safe sink.
    g.transition[ScriptedNonStationaryMdp::kDetour] = {det_row(2, 0), det_row(2, 0)};
    // Fork: in the first phase action 0 hits the lossy sink; afterwards the
    // roles of the two actions are reversed.
    if (first_phase) {
      g.transition[ScriptedNonStationaryMdp::kFork] = {det_row(2, 1), det_row(2, 0)};
    } else {
      g.transition[ScriptedNonStationaryMdp::kFork] = {det_row(2, 0), det_row(2, 1)};
    }
    g.transition[ScriptedNonStationaryMdp::kSafe] = {det_row(1, 0), det_row(1, 0)};
    g.transition[ScriptedNonStationaryMdp::kLossy] = {det_row(1, 0), det_row(1, 0)};

    for (int h = 0; h < g.horizon; ++h) {
      for (int s : g.layers[h]) {
        const double value = (s == ScriptedNonStationaryMdp::kLossy) ? 1.0 : 0.0;
        g.losses[0][s] = {value, value};
      }
    }
    return g;
  };

  env.phase1 = build(true);
  env.phase2 = build(false);

  double flat = 0.0, inf1 = 0.0;
  for (int h = 0; h < env.phase1.horizon; ++h) {
    for (int s : env.phase1.layers[h]) {
      for (size_t ja = 0; ja < env.phase1.transition[s].size(); ++ja) {
        double l1 = 0.0;
        for (size_t k = 0; k < env.phase1.transition[s][ja].size(); ++k)
          l1 += std::abs(env.phase1.transition[s][ja][k] -
                         env.phase2.transition[s][ja][k]);
        flat += l1;
        inf1 = std::max(inf1, l1);
      }
    }
  }
  env.variation_flat_l1 = flat;
  env.variation_inf1 = inf1;
  return env;
}

IndependentGame GenerateIndependentGame(const GeneratorParams& params,
                                        uint64_t seed) {
  POSR_CHECK(params.players >= 1 && params.players <= 4,
             "generator supports 1..4 players");
  IndependentGame game;
  game.horizon = params.horizon;
  game.action_counts.assign(params.players, params.actions);
  game.layers.resize(params.players);
  game.layer_of.resize(params.players);
  game.kernel.resize(params.players);
  game.loss.resize(params.players);

  SplitRng rng(seed);
  for (int i = 0; i < params.players; ++i) {
    SplitRng chain_rng = rng.Child(i);
    auto& layers = game.layers[i];
    layers.resize(params.horizon + 1);
    int next_id = 0;
    layers[0] = {next_id++};
    for (int h = 1; h < params.horizon; ++h)
      for (int k = 0; k < params.states_per_layer; ++k)
        layers[h].push_back(next_id++);
    layers[params.horizon] = {next_id++};
    game.layer_of[i].assign(next_id, 0);
    for (int h = 0; h <= params.horizon; ++h)
      for (int s : layers[h]) game.layer_of[i][s] = h;

    game.kernel[i].assign(next_id, {});
    for (int h = 0; h < params.horizon; ++h) {
      const int next_size = static_cast<int>(layers[h + 1].size());
      for (int s : layers[h]) {
        game.kernel[i][s].resize(params.actions);
        for (int a = 0; a < params.actions; ++a)
          game.kernel[i][s][a] = DirichletRow(chain_rng, next_size);
      }
    }
  }

  const JointActionSpace actions(game.action_counts);
  SplitRng loss_rng = rng.Child(1000);
  for (int i = 0; i < params.players; ++i) {
    game.loss[i].resize(params.horizon);
    for (int h = 0; h < params.horizon; ++h) {
      int joint_states = 1;
      for (int p = 0; p < params.players; ++p)
        joint_states *= static_cast<int>(game.layers[p][h].size());
      game.loss[i][h].resize(joint_states);
      for (int js = 0; js < joint_states; ++js) {
        game.loss[i][h][js].resize(actions.size());
        for (int ja = 0; ja < actions.size(); ++ja)
          game.loss[i][h][js][ja] = loss_rng.NextDouble();
      }
    }
  }
  return game;
}

namespace {

// Mixed-radix index over the players' layer-h state indexes, player 0 most
// significant, matching joint-action indexing.
int JointStateIndex(const IndependentGame& game, int layer,
                    std::span<const int> state_indexes) {
  int idx = 0;
  for (int p = 0; p < game.num_players(); ++p)
    idx = idx * static_cast<int>(game.layers[p][layer].size()) + state_indexes[p];
  return idx;
}

}  // namespace

InducedMdp InduceOwnMdp(const IndependentGame& game,
                        const std::vector<PolicyTable>& profile, int player) {
  const int m = game.num_players();
  const int d = game.action_counts[player];
  InducedMdp mdp;
  mdp.player = player;
  mdp.horizon = game.horizon;
  mdp.action_count = d;
  mdp.layers = game.layers[player];
  mdp.layer_of = game.layer_of[player];
  mdp.kernel.assign(game.own_states(player), {});
  mdp.loss.assign(game.own_states(player), {});

  // Opponents' chains run independently of this player, so their layer-h
  // state distributions are their own occupancies.
  std::vector<std::vector<double>> occupancy(m);
  for (int j = 0; j < m; ++j) {
    occupancy[j].assign(game.own_states(j), 0.0);
    occupancy[j][game.layers[j][0][0]] = 1.0;
    for (int h = 0; h < game.horizon; ++h) {
      for (int s : game.layers[j][h]) {
        const double qs = occupancy[j][s];
        if (qs == 0.0) continue;
        for (int a = 0; a < game.action_counts[j]; ++a) {
          const double w = qs * profile[j][s][a];
          if (w == 0.0) continue;
          const auto& row = game.kernel[j][s][a];
          for (size_t k = 0; k < row.size(); ++k)
            occupancy[j][game.layers[j][h + 1][k]] += w * row[k];
        }
      }
    }
  }

  const JointActionSpace actions(game.action_counts);
  std::vector<int> state_indexes(m, 0);
  std::vector<int> joint_action(m, 0);
  for (int h = 0; h < game.horizon; ++h) {
    for (size_t own_k = 0; own_k < game.layers[player][h].size(); ++own_k) {
      const int s = game.layers[player][h][own_k];
      mdp.kernel[s] = game.kernel[player][s];
      mdp.loss[s].assign(d, 0.0);

      // Enumerate opponents' layer-h states by odometer.
      std::fill(state_indexes.begin(), state_indexes.end(), 0);
      state_indexes[player] = static_cast<int>(own_k);
      while (true) {
        double state_w = 1.0;
        for (int j = 0; j < m; ++j) {
          if (j == player) continue;
          state_w *= occupancy[j][game.layers[j][h][state_indexes[j]]];
        }
        if (state_w > 0.0) {
          const int js = JointStateIndex(game, h, state_indexes);
          for (int ja = 0; ja < actions.size(); ++ja) {
            actions.Decode(ja, joint_action);
            double w = state_w;
            for (int j = 0; j < m; ++j) {
              if (j == player) continue;
              w *= profile[j][game.layers[j][h][state_indexes[j]]][joint_action[j]];
            }
            if (w == 0.0) continue;
            mdp.loss[s][joint_action[player]] += w * game.loss[player][h][js][ja];
          }
        }
        // Advance the odometer over opponents only.
        int p = m - 1;
        for (; p >= 0; --p) {
          if (p == player) continue;
          if (++state_indexes[p] < static_cast<int>(game.layers[p][h].size())) break;
          state_indexes[p] = 0;
        }
        if (p < 0) break;
      }
    }
  }
  return mdp;
}

// ---- Run loops -------------------------------------------------------------

std::vector<int> LogSpacedCheckpoints(int T, int count) {
  POSR_CHECK(T >= 1, "T must be >= 1");
  const int k_max = std::min(count, T);
  std::vector<int> checkpoints;
  checkpoints.reserve(k_max);
  int prev = 0;
  for (int k = 1; k <= k_max; ++k) {
    int n = static_cast<int>(std::llround(
        std::pow(static_cast<double>(T), static_cast<double>(k) / k_max)));
    n = std::max(n, prev + 1);
    n = std::min(n, T);
    if (n <= prev) break;
    checkpoints.push_back(n);
    prev = n;
  }
  if (checkpoints.empty() || checkpoints.back() != T) checkpoints.push_back(T);
  return checkpoints;
}

namespace {

struct MetricContext {
  int H, S_bound, A_max, m;
  std::vector<int> action_counts;
  bool independent;
};

// Prefix path lengths per player: entry n = sums over t = 1..n (profiles must
// hold T+1 entries).
void PrefixPaths(const std::vector<std::vector<PolicyTable>>& profiles, int m,
                 std::vector<std::vector<double>>& path1,
                 std::vector<std::vector<double>>& path2) {
  const int T = static_cast<int>(profiles.size()) - 1;
  path1.assign(m, std::vector<double>(T + 1, 0.0));
  path2.assign(m, std::vector<double>(T + 1, 0.0));
  for (int t = 1; t <= T; ++t) {
    for (int i = 0; i < m; ++i) {
      const double d = PolicyInf1Distance(profiles[t][i], profiles[t - 1][i]);
      path1[i][t] = path1[i][t - 1] + d;
      path2[i][t] = path2[i][t - 1] + d * d;
    }
  }
}

void FillMetrics(FullInfoRunResult& run, const MetricContext& ctx) {
  const int m = ctx.m;
  const int T = run.T;
  std::vector<std::vector<double>> path1, path2;
  PrefixPaths(run.profiles, m, path1, path2);

  std::vector<std::vector<PolicyTable>> own_policies(m);
  for (int i = 0; i < m; ++i) {
    own_policies[i].reserve(T);
    for (int t = 0; t < T; ++t) own_policies[i].push_back(run.profiles[t][i]);
  }

  run.report.clear();
  run.checkpoint_residuals.clear();
  for (int n : run.checkpoints) {
    BoundCheckInput bounds;
    bounds.H = ctx.H;
    bounds.S = ctx.S_bound;
    bounds.A = ctx.A_max;
    bounds.m = m;
    bounds.T = n;
    bounds.eta = run.params.eta;
    bounds.gamma = run.params.gamma;
    bounds.epsilon = run.params.epsilon;
    bounds.action_counts = ctx.action_counts;
    bounds.independent_transitions = ctx.independent;

    for (int i = 0; i < m; ++i) {
      std::span<const InducedMdp> mdps(run.mdps[i].data(), n);
      std::span<const PolicyTable> policies(own_policies[i].data(), n);
      RegretCheckpointRow row;
      row.episode = n;
      row.player = i;
      SwapRegretResult swap;
      if (SwapFunctionCount(run.mdps[i][0]) <= kDefaultEnumerationCap) {
        swap = SwapRegretExact(mdps, policies);
      } else {
        swap = SwapRegretLowerBound(mdps, policies);
      }
      row.swap_regret = swap.value;
      row.swap_is_lower_bound = swap.lower_bound;
      row.ce_gap = swap.value / n;
      if (DeterministicPolicyCount(run.mdps[i][0]) <= kDefaultEnumerationCap) {
        row.external_regret = ExternalRegretExact(mdps, policies).value;
      } else {
        row.external_regret = std::numeric_limits<double>::quiet_NaN();
      }
      row.path1 = path1[i][n];
      row.path2 = path2[i][n];
      run.report.push_back(row);

      bounds.swap_regrets.push_back(swap.value);
      bounds.path1.push_back(path1[i][n]);
      bounds.path2.push_back(path2[i][n]);

      if (n == T && !swap.lower_bound) {
        run.decomposition_residuals.push_back(
            DecompositionResidual(mdps, policies, swap.phi));
      }
    }

    if (n == T) {
      // Per-(player, state) data for the state-level RVU rows.
      bounds.state_swap_regret.assign(m, {});
      bounds.state_l1_path2.assign(m, {});
      for (int i = 0; i < m; ++i) {
        const InducedMdp& shape = run.mdps[i][0];
        for (int h = 0; h < shape.horizon; ++h) {
          for (int s : shape.layers[h]) {
            std::vector<std::vector<double>> losses(T);
            std::vector<std::vector<double>> strategies(T);
            for (int t = 0; t < T; ++t) {
              losses[t] = run.q_tables[i][t][s];
              strategies[t] = run.profiles[t][i][s];
            }
            bounds.state_swap_regret[i].push_back(
                BanditSwapRegret(losses, strategies));
            double l1p2 = 0.0;
            for (int t = 0; t < T; ++t) {
              double l1 = 0.0;
              for (size_t a = 0; a < strategies[t].size(); ++a)
                l1 += std::abs(run.profiles[t + 1][i][s][a] - strategies[t][a]);
              l1p2 += l1 * l1;
            }
            bounds.state_l1_path2[i].push_back(l1p2);
          }
        }
      }
      run.final_residuals = BoundResiduals(bounds);
      run.checkpoint_residuals.push_back(run.final_residuals);
    } else {
      run.checkpoint_residuals.push_back(BoundResiduals(bounds));
    }
  }
}

}  // namespace

namespace {

// Shared post-simulation pipeline: recomputes the induced-MDP and exact-Q
// caches from the profile trajectory, then fills the metric tables. Works
// for stored records as well as fresh runs.
template <typename InduceFn>
FullInfoRunResult BuildFullInfoResult(
    const std::vector<std::vector<PolicyTable>>& profiles, int m,
    const ResolvedParams& params, int checkpoint_count, uint64_t seed,
    const MetricContext& ctx, InduceFn&& induce) {
  POSR_CHECK(profiles.size() >= 2, "need at least one episode plus the final profile");
  const int T = static_cast<int>(profiles.size()) - 1;
  FullInfoRunResult run;
  run.params = params;
  run.seed = seed;
  run.T = T;
  run.independent_transitions = ctx.independent;
  run.checkpoints = LogSpacedCheckpoints(T, checkpoint_count);
  run.profiles = profiles;
  run.mdps.assign(m, {});
  run.q_tables.assign(m, {});
  run.values.assign(T, std::vector<double>(m, 0.0));
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < m; ++i) {
      InducedMdp mdp = induce(profiles[t], i);
      ValueTables vt = Evaluate(mdp, profiles[t][i]);
      run.values[t][i] = vt.v[mdp.initial_state()];
      run.mdps[i].push_back(std::move(mdp));
      run.q_tables[i].push_back(std::move(vt.q));
    }
  }
  FillMetrics(run, ctx);
  return run;
}

std::vector<PolicyTable> SnapshotProfiles(const std::vector<PosrAgent>& agents) {
  std::vector<PolicyTable> profile;
  profile.reserve(agents.size());
  for (const PosrAgent& agent : agents) profile.push_back(agent.policy());
  return profile;
}

}  // namespace

FullInfoRunResult RebuildFullInfoFromProfiles(
    const MarkovGame& game, const std::vector<std::vector<PolicyTable>>& profiles,
    const ResolvedParams& params, int checkpoint_count, uint64_t seed) {
  MetricContext ctx{game.horizon, game.num_decision_states(),
                    game.max_action_count(), game.num_players(),
                    game.action_counts, false};
  return BuildFullInfoResult(
      profiles, game.num_players(), params, checkpoint_count, seed, ctx,
      [&game](const std::vector<PolicyTable>& profile, int player) {
        return InduceMdp(game, profile, player);
      });
}

FullInfoRunResult RebuildIndependentFromProfiles(
    const IndependentGame& game,
    const std::vector<std::vector<PolicyTable>>& profiles,
    const ResolvedParams& params, int checkpoint_count, uint64_t seed) {
  int s_bound = 0, a_max = 0;
  for (int i = 0; i < game.num_players(); ++i) {
    s_bound = std::max(s_bound, game.own_decision_states(i));
    a_max = std::max(a_max, game.action_counts[i]);
  }
  MetricContext ctx{game.horizon, s_bound, a_max, game.num_players(),
                    game.action_counts, true};
  return BuildFullInfoResult(
      profiles, game.num_players(), params, checkpoint_count, seed, ctx,
      [&game](const std::vector<PolicyTable>& profile, int player) {
        return InduceOwnMdp(game, profile, player);
      });
}

FullInfoRunResult RunFullInfo(const MarkovGame& game, int T,
                              const ResolvedParams& params, int checkpoint_count,
                              uint64_t seed) {
  const ValidationReport validation = ValidateGame(game);
  POSR_CHECK(validation.ok(), "invalid game: " + (validation.issues.empty()
                                                      ? std::string()
                                                      : validation.issues.front()));
  const int m = game.num_players();
  std::vector<PosrAgent> agents;
  agents.reserve(m);
  for (int i = 0; i < m; ++i)
    agents.emplace_back(AgentSpaceFor(game, i), i, params.gamma, params.eta);

  std::vector<std::vector<PolicyTable>> profiles;
  profiles.reserve(T + 1);
  for (int t = 0; t < T; ++t) {
    profiles.push_back(SnapshotProfiles(agents));
    std::vector<std::vector<std::vector<double>>> q(m);
    for (int i = 0; i < m; ++i) {
      InducedMdp mdp = InduceMdp(game, profiles.back(), i);
      q[i] = Evaluate(mdp, profiles.back()[i]).q;
    }
    for (int i = 0; i < m; ++i) agents[i].Update(q[i]);
  }
  profiles.push_back(SnapshotProfiles(agents));
  return RebuildFullInfoFromProfiles(game, profiles, params, checkpoint_count, seed);
}

FullInfoRunResult RunIndependentFullInfo(const IndependentGame& game, int T,
                                         const ResolvedParams& params,
                                         int checkpoint_count, uint64_t seed) {
  const int m = game.num_players();
  std::vector<PosrAgent> agents;
  agents.reserve(m);
  for (int i = 0; i < m; ++i) {
    AgentSpace space;
    space.num_states = game.own_states(i);
    space.horizon = game.horizon;
    space.action_count = game.action_counts[i];
    for (int h = 0; h < game.horizon; ++h)
      for (int s : game.layers[i][h]) space.decision_states.push_back(s);
    std::sort(space.decision_states.begin(), space.decision_states.end());
    agents.emplace_back(std::move(space), i, params.gamma, params.eta);
  }

  std::vector<std::vector<PolicyTable>> profiles;
  profiles.reserve(T + 1);
  for (int t = 0; t < T; ++t) {
    profiles.push_back(SnapshotProfiles(agents));
    std::vector<std::vector<std::vector<double>>> q(m);
    for (int i = 0; i < m; ++i) {
      InducedMdp mdp = InduceOwnMdp(game, profiles.back(), i);
      q[i] = Evaluate(mdp, profiles.back()[i]).q;
    }
    for (int i = 0; i < m; ++i) agents[i].Update(q[i]);
  }
  profiles.push_back(SnapshotProfiles(agents));
  return RebuildIndependentFromProfiles(game, profiles, params, checkpoint_count,
                                        seed);
}

BanditRunResult BuildBanditResult(const MarkovGame& game, BlockedRunLog log,
                                  const ResolvedParams& params,
                                  int checkpoint_count) {
  const int m = game.num_players();
  BanditRunResult run;
  run.params = params;
  run.seed = log.seed;
  run.log = std::move(log);
  const int blocks = static_cast<int>(run.log.estimates.size());
  const int B = run.log.block_length;

  // Exact Q per block for estimator accuracy accounting.
  run.exact_q.assign(blocks, std::vector<std::vector<std::vector<double>>>(m));
  for (int j = 0; j < blocks; ++j) {
    for (int i = 0; i < m; ++i) {
      InducedMdp mdp = InduceMdp(game, run.log.block_profiles[j], i);
      run.exact_q[j][i] = Evaluate(mdp, run.log.block_profiles[j][i]).q;
    }
  }

  // Materialize the per-episode view (profiles repeat within a block).
  std::vector<std::vector<PolicyTable>> profiles;
  profiles.reserve(run.log.episodes + 1);
  for (int j = 0; j < blocks; ++j)
    for (int b = 0; b < B; ++b) profiles.push_back(run.log.block_profiles[j]);
  profiles.push_back(run.log.block_profiles.back());

  std::vector<std::vector<InducedMdp>> mdps(m);
  std::vector<std::vector<PolicyTable>> own_policies(m);
  for (int i = 0; i < m; ++i) {
    mdps[i].reserve(run.log.episodes);
    own_policies[i].reserve(run.log.episodes);
    for (int j = 0; j < blocks; ++j) {
      InducedMdp mdp = InduceMdp(game, run.log.block_profiles[j], i);
      for (int b = 0; b < B; ++b) {
        mdps[i].push_back(mdp);
        own_policies[i].push_back(run.log.block_profiles[j][i]);
      }
    }
  }

  std::vector<std::vector<double>> path1, path2;
  {
    std::vector<std::vector<PolicyTable>> full(profiles.begin(), profiles.end());
    PrefixPaths(full, m, path1, path2);
  }

  run.checkpoints = LogSpacedCheckpoints(run.log.episodes, checkpoint_count);
  // Snap checkpoints to block boundaries so each row reflects whole blocks.
  for (int& n : run.checkpoints) n = std::max(B, (n / B) * B);
  run.checkpoints.erase(std::unique(run.checkpoints.begin(), run.checkpoints.end()),
                        run.checkpoints.end());

  for (int n : run.checkpoints) {
    for (int i = 0; i < m; ++i) {
      std::span<const InducedMdp> mdp_prefix(mdps[i].data(), n);
      std::span<const PolicyTable> pol_prefix(own_policies[i].data(), n);
      RegretCheckpointRow row;
      row.episode = n;
      row.player = i;
      SwapRegretResult swap;
      if (SwapFunctionCount(mdps[i][0]) <= kDefaultEnumerationCap) {
        swap = SwapRegretExact(mdp_prefix, pol_prefix);
      } else {
        swap = SwapRegretLowerBound(mdp_prefix, pol_prefix);
      }
      row.swap_regret = swap.value;
      row.swap_is_lower_bound = swap.lower_bound;
      row.ce_gap = swap.value / n;
      row.external_regret =
          DeterministicPolicyCount(mdps[i][0]) <= kDefaultEnumerationCap
              ? ExternalRegretExact(mdp_prefix, pol_prefix).value
              : std::numeric_limits<double>::quiet_NaN();
      row.path1 = path1[i][n];
      row.path2 = path2[i][n];
      run.report.push_back(row);
      if (n == run.log.episodes) run.swap_regret_full.push_back(swap.value);
    }
  }

  // Decimated sequence: one induced MDP and policy per block.
  for (int i = 0; i < m; ++i) {
    std::vector<InducedMdp> decimated;
    std::vector<PolicyTable> decimated_policies;
    for (int j = 0; j < blocks; ++j) {
      decimated.push_back(InduceMdp(game, run.log.block_profiles[j], i));
      decimated_policies.push_back(run.log.block_profiles[j][i]);
    }
    run.swap_regret_decimated.push_back(
        SwapRegretExact(decimated, decimated_policies).value);
  }
  return run;
}

BanditRunResult RunBandit(const MarkovGame& game, int T,
                          const ResolvedParams& params, int checkpoint_count,
                          uint64_t seed) {
  const ValidationReport validation = ValidateGame(game);
  POSR_CHECK(validation.ok(), "invalid game: " + (validation.issues.empty()
                                                      ? std::string()
                                                      : validation.issues.front()));
  const int m = game.num_players();
  std::vector<PosrAgent> agents;
  agents.reserve(m);
  for (int i = 0; i < m; ++i)
    agents.emplace_back(AgentSpaceFor(game, i), i, params.gamma, params.eta);
  BlockedRunLog log = RunBlocked(game, agents, T, params.block, seed);
  return BuildBanditResult(game, std::move(log), params, checkpoint_count);
}

// ---- Scripted environment runs ---------------------------------------------

double ScriptedDemoGamma(int T, int actions) {
  return std::min(1.0 / (2.0 * actions), 1.0 / std::sqrt(static_cast<double>(T)));
}

double ScriptedDemoEta(int horizon) { return 1.0 / (128.0 * horizon); }

namespace {

ScriptedRunResult FinishScriptedRun(const ScriptedNonStationaryMdp& env,
                                    std::vector<InducedMdp> mdps,
                                    std::vector<PolicyTable> policies,
                                    ScriptedRunResult run) {
  ExternalRegretResult ext = ExternalRegretExact(mdps, policies);
  run.regret = ext.value;
  run.total_loss = 0.0;
  for (double v : run.values) run.total_loss += v;
  run.best_fixed_loss = run.total_loss - ext.value;
  (void)env;
  return run;
}

}  // namespace

ScriptedRunResult RunFtrlOnScripted(const ScriptedNonStationaryMdp& env,
                                    double eta, FtrlRegularizer reg) {
  const MarkovGame& shape = env.phase1;
  AgentSpace space = AgentSpaceFor(shape, 0);
  FtrlAgent agent(space, eta, reg);
  ScriptedRunResult run;
  std::vector<InducedMdp> mdps;
  std::vector<PolicyTable> policies;
  for (int t = 1; t <= env.episodes; ++t) {
    const MarkovGame& game = env.at(t);
    const PolicyTable policy = agent.policy();
    InducedMdp mdp = InduceMdp(game, {policy}, 0);
    ValueTables vt = Evaluate(mdp, policy);
    run.values.push_back(vt.v[mdp.initial_state()]);
    run.prob_lossy_at_fork.push_back(policy[ScriptedNonStationaryMdp::kFork][1]);
    agent.Update(vt.q);
    mdps.push_back(std::move(mdp));
    policies.push_back(policy);
  }
  return FinishScriptedRun(env, std::move(mdps), std::move(policies), std::move(run));
}

ScriptedRunResult RunPosrOnScripted(const ScriptedNonStationaryMdp& env,
                                    double gamma, double eta) {
  const MarkovGame& shape = env.phase1;
  PosrAgent agent(AgentSpaceFor(shape, 0), 0, gamma, eta);
  ScriptedRunResult run;
  std::vector<InducedMdp> mdps;
  std::vector<PolicyTable> policies;
  for (int t = 1; t <= env.episodes; ++t) {
    const MarkovGame& game = env.at(t);
    const PolicyTable policy = agent.policy();
    InducedMdp mdp = InduceMdp(game, {policy}, 0);
    ValueTables vt = Evaluate(mdp, policy);
    run.values.push_back(vt.v[mdp.initial_state()]);
    run.prob_lossy_at_fork.push_back(policy[ScriptedNonStationaryMdp::kFork][1]);
    agent.Update(vt.q);
    mdps.push_back(std::move(mdp));
    policies.push_back(policy);
  }
  return FinishScriptedRun(env, std::move(mdps), std::move(policies), std::move(run));
}

FtrlDemoResult RunFtrlDemo(int T, const std::vector<double>& eta_grid) {
  FtrlDemoResult demo;
  ScriptedNonStationaryMdp env = BuildFtrlCounterexample(T);
  demo.T = env.episodes;
  demo.eta_grid = eta_grid;
  demo.variation_flat_l1 = env.variation_flat_l1;
  demo.variation_inf1 = env.variation_inf1;

  demo.ftrl.resize(2);
  for (double eta : eta_grid) {
    demo.ftrl[0].push_back(RunFtrlOnScripted(env, eta, FtrlRegularizer::kEntropy));
    demo.ftrl[1].push_back(
        RunFtrlOnScripted(env, eta, FtrlRegularizer::kLogBarrier));
  }

  demo.posr_large = RunPosrOnScripted(env, ScriptedDemoGamma(env.episodes, 2),
                                      ScriptedDemoEta(env.phase1.horizon));
  demo.small_T = std::max(30, env.episodes / 10);
  ScriptedNonStationaryMdp small_env = BuildFtrlCounterexample(demo.small_T);
  demo.small_T = small_env.episodes;
  demo.posr_small = RunPosrOnScripted(small_env, ScriptedDemoGamma(small_env.episodes, 2),
                                      ScriptedDemoEta(small_env.phase1.horizon));
  return demo;
}

}  // namespace posr
