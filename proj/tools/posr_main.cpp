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

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "posr/estimation.hpp"
#include "posr/experiments.hpp"
#include "posr/serialization.hpp"

namespace {

using posr::ExperimentConfig;

struct CliState {
  ExperimentConfig config;
  std::string config_path;
};

// Registers the shared flags; every ExperimentConfig field stays overridable
// from the command line.
void AddCommonOptions(CLI::App* cmd, CliState& state, bool with_game = true) {
  cmd->add_option("--config", state.config_path, "JSON config file (flags override)");
  if (with_game)
    cmd->add_option("--game", state.config.game_file, "game file (JSON)");
  cmd->add_option("--seed", state.config.seed, "root seed");
  cmd->add_option("--T", state.config.T, "number of episodes");
  cmd->add_option("--eta", state.config.eta, "step size (default: theorem formula)");
  cmd->add_option("--gamma", state.config.gamma, "simplex truncation (default: theorem formula)");
  cmd->add_option("--epsilon", state.config.epsilon, "Q-estimate target accuracy");
  cmd->add_option("--delta", state.config.delta, "confidence parameter");
  cmd->add_option("--block", state.config.block, "block length B");
  cmd->add_option("--checkpoints", state.config.checkpoints, "evaluation checkpoints per run");
  cmd->add_option("--out", state.config.out, "output directory");
  cmd->add_option("--players", state.config.generator.players, "generator: players");
  cmd->add_option("--horizon", state.config.generator.horizon, "generator: horizon");
  cmd->add_option("--states-per-layer", state.config.generator.states_per_layer,
                  "generator: states per inner layer");
  cmd->add_option("--actions", state.config.generator.actions, "generator: actions per player");
}

// Flags win over the config file: start from the file, then copy back every
// value the user actually passed on the command line.
ExperimentConfig ResolveConfig(CLI::App* cmd, CliState& state) {
  if (state.config_path.empty()) return state.config;
  const ExperimentConfig flags = state.config;
  ExperimentConfig merged =
      posr::ConfigFromJson(nlohmann::json::parse(posr::ReadTextFile(state.config_path)));
  auto given = [cmd](const std::string& name) {
    return cmd->count(name) > 0;
  };
  if (given("--game")) merged.game_file = flags.game_file;
  if (given("--seed")) merged.seed = flags.seed;
  if (given("--T")) merged.T = flags.T;
  if (given("--eta")) merged.eta = flags.eta;
  if (given("--gamma")) merged.gamma = flags.gamma;
  if (given("--epsilon")) merged.epsilon = flags.epsilon;
  if (given("--delta")) merged.delta = flags.delta;
  if (given("--block")) merged.block = flags.block;
  if (given("--checkpoints")) merged.checkpoints = flags.checkpoints;
  if (given("--out")) merged.out = flags.out;
  if (given("--players")) merged.generator.players = flags.generator.players;
  if (given("--horizon")) merged.generator.horizon = flags.generator.horizon;
  if (given("--states-per-layer"))
    merged.generator.states_per_layer = flags.generator.states_per_layer;
  if (given("--actions")) merged.generator.actions = flags.generator.actions;
  return merged;
}

posr::MarkovGame AcquireGame(const ExperimentConfig& config) {
  posr::MarkovGame game = config.game_file.empty()
                              ? posr::GenerateRandomGame(config.generator, config.seed)
                              : posr::LoadGameFile(config.game_file);
  const posr::ValidationReport report = posr::ValidateGame(game);
  if (!report.ok()) {
    std::cerr << "game failed validation:\n";
    for (const auto& issue : report.issues) std::cerr << "  " << issue << "\n";
    throw CLI::RuntimeError(2);
  }
  return game;
}

void PrintProvenance(const posr::ResolvedParams& params) {
  for (const auto& line : params.provenance) std::cout << "  " << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized no-swap-regret learning in layered Markov games"};
  app.require_subcommand(1);
  CliState state;

  auto* validate = app.add_subcommand("validate", "check a game file's structural invariants");
  std::string validate_game;
  validate->add_option("--game", validate_game, "game file (JSON)")->required();

  auto* reach = app.add_subcommand("reach", "minimum reachability over product policies");
  AddCommonOptions(reach, state);

  auto* run_full = app.add_subcommand("run-full", "full-information run, all players optimistic-OMD");
  AddCommonOptions(run_full, state);

  auto* run_bandit = app.add_subcommand("run-bandit", "blocked bandit-feedback run");
  AddCommonOptions(run_bandit, state);

  auto* ftrl_demo = app.add_subcommand("ftrl-demo", "scripted non-stationary MDP: FTRL vs optimistic OMD");
  AddCommonOptions(ftrl_demo, state, /*with_game=*/false);

  auto* run_independent = app.add_subcommand("run-independent", "independent-transition full-information run");
  AddCommonOptions(run_independent, state, /*with_game=*/false);

  auto* report_cmd = app.add_subcommand("report", "re-derive reports from a run record");
  std::string record_path, report_out = "out";
  report_cmd->add_option("--run", record_path, "run_record.json path")->required();
  report_cmd->add_option("--out", report_out, "output directory");

  std::vector<std::string> raw_args(argv + 1, argv + argc);

  try {
    app.parse(argc, argv);

    if (validate->parsed()) {
      const posr::MarkovGame game = posr::LoadGameFile(validate_game);
      const posr::ValidationReport report = posr::ValidateGame(game);
      if (report.ok()) {
        std::cout << "ok: " << game.num_decision_states() << " decision states, "
                  << game.num_players() << " players, H=" << game.horizon << "\n";
        return 0;
      }
      std::cout << report.issues.size() << " issue(s):\n";
      for (const auto& issue : report.issues) std::cout << "  " << issue << "\n";
      return 1;
    }

    if (reach->parsed()) {
      const ExperimentConfig config = ResolveConfig(reach, state);
      const posr::MarkovGame game = AcquireGame(config);
      const posr::ReachabilityResult r = posr::MinReachability(game);
      std::cout << "beta=" << r.beta << " argmin_state=" << r.argmin_state << "\n";
      for (int s = 0; s < game.num_states(); ++s)
        std::cout << "  state " << s << ": " << r.per_state[s] << "\n";
      return 0;
    }

    if (run_full->parsed()) {
      ExperimentConfig config = ResolveConfig(run_full, state);
      config.mode = "full_info";
      const posr::MarkovGame game = AcquireGame(config);
      const posr::ResolvedParams params = posr::ResolveFullInfoParams(
          game.horizon, game.num_decision_states(), game.max_action_count(),
          game.num_players(), config.T, config);
      std::cout << "run-full: T=" << config.T << " seed=" << config.seed << "\n";
      PrintProvenance(params);
      const posr::FullInfoRunResult run =
          posr::RunFullInfo(game, config.T, params, config.checkpoints, config.seed);
      posr::EmitReports(config.out, posr::RenderFullInfoReports(run, config),
                        posr::FullInfoRunRecord(run, config, &game));
      for (const auto& row : run.report) {
        if (row.episode != run.T) continue;
        std::cout << "  player " << row.player << ": swap=" << row.swap_regret
                  << " external=" << row.external_regret << " ce_gap=" << row.ce_gap
                  << (row.swap_is_lower_bound ? " (lower bound)" : "") << "\n";
      }
      std::cout << "reports written to " << config.out << "\n";
      return 0;
    }

    if (run_bandit->parsed()) {
      ExperimentConfig config = ResolveConfig(run_bandit, state);
      config.mode = "bandit_blocked";
      const posr::MarkovGame game = AcquireGame(config);
      const posr::ReachabilityResult r = posr::MinReachability(game);
      if (r.beta <= 0.0) {
        std::cerr << "reachability assumption fails: state " << r.argmin_state
                  << " has minimum reach probability 0\n";
        return 2;
      }
      const posr::ResolvedParams params = posr::ResolveBanditParams(
          game.horizon, game.num_decision_states(), game.max_action_count(),
          game.num_players(), config.T, r.beta, config);
      std::cout << "run-bandit: T=" << config.T << " seed=" << config.seed
                << " beta=" << r.beta << "\n";
      PrintProvenance(params);
      if (config.T % params.block != 0) {
        std::cout << "  note: T rounded down to " << (config.T / params.block) * params.block
                  << " (multiple of B=" << params.block << ")\n";
      }
      const posr::BanditRunResult run =
          posr::RunBandit(game, config.T, params, config.checkpoints, config.seed);
      posr::EmitReports(config.out, posr::RenderBanditReports(run, game, config),
                        posr::BanditRunRecord(run, config, game));
      for (const auto& row : run.report) {
        if (row.episode != run.log.episodes) continue;
        std::cout << "  player " << row.player << ": swap=" << row.swap_regret
                  << " ce_gap=" << row.ce_gap << "\n";
      }
      std::cout << "reports written to " << config.out << "\n";
      return 0;
    }

    if (ftrl_demo->parsed()) {
      ExperimentConfig config = ResolveConfig(ftrl_demo, state);
      config.mode = "ftrl_demo";
      const posr::FtrlDemoResult demo =
          posr::RunFtrlDemo(config.T, {0.001, 0.01, 0.1, 1.0, 10.0, 100.0});
      posr::ReportFiles files;
      files.summary_txt = posr::RenderFtrlDemoSummary(demo);
      nlohmann::json record;
      record["kind"] = "ftrl_demo";
      record["config"] = posr::ConfigToJson(config);
      posr::EmitReports(config.out, files, record);
      std::cout << files.summary_txt;
      return 0;
    }

    if (run_independent->parsed()) {
      ExperimentConfig config = ResolveConfig(run_independent, state);
      config.mode = "independent_transition";
      const posr::IndependentGame game =
          posr::GenerateIndependentGame(config.generator, config.seed);
      int s_own = 0, a_max = 0;
      for (int i = 0; i < game.num_players(); ++i) {
        s_own = std::max(s_own, game.own_decision_states(i));
        a_max = std::max(a_max, game.action_counts[i]);
      }
      const posr::ResolvedParams params = posr::ResolveIndependentParams(
          game.horizon, s_own, a_max, game.num_players(), config.T, config);
      std::cout << "run-independent: T=" << config.T << " seed=" << config.seed << "\n";
      PrintProvenance(params);
      const posr::FullInfoRunResult run = posr::RunIndependentFullInfo(
          game, config.T, params, config.checkpoints, config.seed);
      posr::EmitReports(config.out, posr::RenderFullInfoReports(run, config),
                        posr::FullInfoRunRecord(run, config, nullptr));
      for (const auto& row : run.report) {
        if (row.episode != run.T) continue;
        std::cout << "  player " << row.player << ": swap=" << row.swap_regret
                  << " ce_gap=" << row.ce_gap << "\n";
      }
      std::cout << "reports written to " << config.out << "\n";
      return 0;
    }

    if (report_cmd->parsed()) {
      const nlohmann::json record =
          nlohmann::json::parse(posr::ReadTextFile(record_path));
      const posr::RecomputedReports out = posr::RecomputeFromRecord(record);
      posr::EmitReports(report_out, out.files, nlohmann::json());
      std::cout << "recomputed " << out.mode << " reports into " << report_out << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
