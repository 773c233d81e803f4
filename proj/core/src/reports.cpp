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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "posr/experiments.hpp"
#include "posr/serialization.hpp"

namespace posr {

using nlohmann::json;

namespace {

std::string Fmt(double v, const char* spec = "%.17g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<std::string> ParamHeader(const std::string& mode, uint64_t seed, int T,
                                     const ResolvedParams& p) {
  std::vector<std::string> lines;
  lines.push_back("mode=" + mode);
  lines.push_back("seed=" + std::to_string(seed));
  lines.push_back("T=" + std::to_string(T));
  lines.push_back("eta=" + Fmt(p.eta) + " gamma=" + Fmt(p.gamma) +
                  " epsilon=" + Fmt(p.epsilon) + " delta=" + Fmt(p.delta) +
                  " B=" + std::to_string(p.block));
  for (const std::string& line : p.provenance) lines.push_back(line);
  return lines;
}

json ParamsToJson(const ResolvedParams& p) {
  return json{{"eta", p.eta},           {"gamma", p.gamma},
              {"epsilon", p.epsilon},   {"delta", p.delta},
              {"block", p.block},       {"provenance", p.provenance}};
}

ResolvedParams ParamsFromJson(const json& j) {
  ResolvedParams p;
  p.eta = j.at("eta").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.epsilon = j.at("epsilon").get<double>();
  p.delta = j.at("delta").get<double>();
  p.block = j.at("block").get<int>();
  p.provenance = j.at("provenance").get<std::vector<std::string>>();
  return p;
}

json ProfilesToJson(const std::vector<std::vector<PolicyTable>>& profiles) {
  json out = json::array();
  for (const auto& profile : profiles) {
    json per_player = json::array();
    for (const auto& table : profile) per_player.push_back(table);
    out.push_back(std::move(per_player));
  }
  return out;
}

std::vector<std::vector<PolicyTable>> ProfilesFromJson(const json& j) {
  std::vector<std::vector<PolicyTable>> profiles;
  for (const json& profile : j) {
    std::vector<PolicyTable> per_player;
    for (const json& table : profile) per_player.push_back(table.get<PolicyTable>());
    profiles.push_back(std::move(per_player));
  }
  return profiles;
}

}  // namespace

// ---- SVG -------------------------------------------------------------------

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

struct Series {
  std::vector<std::pair<double, double>> points;
  std::string label;
  std::string color;
};

void AppendPanel(std::ostringstream& svg, const std::vector<Series>& series,
                 const std::string& title, double x0, double y0, double w,
                 double h) {
  double xmax = 1.0, ymax = 1e-12;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      xmax = std::max(xmax, x);
      ymax = std::max(ymax, y);
    }
  }
  ymax *= 1.05;

  auto px = [&](double x) { return x0 + x / xmax * w; };
  auto py = [&](double y) { return y0 + h - y / ymax * h; };

  svg << "<rect x=\"" << Fmt(x0, "%.6g") << "\" y=\"" << Fmt(y0, "%.6g")
      << "\" width=\"" << Fmt(w, "%.6g") << "\" height=\"" << Fmt(h, "%.6g")
      << "\" fill=\"none\" stroke=\"#404040\"/>\n";
  svg << "<text x=\"" << Fmt(x0, "%.6g") << "\" y=\"" << Fmt(y0 - 8, "%.6g")
      << "\" font-family=\"monospace\" font-size=\"13\">" << title << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmax * k / 4.0;
    const double yv = ymax * k / 4.0;
    svg << "<text x=\"" << Fmt(px(xv) - 8, "%.6g") << "\" y=\""
        << Fmt(y0 + h + 14, "%.6g")
        << "\" font-family=\"monospace\" font-size=\"10\">" << Fmt(xv, "%.4g")
        << "</text>\n";
    svg << "<text x=\"" << Fmt(x0 - 46, "%.6g") << "\" y=\""
        << Fmt(py(yv) + 3, "%.6g")
        << "\" font-family=\"monospace\" font-size=\"10\">" << Fmt(yv, "%.3g")
        << "</text>\n";
    svg << "<line x1=\"" << Fmt(x0, "%.6g") << "\" y1=\"" << Fmt(py(yv), "%.6g")
        << "\" x2=\"" << Fmt(x0 + w, "%.6g") << "\" y2=\"" << Fmt(py(yv), "%.6g")
        << "\" stroke=\"#e0e0e0\"/>\n";
  }
  for (const Series& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points)
      svg << Fmt(px(x), "%.6g") << ',' << Fmt(py(y), "%.6g") << ' ';
    svg << "\"/>\n";
  }
  double legend_x = x0 + 8;
  for (const Series& s : series) {
    svg << "<text x=\"" << Fmt(legend_x, "%.6g") << "\" y=\""
        << Fmt(y0 + 14, "%.6g") << "\" font-family=\"monospace\" font-size=\"11\" fill=\""
        << s.color << "\">" << s.label << "</text>\n";
    legend_x += 90;
  }
}

}  // namespace

std::string RegretSvg(std::span<const RegretCheckpointRow> rows, int players) {
  std::vector<Series> swap_series(players), gap_series(players);
  for (int i = 0; i < players; ++i) {
    swap_series[i].label = "player " + std::to_string(i);
    swap_series[i].color = kPalette[i % 4];
    gap_series[i].label = swap_series[i].label;
    gap_series[i].color = swap_series[i].color;
  }
  for (const RegretCheckpointRow& r : rows) {
    swap_series[r.player].points.emplace_back(r.episode, r.swap_regret);
    gap_series[r.player].points.emplace_back(r.episode, r.ce_gap);
  }

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"560\" "
         "viewBox=\"0 0 760 560\">\n";
  svg << "<rect width=\"760\" height=\"560\" fill=\"white\"/>\n";
  AppendPanel(svg, swap_series, "cumulative swap regret vs episode", 70, 40, 650, 190);
  AppendPanel(svg, gap_series, "CE gap (swap regret / T) vs episode", 70, 310, 650, 190);
  svg << "</svg>\n";
  return svg.str();
}

// ---- Report rendering -------------------------------------------------------

ReportFiles RenderFullInfoReports(const FullInfoRunResult& run,
                                  const ExperimentConfig& config) {
  const int m = static_cast<int>(run.values.empty() ? run.profiles[0].size()
                                                    : run.values[0].size());
  const std::string mode =
      run.independent_transitions ? "independent_transition" : "full_info";
  const std::vector<std::string> header =
      ParamHeader(mode, run.seed, run.T, run.params);

  ReportFiles files;
  {
    std::ostringstream os;
    for (const auto& line : header) os << "# " << line << "\n";
    os << "episode,block,player,realized_return\n";
    for (int t = 0; t < run.T; ++t)
      for (int i = 0; i < m; ++i)
        os << (t + 1) << ',' << (t + 1) << ',' << i << ','
           << Fmt(run.values[t][i]) << "\n";
    files.run_log_csv = os.str();
  }
  files.regret_report_csv = RegretReportCsv(run.report, header);
  {
    std::ostringstream os;
    os << "posr run summary\n";
    for (const auto& line : header) os << line << "\n";
    os << "\n" << ResidualTableText(run.final_residuals);
    os << "\ndecomposition residuals (|swap value - occupancy decomposition|, "
          "tolerance 1e-8):\n";
    for (size_t i = 0; i < run.decomposition_residuals.size(); ++i)
      os << "  player " << i << ": " << Fmt(run.decomposition_residuals[i]) << "\n";
    bool any_lb = false;
    for (const auto& row : run.report) any_lb = any_lb || row.swap_is_lower_bound;
    if (any_lb)
      os << "\nnote: swap-regret enumeration exceeded the cap; reported values "
            "are labeled lower bounds.\n";
    files.summary_txt = os.str();
  }
  files.regret_svg = RegretSvg(run.report, m);
  (void)config;
  return files;
}

ReportFiles RenderBanditReports(const BanditRunResult& run, const MarkovGame& game,
                                const ExperimentConfig& config) {
  const int m = game.num_players();
  const int B = run.log.block_length;
  const std::vector<std::string> header =
      ParamHeader("bandit_blocked", run.seed, run.log.episodes, run.params);

  ReportFiles files;
  {
    std::ostringstream os;
    for (const auto& line : header) os << "# " << line << "\n";
    os << "episode,block,player,realized_return\n";
    for (int e = 0; e < run.log.episodes; ++e)
      for (int i = 0; i < m; ++i)
        os << (e + 1) << ',' << (e / B + 1) << ',' << i << ','
           << Fmt(run.log.realized_returns[e][i]) << "\n";
    files.run_log_csv = os.str();
  }
  {
    std::ostringstream os;
    for (const auto& line : header) os << "# " << line << "\n";
    os << "block,player,state,action,policy_prob,q_hat,visit_count\n";
    for (size_t j = 0; j < run.log.estimates.size(); ++j) {
      for (int i = 0; i < m; ++i) {
        const QEstimate& est = run.log.estimates[j][i];
        for (int h = 0; h < game.horizon; ++h) {
          for (int s : game.layers[h]) {
            for (int a = 0; a < game.action_counts[i]; ++a) {
              os << (j + 1) << ',' << i << ',' << s << ',' << a << ','
                 << Fmt(run.log.block_profiles[j][i][s][a]) << ','
                 << Fmt(est.q[s][a]) << ',' << est.visits[s][a] << "\n";
            }
          }
        }
      }
    }
    files.blocks_csv = os.str();
  }
  files.regret_report_csv = RegretReportCsv(run.report, header);
  {
    std::ostringstream os;
    os << "posr blocked-bandit run summary\n";
    for (const auto& line : header) os << line << "\n";
    os << "blocks=" << run.log.estimates.size() << " B=" << B
       << " episodes=" << run.log.episodes << " (requested "
       << run.log.requested_episodes << ")\n";
    os << "\nblocked-regret accounting (full = B x decimated):\n";
    for (int i = 0; i < m; ++i) {
      os << "  player " << i << ": full=" << Fmt(run.swap_regret_full[i])
         << " B*decimated=" << Fmt(B * run.swap_regret_decimated[i]) << "\n";
    }
    int unvisited_cells = 0;
    for (const auto& round : run.log.estimates)
      for (const auto& est : round) unvisited_cells += static_cast<int>(est.unvisited.size());
    os << "\nunvisited (player, block, s, a) cells: " << unvisited_cells << "\n";
    files.summary_txt = os.str();
  }
  files.regret_svg = RegretSvg(run.report, m);
  (void)config;
  return files;
}

std::string RenderFtrlDemoSummary(const FtrlDemoResult& demo) {
  std::ostringstream os;
  os << "non-stationary scripted MDP demo (kernel switch at T/3)\n";
  os << "T=" << demo.T << " small_T=" << demo.small_T << "\n";
  os << "kernel variation at the switch: flat_l1=" << Fmt(demo.variation_flat_l1)
     << " inf1=" << Fmt(demo.variation_inf1) << "\n";
  os << "optimal-in-hindsight total loss (large run): "
     << Fmt(demo.posr_large.best_fixed_loss) << "\n\n";
  os << "FTRL policy optimization (regret vs best fixed policy; floor T/6 = "
     << Fmt(demo.T / 6.0) << "):\n";
  const char* names[2] = {"entropy", "log_barrier"};
  for (int r = 0; r < 2; ++r) {
    for (size_t k = 0; k < demo.eta_grid.size(); ++k) {
      os << "  reg=" << names[r] << " eta=" << Fmt(demo.eta_grid[k])
         << " regret=" << Fmt(demo.ftrl[r][k].regret) << "\n";
    }
  }
  os << "\noptimistic-OMD policy optimization on the same environment:\n";
  os << "  T=" << demo.small_T << " regret=" << Fmt(demo.posr_small.regret)
     << " regret/T=" << Fmt(demo.posr_small.regret / demo.small_T) << "\n";
  os << "  T=" << demo.T << " regret=" << Fmt(demo.posr_large.regret)
     << " regret/T=" << Fmt(demo.posr_large.regret / demo.T) << "\n";
  return os.str();
}

// ---- Run records and emission -----------------------------------------------

json FullInfoRunRecord(const FullInfoRunResult& run, const ExperimentConfig& config,
                       const MarkovGame* game) {
  json record;
  record["kind"] =
      run.independent_transitions ? "independent_transition" : "full_info";
  record["config"] = ConfigToJson(config);
  record["seed"] = run.seed;
  record["T"] = run.T;
  record["params"] = ParamsToJson(run.params);
  if (game != nullptr) record["game"] = GameToJson(*game);
  record["profiles"] = ProfilesToJson(run.profiles);
  return record;
}

json BanditRunRecord(const BanditRunResult& run, const ExperimentConfig& config,
                     const MarkovGame& game) {
  json record;
  record["kind"] = "bandit_blocked";
  record["config"] = ConfigToJson(config);
  record["seed"] = run.seed;
  record["params"] = ParamsToJson(run.params);
  record["game"] = GameToJson(game);
  record["block_length"] = run.log.block_length;
  record["episodes"] = run.log.episodes;
  record["requested_episodes"] = run.log.requested_episodes;
  record["block_profiles"] = ProfilesToJson(run.log.block_profiles);
  json estimates = json::array();
  for (const auto& round : run.log.estimates) {
    json per_player = json::array();
    for (const QEstimate& est : round) {
      per_player.push_back({{"q", est.q}, {"visits", est.visits},
                            {"unvisited", est.unvisited}});
    }
    estimates.push_back(std::move(per_player));
  }
  record["estimates"] = std::move(estimates);
  record["realized_returns"] = run.log.realized_returns;
  return record;
}

void EmitReports(const std::string& out_dir, const ReportFiles& files,
                 const json& run_record) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  WriteTextFile((dir / "run_log.csv").string(), files.run_log_csv);
  if (!files.blocks_csv.empty())
    WriteTextFile((dir / "blocks.csv").string(), files.blocks_csv);
  WriteTextFile((dir / "regret_report.csv").string(), files.regret_report_csv);
  WriteTextFile((dir / "summary.txt").string(), files.summary_txt);
  if (!files.regret_svg.empty())
    WriteTextFile((dir / "regret.svg").string(), files.regret_svg);
  if (!run_record.is_null())
    WriteTextFile((dir / "run_record.json").string(), run_record.dump(1) + "\n");
}

RecomputedReports RecomputeFromRecord(const json& record) {
  RecomputedReports out;
  out.mode = record.at("kind").get<std::string>();
  const ExperimentConfig config = ConfigFromJson(record.at("config"));
  const ResolvedParams params = ParamsFromJson(record.at("params"));

  if (out.mode == "full_info") {
    const MarkovGame game = GameFromJson(record.at("game"));
    const auto profiles = ProfilesFromJson(record.at("profiles"));
    FullInfoRunResult run = RebuildFullInfoFromProfiles(
        game, profiles, params, config.checkpoints,
        record.at("seed").get<uint64_t>());
    out.files = RenderFullInfoReports(run, config);
  } else if (out.mode == "independent_transition") {
    const IndependentGame game =
        GenerateIndependentGame(config.generator, config.seed);
    const auto profiles = ProfilesFromJson(record.at("profiles"));
    FullInfoRunResult run = RebuildIndependentFromProfiles(
        game, profiles, params, config.checkpoints,
        record.at("seed").get<uint64_t>());
    out.files = RenderFullInfoReports(run, config);
  } else if (out.mode == "bandit_blocked") {
    const MarkovGame game = GameFromJson(record.at("game"));
    BlockedRunLog log;
    log.seed = record.at("seed").get<uint64_t>();
    log.block_length = record.at("block_length").get<int>();
    log.episodes = record.at("episodes").get<int>();
    log.requested_episodes = record.at("requested_episodes").get<int>();
    log.block_profiles = ProfilesFromJson(record.at("block_profiles"));
    for (const json& round : record.at("estimates")) {
      std::vector<QEstimate> per_player;
      for (const json& est : round) {
        QEstimate q;
        q.q = est.at("q").get<std::vector<std::vector<double>>>();
        q.visits = est.at("visits").get<std::vector<std::vector<int>>>();
        q.unvisited = est.at("unvisited").get<std::vector<std::pair<int, int>>>();
        per_player.push_back(std::move(q));
      }
      log.estimates.push_back(std::move(per_player));
    }
    log.realized_returns =
        record.at("realized_returns").get<std::vector<std::vector<double>>>();
    BanditRunResult run =
        BuildBanditResult(game, std::move(log), params, config.checkpoints);
    out.files = RenderBanditReports(run, game, config);
  } else if (out.mode == "ftrl_demo") {
    FtrlDemoResult demo = RunFtrlDemo(
        config.T, {0.001, 0.01, 0.1, 1.0, 10.0, 100.0});
    out.files.summary_txt = RenderFtrlDemoSummary(demo);
  } else {
    POSR_CHECK(false, "unknown run record kind: " + out.mode);
  }
  return out;
}

}  // namespace posr
