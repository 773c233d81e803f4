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

#include "posr/serialization.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace posr {

using nlohmann::json;

json GameToJson(const MarkovGame& game) {
  json j;
  j["horizon"] = game.horizon;
  j["layers"] = game.layers;
  j["action_counts"] = game.action_counts;

  const JointActionSpace space = game.joint_actions();
  std::vector<int> actions(game.num_players());
  json transition = json::array();
  for (int h = 0; h < game.horizon; ++h) {
    for (int s : game.layers[h]) {
      for (int ja = 0; ja < space.size(); ++ja) {
        space.Decode(ja, actions);
        json rec;
        rec["state"] = s;
        rec["joint_action"] = actions;
        json probs = json::object();
        for (size_t k = 0; k < game.layers[h + 1].size(); ++k)
          probs[std::to_string(game.layers[h + 1][k])] = game.transition[s][ja][k];
        rec["next_state_probs"] = std::move(probs);
        transition.push_back(std::move(rec));
      }
    }
  }
  j["transition"] = std::move(transition);

  json losses = json::array();
  for (int i = 0; i < game.num_players(); ++i) {
    json per_player = json::array();
    for (int h = 0; h < game.horizon; ++h) {
      for (int s : game.layers[h]) {
        for (int ja = 0; ja < space.size(); ++ja) {
          space.Decode(ja, actions);
          json rec;
          rec["state"] = s;
          rec["joint_action"] = actions;
          rec["value"] = game.losses[i][s][ja];
          per_player.push_back(std::move(rec));
        }
      }
    }
    losses.push_back(std::move(per_player));
  }
  j["losses"] = std::move(losses);
  return j;
}

MarkovGame GameFromJson(const json& j) {
  MarkovGame game;
  game.horizon = j.at("horizon").get<int>();
  game.layers = j.at("layers").get<std::vector<std::vector<int>>>();
  game.action_counts = j.at("action_counts").get<std::vector<int>>();
  game.ReindexLayers();

  const JointActionSpace space = game.joint_actions();
  const int n = game.num_states();
  game.transition.assign(n, {});
  game.losses.assign(game.num_players(),
                     std::vector<std::vector<double>>(n));

  for (const json& rec : j.at("transition")) {
    const int s = rec.at("state").get<int>();
    POSR_CHECK(s >= 0 && s < n, "transition record references unknown state");
    const int h = game.layer_of[s];
    POSR_CHECK(h < game.horizon, "transition record on the terminal layer");
    const auto actions = rec.at("joint_action").get<std::vector<int>>();
    POSR_CHECK(static_cast<int>(actions.size()) == game.num_players(),
               "joint_action of wrong arity");
    const int ja = space.Encode(actions);
    if (game.transition[s].empty())
      game.transition[s].assign(space.size(), {});
    POSR_CHECK(game.transition[s][ja].empty(), "duplicate transition record");
    std::vector<double> row(game.layers[h + 1].size(), 0.0);
    for (const auto& [key, value] : rec.at("next_state_probs").items()) {
      const int next = std::stoi(key);
      POSR_CHECK(next >= 0 && next < n && game.layer_of[next] == h + 1,
                 "next_state_probs references a state outside the next layer");
      row[game.index_in_layer[next]] = value.get<double>();
    }
    game.transition[s][ja] = std::move(row);
  }

  const json& losses = j.at("losses");
  POSR_CHECK(static_cast<int>(losses.size()) == game.num_players(),
             "losses must list one table per player");
  for (int i = 0; i < game.num_players(); ++i) {
    for (const json& rec : losses[i]) {
      const int s = rec.at("state").get<int>();
      POSR_CHECK(s >= 0 && s < n, "loss record references unknown state");
      const auto actions = rec.at("joint_action").get<std::vector<int>>();
      const int ja = space.Encode(actions);
      if (game.losses[i][s].empty())
        game.losses[i][s].assign(space.size(),
                                 std::numeric_limits<double>::quiet_NaN());
      game.losses[i][s][ja] = rec.at("value").get<double>();
    }
  }
  // NaN placeholders (omitted loss entries) trip ValidateGame's range check.
  return game;
}

std::string GameToString(const MarkovGame& game) {
  return GameToJson(game).dump(2) + "\n";
}

MarkovGame GameFromString(const std::string& text) {
  return GameFromJson(json::parse(text));
}

MarkovGame LoadGameFile(const std::string& path) {
  return GameFromString(ReadTextFile(path));
}

void SaveGameFile(const MarkovGame& game, const std::string& path) {
  WriteTextFile(path, GameToString(game));
}

json PolicyTableToJson(const PolicyTable& policy) {
  return json(policy);
}

PolicyTable PolicyTableFromJson(const json& j) {
  return j.get<PolicyTable>();
}

json AgentToJson(const PosrAgent& agent) {
  json j;
  j["player"] = agent.player();
  j["gamma"] = agent.gamma();
  j["eta"] = agent.eta();
  j["action_count"] = agent.space().action_count;
  json states = json::array();
  for (int s : agent.space().decision_states) {
    json st;
    st["state"] = s;
    st["policy"] = agent.policy()[s];
    json bases = json::array();
    for (int a = 0; a < agent.space().action_count; ++a) {
      const OomdBase& b = agent.base(s, a);
      bases.push_back({{"primary", b.primary},
                       {"intermediate", b.intermediate},
                       {"prev_loss", b.prev_loss}});
    }
    st["bases"] = std::move(bases);
    states.push_back(std::move(st));
  }
  j["states"] = std::move(states);
  return j;
}

void AgentFromJson(const json& j, PosrAgent& agent) {
  POSR_CHECK(j.at("player").get<int>() == agent.player(), "player mismatch");
  POSR_CHECK(j.at("action_count").get<int>() == agent.space().action_count,
             "action count mismatch");
  for (const json& st : j.at("states")) {
    const int s = st.at("state").get<int>();
    agent.mutable_policy()[s] = st.at("policy").get<std::vector<double>>();
    const json& bases = st.at("bases");
    for (int a = 0; a < agent.space().action_count; ++a) {
      OomdBase& b = agent.mutable_bases()[s][a];
      b.primary = bases[a].at("primary").get<std::vector<double>>();
      b.intermediate = bases[a].at("intermediate").get<std::vector<double>>();
      b.prev_loss = bases[a].at("prev_loss").get<std::vector<double>>();
    }
  }
}

void WriteTextFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  POSR_CHECK(out.good(), "cannot open for writing: " + path);
  out << content;
  out.close();
  POSR_CHECK(out.good(), "write failed: " + path);
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  POSR_CHECK(in.good(), "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace posr
