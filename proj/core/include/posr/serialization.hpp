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

#ifndef POSR_SERIALIZATION_H_
#define POSR_SERIALIZATION_H_

#include <string>

#include <json.hpp>

#include "posr/game.hpp"
#include "posr/learner.hpp"

namespace posr {

// Game file schema: horizon, layers, action_counts, transition records
// {state, joint_action, next_state_probs} and per-player loss records
// {state, joint_action, value}. Missing transition or loss entries are a
// structural error surfaced by ValidateGame, never implicit zeros.
nlohmann::json GameToJson(const MarkovGame& game);
MarkovGame GameFromJson(const nlohmann::json& j);

std::string GameToString(const MarkovGame& game);
MarkovGame GameFromString(const std::string& text);

MarkovGame LoadGameFile(const std::string& path);
void SaveGameFile(const MarkovGame& game, const std::string& path);

// Agent checkpoints carry every base iterate and hint at full precision.
nlohmann::json AgentToJson(const PosrAgent& agent);
void AgentFromJson(const nlohmann::json& j, PosrAgent& agent);

nlohmann::json PolicyTableToJson(const PolicyTable& policy);
PolicyTable PolicyTableFromJson(const nlohmann::json& j);

void WriteTextFile(const std::string& path, const std::string& content);
std::string ReadTextFile(const std::string& path);

}  // namespace posr

#endif  // POSR_SERIALIZATION_H_
