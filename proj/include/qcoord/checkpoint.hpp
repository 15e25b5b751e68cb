// Copyright 2026 The qcoord Authors
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

/**
 * @file
 * Self-describing JSON checkpoints shared by every policy kind. Parameters
 * are stored as named real arrays (complex entries interleaved re, im) and
 * round-trip bit-exactly.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "qcoord/games.hpp"
#include "qcoord/mappo.hpp"
#include "qcoord/policies.hpp"
#include "qcoord/reinforce.hpp"

namespace qcoord {

inline constexpr int kCheckpointVersion = 1;

struct GameCheckpoint {
  std::string game;
  RendezvousAnswers answers = RendezvousAnswers::EdgeIndex;
  GameTrainConfig config;
  std::size_t step = 0;
  EntangledParameters params;
};

struct RouterCheckpoint {
  MappoConfig config;
  std::size_t step = 0;
  RouterPolicy policy;
};

using Checkpoint = std::variant<GameCheckpoint, RouterCheckpoint>;

std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);

/// Io errors on filesystem failure, InvalidArgument on schema violations.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

const char* to_string(RendezvousAnswers answers);
RendezvousAnswers parse_rendezvous_answers(const std::string& name);

}  // namespace qcoord
