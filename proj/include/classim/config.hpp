// Copyright 2026 The classim Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "classim/assemble.hpp"
#include "classim/babble.hpp"
#include "classim/ess.hpp"
#include "classim/manifest.hpp"
#include "classim/room.hpp"

namespace classim {

struct PipelinePaths {
  std::filesystem::path utterances;   // manifest of source utterances
  std::filesystem::path embeddings;   // embedding JSONL for those utterances
  std::filesystem::path source_pool;  // directory of talker clips for babble
  std::filesystem::path event_pool;   // directory of event clips (optional)
  std::filesystem::path recordings;   // JSONL of measured sweep recordings (optional)
  std::filesystem::path rir_bank;     // existing bank; empty means <output>/rir_bank
  std::filesystem::path output;
};

struct PipelineConfig {
  std::optional<std::uint64_t> seed;
  int workers = 0;  // 0 uses every available core
  WavEncoding encoding = WavEncoding::kFloat32;
  PipelinePaths paths;
  SweepSpec sweep;
  ExtractOptions extract;
  RirBankSpec rir_bank;
  BabbleSpec babble;
  int noise_tracks = 1;
  AssemblySpec assembly;
  SplitRatios splits;
  std::vector<Condition> conditions{Condition::kClean, Condition::kRir, Condition::kNoise,
                                    Condition::kRirNoise};
  double snr_min_db = 0.0;
  double snr_max_db = 20.0;
  bool matched_acoustics = false;

  /// Per-stage seeds fan out from the master seed.
  std::uint64_t stage_seed(std::string_view stage) const;
  std::filesystem::path rir_bank_dir() const;

  /// Module invariants. Input paths are checked separately per stage.
  void validate() const;
};

/// Parses a config tree. Unknown keys are rejected so that typos do not
/// silently fall back to defaults. Relative paths resolve against base_dir.
PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const PipelineConfig& config);

/// Applies CLASSIM_* environment variables to a config tree. A double
/// underscore descends one level: CLASSIM_BABBLE__DURATION_S=30 sets
/// babble.duration_s. Values parse as JSON when they can, else as strings.
void apply_env_overrides(Json& tree, char** envp);

/// Reads the file, applies environment overrides and parses.
PipelineConfig load_config(const std::filesystem::path& path, char** envp = nullptr);

}  // namespace classim
