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

#include <functional>
#include <string>
#include <vector>

#include "classim/config.hpp"

namespace classim {

struct StageReport {
  std::string stage;
  std::size_t items = 0;
  std::uint64_t seed = 0;
  Json detail = Json::object();
};

using StageLogger = std::function<void(const Json&)>;

/// Every stage name accepted by run_stage, in pipeline order where it applies.
const std::vector<std::string>& stage_names();

/// `pipeline` expands to rir-bank, babble, partition, pair, assemble, mix.
std::vector<std::string> expand_stage(const std::string& name);

/// Input files a stage reads, checked before anything runs. For `pipeline`
/// only the external inputs are listed.
std::vector<std::filesystem::path> stage_inputs(const std::string& name,
                                                const PipelineConfig& config);

/// Throws kFileNotFound naming every missing input.
void check_stage_inputs(const std::string& name, const PipelineConfig& config);

/// What a stage would do, without touching the file system.
Json stage_plan(const std::string& name, const PipelineConfig& config);

StageReport run_stage(const std::string& name, const PipelineConfig& config);

/// Runs each expanded stage as a barrier, logging one line per stage.
std::vector<StageReport> run_pipeline(const std::string& name, const PipelineConfig& config,
                                      const StageLogger& log);

// Output layout under paths.output.
namespace layout {
std::filesystem::path sweep_dir(const PipelineConfig& c);
std::filesystem::path measured_dir(const PipelineConfig& c);
std::filesystem::path noise_dir(const PipelineConfig& c);
std::filesystem::path split_manifest(const PipelineConfig& c);
std::filesystem::path pairs_file(const PipelineConfig& c);
std::filesystem::path manifests_dir(const PipelineConfig& c);
}  // namespace layout

/// Sorted WAV files of a directory, resampled to `sample_rate`.
std::vector<AudioBuffer> load_pool(const std::filesystem::path& dir, int sample_rate);

}  // namespace classim
