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

namespace classim {

struct DemoSpec {
  int child_speakers = 8;
  int adult_speakers = 8;
  int utterances_per_speaker = 3;
  int pool_clips = 6;
  int event_clips = 3;
  int sample_rate = 16000;
  std::uint64_t seed = 1;
};

/// Writes a small synthetic corpus that exercises every stage: utterance
/// WAVs with a manifest, matching embeddings, babble and event pools, and a
/// desk-scale config.json pointing at them (output under `out/`).
void make_demo(const std::filesystem::path& dir, const DemoSpec& spec = {});

}  // namespace classim
