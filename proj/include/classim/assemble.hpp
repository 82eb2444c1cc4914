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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "classim/audio.hpp"
#include "classim/convolver.hpp"
#include "classim/manifest.hpp"
#include "classim/pairing.hpp"

namespace classim {

struct AssemblySpec {
  double overlap_probability = 0.20;
  double overlap_min_s = 0.5;
  double overlap_max_s = 1.0;
  double gap_min_s = 0.1;
  double gap_max_s = 0.5;
  double child_first_probability = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class TurnOrder { kChildFirst, kAdultFirst };
const char* to_string(TurnOrder order);

struct DialogueRecord {
  MatchedPair pair;
  TurnOrder order = TurnOrder::kChildFirst;
  // Exactly one of the two is set. Both are whole numbers of samples.
  std::optional<double> overlap_s;
  std::optional<double> gap_s;
  // Set when the drawn overlap did not fit and was redrawn.
  bool overlap_redrawn = false;
  double first_duration_s = 0.0;
  double second_duration_s = 0.0;
  double duration_s = 0.0;
  std::string transcript;  // "[child] ... [adult] ..." in speaking order
  std::uint64_t item_seed = 0;
};

struct Dialogue {
  DialogueRecord record;
  AudioBuffer audio;
};

/// Joins the two utterances with a seeded turn order and either an overlap
/// or a gap. All draws come from hash(spec.seed, item_seed).
Dialogue build_dialogue(const MatchedPair& pair, const Utterance& child,
                        const AudioBuffer& child_audio, const Utterance& adult,
                        const AudioBuffer& adult_audio, const AssemblySpec& spec,
                        std::uint64_t item_seed);

/// Speaker-tagged concatenation; both transcripts are kept verbatim.
std::string merge_transcripts(const Utterance& first, const Utterance& second);

struct MixResult {
  AudioBuffer mixed;
  // mixed = speech + noise exactly, both already scaled.
  std::vector<double> speech;
  std::vector<double> noise;
  std::size_t noise_offset = 0;
  double noise_gain = 0.0;    // applied to the raw noise segment
  double speech_scale = 1.0;  // below 1 only when the sum would clip
  bool rescaled = false;
};

/// Adds a seeded segment of `noise` (tiled when shorter) so that the
/// active-speech RMS of `clean` over the noise RMS equals snr_db.
MixResult mix_noise(const AudioBuffer& clean, const AudioBuffer& noise, double snr_db,
                    std::uint64_t item_seed, const LevelOptions& level = {});

enum class Split { kTrain = 0, kDev = 1, kTest = 2 };
const char* to_string(Split split);
Split split_from_string(const std::string& text);

struct PartitionItem {
  std::string id;
  std::string speaker_id;
  std::string source_corpus;
  double duration_s = 0.0;
  std::optional<Split> fixed_split;
};

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
  void validate() const;
};

struct SplitAssignment {
  std::map<std::string, Split> by_speaker;
  std::map<std::string, Split> by_item;
  std::array<double, 3> duration_s{};  // realized seconds per split
  std::array<double, 3> ratio() const;
};

/// Speaker-disjoint split. Fixed labels are honored verbatim; the remaining
/// speakers go, longest first, to the split furthest below its target.
SplitAssignment partition(std::span<const PartitionItem> items, const SplitRatios& ratios,
                          std::uint64_t seed);

enum class Condition { kClean, kRir, kNoise, kRirNoise };
const char* to_string(Condition condition);
Condition condition_from_string(const std::string& text);

struct NoiseTrack {
  std::string noise_id;
  AudioBuffer audio;
  // Room the track was rendered in, used by matched-acoustics mode.
  std::optional<std::string> room_id;
};

struct ConditionOptions {
  std::filesystem::path output_root;
  std::vector<Condition> conditions{Condition::kClean};
  std::uint64_t seed = 0;
  double snr_min_db = 0.0;
  double snr_max_db = 20.0;
  // rir+noise draws its noise from tracks rendered in the RIR's room.
  bool matched_acoustics = false;
  ConvolveOptions convolve;
  WavEncoding encoding = WavEncoding::kFloat32;
  LevelOptions level;
};

/// Per-item effect draws shared by every condition of one record.
struct EffectPlan {
  std::optional<std::size_t> rir_index;
  std::optional<std::size_t> noise_index;  // for the noise condition
  std::optional<std::size_t> rir_noise_index;  // for rir+noise
  double snr_db = 0.0;
  std::uint64_t mix_seed = 0;
};

EffectPlan plan_effects(const std::string& item_id, const ConditionOptions& options,
                        const RirBank* bank, std::span<const NoiseTrack> noise);

/// Renders every requested condition of every record in `manifest` to
/// `<root>/<condition>/<split>/<id>.wav` and writes
/// `<root>/manifests/<condition>_<split>.jsonl`. Relative audio paths in the
/// input resolve against manifest_dir. Returned manifests are id-ordered.
std::map<Condition, std::vector<ManifestEntry>> render_condition_set(
    const std::vector<ManifestEntry>& manifest, const std::filesystem::path& manifest_dir,
    const RirBank* bank, std::span<const NoiseTrack> noise, const ConditionOptions& options);

}  // namespace classim
