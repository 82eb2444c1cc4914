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

#include "classim/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "classim/error.hpp"
#include "classim/seed.hpp"

namespace classim {

void AssemblySpec::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  require(prob(overlap_probability) && prob(child_first_probability), ErrorCode::kInvalidArgument,
          "probabilities must lie in [0, 1]");
  require(overlap_min_s > 0.0 && overlap_max_s >= overlap_min_s, ErrorCode::kInvalidArgument,
          "overlap range must satisfy max >= min > 0");
  require(gap_min_s >= 0.0 && gap_max_s >= gap_min_s, ErrorCode::kInvalidArgument,
          "gap range must satisfy max >= min >= 0");
}

const char* to_string(TurnOrder order) {
  return order == TurnOrder::kChildFirst ? "child_first" : "adult_first";
}

std::string merge_transcripts(const Utterance& first, const Utterance& second) {
  return std::string("[") + to_string(first.role) + "] " + first.transcript + " [" +
         to_string(second.role) + "] " + second.transcript;
}

Dialogue build_dialogue(const MatchedPair& pair, const Utterance& child,
                        const AudioBuffer& child_audio, const Utterance& adult,
                        const AudioBuffer& adult_audio, const AssemblySpec& spec,
                        std::uint64_t item_seed) {
  spec.validate();
  require(!child_audio.empty() && !adult_audio.empty(), ErrorCode::kEmptyAudio,
          "dialogue turns must be non-empty");
  require(child_audio.sample_rate == adult_audio.sample_rate, ErrorCode::kSampleRateMismatch,
          "child and adult audio differ in sample rate");
  const int fs = child_audio.sample_rate;
  Rng rng(mix_seed(spec.seed, item_seed));

  Dialogue d;
  DialogueRecord& r = d.record;
  r.pair = pair;
  r.item_seed = item_seed;
  r.order = rng.bernoulli(spec.child_first_probability) ? TurnOrder::kChildFirst
                                                        : TurnOrder::kAdultFirst;
  const bool child_first = r.order == TurnOrder::kChildFirst;
  const AudioBuffer& a = child_first ? child_audio : adult_audio;
  const AudioBuffer& b = child_first ? adult_audio : child_audio;
  r.transcript = child_first ? merge_transcripts(child, adult) : merge_transcripts(adult, child);

  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const bool overlapped = rng.bernoulli(spec.overlap_probability);
  // Both draws are consumed on every path so later draws never shift.
  const double ov_draw = rng.uniform(spec.overlap_min_s, spec.overlap_max_s);
  const double gap_draw = rng.uniform(spec.gap_min_s, spec.gap_max_s);

  std::size_t start2 = 0;
  if (overlapped) {
    auto ov = static_cast<std::size_t>(std::llround(ov_draw * fs));
    const std::size_t shortest = std::min(n1, n2);
    if (ov >= shortest) {
      // Redraw uniformly inside (0, shortest) samples.
      r.overlap_redrawn = true;
      ov = shortest >= 2 ? 1 + static_cast<std::size_t>(rng.below(shortest - 1)) : 0;
    }
    r.overlap_s = static_cast<double>(ov) / fs;
    start2 = n1 - ov;
  } else {
    const auto gap = static_cast<std::size_t>(std::llround(gap_draw * fs));
    r.gap_s = static_cast<double>(gap) / fs;
    start2 = n1 + gap;
  }

  std::vector<double> out(start2 + n2, 0.0);
  std::copy(a.samples.begin(), a.samples.end(), out.begin());
  for (std::size_t i = 0; i < n2; ++i) out[start2 + i] += b.samples[i];
  r.first_duration_s = static_cast<double>(n1) / fs;
  r.second_duration_s = static_cast<double>(n2) / fs;
  r.duration_s = static_cast<double>(out.size()) / fs;
  d.audio = AudioBuffer(std::move(out), fs);
  return d;
}

MixResult mix_noise(const AudioBuffer& clean, const AudioBuffer& noise, double snr_db,
                    std::uint64_t item_seed, const LevelOptions& level) {
  require(!clean.empty(), ErrorCode::kEmptyAudio, "clean signal is empty");
  require(!noise.empty(), ErrorCode::kEmptyAudio, "noise track is empty");
  require(clean.sample_rate == noise.sample_rate, ErrorCode::kSampleRateMismatch,
          "speech and noise differ in sample rate");
  require(std::isfinite(snr_db), ErrorCode::kInvalidArgument, "SNR must be finite");
  const LevelReport speech_level = measure_level(clean, level);
  require(speech_level.active_rms > 0.0, ErrorCode::kSilentInput,
          "clean signal is silent; SNR is undefined");

  const std::size_t n = clean.size();
  const std::size_t m = noise.size();
  Rng rng(derive_seed(item_seed, "noise-offset"));
  MixResult out;
  out.noise_offset = static_cast<std::size_t>(m >= n ? rng.below(m - n + 1) : rng.below(m));
  out.noise.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.noise[i] = noise.samples[(out.noise_offset + i) % m];
  const double noise_rms = rms(out.noise);
  require(noise_rms > 0.0, ErrorCode::kSilentInput, "noise segment is silent");

  double gain = speech_level.active_rms / (noise_rms * db_to_gain(snr_db));
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    peak = std::max(peak, std::abs(clean.samples[i] + gain * out.noise[i]));
  }
  if (peak > 1.0) {
    out.rescaled = true;
    out.speech_scale = 0.99 / peak;
    gain *= out.speech_scale;
  }
  out.noise_gain = gain;
  out.speech.resize(n);
  std::vector<double> mixed(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.speech[i] = out.speech_scale * clean.samples[i];
    out.noise[i] *= gain;
    mixed[i] = out.speech[i] + out.noise[i];
  }
  out.mixed = AudioBuffer(std::move(mixed), clean.sample_rate);
  return out;
}

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "dev") return Split::kDev;
  if (text == "test") return Split::kTest;
  fail(ErrorCode::kInvalidArgument, "unknown split '" + text + "'");
}

void SplitRatios::validate() const {
  require(train >= 0.0 && dev >= 0.0 && test >= 0.0, ErrorCode::kInvalidArgument,
          "split ratios must be non-negative");
  require(std::abs(train + dev + test - 1.0) < 1e-6, ErrorCode::kInvalidArgument,
          "split ratios must sum to 1");
}

std::array<double, 3> SplitAssignment::ratio() const {
  const double total = duration_s[0] + duration_s[1] + duration_s[2];
  if (total <= 0.0) return {0.0, 0.0, 0.0};
  return {duration_s[0] / total, duration_s[1] / total, duration_s[2] / total};
}

SplitAssignment partition(std::span<const PartitionItem> items, const SplitRatios& ratios,
                          std::uint64_t seed) {
  ratios.validate();
  struct Speaker {
    std::string id;
    double duration = 0.0;
    std::optional<Split> fixed;
    std::uint64_t key = 0;
  };
  std::map<std::string, Speaker> speakers;
  double total = 0.0;
  for (const auto& it : items) {
    require(!it.speaker_id.empty(), ErrorCode::kInvalidArgument,
            "item '" + it.id + "' has no speaker_id");
    require(it.duration_s >= 0.0, ErrorCode::kInvalidArgument,
            "item '" + it.id + "' has a negative duration");
    auto& sp = speakers[it.speaker_id];
    sp.id = it.speaker_id;
    sp.duration += it.duration_s;
    total += it.duration_s;
    if (it.fixed_split) {
      require(!sp.fixed || *sp.fixed == *it.fixed_split, ErrorCode::kContradictorySplit,
              "speaker '" + it.speaker_id + "' carries more than one fixed split");
      sp.fixed = it.fixed_split;
    }
  }

  SplitAssignment out;
  const std::array<double, 3> target{ratios.train * total, ratios.dev * total,
                                     ratios.test * total};
  std::vector<Speaker*> open;
  for (auto& [id, sp] : speakers) {
    if (sp.fixed) {
      out.by_speaker[id] = *sp.fixed;
      out.duration_s[static_cast<std::size_t>(*sp.fixed)] += sp.duration;
    } else {
      sp.key = derive_seed(seed, id);
      open.push_back(&sp);
    }
  }
  // Longest first keeps the greedy fill tight; the seeded key breaks ties
  // so that equal-length speakers are not assigned in name order.
  std::sort(open.begin(), open.end(), [](const Speaker* a, const Speaker* b) {
    if (a->duration != b->duration) return a->duration > b->duration;
    if (a->key != b->key) return a->key < b->key;
    return a->id < b->id;
  });
  for (Speaker* sp : open) {
    std::size_t best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < 3; ++k) {
      const double deficit = target[k] - out.duration_s[k];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = k;
      }
    }
    out.by_speaker[sp->id] = static_cast<Split>(best);
    out.duration_s[best] += sp->duration;
  }
  for (const auto& it : items) out.by_item[it.id] = out.by_speaker.at(it.speaker_id);
  return out;
}

const char* to_string(Condition condition) {
  switch (condition) {
    case Condition::kClean: return "clean";
    case Condition::kRir: return "rir";
    case Condition::kNoise: return "noise";
    case Condition::kRirNoise: return "rir+noise";
  }
  return "clean";
}

Condition condition_from_string(const std::string& text) {
  if (text == "clean") return Condition::kClean;
  if (text == "rir") return Condition::kRir;
  if (text == "noise") return Condition::kNoise;
  if (text == "rir+noise") return Condition::kRirNoise;
  fail(ErrorCode::kInvalidArgument, "unknown condition '" + text + "'");
}

}  // namespace classim
