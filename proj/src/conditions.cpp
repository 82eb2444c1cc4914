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

#include <algorithm>
#include <cstdint>

#include "classim/assemble.hpp"
#include "classim/error.hpp"
#include "classim/seed.hpp"

namespace classim {
namespace {

bool needs_rir(Condition c) { return c == Condition::kRir || c == Condition::kRirNoise; }
bool needs_noise(Condition c) { return c == Condition::kNoise || c == Condition::kRirNoise; }

std::string split_dir(const ManifestEntry& e) { return e.split.empty() ? "unsplit" : e.split; }

}  // namespace

EffectPlan plan_effects(const std::string& item_id, const ConditionOptions& options,
                        const RirBank* bank, std::span<const NoiseTrack> noise) {
  EffectPlan plan;
  if (bank != nullptr && !bank->rirs.empty()) {
    plan.rir_index = assign_rir(derive_seed(options.seed, "rir"), item_id, bank->rirs.size());
  }
  Rng snr_rng(derive_seed(derive_seed(options.seed, "snr"), item_id));
  plan.snr_db = snr_rng.uniform(options.snr_min_db, options.snr_max_db);
  plan.mix_seed = derive_seed(derive_seed(options.seed, "mix"), item_id);
  if (!noise.empty()) {
    Rng noise_rng(derive_seed(derive_seed(options.seed, "noise"), item_id));
    const std::uint64_t draw = noise_rng.next_u64();
    plan.noise_index = static_cast<std::size_t>(draw % noise.size());
    plan.rir_noise_index = plan.noise_index;
    if (options.matched_acoustics && plan.rir_index) {
      const std::string& room = bank->rirs[*plan.rir_index].room_id;
      std::vector<std::size_t> same_room;
      for (std::size_t k = 0; k < noise.size(); ++k) {
        if (noise[k].room_id == room) same_room.push_back(k);
      }
      require(!same_room.empty(), ErrorCode::kMissingDependency,
              "matched acoustics: no noise track rendered in " + room);
      plan.rir_noise_index = same_room[draw % same_room.size()];
    }
  }
  return plan;
}

std::map<Condition, std::vector<ManifestEntry>> render_condition_set(
    const std::vector<ManifestEntry>& manifest, const std::filesystem::path& manifest_dir,
    const RirBank* bank, std::span<const NoiseTrack> noise, const ConditionOptions& options) {
  require(options.snr_min_db <= options.snr_max_db, ErrorCode::kInvalidArgument,
          "SNR range must be ordered");
  bool want_rir = false, want_noise = false;
  for (Condition c : options.conditions) {
    want_rir = want_rir || needs_rir(c);
    want_noise = want_noise || needs_noise(c);
  }
  require(!want_rir || (bank != nullptr && !bank->rirs.empty()), ErrorCode::kMissingDependency,
          "RIR conditions requested without an RIR bank");
  require(!want_noise || !noise.empty(), ErrorCode::kMissingDependency,
          "noise conditions requested without noise tracks");

  std::vector<std::size_t> order(manifest.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return manifest[a].id < manifest[b].id; });

  const auto& root = options.output_root;
  std::optional<KernelCache> kernels;
  if (want_rir) kernels.emplace(*bank, options.convolve);

  // rendered[c][k] is the entry for the k-th record in id order.
  const std::size_t n_cond = options.conditions.size();
  std::vector<std::vector<ManifestEntry>> rendered(n_cond,
                                                   std::vector<ManifestEntry>(manifest.size()));
  std::vector<std::string> errors(manifest.size());
  const auto n = static_cast<std::int64_t>(manifest.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) {
    const ManifestEntry& item = manifest[order[static_cast<std::size_t>(k)]];
    try {
      std::filesystem::path src(item.audio_path);
      if (src.is_relative()) src = manifest_dir / src;
      const AudioBuffer clean = read_wav(src);
      const EffectPlan plan = plan_effects(item.id, options, bank, noise);
      std::optional<AudioBuffer> reverberant;
      if (want_rir) reverberant = reverberate(clean, *kernels->get(*plan.rir_index, clean.sample_rate));

      for (std::size_t ci = 0; ci < n_cond; ++ci) {
        const Condition c = options.conditions[ci];
        const std::string cname = to_string(c);
        const std::string rel = cname + "/" + split_dir(item) + "/" + item.id + ".wav";
        const auto dest = root / rel;
        ManifestEntry e = item;
        e.condition = cname;
        e.audio_path = "../" + rel;
        std::filesystem::create_directories(dest.parent_path());
        if (c == Condition::kClean) {
          std::error_code ec;
          if (!std::filesystem::equivalent(src, dest, ec)) write_wav(clean, dest, options.encoding);
        } else {
          const AudioBuffer& base = needs_rir(c) ? *reverberant : clean;
          if (needs_rir(c)) e.rir_id = bank->rirs[*plan.rir_index].rir_id;
          if (needs_noise(c)) {
            const std::size_t ni = c == Condition::kRirNoise ? *plan.rir_noise_index
                                                             : *plan.noise_index;
            const MixResult mix =
                mix_noise(base, noise[ni].audio, plan.snr_db, plan.mix_seed, options.level);
            write_wav(mix.mixed, dest, options.encoding);
            e.snr_db = plan.snr_db;
            e.noise_id = noise[ni].noise_id;
            e.noise_offset = static_cast<std::int64_t>(mix.noise_offset);
            e.noise_gain = mix.noise_gain;
            e.speech_scale = mix.speech_scale;
            if (mix.rescaled) e.flags.push_back("rescaled_to_avoid_clipping");
            e.duration_s = mix.mixed.duration_s();
          } else {
            write_wav(base, dest, options.encoding);
            e.duration_s = base.duration_s();
          }
          e.extra["effects_seed"] = options.seed;
        }
        rendered[ci][static_cast<std::size_t>(k)] = std::move(e);
      }
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(k)] = item.id + ": " + ex.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) fail(ErrorCode::kIoError, "condition rendering failed for " + e);
  }

  std::map<Condition, std::vector<ManifestEntry>> out;
  for (std::size_t ci = 0; ci < n_cond; ++ci) {
    const Condition c = options.conditions[ci];
    std::map<std::string, std::vector<ManifestEntry>> by_split;
    for (const auto& e : rendered[ci]) by_split[split_dir(e)].push_back(e);
    for (const auto& [split, entries] : by_split) {
      write_manifest(entries, root / "manifests" / (std::string(to_string(c)) + "_" + split + ".jsonl"));
    }
    out[c] = std::move(rendered[ci]);
  }
  return out;
}

}  // namespace classim
