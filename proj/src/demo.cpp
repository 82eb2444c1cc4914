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

#include "classim/demo.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "classim/audio.hpp"
#include "classim/manifest.hpp"
#include "classim/pairing.hpp"
#include "classim/seed.hpp"

namespace classim {
namespace {

namespace fs = std::filesystem;

// Child line, adult line, topic. Pairs that share a topic share an
// embedding direction.
struct Line {
  const char* child;
  const char* adult;
};

constexpr Line kLines[] = {
    {"It flows to the positive end to the negative end.", "What flows in the opposite direction?"},
    {"The magnet sticks to the paper clip.", "Which objects does a magnet attract?"},
    {"The bulb lights up when the circuit is closed.", "Why does the bulb turn on?"},
    {"Plants need sunlight to make food.", "How do plants get their energy?"},
    {"The ice melted into water.", "What happens to ice when it warms up?"},
    {"The moon goes around the earth.", "What does the moon orbit?"},
    {"Sound travels through the string phone.", "How does sound move from one cup to the other?"},
    {"The heavy ball fell at the same time.", "Did the heavier object land first?"},
    {"Roots soak up water from the soil.", "Where do plants take in water?"},
    {"The battery pushes the electricity around.", "What gives the circuit its energy?"},
    {"Rocks break down into sand over time.", "How is sand formed?"},
    {"The shadow gets longer in the evening.", "Why do shadows change during the day?"},
};
constexpr int kTopics = static_cast<int>(std::size(kLines));

std::vector<double> voiced(double f0, double seconds, int rate, Rng& rng) {
  const auto n = static_cast<std::size_t>(seconds * rate);
  std::vector<double> x(n, 0.0);
  const double syll = rng.uniform(3.0, 5.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double vibrato = rng.uniform(0.5, 2.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f = f0 * (1.0 + 0.03 * std::sin(2.0 * std::numbers::pi * vibrato * t));
    acc += 2.0 * std::numbers::pi * f / rate;
    double v = 0.0;
    for (int k = 1; k <= 8; ++k) v += std::sin(k * acc) / k;
    const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * syll * t + phase);
    x[i] = v * env;
  }
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double& v : x) v *= 0.5 / peak;
  return x;
}

std::vector<double> burst(double seconds, int rate, Rng& rng) {
  const auto n = static_cast<std::size_t>(seconds * rate);
  std::vector<double> x(n);
  const double decay = rng.uniform(5.0, 20.0);
  double lp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    lp = 0.7 * lp + 0.3 * (2.0 * rng.uniform() - 1.0);
    x[i] = 0.6 * lp * std::exp(-decay * t);
  }
  return x;
}

std::vector<double> unit(std::vector<double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  for (double& x : v) x /= std::sqrt(ss);
  return v;
}

}  // namespace

void make_demo(const fs::path& dir, const DemoSpec& spec) {
  const int rate = spec.sample_rate;
  fs::create_directories(dir / "audio");
  fs::create_directories(dir / "source_pool");
  fs::create_directories(dir / "event_pool");

  constexpr std::size_t kDim = 32;
  Rng topic_rng(derive_seed(spec.seed, "demo/topics"));
  std::vector<std::vector<double>> topics(kTopics, std::vector<double>(kDim));
  for (auto& t : topics) {
    for (double& v : t) v = topic_rng.normal();
  }

  std::vector<ManifestEntry> rows;
  EmbeddingFile emb;
  emb.model_name = "demo-topic-vectors";
  emb.dim = kDim;
  auto add_speaker = [&](Role role, int s) {
    const std::string who = role == Role::kChild ? "child" : "adult";
    char spk[32];
    std::snprintf(spk, sizeof spk, "%s_spk%02d", who.c_str(), s);
    Rng rng(derive_seed(spec.seed, spk));
    const double f0 = role == Role::kChild ? rng.uniform(230.0, 300.0) : rng.uniform(100.0, 160.0);
    for (int u = 0; u < spec.utterances_per_speaker; ++u) {
      const int topic = static_cast<int>(rng.below(kTopics));
      char id[48];
      std::snprintf(id, sizeof id, "%s_u%02d", spk, u);
      const double seconds = rng.uniform(1.5, 4.0);
      write_wav(AudioBuffer(voiced(f0, seconds, rate, rng), rate),
                dir / "audio" / (std::string(id) + ".wav"), WavEncoding::kPcm16);
      ManifestEntry e;
      e.id = id;
      e.audio_path = std::string("audio/") + id + ".wav";
      e.transcript = role == Role::kChild ? kLines[topic].child : kLines[topic].adult;
      e.speaker_id = spk;
      e.role = who;
      e.source_corpus = role == Role::kChild ? "demo-children" : "demo-adults";
      rows.push_back(e);
      std::vector<double> v = topics[static_cast<std::size_t>(topic)];
      for (double& x : v) x += 0.3 * rng.normal();
      emb.records.push_back({id, role, unit(std::move(v))});
    }
  };
  for (int s = 0; s < spec.child_speakers; ++s) add_speaker(Role::kChild, s);
  for (int s = 0; s < spec.adult_speakers; ++s) add_speaker(Role::kAdult, s);
  write_manifest(rows, dir / "utterances.jsonl");
  write_embedding_file(emb, dir / "embeddings.jsonl");

  Rng pool_rng(derive_seed(spec.seed, "demo/pool"));
  for (int k = 0; k < spec.pool_clips; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "talker_%02d.wav", k);
    write_wav(AudioBuffer(voiced(pool_rng.uniform(220.0, 320.0), pool_rng.uniform(2.0, 5.0), rate,
                                 pool_rng),
                          rate),
              dir / "source_pool" / name, WavEncoding::kPcm16);
  }
  for (int k = 0; k < spec.event_clips; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "event_%02d.wav", k);
    write_wav(AudioBuffer(burst(pool_rng.uniform(0.3, 1.0), rate, pool_rng), rate),
              dir / "event_pool" / name, WavEncoding::kPcm16);
  }

  Json config = {
      {"seed", spec.seed},
      {"workers", 0},
      {"encoding", "float32"},
      {"paths",
       {{"utterances", "utterances.jsonl"},
        {"embeddings", "embeddings.jsonl"},
        {"source_pool", "source_pool"},
        {"event_pool", "event_pool"},
        {"output", "out"}}},
      {"rir_bank", {{"n_rooms", 2}, {"rir_len_s", 0.5}, {"sample_rate", 16000}}},
      {"babble",
       {{"tracks", 2},
        {"n_sources", 8},
        {"duration_s", 20.0},
        {"sample_rate", rate},
        {"waypoint_dwell_s", 5.0},
        {"event_rate_per_min", 6.0}}},
      {"conditions", {"clean", "rir", "noise", "rir+noise"}},
  };
  std::ofstream(dir / "config.json") << config.dump(2) << "\n";
}

}  // namespace classim
