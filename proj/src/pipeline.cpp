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

#include "classim/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>

#include "classim/error.hpp"
#include "classim/pairing.hpp"
#include "classim/rir_bank.hpp"
#include "classim/seed.hpp"

namespace classim {

namespace fs = std::filesystem;

namespace layout {
fs::path sweep_dir(const PipelineConfig& c) { return c.paths.output / "sweep"; }
fs::path measured_dir(const PipelineConfig& c) { return c.paths.output / "measured_rirs"; }
fs::path noise_dir(const PipelineConfig& c) { return c.paths.output / "babble"; }
fs::path split_manifest(const PipelineConfig& c) {
  return c.paths.output / "splits" / "utterances.jsonl";
}
fs::path pairs_file(const PipelineConfig& c) { return c.paths.output / "pairs" / "pairs.jsonl"; }
fs::path manifests_dir(const PipelineConfig& c) { return c.paths.output / "manifests"; }
}  // namespace layout

namespace {

RirBankSpec bank_spec(const PipelineConfig& c) {
  RirBankSpec s = c.rir_bank;
  s.seed = c.stage_seed("rir-bank");
  return s;
}

std::string dialogue_id(const MatchedPair& p) { return "dlg_" + p.child_id + "__" + p.adult_id; }

std::vector<ManifestEntry> read_manifest_abs(const fs::path& path) {
  auto rows = read_manifest(path);
  for (auto& r : rows) r.audio_path = fs::absolute(resolve_audio_path(path, r.audio_path)).string();
  return rows;
}

// ---- stages ---------------------------------------------------------------

StageReport sweep_gen(const PipelineConfig& c) {
  StageReport rep{"sweep-gen", 2, 0, {}};
  const fs::path dir = layout::sweep_dir(c);
  fs::create_directories(dir);
  write_wav(generate_sweep(c.sweep), dir / "sweep.wav", WavEncoding::kFloat32);
  write_wav(inverse_filter(c.sweep), dir / "inverse.wav", WavEncoding::kFloat32);
  Json meta = {{"f1", c.sweep.f1},
               {"f2", c.sweep.f2},
               {"duration_s", c.sweep.duration_s},
               {"sample_rate", c.sweep.sample_rate},
               {"fade_ms", c.sweep.fade_ms},
               {"rate_constant_s", c.sweep.rate_constant()},
               {"length", c.sweep.length()}};
  write_jsonl({meta}, dir / "sweep.json");
  rep.detail["dir"] = dir.string();
  return rep;
}

StageReport rir_extract(const PipelineConfig& c) {
  StageReport rep{"rir-extract", 0, 0, {}};
  RirBank bank;
  for (const Json& j : read_jsonl(c.paths.recordings)) {
    RirGeometry meta;
    fs::path path;
    try {
      path = j.at("path").get<std::string>();
      meta.rir_id = j.at("rir_id").get<std::string>();
      meta.room_id = j.value("room_id", "");
      if (j.contains("source_pos")) meta.source_pos = vec3_from_json(j["source_pos"]);
      if (j.contains("receiver_pos")) meta.receiver_pos = vec3_from_json(j["receiver_pos"]);
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::kMalformedFile, std::string("recordings list: ") + ex.what());
    }
    if (path.is_relative()) path = c.paths.recordings.parent_path() / path;
    const Extraction ex = extract_rir(read_wav(path), c.sweep, c.extract, meta);
    bank.rirs.push_back(ex.rir);
  }
  write_rir_bank(bank, layout::measured_dir(c), c.encoding == WavEncoding::kPcm16
                                                   ? WavEncoding::kPcm16
                                                   : WavEncoding::kFloat32);
  rep.items = bank.rirs.size();
  return rep;
}

StageReport rir_bank(const PipelineConfig& c) {
  const RirBankSpec spec = bank_spec(c);
  const RirBank bank = generate_rir_bank(spec);
  write_rir_bank(bank, c.rir_bank_dir(), WavEncoding::kFloat32);
  StageReport rep{"rir-bank", bank.rirs.size(), spec.seed, {}};
  rep.detail["rooms"] = bank.rooms.size();
  rep.detail["dir"] = c.rir_bank_dir().string();
  return rep;
}

StageReport babble(const PipelineConfig& c) {
  const std::uint64_t seed = c.stage_seed("babble");
  StageReport rep{"babble", 0, seed, {}};
  const int rate = c.babble.sample_rate;
  const std::vector<AudioBuffer> sources =
      c.babble.n_sources > 0 ? load_pool(c.paths.source_pool, rate) : std::vector<AudioBuffer>{};
  const std::vector<AudioBuffer> events =
      c.babble.event_rate_per_min > 0 ? load_pool(c.paths.event_pool, rate)
                                      : std::vector<AudioBuffer>{};
  RirBank bank;
  if (c.matched_acoustics) bank = read_rir_bank(c.rir_bank_dir());

  const fs::path dir = layout::noise_dir(c);
  fs::create_directories(dir);
  std::vector<Json> index;
  for (int t = 0; t < c.noise_tracks; ++t) {
    BabbleSpec spec = c.babble;
    spec.seed = derive_seed(seed, "track/" + std::to_string(t));
    if (c.matched_acoustics) {
      // Render inside a bank room, moving between its measurement positions.
      require(!bank.rooms.empty(), ErrorCode::kMissingDependency,
              "matched acoustics needs a bank with room geometry");
      spec.room = bank.rooms[static_cast<std::size_t>(t) % bank.rooms.size()];
      spec.listener_waypoints.clear();
      for (const auto& r : bank.rirs) {
        if (r.room_id == spec.room.room_id &&
            std::find(spec.listener_waypoints.begin(), spec.listener_waypoints.end(),
                      r.receiver_pos) == spec.listener_waypoints.end()) {
          spec.listener_waypoints.push_back(r.receiver_pos);
        }
      }
    }
    char name[32];
    std::snprintf(name, sizeof name, "babble_%03d", t);
    const BabbleMix mix = synthesize_babble(spec, sources, events);
    write_wav(mix.audio, dir / (std::string(name) + ".wav"), c.encoding);
    Json sidecar = babble_sidecar(spec, mix);
    sidecar["noise_id"] = name;
    write_jsonl({sidecar}, dir / (std::string(name) + ".json"));
    Json entry = {{"noise_id", name},
                  {"path", std::string(name) + ".wav"},
                  {"seed", spec.seed},
                  {"duration_s", spec.duration_s},
                  {"room_id", spec.room.room_id}};
    index.push_back(entry);
  }
  write_jsonl(index, dir / "index.jsonl");
  rep.items = index.size();
  return rep;
}

StageReport partition_stage(const PipelineConfig& c) {
  const std::uint64_t seed = c.stage_seed("partition");
  auto rows = read_manifest_abs(c.paths.utterances);
  std::vector<PartitionItem> items;
  items.reserve(rows.size());
  for (auto& r : rows) {
    if (!r.duration_s) r.duration_s = read_wav(r.audio_path).duration_s();
    PartitionItem it{r.id, r.speaker_id, r.source_corpus.value_or(""), *r.duration_s, {}};
    if (!r.split.empty()) it.fixed_split = split_from_string(r.split);
    items.push_back(std::move(it));
  }
  const SplitAssignment a = partition(items, c.splits, seed);
  for (auto& r : rows) r.split = to_string(a.by_item.at(r.id));
  write_manifest(rows, layout::split_manifest(c));
  const auto ratio = a.ratio();
  StageReport rep{"partition", rows.size(), seed, {}};
  rep.detail = {{"speakers", a.by_speaker.size()},
                {"duration_s", {a.duration_s[0], a.duration_s[1], a.duration_s[2]}},
                {"ratio", {ratio[0], ratio[1], ratio[2]}}};
  write_jsonl({rep.detail}, layout::split_manifest(c).parent_path() / "summary.json");
  return rep;
}

StageReport pair_stage(const PipelineConfig& c) {
  const auto rows = read_manifest(layout::split_manifest(c));
  const EmbeddingFile emb = read_embedding_file(c.paths.embeddings);
  const auto utts = normalize_embeddings(utterances_from_manifest(rows, emb));
  std::map<std::string, std::string> split_of;
  for (const auto& r : rows) split_of[r.id] = r.split;

  std::vector<Json> pairs, unmatched;
  for (const char* split : {"train", "dev", "test"}) {
    std::vector<Utterance> children, adults;
    for (const auto& u : utts) {
      if (split_of[u.id] != split) continue;
      (u.role == Role::kChild ? children : adults).push_back(u);
    }
    const MatchResult m = greedy_match(children, adults);
    for (std::size_t k = 0; k < m.pairs.size(); ++k) {
      const auto& p = m.pairs[k];
      pairs.push_back({{"child_id", p.child_id},
                       {"adult_id", p.adult_id},
                       {"similarity", p.similarity},
                       {"split", split},
                       {"rank", k}});
    }
    for (const auto& id : m.unmatched_children) {
      unmatched.push_back({{"id", id}, {"role", "child"}, {"split", split}});
    }
    for (const auto& id : m.unmatched_adults) {
      unmatched.push_back({{"id", id}, {"role", "adult"}, {"split", split}});
    }
  }
  write_jsonl(pairs, layout::pairs_file(c));
  write_jsonl(unmatched, layout::pairs_file(c).parent_path() / "unmatched.jsonl");
  StageReport rep{"pair", pairs.size(), 0, {}};
  rep.detail["unmatched"] = unmatched.size();
  return rep;
}

StageReport assemble_stage(const PipelineConfig& c) {
  AssemblySpec spec = c.assembly;
  spec.seed = c.stage_seed("assemble");
  const auto rows = read_manifest(layout::split_manifest(c));
  std::map<std::string, const ManifestEntry*> row_of;
  for (const auto& r : rows) row_of[r.id] = &r;
  const auto pair_lines = read_jsonl(layout::pairs_file(c));
  const int rate = c.babble.sample_rate;
  const fs::path root = c.paths.output;

  std::vector<ManifestEntry> out(pair_lines.size());
  std::vector<std::string> errors(pair_lines.size());
  const auto n = static_cast<std::int64_t>(pair_lines.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const Json& pj = pair_lines[static_cast<std::size_t>(i)];
    try {
      MatchedPair pair{pj.at("child_id").get<std::string>(), pj.at("adult_id").get<std::string>(),
                       pj.at("similarity").get<double>()};
      const std::string split = pj.at("split").get<std::string>();
      auto utt = [&](const std::string& id, Role role) {
        const auto it = row_of.find(id);
        require(it != row_of.end(), ErrorCode::kMalformedFile, "pair names unknown utterance " + id);
        Utterance u;
        u.id = id;
        u.transcript = it->second->transcript;
        u.speaker_id = it->second->speaker_id;
        u.role = role;
        u.source_corpus = it->second->source_corpus.value_or("");
        return std::pair{u, resample(read_wav(it->second->audio_path), rate)};
      };
      const auto [child, child_audio] = utt(pair.child_id, Role::kChild);
      const auto [adult, adult_audio] = utt(pair.adult_id, Role::kAdult);
      const std::string id = dialogue_id(pair);
      const std::uint64_t item_seed = derive_seed(spec.seed, id);
      const Dialogue d = build_dialogue(pair, child, child_audio, adult, adult_audio, spec, item_seed);
      const std::string rel = "clean/" + split + "/" + id + ".wav";
      fs::create_directories((root / rel).parent_path());
      write_wav(d.audio, root / rel, c.encoding);

      ManifestEntry e;
      e.id = id;
      e.audio_path = "../" + rel;
      e.transcript = d.record.transcript;
      e.speaker_id = child.speaker_id + "+" + adult.speaker_id;
      e.role = "dialogue";
      e.split = split;
      e.seed = item_seed;
      e.duration_s = d.record.duration_s;
      e.source_corpus = child.source_corpus == adult.source_corpus
                            ? child.source_corpus
                            : child.source_corpus + "+" + adult.source_corpus;
      e.condition = "clean";
      e.order = to_string(d.record.order);
      e.overlap_s = d.record.overlap_s;
      e.gap_s = d.record.gap_s;
      if (d.record.overlap_redrawn) e.flags.push_back("overlap_redrawn");
      e.extra["child_id"] = pair.child_id;
      e.extra["adult_id"] = pair.adult_id;
      e.extra["similarity"] = pair.similarity;
      e.extra["child_speaker_id"] = child.speaker_id;
      e.extra["adult_speaker_id"] = adult.speaker_id;
      e.extra["assembly_seed"] = spec.seed;
      out[static_cast<std::size_t>(i)] = std::move(e);
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(i)] = ex.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) fail(ErrorCode::kIoError, "assembly failed: " + e);
  }
  std::sort(out.begin(), out.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
  std::map<std::string, std::vector<ManifestEntry>> by_split;
  for (auto& e : out) by_split[e.split].push_back(e);
  for (const auto& [split, entries] : by_split) {
    write_manifest(entries, layout::manifests_dir(c) / ("clean_" + split + ".jsonl"));
  }
  return {"assemble", out.size(), spec.seed, {{"splits", by_split.size()}}};
}

std::vector<NoiseTrack> load_noise(const PipelineConfig& c) {
  const fs::path dir = layout::noise_dir(c);
  std::vector<NoiseTrack> tracks;
  for (const Json& j : read_jsonl(dir / "index.jsonl")) {
    NoiseTrack t;
    t.noise_id = j.at("noise_id").get<std::string>();
    t.audio = resample(read_wav(dir / j.at("path").get<std::string>()), c.babble.sample_rate);
    if (j.contains("room_id")) t.room_id = j["room_id"].get<std::string>();
    tracks.push_back(std::move(t));
  }
  return tracks;
}

bool wants(const PipelineConfig& c, std::initializer_list<Condition> any) {
  for (Condition x : c.conditions) {
    if (std::find(any.begin(), any.end(), x) != any.end()) return true;
  }
  return false;
}

StageReport mix_stage(const PipelineConfig& c) {
  ConditionOptions opt;
  opt.output_root = c.paths.output;
  opt.conditions = c.conditions;
  opt.seed = c.stage_seed("mix");
  opt.snr_min_db = c.snr_min_db;
  opt.snr_max_db = c.snr_max_db;
  opt.matched_acoustics = c.matched_acoustics;
  opt.encoding = c.encoding;

  std::vector<ManifestEntry> clean;
  for (const char* split : {"train", "dev", "test"}) {
    const fs::path p = layout::manifests_dir(c) / (std::string("clean_") + split + ".jsonl");
    if (!fs::exists(p)) continue;
    auto rows = read_manifest(p);
    clean.insert(clean.end(), rows.begin(), rows.end());
  }
  std::optional<RirBank> bank;
  if (wants(c, {Condition::kRir, Condition::kRirNoise})) bank = read_rir_bank(c.rir_bank_dir());
  std::vector<NoiseTrack> noise;
  if (wants(c, {Condition::kNoise, Condition::kRirNoise})) noise = load_noise(c);

  const auto result = render_condition_set(clean, layout::manifests_dir(c),
                                           bank ? &*bank : nullptr, noise, opt);
  StageReport rep{"mix", 0, opt.seed, {}};
  for (const auto& [cond, entries] : result) {
    rep.items += entries.size();
    rep.detail[to_string(cond)] = entries.size();
  }
  return rep;
}

void add_if(std::vector<fs::path>& out, const fs::path& p) {
  if (!p.empty()) out.push_back(p);
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"sweep-gen", "rir-extract", "rir-bank", "babble",
                                              "partition", "pair",        "assemble", "mix",
                                              "pipeline"};
  return names;
}

std::vector<std::string> expand_stage(const std::string& name) {
  const auto& names = stage_names();
  require(std::find(names.begin(), names.end(), name) != names.end(), ErrorCode::kInvalidArgument,
          "unknown stage '" + name + "'");
  if (name == "pipeline") return {"rir-bank", "babble", "partition", "pair", "assemble", "mix"};
  return {name};
}

std::vector<fs::path> stage_inputs(const std::string& name, const PipelineConfig& c) {
  std::vector<fs::path> in;
  const bool pipeline = name == "pipeline";
  if (name == "rir-extract") {
    require(!c.paths.recordings.empty(), ErrorCode::kInvalidConfig,
            "rir-extract needs paths.recordings");
    in.push_back(c.paths.recordings);
  }
  if (name == "babble" || pipeline) {
    if (c.babble.n_sources > 0) {
      require(!c.paths.source_pool.empty(), ErrorCode::kInvalidConfig,
              "babble needs paths.source_pool");
      in.push_back(c.paths.source_pool);
    }
    if (c.babble.event_rate_per_min > 0) {
      require(!c.paths.event_pool.empty(), ErrorCode::kInvalidConfig,
              "events need paths.event_pool (or event_rate_per_min 0)");
      in.push_back(c.paths.event_pool);
    }
    if (c.matched_acoustics && !pipeline) in.push_back(c.rir_bank_dir() / "index.jsonl");
    if (c.matched_acoustics && pipeline) add_if(in, c.paths.rir_bank);
  }
  if (name == "partition" || pipeline) {
    require(!c.paths.utterances.empty(), ErrorCode::kInvalidConfig,
            "partition needs paths.utterances");
    in.push_back(c.paths.utterances);
  }
  if (name == "pair" || pipeline) {
    require(!c.paths.embeddings.empty(), ErrorCode::kInvalidConfig,
            "pairing needs paths.embeddings");
    in.push_back(c.paths.embeddings);
    if (!pipeline) in.push_back(layout::split_manifest(c));
  }
  if (name == "assemble") {
    in.push_back(layout::split_manifest(c));
    in.push_back(layout::pairs_file(c));
  }
  if (name == "mix") {
    in.push_back(layout::manifests_dir(c));
    if (wants(c, {Condition::kRir, Condition::kRirNoise})) {
      in.push_back(c.rir_bank_dir() / "index.jsonl");
    }
    if (wants(c, {Condition::kNoise, Condition::kRirNoise})) {
      in.push_back(layout::noise_dir(c) / "index.jsonl");
    }
  }
  return in;
}

void check_stage_inputs(const std::string& name, const PipelineConfig& c) {
  std::string missing;
  for (const auto& p : stage_inputs(name, c)) {
    if (!fs::exists(p)) missing += (missing.empty() ? "" : ", ") + p.string();
  }
  require(missing.empty(), ErrorCode::kFileNotFound, "missing inputs: " + missing);
}

Json stage_plan(const std::string& name, const PipelineConfig& c) {
  Json plan = Json::array();
  for (const auto& s : expand_stage(name)) {
    Json j = {{"stage", s}};
    if (s == "sweep-gen") {
      j["outputs"] = layout::sweep_dir(c).string();
      j["samples"] = c.sweep.length();
    } else if (s == "rir-extract") {
      j["outputs"] = layout::measured_dir(c).string();
    } else if (s == "rir-bank") {
      const auto spec = bank_spec(c);
      const auto pairs = spec.positions_per_room * (spec.positions_per_room - 1);
      j["seed"] = spec.seed;
      j["rooms"] = spec.n_rooms;
      j["items"] = spec.n_rooms * pairs;
      j["outputs"] = c.rir_bank_dir().string();
    } else if (s == "babble") {
      j["seed"] = c.stage_seed("babble");
      j["items"] = c.noise_tracks;
      j["duration_s"] = c.babble.duration_s;
      j["n_sources"] = c.babble.n_sources;
      j["outputs"] = layout::noise_dir(c).string();
    } else if (s == "partition") {
      j["seed"] = c.stage_seed("partition");
      j["ratios"] = {c.splits.train, c.splits.dev, c.splits.test};
      j["outputs"] = layout::split_manifest(c).string();
    } else if (s == "pair") {
      j["outputs"] = layout::pairs_file(c).string();
    } else if (s == "assemble") {
      j["seed"] = c.stage_seed("assemble");
      j["outputs"] = (c.paths.output / "clean").string();
    } else if (s == "mix") {
      j["seed"] = c.stage_seed("mix");
      Json conds = Json::array();
      for (Condition x : c.conditions) conds.push_back(to_string(x));
      j["conditions"] = conds;
      j["snr_range_db"] = {c.snr_min_db, c.snr_max_db};
      j["outputs"] = layout::manifests_dir(c).string();
    }
    plan.push_back(std::move(j));
  }
  return plan;
}

StageReport run_stage(const std::string& name, const PipelineConfig& c) {
  if (name == "sweep-gen") return sweep_gen(c);
  if (name == "rir-extract") return rir_extract(c);
  if (name == "rir-bank") return rir_bank(c);
  if (name == "babble") return babble(c);
  if (name == "partition") return partition_stage(c);
  if (name == "pair") return pair_stage(c);
  if (name == "assemble") return assemble_stage(c);
  if (name == "mix") return mix_stage(c);
  fail(ErrorCode::kInvalidArgument, "stage '" + name + "' is not a single stage");
}

std::vector<StageReport> run_pipeline(const std::string& name, const PipelineConfig& c,
                                      const StageLogger& log) {
  std::vector<StageReport> reports;
  for (const auto& s : expand_stage(name)) {
    if (log) log({{"level", "info"}, {"stage", s}, {"event", "start"}});
    check_stage_inputs(s, c);
    const auto t0 = std::chrono::steady_clock::now();
    StageReport rep = run_stage(s, c);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) {
      log({{"level", "info"},
           {"stage", s},
           {"event", "done"},
           {"items", rep.items},
           {"seed", rep.seed},
           {"elapsed_s", elapsed},
           {"detail", rep.detail}});
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::vector<AudioBuffer> load_pool(const fs::path& dir, int sample_rate) {
  require(fs::is_directory(dir), ErrorCode::kFileNotFound, "pool directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<AudioBuffer> pool;
  pool.reserve(files.size());
  for (const auto& f : files) pool.push_back(resample(read_wav(f), sample_rate));
  return pool;
}

}  // namespace classim
