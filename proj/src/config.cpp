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

#include "classim/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "classim/error.hpp"
#include "classim/rir_bank.hpp"
#include "classim/seed.hpp"

namespace classim {
namespace {

void only_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  require(j.is_object(), ErrorCode::kInvalidConfig, where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    require(allowed.count(k) > 0, ErrorCode::kInvalidConfig,
            "unknown key '" + k + "' in " + (where.empty() ? "config" : where));
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_range(const Json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const auto& r = j.at(key);
  require(r.is_array() && r.size() == 2, ErrorCode::kInvalidConfig,
          std::string(key) + " must be a [min, max] pair");
  lo = r[0].get<double>();
  hi = r[1].get<double>();
}

void read_path(const Json& j, const char* key, const std::filesystem::path& base,
               std::filesystem::path& out) {
  if (!j.contains(key)) return;
  std::filesystem::path p = j.at(key).get<std::string>();
  out = p.is_relative() && !base.empty() ? base / p : p;
}

WavEncoding encoding_from_string(const std::string& s) {
  if (s == "float32") return WavEncoding::kFloat32;
  if (s == "pcm16") return WavEncoding::kPcm16;
  fail(ErrorCode::kInvalidConfig, "encoding must be \"float32\" or \"pcm16\"");
}

}  // namespace

std::uint64_t PipelineConfig::stage_seed(std::string_view stage) const {
  require(seed.has_value(), ErrorCode::kInvalidConfig, "master seed is not set");
  return derive_seed(*seed, stage);
}

std::filesystem::path PipelineConfig::rir_bank_dir() const {
  return paths.rir_bank.empty() ? paths.output / "rir_bank" : paths.rir_bank;
}

void PipelineConfig::validate() const {
  auto check = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& ex) {
      fail(ErrorCode::kInvalidConfig, ex.what());
    }
  };
  require(seed.has_value(), ErrorCode::kInvalidConfig,
          "a master seed is required (config \"seed\" or --seed)");
  require(workers >= 0, ErrorCode::kInvalidConfig, "workers must be non-negative");
  require(!paths.output.empty(), ErrorCode::kInvalidConfig, "paths.output is required");
  require(noise_tracks >= 1, ErrorCode::kInvalidConfig, "noise_tracks must be at least 1");
  require(snr_min_db <= snr_max_db, ErrorCode::kInvalidConfig, "mix.snr_range_db must be ordered");
  require(!conditions.empty(), ErrorCode::kInvalidConfig, "at least one condition is required");
  std::set<Condition> seen;
  for (Condition c : conditions) {
    require(seen.insert(c).second, ErrorCode::kInvalidConfig,
            std::string("condition '") + to_string(c) + "' listed twice");
  }
  check([&] { sweep.validate(); });
  require(extract.rir_len > 0, ErrorCode::kInvalidConfig, "sweep.rir_len must be positive");
  check([&] { rir_bank.validate(); });
  check([&] { babble.validate(); });
  check([&] { assembly.validate(); });
  check([&] { splits.validate(); });
}

PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    only_keys(j, "", {"seed", "workers", "encoding", "paths", "sweep", "rir_bank", "babble",
                      "assembly", "splits", "conditions", "mix"});
    if (j.contains("seed") && !j["seed"].is_null()) {
      require(j["seed"].is_number_unsigned(), ErrorCode::kInvalidConfig,
              "seed must be a non-negative integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
    read(j, "workers", c.workers);
    if (j.contains("encoding")) c.encoding = encoding_from_string(j["encoding"].get<std::string>());

    if (j.contains("paths")) {
      const auto& p = j["paths"];
      only_keys(p, "paths", {"utterances", "embeddings", "source_pool", "event_pool",
                             "recordings", "rir_bank", "output"});
      read_path(p, "utterances", base_dir, c.paths.utterances);
      read_path(p, "embeddings", base_dir, c.paths.embeddings);
      read_path(p, "source_pool", base_dir, c.paths.source_pool);
      read_path(p, "event_pool", base_dir, c.paths.event_pool);
      read_path(p, "recordings", base_dir, c.paths.recordings);
      read_path(p, "rir_bank", base_dir, c.paths.rir_bank);
      read_path(p, "output", base_dir, c.paths.output);
    }
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      only_keys(s, "sweep", {"f1", "f2", "duration_s", "sample_rate", "fade_ms", "rir_len",
                             "pre_peak"});
      read(s, "f1", c.sweep.f1);
      read(s, "f2", c.sweep.f2);
      read(s, "duration_s", c.sweep.duration_s);
      read(s, "sample_rate", c.sweep.sample_rate);
      read(s, "fade_ms", c.sweep.fade_ms);
      read(s, "rir_len", c.extract.rir_len);
      read(s, "pre_peak", c.extract.pre_peak);
    }
    if (j.contains("rir_bank")) {
      const auto& b = j["rir_bank"];
      only_keys(b, "rir_bank", {"n_rooms", "positions_per_room", "dims_min", "dims_max",
                                "absorption_min", "absorption_max", "rir_len_s", "sample_rate",
                                "max_order", "min_relative_db", "highpass_hz", "speed_of_sound",
                                "corner_inset", "position_height"});
      auto& r = c.rir_bank;
      read(b, "n_rooms", r.n_rooms);
      read(b, "positions_per_room", r.positions_per_room);
      if (b.contains("dims_min")) r.dims_min = vec3_from_json(b["dims_min"]);
      if (b.contains("dims_max")) r.dims_max = vec3_from_json(b["dims_max"]);
      read(b, "absorption_min", r.absorption_min);
      read(b, "absorption_max", r.absorption_max);
      read(b, "rir_len_s", r.rir_len_s);
      read(b, "sample_rate", r.sample_rate);
      read(b, "max_order", r.max_order);
      read(b, "min_relative_db", r.min_relative_db);
      read(b, "highpass_hz", r.highpass_hz);
      read(b, "speed_of_sound", r.speed_of_sound);
      read(b, "corner_inset", r.corner_inset);
      read(b, "position_height", r.position_height);
    }
    if (j.contains("babble")) {
      const auto& b = j["babble"];
      only_keys(b, "babble", {"tracks", "n_sources", "duration_s", "sample_rate", "room",
                              "listener_waypoints", "waypoint_dwell_s", "event_rate_per_min",
                              "source_gain_db_range", "event_gain_db_range", "gap_range_s",
                              "crossfade_ms", "wall_margin", "peak_level", "rir_len_s",
                              "max_order"});
      auto& s = c.babble;
      read(b, "tracks", c.noise_tracks);
      read(b, "n_sources", s.n_sources);
      read(b, "duration_s", s.duration_s);
      read(b, "sample_rate", s.sample_rate);
      if (b.contains("room")) {
        Json room = b["room"];
        if (!room.contains("room_id")) room["room_id"] = "classroom";
        s.room = room_from_json(room);
      }
      if (b.contains("listener_waypoints")) {
        s.listener_waypoints.clear();
        for (const auto& w : b["listener_waypoints"]) s.listener_waypoints.push_back(vec3_from_json(w));
      }
      read(b, "waypoint_dwell_s", s.waypoint_dwell_s);
      read(b, "event_rate_per_min", s.event_rate_per_min);
      read_range(b, "source_gain_db_range", s.source_gain_db_range.first,
                 s.source_gain_db_range.second);
      read_range(b, "event_gain_db_range", s.event_gain_db_range.first,
                 s.event_gain_db_range.second);
      read_range(b, "gap_range_s", s.gap_range_s.first, s.gap_range_s.second);
      read(b, "crossfade_ms", s.crossfade_ms);
      read(b, "wall_margin", s.wall_margin);
      read(b, "peak_level", s.peak_level);
      read(b, "rir_len_s", s.rir_len_s);
      read(b, "max_order", s.max_order);
    }
    if (j.contains("assembly")) {
      const auto& a = j["assembly"];
      only_keys(a, "assembly", {"overlap_probability", "overlap_range_s", "gap_range_s",
                                "child_first_probability"});
      read(a, "overlap_probability", c.assembly.overlap_probability);
      read_range(a, "overlap_range_s", c.assembly.overlap_min_s, c.assembly.overlap_max_s);
      read_range(a, "gap_range_s", c.assembly.gap_min_s, c.assembly.gap_max_s);
      read(a, "child_first_probability", c.assembly.child_first_probability);
    }
    if (j.contains("splits")) {
      const auto& s = j["splits"];
      only_keys(s, "splits", {"train", "dev", "test"});
      read(s, "train", c.splits.train);
      read(s, "dev", c.splits.dev);
      read(s, "test", c.splits.test);
    }
    if (j.contains("conditions")) {
      c.conditions.clear();
      for (const auto& s : j["conditions"]) c.conditions.push_back(condition_from_string(s.get<std::string>()));
    }
    if (j.contains("mix")) {
      const auto& m = j["mix"];
      only_keys(m, "mix", {"snr_range_db", "matched_acoustics"});
      read_range(m, "snr_range_db", c.snr_min_db, c.snr_max_db);
      read(m, "matched_acoustics", c.matched_acoustics);
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kInvalidConfig, std::string("config: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kInvalidConfig) throw;
    fail(ErrorCode::kInvalidConfig, std::string("config: ") + ex.what());
  }
  return c;
}

Json to_json(const PipelineConfig& c) {
  Json j;
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["workers"] = c.workers;
  j["encoding"] = c.encoding == WavEncoding::kFloat32 ? "float32" : "pcm16";
  j["paths"] = {{"utterances", c.paths.utterances.string()},
                {"embeddings", c.paths.embeddings.string()},
                {"source_pool", c.paths.source_pool.string()},
                {"event_pool", c.paths.event_pool.string()},
                {"recordings", c.paths.recordings.string()},
                {"rir_bank", c.paths.rir_bank.string()},
                {"output", c.paths.output.string()}};
  j["sweep"] = {{"f1", c.sweep.f1},           {"f2", c.sweep.f2},
                {"duration_s", c.sweep.duration_s}, {"sample_rate", c.sweep.sample_rate},
                {"fade_ms", c.sweep.fade_ms}, {"rir_len", c.extract.rir_len},
                {"pre_peak", c.extract.pre_peak}};
  const auto& r = c.rir_bank;
  j["rir_bank"] = {{"n_rooms", r.n_rooms},
                   {"positions_per_room", r.positions_per_room},
                   {"dims_min", to_json(r.dims_min)},
                   {"dims_max", to_json(r.dims_max)},
                   {"absorption_min", r.absorption_min},
                   {"absorption_max", r.absorption_max},
                   {"rir_len_s", r.rir_len_s},
                   {"sample_rate", r.sample_rate},
                   {"max_order", r.max_order},
                   {"min_relative_db", r.min_relative_db},
                   {"highpass_hz", r.highpass_hz},
                   {"speed_of_sound", r.speed_of_sound},
                   {"corner_inset", r.corner_inset},
                   {"position_height", r.position_height}};
  const auto& b = c.babble;
  Json waypoints = Json::array();
  for (const auto& w : b.listener_waypoints) waypoints.push_back(to_json(w));
  j["babble"] = {{"tracks", c.noise_tracks},
                 {"n_sources", b.n_sources},
                 {"duration_s", b.duration_s},
                 {"sample_rate", b.sample_rate},
                 {"room", to_json(b.room)},
                 {"listener_waypoints", waypoints},
                 {"waypoint_dwell_s", b.waypoint_dwell_s},
                 {"event_rate_per_min", b.event_rate_per_min},
                 {"source_gain_db_range", {b.source_gain_db_range.first, b.source_gain_db_range.second}},
                 {"event_gain_db_range", {b.event_gain_db_range.first, b.event_gain_db_range.second}},
                 {"gap_range_s", {b.gap_range_s.first, b.gap_range_s.second}},
                 {"crossfade_ms", b.crossfade_ms},
                 {"wall_margin", b.wall_margin},
                 {"peak_level", b.peak_level},
                 {"rir_len_s", b.rir_len_s},
                 {"max_order", b.max_order}};
  const auto& a = c.assembly;
  j["assembly"] = {{"overlap_probability", a.overlap_probability},
                   {"overlap_range_s", {a.overlap_min_s, a.overlap_max_s}},
                   {"gap_range_s", {a.gap_min_s, a.gap_max_s}},
                   {"child_first_probability", a.child_first_probability}};
  j["splits"] = {{"train", c.splits.train}, {"dev", c.splits.dev}, {"test", c.splits.test}};
  Json conds = Json::array();
  for (Condition cond : c.conditions) conds.push_back(to_string(cond));
  j["conditions"] = conds;
  j["mix"] = {{"snr_range_db", {c.snr_min_db, c.snr_max_db}},
              {"matched_acoustics", c.matched_acoustics}};
  return j;
}

void apply_env_overrides(Json& tree, char** envp) {
  if (envp == nullptr) return;
  constexpr std::string_view kPrefix = "CLASSIM_";
  for (char** e = envp; *e != nullptr; ++e) {
    const std::string_view entry(*e);
    if (entry.substr(0, kPrefix.size()) != kPrefix) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    std::string key(entry.substr(kPrefix.size(), eq - kPrefix.size()));
    const std::string value(entry.substr(eq + 1));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    Json* node = &tree;
    std::size_t pos = 0;
    for (std::size_t next; (next = key.find("__", pos)) != std::string::npos; pos = next + 2) {
      Json& child = (*node)[key.substr(pos, next - pos)];
      if (!child.is_object()) child = Json::object();
      node = &child;
    }
    Json parsed = Json::parse(value, nullptr, false);
    (*node)[key.substr(pos)] = parsed.is_discarded() ? Json(value) : parsed;
  }
}

PipelineConfig load_config(const std::filesystem::path& path, char** envp) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kFileNotFound, "cannot open config " + path.string());
  Json tree = Json::parse(in, nullptr, false);
  require(!tree.is_discarded() && tree.is_object(), ErrorCode::kInvalidConfig,
          path.string() + " is not a JSON object");
  apply_env_overrides(tree, envp);
  return config_from_json(tree, path.parent_path());
}

}  // namespace classim
