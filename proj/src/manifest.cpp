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

#include "classim/manifest.hpp"

#include <fstream>
#include <string>

#include "classim/error.hpp"

namespace classim {
namespace {

template <typename T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> take_opt(Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (it != j.end()) j.erase(it);
    return std::nullopt;
  }
  T v = it->template get<T>();
  j.erase(it);
  return v;
}

template <typename T>
T take(Json& j, const char* key, T fallback) {
  auto v = take_opt<T>(j, key);
  return v ? *v : fallback;
}

}  // namespace

Json to_json(const ManifestEntry& e) {
  Json j;
  j["id"] = e.id;
  j["audio_path"] = e.audio_path;
  j["transcript"] = e.transcript;
  j["speaker_id"] = e.speaker_id;
  j["role"] = e.role;
  j["split"] = e.split;
  put_opt(j, "rir_id", e.rir_id);
  put_opt(j, "snr_db", e.snr_db);
  j["seed"] = e.seed;
  put_opt(j, "duration_s", e.duration_s);
  put_opt(j, "source_corpus", e.source_corpus);
  put_opt(j, "condition", e.condition);
  put_opt(j, "order", e.order);
  put_opt(j, "overlap_s", e.overlap_s);
  put_opt(j, "gap_s", e.gap_s);
  put_opt(j, "noise_id", e.noise_id);
  put_opt(j, "noise_offset", e.noise_offset);
  put_opt(j, "noise_gain", e.noise_gain);
  put_opt(j, "speech_scale", e.speech_scale);
  if (!e.flags.empty()) j["flags"] = e.flags;
  for (const auto& [k, v] : e.extra.items()) {
    if (!j.contains(k)) j[k] = v;
  }
  return j;
}

ManifestEntry manifest_entry_from_json(const Json& source) {
  require(source.is_object(), ErrorCode::kMalformedFile, "manifest record is not an object");
  Json j = source;
  ManifestEntry e;
  try {
    e.id = take<std::string>(j, "id", "");
    e.audio_path = take<std::string>(j, "audio_path", "");
    e.transcript = take<std::string>(j, "transcript", "");
    e.speaker_id = take<std::string>(j, "speaker_id", "");
    e.role = take<std::string>(j, "role", "");
    e.split = take<std::string>(j, "split", "");
    e.rir_id = take_opt<std::string>(j, "rir_id");
    e.snr_db = take_opt<double>(j, "snr_db");
    e.seed = take<std::uint64_t>(j, "seed", 0);
    e.duration_s = take_opt<double>(j, "duration_s");
    e.source_corpus = take_opt<std::string>(j, "source_corpus");
    e.condition = take_opt<std::string>(j, "condition");
    e.order = take_opt<std::string>(j, "order");
    e.overlap_s = take_opt<double>(j, "overlap_s");
    e.gap_s = take_opt<double>(j, "gap_s");
    e.noise_id = take_opt<std::string>(j, "noise_id");
    e.noise_offset = take_opt<std::int64_t>(j, "noise_offset");
    e.noise_gain = take_opt<double>(j, "noise_gain");
    e.speech_scale = take_opt<double>(j, "speech_scale");
    e.flags = take<std::vector<std::string>>(j, "flags", {});
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kMalformedFile, std::string("bad manifest field: ") + ex.what());
  }
  require(!e.id.empty(), ErrorCode::kMalformedFile, "manifest record without id");
  e.extra = std::move(j);
  return e;
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& ex) {
      fail(ErrorCode::kMalformedFile,
           path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

void write_jsonl(const std::vector<Json>& records, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  for (const Json& r : records) out << r.dump() << '\n';
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::vector<ManifestEntry> out;
  for (const Json& j : read_jsonl(path)) out.push_back(manifest_entry_from_json(j));
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path) {
  std::vector<Json> records;
  records.reserve(entries.size());
  for (const auto& e : entries) records.push_back(to_json(e));
  write_jsonl(records, path);
}

std::filesystem::path resolve_audio_path(const std::filesystem::path& manifest,
                                         const std::string& audio_path) {
  std::filesystem::path p(audio_path);
  if (p.is_absolute()) return p;
  return manifest.parent_path() / p;
}

}  // namespace classim
