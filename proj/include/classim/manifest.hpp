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

#include <json.hpp>

namespace classim {

using Json = nlohmann::ordered_json;

/// One JSONL manifest record. Fields the toolkit does not model explicitly
/// are carried through `extra` unchanged.
struct ManifestEntry {
  std::string id;
  std::string audio_path;
  std::string transcript;
  std::string speaker_id;
  std::string role;
  std::string split;
  std::optional<std::string> rir_id;
  std::optional<double> snr_db;
  std::uint64_t seed = 0;

  std::optional<double> duration_s;
  std::optional<std::string> source_corpus;
  std::optional<std::string> condition;
  std::optional<std::string> order;
  std::optional<double> overlap_s;
  std::optional<double> gap_s;
  std::optional<std::string> noise_id;
  std::optional<std::int64_t> noise_offset;
  std::optional<double> noise_gain;
  std::optional<double> speech_scale;
  std::vector<std::string> flags;
  Json extra = Json::object();
};

Json to_json(const ManifestEntry& entry);
ManifestEntry manifest_entry_from_json(const Json& j);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path);

/// Resolves an entry's audio_path against the manifest's directory when it
/// is relative.
std::filesystem::path resolve_audio_path(const std::filesystem::path& manifest,
                                         const std::string& audio_path);

/// Reads every non-empty line of a JSONL file as one JSON value.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::vector<Json>& records,
                 const std::filesystem::path& path);

}  // namespace classim
