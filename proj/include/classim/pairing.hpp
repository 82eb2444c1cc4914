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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "classim/manifest.hpp"

namespace classim {

enum class Role { kChild, kAdult };

const char* to_string(Role role);
Role role_from_string(const std::string& text);

struct Utterance {
  std::string id;
  std::string transcript;
  std::vector<double> embedding;
  double duration_s = 0.0;
  std::string speaker_id;
  Role role = Role::kChild;
  std::string source_corpus;
};

struct MatchedPair {
  std::string child_id;
  std::string adult_id;
  double similarity = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;  // in selection order
  std::vector<std::string> unmatched_children;
  std::vector<std::string> unmatched_adults;
};

/// Scales every embedding to unit L2 norm. A zero (or non-finite) vector
/// raises kZeroVector naming the utterance.
std::vector<Utterance> normalize_embeddings(std::vector<Utterance> utterances);

/// Repeatedly takes the most similar unmatched (child, adult) pair. Ties go
/// to the lexicographically smallest (child_id, adult_id). Embeddings are
/// expected to be normalized already; similarity is the dot product.
MatchResult greedy_match(std::span<const Utterance> children, std::span<const Utterance> adults);

// Embedding file contract. Line 1 is a header
//   {"model_name": ..., "dim": D, "count": N}
// and each following line is one record
//   {"id": ..., "role": "child"|"adult", "dim": D, "values": [...]}.
// A file without a header line is accepted when every record carries dim.
struct EmbeddingRecord {
  std::string id;
  Role role = Role::kChild;
  std::vector<double> values;
};

struct EmbeddingFile {
  std::optional<std::string> model_name;
  std::size_t dim = 0;
  std::vector<EmbeddingRecord> records;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::size_t records = 0;
  bool ok() const { return errors.empty(); }
};

/// Checks structure, dimensions, roles, duplicate ids, the header count and
/// unit norm within norm_tolerance. Never throws for content problems.
ValidationReport validate_embedding_file(const std::filesystem::path& path,
                                         double norm_tolerance = 1e-5);

/// Reads the file, throwing kMalformedFile with the first validation error
/// (the norm check is left to normalize_embeddings).
EmbeddingFile read_embedding_file(const std::filesystem::path& path);

void write_embedding_file(const EmbeddingFile& file, const std::filesystem::path& path);

/// Joins manifest rows (role child/adult) with their embeddings by id.
/// Rows without an embedding raise kMalformedFile.
std::vector<Utterance> utterances_from_manifest(std::span<const ManifestEntry> rows,
                                                const EmbeddingFile& embeddings);

}  // namespace classim
