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

#include "classim/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

#include "classim/error.hpp"
#include "classim/kernels.hpp"

namespace classim {

const char* to_string(Role role) { return role == Role::kChild ? "child" : "adult"; }

Role role_from_string(const std::string& text) {
  if (text == "child") return Role::kChild;
  if (text == "adult") return Role::kAdult;
  fail(ErrorCode::kInvalidArgument, "unknown role '" + text + "'");
}

std::vector<Utterance> normalize_embeddings(std::vector<Utterance> utterances) {
  for (auto& u : utterances) {
    double ss = 0.0;
    for (double v : u.embedding) ss += v * v;
    const double norm = std::sqrt(ss);
    require(norm > 0.0 && std::isfinite(norm), ErrorCode::kZeroVector,
            "utterance '" + u.id + "' has a zero or non-finite embedding");
    for (double& v : u.embedding) v /= norm;
  }
  return utterances;
}

namespace {

struct Candidate {
  double sim;
  std::size_t child;  // index into id-sorted children
  std::size_t adult;  // index into id-sorted adults
};

// Heap order: larger similarity first, then smaller (child, adult) indices,
// which after sorting by id is the lexicographic id order.
struct CandidateLess {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.sim != b.sim) return a.sim < b.sim;
    return std::tie(a.child, a.adult) > std::tie(b.child, b.adult);
  }
};

std::vector<std::size_t> order_by_id(std::span<const Utterance> items, const char* side) {
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return items[a].id < items[b].id; });
  for (std::size_t k = 1; k < idx.size(); ++k) {
    require(items[idx[k]].id != items[idx[k - 1]].id, ErrorCode::kInvalidArgument,
            std::string("duplicate ") + side + " id '" + items[idx[k]].id + "'");
  }
  return idx;
}

}  // namespace

MatchResult greedy_match(std::span<const Utterance> children, std::span<const Utterance> adults) {
  std::size_t dim = 0;
  bool have_dim = false;
  for (auto group : {children, adults}) {
    for (const auto& u : group) {
      if (!have_dim) {
        dim = u.embedding.size();
        have_dim = true;
      }
      require(u.embedding.size() == dim, ErrorCode::kDimensionMismatch,
              "embedding of '" + u.id + "' has dimension " + std::to_string(u.embedding.size()) +
                  ", expected " + std::to_string(dim));
    }
  }

  const auto ci = order_by_id(children, "child");
  const auto ai = order_by_id(adults, "adult");
  std::vector<std::vector<double>> rows, cols;
  rows.reserve(ci.size());
  cols.reserve(ai.size());
  for (auto i : ci) rows.push_back(children[i].embedding);
  for (auto j : ai) cols.push_back(adults[j].embedding);
  const std::vector<double> sim = kernels::similarity_matrix(rows, cols);
  const std::size_t na = cols.size();

  std::vector<bool> child_done(rows.size(), false);
  std::vector<bool> adult_done(na, false);
  auto best_for = [&](std::size_t c) -> std::optional<Candidate> {
    std::optional<Candidate> best;
    for (std::size_t a = 0; a < na; ++a) {
      if (adult_done[a]) continue;
      const double s = sim[c * na + a];
      if (!best || s > best->sim) best = Candidate{s, c, a};
    }
    return best;
  };

  std::priority_queue<Candidate, std::vector<Candidate>, CandidateLess> heap;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (auto b = best_for(c)) heap.push(*b);
  }

  MatchResult result;
  while (!heap.empty()) {
    const Candidate top = heap.top();
    heap.pop();
    if (child_done[top.child]) continue;
    if (adult_done[top.adult]) {
      // This child's favorite is gone; requeue its best remaining adult.
      if (auto b = best_for(top.child)) heap.push(*b);
      continue;
    }
    child_done[top.child] = true;
    adult_done[top.adult] = true;
    result.pairs.push_back({children[ci[top.child]].id, adults[ai[top.adult]].id, top.sim});
  }
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (!child_done[c]) result.unmatched_children.push_back(children[ci[c]].id);
  }
  for (std::size_t a = 0; a < na; ++a) {
    if (!adult_done[a]) result.unmatched_adults.push_back(adults[ai[a]].id);
  }
  return result;
}

namespace {

bool looks_like_header(const Json& j) {
  return j.is_object() && !j.contains("values") && !j.contains("id");
}

// Shared parser. Content problems are appended to `errors`; parsed records
// go to `out` when they are structurally usable.
void parse_embeddings(const std::filesystem::path& path, double norm_tolerance,
                      EmbeddingFile& out, std::vector<std::string>& errors) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> header_dim, header_count;
  std::set<std::string> seen;
  bool first = true;
  auto err = [&](const std::string& msg) {
    errors.push_back("line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const std::exception& ex) {
      err(std::string("invalid JSON (") + ex.what() + ")");
      first = false;
      continue;
    }
    if (first && looks_like_header(j)) {
      first = false;
      if (j.contains("model_name") && j["model_name"].is_string()) {
        out.model_name = j["model_name"].get<std::string>();
      } else {
        err("header lacks a string model_name");
      }
      if (j.contains("dim") && j["dim"].is_number_unsigned() && j["dim"].get<std::size_t>() > 0) {
        header_dim = j["dim"].get<std::size_t>();
      } else {
        err("header dim must be a positive integer");
      }
      if (j.contains("count") && j["count"].is_number_unsigned()) {
        header_count = j["count"].get<std::size_t>();
      } else {
        err("header count must be a non-negative integer");
      }
      continue;
    }
    first = false;
    if (!j.is_object()) {
      err("record is not an object");
      continue;
    }
    EmbeddingRecord rec;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
      err("record lacks a non-empty string id");
      continue;
    }
    rec.id = j["id"].get<std::string>();
    const std::string who = "record '" + rec.id + "': ";
    if (!seen.insert(rec.id).second) err(who + "duplicate id");
    if (!j.contains("role") || !j["role"].is_string() ||
        (j["role"] != "child" && j["role"] != "adult")) {
      err(who + "role must be \"child\" or \"adult\"");
      continue;
    }
    rec.role = role_from_string(j["role"].get<std::string>());
    if (!j.contains("values") || !j["values"].is_array()) {
      err(who + "values must be an array");
      continue;
    }
    bool numeric = true;
    for (const auto& v : j["values"]) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        numeric = false;
        break;
      }
      rec.values.push_back(v.get<double>());
    }
    if (!numeric) {
      err(who + "values must be finite numbers");
      continue;
    }
    if (rec.values.empty()) {
      err(who + "values is empty");
      continue;
    }
    if (j.contains("dim")) {
      if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() != rec.values.size()) {
        err(who + "dim does not match the number of values");
      }
    } else if (!header_dim) {
      err(who + "dim missing and no header");
    }
    const std::size_t expected = header_dim ? *header_dim
                                 : out.dim  ? out.dim
                                            : rec.values.size();
    if (rec.values.size() != expected) {
      err(who + "dimension " + std::to_string(rec.values.size()) + " differs from " +
          std::to_string(expected));
      continue;
    }
    out.dim = expected;
    if (norm_tolerance >= 0.0) {
      double ss = 0.0;
      for (double v : rec.values) ss += v * v;
      if (std::abs(std::sqrt(ss) - 1.0) > norm_tolerance) {
        err(who + "L2 norm " + std::to_string(std::sqrt(ss)) + " is not 1");
      }
    }
    out.records.push_back(std::move(rec));
  }
  if (header_dim) out.dim = *header_dim;
  if (header_count && *header_count != seen.size()) {
    line_no = 0;
    errors.push_back("header count " + std::to_string(*header_count) + " but " +
                     std::to_string(seen.size()) + " records");
  }
  if (seen.empty() && errors.empty()) errors.push_back("file holds no records");
}

}  // namespace

ValidationReport validate_embedding_file(const std::filesystem::path& path,
                                         double norm_tolerance) {
  ValidationReport report;
  EmbeddingFile file;
  try {
    parse_embeddings(path, norm_tolerance, file, report.errors);
  } catch (const Error& ex) {
    report.errors.push_back(ex.what());
  }
  report.records = file.records.size();
  return report;
}

EmbeddingFile read_embedding_file(const std::filesystem::path& path) {
  EmbeddingFile file;
  std::vector<std::string> errors;
  parse_embeddings(path, -1.0, file, errors);
  require(errors.empty(), ErrorCode::kMalformedFile,
          path.string() + ": " + (errors.empty() ? "" : errors.front()));
  return file;
}

void write_embedding_file(const EmbeddingFile& file, const std::filesystem::path& path) {
  std::vector<Json> lines;
  lines.push_back({{"model_name", file.model_name.value_or("unknown")},
                   {"dim", file.dim},
                   {"count", file.records.size()}});
  for (const auto& r : file.records) {
    require(r.values.size() == file.dim, ErrorCode::kDimensionMismatch,
            "record '" + r.id + "' does not match the file dimension");
    lines.push_back({{"id", r.id}, {"role", to_string(r.role)}, {"dim", r.values.size()},
                     {"values", r.values}});
  }
  write_jsonl(lines, path);
}

std::vector<Utterance> utterances_from_manifest(std::span<const ManifestEntry> rows,
                                                const EmbeddingFile& embeddings) {
  std::map<std::string, const EmbeddingRecord*> by_id;
  for (const auto& r : embeddings.records) by_id[r.id] = &r;
  std::vector<Utterance> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const auto it = by_id.find(row.id);
    require(it != by_id.end(), ErrorCode::kMalformedFile,
            "no embedding for utterance '" + row.id + "'");
    Utterance u;
    u.id = row.id;
    u.transcript = row.transcript;
    u.embedding = it->second->values;
    u.duration_s = row.duration_s.value_or(0.0);
    u.speaker_id = row.speaker_id;
    u.role = role_from_string(row.role);
    require(u.role == it->second->role, ErrorCode::kMalformedFile,
            "role of '" + row.id + "' differs between manifest and embeddings");
    u.source_corpus = row.source_corpus.value_or("");
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace classim
