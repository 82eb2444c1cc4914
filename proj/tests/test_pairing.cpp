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
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "classim/error.hpp"
#include "classim/pairing.hpp"
#include "classim/seed.hpp"
#include "test_util.hpp"

namespace classim {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

Utterance utt(std::string id, Role role, std::vector<double> e) {
  Utterance u;
  u.id = std::move(id);
  u.role = role;
  u.embedding = std::move(e);
  u.speaker_id = "spk_" + u.id;
  return u;
}

std::vector<Utterance> random_set(std::size_t n, std::size_t dim, Role role, Rng& rng,
                                  const std::string& prefix) {
  std::vector<Utterance> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> e(dim);
    for (double& v : e) v = rng.normal();
    out.push_back(utt(prefix + std::to_string(i), role, std::move(e)));
  }
  return normalize_embeddings(std::move(out));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Repeated full scan for the best remaining pair. O(n^3) but obviously right.
MatchResult brute_force(const std::vector<Utterance>& c, const std::vector<Utterance>& a) {
  MatchResult r;
  std::vector<bool> cu(c.size()), au(a.size());
  for (;;) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    bool found = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (cu[i]) continue;
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (au[j]) continue;
        const double s = dot(c[i].embedding, a[j].embedding);
        const bool better =
            !found || s > best ||
            (s == best && std::tie(c[i].id, a[j].id) < std::tie(c[bi].id, a[bj].id));
        if (better) {
          best = s;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    if (!found) break;
    cu[bi] = au[bj] = true;
    r.pairs.push_back({c[bi].id, a[bj].id, best});
  }
  return r;
}

TEST(Normalize, ScalesToUnitNorm) {
  auto v = normalize_embeddings({utt("a", Role::kChild, {3.0, 4.0})});
  EXPECT_NEAR(v[0].embedding[0], 0.6, 1e-15);
  EXPECT_NEAR(v[0].embedding[1], 0.8, 1e-15);
  const auto again = normalize_embeddings(v);
  EXPECT_EQ(again[0].embedding, v[0].embedding);
}

TEST(Normalize, ZeroVectorNamesTheUtterance) {
  try {
    normalize_embeddings({utt("ok", Role::kChild, {1.0, 0.0}), utt("utt_zero", Role::kAdult, {0.0, 0.0})});
    FAIL() << "expected kZeroVector";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
    EXPECT_NE(std::string(e.what()).find("utt_zero"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { normalize_embeddings({utt("n", Role::kChild, {NAN, 1.0})}); }),
            ErrorCode::kZeroVector);
}

TEST(GreedyMatch, TwoByTwoExample) {
  const auto c = normalize_embeddings({utt("c1", Role::kChild, {0.9, 0.1}),
                                       utt("c2", Role::kChild, {0.2, 0.8})});
  const auto a = normalize_embeddings({utt("a1", Role::kAdult, {1.0, 0.0}),
                                       utt("a2", Role::kAdult, {0.0, 1.0})});
  const MatchResult r = greedy_match(c, a);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].child_id, "c1");
  EXPECT_EQ(r.pairs[0].adult_id, "a1");
  EXPECT_EQ(r.pairs[1].child_id, "c2");
  EXPECT_EQ(r.pairs[1].adult_id, "a2");
  EXPECT_NEAR(r.pairs[0].similarity, 0.9 / std::hypot(0.9, 0.1), 1e-12);
  EXPECT_TRUE(r.unmatched_children.empty());
  EXPECT_TRUE(r.unmatched_adults.empty());
}

TEST(GreedyMatch, SinglePairAndEmptySides) {
  const auto c = normalize_embeddings({utt("c", Role::kChild, {1.0, 0.0})});
  const auto a = normalize_embeddings({utt("a", Role::kAdult, {-1.0, 0.0})});
  const MatchResult r = greedy_match(c, a);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_NEAR(r.pairs[0].similarity, -1.0, 1e-15);
  const MatchResult none = greedy_match(c, {});
  EXPECT_TRUE(none.pairs.empty());
  EXPECT_EQ(none.unmatched_children, std::vector<std::string>{"c"});
}

TEST(GreedyMatch, TiesBreakOnIds) {
  const auto c = normalize_embeddings({utt("c2", Role::kChild, {1.0, 0.0}),
                                       utt("c1", Role::kChild, {1.0, 0.0})});
  const auto a = normalize_embeddings({utt("a9", Role::kAdult, {1.0, 0.0}),
                                       utt("a3", Role::kAdult, {1.0, 0.0}),
                                       utt("a5", Role::kAdult, {1.0, 0.0})});
  const MatchResult r = greedy_match(c, a);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].child_id, "c1");
  EXPECT_EQ(r.pairs[0].adult_id, "a3");
  EXPECT_EQ(r.pairs[1].child_id, "c2");
  EXPECT_EQ(r.pairs[1].adult_id, "a5");
  EXPECT_EQ(r.unmatched_adults, std::vector<std::string>{"a9"});
}

TEST(GreedyMatch, AgreesWithBruteForce) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t nc = 1 + rng.below(50);
    const std::size_t na = 1 + rng.below(50);
    const std::size_t dim = 2 + rng.below(16);
    const auto c = random_set(nc, dim, Role::kChild, rng, "c");
    const auto a = random_set(na, dim, Role::kAdult, rng, "a");
    const MatchResult got = greedy_match(c, a);
    const MatchResult want = brute_force(c, a);
    ASSERT_EQ(got.pairs.size(), std::min(nc, na));
    ASSERT_EQ(got.pairs.size(), want.pairs.size());
    std::set<std::string> used_c, used_a;
    for (std::size_t i = 0; i < got.pairs.size(); ++i) {
      EXPECT_EQ(got.pairs[i].child_id, want.pairs[i].child_id);
      EXPECT_EQ(got.pairs[i].adult_id, want.pairs[i].adult_id);
      EXPECT_TRUE(used_c.insert(got.pairs[i].child_id).second);
      EXPECT_TRUE(used_a.insert(got.pairs[i].adult_id).second);
      if (i > 0) {
        EXPECT_LE(got.pairs[i].similarity, got.pairs[i - 1].similarity);
      }
    }
    EXPECT_EQ(got.unmatched_children.size() + got.pairs.size(), nc);
    EXPECT_EQ(got.unmatched_adults.size() + got.pairs.size(), na);
  }
}

TEST(GreedyMatch, InputOrderDoesNotMatter) {
  Rng rng(5);
  auto c = random_set(30, 8, Role::kChild, rng, "c");
  auto a = random_set(20, 8, Role::kAdult, rng, "a");
  const MatchResult base = greedy_match(c, a);
  std::reverse(c.begin(), c.end());
  std::rotate(a.begin(), a.begin() + 7, a.end());
  const MatchResult shuffled = greedy_match(c, a);
  ASSERT_EQ(base.pairs.size(), shuffled.pairs.size());
  for (std::size_t i = 0; i < base.pairs.size(); ++i) {
    EXPECT_EQ(base.pairs[i].child_id, shuffled.pairs[i].child_id);
    EXPECT_EQ(base.pairs[i].adult_id, shuffled.pairs[i].adult_id);
  }
  EXPECT_EQ(base.unmatched_children, shuffled.unmatched_children);
}

TEST(GreedyMatch, RejectsBadInput) {
  const auto c = normalize_embeddings({utt("c", Role::kChild, {1.0, 0.0})});
  const auto a = normalize_embeddings({utt("a", Role::kAdult, {1.0, 0.0, 0.0})});
  EXPECT_EQ(code_of([&] { greedy_match(c, a); }), ErrorCode::kDimensionMismatch);
  const auto dup = normalize_embeddings({utt("c", Role::kChild, {1.0, 0.0}),
                                         utt("c", Role::kChild, {0.0, 1.0})});
  EXPECT_EQ(code_of([&] { greedy_match(dup, c); }), ErrorCode::kInvalidArgument);
}

TEST(EmbeddingFile, RoundTrip) {
  testing::TempDir dir;
  EmbeddingFile f;
  f.model_name = "toy";
  f.dim = 2;
  f.records = {{"u1", Role::kChild, {0.6, 0.8}}, {"u2", Role::kAdult, {1.0, 0.0}}};
  const auto path = dir.path() / "emb.jsonl";
  write_embedding_file(f, path);
  EXPECT_TRUE(validate_embedding_file(path).ok());
  const EmbeddingFile back = read_embedding_file(path);
  EXPECT_EQ(back.model_name, "toy");
  EXPECT_EQ(back.dim, 2u);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.records[1].id, "u2");
  EXPECT_EQ(back.records[1].role, Role::kAdult);
  EXPECT_EQ(back.records[0].values, f.records[0].values);
}

struct BadFile {
  const char* name;
  const char* body;
  const char* needle;
};

class EmbeddingValidator : public ::testing::TestWithParam<BadFile> {};

TEST_P(EmbeddingValidator, ReportsProblem) {
  testing::TempDir dir;
  const auto path = dir.path() / "emb.jsonl";
  std::ofstream(path) << GetParam().body;
  const ValidationReport r = validate_embedding_file(path);
  ASSERT_FALSE(r.ok());
  bool hit = false;
  for (const auto& e : r.errors) hit |= e.find(GetParam().needle) != std::string::npos;
  EXPECT_TRUE(hit) << r.errors.front();
}

INSTANTIATE_TEST_SUITE_P(
    Cases, EmbeddingValidator,
    ::testing::Values(
        BadFile{"dim", R"({"model_name":"m","dim":2,"count":1}
{"id":"a","role":"child","dim":3,"values":[1,0,0]}
)",
                "dim"},
        BadFile{"duplicate", R"({"model_name":"m","dim":2,"count":2}
{"id":"a","role":"child","dim":2,"values":[1,0]}
{"id":"a","role":"adult","dim":2,"values":[0,1]}
)",
                "duplicate"},
        BadFile{"role", R"({"model_name":"m","dim":2,"count":1}
{"id":"a","role":"teacher","dim":2,"values":[1,0]}
)",
                "role"},
        BadFile{"norm", R"({"model_name":"m","dim":2,"count":1}
{"id":"a","role":"child","dim":2,"values":[3,4]}
)",
                "norm"},
        BadFile{"count", R"({"model_name":"m","dim":2,"count":5}
{"id":"a","role":"child","dim":2,"values":[1,0]}
)",
                "count"},
        BadFile{"json", "{not json}\n", "line 1"}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(EmbeddingFile, ReaderThrowsOnStructuralErrors) {
  testing::TempDir dir;
  const auto path = dir.path() / "emb.jsonl";
  std::ofstream(path) << R"({"model_name":"m","dim":2,"count":1}
{"id":"a","role":"child","dim":2,"values":[1]}
)";
  EXPECT_EQ(code_of([&] { read_embedding_file(path); }), ErrorCode::kMalformedFile);
  EXPECT_EQ(code_of([&] { read_embedding_file(dir.path() / "missing.jsonl"); }),
            ErrorCode::kFileNotFound);
}

TEST(EmbeddingFile, JoinsManifestRows) {
  EmbeddingFile f;
  f.dim = 2;
  f.records = {{"u1", Role::kChild, {0.6, 0.8}}};
  ManifestEntry row;
  row.id = "u1";
  row.role = "child";
  row.transcript = "hi";
  row.speaker_id = "s1";
  row.duration_s = 1.5;
  const std::vector<ManifestEntry> rows{row};
  const auto u = utterances_from_manifest(rows, f);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_EQ(u[0].transcript, "hi");
  EXPECT_EQ(u[0].duration_s, 1.5);
  row.id = "u2";
  const std::vector<ManifestEntry> missing{row};
  EXPECT_EQ(code_of([&] { utterances_from_manifest(missing, f); }), ErrorCode::kMalformedFile);
}

}  // namespace
}  // namespace classim
