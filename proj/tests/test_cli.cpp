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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "classim/config.hpp"
#include "classim/error.hpp"
#include "test_util.hpp"

namespace classim {
namespace {

namespace fs = std::filesystem;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CLASSIM_CLI) + " " + args + " >" + (log / "stdout.txt").string() +
                          " 2>" + (log / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Relative path -> contents for every regular file under root.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

std::size_t count_ext(const fs::path& root, const std::string& ext) {
  if (!fs::exists(root)) return 0;
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(root)) n += e.path().extension() == ext;
  return n;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Config, ParsesAndResolvesRelativePaths) {
  const Json j = Json::parse(R"({
    "seed": 5, "paths": {"utterances": "u.jsonl", "output": "out"},
    "rir_bank": {"n_rooms": 3, "rir_len_s": 0.2},
    "assembly": {"overlap_range_s": [0.4, 0.9]},
    "mix": {"snr_range_db": [-5, 25]},
    "conditions": ["clean", "rir+noise"]})");
  const PipelineConfig c = config_from_json(j, "/data/cfg");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.paths.utterances, fs::path("/data/cfg/u.jsonl"));
  EXPECT_EQ(c.rir_bank_dir(), fs::path("/data/cfg/out/rir_bank"));
  EXPECT_EQ(c.rir_bank.n_rooms, 3);
  EXPECT_EQ(c.assembly.overlap_min_s, 0.4);
  EXPECT_EQ(c.snr_min_db, -5.0);
  EXPECT_EQ(c.conditions.size(), 2u);
  EXPECT_NO_THROW(c.validate());
  // Round trip through JSON keeps every field.
  const PipelineConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(code_of([] { config_from_json(Json::parse(R"({"sed": 1})")); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { config_from_json(Json::parse(R"({"rir_bank": {"rooms": 1}})")); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { config_from_json(Json::parse(R"({"seed": -1})")); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { config_from_json(Json::parse(R"({"conditions": ["reverb"]})")); }),
            ErrorCode::kInvalidConfig);
  PipelineConfig c = config_from_json(Json::parse(R"({"paths": {"output": "/tmp/x"}})"));
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);  // no seed
  c.seed = 1;
  c.splits.train = 0.5;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);
}

TEST(Config, StageSeedsDiffer) {
  PipelineConfig c;
  c.seed = 1;
  EXPECT_NE(c.stage_seed("babble"), c.stage_seed("mix"));
  EXPECT_EQ(c.stage_seed("babble"), c.stage_seed("babble"));
}

TEST(Config, EnvironmentOverrides) {
  Json tree = Json::parse(R"({"seed": 1, "rir_bank": {"n_rooms": 2}})");
  std::string a = "CLASSIM_SEED=9", b = "CLASSIM_RIR_BANK__N_ROOMS=4", c = "CLASSIM_PATHS__OUTPUT=/o",
              d = "OTHER=1";
  char* env[] = {a.data(), b.data(), c.data(), d.data(), nullptr};
  apply_env_overrides(tree, env);
  EXPECT_EQ(tree["seed"], 9);
  EXPECT_EQ(tree["rir_bank"]["n_rooms"], 4);
  EXPECT_EQ(tree["paths"]["output"], "/o");
  EXPECT_FALSE(tree.contains("other"));
}

TEST(Cli, ExitCodes) {
  testing::TempDir dir;
  EXPECT_EQ(run_cli("rir-bank", dir.path()), 2);  // missing --config
  EXPECT_EQ(run_cli("rir-bank -c " + (dir / "nope.json").string(), dir.path()), 3);
  write_text(dir / "bad.json", R"({"seed": 1, "bogus": true, "paths": {"output": "out"}})");
  EXPECT_EQ(run_cli("rir-bank -c " + (dir / "bad.json").string(), dir.path()), 2);
  write_text(dir / "noseed.json", R"({"paths": {"output": "out"}})");
  EXPECT_EQ(run_cli("rir-bank -c " + (dir / "noseed.json").string(), dir.path()), 2);
  EXPECT_NE(slurp(dir / "stderr.txt").find("\"level\":\"error\""), std::string::npos);
  // pair needs utterances and embeddings that do not exist.
  write_text(dir / "pair.json",
             R"({"seed": 1, "paths": {"output": "out", "utterances": "u.jsonl", "embeddings": "e.jsonl"}})");
  EXPECT_EQ(run_cli("pair -c " + (dir / "pair.json").string(), dir.path()), 3);
}

TEST(Cli, RirBankWritesEveryPair) {
  testing::TempDir dir;
  write_text(dir / "cfg.json", R"({"seed": 3, "paths": {"output": "out"},
    "rir_bank": {"n_rooms": 2, "rir_len_s": 0.05, "sample_rate": 16000, "max_order": 3}})");
  ASSERT_EQ(run_cli("rir-bank -c " + (dir / "cfg.json").string(), dir.path()), 0)
      << slurp(dir / "stderr.txt");
  EXPECT_EQ(count_ext(dir / "out/rir_bank", ".wav"), 40u);
}

TEST(Cli, DryRunWritesNoAudio) {
  testing::TempDir dir;
  ASSERT_EQ(run_cli("make-demo " + (dir / "demo").string(), dir.path()), 0);
  const std::size_t before = count_ext(dir / "demo", ".wav");
  ASSERT_EQ(run_cli("pipeline --dry-run -c " + (dir / "demo/config.json").string(), dir.path()), 0)
      << slurp(dir / "stderr.txt");
  EXPECT_EQ(count_ext(dir / "demo", ".wav"), before);
  EXPECT_FALSE(fs::exists(dir / "demo/out"));
  const std::string plan = slurp(dir / "stdout.txt");
  for (const char* stage : {"rir-bank", "babble", "partition", "pair", "assemble", "mix"}) {
    EXPECT_NE(plan.find(std::string("\"") + stage + "\""), std::string::npos) << stage;
  }
}

TEST(Cli, PipelineIsReproducible) {
  testing::TempDir dir;
  ASSERT_EQ(run_cli("make-demo " + (dir / "demo").string(), dir.path()), 0);
  const std::string cfg = (dir / "demo/config.json").string();
  ASSERT_EQ(run_cli("pipeline -c " + cfg + " -o " + (dir / "run1").string(), dir.path()), 0)
      << slurp(dir / "stderr.txt");
  ASSERT_EQ(run_cli("pipeline -c " + cfg + " -o " + (dir / "run2").string() + " --workers 1", dir.path()), 0)
      << slurp(dir / "stderr.txt");
  const auto a = tree(dir / "run1");
  const auto b = tree(dir / "run2");
  EXPECT_GT(a.size(), 10u);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [path, bytes] : a) {
    ASSERT_TRUE(b.count(path)) << path;
    EXPECT_TRUE(bytes == b.at(path)) << path;
  }
  for (const char* c : {"clean", "rir", "noise", "rir+noise"}) {
    EXPECT_TRUE(fs::exists(dir / "run1/manifests" / (std::string(c) + "_train.jsonl"))) << c;
  }
  // A different seed gives different audio.
  ASSERT_EQ(run_cli("pipeline -c " + cfg + " --seed 2 -o " + (dir / "run3").string(), dir.path()), 0);
  EXPECT_NE(tree(dir / "run3"), a);
}

}  // namespace
}  // namespace classim
