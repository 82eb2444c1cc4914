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

// Command-line entry point. Every stage reads the same JSON config; flags
// override individual fields.
//
// Exit codes: 0 success, 2 invalid config or usage, 3 missing inputs,
// 4 runtime failure.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "classim/config.hpp"
#include "classim/demo.hpp"
#include "classim/error.hpp"
#include "classim/pipeline.hpp"

extern char** environ;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;
constexpr int kExitRuntime = 4;

void log_line(classim::Json j) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  j["ts"] = std::chrono::duration<double>(now).count();
  std::cerr << j.dump() << "\n";
}

void log_error(const std::string& stage, const std::exception& ex, int code) {
  log_line({{"level", "error"}, {"stage", stage}, {"message", ex.what()}, {"exit", code}});
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool dry_run = false;
  std::vector<std::string> conditions;
  std::string output;
};

int run(const std::string& stage, const Flags& flags) {
  classim::PipelineConfig cfg;
  try {
    cfg = classim::load_config(flags.config, environ);
    if (flags.seed) cfg.seed = flags.seed;
    if (flags.workers) cfg.workers = *flags.workers;
    if (!flags.output.empty()) cfg.paths.output = flags.output;
    if (!flags.conditions.empty()) {
      cfg.conditions.clear();
      for (const auto& c : flags.conditions) cfg.conditions.push_back(classim::condition_from_string(c));
    }
    cfg.validate();
  } catch (const classim::Error& ex) {
    const int code = ex.code() == classim::ErrorCode::kFileNotFound ? kExitMissing : kExitConfig;
    log_error(stage, ex, code);
    return code;
  }

  try {
    classim::check_stage_inputs(stage, cfg);
  } catch (const classim::Error& ex) {
    const int code = ex.code() == classim::ErrorCode::kFileNotFound ? kExitMissing : kExitConfig;
    log_error(stage, ex, code);
    return code;
  }

  if (cfg.workers > 0) omp_set_num_threads(cfg.workers);

  if (flags.dry_run) {
    for (auto& step : classim::stage_plan(stage, cfg)) {
      step["event"] = "plan";
      step["master_seed"] = *cfg.seed;
      std::cout << step.dump() << "\n";
    }
    return 0;
  }

  try {
    log_line({{"level", "info"},
              {"stage", stage},
              {"event", "config"},
              {"master_seed", *cfg.seed},
              {"workers", cfg.workers > 0 ? cfg.workers : omp_get_max_threads()},
              {"output", cfg.paths.output.string()}});
    classim::run_pipeline(stage, cfg, log_line);
  } catch (const classim::Error& ex) {
    const bool missing = ex.code() == classim::ErrorCode::kFileNotFound ||
                         ex.code() == classim::ErrorCode::kMissingDependency;
    const int code = missing ? kExitMissing : kExitRuntime;
    log_error(stage, ex, code);
    return code;
  } catch (const std::exception& ex) {
    log_error(stage, ex, kExitRuntime);
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classroom speech dataset toolkit"};
  app.require_subcommand(1);

  Flags flags;
  std::string selected;
  const std::vector<std::pair<std::string, std::string>> stages{
      {"sweep-gen", "Write the excitation sweep and its inverse filter"},
      {"rir-extract", "Deconvolve measured sweep recordings into RIRs"},
      {"rir-bank", "Simulate the shoebox RIR bank"},
      {"babble", "Render classroom babble noise tracks"},
      {"partition", "Assign speakers to train/dev/test"},
      {"pair", "Match child and adult utterances by embedding similarity"},
      {"assemble", "Build clean dialogues from matched pairs"},
      {"mix", "Render the rir/noise/rir+noise conditions"},
      {"pipeline", "Run rir-bank, babble, partition, pair, assemble and mix"},
  };
  for (const auto& [name, help] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", flags.config, "JSON config file")->required();
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--workers", flags.workers, "Worker threads (0 = all cores)");
    sub->add_flag("--dry-run", flags.dry_run, "Validate and print the plan only");
    sub->add_option("--condition", flags.conditions,
                    "Condition to render (clean, rir, noise, rir+noise); repeatable");
    sub->add_option("-o,--output", flags.output, "Output root");
    sub->callback([&selected, name = name] { selected = name; });
  }

  std::string demo_dir;
  std::uint64_t demo_seed = 1;
  CLI::App* demo = app.add_subcommand("make-demo", "Write a small synthetic input corpus");
  demo->add_option("dir", demo_dir, "Target directory")->required();
  demo->add_option("--seed", demo_seed, "Seed for the synthetic corpus");
  demo->callback([&] { selected = "make-demo"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (selected == "make-demo") {
    try {
      classim::DemoSpec spec;
      spec.seed = demo_seed;
      classim::make_demo(demo_dir, spec);
      log_line({{"level", "info"}, {"stage", "make-demo"}, {"event", "done"}, {"dir", demo_dir}});
      return 0;
    } catch (const std::exception& ex) {
      log_error("make-demo", ex, kExitRuntime);
      return kExitRuntime;
    }
  }
  return run(selected, flags);
}
