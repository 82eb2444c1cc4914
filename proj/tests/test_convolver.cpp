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

#include <cmath>
#include <functional>
#include <map>

#include <gtest/gtest.h>

#include "classim/convolver.hpp"
#include "classim/error.hpp"
#include "classim/kernels.hpp"
#include "classim/seed.hpp"
#include "test_util.hpp"

namespace classim {
namespace {

using testing::rel_l2;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

RirBank tiny_bank() {
  RirBankSpec s;
  s.n_rooms = 1;
  s.positions_per_room = 3;
  s.rir_len_s = 0.1;
  s.sample_rate = 48000;
  s.seed = 2;
  return generate_rir_bank(s);
}

TEST(Convolver, MatchesDirectConvolutionAcrossShapes) {
  const std::pair<std::size_t, std::size_t> shapes[] = {
      {1, 1}, {5, 3}, {3, 5}, {1000, 1}, {1, 1000}, {777, 8192}, {20000, 8193}, {50000, 20000},
  };
  for (auto [n, m] : shapes) {
    const auto x = testing::random_signal(n, n * 31 + m);
    const auto h = testing::random_signal(m, n * 17 + m);
    const PartitionedConvolver engine(h);
    const auto got = engine.apply(x);
    const auto want = kernels::convolve_direct_reference(x, h);
    ASSERT_EQ(got.size(), want.size());
    EXPECT_LT(rel_l2(got, want), 1e-10) << n << " x " << m;
  }
}

TEST(Convolver, PartitionLayout) {
  const PartitionedConvolver short_k(std::vector<double>(100, 1.0));
  EXPECT_EQ(short_k.partitions(), 1u);
  EXPECT_EQ(short_k.block_size(), 512u);
  const PartitionedConvolver long_k(std::vector<double>(48000, 1.0));
  EXPECT_EQ(long_k.block_size(), 16384u);
  EXPECT_EQ(long_k.partitions(), 3u);
  ConvolveOptions fixed;
  fixed.partition_size = 4096;
  const PartitionedConvolver custom(std::vector<double>(48000, 1.0), fixed);
  EXPECT_EQ(custom.block_size(), 4096u);
  EXPECT_EQ(custom.partitions(), 12u);
}

TEST(Convolver, ExplicitPartitionSizeGivesSameResult) {
  const auto x = testing::random_signal(30000, 1);
  const auto h = testing::random_signal(10000, 2);
  ConvolveOptions small;
  small.partition_size = 1024;
  const auto a = PartitionedConvolver(h).apply(x);
  const auto b = PartitionedConvolver(h, small).apply(x);
  EXPECT_LT(rel_l2(a, b), 1e-12);
}

TEST(Convolver, EngineIsReusable) {
  const auto h = testing::random_signal(300, 5);
  const PartitionedConvolver engine(h);
  const auto x = testing::random_signal(1000, 6);
  EXPECT_EQ(engine.apply(x), engine.apply(x));
  EXPECT_TRUE(engine.apply({}).empty());
}

TEST(Convolver, BufferLevelChecks) {
  const AudioBuffer a(testing::random_signal(10, 1), 16000);
  const AudioBuffer b(testing::random_signal(10, 2), 48000);
  EXPECT_EQ(code_of([&] { convolve(a, b); }), ErrorCode::kSampleRateMismatch);
  EXPECT_EQ(code_of([&] { convolve(AudioBuffer({}, 16000), a); }), ErrorCode::kEmptyAudio);
  EXPECT_EQ(code_of([&] { PartitionedConvolver(std::vector<double>{}); }), ErrorCode::kEmptyAudio);
  const AudioBuffer y = convolve(a, AudioBuffer({1.0}, 16000));
  EXPECT_LT(rel_l2(y.samples, a.samples), 1e-14);
}

TEST(Reverberate, ResamplesKernelAndMatchesInputPeak) {
  const RirBank bank = tiny_bank();
  const AudioBuffer speech(testing::tone(300.0, 0.5, 16000, 0.7), 16000);
  const AudioBuffer wet = reverberate(speech, bank.rirs[0]);
  EXPECT_EQ(wet.sample_rate, 16000);
  EXPECT_EQ(wet.size(), speech.size() + 1600 - 1);
  EXPECT_NEAR(wet.peak(), speech.peak(), 1e-12);
}

TEST(Reverberate, AssignmentIsSeededAndRoughlyUniform) {
  EXPECT_EQ(assign_rir(9, "utt_1", 160), assign_rir(9, "utt_1", 160));
  std::map<std::size_t, int> hist;
  for (int i = 0; i < 16000; ++i) ++hist[assign_rir(9, "utt_" + std::to_string(i), 16)];
  ASSERT_EQ(hist.size(), 16u);
  for (auto [k, c] : hist) EXPECT_NEAR(c, 1000, 150) << k;
  EXPECT_EQ(code_of([] { assign_rir(1, "x", 0); }), ErrorCode::kMissingDependency);
}

TEST(Reverberate, BatchWritesFilesAndRecordsRirIds) {
  testing::TempDir dir;
  const RirBank bank = tiny_bank();
  std::vector<ManifestEntry> in;
  for (int i = 0; i < 5; ++i) {
    ManifestEntry e;
    e.id = "utt" + std::to_string(i);
    e.audio_path = e.id + ".wav";
    e.transcript = "hello";
    e.speaker_id = "spk";
    write_wav(AudioBuffer(testing::random_signal(8000, static_cast<std::uint64_t>(i), 0.5), 16000),
              dir / e.audio_path);
    in.push_back(e);
  }
  ReverbBatchOptions opt;
  opt.input_dir = dir.path();
  opt.output_dir = dir / "wet";
  opt.assignment_seed = 4;
  const auto out = reverberate_batch(in, bank, opt);
  ASSERT_EQ(out.size(), 5u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].id, in[i].id);
    EXPECT_EQ(out[i].rir_id, bank.rirs[assign_rir(4, in[i].id, bank.rirs.size())].rir_id);
    EXPECT_EQ(out[i].transcript, "hello");
    const AudioBuffer wet = read_wav(out[i].audio_path);
    const AudioBuffer dry = read_wav(dir / in[i].audio_path);
    EXPECT_NEAR(wet.peak(), dry.peak(), 1e-6);
  }
  RirBank empty;
  EXPECT_EQ(code_of([&] { reverberate_batch(in, empty, opt); }), ErrorCode::kMissingDependency);
  in[2].audio_path = "missing.wav";
  EXPECT_EQ(code_of([&] { reverberate_batch(in, bank, opt); }), ErrorCode::kIoError);
}

}  // namespace
}  // namespace classim
