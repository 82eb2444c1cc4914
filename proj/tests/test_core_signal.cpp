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
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "classim/audio.hpp"
#include "classim/error.hpp"
#include "classim/fft.hpp"
#include "classim/kernels.hpp"
#include "classim/seed.hpp"
#include "test_util.hpp"

namespace classim {
namespace {

using testing::rel_l2;
using testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

TEST(Seed, FnvMatchesPublishedVectors) {
  EXPECT_EQ(hash_string(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hash_string("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hash_string("foobar"), 0x85944171f73967e8ULL);
}

TEST(Seed, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(7, "rir-bank"), derive_seed(7, "rir-bank"));
  EXPECT_NE(derive_seed(7, "rir-bank"), derive_seed(8, "rir-bank"));
  EXPECT_NE(derive_seed(7, "rir-bank"), derive_seed(7, "babble"));
}

TEST(Seed, RngStreamIsReproducible) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  // mt19937_64 reference: the 10000th output for the default seed.
  std::mt19937_64 ref;
  ref.discard(9999);
  EXPECT_EQ(ref(), 9981545732273789042ULL);
}

TEST(Seed, UniformAndBelowStayInRange) {
  Rng rng(1);
  double mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u;
    ASSERT_LT(rng.below(7), 7u);
  }
  EXPECT_NEAR(mean / 20000, 0.5, 0.01);
}

TEST(Seed, ExponentialAndNormalMoments) {
  Rng rng(3);
  double se = 0.0, sn = 0.0, sn2 = 0.0;
  constexpr int kN = 50000;
  for (int i = 0; i < kN; ++i) {
    se += rng.exponential(2.0);
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(se / kN, 0.5, 0.01);
  EXPECT_NEAR(sn / kN, 0.0, 0.02);
  EXPECT_NEAR(sn2 / kN, 1.0, 0.03);
}

TEST(Wav, Float32RoundTripIsExactToFloatPrecision) {
  TempDir dir;
  AudioBuffer a(testing::random_signal(1000, 5, 0.9), 44100);
  write_wav(a, dir / "a.wav", WavEncoding::kFloat32);
  const AudioBuffer b = read_wav(dir / "a.wav");
  ASSERT_EQ(b.size(), a.size());
  EXPECT_EQ(b.sample_rate, 44100);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(b.samples[i], static_cast<double>(static_cast<float>(a.samples[i])));
  }
}

TEST(Wav, Pcm16RoundTripWithinHalfStep) {
  TempDir dir;
  AudioBuffer a(testing::random_signal(1000, 6, 0.99), 16000);
  write_wav(a, dir / "a.wav", WavEncoding::kPcm16);
  const AudioBuffer b = read_wav(dir / "a.wav");
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LE(std::abs(b.samples[i] - a.samples[i]), 0.5 / 32768 + 1e-12);
  }
}

TEST(Wav, ClampAndStrictPolicies) {
  TempDir dir;
  AudioBuffer a({1.5, -2.0, 0.25}, 16000);
  write_wav(a, dir / "c.wav", WavEncoding::kPcm16, ClipPolicy::kClamp);
  const AudioBuffer b = read_wav(dir / "c.wav");
  EXPECT_NEAR(b.samples[0], 32767.0 / 32768.0, 1e-12);
  EXPECT_DOUBLE_EQ(b.samples[1], -1.0);
  EXPECT_DOUBLE_EQ(b.samples[2], 0.25);
  EXPECT_EQ(code_of([&] { write_wav(a, dir / "s.wav", WavEncoding::kPcm16, ClipPolicy::kStrict); }),
            ErrorCode::kClipping);
}

TEST(Wav, StereoIsAveragedToMono) {
  TempDir dir;
  // Hand-built 16-bit stereo file with frames (+0.5, -0.25) and (1.0-, 0).
  const std::int16_t frames[] = {16384, -8192, 32767, 0};
  std::ofstream f(dir / "st.wav", std::ios::binary);
  auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  f.write("RIFF", 4);
  u32(36 + sizeof frames);
  f.write("WAVEfmt ", 8);
  u32(16);
  u16(1);
  u16(2);
  u32(8000);
  u32(8000 * 4);
  u16(4);
  u16(16);
  f.write("data", 4);
  u32(sizeof frames);
  f.write(reinterpret_cast<const char*>(frames), sizeof frames);
  f.close();
  const AudioBuffer b = read_wav(dir / "st.wav");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.sample_rate, 8000);
  EXPECT_DOUBLE_EQ(b.samples[0], 0.5 * (16384 - 8192) / 32768.0);
  EXPECT_DOUBLE_EQ(b.samples[1], 0.5 * 32767 / 32768.0);
}

TEST(Wav, ErrorsCarryCategories) {
  TempDir dir;
  EXPECT_EQ(code_of([&] { read_wav(dir / "missing.wav"); }), ErrorCode::kFileNotFound);
  std::ofstream(dir / "junk.wav") << "not a wave file at all";
  EXPECT_EQ(code_of([&] { read_wav(dir / "junk.wav"); }), ErrorCode::kMalformedFile);
  write_wav(AudioBuffer({}, 16000), dir / "empty.wav");
  EXPECT_EQ(code_of([&] { read_wav(dir / "empty.wav"); }), ErrorCode::kEmptyAudio);
}

TEST(Resample, IdentityWhenRatesMatch) {
  AudioBuffer a(testing::random_signal(100, 1), 16000);
  EXPECT_EQ(resample(a, 16000).samples, a.samples);
}

TEST(Resample, LengthFollowsRateRatio) {
  AudioBuffer a(std::vector<double>(48000, 0.0), 48000);
  EXPECT_EQ(resample(a, 16000).size(), 16000u);
  EXPECT_EQ(resample(a, 44100).size(), 44100u);
  AudioBuffer odd(std::vector<double>(1001, 0.0), 48000);
  EXPECT_EQ(resample(odd, 16000).size(), 334u);  // round(1001 / 3)
}

TEST(Resample, InBandToneSurvivesDownsampling) {
  AudioBuffer a(testing::tone(1000.0, 1.0, 48000), 48000);
  const AudioBuffer b = resample(a, 16000);
  const auto want = testing::tone(1000.0, 1.0, 16000);
  // Ignore the filter's edge transients.
  const std::span<const double> got_mid(b.samples.data() + 200, 15600);
  const std::span<const double> want_mid(want.data() + 200, 15600);
  EXPECT_LT(rel_l2(got_mid, want_mid), 1e-3);
}

TEST(Resample, OutOfBandToneIsRejected) {
  AudioBuffer a(testing::tone(12000.0, 1.0, 48000), 48000);
  const AudioBuffer b = resample(a, 16000);
  const std::span<const double> mid(b.samples.data() + 200, 15600);
  EXPECT_LT(rms(mid), 1e-3 * 0.5);
}

TEST(Level, DecibelHelpers) {
  EXPECT_DOUBLE_EQ(db_to_gain(0.0), 1.0);
  EXPECT_NEAR(db_to_gain(20.0), 10.0, 1e-12);
  EXPECT_NEAR(gain_to_db(0.1), -20.0, 1e-12);
  EXPECT_TRUE(std::isinf(gain_to_db(0.0)));
}

TEST(Level, ActiveRmsIgnoresSilence) {
  // One second of tone followed by one second of silence.
  auto x = testing::tone(440.0, 1.0, 16000, 0.5);
  x.resize(32000, 0.0);
  const LevelReport r = measure_level(AudioBuffer(x, 16000));
  EXPECT_NEAR(r.active_rms, 0.5 / std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(r.rms, 0.5 / 2.0, 1e-3);
  EXPECT_EQ(r.total_frames, 80u);
  EXPECT_EQ(r.active_frames, 40u);
}

TEST(Level, SilentBufferHasNoActiveFrames) {
  const LevelReport r = measure_level(AudioBuffer(std::vector<double>(1600, 0.0), 16000));
  EXPECT_EQ(r.active_frames, 0u);
  EXPECT_EQ(r.active_rms, 0.0);
}

TEST(Fft, ForwardInverseRoundTrip) {
  for (std::size_t n : {8u, 64u, 1000u, 4096u}) {
    const RealFft fft(n);
    auto x = testing::random_signal(n, n);
    std::vector<std::complex<double>> X(fft.spectrum_size());
    fft.forward(x, X);
    std::vector<double> y(n);
    fft.inverse(X, y);
    for (double& v : y) v /= static_cast<double>(n);
    EXPECT_LT(rel_l2(y, x), 1e-12) << n;
  }
}

TEST(Fft, NextPow2) {
  EXPECT_EQ(next_pow2(1), 1u);
  EXPECT_EQ(next_pow2(5), 8u);
  EXPECT_EQ(next_pow2(1024), 1024u);
  EXPECT_EQ(next_pow2(1025), 2048u);
}

TEST(Kernels, DirectConvolutionMatchesReference) {
  for (auto [n, m] : {std::pair{1, 1}, {7, 3}, {3, 7}, {5000, 300}, {300, 5000}, {4097, 2049}}) {
    const auto x = testing::random_signal(static_cast<std::size_t>(n), 10 + n);
    const auto h = testing::random_signal(static_cast<std::size_t>(m), 20 + m);
    const auto want = kernels::convolve_direct_reference(x, h);
    const auto got = kernels::convolve_direct(x, h);
    ASSERT_EQ(got.size(), want.size());
    EXPECT_LT(rel_l2(got, want), 1e-13) << n << "x" << m;
  }
}

TEST(Kernels, ConvolutionOfImpulseIsIdentity) {
  const auto x = testing::random_signal(100, 3);
  const auto y = kernels::convolve_direct(x, std::vector<double>{1.0});
  EXPECT_EQ(y, x);
  EXPECT_TRUE(kernels::convolve_direct({}, x).empty());
}

TEST(Kernels, SimilarityMatrixMatchesReference) {
  std::vector<std::vector<double>> rows, cols;
  for (int i = 0; i < 13; ++i) rows.push_back(testing::random_signal(9, 100 + i));
  for (int j = 0; j < 7; ++j) cols.push_back(testing::random_signal(9, 200 + j));
  EXPECT_EQ(kernels::similarity_matrix(rows, cols),
            kernels::similarity_matrix_reference(rows, cols));
  cols.push_back(std::vector<double>(8, 0.0));
  EXPECT_EQ(code_of([&] { kernels::similarity_matrix(rows, cols); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Error, CodesHaveNames) {
  std::set<std::string> names;
  for (auto c : {ErrorCode::kInvalidArgument, ErrorCode::kFileNotFound, ErrorCode::kClipping,
                 ErrorCode::kZeroVector, ErrorCode::kInvalidConfig}) {
    names.insert(std::string(to_string(c)));
  }
  EXPECT_EQ(names.size(), 5u);
}

}  // namespace
}  // namespace classim
