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

#include "classim/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

#include "classim/error.hpp"

namespace classim {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct WavFormat {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
};

double kaiser(double x, double beta) {
  // x in [-1, 1]
  const double arg = 1.0 - x * x;
  if (arg <= 0.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(arg)) /
         std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

double AudioBuffer::peak() const {
  double p = 0.0;
  for (double v : samples) p = std::max(p, std::abs(v));
  return p;
}

void AudioBuffer::validate() const {
  require(sample_rate > 0, ErrorCode::kInvalidArgument,
          "sample rate must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    require(std::isfinite(samples[i]), ErrorCode::kInvalidArgument,
            "non-finite sample at index " + std::to_string(i));
  }
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorCode::kMalformedFile, path.string() + " is not a RIFF/WAVE file");
  }

  WavFormat fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) fail(ErrorCode::kMalformedFile, "short fmt chunk in " + path.string());
      const unsigned char* f = bytes.data() + body;
      fmt.tag = le16(f);
      fmt.channels = le16(f + 2);
      fmt.rate = le32(f + 4);
      fmt.bits = le16(f + 14);
      if (fmt.tag == kFormatExtensible) {
        if (avail < 26) fail(ErrorCode::kMalformedFile, "short extensible fmt in " + path.string());
        fmt.tag = le16(f + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt || !have_data) {
    fail(ErrorCode::kMalformedFile, path.string() + " lacks fmt or data chunk");
  }
  const bool pcm16 = fmt.tag == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.tag == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !float32) {
    fail(ErrorCode::kUnsupportedEncoding,
         path.string() + ": format tag " + std::to_string(fmt.tag) + " with " +
             std::to_string(fmt.bits) + " bits is not PCM16 or float32");
  }
  if (fmt.channels == 0 || fmt.rate == 0) {
    fail(ErrorCode::kMalformedFile, path.string() + ": zero channels or rate");
  }

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t frames = data_size / frame_bytes;
  if (frames == 0) fail(ErrorCode::kEmptyAudio, path.string() + " holds no samples");

  AudioBuffer out;
  out.sample_rate = static_cast<int>(fmt.rate);
  out.samples.resize(frames);
  const double inv_channels = 1.0 / fmt.channels;
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else {
        const std::uint32_t bits = le32(p);
        float v;
        std::memcpy(&v, &bits, sizeof v);
        acc += static_cast<double>(v);
      }
    }
    out.samples[i] = fmt.channels == 1 ? acc : acc * inv_channels;
  }
  return out;
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavEncoding encoding, ClipPolicy policy) {
  buffer.validate();
  if (policy == ClipPolicy::kStrict) {
    for (std::size_t i = 0; i < buffer.size(); ++i) {
      if (std::abs(buffer.samples[i]) > 1.0) {
        fail(ErrorCode::kClipping, "sample " + std::to_string(i) + " = " +
                                       std::to_string(buffer.samples[i]) +
                                       " exceeds full scale");
      }
    }
  }

  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(buffer.size() * (bits / 8));
  const std::uint32_t fmt_size = pcm ? 16 : 18;

  std::string out;
  out.reserve(64 + data_bytes);
  out.append("RIFF");
  const std::uint32_t riff_size =
      4 + (8 + fmt_size) + (pcm ? 0 : 12) + 8 + data_bytes + (data_bytes & 1u);
  put32(out, riff_size);
  out.append("WAVE");
  out.append("fmt ");
  put32(out, fmt_size);
  put16(out, pcm ? kFormatPcm : kFormatFloat);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate) * (bits / 8));
  put16(out, bits / 8);
  put16(out, bits);
  if (!pcm) {
    put16(out, 0);  // cbSize
    out.append("fact");
    put32(out, 4);
    put32(out, static_cast<std::uint32_t>(buffer.size()));
  }
  out.append("data");
  put32(out, data_bytes);
  for (double v : buffer.samples) {
    const double x = std::clamp(v, -1.0, 1.0);
    if (pcm) {
      const long q = std::lround(x * 32768.0);
      put16(out, static_cast<std::uint16_t>(
                     static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
    } else {
      const float f = static_cast<float>(x);
      std::uint32_t u;
      std::memcpy(&u, &f, sizeof u);
      put32(out, u);
    }
  }
  if (data_bytes & 1u) out.push_back('\0');

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorCode::kIoError, "cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
  require(target_rate > 0, ErrorCode::kInvalidArgument,
          "target sample rate must be positive");
  require(buffer.sample_rate > 0, ErrorCode::kInvalidArgument,
          "source sample rate must be positive");
  if (target_rate == buffer.sample_rate) return buffer;

  const std::int64_t g = std::gcd(target_rate, buffer.sample_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = buffer.sample_rate / g;
  const auto len = static_cast<std::int64_t>(buffer.size());
  const std::int64_t out_len = (2 * len * up + down) / (2 * down);

  constexpr double kZeroCrossings = 32.0;
  constexpr double kRolloff = 0.94;
  constexpr double kBeta = 9.0;
  const double fc = 0.5 * std::min(1.0, static_cast<double>(up) / down) * kRolloff;
  const double half_width = kZeroCrossings / (2.0 * fc);
  const auto reach = static_cast<std::int64_t>(std::ceil(half_width));

  auto kernel = [&](double tau) {
    if (std::abs(tau) >= half_width) return 0.0;
    return 2.0 * fc * sinc(2.0 * fc * tau) * kaiser(tau / half_width, kBeta);
  };

  // One row of taps per output phase; taps cover offsets [-reach, reach].
  const std::int64_t width = 2 * reach + 1;
  const bool tabulate = up <= 4096;
  std::vector<double> table;
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up * width));
    for (std::int64_t p = 0; p < up; ++p) {
      const double frac = static_cast<double>(p) / up;
      for (std::int64_t j = -reach; j <= reach; ++j) {
        table[static_cast<std::size_t>(p * width + j + reach)] = kernel(frac - j);
      }
    }
  }

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.assign(static_cast<std::size_t>(out_len), 0.0);
  const double* x = buffer.samples.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < out_len; ++n) {
    const std::int64_t num = n * down;
    const std::int64_t base = num / up;
    const std::int64_t phase = num % up;
    const std::int64_t lo = std::max<std::int64_t>(-reach, -base);
    const std::int64_t hi = std::min<std::int64_t>(reach, len - 1 - base);
    double acc = 0.0;
    if (tabulate) {
      const double* row = table.data() + phase * width + reach;
      for (std::int64_t j = lo; j <= hi; ++j) acc += x[base + j] * row[j];
    } else {
      const double frac = static_cast<double>(phase) / up;
      for (std::int64_t j = lo; j <= hi; ++j) acc += x[base + j] * kernel(frac - j);
    }
    out.samples[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

double gain_to_db(double gain) {
  if (gain <= 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(gain);
}

LevelReport measure_level(const AudioBuffer& buffer, const LevelOptions& options) {
  require(!buffer.empty(), ErrorCode::kEmptyAudio, "cannot measure an empty buffer");
  require(options.frame_ms > 0.0, ErrorCode::kInvalidArgument,
          "frame_ms must be positive");

  LevelReport report;
  report.rms = rms(buffer.samples);
  report.rms_db = gain_to_db(report.rms);

  const auto frame = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(options.frame_ms * buffer.sample_rate / 1000.0)));
  const double gate_db = report.rms_db + options.threshold_db;
  double active_energy = 0.0;
  std::size_t active_samples = 0;
  for (std::size_t start = 0; start < buffer.size(); start += frame) {
    const std::size_t n = std::min(frame, buffer.size() - start);
    double energy = 0.0;
    for (std::size_t i = start; i < start + n; ++i) {
      energy += buffer.samples[i] * buffer.samples[i];
    }
    ++report.total_frames;
    const double frame_db = gain_to_db(std::sqrt(energy / static_cast<double>(n)));
    if (report.rms > 0.0 && frame_db > gate_db) {
      ++report.active_frames;
      active_energy += energy;
      active_samples += n;
    }
  }
  report.active_rms =
      active_samples ? std::sqrt(active_energy / static_cast<double>(active_samples)) : 0.0;
  return report;
}

}  // namespace classim
