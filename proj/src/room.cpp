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

#include "classim/room.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "classim/error.hpp"
#include "classim/seed.hpp"

namespace classim {
namespace {

constexpr int kSincHalf = 16;  // 32-tap fractional delay

struct Image {
  double delay;  // samples
  double amplitude;
};

// Enumerates image sources for one range of x-lattice indices. Shared by the
// parallel renderer and the serial reference so both see the same image set.
struct ImageLattice {
  const Room& room;
  Vec3 src;
  Vec3 rcv;
  double fs;
  double max_delay;  // samples
  int max_order;
  double min_amplitude;
  int nx, ny, nz;
  std::array<double, 6> beta;

  ImageLattice(const Room& r, const Vec3& s, const Vec3& v,
               const SimulationOptions& opt)
      : room(r), src(s), rcv(v), fs(opt.sample_rate) {
    const double len = opt.rir_len_s * fs;
    max_delay = len + kSincHalf;
    max_order = opt.max_order;
    const double direct = 1.0 / (4.0 * std::numbers::pi * distance(s, v));
    min_amplitude = std::isfinite(opt.min_relative_db)
                        ? direct * std::pow(10.0, opt.min_relative_db / 20.0)
                        : 0.0;
    const double reach = max_delay / fs * room.speed_of_sound;
    nx = static_cast<int>(std::ceil(reach / (2.0 * room.dims.x))) + 1;
    ny = static_cast<int>(std::ceil(reach / (2.0 * room.dims.y))) + 1;
    nz = static_cast<int>(std::ceil(reach / (2.0 * room.dims.z))) + 1;
    if (max_order >= 0) {
      nx = std::min(nx, max_order / 2 + 1);
      ny = std::min(ny, max_order / 2 + 1);
      nz = std::min(nz, max_order / 2 + 1);
    }
    for (std::size_t i = 0; i < 6; ++i) beta[i] = std::sqrt(1.0 - r.absorption[i]);
  }

  template <typename F>
  void visit(int mx_lo, int mx_hi, F&& emit) const {
    const double lx = room.dims.x, ly = room.dims.y, lz = room.dims.z;
    const double to_samples = fs / room.speed_of_sound;
    for (int mx = mx_lo; mx <= mx_hi; ++mx) {
      for (int q = 0; q <= 1; ++q) {
        const double rx = (1 - 2 * q) * src.x - rcv.x + 2.0 * mx * lx;
        const int ox = std::abs(2 * mx - q);
        if (max_order >= 0 && ox > max_order) continue;
        const double gx = std::pow(beta[kWallX0], std::abs(mx - q)) *
                          std::pow(beta[kWallX1], std::abs(mx));
        for (int my = -ny; my <= ny; ++my) {
          for (int j = 0; j <= 1; ++j) {
            const double ry = (1 - 2 * j) * src.y - rcv.y + 2.0 * my * ly;
            const int oy = std::abs(2 * my - j);
            if (max_order >= 0 && ox + oy > max_order) continue;
            const double gy = std::pow(beta[kWallY0], std::abs(my - j)) *
                              std::pow(beta[kWallY1], std::abs(my));
            for (int mz = -nz; mz <= nz; ++mz) {
              for (int k = 0; k <= 1; ++k) {
                const double rz = (1 - 2 * k) * src.z - rcv.z + 2.0 * mz * lz;
                const int oz = std::abs(2 * mz - k);
                if (max_order >= 0 && ox + oy + oz > max_order) continue;
                const double d = std::sqrt(rx * rx + ry * ry + rz * rz);
                const double delay = d * to_samples;
                if (delay >= max_delay) continue;
                const double gz = std::pow(beta[kFloor], std::abs(mz - k)) *
                                  std::pow(beta[kCeiling], std::abs(mz));
                const double amp = gx * gy * gz / (4.0 * std::numbers::pi * d);
                if (amp <= 0.0 || amp < min_amplitude) continue;
                emit(Image{delay, amp});
              }
            }
          }
        }
      }
    }
  }
};

void check_positions(const Room& room, const Vec3& source, const Vec3& receiver) {
  room.validate();
  require(room.contains(source), ErrorCode::kInvalidArgument,
          "source lies outside room " + room.room_id);
  require(room.contains(receiver), ErrorCode::kInvalidArgument,
          "receiver lies outside room " + room.room_id);
  require(distance(source, receiver) > 0.0, ErrorCode::kInvalidArgument,
          "source and receiver coincide");
}

std::size_t rir_length(const SimulationOptions& options) {
  require(options.sample_rate > 0 && options.rir_len_s > 0.0,
          ErrorCode::kInvalidArgument, "rir length and sample rate must be positive");
  return static_cast<std::size_t>(std::lround(options.rir_len_s * options.sample_rate));
}

// Adds one image through the windowed sinc. The sinc numerator alternates
// sign tap to tap and the Hann window follows a cosine recurrence, so each
// image costs one sin and one cos.
void add_image(const Image& img, std::span<double> out) {
  const auto len = static_cast<std::int64_t>(out.size());
  const double base = std::floor(img.delay);
  const auto n0 = static_cast<std::int64_t>(base) - (kSincHalf - 1);
  const double u0 = static_cast<double>(n0) - img.delay;  // in (-16, -15]
  const double s0 = std::sin(std::numbers::pi * u0);
  constexpr double kStep = std::numbers::pi / kSincHalf;
  const double two_cos_step = 2.0 * std::cos(kStep);
  double c_prev = std::cos(kStep * (u0 - 1.0));
  double c_cur = std::cos(kStep * u0);
  double sign = 1.0;
  for (int t = 0; t < 2 * kSincHalf; ++t) {
    const std::int64_t n = n0 + t;
    const double u = u0 + t;
    if (n >= 0 && n < len && std::abs(u) < kSincHalf) {
      const double s = u == 0.0 ? 1.0 : sign * s0 / (std::numbers::pi * u);
      out[static_cast<std::size_t>(n)] += img.amplitude * 0.5 * (1.0 + c_cur) * s;
    }
    const double c_next = two_cos_step * c_cur - c_prev;
    c_prev = c_cur;
    c_cur = c_next;
    sign = -sign;
  }
}

void highpass(std::span<double> x, double cutoff_hz, int sample_rate) {
  if (cutoff_hz <= 0.0) return;
  require(cutoff_hz < sample_rate / 2.0, ErrorCode::kInvalidArgument,
          "high-pass cutoff must lie below Nyquist");
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / std::sqrt(2.0);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  const double b0 = (1.0 + cw) / 2.0 / a0;
  const double b1 = -(1.0 + cw) / a0;
  const double b2 = b0;
  const double a1 = -2.0 * cw / a0;
  const double a2 = (1.0 - alpha) / a0;
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace

void Room::validate() const {
  require(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0, ErrorCode::kInvalidArgument,
          "room dimensions must be positive");
  for (double a : absorption) {
    require(a >= 0.0 && a <= 1.0, ErrorCode::kInvalidArgument,
            "absorption coefficients must lie in [0, 1]");
  }
  require(speed_of_sound > 0.0, ErrorCode::kInvalidArgument,
          "speed of sound must be positive");
}

double Room::volume() const { return dims.x * dims.y * dims.z; }

double Room::absorption_area() const {
  const double floor_area = dims.x * dims.y;
  const double x_wall = dims.y * dims.z;
  const double y_wall = dims.x * dims.z;
  return floor_area * (absorption[kFloor] + absorption[kCeiling]) +
         x_wall * (absorption[kWallX0] + absorption[kWallX1]) +
         y_wall * (absorption[kWallY0] + absorption[kWallY1]);
}

bool Room::contains(const Vec3& p, double margin) const {
  return p.x > margin && p.x < dims.x - margin && p.y > margin &&
         p.y < dims.y - margin && p.z > margin && p.z < dims.z - margin;
}

Rir simulate_rir(const Room& room, const Vec3& source, const Vec3& receiver,
                 const SimulationOptions& options) {
  check_positions(room, source, receiver);
  const std::size_t len = rir_length(options);
  const ImageLattice lattice(room, source, receiver, options);

  // The x-lattice is cut into a fixed number of slabs, each accumulated into
  // its own buffer and summed in slab order; the result does not depend on
  // how many threads run.
  const int span_x = 2 * lattice.nx + 1;
  const int slabs = std::min(span_x, 16);
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(slabs));
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < slabs; ++s) {
    const int lo = -lattice.nx + (span_x * s) / slabs;
    const int hi = -lattice.nx + (span_x * (s + 1)) / slabs - 1;
    std::vector<double> acc(len, 0.0);
    lattice.visit(lo, hi, [&](const Image& img) { add_image(img, acc); });
    partial[static_cast<std::size_t>(s)] = std::move(acc);
  }

  Rir rir;
  rir.room_id = room.room_id;
  rir.source_pos = source;
  rir.receiver_pos = receiver;
  rir.origin = RirOrigin::kSimulated;
  rir.taps.sample_rate = options.sample_rate;
  rir.taps.samples.assign(len, 0.0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < len; ++i) rir.taps.samples[i] += p[i];
  }
  highpass(rir.taps.samples, options.highpass_hz, options.sample_rate);
  return rir;
}

std::vector<double> simulate_rir_reference(const Room& room, const Vec3& source,
                                           const Vec3& receiver,
                                           const SimulationOptions& options) {
  check_positions(room, source, receiver);
  const std::size_t len = rir_length(options);
  const ImageLattice lattice(room, source, receiver, options);
  std::vector<double> out(len, 0.0);
  lattice.visit(-lattice.nx, lattice.nx, [&](const Image& img) {
    const auto first = static_cast<std::int64_t>(std::floor(img.delay)) - (kSincHalf - 1);
    for (std::int64_t n = first; n < first + 2 * kSincHalf; ++n) {
      if (n < 0 || n >= static_cast<std::int64_t>(len)) continue;
      const double u = static_cast<double>(n) - img.delay;
      if (std::abs(u) >= kSincHalf) continue;
      const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * u / kSincHalf));
      const double s = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
      out[static_cast<std::size_t>(n)] += img.amplitude * window * s;
    }
  });
  highpass(out, options.highpass_hz, options.sample_rate);
  return out;
}

double sabine_t60(const Room& room) {
  room.validate();
  const double a = room.absorption_area();
  require(a > 0.0, ErrorCode::kInvalidArgument,
          "all surfaces are fully reflective; reverberation time is infinite");
  return 0.161 * room.volume() / a;
}

std::vector<double> energy_decay_db(std::span<const double> rir) {
  std::vector<double> edc(rir.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  const double total = acc;
  for (double& v : edc) {
    v = (total > 0.0 && v > 0.0) ? 10.0 * std::log10(v / total)
                                 : -std::numeric_limits<double>::infinity();
  }
  return edc;
}

double schroeder_t60(std::span<const double> rir, int sample_rate, double upper_db,
                     double lower_db) {
  require(sample_rate > 0, ErrorCode::kInvalidArgument, "sample rate must be positive");
  require(upper_db > lower_db, ErrorCode::kInvalidArgument,
          "fit range must satisfy upper_db > lower_db");
  const std::vector<double> edc = energy_decay_db(rir);
  std::size_t start = edc.size(), stop = edc.size();
  for (std::size_t i = 0; i < edc.size(); ++i) {
    if (start == edc.size() && edc[i] <= upper_db) start = i;
    if (edc[i] <= lower_db) {
      stop = i;
      break;
    }
  }
  require(start < stop && stop < edc.size(), ErrorCode::kInvalidArgument,
          "energy decay never reaches the lower fit bound");
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  const double n = static_cast<double>(stop - start + 1);
  for (std::size_t i = start; i <= stop; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    st += t;
    sy += edc[i];
    stt += t * t;
    sty += t * edc[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  require(slope < 0.0, ErrorCode::kInvalidArgument, "energy decay is not decreasing");
  return -60.0 / slope;
}

void RirBankSpec::validate() const {
  require(n_rooms >= 1, ErrorCode::kInvalidArgument, "n_rooms must be >= 1");
  require(positions_per_room >= 2, ErrorCode::kInvalidArgument,
          "positions_per_room must be >= 2");
  require(dims_min.x <= dims_max.x && dims_min.y <= dims_max.y && dims_min.z <= dims_max.z,
          ErrorCode::kInvalidArgument, "dimension ranges must satisfy min <= max");
  require(dims_min.x > 0.0 && dims_min.y > 0.0 && dims_min.z > 0.0,
          ErrorCode::kInvalidArgument, "room dimensions must be positive");
  require(absorption_min <= absorption_max && absorption_min >= 0.0 && absorption_max <= 1.0,
          ErrorCode::kInvalidArgument, "absorption range must lie in [0, 1] with min <= max");
  require(rir_len_s > 0.0 && sample_rate > 0, ErrorCode::kInvalidArgument,
          "rir length and sample rate must be positive");
  require(2.0 * corner_inset < dims_min.x && 2.0 * corner_inset < dims_min.y,
          ErrorCode::kInvalidArgument, "corner inset leaves no floor area");
  require(position_height > 0.0 && position_height < dims_min.z, ErrorCode::kInvalidArgument,
          "position height must lie inside the lowest room");
}

const Room* RirBank::find_room(const std::string& room_id) const {
  for (const Room& r : rooms) {
    if (r.room_id == room_id) return &r;
  }
  return nullptr;
}

Room sample_room(const RirBankSpec& spec, int index) {
  Rng rng(derive_seed(spec.seed, "room/" + std::to_string(index)));
  Room room;
  char id[32];
  std::snprintf(id, sizeof id, "room_%02d", index);
  room.room_id = id;
  room.dims = {rng.uniform(spec.dims_min.x, spec.dims_max.x),
               rng.uniform(spec.dims_min.y, spec.dims_max.y),
               rng.uniform(spec.dims_min.z, spec.dims_max.z)};
  for (double& a : room.absorption) a = rng.uniform(spec.absorption_min, spec.absorption_max);
  room.speed_of_sound = spec.speed_of_sound;
  return room;
}

std::vector<Vec3> bank_positions(const Room& room, const RirBankSpec& spec,
                                 std::uint64_t room_seed) {
  const double in = spec.corner_inset;
  const double h = spec.position_height;
  const Vec3& d = room.dims;
  std::vector<Vec3> base = {
      {d.x / 2.0, d.y / 2.0, d.z / 2.0},
      {in, in, h},
      {d.x - in, in, h},
      {d.x - in, d.y - in, h},
      {in, d.y - in, h},
  };
  const auto count = static_cast<std::size_t>(spec.positions_per_room);
  if (count <= base.size()) {
    base.resize(count);
    return base;
  }
  Rng rng(derive_seed(room_seed, "extra_positions"));
  while (base.size() < count) {
    base.push_back({rng.uniform(in, d.x - in), rng.uniform(in, d.y - in), h});
  }
  return base;
}

RirBank generate_rir_bank(const RirBankSpec& spec) {
  spec.validate();
  RirBank bank;
  struct Job {
    std::size_t room;
    std::size_t src;
    std::size_t rcv;
  };
  std::vector<Job> jobs;
  std::vector<std::vector<Vec3>> positions;
  for (int r = 0; r < spec.n_rooms; ++r) {
    bank.rooms.push_back(sample_room(spec, r));
    positions.push_back(bank_positions(
        bank.rooms.back(), spec, derive_seed(spec.seed, "room/" + std::to_string(r))));
    const std::size_t n = positions.back().size();
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t v = 0; v < n; ++v) {
        if (s != v) jobs.push_back({static_cast<std::size_t>(r), s, v});
      }
    }
  }

  SimulationOptions options;
  options.sample_rate = spec.sample_rate;
  options.rir_len_s = spec.rir_len_s;
  options.max_order = spec.max_order;
  options.min_relative_db = spec.min_relative_db;
  options.highpass_hz = spec.highpass_hz;

  bank.rirs.resize(jobs.size());
  const auto n_jobs = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n_jobs; ++i) {
    const Job& job = jobs[static_cast<std::size_t>(i)];
    const Room& room = bank.rooms[job.room];
    Rir rir = simulate_rir(room, positions[job.room][job.src], positions[job.room][job.rcv],
                           options);
    rir.rir_id = room.room_id + "_s" + std::to_string(job.src) + "_r" + std::to_string(job.rcv);
    bank.rirs[static_cast<std::size_t>(i)] = std::move(rir);
  }
  return bank;
}

}  // namespace classim
