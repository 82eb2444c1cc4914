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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "classim/geometry.hpp"
#include "classim/rir.hpp"

namespace classim {

// Surface order used by Room::absorption.
enum Surface : std::size_t {
  kFloor = 0,    // z = 0
  kCeiling = 1,  // z = Lz
  kWallX0 = 2,   // x = 0
  kWallX1 = 3,   // x = Lx
  kWallY0 = 4,   // y = 0
  kWallY1 = 5,   // y = Ly
};

/// Shoebox room with frequency-independent absorption per surface.
struct Room {
  std::string room_id;
  Vec3 dims{9.0, 7.0, 3.0};
  std::array<double, 6> absorption{0.3, 0.3, 0.3, 0.3, 0.3, 0.3};
  double speed_of_sound = 343.0;

  void validate() const;
  double volume() const;
  /// Sum of surface area times absorption coefficient (Sabine units).
  double absorption_area() const;
  /// True when p lies at least `margin` meters inside every surface.
  bool contains(const Vec3& p, double margin = 0.0) const;
};

struct SimulationOptions {
  int sample_rate = 48000;
  double rir_len_s = 1.0;
  // Maximum total reflection order; negative means bounded only by length.
  int max_order = 30;
  // Images whose amplitude falls this far below the direct path are skipped.
  double min_relative_db = -80.0;
  // Second-order Butterworth high-pass removing the DC build-up of dense
  // all-positive reflections; 0 disables it.
  double highpass_hz = 20.0;
};

/// Image-source rendering. Each image adds prod(beta) / (4 pi d) at delay
/// d / c through a 32-tap Hann-windowed sinc, beta = sqrt(1 - alpha).
Rir simulate_rir(const Room& room, const Vec3& source, const Vec3& receiver,
                 const SimulationOptions& options = {});

/// Serial rendering of the same image set with every tap evaluated directly
/// from sin/cos. Kept as the oracle for simulate_rir.
std::vector<double> simulate_rir_reference(const Room& room, const Vec3& source,
                                           const Vec3& receiver,
                                           const SimulationOptions& options = {});

/// 0.161 V / sum(S_i alpha_i).
double sabine_t60(const Room& room);

/// Schroeder backward-integrated energy decay in dB, 0 dB at the first tap.
std::vector<double> energy_decay_db(std::span<const double> rir);

/// Reverberation time from a least-squares line through the decay curve
/// between upper_db and lower_db, extrapolated to -60 dB.
double schroeder_t60(std::span<const double> rir, int sample_rate,
                     double upper_db = -5.0, double lower_db = -35.0);

struct RirBankSpec {
  int n_rooms = 8;
  int positions_per_room = 5;
  Vec3 dims_min{6.0, 6.0, 2.7};
  Vec3 dims_max{12.0, 12.0, 4.0};
  double absorption_min = 0.1;
  double absorption_max = 0.6;
  double rir_len_s = 1.0;
  int sample_rate = 48000;
  std::uint64_t seed = 0;
  int max_order = 30;
  double min_relative_db = -80.0;
  double highpass_hz = 20.0;
  double speed_of_sound = 343.0;
  double corner_inset = 0.5;
  double position_height = 1.2;

  void validate() const;
};

struct RirBank {
  std::vector<Room> rooms;
  std::vector<Rir> rirs;

  const Room* find_room(const std::string& room_id) const;
};

/// Center of the room plus the four floor corners inset by corner_inset at
/// position_height. Counts above five add seeded random positions.
std::vector<Vec3> bank_positions(const Room& room, const RirBankSpec& spec,
                                 std::uint64_t room_seed);

/// Random classroom geometry for room `index` of the bank.
Room sample_room(const RirBankSpec& spec, int index);

/// Every ordered (source, receiver) pair of every room, ordered by
/// (room, source, receiver). Pure function of the spec.
RirBank generate_rir_bank(const RirBankSpec& spec);

}  // namespace classim
