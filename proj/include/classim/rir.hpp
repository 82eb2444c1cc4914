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

#include <cstdint>
#include <string>
#include <string_view>

#include "classim/audio.hpp"
#include "classim/geometry.hpp"

namespace classim {

enum class RirOrigin { kMeasured, kSimulated };

std::string_view to_string(RirOrigin origin);
RirOrigin rir_origin_from_string(std::string_view text);

/// An impulse response with the geometry it was rendered or measured for.
struct Rir {
  std::string rir_id;
  std::string room_id;
  AudioBuffer taps;
  Vec3 source_pos;
  Vec3 receiver_pos;
  RirOrigin origin = RirOrigin::kSimulated;
  // For measured responses: samples between excitation onset and the
  // deconvolution reference peak (taps[0] sits at the peak).
  std::int64_t reference_delay = 0;
};

}  // namespace classim
