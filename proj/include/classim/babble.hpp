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
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "classim/audio.hpp"
#include "classim/manifest.hpp"
#include "classim/room.hpp"

namespace classim {

struct BabbleSpec {
  int n_sources = 25;
  double duration_s = 60.0;
  int sample_rate = 16000;
  Room room{.room_id = "classroom"};
  std::vector<Vec3> listener_waypoints{{2.0, 2.0, 1.2}, {7.0, 5.0, 1.2}};
  double waypoint_dwell_s = 10.0;
  double event_rate_per_min = 2.0;
  std::pair<double, double> source_gain_db_range{-6.0, 0.0};
  std::pair<double, double> event_gain_db_range{-6.0, 0.0};
  std::pair<double, double> gap_range_s{0.5, 3.0};
  double crossfade_ms = 50.0;
  double wall_margin = 0.3;
  double peak_level = 0.9;
  // RIR rendering for sources and events; sample_rate is taken from above.
  double rir_len_s = 0.5;
  int max_order = 30;
  std::uint64_t seed = 0;
  // Sources left out of the sum. Every other source keeps its own draws.
  std::vector<int> muted_sources;

  void validate() const;
};

struct ListenerSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  Vec3 receiver;
  std::size_t waypoint = 0;
};

/// Piecewise-stationary listener schedule cycling through the waypoints.
/// Every segment lasts dwell_s except the last, which ends at duration_s.
std::vector<ListenerSegment> plan_listener_path(std::span<const Vec3> waypoints,
                                                double duration_s, double dwell_s);

struct ClipPlacement {
  std::size_t clip = 0;    // index into the source pool
  std::size_t start = 0;   // sample offset in the track
  std::size_t length = 0;  // samples used (the last clip may be truncated)
};

struct SourceTrack {
  std::vector<ClipPlacement> clips;
  Vec3 position;
  double gain_db = 0.0;
};

struct BabbleEvent {
  double time_s = 0.0;
  std::size_t clip = 0;  // index into the event pool
  Vec3 position;
  double gain_db = 0.0;
};

struct BabbleMix {
  AudioBuffer audio;
  // Gain applied to the raw sum to reach the peak level (1 for silence).
  double normalization_gain = 1.0;
  std::vector<SourceTrack> sources;
  std::vector<BabbleEvent> events;
  std::vector<ListenerSegment> schedule;
};

/// Position, gain and clip timeline of source `index`. Draws come only from
/// hash(seed, index).
SourceTrack plan_source_track(const BabbleSpec& spec, int index,
                              std::span<const AudioBuffer> source_pool);

/// Poisson event process over the track.
std::vector<BabbleEvent> plan_events(const BabbleSpec& spec, std::size_t event_pool_size);

/// Reverberant, gain-scaled contribution of one source before normalization.
std::vector<double> render_source(const BabbleSpec& spec, const SourceTrack& track,
                                  std::span<const AudioBuffer> source_pool,
                                  std::span<const ListenerSegment> schedule);

BabbleMix synthesize_babble(const BabbleSpec& spec, std::span<const AudioBuffer> source_pool,
                            std::span<const AudioBuffer> event_pool);

/// Sidecar metadata: seed, room, source positions, event times, schedule.
Json babble_sidecar(const BabbleSpec& spec, const BabbleMix& mix);

}  // namespace classim
