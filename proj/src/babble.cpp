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

#include "classim/babble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <string>

#include <omp.h>

#include "classim/convolver.hpp"
#include "classim/error.hpp"
#include "classim/rir_bank.hpp"
#include "classim/seed.hpp"

namespace classim {
namespace {

std::size_t to_samples(double seconds, int rate) {
  return static_cast<std::size_t>(std::llround(seconds * rate));
}

Vec3 interior_point(const Room& room, double margin, Rng& rng) {
  return {rng.uniform(margin, room.dims.x - margin), rng.uniform(margin, room.dims.y - margin),
          rng.uniform(margin, room.dims.z - margin)};
}

SimulationOptions rir_options(const BabbleSpec& spec) {
  SimulationOptions o;
  o.sample_rate = spec.sample_rate;
  o.rir_len_s = spec.rir_len_s;
  o.max_order = spec.max_order;
  return o;
}

// Samples [lo, hi) of conv(x, h), using only the input that reaches them.
std::vector<double> wet_range(std::span<const double> x, const PartitionedConvolver& engine,
                              std::size_t lo, std::size_t hi) {
  const std::size_t reach = engine.kernel_size() - 1;
  const std::size_t x0 = lo > reach ? lo - reach : 0;
  const std::size_t x1 = std::min(hi, x.size());
  std::vector<double> out(hi - lo, 0.0);
  if (x1 <= x0) return out;
  const std::vector<double> y = engine.apply(x.subspan(x0, x1 - x0));
  for (std::size_t t = lo; t < hi; ++t) {
    const std::size_t k = t - x0;
    if (k < y.size()) out[t - lo] = y[k];
  }
  return out;
}

void check_pool(std::span<const AudioBuffer> pool, int rate, const char* name) {
  for (const auto& clip : pool) {
    require(!clip.empty(), ErrorCode::kEmptyAudio, std::string(name) + " contains an empty clip");
    require(clip.sample_rate == rate, ErrorCode::kSampleRateMismatch,
            std::string(name) + " clip at " + std::to_string(clip.sample_rate) +
                " Hz, babble at " + std::to_string(rate) + " Hz");
  }
}

std::vector<double> render_event(const BabbleSpec& spec, const BabbleEvent& ev,
                                 std::span<const AudioBuffer> pool,
                                 std::span<const ListenerSegment> schedule, std::size_t n) {
  std::vector<double> out(n, 0.0);
  const std::size_t onset = to_samples(ev.time_s, spec.sample_rate);
  if (onset >= n) return out;
  const ListenerSegment* seg = &schedule.back();
  for (const auto& s : schedule) {
    if (ev.time_s < s.end_s) {
      seg = &s;
      break;
    }
  }
  const Rir rir = simulate_rir(spec.room, ev.position, seg->receiver, rir_options(spec));
  const PartitionedConvolver engine(rir.taps.samples);
  const std::vector<double> y = engine.apply(pool[ev.clip].samples);
  const double g = db_to_gain(ev.gain_db);
  const std::size_t m = std::min(y.size(), n - onset);
  for (std::size_t i = 0; i < m; ++i) out[onset + i] = g * y[i];
  return out;
}

}  // namespace

void BabbleSpec::validate() const {
  room.validate();
  require(n_sources >= 0, ErrorCode::kInvalidArgument, "n_sources must be non-negative");
  require(duration_s > 0.0, ErrorCode::kInvalidArgument, "babble duration must be positive");
  require(sample_rate > 0, ErrorCode::kInvalidArgument, "babble sample rate must be positive");
  require(!listener_waypoints.empty(), ErrorCode::kInvalidArgument,
          "at least one listener waypoint is required");
  for (const auto& p : listener_waypoints) {
    require(room.contains(p), ErrorCode::kInvalidArgument, "listener waypoint outside the room");
  }
  require(waypoint_dwell_s > 0.0, ErrorCode::kInvalidArgument, "waypoint dwell must be positive");
  require(event_rate_per_min >= 0.0, ErrorCode::kInvalidArgument,
          "event rate must be non-negative");
  require(source_gain_db_range.first <= source_gain_db_range.second &&
              event_gain_db_range.first <= event_gain_db_range.second,
          ErrorCode::kInvalidArgument, "gain ranges must be ordered (min, max)");
  require(gap_range_s.first >= 0.0 && gap_range_s.first <= gap_range_s.second,
          ErrorCode::kInvalidArgument, "gap range must satisfy 0 <= min <= max");
  require(crossfade_ms >= 0.0, ErrorCode::kInvalidArgument, "crossfade must be non-negative");
  require(peak_level > 0.0 && peak_level <= 1.0, ErrorCode::kInvalidArgument,
          "peak level must be in (0, 1]");
  require(rir_len_s > 0.0, ErrorCode::kInvalidArgument, "RIR length must be positive");
  require(wall_margin >= 0.0 && 2.0 * wall_margin < room.dims.x &&
              2.0 * wall_margin < room.dims.y && 2.0 * wall_margin < room.dims.z,
          ErrorCode::kInvalidArgument, "wall margin leaves no interior");
}

std::vector<ListenerSegment> plan_listener_path(std::span<const Vec3> waypoints,
                                                double duration_s, double dwell_s) {
  require(!waypoints.empty(), ErrorCode::kInvalidArgument, "no listener waypoints");
  require(dwell_s > 0.0, ErrorCode::kInvalidArgument, "dwell must be positive");
  require(duration_s > 0.0, ErrorCode::kInvalidArgument, "duration must be positive");
  std::vector<ListenerSegment> out;
  if (waypoints.size() == 1) {
    out.push_back({0.0, duration_s, waypoints[0], 0});
    return out;
  }
  for (std::size_t i = 0;; ++i) {
    const double start = static_cast<double>(i) * dwell_s;
    if (start >= duration_s) break;
    const double end = std::min(static_cast<double>(i + 1) * dwell_s, duration_s);
    const std::size_t w = i % waypoints.size();
    out.push_back({start, end, waypoints[w], w});
  }
  out.back().end_s = duration_s;
  return out;
}

SourceTrack plan_source_track(const BabbleSpec& spec, int index,
                              std::span<const AudioBuffer> source_pool) {
  require(!source_pool.empty(), ErrorCode::kInvalidArgument, "source pool is empty");
  Rng rng(derive_seed(spec.seed, "babble/source/" + std::to_string(index)));
  SourceTrack track;
  track.position = interior_point(spec.room, spec.wall_margin, rng);
  track.gain_db = rng.uniform(spec.source_gain_db_range.first, spec.source_gain_db_range.second);
  const std::size_t n = to_samples(spec.duration_s, spec.sample_rate);
  // Each source opens with a silence so that talkers do not start in unison.
  std::size_t cursor =
      to_samples(rng.uniform(spec.gap_range_s.first, spec.gap_range_s.second), spec.sample_rate);
  while (cursor < n) {
    const auto clip = static_cast<std::size_t>(rng.below(source_pool.size()));
    const std::size_t len = source_pool[clip].size();
    track.clips.push_back({clip, cursor, std::min(len, n - cursor)});
    cursor += len;
    cursor += to_samples(rng.uniform(spec.gap_range_s.first, spec.gap_range_s.second),
                         spec.sample_rate);
  }
  return track;
}

std::vector<BabbleEvent> plan_events(const BabbleSpec& spec, std::size_t event_pool_size) {
  std::vector<BabbleEvent> events;
  if (spec.event_rate_per_min <= 0.0) return events;
  require(event_pool_size > 0, ErrorCode::kInvalidArgument,
          "events requested but the event pool is empty");
  Rng rng(derive_seed(spec.seed, "babble/events"));
  const double rate = spec.event_rate_per_min / 60.0;
  for (double t = rng.exponential(rate); t < spec.duration_s; t += rng.exponential(rate)) {
    BabbleEvent ev;
    ev.time_s = t;
    ev.clip = static_cast<std::size_t>(rng.below(event_pool_size));
    ev.position = interior_point(spec.room, spec.wall_margin, rng);
    ev.gain_db = rng.uniform(spec.event_gain_db_range.first, spec.event_gain_db_range.second);
    events.push_back(ev);
  }
  return events;
}

std::vector<double> render_source(const BabbleSpec& spec, const SourceTrack& track,
                                  std::span<const AudioBuffer> source_pool,
                                  std::span<const ListenerSegment> schedule) {
  require(!schedule.empty(), ErrorCode::kInvalidArgument, "empty listener schedule");
  const std::size_t n = to_samples(spec.duration_s, spec.sample_rate);
  const double gain = db_to_gain(track.gain_db);

  std::vector<double> dry(n, 0.0);
  for (const auto& c : track.clips) {
    const auto& clip = source_pool[c.clip].samples;
    for (std::size_t i = 0; i < c.length; ++i) dry[c.start + i] = gain * clip[i];
  }

  // Segment boundaries in samples and the crossfade half-width at each
  // internal boundary, limited to half of either neighbor.
  const std::size_t n_seg = schedule.size();
  std::vector<std::size_t> edge(n_seg + 1);
  for (std::size_t s = 0; s < n_seg; ++s) {
    edge[s] = std::min(n, to_samples(schedule[s].start_s, spec.sample_rate));
  }
  edge[0] = 0;
  edge[n_seg] = n;
  const std::size_t xf = to_samples(spec.crossfade_ms / 2000.0, spec.sample_rate);
  std::vector<std::size_t> half(n_seg + 1, 0);
  for (std::size_t s = 1; s < n_seg; ++s) {
    half[s] = std::min({xf, (edge[s] - edge[s - 1]) / 2, (edge[s + 1] - edge[s]) / 2});
  }

  std::map<std::size_t, std::unique_ptr<PartitionedConvolver>> engines;
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n_seg; ++s) {
    const std::size_t hl = half[s];
    const std::size_t hr = half[s + 1];
    const std::size_t lo = edge[s] - hl;
    const std::size_t hi = edge[s + 1] + hr;
    if (hi <= lo) continue;
    auto& engine = engines[schedule[s].waypoint];
    if (!engine) {
      const Rir rir =
          simulate_rir(spec.room, track.position, schedule[s].receiver, rir_options(spec));
      engine = std::make_unique<PartitionedConvolver>(rir.taps.samples);
    }
    const std::vector<double> wet = wet_range(dry, *engine, lo, hi);
    for (std::size_t t = lo; t < hi; ++t) {
      double w = 1.0;
      if (hl > 0 && t < edge[s] + hl) {
        const double u = (static_cast<double>(t - lo) + 0.5) / (2.0 * hl);
        w = std::sin(0.5 * std::numbers::pi * u);
      } else if (hr > 0 && t >= edge[s + 1] - hr) {
        const double u = (static_cast<double>(t - (edge[s + 1] - hr)) + 0.5) / (2.0 * hr);
        w = std::cos(0.5 * std::numbers::pi * u);
      }
      out[t] += w * wet[t - lo];
    }
  }
  return out;
}

BabbleMix synthesize_babble(const BabbleSpec& spec, std::span<const AudioBuffer> source_pool,
                            std::span<const AudioBuffer> event_pool) {
  spec.validate();
  if (spec.n_sources > 0) {
    require(!source_pool.empty(), ErrorCode::kInvalidArgument, "source pool is empty");
  }
  check_pool(source_pool, spec.sample_rate, "source pool");
  check_pool(event_pool, spec.sample_rate, "event pool");

  BabbleMix mix;
  mix.schedule = plan_listener_path(spec.listener_waypoints, spec.duration_s, spec.waypoint_dwell_s);
  for (int k = 0; k < spec.n_sources; ++k) {
    mix.sources.push_back(plan_source_track(spec, k, source_pool));
  }
  mix.events = plan_events(spec, event_pool.size());

  const std::size_t n = to_samples(spec.duration_s, spec.sample_rate);
  std::vector<double> sum(n, 0.0);
  std::vector<bool> muted(mix.sources.size(), false);
  for (int k : spec.muted_sources) {
    if (k >= 0 && static_cast<std::size_t>(k) < muted.size()) muted[static_cast<std::size_t>(k)] = true;
  }

  // Contributions are rendered a batch at a time in parallel and then added
  // strictly in source order, so the sum is the same for any thread count.
  const std::size_t n_items = mix.sources.size() + mix.events.size();
  const auto batch = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  std::vector<std::vector<double>> parts(batch);
  for (std::size_t b0 = 0; b0 < n_items; b0 += batch) {
    const std::size_t b1 = std::min(n_items, b0 + batch);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = static_cast<std::int64_t>(b0); i < static_cast<std::int64_t>(b1); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      auto& part = parts[idx - b0];
      if (idx < mix.sources.size()) {
        part = muted[idx] ? std::vector<double>{}
                          : render_source(spec, mix.sources[idx], source_pool, mix.schedule);
      } else {
        part = render_event(spec, mix.events[idx - mix.sources.size()], event_pool, mix.schedule, n);
      }
    }
    for (std::size_t i = b0; i < b1; ++i) {
      const auto& part = parts[i - b0];
      for (std::size_t t = 0; t < part.size(); ++t) sum[t] += part[t];
    }
  }

  double peak = 0.0;
  for (double v : sum) peak = std::max(peak, std::abs(v));
  mix.normalization_gain = peak > 0.0 ? spec.peak_level / peak : 1.0;
  for (double& v : sum) v *= mix.normalization_gain;
  mix.audio = AudioBuffer(std::move(sum), spec.sample_rate);
  return mix;
}

Json babble_sidecar(const BabbleSpec& spec, const BabbleMix& mix) {
  Json j;
  j["seed"] = spec.seed;
  j["duration_s"] = spec.duration_s;
  j["sample_rate"] = spec.sample_rate;
  j["normalization_gain"] = mix.normalization_gain;
  j["room"] = to_json(spec.room);
  Json sources = Json::array();
  for (std::size_t k = 0; k < mix.sources.size(); ++k) {
    const auto& s = mix.sources[k];
    Json clips = Json::array();
    for (const auto& c : s.clips) {
      clips.push_back({{"clip", c.clip},
                       {"start_s", static_cast<double>(c.start) / spec.sample_rate},
                       {"length_s", static_cast<double>(c.length) / spec.sample_rate}});
    }
    sources.push_back({{"index", k},
                       {"position", to_json(s.position)},
                       {"gain_db", s.gain_db},
                       {"clips", std::move(clips)}});
  }
  j["sources"] = std::move(sources);
  Json events = Json::array();
  for (const auto& e : mix.events) {
    events.push_back({{"time_s", e.time_s},
                      {"clip", e.clip},
                      {"position", to_json(e.position)},
                      {"gain_db", e.gain_db}});
  }
  j["events"] = std::move(events);
  Json schedule = Json::array();
  for (const auto& s : mix.schedule) {
    schedule.push_back({{"start_s", s.start_s},
                        {"end_s", s.end_s},
                        {"receiver", to_json(s.receiver)},
                        {"waypoint", s.waypoint}});
  }
  j["schedule"] = std::move(schedule);
  return j;
}

}  // namespace classim
