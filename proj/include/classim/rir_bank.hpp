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

#include <filesystem>

#include "classim/audio.hpp"
#include "classim/manifest.hpp"
#include "classim/room.hpp"

namespace classim {

Json to_json(const Room& room);
Room room_from_json(const Json& j);
Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);

/// One `<rir_id>.wav` per response plus `index.jsonl` with
/// {rir_id, room_id, source_pos, receiver_pos, sample_rate, origin, path,
///  room}.
void write_rir_bank(const RirBank& bank, const std::filesystem::path& dir,
                    WavEncoding encoding = WavEncoding::kFloat32);

RirBank read_rir_bank(const std::filesystem::path& dir);

}  // namespace classim
