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

#include "classim/rir_bank.hpp"

#include "classim/error.hpp"

namespace classim {

std::string_view to_string(RirOrigin origin) {
  return origin == RirOrigin::kMeasured ? "measured" : "simulated";
}

RirOrigin rir_origin_from_string(std::string_view text) {
  if (text == "measured") return RirOrigin::kMeasured;
  if (text == "simulated") return RirOrigin::kSimulated;
  fail(ErrorCode::kMalformedFile, "unknown RIR origin '" + std::string(text) + "'");
}

Json to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const Json& j) {
  require(j.is_array() && j.size() == 3, ErrorCode::kMalformedFile,
          "position must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json to_json(const Room& room) {
  Json j;
  j["room_id"] = room.room_id;
  j["dims"] = to_json(room.dims);
  j["absorption"] = room.absorption;
  j["speed_of_sound"] = room.speed_of_sound;
  return j;
}

Room room_from_json(const Json& j) {
  Room room;
  try {
    room.room_id = j.value("room_id", "");
    room.dims = vec3_from_json(j.at("dims"));
    room.absorption = j.at("absorption").get<std::array<double, 6>>();
    room.speed_of_sound = j.value("speed_of_sound", 343.0);
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kMalformedFile, std::string("bad room record: ") + ex.what());
  }
  room.validate();
  return room;
}

void write_rir_bank(const RirBank& bank, const std::filesystem::path& dir,
                    WavEncoding encoding) {
  std::filesystem::create_directories(dir);
  std::vector<Json> index;
  for (const Rir& rir : bank.rirs) {
    require(!rir.rir_id.empty(), ErrorCode::kInvalidArgument, "RIR without id");
    const std::string file = rir.rir_id + ".wav";
    write_wav(rir.taps, dir / file, encoding);
    Json j;
    j["rir_id"] = rir.rir_id;
    j["room_id"] = rir.room_id;
    j["source_pos"] = to_json(rir.source_pos);
    j["receiver_pos"] = to_json(rir.receiver_pos);
    j["sample_rate"] = rir.taps.sample_rate;
    j["origin"] = to_string(rir.origin);
    j["path"] = file;
    if (rir.origin == RirOrigin::kMeasured) j["reference_delay"] = rir.reference_delay;
    if (const Room* room = bank.find_room(rir.room_id)) j["room"] = to_json(*room);
    index.push_back(std::move(j));
  }
  write_jsonl(index, dir / "index.jsonl");
}

RirBank read_rir_bank(const std::filesystem::path& dir) {
  const auto index_path = dir / "index.jsonl";
  require(std::filesystem::exists(index_path), ErrorCode::kFileNotFound,
          "no RIR bank index at " + index_path.string());
  RirBank bank;
  for (const Json& j : read_jsonl(index_path)) {
    Rir rir;
    try {
      rir.rir_id = j.at("rir_id").get<std::string>();
      rir.room_id = j.value("room_id", "");
      rir.source_pos = vec3_from_json(j.at("source_pos"));
      rir.receiver_pos = vec3_from_json(j.at("receiver_pos"));
      rir.origin = rir_origin_from_string(j.value("origin", "simulated"));
      rir.reference_delay = j.value("reference_delay", std::int64_t{0});
      const std::string file = j.value("path", rir.rir_id + ".wav");
      rir.taps = read_wav(dir / file);
      if (j.contains("room") && !bank.find_room(rir.room_id)) {
        bank.rooms.push_back(room_from_json(j.at("room")));
      }
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::kMalformedFile, std::string("bad RIR index record: ") + ex.what());
    }
    bank.rirs.push_back(std::move(rir));
  }
  return bank;
}

}  // namespace classim
