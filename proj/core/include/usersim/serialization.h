// Copyright 2026 The usersim Authors.
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

// Canonical JSON encodings.
//
//   Goal    {"id", "constraints": {slot: value}, "requestables": [slot],
//            "booking": {"people": int, "day", "time"} | null,
//            "subtasks": ["ask_info" | "make_reservation"]}
//   UserAct / SystemAct  {"kind", "slots": {slot: value}[, "failed": bool]}
//   Turn    {"speaker": "user"|"system", "utterance",
//            "act": act | null, "state": DialogState | null[, "categories"]}
//   Dialog  {"id", "goal", "turns": [Turn], "outcome"}
//
// Transcript files hold one Dialog object per line.

#ifndef USERSIM_SERIALIZATION_H_
#define USERSIM_SERIALIZATION_H_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "usersim/domain.h"

namespace usersim {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const SlotMap& m);
void from_json(const Json& j, SlotMap& m);
void to_json(Json& j, const UserAct& a);
void from_json(const Json& j, UserAct& a);
void to_json(Json& j, const SystemAct& a);
void from_json(const Json& j, SystemAct& a);
void to_json(Json& j, const Booking& b);
void from_json(const Json& j, Booking& b);
void to_json(Json& j, const Goal& g);
void from_json(const Json& j, Goal& g);
void to_json(Json& j, const Restaurant& r);
void from_json(const Json& j, Restaurant& r);
void to_json(Json& j, const DialogState& s);
void from_json(const Json& j, DialogState& s);
void to_json(Json& j, const Turn& t);
void from_json(const Json& j, Turn& t);
void to_json(Json& j, const Dialog& d);
void from_json(const Json& j, Dialog& d);

void write_jsonl(const std::filesystem::path& path, const std::vector<Dialog>& dialogs);
std::vector<Dialog> read_jsonl(const std::filesystem::path& path);

// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace usersim

#endif  // USERSIM_SERIALIZATION_H_
