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

#include "usersim/serialization.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace usersim {

namespace {

Slot slot_from(const std::string& name) {
  auto s = parse_slot(name);
  if (!s) throw DomainError("unknown slot '" + name + "'");
  return *s;
}

Json slot_list(const std::set<Slot>& slots) {
  Json a = Json::array();
  for (Slot s : slots) a.push_back(std::string(slot_name(s)));
  return a;
}

std::set<Slot> slot_set(const Json& j) {
  std::set<Slot> out;
  for (const auto& v : j) out.insert(slot_from(v.get<std::string>()));
  return out;
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> opt_get(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(Json& j, const SlotMap& m) {
  j = Json::object();
  for (const auto& [slot, value] : m) j[std::string(slot_name(slot))] = value;
}

void from_json(const Json& j, SlotMap& m) {
  m.clear();
  for (const auto& [k, v] : j.items()) m[slot_from(k)] = v.get<std::string>();
}

void to_json(Json& j, const UserAct& a) {
  j = Json{{"kind", std::string(act_name(a.kind))}, {"slots", a.slots}};
}

void from_json(const Json& j, UserAct& a) {
  auto kind = parse_user_act(j.at("kind").get<std::string>());
  if (!kind) throw DomainError("unknown user act " + j.at("kind").dump());
  a = UserAct::make(*kind, j.value("slots", Json::object()).get<SlotMap>());
}

void to_json(Json& j, const SystemAct& a) {
  j = Json{{"kind", std::string(act_name(a.kind))}, {"slots", a.slots}, {"failed", a.failed}};
}

void from_json(const Json& j, SystemAct& a) {
  auto kind = parse_system_act(j.at("kind").get<std::string>());
  if (!kind) throw DomainError("unknown system act " + j.at("kind").dump());
  a.kind = *kind;
  a.slots = j.value("slots", Json::object()).get<SlotMap>();
  a.failed = j.value("failed", false);
}

void to_json(Json& j, const Booking& b) {
  j = Json{{"people", opt(b.people)}, {"day", opt(b.day)}, {"time", opt(b.time)}};
}

void from_json(const Json& j, Booking& b) {
  b.people = opt_get<int>(j, "people");
  b.day = opt_get<std::string>(j, "day");
  b.time = opt_get<std::string>(j, "time");
}

void to_json(Json& j, const Goal& g) {
  Json subtasks = Json::array();
  for (Subtask t : g.subtasks) {
    subtasks.push_back(t == Subtask::kAskInfo ? "ask_info" : "make_reservation");
  }
  j = Json{{"id", g.id},
           {"constraints", g.constraints},
           {"requestables", slot_list(g.requestables)},
           {"booking", opt(g.booking)},
           {"subtasks", subtasks}};
}

void from_json(const Json& j, Goal& g) {
  g.id = j.value("id", "");
  g.constraints = j.at("constraints").get<SlotMap>();
  g.requestables = slot_set(j.at("requestables"));
  g.booking = opt_get<Booking>(j, "booking");
  g.subtasks.clear();
  for (const auto& t : j.at("subtasks")) {
    const auto name = t.get<std::string>();
    if (name == "ask_info") {
      g.subtasks.push_back(Subtask::kAskInfo);
    } else if (name == "make_reservation") {
      g.subtasks.push_back(Subtask::kMakeReservation);
    } else {
      throw DomainError("unknown subtask '" + name + "'");
    }
  }
  g.validate();
}

void to_json(Json& j, const Restaurant& r) {
  j = Json{{"name", r.name},       {"food", r.food},   {"area", r.area},
           {"pricerange", r.pricerange}, {"address", r.address},
           {"phone", r.phone},     {"postcode", r.postcode}};
}

void from_json(const Json& j, Restaurant& r) {
  r.name = j.at("name").get<std::string>();
  r.food = j.at("food").get<std::string>();
  r.area = j.at("area").get<std::string>();
  r.pricerange = j.at("pricerange").get<std::string>();
  r.address = j.at("address").get<std::string>();
  r.phone = j.at("phone").get<std::string>();
  r.postcode = j.at("postcode").get<std::string>();
}

void to_json(Json& j, const DialogState& s) {
  j = Json{{"constraints", s.constraints},
           {"presented", opt(s.presented)},
           {"provided", slot_list(s.provided)},
           {"pending_requests", slot_list(s.pending_requests)},
           {"booking", s.booking},
           {"booking_requested", s.booking_requested},
           {"reservation_confirmed", s.reservation_confirmed},
           {"reservation_failed", s.reservation_failed},
           {"reference", s.reference},
           {"booked_restaurant", s.booked_restaurant},
           {"no_match", s.no_match},
           {"relaxed", slot_list(s.relaxed)},
           {"offer_index", s.offer_index},
           {"last_user_act", s.last_user_act ? Json(std::string(act_name(*s.last_user_act)))
                                             : Json(nullptr)},
           {"user_done", s.user_done},
           {"turn", s.turn}};
}

void from_json(const Json& j, DialogState& s) {
  s = DialogState{};
  s.constraints = j.at("constraints").get<SlotMap>();
  s.presented = opt_get<Restaurant>(j, "presented");
  s.provided = slot_set(j.at("provided"));
  s.pending_requests = slot_set(j.at("pending_requests"));
  s.booking = j.at("booking").get<Booking>();
  s.booking_requested = j.at("booking_requested").get<bool>();
  s.reservation_confirmed = j.at("reservation_confirmed").get<bool>();
  s.reservation_failed = j.at("reservation_failed").get<bool>();
  s.reference = j.at("reference").get<std::string>();
  s.booked_restaurant = j.at("booked_restaurant").get<std::string>();
  s.no_match = j.at("no_match").get<bool>();
  s.relaxed = slot_set(j.at("relaxed"));
  s.offer_index = j.at("offer_index").get<int>();
  if (auto act = opt_get<std::string>(j, "last_user_act")) {
    s.last_user_act = parse_user_act(*act);
    if (!s.last_user_act) throw DomainError("unknown user act " + *act);
  }
  s.user_done = j.at("user_done").get<bool>();
  s.turn = j.at("turn").get<int>();
}

void to_json(Json& j, const Turn& t) {
  j = Json{{"speaker", t.speaker == Speaker::kUser ? "user" : "system"},
           {"utterance", t.utterance}};
  if (t.user_act) {
    j["act"] = *t.user_act;
  } else if (t.system_act) {
    j["act"] = *t.system_act;
  } else {
    j["act"] = nullptr;
  }
  j["state"] = opt(t.state);
  if (!t.categories.empty()) j["categories"] = t.categories;
}

void from_json(const Json& j, Turn& t) {
  t = Turn{};
  const auto speaker = j.at("speaker").get<std::string>();
  if (speaker != "user" && speaker != "system") throw DomainError("bad speaker " + speaker);
  t.speaker = speaker == "user" ? Speaker::kUser : Speaker::kSystem;
  t.utterance = j.at("utterance").get<std::string>();
  if (j.contains("act") && !j.at("act").is_null()) {
    if (t.speaker == Speaker::kUser) {
      t.user_act = j.at("act").get<UserAct>();
    } else {
      t.system_act = j.at("act").get<SystemAct>();
    }
  }
  t.state = opt_get<DialogState>(j, "state");
  if (j.contains("categories")) t.categories = j.at("categories").get<std::vector<std::string>>();
}

void to_json(Json& j, const Dialog& d) {
  j = Json{{"id", d.id}, {"goal", d.goal}, {"turns", d.turns},
           {"outcome", std::string(outcome_name(d.outcome))}};
}

void from_json(const Json& j, Dialog& d) {
  d.id = j.at("id").get<std::string>();
  d.goal = j.at("goal").get<Goal>();
  d.turns = j.at("turns").get<std::vector<Turn>>();
  auto o = parse_outcome(j.at("outcome").get<std::string>());
  if (!o) throw DomainError("unknown outcome " + j.at("outcome").dump());
  d.outcome = *o;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Dialog>& dialogs) {
  std::string out;
  for (const auto& d : dialogs) {
    out += Json(d).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<Dialog> read_jsonl(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<Dialog> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(Json::parse(line).get<Dialog>());
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace usersim
