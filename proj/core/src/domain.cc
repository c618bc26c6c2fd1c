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

#include "usersim/domain.h"

#include <algorithm>
#include <cctype>

namespace usersim {

namespace {

struct SlotInfo {
  Slot slot;
  std::string_view name;
  std::string_view words;
  SlotCategory category;
};

constexpr SlotInfo kSlotInfo[] = {
    {Slot::kFood, "food", "food", SlotCategory::kInformable},
    {Slot::kArea, "area", "area", SlotCategory::kInformable},
    {Slot::kPriceRange, "pricerange", "price range", SlotCategory::kInformable},
    {Slot::kName, "name", "name", SlotCategory::kInformable},
    {Slot::kAddress, "address", "address", SlotCategory::kRequestable},
    {Slot::kPhone, "phone", "phone number", SlotCategory::kRequestable},
    {Slot::kPostcode, "postcode", "postcode", SlotCategory::kRequestable},
    {Slot::kReference, "reference", "reference number",
     SlotCategory::kRequestable},
    {Slot::kPeople, "people", "number of people", SlotCategory::kBooking},
    {Slot::kDay, "day", "day", SlotCategory::kBooking},
    {Slot::kTime, "time", "time", SlotCategory::kBooking},
};

const SlotInfo& info(Slot s) { return kSlotInfo[static_cast<int>(s)]; }

constexpr std::string_view kUserActNames[] = {
    "inform_type",      "inform_type_change",      "anything_else",
    "request_info",     "make_reservation",        "reservation_change_time",
    "goodbye"};

constexpr std::string_view kSystemActNames[] = {
    "ask_type",           "present_result",            "provide_info",
    "ask_reservation_info", "inform_reservation_result", "goodbye"};

}  // namespace

SlotCategory category(Slot slot) { return info(slot).category; }
std::string_view slot_name(Slot slot) { return info(slot).name; }
std::string_view slot_words(Slot slot) { return info(slot).words; }

std::optional<Slot> parse_slot(std::string_view name) {
  for (const auto& i : kSlotInfo) {
    if (i.name == name) return i.slot;
  }
  return std::nullopt;
}

std::string_view act_name(UserActKind kind) {
  return kUserActNames[static_cast<int>(kind)];
}
std::string_view act_name(SystemActKind kind) {
  return kSystemActNames[static_cast<int>(kind)];
}

std::optional<UserActKind> parse_user_act(std::string_view name) {
  for (int i = 0; i < kNumUserActs; ++i) {
    if (kUserActNames[i] == name) return static_cast<UserActKind>(i);
  }
  return std::nullopt;
}

std::optional<SystemActKind> parse_system_act(std::string_view name) {
  for (int i = 0; i < kNumSystemActs; ++i) {
    if (kSystemActNames[i] == name) return static_cast<SystemActKind>(i);
  }
  return std::nullopt;
}

bool slot_allowed(UserActKind kind, Slot slot) {
  switch (kind) {
    case UserActKind::kInformType:
    case UserActKind::kInformTypeChange:
      return category(slot) == SlotCategory::kInformable;
    case UserActKind::kRequestInfo:
      return category(slot) == SlotCategory::kRequestable;
    case UserActKind::kMakeReservation:
      return category(slot) == SlotCategory::kBooking;
    case UserActKind::kReservationChangeTime:
      return slot == Slot::kTime;
    case UserActKind::kAnythingElse:
    case UserActKind::kGoodbye:
      return false;
  }
  return false;
}

UserAct UserAct::make(UserActKind kind, SlotMap slots) {
  for (const auto& [slot, value] : slots) {
    if (!slot_allowed(kind, slot)) {
      throw DomainError("slot '" + std::string(slot_name(slot)) +
                        "' not allowed on " + std::string(act_name(kind)));
    }
  }
  return UserAct{kind, std::move(slots)};
}

Goal Goal::make(std::string id, SlotMap constraints,
                std::set<Slot> requestables, std::optional<Booking> booking) {
  Goal g;
  g.id = std::move(id);
  g.constraints = std::move(constraints);
  g.requestables = std::move(requestables);
  g.booking = std::move(booking);
  if (!g.requestables.empty()) g.subtasks.push_back(Subtask::kAskInfo);
  if (g.booking) g.subtasks.push_back(Subtask::kMakeReservation);
  g.validate();
  return g;
}

bool Goal::has(Subtask t) const {
  return std::find(subtasks.begin(), subtasks.end(), t) != subtasks.end();
}

void Goal::validate() const {
  if (subtasks.empty()) throw DomainError("goal " + id + " has no subtask");
  if (has(Subtask::kAskInfo) != !requestables.empty()) {
    throw DomainError("goal " + id + ": AskInfo iff requestables");
  }
  if (has(Subtask::kMakeReservation) != booking.has_value()) {
    throw DomainError("goal " + id + ": MakeReservation iff booking");
  }
  if (constraints.empty()) throw DomainError("goal " + id + " has no constraint");
  for (const auto& [slot, value] : constraints) {
    if (category(slot) != SlotCategory::kInformable) {
      throw DomainError("goal " + id + ": constraint on non-informable");
    }
  }
  for (Slot s : requestables) {
    if (category(s) != SlotCategory::kRequestable) {
      throw DomainError("goal " + id + ": bad requestable");
    }
  }
  if (booking) {
    if (!booking->complete() || *booking->people <= 0) {
      throw DomainError("goal " + id + ": incomplete booking");
    }
  }
}

std::string Restaurant::value(Slot slot) const {
  switch (slot) {
    case Slot::kName: return name;
    case Slot::kFood: return food;
    case Slot::kArea: return area;
    case Slot::kPriceRange: return pricerange;
    case Slot::kAddress: return address;
    case Slot::kPhone: return phone;
    case Slot::kPostcode: return postcode;
    default: return {};
  }
}

std::string normalize_value(std::string_view v) {
  std::string out;
  out.reserve(v.size());
  bool space = false;
  for (char c : v) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool values_match(std::string_view a, std::string_view b) {
  return normalize_value(a) == normalize_value(b);
}

bool DialogState::search_complete() const {
  if (constraints.count(Slot::kName)) return true;
  return std::all_of(kSearchSlots.begin(), kSearchSlots.end(),
                     [&](Slot s) { return constraints.count(s) > 0; });
}

void DialogState::validate() const {
  if (!provided.empty() && !presented) {
    throw DomainError("state: provided requestables without a presented restaurant");
  }
  if (reservation_confirmed && !booking.complete()) {
    throw DomainError("state: confirmed reservation with incomplete booking");
  }
  if (turn < 0) throw DomainError("state: negative turn");
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kOngoing: return "ongoing";
    case Outcome::kSuccess: return "success";
    case Outcome::kFailure: return "failure";
  }
  return "ongoing";
}

std::optional<Outcome> parse_outcome(std::string_view name) {
  for (Outcome o : {Outcome::kOngoing, Outcome::kSuccess, Outcome::kFailure}) {
    if (outcome_name(o) == name) return o;
  }
  return std::nullopt;
}

namespace {

bool constraints_hold(const Goal& goal, const DialogState& state) {
  if (!state.presented) return false;
  const Restaurant& r = *state.presented;
  auto name = goal.constraints.find(Slot::kName);
  if (name != goal.constraints.end()) return values_match(r.name, name->second);
  for (const auto& [slot, value] : goal.constraints) {
    if (values_match(value, kDontCare)) continue;
    std::string wanted = value;
    if (state.relaxed.count(slot)) {
      auto it = state.constraints.find(slot);
      if (it == state.constraints.end()) return false;
      wanted = it->second;
      if (values_match(wanted, kDontCare)) continue;
    }
    if (!values_match(r.value(slot), wanted)) return false;
  }
  return true;
}

bool booking_holds(const Goal& goal, const DialogState& state) {
  if (!goal.booking) return true;
  if (!state.reservation_confirmed || !state.presented) return false;
  if (!values_match(state.booked_restaurant, state.presented->name)) return false;
  const Booking& want = *goal.booking;
  const Booking& got = state.booking;
  if (got.people != want.people) return false;
  if (!got.day || !values_match(*got.day, *want.day)) return false;
  if (!got.time) return false;
  return values_match(*got.time, *want.time) || state.relaxed.count(Slot::kTime) > 0;
}

}  // namespace

Outcome goal_satisfied(const Goal& goal, const DialogState& state) {
  bool requests_done = std::all_of(
      goal.requestables.begin(), goal.requestables.end(),
      [&](Slot s) { return state.provided.count(s) > 0; });
  if (constraints_hold(goal, state) && requests_done && booking_holds(goal, state)) {
    return Outcome::kSuccess;
  }
  if (state.turn >= kMaxTurns) return Outcome::kFailure;
  return Outcome::kOngoing;
}

int Dialog::user_turns() const {
  return static_cast<int>(std::count_if(turns.begin(), turns.end(), [](const Turn& t) {
    return t.speaker == Speaker::kUser;
  }));
}

}  // namespace usersim
