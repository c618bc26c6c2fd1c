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

#include "usersim/dialog_system.h"

#include <algorithm>

namespace usersim::sys {

namespace {

std::optional<int> parse_people(const std::string& v) {
  try {
    std::size_t used = 0;
    int n = std::stoi(v, &used);
    if (used == v.size() && n > 0) return n;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

bool has_value(const SlotMap& m, Slot s) {
  auto it = m.find(s);
  return it != m.end() && !it->second.empty();
}

// Requests the system can answer right now.
std::set<Slot> answerable(const DialogState& s) {
  std::set<Slot> out;
  for (Slot slot : s.pending_requests) {
    if (slot == Slot::kReference && !s.reservation_confirmed) continue;
    out.insert(slot);
  }
  return out;
}

SlotMap search_query(const DialogState& s) {
  auto name = s.constraints.find(Slot::kName);
  if (name != s.constraints.end() && name->second != kDontCare) return {{Slot::kName, name->second}};
  SlotMap q;
  for (const auto& [slot, v] : s.constraints) {
    if (slot != Slot::kName) q[slot] = v;
  }
  return q;
}

}  // namespace

Nlu::Nlu(const RestaurantDB& db, double noise) : annotator_(db), noise_(noise) {
  if (noise < 0.0 || noise > 1.0) throw DomainError("nlu noise must be in [0, 1]");
}

NluResult Nlu::parse(std::string_view utterance, Rng* rng) const {
  corpus::Annotation a = annotator_.annotate(utterance);
  NluResult out{a.act, a.matched ? 1.0 : 0.0};
  if (noise_ > 0.0 && rng && uniform01(*rng) < noise_) {
    std::size_t pick = uniform_index(*rng, kNumUserActs - 1);
    if (pick >= static_cast<std::size_t>(index_of(a.act.kind))) ++pick;
    UserActKind kind = kAllUserActs[pick];
    out.act = UserAct::make(kind, corpus::filter_slots(kind, a.act.slots));
  }
  return out;
}

DialogState track(const DialogState& state, const NluResult& nlu) {
  DialogState s = state;
  ++s.turn;
  const UserAct& act = nlu.act;
  s.last_user_act = act.kind;
  switch (act.kind) {
    case UserActKind::kInformType:
    case UserActKind::kInformTypeChange: {
      bool changed = false;
      for (const auto& [slot, value] : act.slots) {
        if (category(slot) != SlotCategory::kInformable || value.empty()) continue;
        auto it = s.constraints.find(slot);
        if (it == s.constraints.end() || it->second != value) changed = true;
        s.constraints[slot] = value;
        if (act.kind == UserActKind::kInformTypeChange) s.relaxed.insert(slot);
      }
      if (changed) {
        s.no_match = false;
        s.offer_index = 0;
        if (s.provided.empty()) s.presented.reset();
      }
      break;
    }
    case UserActKind::kRequestInfo:
      for (const auto& [slot, value] : act.slots) {
        if (category(slot) == SlotCategory::kRequestable) s.pending_requests.insert(slot);
      }
      break;
    case UserActKind::kMakeReservation: {
      s.booking_requested = true;
      Booking before = s.booking;
      if (auto it = act.slots.find(Slot::kPeople); it != act.slots.end()) {
        if (auto n = parse_people(it->second)) s.booking.people = n;
      }
      if (has_value(act.slots, Slot::kDay)) s.booking.day = act.slots.at(Slot::kDay);
      if (has_value(act.slots, Slot::kTime)) s.booking.time = act.slots.at(Slot::kTime);
      if (!(before == s.booking)) s.reservation_failed = false;
      break;
    }
    case UserActKind::kReservationChangeTime:
      s.booking_requested = true;
      if (has_value(act.slots, Slot::kTime)) {
        s.booking.time = act.slots.at(Slot::kTime);
        s.relaxed.insert(Slot::kTime);
        s.reservation_failed = false;
      }
      break;
    case UserActKind::kAnythingElse:
      break;
    case UserActKind::kGoodbye:
      s.user_done = true;
      break;
  }
  return s;
}

DialogState apply_system_act(const DialogState& state, const SystemAct& act,
                             const RestaurantDB& db) {
  DialogState s = state;
  switch (act.kind) {
    case SystemActKind::kPresentResult:
      if (act.failed) {
        s.no_match = true;
        if (s.provided.empty()) s.presented.reset();
      } else if (has_value(act.slots, Slot::kName)) {
        if (const Restaurant* found = db.find(act.slots.at(Slot::kName))) {
          s.presented = *found;
        } else {
          Restaurant r;
          r.name = act.slots.at(Slot::kName);
          for (const auto& [slot, v] : act.slots) {
            if (slot == Slot::kFood) r.food = v;
            if (slot == Slot::kArea) r.area = v;
            if (slot == Slot::kPriceRange) r.pricerange = v;
          }
          s.presented = r;
        }
        s.no_match = false;
        ++s.offer_index;
      }
      break;
    case SystemActKind::kProvideInfo:
      for (const auto& [slot, v] : act.slots) {
        if (category(slot) != SlotCategory::kRequestable || v.empty()) continue;
        s.provided.insert(slot);
        s.pending_requests.erase(slot);
      }
      break;
    case SystemActKind::kInformReservationResult:
      if (act.failed) {
        s.reservation_failed = true;
      } else {
        s.reservation_confirmed = true;
        s.reservation_failed = false;
        s.reference = act.slots.count(Slot::kReference) ? act.slots.at(Slot::kReference) : "";
        s.booked_restaurant = act.slots.count(Slot::kName) ? act.slots.at(Slot::kName) : "";
        if (s.presented) {
          s.provided.insert(Slot::kReference);
          s.pending_requests.erase(Slot::kReference);
        }
      }
      break;
    case SystemActKind::kAskType:
    case SystemActKind::kAskReservationInfo:
    case SystemActKind::kGoodbye:
      break;
  }
  return s;
}

ActionMask mask(const DialogState& state) {
  ActionMask m;
  m.fill(true);
  const bool presented = state.presented.has_value();
  m[index_of(SystemActKind::kProvideInfo)] = presented;
  m[index_of(SystemActKind::kAskReservationInfo)] = presented;
  m[index_of(SystemActKind::kInformReservationResult)] = presented && state.booking.complete();
  return m;
}

SystemActKind rule_policy(const DialogState& s) {
  if (s.user_done) return SystemActKind::kGoodbye;
  if (!s.presented) {
    if (!s.search_complete() || s.no_match) return SystemActKind::kAskType;
    return SystemActKind::kPresentResult;
  }
  if (s.last_user_act == UserActKind::kAnythingElse) return SystemActKind::kPresentResult;
  if (!answerable(s).empty()) return SystemActKind::kProvideInfo;
  if (s.booking_requested && !s.reservation_confirmed) {
    if (!s.booking.complete() || s.reservation_failed) return SystemActKind::kAskReservationInfo;
    return SystemActKind::kInformReservationResult;
  }
  return SystemActKind::kAskType;
}

std::string reservation_reference(std::string_view goal_id, std::string_view restaurant) {
  std::string key(goal_id);
  key += '|';
  key += normalize_value(restaurant);
  return hex64(fnv1a(key)).substr(0, 8);
}

bool booking_available(std::string_view restaurant, std::string_view day, std::string_view time,
                       const BackendConfig& config) {
  std::string key = normalize_value(restaurant) + "|" + normalize_value(day) + "|" +
                    normalize_value(time);
  double u = static_cast<double>(fnv1a(key) % 10000) / 10000.0;
  return u >= config.booking_failure_rate;
}

SystemAct execute_action(SystemActKind kind, const DialogState& state, const RestaurantDB& db,
                         std::string_view goal_id, const BackendConfig& config) {
  SystemAct act;
  act.kind = kind;
  switch (kind) {
    case SystemActKind::kAskType:
      if (!state.constraints.count(Slot::kName)) {
        for (Slot s : kSearchSlots) {
          if (!state.constraints.count(s)) act.slots[s] = "";
        }
      }
      break;
    case SystemActKind::kPresentResult: {
      SlotMap q = search_query(state);
      auto hits = db.query(q);
      if (hits.empty()) {
        act.failed = true;
        for (const auto& [slot, v] : q) {
          if (v != kDontCare) act.slots[slot] = v;
        }
        break;
      }
      const Restaurant& r = hits[static_cast<std::size_t>(state.offer_index) % hits.size()];
      act.slots = {{Slot::kName, r.name},
                   {Slot::kFood, r.food},
                   {Slot::kArea, r.area},
                   {Slot::kPriceRange, r.pricerange}};
      break;
    }
    case SystemActKind::kProvideInfo: {
      if (!state.presented) throw DomainError("ProvideInfo without a presented restaurant");
      const Restaurant& r = *state.presented;
      for (Slot s : answerable(state)) {
        act.slots[s] = s == Slot::kReference ? state.reference : r.value(s);
      }
      if (act.slots.empty()) {
        act.slots = {{Slot::kName, r.name}, {Slot::kFood, r.food}, {Slot::kArea, r.area}};
      }
      break;
    }
    case SystemActKind::kAskReservationInfo:
      if (!state.presented) throw DomainError("AskReservationInfo without a presented restaurant");
      if (!state.booking.people) act.slots[Slot::kPeople] = "";
      if (!state.booking.day) act.slots[Slot::kDay] = "";
      if (!state.booking.time) act.slots[Slot::kTime] = "";
      break;
    case SystemActKind::kInformReservationResult: {
      if (!state.presented || !state.booking.complete()) {
        throw DomainError("InformReservationResult needs a presented restaurant and a full booking");
      }
      const std::string& name = state.presented->name;
      const Booking& b = state.booking;
      act.slots = {{Slot::kName, name}, {Slot::kDay, *b.day}, {Slot::kTime, *b.time}};
      if (booking_available(name, *b.day, *b.time, config)) {
        act.slots[Slot::kPeople] = std::to_string(*b.people);
        act.slots[Slot::kReference] = reservation_reference(goal_id, name);
      } else {
        act.failed = true;
      }
      break;
    }
    case SystemActKind::kGoodbye:
      break;
  }
  return act;
}

std::string render_system(const SystemAct& act, const DialogState& state,
                          const nlg::TemplateBank& bank, Rng& rng) {
  const Restaurant* presented = state.presented ? &*state.presented : nullptr;
  return nlg::render_template(bank, nlg::template_key(act), act.slots, rng, presented);
}

}  // namespace usersim::sys
