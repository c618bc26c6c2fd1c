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

#include "usersim/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "usersim/nlg.h"

namespace usersim::sim {

std::string shift_time(std::string_view time, int hours) {
  int h = 0, m = 0;
  std::string t(time);
  if (std::sscanf(t.c_str(), "%d:%d", &h, &m) != 2) {
    throw SimulatorError("bad time '" + t + "'");
  }
  h = ((h + hours) % 24 + 24) % 24;
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", h, m);
  return buf;
}

void AgendaConfig::validate() const {
  if (p_else < 0 || p_else > 1) throw SimulatorError("p_else must be in [0, 1]");
  if (min_inform < 1 || max_inform < min_inform || min_request < 1 || max_request < min_request) {
    throw SimulatorError("bad slots-per-turn range");
  }
}

namespace {

int draw(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

SlotMap booking_slots(const Booking& b, const std::string& time) {
  return {{Slot::kPeople, std::to_string(*b.people)}, {Slot::kDay, *b.day}, {Slot::kTime, time}};
}

std::vector<Slot> asked_slots(const SystemAct& act) {
  std::vector<Slot> out;
  for (const auto& [s, v] : act.slots) {
    if (v.empty()) out.push_back(s);
  }
  return out;
}

bool top_is(const Agenda& a, UserActKind k) { return !a.stack.empty() && a.stack.back().kind == k; }

UserAct pop_informs(Agenda& a, Rng& rng, const AgendaConfig& c) {
  const int n = draw(rng, c.min_inform, c.max_inform);
  SlotMap slots;
  for (int i = 0; i < n && top_is(a, UserActKind::kInformType); ++i) {
    for (const auto& [s, v] : a.stack.back().slots) {
      slots[s] = v;
      a.memory[s] = v;
      a.last_informed = s;
    }
    a.stack.pop_back();
  }
  return UserAct::make(UserActKind::kInformType, slots);
}

UserAct pop_requests(Agenda& a, Rng& rng, const AgendaConfig& c) {
  const int n = draw(rng, c.min_request, c.max_request);
  SlotMap slots;
  for (int i = 0; i < n && top_is(a, UserActKind::kRequestInfo); ++i) {
    for (const auto& [s, v] : a.stack.back().slots) {
      slots[s] = "";
      a.outstanding.insert(s);
    }
    a.stack.pop_back();
  }
  return UserAct::make(UserActKind::kRequestInfo, slots);
}

UserAct request_outstanding(const Agenda& a) {
  SlotMap slots;
  for (Slot s : a.outstanding) slots[s] = "";
  return UserAct::make(UserActKind::kRequestInfo, slots);
}

UserAct full_booking(Agenda& a) {
  a.booking_informed = true;
  return UserAct::make(UserActKind::kMakeReservation, booking_slots(*a.goal.booking, *a.time));
}

UserAct goodbye(Agenda& a) {
  a.stack.clear();
  a.done = true;
  return UserAct::make(UserActKind::kGoodbye);
}

// Moves on to the next pending sub-task.
UserAct advance(Agenda& a, Rng& rng, const AgendaConfig& c) {
  if (a.stack.empty()) return goodbye(a);
  switch (a.stack.back().kind) {
    case UserActKind::kInformType:
      return pop_informs(a, rng, c);
    case UserActKind::kRequestInfo:
      return pop_requests(a, rng, c);
    case UserActKind::kMakeReservation:
      a.stack.pop_back();
      return full_booking(a);
    default:
      break;
  }
  if (!a.outstanding.empty()) return request_outstanding(a);
  if (a.goal.booking && !a.booking_confirmed) return full_booking(a);
  return goodbye(a);
}

bool presented_fits(const Agenda& a, const SystemAct& act, SlotMap* violated) {
  for (const auto& [s, want] : a.memory) {
    if (want == kDontCare) continue;
    auto it = act.slots.find(s);
    if (it != act.slots.end() && !values_match(it->second, want)) (*violated)[s] = want;
  }
  return violated->empty();
}

}  // namespace

Agenda agenda_init(const Goal& goal, Rng& rng) {
  goal.validate();
  Agenda a;
  a.goal = goal;
  a.stack.push_back({UserActKind::kGoodbye, {}});
  if (goal.booking) {
    a.time = goal.booking->time;
    a.stack.push_back({UserActKind::kMakeReservation, booking_slots(*goal.booking, *a.time)});
  }
  for (auto it = goal.requestables.rbegin(); it != goal.requestables.rend(); ++it) {
    a.stack.push_back({UserActKind::kRequestInfo, {{*it, ""}}});
  }
  std::vector<std::pair<Slot, std::string>> informs(goal.constraints.begin(),
                                                    goal.constraints.end());
  for (std::size_t i = informs.size(); i > 1; --i) {
    std::swap(informs[i - 1], informs[uniform_index(rng, i)]);
  }
  for (const auto& [s, v] : informs) a.stack.push_back({UserActKind::kInformType, {{s, v}}});
  return a;
}

UserAct agenda_next(Agenda& a, const std::optional<SystemAct>& system, Rng& rng,
                    const AgendaConfig& c) {
  if (a.done) throw SimulatorError("agenda already finished");
  ++a.turns;
  if (!system) {
    return top_is(a, UserActKind::kInformType) ? pop_informs(a, rng, c) : advance(a, rng, c);
  }
  const SystemAct& sys = *system;
  switch (sys.kind) {
    case SystemActKind::kGoodbye:
      return goodbye(a);

    case SystemActKind::kAskType: {
      if (top_is(a, UserActKind::kInformType)) return pop_informs(a, rng, c);
      auto asked = asked_slots(sys);
      if (asked.empty()) return advance(a, rng, c);
      SlotMap slots;
      for (Slot s : asked) {
        auto it = a.memory.find(s);
        slots[s] = it != a.memory.end() ? it->second : std::string(kDontCare);
        a.memory[s] = slots[s];
      }
      return UserAct::make(UserActKind::kInformType, slots);
    }

    case SystemActKind::kPresentResult: {
      if (sys.failed) {
        std::optional<Slot> relax;
        if (a.last_informed && a.memory[*a.last_informed] != kDontCare) relax = a.last_informed;
        for (auto it = a.memory.rbegin(); !relax && it != a.memory.rend(); ++it) {
          if (it->second != kDontCare) relax = it->first;
        }
        if (!relax) return advance(a, rng, c);
        a.memory[*relax] = std::string(kDontCare);
        a.last_informed.reset();
        return UserAct::make(UserActKind::kInformTypeChange, {{*relax, std::string(kDontCare)}});
      }
      if (top_is(a, UserActKind::kInformType)) return pop_informs(a, rng, c);
      SlotMap violated;
      if (!presented_fits(a, sys, &violated)) {
        return UserAct::make(UserActKind::kInformType, violated);
      }
      if (!a.asked_else && c.p_else > 0 && uniform01(rng) < c.p_else) {
        a.asked_else = true;
        return UserAct::make(UserActKind::kAnythingElse);
      }
      return advance(a, rng, c);
    }

    case SystemActKind::kProvideInfo:
      for (const auto& [s, v] : sys.slots) {
        if (!v.empty()) a.outstanding.erase(s);
      }
      if (!a.outstanding.empty()) return request_outstanding(a);
      return advance(a, rng, c);

    case SystemActKind::kAskReservationInfo: {
      if (!a.goal.booking) return advance(a, rng, c);
      std::erase_if(a.stack, [](const AgendaItem& i) {
        return i.kind == UserActKind::kMakeReservation;
      });
      a.booking_informed = true;
      SlotMap all = booking_slots(*a.goal.booking, *a.time);
      SlotMap slots;
      for (Slot s : asked_slots(sys)) {
        if (all.count(s)) slots[s] = all[s];
      }
      if (slots.empty()) slots = all;
      return UserAct::make(UserActKind::kMakeReservation, slots);
    }

    case SystemActKind::kInformReservationResult:
      if (!a.goal.booking) return advance(a, rng, c);
      if (sys.failed) {
        a.time = shift_time(*a.time, 1);
        return UserAct::make(UserActKind::kReservationChangeTime, {{Slot::kTime, *a.time}});
      }
      a.booking_confirmed = true;
      std::erase_if(a.stack, [](const AgendaItem& i) {
        return i.kind == UserActKind::kMakeReservation;
      });
      return advance(a, rng, c);
  }
  throw SimulatorError("system act outside the action set");
}

// ---------------------------------------------------------------------------

namespace {

bool relaxed(const BeliefSpan& b, Slot s) {
  auto it = b.inform.find(s);
  return it != b.inform.end() && it->second == kDontCare;
}

// Told with the goal value, or relaxed to dontcare.
bool conveyed(const BeliefSpan& b, const Goal& g, Slot s) {
  auto it = b.inform.find(s);
  return it != b.inform.end() && (it->second == g.constraints.at(s) || it->second == kDontCare);
}

bool offered(const BeliefSpan& b) { return b.offer.count(Slot::kName) > 0; }

// An offer that violates no unrelaxed goal constraint.
bool offer_fits(const BeliefSpan& b, const Goal& g) {
  if (!offered(b)) return false;
  for (const auto& [s, v] : g.constraints) {
    if (relaxed(b, s)) continue;
    auto it = b.offer.find(s);
    if (s == Slot::kName ? it->second != v : it != b.offer.end() && it->second != v) return false;
  }
  return true;
}

bool all_conveyed(const BeliefSpan& b, const Goal& g) {
  for (const auto& [s, v] : g.constraints) {
    if (!conveyed(b, g, s)) return false;
  }
  return true;
}

std::vector<Slot> unmet_requests(const BeliefSpan& b, const Goal& g) {
  std::vector<Slot> out;
  for (Slot s : g.requestables) {
    if (!b.inform.count(s)) out.push_back(s);
  }
  return out;
}

bool confirmed(const BeliefSpan& b) { return b.inform.count(Slot::kReference) > 0; }

std::string wanted_time(const BeliefSpan& b, const Goal& g) {
  if (b.book.time) return *b.book.time;
  return g.booking ? *g.booking->time : std::string();
}

}  // namespace

BeliefSpan belief_update(const BeliefSpan& prev, std::string_view prev_user_utterance,
                         const std::optional<SystemAct>& system,
                         const corpus::SlotSpotter& spotter) {
  BeliefSpan b = prev;
  for (const auto& [s, v] : spotter.spot(prev_user_utterance)) {
    switch (category(s)) {
      case SlotCategory::kInformable:
        if (!v.empty()) b.inform[s] = v;
        break;
      case SlotCategory::kRequestable:
        b.request.insert(s);
        break;
      case SlotCategory::kBooking:
        if (s == Slot::kPeople) {
          try {
            b.book.people = std::stoi(v);
          } catch (const std::exception&) {
          }
        } else if (s == Slot::kDay) {
          b.book.day = v;
        } else {
          b.book.time = v;
        }
        break;
    }
  }
  if (system && !system->failed) {
    switch (system->kind) {
      case SystemActKind::kPresentResult:
      case SystemActKind::kProvideInfo:
      case SystemActKind::kInformReservationResult:
        if (system->kind == SystemActKind::kPresentResult) b.offer.clear();
        for (const auto& [s, v] : system->slots) {
          if (v.empty()) continue;
          if (category(s) == SlotCategory::kInformable) {
            b.offer[s] = v;
          } else if (category(s) == SlotCategory::kRequestable) {
            b.inform[s] = v;
          }
        }
        break;
      default:
        break;
    }
  }
  for (auto it = b.request.begin(); it != b.request.end();) {
    it = b.inform.count(*it) ? b.request.erase(it) : std::next(it);
  }
  return b;
}

ActFeatures act_features(const BeliefSpan& b, const Goal& g, const std::optional<SystemAct>& sys) {
  ActFeatures x{};
  if (sys) {
    x[index_of(sys->kind)] = 1;
    x[7] = sys->failed ? 1 : 0;
  } else {
    x[6] = 1;
  }
  const bool told = all_conveyed(b, g);
  x[8] = told;
  x[9] = !told;
  x[10] = offer_fits(b, g);
  const bool unmet = !unmet_requests(b, g).empty();
  x[11] = unmet;
  x[12] = !g.requestables.empty() && !unmet;
  x[13] = g.booking && !confirmed(b);
  x[14] = b.book.complete();
  x[15] = confirmed(b);
  x[16] = !b.request.empty();
  x[17] = 1;
  return x;
}

std::vector<std::string> act_feature_names() {
  std::vector<std::string> out;
  for (SystemActKind k : kAllSystemActs) out.push_back("sys_" + std::string(act_name(k)));
  for (const char* n : {"sys_none", "sys_failed", "constraints_told", "constraints_untold",
                        "offered", "requests_unmet", "requests_met", "booking_open",
                        "booking_told", "booking_confirmed", "requests_open", "bias"}) {
    out.push_back(n);
  }
  return out;
}

std::vector<ActExample> act_examples(const std::vector<Dialog>& annotated,
                                     const corpus::SlotSpotter& spotter) {
  std::vector<ActExample> out;
  for (const auto& d : annotated) {
    BeliefSpan belief;
    std::string last_user;
    std::optional<SystemAct> sys;
    for (const auto& t : d.turns) {
      if (t.speaker == Speaker::kSystem) {
        sys = t.system_act;
        continue;
      }
      belief = belief_update(belief, last_user, sys, spotter);
      if (t.user_act) out.push_back({act_features(belief, d.goal, sys), t.user_act->kind});
      last_user = t.utterance;
    }
  }
  return out;
}

ActModel::ActModel() : w_(kNumUserActs * kNumActFeatures, 0.0) {}

std::array<double, kNumUserActs> ActModel::scores(const ActFeatures& x) const {
  std::array<double, kNumUserActs> s{};
  for (int k = 0; k < kNumUserActs; ++k) {
    double v = 0;
    for (int j = 0; j < kNumActFeatures; ++j) v += w_[k * kNumActFeatures + j] * x[j];
    s[k] = v;
  }
  return s;
}

std::array<double, kNumUserActs> ActModel::distribution(const ActFeatures& x) const {
  auto s = scores(x);
  const double top = *std::max_element(s.begin(), s.end());
  double z = 0;
  for (auto& v : s) {
    v = std::exp(v - top);
    z += v;
  }
  for (auto& v : s) v /= z;
  return s;
}

double ActModel::loss(const std::vector<ActExample>& data) const {
  if (data.empty()) return 0.0;
  double total = 0;
  for (const auto& e : data) {
    auto p = distribution(e.x);
    total -= std::log(std::max(p[index_of(e.y)], 1e-300));
  }
  return total / static_cast<double>(data.size());
}

double ActModel::accuracy(const std::vector<ActExample>& data) const {
  if (data.empty()) return 0.0;
  int hit = 0;
  for (const auto& e : data) {
    auto p = distribution(e.x);
    if (std::max_element(p.begin(), p.end()) - p.begin() == index_of(e.y)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

std::vector<double> ActModel::fit(const std::vector<ActExample>& data,
                                  const ActModelConfig& config) {
  std::vector<double> losses;
  const double n = static_cast<double>(data.size());
  std::vector<double> grad(w_.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double total = 0;
    for (const auto& e : data) {
      auto p = distribution(e.x);
      total -= std::log(std::max(p[index_of(e.y)], 1e-300));
      for (int k = 0; k < kNumUserActs; ++k) {
        const double g = p[k] - (k == index_of(e.y) ? 1.0 : 0.0);
        if (g == 0) continue;
        for (int j = 0; j < kNumActFeatures; ++j) grad[k * kNumActFeatures + j] += g * e.x[j];
      }
    }
    losses.push_back(total / n);
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= config.step * grad[i] / n;
  }
  losses.push_back(loss(data));
  return losses;
}

Json ActModel::to_json() const {
  Json rows = Json::object();
  for (UserActKind k : kAllUserActs) {
    auto begin = w_.begin() + index_of(k) * kNumActFeatures;
    rows[std::string(act_name(k))] = std::vector<double>(begin, begin + kNumActFeatures);
  }
  return {{"features", act_feature_names()}, {"weights", rows}};
}

ActModel ActModel::from_json(const Json& j) {
  if (j.at("features").get<std::vector<std::string>>() != act_feature_names()) {
    throw SimulatorError("act model feature schema mismatch");
  }
  ActModel m;
  for (UserActKind k : kAllUserActs) {
    auto row = j.at("weights").at(std::string(act_name(k))).get<std::vector<double>>();
    if (row.size() != kNumActFeatures) throw SimulatorError("act model row size mismatch");
    std::copy(row.begin(), row.end(), m.w_.begin() + index_of(k) * kNumActFeatures);
  }
  return m;
}

void ActModel::save(const std::filesystem::path& path) const {
  write_file_atomic(path, to_json().dump(2) + "\n");
}

ActModel ActModel::load(const std::filesystem::path& path) {
  return from_json(Json::parse(read_file(path)));
}

ActModel sl_train(const std::vector<ActExample>& data, const ActModelConfig& config,
                  std::vector<double>* losses) {
  if (data.size() < 100) {
    throw corpus::InsufficientDataError("act model needs at least 100 annotated user turns, got " +
                                        std::to_string(data.size()));
  }
  std::set<UserActKind> classes;
  for (const auto& e : data) classes.insert(e.y);
  if (classes.size() < 2) {
    throw corpus::InsufficientDataError("act model needs at least two act classes");
  }
  ActModel m;
  auto l = m.fit(data, config);
  if (losses) *losses = std::move(l);
  return m;
}

std::array<bool, kNumUserActs> goal_mask(const BeliefSpan& b, const Goal& g,
                                         const std::optional<SystemAct>& sys) {
  std::array<bool, kNumUserActs> m{};
  auto set = [&](UserActKind k, bool v) { m[index_of(k)] = v; };
  if (sys && sys->kind == SystemActKind::kGoodbye) {
    set(UserActKind::kGoodbye, true);
    return m;
  }
  const bool is_present = sys && sys->kind == SystemActKind::kPresentResult;
  const bool booking_open = g.booking && !confirmed(b);
  const bool fits = offer_fits(b, g);
  set(UserActKind::kInformType, !all_conveyed(b, g) || (offered(b) && !fits) ||
                                    (sys && sys->kind == SystemActKind::kAskType));
  set(UserActKind::kInformTypeChange, is_present && sys->failed);
  set(UserActKind::kAnythingElse, is_present && !sys->failed);
  set(UserActKind::kRequestInfo, fits && !unmet_requests(b, g).empty());
  const bool booking_failed =
      sys && sys->kind == SystemActKind::kInformReservationResult && sys->failed;
  set(UserActKind::kMakeReservation, fits && booking_open && !booking_failed);
  set(UserActKind::kReservationChangeTime, g.booking && booking_failed);
  set(UserActKind::kGoodbye, fits && unmet_requests(b, g).empty() && !booking_open);
  return m;
}

UserAct sl_next(const ActModel& model, const BeliefSpan& b, const Goal& g,
                const std::optional<SystemAct>& sys, Rng& rng) {
  auto allowed = goal_mask(b, g, sys);
  auto p = model.distribution(act_features(b, g, sys));
  double z = 0;
  for (int k = 0; k < kNumUserActs; ++k) {
    if (!allowed[k]) p[k] = 0;
    z += p[k];
  }
  UserActKind kind = UserActKind::kGoodbye;
  if (z > 0) {
    double u = uniform01(rng) * z;
    int pick = -1;
    for (int k = 0; k < kNumUserActs; ++k) {
      if (p[k] <= 0) continue;
      pick = k;
      if (u < p[k]) break;
      u -= p[k];
    }
    kind = kAllUserActs[pick];
  }

  SlotMap slots;
  switch (kind) {
    case UserActKind::kInformType: {
      std::vector<Slot> asked;
      if (sys && sys->kind == SystemActKind::kAskType) asked = asked_slots(*sys);
      for (Slot s : asked) {
        auto it = g.constraints.find(s);
        slots[s] = it != g.constraints.end() ? it->second : std::string(kDontCare);
      }
      if (!slots.empty()) break;
      std::vector<Slot> open;
      for (const auto& [s, v] : g.constraints) {
        if (!conveyed(b, g, s)) open.push_back(s);
      }
      if (open.empty()) {
        slots = g.constraints;
        break;
      }
      for (std::size_t i = open.size(); i > 1; --i) std::swap(open[i - 1], open[uniform_index(rng, i)]);
      const std::size_t n = std::min<std::size_t>(open.size(), 1 + uniform_index(rng, 3));
      for (std::size_t i = 0; i < n; ++i) slots[open[i]] = g.constraints.at(open[i]);
      break;
    }
    case UserActKind::kInformTypeChange:
      for (auto it = g.constraints.rbegin(); it != g.constraints.rend(); ++it) {
        auto cur = b.inform.find(it->first);
        if (cur == b.inform.end() || cur->second != kDontCare) {
          slots[it->first] = std::string(kDontCare);
          break;
        }
      }
      if (slots.empty()) slots[g.constraints.begin()->first] = std::string(kDontCare);
      break;
    case UserActKind::kRequestInfo:
      for (Slot s : unmet_requests(b, g)) slots[s] = "";
      break;
    case UserActKind::kMakeReservation: {
      SlotMap all = booking_slots(*g.booking, wanted_time(b, g));
      if (sys && sys->kind == SystemActKind::kAskReservationInfo) {
        for (Slot s : asked_slots(*sys)) {
          if (all.count(s)) slots[s] = all[s];
        }
      }
      if (slots.empty()) slots = all;
      break;
    }
    case UserActKind::kReservationChangeTime:
      slots[Slot::kTime] = shift_time(wanted_time(b, g), 1);
      break;
    case UserActKind::kAnythingElse:
    case UserActKind::kGoodbye:
      break;
  }
  return UserAct::make(kind, slots);
}

// ---------------------------------------------------------------------------

Tokens goal_tokens(const Goal& g, const BeliefSpan& b) {
  Tokens out;
  for (const auto& [s, v] : g.constraints) {
    std::string n(slot_name(s));
    out.push_back("#goal_" + n);
    out.push_back((conveyed(b, g, s) ? "#told_" : "#untold_") + n);
  }
  for (Slot s : g.requestables) {
    out.push_back((b.inform.count(s) ? "#got_" : "#need_") + std::string(slot_name(s)));
  }
  if (g.booking) {
    out.push_back("#goal_booking");
    out.push_back(confirmed(b) ? "#booked" : "#unbooked");
    if (b.book.complete()) out.push_back("#told_booking");
  }
  if (offer_fits(b, g)) out.push_back("#offered");
  Tokens rep;
  for (int i = 0; i < kGoalTokenWeight; ++i) rep.insert(rep.end(), out.begin(), out.end());
  return rep;
}

SleIndex build_sle_index(const std::vector<Dialog>& annotated, const corpus::Delexicalizer& delex,
                         const corpus::SlotSpotter& spotter) {
  std::vector<nlg::RetrievalCandidate> cands;
  std::vector<UserActKind> acts;
  for (const auto& d : annotated) {
    BeliefSpan belief;
    std::string last_user, last_system;
    std::optional<SystemAct> sys;
    for (const auto& t : d.turns) {
      if (t.speaker == Speaker::kSystem) {
        sys = t.system_act;
        last_system = t.utterance;
        continue;
      }
      belief = belief_update(belief, last_user, sys, spotter);
      if (t.user_act) {
        Tokens ctx = nlg::retrieval_context(delex, last_system, last_user);
        for (auto& tok : goal_tokens(d.goal, belief)) ctx.push_back(std::move(tok));
        cands.push_back({std::move(ctx), "", join(delex.apply(tokenize(t.utterance),
                                                              t.user_act->slots))});
        acts.push_back(t.user_act->kind);
      }
      last_user = t.utterance;
    }
  }
  return {nlg::TfIdfIndex(std::move(cands)), std::move(acts)};
}

std::string sle_respond(const Tokens& context, const Goal& goal, const BeliefSpan& belief,
                        const SleIndex& index) {
  if (index.index.empty()) throw SimulatorError("empty end-to-end index");
  SlotMap slots;
  for (const auto& [s, v] : goal.constraints) {
    if (v != kDontCare) slots[s] = v;
  }
  if (goal.booking) {
    slots[Slot::kPeople] = std::to_string(*goal.booking->people);
    slots[Slot::kDay] = *goal.booking->day;
    slots[Slot::kTime] = wanted_time(belief, goal);
  }
  // Best remaining candidate first, ties by id; usually the first one lexicalizes.
  auto score = index.index.similarities(context);
  for (std::size_t tried = 0; tried < score.size(); ++tried) {
    std::size_t id = 0;
    for (std::size_t i = 1; i < score.size(); ++i) {
      if (score[i] > score[id]) id = i;
    }
    score[id] = -2.0;
    SlotMap use = slots;
    if (index.acts[id] == UserActKind::kReservationChangeTime && use.count(Slot::kTime)) {
      use[Slot::kTime] = shift_time(use[Slot::kTime], 1);
    }
    try {
      return nlg::lexicalize(index.index.candidate(id).utterance, use);
    } catch (const nlg::NlgError&) {
    }
  }
  throw SimulatorError("no lexicalizable candidate");
}

// ---------------------------------------------------------------------------

namespace {

class AgendaSimulator : public UserSimulator {
 public:
  AgendaSimulator(std::string id, const SimulatorResources& r, std::unique_ptr<nlg::UserNlg> nlg)
      : id_(std::move(id)), res_(r), nlg_(std::move(nlg)) {}

  void reset(const Goal& goal, std::uint64_t seed) override {
    rng_.seed(derive_seed(seed, "agenda"));
    nlg_rng_.seed(derive_seed(seed, "user-nlg"));
    agenda_ = agenda_init(goal, rng_);
    last_user_.clear();
  }

  SimTurn respond(const std::optional<SystemAct>& system, std::string_view utterance) override {
    UserAct act = agenda_next(agenda_, system, rng_, res_.agenda);
    Tokens ctx = nlg::retrieval_context(*res_.delex, utterance, last_user_);
    SimTurn out{nlg_->realize(act, ctx, nlg_rng_), act, false};
    out.done = agenda_.done || agenda_.turns >= kMaxTurns;
    last_user_ = out.utterance;
    return out;
  }

  std::string_view id() const override { return id_; }
  const nlg::NlgStats* nlg_stats() const override { return &nlg_->stats(); }
  const Agenda& agenda() const { return agenda_; }

 private:
  std::string id_;
  SimulatorResources res_;
  std::unique_ptr<nlg::UserNlg> nlg_;
  Rng rng_, nlg_rng_;
  Agenda agenda_;
  std::string last_user_;
};

class SlSimulator : public UserSimulator {
 public:
  SlSimulator(std::string id, const SimulatorResources& r, std::unique_ptr<nlg::UserNlg> nlg)
      : id_(std::move(id)), res_(r), nlg_(std::move(nlg)) {}

  void reset(const Goal& goal, std::uint64_t seed) override {
    goal.validate();
    goal_ = goal;
    rng_.seed(derive_seed(seed, "sl-dm"));
    nlg_rng_.seed(derive_seed(seed, "user-nlg"));
    belief_ = {};
    last_user_.clear();
    turns_ = 0;
  }

  SimTurn respond(const std::optional<SystemAct>& system, std::string_view utterance) override {
    belief_ = belief_update(belief_, last_user_, system, res_.annotator->spotter());
    UserAct act = sl_next(*res_.act_model, belief_, goal_, system, rng_);
    Tokens ctx = nlg::retrieval_context(*res_.delex, utterance, last_user_);
    SimTurn out{nlg_->realize(act, ctx, nlg_rng_), act, false};
    ++turns_;
    out.done = act.kind == UserActKind::kGoodbye || turns_ >= kMaxTurns;
    last_user_ = out.utterance;
    return out;
  }

  std::string_view id() const override { return id_; }
  const nlg::NlgStats* nlg_stats() const override { return &nlg_->stats(); }

 private:
  std::string id_;
  SimulatorResources res_;
  std::unique_ptr<nlg::UserNlg> nlg_;
  Rng rng_, nlg_rng_;
  Goal goal_;
  BeliefSpan belief_;
  std::string last_user_;
  int turns_ = 0;
};

class SleSimulator : public UserSimulator {
 public:
  explicit SleSimulator(const SimulatorResources& r) : res_(r) {}

  void reset(const Goal& goal, std::uint64_t) override {
    goal.validate();
    goal_ = goal;
    belief_ = {};
    last_user_.clear();
    turns_ = 0;
  }

  SimTurn respond(const std::optional<SystemAct>& system, std::string_view utterance) override {
    belief_ = belief_update(belief_, last_user_, system, res_.annotator->spotter());
    Tokens ctx = nlg::retrieval_context(*res_.delex, utterance, last_user_);
    for (auto& t : goal_tokens(goal_, belief_)) ctx.push_back(std::move(t));
    SimTurn out;
    out.utterance = sle_respond(ctx, goal_, belief_, *res_.sle_index);
    ++turns_;
    bool bye = res_.annotator->annotate(out.utterance).act.kind == UserActKind::kGoodbye;
    out.done = bye || turns_ >= kMaxTurns;
    last_user_ = out.utterance;
    return out;
  }

  std::string_view id() const override { return "sl-e"; }

 private:
  SimulatorResources res_;
  Goal goal_;
  BeliefSpan belief_;
  std::string last_user_;
  int turns_ = 0;
};

template <typename T>
const T& need(const std::shared_ptr<const T>& p, const char* what) {
  if (!p) throw SimulatorError(std::string("simulator resource missing: ") + what);
  return *p;
}

std::unique_ptr<nlg::UserNlg> make_nlg(char kind, const SimulatorResources& r) {
  need(r.user_bank, "user templates");
  switch (kind) {
    case 't':
      return std::make_unique<nlg::TemplateUserNlg>(r.user_bank);
    case 'r':
      need(r.user_index, "user retrieval index");
      return std::make_unique<nlg::RetrievalUserNlg>(r.user_index, r.user_bank);
    default:
      need(r.user_lm, "user language model");
      return std::make_unique<nlg::GenerationUserNlg>(r.user_lm, r.user_bank);
  }
}

}  // namespace

bool is_simulator_id(std::string_view id) {
  return std::find(kSimulatorIds.begin(), kSimulatorIds.end(), id) != kSimulatorIds.end();
}

std::unique_ptr<UserSimulator> make_simulator(std::string_view id,
                                              const SimulatorResources& r) {
  if (!is_simulator_id(id)) throw SimulatorError("unknown simulator '" + std::string(id) + "'");
  need(r.delex, "delexicalizer");
  need(r.annotator, "annotator");
  if (id == "sl-e") {
    need(r.sle_index, "end-to-end index");
    return std::make_unique<SleSimulator>(r);
  }
  const char nlg_kind = id.back();
  if (id.substr(0, 4) == "agen") {
    r.agenda.validate();
    return std::make_unique<AgendaSimulator>(std::string(id), r, make_nlg(nlg_kind, r));
  }
  need(r.act_model, "act model");
  return std::make_unique<SlSimulator>(std::string(id), r, make_nlg(nlg_kind, r));
}

}  // namespace usersim::sim
