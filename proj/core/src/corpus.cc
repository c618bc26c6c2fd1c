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

#include "usersim/corpus.h"

#include <algorithm>
#include <array>
#include <regex>
#include <set>

#include "usersim/serialization.h"

namespace usersim::corpus {

namespace {

const std::map<std::string, Slot, std::less<>> kNativeSlots = {
    {"name", Slot::kName},       {"food", Slot::kFood},     {"area", Slot::kArea},
    {"price", Slot::kPriceRange}, {"pricerange", Slot::kPriceRange},
    {"addr", Slot::kAddress},    {"address", Slot::kAddress}, {"phone", Slot::kPhone},
    {"post", Slot::kPostcode},   {"postcode", Slot::kPostcode},
    {"ref", Slot::kReference},   {"people", Slot::kPeople}, {"day", Slot::kDay},
    {"time", Slot::kTime}};

std::optional<Slot> native_slot(std::string name) {
  for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto it = kNativeSlots.find(name);
  if (it == kNativeSlots.end()) return std::nullopt;
  return it->second;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

bool touches_restaurant(const Json& goal) {
  if (!goal.contains("restaurant")) return false;
  const Json& r = goal["restaurant"];
  if (!r.is_object()) return false;
  for (const auto& [key, value] : r.items()) {
    if ((value.is_object() || value.is_array()) && !value.empty()) return true;
  }
  return false;
}

std::string as_string(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.dump();
}

// Lenient conversion: the user's first preference (fail_info, fail_book)
// wins over the final one, so no-match and failed-booking paths survive.
Goal convert_goal(const std::string& id, const Json& r) {
  Goal g;
  g.id = id;
  const Json* info = nullptr;
  if (r.contains("fail_info") && r["fail_info"].is_object() && !r["fail_info"].empty()) {
    info = &r["fail_info"];
  } else if (r.contains("info") && r["info"].is_object()) {
    info = &r["info"];
  }
  if (info) {
    for (const auto& [key, value] : info->items()) {
      auto slot = native_slot(key);
      if (slot && category(*slot) == SlotCategory::kInformable) {
        g.constraints[*slot] = normalize_value(as_string(value));
      }
    }
  }
  if (g.constraints.count(Slot::kName)) {
    SlotMap only{{Slot::kName, g.constraints[Slot::kName]}};
    g.constraints = only;
  }
  if (r.contains("reqt") && r["reqt"].is_array()) {
    for (const auto& v : r["reqt"]) {
      auto slot = native_slot(as_string(v));
      if (slot && category(*slot) == SlotCategory::kRequestable && *slot != Slot::kReference) {
        g.requestables.insert(*slot);
      }
    }
  }
  if (r.contains("book") && r["book"].is_object() && !r["book"].empty()) {
    const Json& b = r["book"];
    Booking booking;
    try {
      if (b.contains("people")) booking.people = std::stoi(as_string(b["people"]));
    } catch (const std::exception&) {
    }
    if (b.contains("day")) booking.day = normalize_value(as_string(b["day"]));
    if (b.contains("time")) booking.time = normalize_value(as_string(b["time"]));
    if (r.contains("fail_book") && r["fail_book"].is_object() && r["fail_book"].contains("time")) {
      booking.time = normalize_value(as_string(r["fail_book"]["time"]));
    }
    if (booking.complete() && *booking.people > 0) g.booking = booking;
  }
  if (!g.requestables.empty()) g.subtasks.push_back(Subtask::kAskInfo);
  if (g.booking) g.subtasks.push_back(Subtask::kMakeReservation);
  return g;
}

bool has_act(const Json& acts, const char* name) { return acts.contains(name); }

SlotMap act_slots(const Json& acts, const char* name) {
  SlotMap out;
  if (!acts.contains(name)) return out;
  for (const auto& pair : acts[name]) {
    if (!pair.is_array() || pair.size() < 2) continue;
    auto slot = native_slot(as_string(pair[0]));
    if (!slot) continue;
    std::string value = normalize_value(as_string(pair[1]));
    if (value == "?" || value == "none") value.clear();
    out[*slot] = value;
  }
  return out;
}

std::string goal_key(const Goal& g) {
  std::string key;
  for (const auto& [s, v] : g.constraints) key += std::string(slot_name(s)) + "=" + v + ";";
  key += "|";
  for (Slot s : g.requestables) key += std::string(slot_name(s)) + ";";
  key += "|";
  if (g.booking) {
    key += std::to_string(*g.booking->people) + "," + *g.booking->day + "," + *g.booking->time;
  }
  return key;
}

constexpr std::array<std::string_view, 7> kDays = {"monday", "tuesday",  "wednesday", "thursday",
                                                   "friday", "saturday", "sunday"};

}  // namespace

std::vector<Dialog> parse_corpus(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("corpus parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + " (offset " + std::to_string(e.byte) + "): " +
                         e.what(),
                     line, col);
  }
  if (!root.is_object()) throw ParseError("corpus root must be an object", 1, 1);
  std::vector<Dialog> out;
  for (const auto& [id, body] : root.items()) {
    if (!body.is_object() || !body.contains("goal") || !touches_restaurant(body["goal"])) continue;
    Dialog d;
    d.id = id;
    d.goal = convert_goal(id, body["goal"]["restaurant"]);
    const Json& log = body.contains("log") ? body["log"] : Json::array();
    for (std::size_t i = 0; i < log.size(); ++i) {
      Turn t;
      t.speaker = i % 2 == 0 ? Speaker::kUser : Speaker::kSystem;
      t.utterance = canonical(log[i].value("text", ""));
      if (t.speaker == Speaker::kSystem && log[i].contains("dialog_act")) {
        NativeActs n = map_native_acts(log[i]["dialog_act"]);
        t.system_act = n.act;
        t.categories = std::move(n.categories);
      }
      d.turns.push_back(std::move(t));
    }
    out.push_back(std::move(d));
  }
  if (out.empty()) throw EmptyCorpusError("corpus contains no restaurant-domain dialogs");
  return out;
}

std::vector<Dialog> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

NativeActs map_native_acts(const Json& acts) {
  NativeActs out;
  if (!acts.is_object()) return out;
  for (const auto& [name, value] : acts.items()) {
    std::string category;
    if (name == "Restaurant-Inform" || name == "Restaurant-NoOffer") category = "inform";
    else if (name == "Restaurant-Request") category = "request";
    else if (name.rfind("Booking-", 0) == 0) category = "book_inform";
    else if (name == "Restaurant-Select") category = "select";
    else if (name == "Restaurant-Recommend") category = "recommend";
    if (!category.empty() &&
        std::find(out.categories.begin(), out.categories.end(), category) == out.categories.end()) {
      out.categories.push_back(category);
    }
  }
  SystemAct act;
  if (has_act(acts, "Booking-Book")) {
    act = {SystemActKind::kInformReservationResult, act_slots(acts, "Booking-Book"), false};
  } else if (has_act(acts, "Booking-NoBook")) {
    act = {SystemActKind::kInformReservationResult, act_slots(acts, "Booking-NoBook"), true};
  } else if (has_act(acts, "Booking-Request") || has_act(acts, "Booking-Inform")) {
    SlotMap s = act_slots(acts, "Booking-Request");
    for (auto& kv : act_slots(acts, "Booking-Inform")) s.insert(kv);
    act = {SystemActKind::kAskReservationInfo, s, false};
  } else if (has_act(acts, "Restaurant-NoOffer")) {
    act = {SystemActKind::kPresentResult, act_slots(acts, "Restaurant-NoOffer"), true};
  } else if (has_act(acts, "Restaurant-Inform") || has_act(acts, "Restaurant-Recommend") ||
             has_act(acts, "Restaurant-Select")) {
    SlotMap s = act_slots(acts, "Restaurant-Inform");
    for (const char* n : {"Restaurant-Recommend", "Restaurant-Select"}) {
      for (auto& kv : act_slots(acts, n)) s.insert(kv);
    }
    bool info = std::any_of(kInfoSlots.begin(), kInfoSlots.end(),
                            [&](Slot x) { return s.count(x) > 0; });
    act = {info ? SystemActKind::kProvideInfo : SystemActKind::kPresentResult, s, false};
  } else if (has_act(acts, "Restaurant-Request")) {
    act = {SystemActKind::kAskType, act_slots(acts, "Restaurant-Request"), false};
  } else if (has_act(acts, "general-bye")) {
    act = {SystemActKind::kGoodbye, {}, false};
  } else {
    return out;
  }
  out.act = std::move(act);
  return out;
}

std::pair<std::vector<Dialog>, AnnotationReport> annotate_user_acts(
    std::vector<Dialog> dialogs, const Annotator& annotator) {
  AnnotationReport report;
  for (auto& d : dialogs) {
    for (auto& t : d.turns) {
      if (t.speaker != Speaker::kUser) continue;
      Annotation a = annotator.annotate(t.utterance);
      t.user_act = a.act;
      ++report.user_turns;
      if (a.matched) ++report.matched;
      ++report.per_act[a.act.kind];
    }
  }
  return {std::move(dialogs), std::move(report)};
}

double GoalDB::reservation_share() const {
  int ai = 0, mr = 0;
  if (auto it = subtask_counts.find(Subtask::kAskInfo); it != subtask_counts.end()) ai = it->second;
  if (auto it = subtask_counts.find(Subtask::kMakeReservation); it != subtask_counts.end()) {
    mr = it->second;
  }
  return ai + mr ? double(mr) / (ai + mr) : 0.0;
}

GoalDB make_goal_db(std::vector<Goal> goals) {
  GoalDB db;
  db.goals = std::move(goals);
  db.subtask_counts = {{Subtask::kAskInfo, 0}, {Subtask::kMakeReservation, 0}};
  for (const auto& g : db.goals) {
    for (Subtask t : g.subtasks) ++db.subtask_counts[t];
  }
  db.pre_balance_reservation_share = db.post_balance_reservation_share = db.reservation_share();
  return db;
}

GoalDB build_goal_db(const std::vector<Dialog>& dialogs, std::uint64_t seed) {
  std::vector<Goal> goals;
  std::set<std::string> distinct;
  for (const auto& d : dialogs) {
    try {
      d.goal.validate();
    } catch (const DomainError&) {
      continue;
    }
    goals.push_back(d.goal);
    distinct.insert(goal_key(d.goal));
  }
  if (distinct.size() < 10) {
    throw InsufficientDataError("goal database needs at least 10 distinct goals, got " +
                                std::to_string(distinct.size()));
  }
  return balance_goals(make_goal_db(std::move(goals)), seed);
}

GoalDB balance_goals(GoalDB db, std::uint64_t seed) {
  const double pre = db.reservation_share();
  std::vector<std::string> times;
  {
    std::set<std::string> seen;
    for (const auto& g : db.goals) {
      if (g.booking) seen.insert(*g.booking->time);
    }
    times.assign(seen.begin(), seen.end());
  }
  std::vector<std::size_t> mr_pool, ai_pool;
  for (std::size_t i = 0; i < db.goals.size(); ++i) {
    if (db.goals[i].has(Subtask::kMakeReservation)) mr_pool.push_back(i);
    if (db.goals[i].has(Subtask::kAskInfo)) ai_pool.push_back(i);
  }
  Rng rng(derive_seed(seed, "goal-balance"));
  int& ai = db.subtask_counts[Subtask::kAskInfo];
  int& mr = db.subtask_counts[Subtask::kMakeReservation];
  int n = 0;
  while (ai > mr && !mr_pool.empty()) {
    const Goal src = db.goals[mr_pool[uniform_index(rng, mr_pool.size())]];
    Booking b;
    b.people = 1 + static_cast<int>(uniform_index(rng, 8));
    b.day = std::string(kDays[uniform_index(rng, kDays.size())]);
    b.time = times[uniform_index(rng, times.size())];
    db.goals.push_back(Goal::make(src.id + "#aug" + std::to_string(++n), src.constraints, {}, b));
    ++mr;
  }
  while (mr > ai && !ai_pool.empty()) {
    const Goal src = db.goals[ai_pool[uniform_index(rng, ai_pool.size())]];
    db.goals.push_back(
        Goal::make(src.id + "#aug" + std::to_string(++n), src.constraints, src.requestables, {}));
    ++ai;
  }
  db.augmented = n;
  db.pre_balance_reservation_share = pre;
  db.post_balance_reservation_share = db.reservation_share();
  return db;
}

const Goal& sample_goal(const GoalDB& db, Rng& rng) {
  if (db.goals.empty()) throw std::invalid_argument("sample_goal: empty goal database");
  return db.goals[uniform_index(rng, db.goals.size())];
}

std::string placeholder(Slot slot) { return "<" + std::string(slot_name(slot)) + ">"; }

std::optional<Slot> placeholder_slot(std::string_view token) {
  if (token.size() < 3 || token.front() != '<' || token.back() != '>') return std::nullopt;
  return parse_slot(token.substr(1, token.size() - 2));
}

Delexicalizer::Delexicalizer(const RestaurantDB& db) {
  auto add = [&](std::string_view phrase, Slot slot, const std::string& value) {
    Tokens t = tokenize(phrase);
    if (!t.empty() && t != Tokens{"unknown"}) phrases_.push_back({std::move(t), slot, value});
  };
  for (Slot s : {Slot::kName, Slot::kFood, Slot::kArea, Slot::kPriceRange, Slot::kAddress,
                 Slot::kPhone, Slot::kPostcode}) {
    for (const auto& v : db.values(s)) add(v, s, v);
  }
  for (const auto& v : db.values(Slot::kName)) {
    if (v.rfind("the ", 0) == 0) add(v.substr(4), Slot::kName, v);
  }
  for (const char* p : {"center", "city centre", "city center", "town centre", "town center"}) {
    add(p, Slot::kArea, "centre");
  }
  for (const char* p : {"inexpensive", "cheaply"}) add(p, Slot::kPriceRange, "cheap");
  for (const char* p : {"moderately priced", "moderately", "reasonably priced"}) {
    add(p, Slot::kPriceRange, "moderate");
  }
  for (const char* p : {"upscale", "pricey", "upmarket", "high end"}) {
    add(p, Slot::kPriceRange, "expensive");
  }
  for (auto d : kDays) add(d, Slot::kDay, std::string(d));
  std::stable_sort(phrases_.begin(), phrases_.end(), [](const Phrase& a, const Phrase& b) {
    return a.tokens.size() > b.tokens.size();
  });
}

Tokens Delexicalizer::apply(const Tokens& tokens, const SlotMap& known, SlotMap* replaced) const {
  static const std::regex kTime(R"(\d{1,2}:\d{2})");
  std::vector<Phrase> extra;
  for (const auto& [slot, value] : known) {
    Tokens t = tokenize(value);
    if (!t.empty() && value != kDontCare) extra.push_back({std::move(t), slot, value});
  }
  std::stable_sort(extra.begin(), extra.end(), [](const Phrase& a, const Phrase& b) {
    return a.tokens.size() > b.tokens.size();
  });
  auto match_at = [&](const std::vector<Phrase>& list, std::size_t i) -> const Phrase* {
    for (const auto& p : list) {
      if (p.tokens.size() > tokens.size() - i) continue;
      if (std::equal(p.tokens.begin(), p.tokens.end(), tokens.begin() + static_cast<long>(i))) {
        return &p;
      }
    }
    return nullptr;
  };
  Tokens out;
  for (std::size_t i = 0; i < tokens.size();) {
    const Phrase* a = match_at(extra, i);
    const Phrase* b = match_at(phrases_, i);
    const Phrase* hit = a;
    if (!hit || (b && b->tokens.size() > a->tokens.size())) hit = b;
    if (hit) {
      out.push_back(placeholder(hit->slot));
      if (replaced) replaced->emplace(hit->slot, hit->value);
      i += hit->tokens.size();
    } else if (std::regex_match(tokens[i], kTime)) {
      out.push_back(placeholder(Slot::kTime));
      if (replaced) replaced->emplace(Slot::kTime, tokens[i]);
      ++i;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

Tokens delexicalize(const Tokens& utterance, const RestaurantDB& db) {
  return Delexicalizer(db).apply(utterance);
}

}  // namespace usersim::corpus
