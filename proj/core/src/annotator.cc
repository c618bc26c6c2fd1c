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

#include "usersim/annotator.h"

#include <algorithm>
#include <set>

namespace usersim::corpus {

namespace {

constexpr auto kFlags = std::regex::ECMAScript | std::regex::optimize;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string alternation(const std::vector<std::string>& values) {
  std::vector<std::string> sorted = values;
  // longer alternatives first so ECMAScript alternation prefers them
  std::sort(sorted.begin(), sorted.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  std::string out = "(?:";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) out += "|";
    out += escape(sorted[i]);
  }
  return out + ")";
}

const std::map<std::string, int> kNumberWords = {
    {"one", 1}, {"two", 2}, {"three", 3}, {"four", 4}, {"five", 5},
    {"six", 6}, {"seven", 7}, {"eight", 8}, {"nine", 9}, {"ten", 10}};

}  // namespace

std::vector<AnnotationRule> default_rules(const RestaurantDB& db) {
  const std::string kTime = R"(\b\d{1,2}:\d{2}\b)";
  std::vector<std::string> values;
  for (Slot s : {Slot::kFood, Slot::kName}) {
    for (auto& v : db.values(s)) values.push_back(v);
  }
  std::vector<AnnotationRule> rules;
  rules.push_back({UserActKind::kGoodbye,
                   {R"(\b(?:good ?bye|bye)\b)",
                    R"(\b(?:that's|that is|that will be|that'll be|that was) (?:all|everything|it)\b)",
                    R"(\bnothing else\b)",
                    R"(\bhave a (?:good|nice|great|lovely|wonderful) (?:day|night|evening|one)\b)",
                    R"(^(?:(?:ok|okay|great|perfect|no|cheers|awesome|wonderful|alright) [,.!] )*)"
                    R"((?:thanks|thank you|cheers|many thanks)(?: (?:so|very) much| a lot)?)"
                    R"((?: for (?:your|the|all the|all your) help)?(?: [.!])*$)"},
                   70});
  rules.push_back({UserActKind::kReservationChangeTime,
                   {R"(\b(?:how about|what about|instead|try|change|then|rather)\b.*)" + kTime,
                    kTime + R"(.*\b(?:instead|then|available|rather)\b)",
                    R"(\b(?:another|different|other|earlier|later) time\b)"},
                   60});
  rules.push_back({UserActKind::kMakeReservation,
                   {R"(\b(?:book|booking|reserve|reservation|reserved)\b)",
                    R"(\btable for\b)",
                    R"(\b\d+ (?:people|persons|person|guests|of us)\b)",
                    R"(\b(?:one|two|three|four|five|six|seven|eight|nine|ten) (?:people|persons|guests|of us)\b)",
                    R"(\b(?:party|group) of\b)",
                    R"(\b(?:monday|tuesday|wednesday|thursday|friday|saturday|sunday)\b)",
                    kTime},
                   50});
  rules.push_back({UserActKind::kInformTypeChange,
                   {R"(\b(?:how about|what about|instead|rather|alternatively)\b)",
                    R"(\b(?:change|switch) (?:it |that |this )?to\b)",
                    R"(\bin that case\b)",
                    R"(\blet's try\b)"},
                   40});
  rules.push_back({UserActKind::kAnythingElse,
                   {R"(\b(?:anything|something) else\b)",
                    R"(\bwhat else\b)",
                    R"(\b(?:any|some) other\b)",
                    R"(\bother (?:options|restaurants|places|suggestions|ones|choices|recommendations)\b)",
                    R"(\banother (?:one|restaurant|place|option|suggestion|recommendation|choice)\b)",
                    R"(\bdifferent (?:one|restaurant|place|option|suggestion|recommendation)\b)",
                    R"(\belse available\b)"},
                   30});
  rules.push_back({UserActKind::kRequestInfo,
                   {R"(\b(?:address|phone|telephone|postcode|zip|reference|ref|located)\b)",
                    R"(\bpost(?:al)? code\b)",
                    R"(\bwhere is (?:it|that|this)\b)"},
                   20});
  rules.push_back({UserActKind::kInformType,
                   {R"(\b(?:restaurant|restaurants|food|place|places|cuisine|eat|dinner|lunch|area|town|)"
                    R"(price|priced|cheap|expensive|moderate|moderately|budget|inexpensive|upscale|)"
                    R"(pricey|centre|center|north|south|east|west|prefer|preference|called|named|looking)\b)",
                    "\\b" + alternation(values) + "\\b"},
                   10});
  return rules;
}

SlotSpotter::SlotSpotter(const RestaurantDB& db)
    : time_re_(R"(\b(\d{1,2}):(\d{2})\b)", kFlags),
      day_re_(R"(\b(monday|tuesday|wednesday|thursday|friday|saturday|sunday)\b)", kFlags),
      people_re_(R"((?:\b(\d+) (?:people|persons|person|guests|of us|pax)\b)|)"
                 R"((?:\b(?:table|reservation|booking|book it|book|reserve it|reserve|party|group) )"
                 R"((?:for|of) (\d+)(?![\d:]))|(?:\bfor (\d+)(?![\d:]))|)"
                 R"((?:\b(one|two|three|four|five|six|seven|eight|nine|ten) (?:people|persons|guests|of us)\b))",
                 kFlags),
      dontcare_re_(R"(\b(?:don't care|do not care|doesn't matter|does not matter|no preference|)"
                   R"(any|don't mind|do not mind|whatever|not fussy|either way)\b)",
                   kFlags) {
  auto add = [&](std::string_view phrase, Slot slot, std::string value) {
    Tokens t = tokenize(phrase);
    if (!t.empty()) phrases_.push_back({std::move(t), slot, std::move(value)});
  };
  for (Slot s : {Slot::kName, Slot::kFood, Slot::kArea, Slot::kPriceRange}) {
    for (const auto& v : db.values(s)) {
      add(v, s, v);
      if (s == Slot::kName) {
        if (v.rfind("the ", 0) == 0) add(v.substr(4), s, v);
        const std::string suffix = " restaurant";
        if (v.size() > suffix.size() && v.compare(v.size() - suffix.size(), suffix.size(), suffix) == 0) {
          add(v.substr(0, v.size() - suffix.size()), s, v);
        }
      }
    }
  }
  for (const char* p : {"center", "city centre", "city center", "town centre", "town center"}) {
    add(p, Slot::kArea, "centre");
  }
  for (const char* p : {"inexpensive", "budget", "cheaply", "low cost"}) add(p, Slot::kPriceRange, "cheap");
  for (const char* p : {"moderately", "moderately priced", "mid-priced", "mid priced", "reasonably priced"}) {
    add(p, Slot::kPriceRange, "moderate");
  }
  for (const char* p : {"upscale", "pricey", "upmarket", "high end", "high-end", "fancy"}) {
    add(p, Slot::kPriceRange, "expensive");
  }
  std::stable_sort(phrases_.begin(), phrases_.end(), [](const Phrase& a, const Phrase& b) {
    return a.tokens.size() > b.tokens.size();
  });
  request_res_ = {
      {Slot::kAddress, std::regex(R"(\b(?:address|located|where is (?:it|that|this))\b)", kFlags)},
      {Slot::kPhone, std::regex(R"(\b(?:phone|telephone)\b)", kFlags)},
      {Slot::kPostcode, std::regex(R"(\b(?:postcode|post code|postal code|zip code|zip)\b)", kFlags)},
      {Slot::kReference, std::regex(R"(\b(?:reference|ref)\b)", kFlags)},
  };
  dontcare_slot_res_ = {
      {Slot::kFood, std::regex(R"(\b(?:food|cuisine|type of food|kind of food)\b)", kFlags)},
      {Slot::kArea, std::regex(R"(\b(?:area|location|part of town|side of town|where)\b)", kFlags)},
      {Slot::kPriceRange, std::regex(R"(\b(?:price|prices|price range|pricerange|cost)\b)", kFlags)},
  };
}

SlotMap SlotSpotter::spot(const Tokens& tokens) const {
  SlotMap out;
  for (std::size_t i = 0; i < tokens.size();) {
    const Phrase* hit = nullptr;
    for (const auto& p : phrases_) {
      if (p.tokens.size() > tokens.size() - i) continue;
      if (std::equal(p.tokens.begin(), p.tokens.end(), tokens.begin() + static_cast<long>(i))) {
        hit = &p;
        break;
      }
    }
    if (hit) {
      out.emplace(hit->slot, hit->value);  // first mention wins
      i += hit->tokens.size();
    } else {
      ++i;
    }
  }
  const std::string text = join(tokens);
  if (std::regex_search(text, dontcare_re_)) {
    for (const auto& [slot, re] : dontcare_slot_res_) {
      if (!out.count(slot) && std::regex_search(text, re)) out[slot] = std::string(kDontCare);
    }
  }
  for (const auto& [slot, re] : request_res_) {
    if (std::regex_search(text, re)) out[slot] = "";
  }
  std::smatch m;
  if (std::regex_search(text, m, time_re_)) {
    out[Slot::kTime] = std::to_string(std::stoi(m[1].str())) + ":" + m[2].str();
  }
  if (std::regex_search(text, m, day_re_)) out[Slot::kDay] = m[1].str();
  if (std::regex_search(text, m, people_re_)) {
    for (int g = 1; g <= 3; ++g) {
      if (m[g].matched) {
        out[Slot::kPeople] = std::to_string(std::stoi(m[g].str()));
        break;
      }
    }
    if (m[4].matched) out[Slot::kPeople] = std::to_string(kNumberWords.at(m[4].str()));
  }
  return out;
}

Annotator::Annotator(std::vector<AnnotationRule> rules, const RestaurantDB& db)
    : rules_(std::move(rules)), spotter_(db) {
  std::set<int> priorities;
  std::set<UserActKind> covered;
  for (const auto& r : rules_) {
    if (!priorities.insert(r.priority).second) {
      throw DomainError("annotation rule priorities must be unique");
    }
    if (r.patterns.empty()) throw DomainError("annotation rule without patterns");
    Compiled c{r.act, r.priority, {}};
    for (const auto& p : r.patterns) {
      try {
        c.patterns.emplace_back(p, kFlags);
      } catch (const std::regex_error& e) {
        throw DomainError("bad annotation pattern '" + p + "': " + e.what());
      }
    }
    covered.insert(r.act);
    compiled_.push_back(std::move(c));
  }
  if (covered.size() != kAllUserActs.size()) {
    throw DomainError("every user act needs at least one annotation rule");
  }
  std::sort(compiled_.begin(), compiled_.end(),
            [](const Compiled& a, const Compiled& b) { return a.priority > b.priority; });
}

UserActKind Annotator::classify(const std::string& text, bool* matched, int* priority) const {
  for (const auto& c : compiled_) {
    for (const auto& re : c.patterns) {
      if (std::regex_search(text, re)) {
        if (matched) *matched = true;
        if (priority) *priority = c.priority;
        return c.act;
      }
    }
  }
  if (matched) *matched = false;
  if (priority) *priority = 0;
  return UserActKind::kInformType;
}

Annotation Annotator::annotate(std::string_view utterance) const {
  Tokens tokens = tokenize(utterance);
  std::string text = join(tokens);
  Annotation a;
  UserActKind kind = classify(text, &a.matched, &a.priority);
  SlotMap slots = a.matched ? filter_slots(kind, spotter_.spot(tokens)) : SlotMap{};
  a.act = UserAct::make(kind, std::move(slots));
  return a;
}

SlotMap filter_slots(UserActKind kind, const SlotMap& slots) {
  SlotMap out;
  for (const auto& [slot, value] : slots) {
    if (!slot_allowed(kind, slot)) continue;
    // requestables carry no value; informables and booking slots need one
    if (category(slot) == SlotCategory::kRequestable) {
      out[slot] = "";
    } else if (!value.empty()) {
      out[slot] = value;
    }
  }
  return out;
}

}  // namespace usersim::corpus
