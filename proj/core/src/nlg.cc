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

#include "usersim/nlg.h"

#include <set>
#include <sstream>

#include "usersim/corpus.h"
#include "usersim/serialization.h"

namespace usersim::nlg {

namespace {

bool is_value(const std::string& v) { return !v.empty() && v != kDontCare; }

std::vector<Slot> empty_slots(const SlotMap& slots) {
  std::vector<Slot> out;
  for (const auto& [s, v] : slots) {
    if (v.empty()) out.push_back(s);
  }
  return out;
}

std::vector<Slot> dontcare_slots(const SlotMap& slots) {
  std::vector<Slot> out;
  for (const auto& [s, v] : slots) {
    if (v == kDontCare) out.push_back(s);
  }
  return out;
}

bool is_placeholder_token(std::string_view t) {
  return t.size() > 2 && t.front() == '<' && t.back() == '>';
}

// Slots of `remaining` a template conveys, or nullopt if it is not fillable.
std::optional<std::set<Slot>> coverage(const Tokens& tmpl, const SlotMap& remaining,
                                       const SlotMap& all, const Restaurant* presented) {
  std::set<Slot> covered;
  for (const auto& t : tmpl) {
    if (!is_placeholder_token(t)) continue;
    if (t == kSlotList || t == kDontCareList) {
      auto list = t == kSlotList ? empty_slots(remaining) : dontcare_slots(remaining);
      if (list.empty()) return std::nullopt;
      covered.insert(list.begin(), list.end());
      continue;
    }
    auto slot = corpus::placeholder_slot(t);
    if (!slot) return std::nullopt;
    if (auto it = remaining.find(*slot); it != remaining.end() && is_value(it->second)) {
      covered.insert(*slot);
    } else if (auto a = all.find(*slot); a != all.end() && is_value(a->second)) {
      // conveyed already; repeating it is harmless
    } else if (!presented || presented->value(*slot).empty()) {
      return std::nullopt;
    }
  }
  return covered;
}

std::string fill(const Tokens& tmpl, const SlotMap& lists, const SlotMap& values,
                 const Restaurant* presented) {
  Tokens out;
  for (const auto& t : tmpl) {
    if (!is_placeholder_token(t)) {
      out.push_back(t);
      continue;
    }
    if (t == kSlotList || t == kDontCareList) {
      auto list = t == kSlotList ? empty_slots(lists) : dontcare_slots(lists);
      if (list.empty()) throw NlgError("nothing to fill " + t);
      for (auto& w : tokenize(slot_list_words(list))) out.push_back(std::move(w));
      continue;
    }
    auto slot = corpus::placeholder_slot(t);
    if (!slot) throw NlgError("unknown placeholder " + t);
    std::string value;
    if (auto it = values.find(*slot); it != values.end() && is_value(it->second)) {
      value = it->second;
    } else if (presented) {
      value = presented->value(*slot);
    }
    if (value.empty()) throw NlgError("unresolvable placeholder " + t);
    for (auto& w : tokenize(value)) out.push_back(std::move(w));
  }
  return join(out);
}

struct Choice {
  std::vector<const std::string*> templates;
  std::vector<std::set<Slot>> covered;  // per template, all of equal size
  std::size_t size() const { return covered.empty() ? 0 : covered.front().size(); }
};

Choice best_templates(const TemplateBank& bank, std::string_view key, const SlotMap& remaining,
                      const SlotMap& all, const Restaurant* presented) {
  Choice best;
  bool any = false;
  for (const auto& text : bank.templates(key)) {
    auto cov = coverage(tokenize(text), remaining, all, presented);
    if (!cov) continue;
    if (!any || cov->size() > best.size()) {
      best.templates.clear();
      best.covered.clear();
      any = true;
    }
    if (best.covered.empty() || cov->size() == best.size()) {
      best.templates.push_back(&text);
      best.covered.push_back(*cov);
    }
  }
  return best;
}

}  // namespace

std::string template_key(const UserAct& act) { return std::string(act_name(act.kind)); }

std::string template_key(const SystemAct& act) {
  std::string key(act_name(act.kind));
  if (act.failed) key += "_failed";
  return key;
}

TemplateBank TemplateBank::parse(std::string_view tsv) {
  TemplateBank bank;
  std::istringstream in{std::string(tsv)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw NlgError("template line " + std::to_string(n) + " has no tab");
    }
    bank.add(line.substr(0, tab), std::string_view(line).substr(tab + 1));
  }
  return bank;
}

TemplateBank TemplateBank::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

void TemplateBank::add(const std::string& key, std::string_view text) {
  std::string c = canonical(text);
  if (key.empty() || c.empty()) throw NlgError("empty template key or text");
  bank_[key].push_back(std::move(c));
}

bool TemplateBank::contains(std::string_view key) const { return bank_.find(key) != bank_.end(); }

const std::vector<std::string>& TemplateBank::templates(std::string_view key) const {
  auto it = bank_.find(key);
  if (it == bank_.end()) throw NlgError("no templates for '" + std::string(key) + "'");
  return it->second;
}

std::vector<std::string> TemplateBank::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : bank_) out.push_back(k);
  return out;
}

std::size_t TemplateBank::size() const {
  std::size_t n = 0;
  for (const auto& [k, v] : bank_) n += v.size();
  return n;
}

void TemplateBank::validate(const std::vector<std::string>& required, std::size_t min) const {
  for (const auto& key : required) {
    if (!contains(key) || templates(key).size() < min) {
      throw NlgError("template bank needs at least " + std::to_string(min) + " templates for '" +
                     key + "'");
    }
  }
  for (const auto& [key, list] : bank_) {
    for (const auto& text : list) {
      for (const auto& t : tokenize(text)) {
        if (is_placeholder_token(t) && t != kSlotList && t != kDontCareList &&
            !corpus::placeholder_slot(t)) {
          throw NlgError("unknown placeholder " + t + " in '" + text + "'");
        }
      }
    }
  }
}

std::string slot_list_words(const std::vector<Slot>& slots) {
  std::string out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i > 0) out += i + 1 == slots.size() ? " and " : " , ";
    out += slot_words(slots[i]);
  }
  return out;
}

std::vector<std::string> candidate_templates(const TemplateBank& bank, std::string_view key,
                                             const SlotMap& slots, const Restaurant* presented) {
  std::vector<std::string> out;
  for (const auto* t : best_templates(bank, key, slots, slots, presented).templates) {
    out.push_back(*t);
  }
  return out;
}

std::string render_template(const TemplateBank& bank, std::string_view key, const SlotMap& slots,
                            Rng& rng, const Restaurant* presented) {
  SlotMap remaining = slots;
  std::string out;
  bool first = true;
  while (first || !remaining.empty()) {
    Choice c = best_templates(bank, key, remaining, slots, presented);
    if (c.templates.empty() || (!first && c.size() == 0)) {
      throw NlgError("no fillable template for '" + std::string(key) + "'");
    }
    const std::size_t pick = uniform_index(rng, c.templates.size());
    const std::set<Slot>& covered = c.covered[pick];
    SlotMap lists;
    for (Slot s : covered) lists[s] = remaining.at(s);
    if (!out.empty()) out += ' ';
    out += fill(tokenize(*c.templates[pick]), lists, slots, presented);
    for (Slot s : covered) remaining.erase(s);
    first = false;
    if (covered.empty()) break;
  }
  return out;
}

std::string lexicalize(std::string_view delexicalized, const SlotMap& slots,
                       const Restaurant* presented) {
  return fill(tokenize(delexicalized), slots, slots, presented);
}

}  // namespace usersim::nlg
