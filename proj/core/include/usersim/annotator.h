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

// Regular-expression user dialog act annotation and slot spotting.
//
// Rules are matched against the canonical token form of an utterance
// (lowercased, punctuation split off, single spaces). The highest-priority
// rule with a matching pattern decides the act; slots are then spotted with
// a gazetteer built from the restaurant database and filtered down to the
// categories the act may carry.

#ifndef USERSIM_ANNOTATOR_H_
#define USERSIM_ANNOTATOR_H_

#include <map>
#include <regex>
#include <string>
#include <vector>

#include "usersim/domain.h"
#include "usersim/restaurant_db.h"
#include "usersim/text.h"

namespace usersim::corpus {

struct AnnotationRule {
  UserActKind act;
  std::vector<std::string> patterns;  // ECMAScript regular expressions
  int priority;                       // higher wins; unique across rules
};

// The reconstructed rule set. Priorities, high to low: Goodbye,
// ReservationChangeTime, MakeReservation, InformTypeChange, AnythingElse,
// RequestInfo, InformType. Value alternations come from `db`.
std::vector<AnnotationRule> default_rules(const RestaurantDB& db);

// Finds slot values in an utterance: informables by longest-match gazetteer
// lookup (with a small synonym table), "no preference" statements,
// requestable mentions and booking details.
class SlotSpotter {
 public:
  explicit SlotSpotter(const RestaurantDB& db);

  SlotMap spot(const Tokens& tokens) const;
  SlotMap spot(std::string_view utterance) const { return spot(tokenize(utterance)); }

 private:
  struct Phrase {
    Tokens tokens;
    Slot slot;
    std::string value;
  };
  std::vector<Phrase> phrases_;  // longest first
  std::regex time_re_, day_re_, people_re_, dontcare_re_;
  std::vector<std::pair<Slot, std::regex>> request_res_;
  std::vector<std::pair<Slot, std::regex>> dontcare_slot_res_;
};

struct Annotation {
  UserAct act;
  bool matched = false;  // false when the InformType fallback was used
  int priority = 0;
};

class Annotator {
 public:
  // Throws DomainError when a rule is malformed, priorities collide or an
  // act kind has no rule.
  Annotator(std::vector<AnnotationRule> rules, const RestaurantDB& db);
  explicit Annotator(const RestaurantDB& db) : Annotator(default_rules(db), db) {}

  Annotation annotate(std::string_view utterance) const;
  UserActKind classify(const std::string& canonical_text, bool* matched = nullptr,
                       int* priority = nullptr) const;
  const SlotSpotter& spotter() const { return spotter_; }
  const std::vector<AnnotationRule>& rules() const { return rules_; }

 private:
  struct Compiled {
    UserActKind act;
    int priority;
    std::vector<std::regex> patterns;
  };
  std::vector<AnnotationRule> rules_;
  std::vector<Compiled> compiled_;  // sorted by priority, high first
  SlotSpotter spotter_;
};

// Keeps only the slots `kind` may carry.
SlotMap filter_slots(UserActKind kind, const SlotMap& slots);

struct AnnotationReport {
  int user_turns = 0;
  int matched = 0;
  std::map<UserActKind, int> per_act;
  double match_rate() const { return user_turns ? double(matched) / user_turns : 0.0; }
};

}  // namespace usersim::corpus

#endif  // USERSIM_ANNOTATOR_H_
