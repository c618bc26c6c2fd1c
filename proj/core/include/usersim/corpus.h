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

#ifndef USERSIM_CORPUS_H_
#define USERSIM_CORPUS_H_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "usersim/annotator.h"
#include "usersim/domain.h"
#include "usersim/restaurant_db.h"
#include "usersim/serialization.h"
#include "usersim/text.h"

namespace usersim::corpus {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

class EmptyCorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads a MultiWOZ-format data file (object of dialog id -> {goal, log})
// and keeps the dialogs whose goal involves the restaurant domain. User
// turns come back unannotated; system turns carry their native acts mapped
// to a SystemAct and to the five coarse categories (inform, request,
// book_inform, select, recommend). Goals are converted leniently and may
// fail Goal::validate() when the source goal has no usable subtask.
std::vector<Dialog> load_corpus(const std::filesystem::path& path);
std::vector<Dialog> parse_corpus(const std::string& json_text);

// Maps MultiWOZ dialog_act entries ({"Restaurant-Inform": [[slot, value]]})
// onto the system action space; nullopt when nothing restaurant related.
struct NativeActs {
  std::optional<SystemAct> act;
  std::vector<std::string> categories;
};
NativeActs map_native_acts(const Json& dialog_act);

std::pair<std::vector<Dialog>, AnnotationReport> annotate_user_acts(
    std::vector<Dialog> dialogs, const Annotator& annotator);

struct GoalDB {
  std::vector<Goal> goals;
  std::map<Subtask, int> subtask_counts;
  double pre_balance_reservation_share = 0.0;
  double post_balance_reservation_share = 0.0;
  int augmented = 0;

  // share of MakeReservation among all subtask occurrences
  double reservation_share() const;
  bool empty() const { return goals.empty(); }
};

// Extracts the valid goals and balances them. Throws InsufficientDataError
// below 10 distinct goals.
GoalDB build_goal_db(const std::vector<Dialog>& dialogs, std::uint64_t seed);

// Duplicates goals of the minority subtask until the two subtasks are even.
// Reservation copies drop their requestables and get freshly sampled
// booking values (times drawn from those already in the db).
GoalDB balance_goals(GoalDB db, std::uint64_t seed);
GoalDB make_goal_db(std::vector<Goal> goals);

// Uniform draw; throws std::invalid_argument on an empty db.
const Goal& sample_goal(const GoalDB& db, Rng& rng);

// Replaces database values (restaurant fields and informable values with
// their common synonyms), weekdays, clock times and any `known` slot values
// by `<slot>` placeholders. Longest match first; idempotent.
class Delexicalizer {
 public:
  explicit Delexicalizer(const RestaurantDB& db);

  Tokens apply(const Tokens& tokens, const SlotMap& known = {},
               SlotMap* replaced = nullptr) const;

 private:
  struct Phrase {
    Tokens tokens;
    Slot slot;
    std::string value;
  };
  std::vector<Phrase> phrases_;
};

Tokens delexicalize(const Tokens& utterance, const RestaurantDB& db);

// Placeholder token for a slot, e.g. "<food>".
std::string placeholder(Slot slot);
std::optional<Slot> placeholder_slot(std::string_view token);

}  // namespace usersim::corpus

#endif  // USERSIM_CORPUS_H_
