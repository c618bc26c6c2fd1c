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

// The system side of a dialog: pattern NLU, state tracking, action masks,
// the hand-written Rule-System policy, the database backend that turns an
// action choice into a concrete SystemAct, and system NLG.

#ifndef USERSIM_DIALOG_SYSTEM_H_
#define USERSIM_DIALOG_SYSTEM_H_

#include <array>
#include <string>
#include <string_view>

#include "usersim/annotator.h"
#include "usersim/domain.h"
#include "usersim/nlg.h"
#include "usersim/restaurant_db.h"
#include "usersim/text.h"

namespace usersim::sys {

struct NluResult {
  UserAct act;
  double confidence = 1.0;  // 1 for a rule match, 0 for the fallback
};

// Regex annotation plus gazetteer slot spotting. With noise p > 0 the act
// kind is replaced, with probability p, by a uniformly drawn other kind
// (slots filtered to what the new kind may carry).
class Nlu {
 public:
  explicit Nlu(const RestaurantDB& db, double noise = 0.0);
  NluResult parse(std::string_view utterance, Rng* rng = nullptr) const;
  double noise() const { return noise_; }

 private:
  corpus::Annotator annotator_;
  double noise_;
};

// Merges an NLU result into the state and advances the turn counter.
DialogState track(const DialogState& state, const NluResult& nlu);

// Bookkeeping after the system acted: presented restaurant, provided
// requestables, search and reservation outcome.
DialogState apply_system_act(const DialogState& state, const SystemAct& act,
                             const RestaurantDB& db);

using ActionMask = std::array<bool, kNumSystemActs>;

ActionMask mask(const DialogState& state);
inline bool allowed(const ActionMask& m, SystemActKind k) { return m[index_of(k)]; }

SystemActKind rule_policy(const DialogState& state);

struct BackendConfig {
  // Share of (restaurant, day, time) combinations that are fully booked.
  double booking_failure_rate = 0.15;
};

// 8 lowercase hex characters derived from (goal id, restaurant name).
std::string reservation_reference(std::string_view goal_id, std::string_view restaurant);
bool booking_available(std::string_view restaurant, std::string_view day, std::string_view time,
                       const BackendConfig& config);

// Fills the slots of the chosen action from the state and the database.
SystemAct execute_action(SystemActKind kind, const DialogState& state, const RestaurantDB& db,
                         std::string_view goal_id, const BackendConfig& config = {});

std::string render_system(const SystemAct& act, const DialogState& state,
                          const nlg::TemplateBank& bank, Rng& rng);

}  // namespace usersim::sys

#endif  // USERSIM_DIALOG_SYSTEM_H_
