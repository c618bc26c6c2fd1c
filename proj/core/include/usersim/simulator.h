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

// User simulators. Three dialog managers (agenda stack, supervised next-act
// model over a belief span, act-free context retrieval) combined with the
// user NLG strategies give the six simulator variants.

#ifndef USERSIM_SIMULATOR_H_
#define USERSIM_SIMULATOR_H_

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usersim/annotator.h"
#include "usersim/corpus.h"
#include "usersim/domain.h"
#include "usersim/serialization.h"
#include "usersim/tfidf.h"
#include "usersim/user_nlg.h"

namespace usersim::sim {

class SimulatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One step forward of a "hh:mm" time, wrapping at midnight.
std::string shift_time(std::string_view time, int hours);

// ---------------------------------------------------------------------------
// Agenda dialog manager.

struct AgendaConfig {
  double p_else = 0.2;    // AnythingElse after a matching result
  int min_inform = 1;     // slots per InformType turn, drawn uniformly
  int max_inform = 3;
  int min_request = 1;    // requestables per RequestInfo turn
  int max_request = 3;

  void validate() const;
};

struct AgendaItem {
  UserActKind kind = UserActKind::kGoodbye;
  SlotMap slots;
  bool operator==(const AgendaItem&) const = default;
};

struct Agenda {
  Goal goal;
  std::vector<AgendaItem> stack;  // back() is the top
  SlotMap memory;                 // informables conveyed so far (after relaxation)
  std::optional<Slot> last_informed;
  std::set<Slot> outstanding;     // requested, not yet answered
  std::optional<std::string> time;  // booking time currently wanted
  bool booking_informed = false;
  bool booking_confirmed = false;
  bool asked_else = false;
  bool done = false;
  int turns = 0;

  bool operator==(const Agenda&) const = default;
};

Agenda agenda_init(const Goal& goal, Rng& rng);

// One user move in reply to `system` (nullopt for the opening turn).
UserAct agenda_next(Agenda& agenda, const std::optional<SystemAct>& system, Rng& rng,
                    const AgendaConfig& config = {});

// ---------------------------------------------------------------------------
// Belief span and supervised act model.

struct BeliefSpan {
  SlotMap inform;          // values stated by the user, requestables answered by the system
  SlotMap offer;           // informable values of the entity the system offered
  std::set<Slot> request;  // open requests
  Booking book;

  bool operator==(const BeliefSpan&) const = default;
};

BeliefSpan belief_update(const BeliefSpan& prev, std::string_view prev_user_utterance,
                         const std::optional<SystemAct>& system,
                         const corpus::SlotSpotter& spotter);

inline constexpr int kNumActFeatures = 18;
using ActFeatures = std::array<double, kNumActFeatures>;

// Previous system act one-hot (6 + none), failure flag, goal progress
// flags read against the belief span, bias.
ActFeatures act_features(const BeliefSpan& belief, const Goal& goal,
                         const std::optional<SystemAct>& system);
std::vector<std::string> act_feature_names();

struct ActExample {
  ActFeatures x;
  UserActKind y;
};

// Replays annotated corpus dialogs through belief_update.
std::vector<ActExample> act_examples(const std::vector<Dialog>& annotated,
                                     const corpus::SlotSpotter& spotter);

struct ActModelConfig {
  double step = 0.2;
  int epochs = 2000;
};

class ActModel {
 public:
  ActModel();

  std::array<double, kNumUserActs> scores(const ActFeatures& x) const;
  std::array<double, kNumUserActs> distribution(const ActFeatures& x) const;
  double loss(const std::vector<ActExample>& data) const;
  double accuracy(const std::vector<ActExample>& data) const;

  // Full-batch gradient descent on mean cross-entropy. Returns the loss
  // before each epoch and after the last.
  std::vector<double> fit(const std::vector<ActExample>& data, const ActModelConfig& config = {});

  Json to_json() const;
  static ActModel from_json(const Json& j);
  void save(const std::filesystem::path& path) const;
  static ActModel load(const std::filesystem::path& path);

  std::vector<double>& weights() { return w_; }
  const std::vector<double>& weights() const { return w_; }

 private:
  std::vector<double> w_;  // kNumUserActs x kNumActFeatures, row-major
};

// Throws corpus::InsufficientDataError below 100 examples or with a single
// act class.
ActModel sl_train(const std::vector<ActExample>& data, const ActModelConfig& config = {},
                  std::vector<double>* losses = nullptr);

// Acts consistent with the goal and the conversation so far.
std::array<bool, kNumUserActs> goal_mask(const BeliefSpan& belief, const Goal& goal,
                                         const std::optional<SystemAct>& system);

UserAct sl_next(const ActModel& model, const BeliefSpan& belief, const Goal& goal,
                const std::optional<SystemAct>& system, Rng& rng);

// ---------------------------------------------------------------------------
// End-to-end stand-in: retrieval over corpus user turns with a context of
// utterances plus goal and progress pseudo-tokens.

// Pseudo-tokens such as "#need_phone" or "#booked", each repeated
// kGoalTokenWeight times so the goal outweighs the surface words.
inline constexpr int kGoalTokenWeight = 4;
Tokens goal_tokens(const Goal& goal, const BeliefSpan& belief);

struct SleIndex {
  nlg::TfIdfIndex index;            // key unused, utterances delexicalized
  std::vector<UserActKind> acts;    // corpus act of each candidate
};

SleIndex build_sle_index(const std::vector<Dialog>& annotated, const corpus::Delexicalizer& delex,
                         const corpus::SlotSpotter& spotter);

// The best-ranked candidate that lexicalizes against the goal. Throws
// SimulatorError on an empty index.
std::string sle_respond(const Tokens& context, const Goal& goal, const BeliefSpan& belief,
                        const SleIndex& index);

// ---------------------------------------------------------------------------
// Simulator interface and the six variants.

struct SimTurn {
  std::string utterance;
  std::optional<UserAct> act;  // none for the act-free simulator
  bool done = false;
};

class UserSimulator {
 public:
  virtual ~UserSimulator() = default;
  virtual void reset(const Goal& goal, std::uint64_t seed) = 0;
  // `system` is nullopt for the first, user-initiated turn.
  virtual SimTurn respond(const std::optional<SystemAct>& system,
                          std::string_view system_utterance) = 0;
  virtual std::string_view id() const = 0;
  virtual const nlg::NlgStats* nlg_stats() const { return nullptr; }
};

struct SimulatorResources {
  std::shared_ptr<const RestaurantDB> db;
  std::shared_ptr<const corpus::Annotator> annotator;
  std::shared_ptr<const corpus::Delexicalizer> delex;
  std::shared_ptr<const nlg::TemplateBank> user_bank;
  std::shared_ptr<const nlg::TfIdfIndex> user_index;
  std::shared_ptr<const nlg::CondNgramLM> user_lm;
  std::shared_ptr<const ActModel> act_model;
  std::shared_ptr<const SleIndex> sle_index;
  AgendaConfig agenda;
};

inline constexpr std::array<std::string_view, 6> kSimulatorIds = {"agen-t", "agen-r", "agen-g",
                                                                  "sl-t",   "sl-r",   "sl-e"};
bool is_simulator_id(std::string_view id);

// Throws SimulatorError for an unknown id or a missing resource.
std::unique_ptr<UserSimulator> make_simulator(std::string_view id,
                                              const SimulatorResources& resources);

}  // namespace usersim::sim

#endif  // USERSIM_SIMULATOR_H_
