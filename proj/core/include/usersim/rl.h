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

// REINFORCE training of the system act-selection policy against a user
// simulator, and the episode loop shared by training and evaluation.

#ifndef USERSIM_RL_H_
#define USERSIM_RL_H_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "usersim/corpus.h"
#include "usersim/dialog_system.h"
#include "usersim/serialization.h"
#include "usersim/simulator.h"

namespace usersim::rl {

class RlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using RlState = std::vector<double>;

// Dialog-state flags followed by word counts of the user utterance.
class FeatureSpace {
 public:
  static constexpr int kNumFlags = 35;

  FeatureSpace() = default;
  explicit FeatureSpace(std::vector<std::string> vocab);
  // Vocabulary of the user side: corpus user turns and user templates.
  static FeatureSpace from_corpus(const std::vector<Dialog>& dialogs,
                                  const nlg::TemplateBank& user_bank);

  RlState featurize(const DialogState& state, std::string_view user_utterance) const;
  int dim() const { return kNumFlags + static_cast<int>(vocab_.size()); }
  const std::vector<std::string>& vocab() const { return vocab_; }
  static std::vector<std::string> flag_names();

 private:
  std::vector<std::string> vocab_;
  std::map<std::string, int, std::less<>> index_;
};

double step_reward(Outcome outcome_at_turn);
std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma = 0.9);

enum class PolicyKind { kLinear, kMlp };

// Softmax policy over the 6 system acts: linear, or one tanh hidden layer.
class Policy {
 public:
  Policy() = default;
  Policy(PolicyKind kind, int input_dim, int hidden = 32, std::uint64_t seed = 0);

  std::array<double, kNumSystemActs> scores(const RlState& x) const;
  // Masked softmax; masked actions get probability exactly 0.
  std::array<double, kNumSystemActs> probabilities(const RlState& x,
                                                   const sys::ActionMask& mask) const;
  double log_prob(const RlState& x, const sys::ActionMask& mask, SystemActKind a) const;
  // Adds scale * d log pi(a|x) / d params into `grad`.
  void accumulate_grad(const RlState& x, const sys::ActionMask& mask, SystemActKind a,
                       double scale, std::vector<double>& grad) const;

  PolicyKind kind() const { return kind_; }
  int input_dim() const { return in_; }
  int hidden() const { return hidden_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  Json to_json() const;
  static Policy from_json(const Json& j);

 private:
  PolicyKind kind_ = PolicyKind::kLinear;
  int in_ = 0;
  int hidden_ = 0;
  std::vector<double> params_;
};

SystemActKind select_action(const Policy& policy, const RlState& x, const sys::ActionMask& mask,
                            double epsilon, Rng& rng);

struct Step {
  RlState state;
  sys::ActionMask mask{};
  SystemActKind action = SystemActKind::kAskType;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;
  Outcome outcome = Outcome::kOngoing;
  bool aborted = false;  // the simulator threw
  std::vector<double> rewards() const;
};

struct Episode {
  Trajectory trajectory;
  Dialog dialog;
};

// Picks the system act for the current turn.
using Chooser = std::function<SystemActKind(const DialogState&, const RlState&,
                                            const sys::ActionMask&, Rng&)>;
Chooser policy_chooser(const Policy& policy, double epsilon);
Chooser rule_chooser();

struct EpisodeContext {
  const RestaurantDB* db = nullptr;
  const sys::Nlu* nlu = nullptr;
  const nlg::TemplateBank* system_bank = nullptr;
  const FeatureSpace* features = nullptr;
  sys::BackendConfig backend;
};

Episode run_episode(sim::UserSimulator& simulator, const Goal& goal, std::uint64_t seed,
                    const Chooser& chooser, const EpisodeContext& ctx);

struct UpdateReport {
  bool applied = false;
  double grad_norm = 0.0;
  double baseline = 0.0;
};

struct RlConfig {
  PolicyKind policy = PolicyKind::kLinear;
  int hidden = 32;
  double learning_rate = 0.01;
  int batch_size = 16;
  double epsilon = 0.1;
  double gamma = 0.9;
  bool baseline = true;  // subtract the batch mean return
  int max_episodes = 30000;
  int eval_every = 1000;
  int eval_dialogs = 100;
  double target = 0.9;
  int patience = 3;  // consecutive checkpoints at target before stopping
  std::uint64_t seed = 1;
  Json to_json() const;
};

UpdateReport reinforce_update(Policy& policy, const std::vector<Trajectory>& batch,
                              const RlConfig& config);

struct CurvePoint {
  int episode = 0;
  double success = 0.0;
};

struct TrainResult {
  Policy policy;
  std::vector<CurvePoint> curve;
  int episodes = 0;
  std::vector<Json> log;
  double target = 0.9;
  // 1-based index of the first checkpoint with success >= target.
  std::optional<int> checkpoints_to_target() const;
};

struct TrainContext {
  EpisodeContext episode;
  const corpus::GoalDB* goals = nullptr;
};

TrainResult train(sim::UserSimulator& simulator, const TrainContext& ctx, const RlConfig& config);

// Success rate of a frozen policy (epsilon 0) over n dialogs.
double evaluate(sim::UserSimulator& simulator, const Chooser& chooser, const TrainContext& ctx,
                int n, std::uint64_t seed);

// policy.json carries the feature vocabulary so a loaded policy can act.
void save_policy(const std::filesystem::path& path, const Policy& policy,
                 const FeatureSpace& features, const Json& meta = Json::object());
std::pair<Policy, FeatureSpace> load_policy(const std::filesystem::path& path);

// curve.csv, policy.json, train_log.jsonl in `dir`.
void write_training_outputs(const std::filesystem::path& dir, const TrainResult& result,
                            const FeatureSpace& features, const RlConfig& config,
                            std::string_view simulator_id);

}  // namespace usersim::rl

#endif  // USERSIM_RL_H_
