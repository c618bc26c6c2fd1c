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

#include "usersim/rl.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.h"
#include "oracles.h"

namespace usersim::rl {
namespace {

using testing::only;
using testing::random_batch;
using testing::random_state;
using testing::shared_resources;
using testing::surrogate;

TEST(Reward, StepRewards) {
  EXPECT_DOUBLE_EQ(step_reward(Outcome::kOngoing), -0.1);
  EXPECT_DOUBLE_EQ(step_reward(Outcome::kSuccess), 0.9);
  EXPECT_DOUBLE_EQ(step_reward(Outcome::kFailure), -1.1);
}

TEST(Returns, Examples) {
  EXPECT_EQ(discounted_returns({0.9}), std::vector<double>{0.9});
  auto g = discounted_returns({-0.1, -0.1, 0.9}, 0.9);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[0], -0.1 + 0.9 * -0.1 + 0.81 * 0.9, 1e-15);
  EXPECT_NEAR(g[0], 0.539, 1e-12);
  EXPECT_TRUE(discounted_returns({}).empty());
}

TEST(Returns, MatchBruteForce) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(10);
    for (double& v : r) v = 4 * uniform01(rng) - 2;
    const double gamma = uniform01(rng);
    auto g = discounted_returns(r, gamma);
    auto want = testing::brute_force_returns(r, gamma);
    for (std::size_t t = 0; t < r.size(); ++t) EXPECT_NEAR(g[t], want[t], 1e-12);
  }
}

TEST(Policy, MaskedSoftmaxIsADistribution) {
  Rng rng(3);
  for (auto kind : {PolicyKind::kLinear, PolicyKind::kMlp}) {
    Policy p(kind, 7, 5, 9);
    for (double& w : p.params()) w = 2 * uniform01(rng) - 1;
    for (int i = 0; i < 200; ++i) {
      sys::ActionMask m{};
      for (auto& b : m) b = uniform01(rng) < 0.5;
      m[uniform_index(rng, kNumSystemActs)] = true;
      auto probs = p.probabilities(random_state(rng, 7), m);
      double z = 0;
      for (int a = 0; a < kNumSystemActs; ++a) {
        if (!m[a]) EXPECT_EQ(probs[a], 0.0);
        z += probs[a];
      }
      EXPECT_NEAR(z, 1.0, 1e-9);
    }
  }
}

TEST(SelectAction, EpsilonOneIsUniformOnAllowed) {
  Policy p(PolicyKind::kLinear, 2);
  p.params()[0] = 50;  // a strong preference that exploration ignores
  auto m = only({SystemActKind::kAskType, SystemActKind::kProvideInfo, SystemActKind::kGoodbye});
  Rng rng(1);
  std::array<int, kNumSystemActs> counts{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[index_of(select_action(p, {1, 0}, m, 1.0, rng))];
  for (int a = 0; a < kNumSystemActs; ++a) {
    if (m[a]) {
      EXPECT_NEAR(counts[a] / double(n), 1.0 / 3, 0.02);
    } else {
      EXPECT_EQ(counts[a], 0);
    }
  }
}

TEST(SelectAction, SingleAllowedActionAlways) {
  Policy p(PolicyKind::kLinear, 2);
  Rng rng(2);
  for (double eps : {0.0, 0.5, 1.0}) {
    for (int i = 0; i < 500; ++i) {
      EXPECT_EQ(select_action(p, {1, 1}, only({SystemActKind::kPresentResult}), eps, rng),
                SystemActKind::kPresentResult);
    }
  }
  EXPECT_THROW(select_action(p, {1, 1}, sys::ActionMask{}, 0.0, rng), RlError);
}

TEST(SelectAction, FollowsSoftmaxAtEpsilonZero) {
  Policy p(PolicyKind::kLinear, 1);
  p.params()[index_of(SystemActKind::kAskType)] = 2.0;
  p.params()[index_of(SystemActKind::kGoodbye)] = 1.0;
  p.params()[index_of(SystemActKind::kPresentResult)] = 9.0;  // masked
  auto m = only({SystemActKind::kAskType, SystemActKind::kGoodbye});
  const double p_ask = std::exp(2.0) / (std::exp(2.0) + std::exp(1.0));
  EXPECT_NEAR(p_ask, 0.731, 1e-3);
  Rng rng(5);
  int ask = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    auto a = select_action(p, {1}, m, 0.0, rng);
    ASSERT_NE(a, SystemActKind::kPresentResult);
    ask += a == SystemActKind::kAskType;
  }
  EXPECT_NEAR(ask / double(n), p_ask, 0.02);
}

// Applied update divided by the step size against central differences of
// the surrogate objective.
void check_gradient(Policy p, const std::vector<Trajectory>& batch, const RlConfig& c) {
  Policy updated = p;
  auto rep = reinforce_update(updated, batch, c);
  ASSERT_TRUE(rep.applied);
  const double h = 1e-5;
  double worst = 0;
  for (std::size_t i = 0; i < p.params().size(); ++i) {
    Policy plus = p, minus = p;
    plus.params()[i] += h;
    minus.params()[i] -= h;
    const double fd = (surrogate(plus, batch, c) - surrogate(minus, batch, c)) / (2 * h);
    const double analytic = (updated.params()[i] - p.params()[i]) / c.learning_rate;
    worst = std::max(worst, std::abs(fd - analytic));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Reinforce, GradientMatchesFiniteDifferencesOnTenParameters) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    // Two allowed acts over five features: the other rows never move.
    Policy p(PolicyKind::kLinear, 5);
    for (double& w : p.params()) w = 2 * uniform01(rng) - 1;
    RlConfig c;
    c.learning_rate = 1.0;
    c.baseline = trial % 2 == 0;
    auto batch = random_batch(rng, 5, 4, true);
    check_gradient(p, batch, c);
    Policy q = p;
    reinforce_update(q, batch, c);
    int moved = 0;
    for (std::size_t i = 0; i < p.params().size(); ++i) moved += q.params()[i] != p.params()[i];
    EXPECT_LE(moved, 10);
  }
}

TEST(Reinforce, GradientMatchesFiniteDifferencesWithHiddenLayer) {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    Policy p(PolicyKind::kMlp, 4, 3, trial);
    for (double& w : p.params()) w = 2 * uniform01(rng) - 1;
    RlConfig c;
    c.learning_rate = 1.0;
    check_gradient(p, random_batch(rng, 4, 3, false), c);
  }
}

TEST(Reinforce, ZeroReturnsLeaveParametersUnchanged) {
  Rng rng(2);
  Policy p(PolicyKind::kLinear, 3);
  for (double& w : p.params()) w = uniform01(rng);
  Trajectory t;
  for (int i = 0; i < 3; ++i) {
    Step s;
    s.state = random_state(rng, 3);
    s.mask = only({SystemActKind::kAskType, SystemActKind::kGoodbye});
    s.reward = 0.0;
    t.steps.push_back(s);
  }
  RlConfig c;
  c.baseline = false;
  Policy q = p;
  reinforce_update(q, {t}, c);
  EXPECT_EQ(q.params(), p.params());
  EXPECT_THROW(reinforce_update(q, {}, c), RlError);
}

TEST(Reinforce, NonFiniteGradientIsSkipped) {
  Policy p(PolicyKind::kLinear, 2);
  for (double& w : p.params()) w = 1.0;
  Trajectory t;
  Step s;
  s.state = {1e308, 1e308};  // scores overflow
  s.mask = only({SystemActKind::kAskType, SystemActKind::kGoodbye});
  s.reward = 0.9;
  t.steps.push_back(s);
  RlConfig c;
  c.baseline = false;
  Policy q = p;
  auto rep = reinforce_update(q, {t}, c);
  EXPECT_FALSE(rep.applied);
  EXPECT_EQ(q.params(), p.params());
}

// Plain returns (no baseline): every G_t is positive, so each chosen act
// gains probability.
TEST(Reinforce, PositiveTrajectoryGainsProbability) {
  Rng rng(8);
  Policy p(PolicyKind::kLinear, 4);
  Trajectory t;
  for (int i = 0; i < 3; ++i) {
    Step s;
    s.state = random_state(rng, 4);
    s.mask = only({SystemActKind::kAskType, SystemActKind::kPresentResult, SystemActKind::kGoodbye});
    s.action = kAllSystemActs[i == 2 ? 5 : i];
    s.reward = i == 2 ? 0.9 : 0.1;
    t.steps.push_back(s);
  }
  RlConfig c;
  c.baseline = false;
  c.learning_rate = 0.05;
  std::vector<double> prev;
  for (const auto& s : t.steps) prev.push_back(std::exp(p.log_prob(s.state, s.mask, s.action)));
  for (int it = 0; it < 50; ++it) {
    reinforce_update(p, {t}, c);
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      const auto& s = t.steps[k];
      const double now = std::exp(p.log_prob(s.state, s.mask, s.action));
      EXPECT_GT(now, prev[k]) << "update " << it << " step " << k;
      prev[k] = now;
    }
  }
}

TEST(Features, CountsAndDimension) {
  const Resources& res = shared_resources();
  auto fs = FeatureSpace::from_corpus(res.corpus, *res.user_bank);
  EXPECT_EQ(static_cast<int>(FeatureSpace::flag_names().size()), FeatureSpace::kNumFlags);
  DialogState s;
  auto x = fs.featurize(s, "i want cheap cheap food");
  ASSERT_EQ(static_cast<int>(x.size()), fs.dim());
  double words = 0;
  for (int i = FeatureSpace::kNumFlags; i < fs.dim(); ++i) {
    EXPECT_GE(x[i], 0.0);
    words += x[i];
  }
  EXPECT_DOUBLE_EQ(words, 5.0);
  auto y = fs.featurize(s, "zzzz");
  EXPECT_EQ(y.size(), x.size());
}

TEST(Episode, GoodbyeAtTurnOneFails) {
  testing::EpisodeFixture fx;
  auto sim = shared_resources().simulator("agen-t");
  Chooser bye = [](const DialogState&, const RlState&, const sys::ActionMask&, Rng&) {
    return SystemActKind::kGoodbye;
  };
  auto ep = run_episode(*sim, testing::traced_goals().front().goal, 1, bye, fx.ctx.episode);
  EXPECT_EQ(ep.trajectory.outcome, Outcome::kFailure);
  ASSERT_EQ(ep.trajectory.steps.size(), 1u);
  EXPECT_DOUBLE_EQ(ep.trajectory.steps[0].reward, -1.1);
  EXPECT_DOUBLE_EQ(evaluate(*sim, bye, fx.ctx, 50, 3), 0.0);
}

class ThrowingSimulator : public sim::UserSimulator {
 public:
  void reset(const Goal&, std::uint64_t) override { turns_ = 0; }
  sim::SimTurn respond(const std::optional<SystemAct>&, std::string_view) override {
    if (++turns_ > 2) throw sim::SimulatorError("broken");
    return {"i want italian food .", std::nullopt, false};
  }
  std::string_view id() const override { return "broken"; }

 private:
  int turns_ = 0;
};

TEST(Episode, SimulatorFailureAbortsAsFailure) {
  testing::EpisodeFixture fx;
  ThrowingSimulator sim;
  auto ep = run_episode(sim, testing::traced_goals().front().goal, 1, rule_chooser(),
                        fx.ctx.episode);
  EXPECT_TRUE(ep.trajectory.aborted);
  EXPECT_EQ(ep.trajectory.outcome, Outcome::kFailure);
  EXPECT_EQ(ep.trajectory.steps.size(), 2u);
  EXPECT_DOUBLE_EQ(ep.trajectory.steps.back().reward, -1.1);
}

TEST(Episode, TrajectoriesRespectTheCapAndTheMask) {
  testing::EpisodeFixture fx;
  const Resources& res = shared_resources();
  Policy p(PolicyKind::kLinear, fx.features.dim());
  Rng rng(4);
  for (double& w : p.params()) w = uniform01(rng) - 0.5;
  for (auto id : sim::kSimulatorIds) {
    auto sim = res.simulator(id);
    Rng goals(2);
    for (int i = 0; i < 100; ++i) {
      auto ep = run_episode(*sim, corpus::sample_goal(res.goals, goals), i, policy_chooser(p, 0.3),
                            fx.ctx.episode);
      EXPECT_LE(ep.trajectory.steps.size(), static_cast<std::size_t>(kMaxTurns));
      int terminal = 0;
      for (const auto& s : ep.trajectory.steps) {
        EXPECT_TRUE(s.mask[index_of(s.action)]);
        terminal += s.reward != -0.1;
      }
      EXPECT_EQ(terminal, 1);
    }
  }
}

TEST(Train, ReproducibleWithProtocolCheckpoints) {
  testing::EpisodeFixture fx;
  const Resources& res = shared_resources();
  RlConfig c;
  c.max_episodes = 2000;
  c.eval_dialogs = 30;
  c.seed = 5;
  auto a = res.simulator("agen-t");
  auto b = res.simulator("agen-t");
  TrainResult x = train(*a, fx.ctx, c);
  TrainResult y = train(*b, fx.ctx, c);
  ASSERT_EQ(x.curve.size(), 2u);
  EXPECT_EQ(x.curve[0].episode, 1000);
  EXPECT_EQ(x.curve[1].episode, 2000);
  EXPECT_EQ(x.policy.params(), y.policy.params());
  for (std::size_t i = 0; i < x.curve.size(); ++i) EXPECT_EQ(x.curve[i].success, y.curve[i].success);
  // A checkpoint value is the frozen-policy evaluation it reports.
  EXPECT_DOUBLE_EQ(evaluate(*a, policy_chooser(x.policy, 0.0), fx.ctx, 30, derive_seed(5, "eval")),
                   x.curve.back().success);

  auto dir = std::filesystem::temp_directory_path() / "usersim_rl_test";
  std::filesystem::remove_all(dir);
  write_training_outputs(dir / "a", x, fx.features, c, "agen-t");
  write_training_outputs(dir / "b", y, fx.features, c, "agen-t");
  for (const char* f : {"curve.csv", "policy.json", "train_log.jsonl"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  }
  auto [loaded, fs] = load_policy(dir / "a" / "policy.json");
  EXPECT_EQ(loaded.params(), x.policy.params());
  EXPECT_EQ(fs.vocab(), fx.features.vocab());
  std::filesystem::remove_all(dir);
}

TEST(Train, RejectsBadConfig) {
  testing::EpisodeFixture fx;
  auto sim = shared_resources().simulator("agen-t");
  RlConfig c;
  c.batch_size = 0;
  EXPECT_THROW(train(*sim, fx.ctx, c), RlError);
}

}  // namespace
}  // namespace usersim::rl
