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

#include "usersim/dialog_system.h"

#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "fixtures.h"
#include "test_util.h"

namespace usersim::sys {
namespace {

using testing::fixture_db;

NluResult nlu_of(UserActKind k, SlotMap slots = {}) { return {UserAct::make(k, slots), 1.0}; }

Restaurant by_name(const std::string& name) { return *fixture_db().find(name); }

TEST(Nlu, BookingSentence) {
  Nlu nlu(fixture_db());
  auto r = nlu.parse("book a table for 5 people at 12:15 on monday");
  EXPECT_EQ(r.act.kind, UserActKind::kMakeReservation);
  EXPECT_EQ(r.act.slots, (SlotMap{{Slot::kPeople, "5"}, {Slot::kTime, "12:15"},
                                  {Slot::kDay, "monday"}}));
  EXPECT_DOUBLE_EQ(r.confidence, 1.0);
}

TEST(Nlu, GoodbyeAndFallback) {
  Nlu nlu(fixture_db());
  EXPECT_EQ(nlu.parse("goodbye").act.kind, UserActKind::kGoodbye);
  auto r = nlu.parse("zzz qqq");
  EXPECT_EQ(r.act.kind, UserActKind::kInformType);
  EXPECT_TRUE(r.act.slots.empty());
  EXPECT_DOUBLE_EQ(r.confidence, 0.0);
}

TEST(Nlu, GoldAccuracy) {
  Nlu nlu(fixture_db());
  auto gold = testing::load_gold();
  ASSERT_EQ(gold.size(), 100u);
  int ok = 0;
  for (const auto& g : gold) ok += nlu.parse(g.text).act.kind == g.act;
  EXPECT_GE(ok, 90);
}

TEST(Nlu, NoiseFlipsTheKind) {
  Nlu clean(fixture_db(), 0.0), noisy(fixture_db(), 1.0);
  Rng rng(4);
  for (const auto& g : testing::load_gold()) {
    auto a = clean.parse(g.text, &rng);
    auto b = noisy.parse(g.text, &rng);
    EXPECT_NE(a.act.kind, b.act.kind) << g.text;
    for (const auto& [s, v] : b.act.slots) EXPECT_TRUE(slot_allowed(b.act.kind, s));
  }
}

TEST(Track, ChangeOverwrites) {
  DialogState s;
  s = track(s, nlu_of(UserActKind::kInformType, {{Slot::kFood, "italian"}}));
  s = track(s, nlu_of(UserActKind::kInformTypeChange, {{Slot::kFood, "chinese"}}));
  EXPECT_EQ(s.constraints.at(Slot::kFood), "chinese");
  EXPECT_TRUE(s.relaxed.count(Slot::kFood));
  EXPECT_EQ(s.turn, 2);
}

TEST(Track, GoodbyeOnlyMarksTheUserDone) {
  DialogState s;
  s = track(s, nlu_of(UserActKind::kInformType, {{Slot::kFood, "italian"}}));
  DialogState after = track(s, nlu_of(UserActKind::kGoodbye));
  DialogState expect = s;
  expect.turn = 2;
  expect.user_done = true;
  expect.last_user_act = UserActKind::kGoodbye;
  EXPECT_EQ(after, expect);
}

TEST(Track, IdempotentExceptTurn) {
  std::vector<NluResult> inputs = {
      nlu_of(UserActKind::kInformType, {{Slot::kFood, "thai"}, {Slot::kArea, "west"}}),
      nlu_of(UserActKind::kRequestInfo, {{Slot::kPhone, ""}}),
      nlu_of(UserActKind::kMakeReservation, {{Slot::kPeople, "3"}, {Slot::kDay, "sunday"}}),
      nlu_of(UserActKind::kInformTypeChange, {{Slot::kArea, "dontcare"}}),
      nlu_of(UserActKind::kReservationChangeTime, {{Slot::kTime, "19:00"}}),
  };
  for (const auto& in : inputs) {
    DialogState once = track({}, in);
    DialogState twice = track(once, in);
    twice.turn = once.turn;
    EXPECT_EQ(once, twice) << act_name(in.act.kind);
  }
}

// Hand-written state after each of six user turns (and the system acts in
// between).
TEST(Track, ScriptedDialog) {
  const RestaurantDB& db = fixture_db();
  DialogState s;
  DialogState e;

  s = track(s, nlu_of(UserActKind::kInformType, {{Slot::kFood, "italian"}}));
  e.constraints = {{Slot::kFood, "italian"}};
  e.last_user_act = UserActKind::kInformType;
  e.turn = 1;
  EXPECT_EQ(s, e);

  s = track(s, nlu_of(UserActKind::kInformType,
                      {{Slot::kArea, "centre"}, {Slot::kPriceRange, "expensive"}}));
  e.constraints = {{Slot::kFood, "italian"}, {Slot::kArea, "centre"},
                   {Slot::kPriceRange, "expensive"}};
  e.turn = 2;
  EXPECT_EQ(s, e);

  s = apply_system_act(s, execute_action(SystemActKind::kPresentResult, s, db, "g"), db);
  e.presented = by_name("caffe uno");
  e.offer_index = 1;
  EXPECT_EQ(s, e);

  s = track(s, nlu_of(UserActKind::kRequestInfo, {{Slot::kPhone, ""}}));
  e.pending_requests = {Slot::kPhone};
  e.last_user_act = UserActKind::kRequestInfo;
  e.turn = 3;
  EXPECT_EQ(s, e);

  s = apply_system_act(s, execute_action(SystemActKind::kProvideInfo, s, db, "g"), db);
  e.pending_requests.clear();
  e.provided = {Slot::kPhone};
  EXPECT_EQ(s, e);

  s = track(s, nlu_of(UserActKind::kMakeReservation, {{Slot::kPeople, "2"}, {Slot::kDay, "monday"}}));
  e.booking.people = 2;
  e.booking.day = "monday";
  e.booking_requested = true;
  e.last_user_act = UserActKind::kMakeReservation;
  e.turn = 4;
  EXPECT_EQ(s, e);

  s = track(s, nlu_of(UserActKind::kMakeReservation, {{Slot::kTime, "19:00"}}));
  e.booking.time = "19:00";
  e.turn = 5;
  EXPECT_EQ(s, e);

  s = track(s, nlu_of(UserActKind::kInformTypeChange, {{Slot::kFood, "chinese"}}));
  e.constraints[Slot::kFood] = "chinese";
  e.relaxed = {Slot::kFood};
  e.offer_index = 0;
  e.last_user_act = UserActKind::kInformTypeChange;
  e.turn = 6;
  EXPECT_EQ(s, e);
  EXPECT_EQ(s.provided, std::set<Slot>{Slot::kPhone});
}

TEST(Mask, InitialStateCannotBook) {
  auto m = mask(DialogState{});
  EXPECT_FALSE(allowed(m, SystemActKind::kInformReservationResult));
  EXPECT_FALSE(allowed(m, SystemActKind::kProvideInfo));
  EXPECT_FALSE(allowed(m, SystemActKind::kAskReservationInfo));
  EXPECT_TRUE(allowed(m, SystemActKind::kAskType));
}

TEST(Mask, PresentedWithCompleteBookingAllowsAll) {
  DialogState s;
  s.presented = by_name("caffe uno");
  s.booking = testing::make_booking(2, "monday", "19:00");
  auto m = mask(s);
  for (SystemActKind k : kAllSystemActs) EXPECT_TRUE(allowed(m, k)) << act_name(k);
}

TEST(RulePolicy, Branches) {
  const RestaurantDB& db = fixture_db();
  EXPECT_EQ(rule_policy(DialogState{}), SystemActKind::kAskType);

  DialogState s = track({}, nlu_of(UserActKind::kInformType,
                                   {{Slot::kFood, "italian"}, {Slot::kArea, "centre"},
                                    {Slot::kPriceRange, "expensive"}}));
  ASSERT_EQ(rule_policy(s), SystemActKind::kPresentResult);
  SystemAct present = execute_action(SystemActKind::kPresentResult, s, db, "g");
  EXPECT_FALSE(present.failed);
  EXPECT_EQ(present.slots.at(Slot::kName), "caffe uno");

  s = apply_system_act(s, present, db);
  s = track(s, nlu_of(UserActKind::kRequestInfo, {{Slot::kPostcode, ""}}));
  EXPECT_EQ(rule_policy(s), SystemActKind::kProvideInfo);
  s = apply_system_act(s, execute_action(SystemActKind::kProvideInfo, s, db, "g"), db);
  s = track(s, nlu_of(UserActKind::kMakeReservation, {{Slot::kPeople, "2"}}));
  EXPECT_EQ(rule_policy(s), SystemActKind::kAskReservationInfo);
  s = track(s, nlu_of(UserActKind::kMakeReservation, {{Slot::kDay, "monday"}, {Slot::kTime, "19:00"}}));
  EXPECT_EQ(rule_policy(s), SystemActKind::kInformReservationResult);
  s = track(s, nlu_of(UserActKind::kGoodbye));
  EXPECT_EQ(rule_policy(s), SystemActKind::kGoodbye);
}

TEST(RulePolicy, PresentsTheFirstMatchByName) {
  const RestaurantDB& db = fixture_db();
  DialogState s = track({}, nlu_of(UserActKind::kInformType,
                                   {{Slot::kFood, "italian"}, {Slot::kArea, "dontcare"},
                                    {Slot::kPriceRange, "dontcare"}}));
  auto act = execute_action(SystemActKind::kPresentResult, s, db, "g");
  std::vector<std::string> names;
  for (const auto& r : db.all()) {
    if (r.food == "italian") names.push_back(r.name);
  }
  std::sort(names.begin(), names.end());
  EXPECT_EQ(act.slots.at(Slot::kName), names.front());
}

TEST(RulePolicy, NoMatchIsReported) {
  const RestaurantDB& db = fixture_db();
  DialogState s = track({}, nlu_of(UserActKind::kInformType,
                                   {{Slot::kFood, "thai"}, {Slot::kArea, "north"},
                                    {Slot::kPriceRange, "cheap"}}));
  auto act = execute_action(SystemActKind::kPresentResult, s, db, "g");
  EXPECT_TRUE(act.failed);
  s = apply_system_act(s, act, db);
  EXPECT_TRUE(s.no_match);
  EXPECT_FALSE(s.presented);
  EXPECT_EQ(rule_policy(s), SystemActKind::kAskType);
}

TEST(Backend, ReferenceIsAStableHash) {
  auto a = reservation_reference("SNG001.json", "caffe uno");
  EXPECT_TRUE(std::regex_match(a, std::regex("[a-z0-9]{8}")));
  EXPECT_EQ(a, reservation_reference("SNG001.json", "caffe uno"));
  EXPECT_NE(a, reservation_reference("SNG002.json", "caffe uno"));
  EXPECT_EQ(a, hex64(fnv1a("SNG001.json|caffe uno")).substr(0, 8));
}

TEST(Backend, FailureRateIsAboutTheConfiguredShare) {
  int failed = 0, total = 0;
  for (const auto& r : fixture_db().all()) {
    for (const char* day : {"monday", "tuesday", "friday", "sunday"}) {
      for (int h = 11; h <= 21; ++h) {
        ++total;
        failed += !booking_available(r.name, day, std::to_string(h) + ":00", {});
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(failed) / total, 0.15, 0.03);
  BackendConfig never{0.0}, always{1.0};
  EXPECT_TRUE(booking_available("caffe uno", "monday", "19:00", never));
  EXPECT_FALSE(booking_available("caffe uno", "monday", "19:00", always));
}

TEST(Render, PresentGoodbyeAndReference) {
  const Resources& res = testing::shared_resources();
  const RestaurantDB& db = *res.db;
  Rng rng(3);
  DialogState s = track({}, nlu_of(UserActKind::kInformType,
                                   {{Slot::kFood, "italian"}, {Slot::kArea, "centre"},
                                    {Slot::kPriceRange, "expensive"}}));
  auto present = execute_action(SystemActKind::kPresentResult, s, db, "g");
  s = apply_system_act(s, present, db);
  for (int i = 0; i < 20; ++i) {
    EXPECT_NE(render_system(present, s, *res.system_bank, rng).find("caffe uno"), std::string::npos);
  }

  std::set<std::string> closings;
  for (const auto& t : res.system_bank->templates("goodbye")) closings.insert(t);
  SystemAct bye{SystemActKind::kGoodbye, {}, false};
  EXPECT_TRUE(closings.count(render_system(bye, s, *res.system_bank, rng)));

  s = track(s, nlu_of(UserActKind::kMakeReservation,
                      {{Slot::kPeople, "2"}, {Slot::kDay, "monday"}, {Slot::kTime, "19:00"}}));
  BackendConfig never{0.0};
  auto booked = execute_action(SystemActKind::kInformReservationResult, s, db, "g1", never);
  ASSERT_FALSE(booked.failed);
  s = apply_system_act(s, booked, db);
  EXPECT_TRUE(s.reservation_confirmed);
  const std::string ref = reservation_reference("g1", "caffe uno");
  for (int i = 0; i < 20; ++i) {
    auto text = render_system(booked, s, *res.system_bank, rng);
    std::smatch m;
    ASSERT_TRUE(std::regex_search(text, m, std::regex("\\b[a-z0-9]{8}\\b"))) << text;
    EXPECT_NE(text.find(ref), std::string::npos) << text;
  }
}

// Episodes where the system acts uniformly at random among allowed acts.
TEST(Properties, RulePolicyRespectsTheMaskOnVisitedStates) {
  testing::EpisodeFixture fx;
  const Resources& res = testing::shared_resources();
  auto sim = res.simulator("agen-t");
  Rng goals(11);
  int states = 0;
  rl::Chooser random = [&](const DialogState& st, const rl::RlState&, const ActionMask& m,
                           Rng& rng) {
    ++states;
    int allowed_count = 0;
    for (bool b : m) allowed_count += b;
    EXPECT_GE(allowed_count, 1);
    EXPECT_TRUE(allowed(m, rule_policy(st)));
    std::vector<SystemActKind> opts;
    for (SystemActKind k : kAllSystemActs) {
      if (allowed(m, k)) opts.push_back(k);
    }
    return opts[uniform_index(rng, opts.size())];
  };
  for (int i = 0; i < 10000; ++i) {
    const Goal& g = corpus::sample_goal(res.goals, goals);
    auto ep = rl::run_episode(*sim, g, derive_seed(2, "mask", i), random, fx.ctx.episode);
    EXPECT_LE(ep.trajectory.steps.size(), static_cast<std::size_t>(kMaxTurns));
  }
  EXPECT_GT(states, 10000);
}

TEST(Properties, RuleSystemSolvesFixedGoals) {
  testing::EpisodeFixture fx;
  auto sim = testing::deterministic_agenda();
  for (const auto& tg : testing::traced_goals()) {
    auto ep = rl::run_episode(*sim, tg.goal, 1, rl::rule_chooser(), fx.ctx.episode);
    EXPECT_EQ(ep.trajectory.outcome, Outcome::kSuccess) << tg.goal.id;
    EXPECT_LE(ep.dialog.user_turns(), kMaxTurns);
  }
}

TEST(Properties, RuleSystemAgainstAgendaSucceeds) {
  testing::EpisodeFixture fx;
  const Resources& res = testing::shared_resources();
  auto sim = res.simulator("agen-t");
  Rng goals(5);
  int ok = 0;
  for (int i = 0; i < 500; ++i) {
    const Goal& g = corpus::sample_goal(res.goals, goals);
    auto ep = rl::run_episode(*sim, g, derive_seed(9, "rule", i), rl::rule_chooser(),
                              fx.ctx.episode);
    ok += ep.trajectory.outcome == Outcome::kSuccess;
  }
  EXPECT_GE(ok, 475);
}

}  // namespace
}  // namespace usersim::sys
