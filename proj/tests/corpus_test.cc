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

#include <gtest/gtest.h>

#include <set>

#include "test_util.h"

namespace usersim::corpus {
namespace {

using testing::data_path;
using testing::fixture_db;

const char* kThreeDialogs = R"({
  "A1.json": {"goal": {"restaurant": {"info": {"food": "italian", "area": "centre"},
                                      "reqt": ["phone"], "book": {}}},
              "log": [{"text": "I want italian food in the centre."},
                      {"text": "caffe uno is nice.",
                       "dialog_act": {"Restaurant-Inform": [["Name", "caffe uno"]]}},
                      {"text": "What is the phone number?"},
                      {"text": "It is 01223448620.",
                       "dialog_act": {"Restaurant-Inform": [["Phone", "01223448620"]]}}]},
  "B2.json": {"goal": {"hotel": {"info": {"area": "east"}}, "restaurant": {}},
              "log": [{"text": "I need a hotel."}, {"text": "Sure."}]},
  "C3.json": {"goal": {"restaurant": {"info": {"name": "caffe uno"}, "reqt": [],
                                      "book": {"people": "2", "day": "friday", "time": "18:00"}}},
              "log": [{"text": "Book caffe uno for 2 on friday at 18:00."},
                      {"text": "Done, ref ab12cd34.",
                       "dialog_act": {"Booking-Book": [["Ref", "ab12cd34"]]}}]}
})";

TEST(Annotator, GoldSetAccuracy) {
  Annotator annotator(fixture_db());
  auto gold = testing::load_gold();
  ASSERT_EQ(gold.size(), 100u);
  int correct = 0;
  for (const auto& g : gold) {
    if (annotator.annotate(g.text).act.kind == g.act) ++correct;
  }
  EXPECT_GE(correct / 100.0, 0.90);
}

TEST(Annotator, ForcedExamples) {
  Annotator annotator(fixture_db());
  EXPECT_EQ(annotator.annotate("goodbye").act.kind, UserActKind::kGoodbye);
  auto a = annotator.annotate("can i get the address and phone number ?").act;
  EXPECT_EQ(a.kind, UserActKind::kRequestInfo);
  EXPECT_EQ(a.slots, (SlotMap{{Slot::kAddress, ""}, {Slot::kPhone, ""}}));
  auto b = annotator.annotate("book a table for 5 people at 12:15 on monday").act;
  EXPECT_EQ(b.kind, UserActKind::kMakeReservation);
  EXPECT_EQ(b.slots, (SlotMap{{Slot::kPeople, "5"}, {Slot::kDay, "monday"}, {Slot::kTime, "12:15"}}));
}

TEST(Annotator, UnmatchedFallsBackToInformTypeWithoutSlots) {
  Annotator annotator(fixture_db());
  auto a = annotator.annotate("hmm");
  EXPECT_FALSE(a.matched);
  EXPECT_EQ(a.act.kind, UserActKind::kInformType);
  EXPECT_TRUE(a.act.slots.empty());
}

TEST(Annotator, RejectsMalformedRuleSets) {
  auto rules = default_rules(fixture_db());
  auto dup = rules;
  dup[1].priority = dup[0].priority;
  EXPECT_THROW(Annotator(dup, fixture_db()), DomainError);
  auto missing = rules;
  missing.pop_back();
  EXPECT_THROW(Annotator(missing, fixture_db()), DomainError);
  auto bad = rules;
  bad[0].patterns.push_back("(unclosed");
  EXPECT_THROW(Annotator(bad, fixture_db()), DomainError);
}

TEST(Annotator, SlotsRespectActCategories) {
  Annotator annotator(fixture_db());
  for (const auto& g : testing::load_gold()) {
    auto act = annotator.annotate(g.text).act;
    for (const auto& [slot, value] : act.slots) EXPECT_TRUE(slot_allowed(act.kind, slot));
  }
}

TEST(LoadCorpus, KeepsRestaurantDialogs) {
  auto dialogs = parse_corpus(kThreeDialogs);
  ASSERT_EQ(dialogs.size(), 2u);
  EXPECT_EQ(dialogs[0].id, "A1.json");
  EXPECT_EQ(dialogs[0].turns[0].utterance, "i want italian food in the centre .");
  ASSERT_TRUE(dialogs[0].turns[1].system_act);
  EXPECT_EQ(dialogs[0].turns[1].system_act->kind, SystemActKind::kPresentResult);
  EXPECT_EQ(dialogs[0].turns[1].categories, std::vector<std::string>{"inform"});
  EXPECT_EQ(dialogs[0].turns[3].system_act->kind, SystemActKind::kProvideInfo);
  EXPECT_EQ(dialogs[1].turns[1].system_act->kind, SystemActKind::kInformReservationResult);
  EXPECT_EQ(dialogs[1].turns[1].categories, std::vector<std::string>{"book_inform"});
  EXPECT_EQ(dialogs[1].goal.booking->people, 2);
}

TEST(LoadCorpus, HotelOnlyIsEmptyCorpus) {
  EXPECT_THROW(parse_corpus(R"({"H.json": {"goal": {"hotel": {"info": {"area": "east"}},
                                           "restaurant": {}}, "log": []}})"),
               EmptyCorpusError);
}

TEST(LoadCorpus, MalformedJsonReportsPosition) {
  try {
    parse_corpus("{\n  \"a\": [1,\n  2,,\n]}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GT(e.column(), 1u);
  }
}

TEST(LoadCorpus, BundledSyntheticCorpus) {
  auto dialogs = load_corpus(data_path("synthetic_multiwoz.json"));
  EXPECT_EQ(dialogs.size(), 900u);
  for (const auto& d : dialogs) {
    ASSERT_FALSE(d.turns.empty());
    EXPECT_EQ(d.turns[0].speaker, Speaker::kUser);
  }
}

TEST(AnnotateUserActs, DeterministicAndReported) {
  Annotator annotator(fixture_db());
  auto dialogs = load_corpus(data_path("synthetic_multiwoz.json"));
  auto [a, report_a] = annotate_user_acts(dialogs, annotator);
  auto [b, report_b] = annotate_user_acts(dialogs, annotator);
  EXPECT_EQ(a, b);
  int total = 0;
  for (const auto& [act, n] : report_a.per_act) total += n;
  EXPECT_EQ(total, report_a.user_turns);
  EXPECT_GT(report_a.match_rate(), 0.95);
  for (const auto& d : a) {
    for (const auto& t : d.turns) EXPECT_EQ(t.user_act.has_value(), t.speaker == Speaker::kUser);
  }
}

Goal ask_goal(int i) {
  return Goal::make("ai" + std::to_string(i), {{Slot::kFood, "italian"}}, {Slot::kPhone}, {});
}

Goal book_goal(int i) {
  return Goal::make("mr" + std::to_string(i), {{Slot::kArea, "north"}}, {},
                    Booking{2 + i, "monday", "18:00"});
}

TEST(GoalDB, SyntheticCorpusSkewAndBalance) {
  auto dialogs = load_corpus(data_path("synthetic_multiwoz.json"));
  GoalDB db = build_goal_db(dialogs, 7);
  EXPECT_NEAR(db.pre_balance_reservation_share, 1.0 / 3.0, 0.05);
  EXPECT_GE(db.post_balance_reservation_share, 0.45);
  EXPECT_LE(db.post_balance_reservation_share, 0.55);
  int ai = 0, mr = 0;
  for (const auto& g : db.goals) {
    EXPECT_NO_THROW(g.validate());
    ai += g.has(Subtask::kAskInfo);
    mr += g.has(Subtask::kMakeReservation);
  }
  EXPECT_EQ(db.subtask_counts.at(Subtask::kAskInfo), ai);
  EXPECT_EQ(db.subtask_counts.at(Subtask::kMakeReservation), mr);
  EXPECT_LE(std::abs(mr - ai) / double(db.goals.size()), 0.1);
}

TEST(GoalDB, BalancedInputUnchanged) {
  std::vector<Goal> goals;
  for (int i = 0; i < 4; ++i) goals.push_back(ask_goal(i));
  for (int i = 0; i < 4; ++i) goals.push_back(book_goal(i));
  GoalDB db = balance_goals(make_goal_db(goals), 1);
  EXPECT_EQ(db.goals, goals);
  EXPECT_EQ(db.augmented, 0);
}

TEST(GoalDB, BalanceInvariantOnRandomMixes) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    int n_ai = 1 + static_cast<int>(uniform_index(rng, 40));
    int n_mr = 1 + static_cast<int>(uniform_index(rng, 40));
    int n_both = static_cast<int>(uniform_index(rng, 10));
    std::vector<Goal> goals;
    for (int i = 0; i < n_ai; ++i) goals.push_back(ask_goal(i));
    for (int i = 0; i < n_mr; ++i) goals.push_back(book_goal(i));
    for (int i = 0; i < n_both; ++i) {
      goals.push_back(Goal::make("b" + std::to_string(i), {{Slot::kFood, "thai"}}, {Slot::kAddress},
                                 Booking{3, "friday", "19:30"}));
    }
    GoalDB db = balance_goals(make_goal_db(goals), trial);
    int ai = db.subtask_counts[Subtask::kAskInfo], mr = db.subtask_counts[Subtask::kMakeReservation];
    EXPECT_LE(std::abs(mr - ai) / double(db.goals.size()), 0.1) << trial;
  }
}

TEST(GoalDB, TooFewDistinctGoals) {
  auto dialogs = parse_corpus(kThreeDialogs);
  EXPECT_THROW(build_goal_db(dialogs, 1), InsufficientDataError);
}

TEST(SampleGoal, UniformAndDeterministic) {
  GoalDB one = make_goal_db({ask_goal(0)});
  Rng r0(3);
  EXPECT_EQ(sample_goal(one, r0), ask_goal(0));
  GoalDB two = make_goal_db({ask_goal(0), book_goal(0)});
  Rng a(42), b(42);
  EXPECT_EQ(sample_goal(two, a), sample_goal(two, b));
  Rng rng(5);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += sample_goal(two, rng).id == "ai0";
  EXPECT_GE(first / 10000.0, 0.47);
  EXPECT_LE(first / 10000.0, 0.53);
  EXPECT_THROW(sample_goal(GoalDB{}, rng), std::invalid_argument);
}

TEST(Delexicalize, ReplacesDatabaseValues) {
  EXPECT_EQ(join(delexicalize(tokenize("caffe uno is at 32 bridge street"), fixture_db())),
            "<name> is at <address>");
  Tokens plain = tokenize("hello , i need some help .");
  EXPECT_EQ(delexicalize(plain, fixture_db()), plain);
}

TEST(Delexicalize, IdempotentOnCorpus) {
  Delexicalizer delex(fixture_db());
  auto dialogs = load_corpus(data_path("synthetic_multiwoz.json"));
  for (std::size_t i = 0; i < dialogs.size(); i += 7) {
    for (const auto& t : dialogs[i].turns) {
      Tokens once = delex.apply(tokenize(t.utterance));
      EXPECT_EQ(delex.apply(once), once);
    }
  }
}

TEST(QueryDb, MatchesBruteForce) {
  const auto& db = fixture_db();
  std::vector<SlotMap> queries = {{}};
  for (const auto& f : db.values(Slot::kFood)) {
    for (const auto& a : db.values(Slot::kArea)) {
      queries.push_back({{Slot::kFood, f}, {Slot::kArea, a}});
      for (const auto& p : db.values(Slot::kPriceRange)) {
        queries.push_back({{Slot::kFood, f}, {Slot::kArea, a}, {Slot::kPriceRange, p}});
        queries.push_back({{Slot::kArea, a}, {Slot::kPriceRange, p}});
        queries.push_back({{Slot::kFood, std::string(kDontCare)}, {Slot::kPriceRange, p}});
      }
    }
  }
  for (const auto& q : queries) {
    std::vector<Restaurant> brute;
    for (const auto& r : db.all()) {
      bool ok = true;
      for (const auto& [s, v] : q) ok = ok && (v == kDontCare || r.value(s) == v);
      if (ok) brute.push_back(r);
    }
    EXPECT_EQ(db.query(q), brute);
    for (const auto& [s, v] : q) {
      SlotMap sub = q;
      sub.erase(s);
      auto bigger = db.query(sub);
      for (const auto& r : db.query(q)) {
        EXPECT_NE(std::find(bigger.begin(), bigger.end(), r), bigger.end());
      }
    }
  }
  EXPECT_EQ(db.query({}).size(), db.size());
}

TEST(QueryDb, ItalianInTheEast) {
  std::set<std::string> names;
  for (const auto& r : fixture_db().all()) {
    if (r.food == "italian" && r.area == "east") names.insert(r.name);
  }
  std::set<std::string> got;
  for (const auto& r : fixture_db().query({{Slot::kFood, "italian"}, {Slot::kArea, "east"}})) {
    got.insert(r.name);
  }
  EXPECT_EQ(got, names);
}

}  // namespace
}  // namespace usersim::corpus
