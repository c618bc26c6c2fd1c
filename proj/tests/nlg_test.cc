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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.h"
#include "test_util.h"
#include "usersim/cond_lm.h"
#include "usersim/corpus.h"
#include "usersim/tfidf.h"
#include "usersim/user_nlg.h"

namespace usersim::nlg {
namespace {

using testing::data_path;
using testing::dense_cos;
using testing::dense_tfidf;
using testing::fixture_db;

const TemplateBank& user_bank() {
  static const TemplateBank bank = TemplateBank::load(data_path("user_templates.tsv"));
  return bank;
}

const TemplateBank& system_bank() {
  static const TemplateBank bank = TemplateBank::load(data_path("system_templates.tsv"));
  return bank;
}

TEST(TemplateBank, ForcedFills) {
  auto bank = TemplateBank::parse(
      "goodbye\tthank you , goodbye .\n"
      "inform_type\ti am looking for a <food> restaurant .\n"
      "inform_type\ti want <food> food in the <area> .\n");
  Rng rng(1);
  EXPECT_EQ(render_template(bank, "goodbye", {}, rng), "thank you , goodbye .");
  EXPECT_EQ(render_template(bank, "inform_type", {{Slot::kFood, "italian"}}, rng),
            "i am looking for a italian restaurant .");
}

TEST(TemplateBank, NoFillableTemplateIsAnError) {
  auto bank = TemplateBank::parse("inform_type\ti want <food> food .\n");
  Rng rng(1);
  EXPECT_THROW(render_template(bank, "inform_type", {{Slot::kArea, "north"}}, rng), NlgError);
  EXPECT_THROW(render_template(bank, "goodbye", {}, rng), NlgError);
  EXPECT_THROW(TemplateBank::parse("no tab here\n"), NlgError);
}

TEST(TemplateBank, BundledBanksCoverEveryAct) {
  std::vector<std::string> user_keys, system_keys;
  for (auto k : kAllUserActs) user_keys.emplace_back(act_name(k));
  for (auto k : kAllSystemActs) system_keys.emplace_back(act_name(k));
  system_keys.push_back("present_result_failed");
  system_keys.push_back("inform_reservation_result_failed");
  EXPECT_NO_THROW(user_bank().validate(user_keys));
  EXPECT_NO_THROW(system_bank().validate(system_keys));
}

TEST(TemplateBank, RendersStayInsideTheFillClosure) {
  SlotMap slots{{Slot::kFood, "thai"}, {Slot::kArea, "west"}};
  std::set<std::string> closure;
  for (const auto& t : candidate_templates(user_bank(), "inform_type", slots)) {
    closure.insert(lexicalize(t, slots));
  }
  ASSERT_GE(closure.size(), 2u);
  Rng rng(9);
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) {
    auto s = render_template(user_bank(), "inform_type", slots, rng);
    EXPECT_TRUE(closure.count(s)) << s;
    seen.insert(s);
  }
  EXPECT_EQ(seen, closure);
}

TEST(TemplateBank, SameSeedSameText) {
  SlotMap slots{{Slot::kPeople, "4"}, {Slot::kDay, "friday"}};
  Rng a(3), b(3);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(render_template(user_bank(), "make_reservation", slots, a),
              render_template(user_bank(), "make_reservation", slots, b));
  }
}

std::vector<SlotMap> subsets(const std::vector<std::pair<Slot, std::vector<std::string>>>& choices) {
  std::vector<SlotMap> out{{}};
  for (const auto& [slot, values] : choices) {
    std::vector<SlotMap> next;
    for (const auto& m : out) {
      next.push_back(m);
      for (const auto& v : values) {
        SlotMap x = m;
        x[slot] = v;
        next.push_back(x);
      }
    }
    out = next;
  }
  return out;
}

// Every act the agenda can emit renders, and the annotator reads it back.
TEST(TemplateBank, UserRendersRoundTripThroughTheAnnotator) {
  corpus::Annotator annotator(fixture_db());
  Rng rng(17);
  auto check = [&](UserActKind kind, const SlotMap& slots) {
    for (int rep = 0; rep < 5; ++rep) {
      std::string text = render_template(user_bank(), act_name(kind).data(), slots, rng);
      EXPECT_EQ(text.find('<'), std::string::npos) << text;
      auto got = annotator.annotate(text).act;
      EXPECT_EQ(got.kind, kind) << text;
      EXPECT_EQ(got.slots, slots) << text;
    }
  };
  const std::string dc(kDontCare);
  for (const auto& m : subsets({{Slot::kFood, {"italian", "modern european", dc}},
                                {Slot::kArea, {"north", "centre", dc}},
                                {Slot::kPriceRange, {"cheap", "moderate", dc}}})) {
    if (m.empty()) continue;
    check(UserActKind::kInformType, m);
  }
  for (const auto& r : fixture_db().all()) check(UserActKind::kInformType, {{Slot::kName, r.name}});
  for (Slot s : kSearchSlots) {
    for (const auto& v : fixture_db().values(s)) check(UserActKind::kInformTypeChange, {{s, v}});
    check(UserActKind::kInformTypeChange, {{s, dc}});
  }
  for (const auto& m : subsets({{Slot::kAddress, {""}}, {Slot::kPhone, {""}}, {Slot::kPostcode, {""}}})) {
    if (!m.empty()) check(UserActKind::kRequestInfo, m);
  }
  for (const auto& m : subsets({{Slot::kPeople, {"1", "7"}},
                                {Slot::kDay, {"monday", "sunday"}},
                                {Slot::kTime, {"9:30", "18:15"}}})) {
    check(UserActKind::kMakeReservation, m);
  }
  check(UserActKind::kReservationChangeTime, {{Slot::kTime, "19:45"}});
  check(UserActKind::kAnythingElse, {});
  check(UserActKind::kGoodbye, {});
}

TEST(Lexicalize, Examples) {
  Restaurant r = *fixture_db().find("caffe uno");
  EXPECT_EQ(lexicalize("<name> is in the <area>", {}, &r), "caffe uno is in the centre");
  EXPECT_EQ(lexicalize("hello there .", {}), "hello there .");
  EXPECT_THROW(lexicalize("<name> is nice", {}), NlgError);
  EXPECT_THROW(lexicalize("<bogus> is nice", {{Slot::kName, "x"}}), NlgError);
  EXPECT_EQ(lexicalize("what is the <slot_list> ?", {{Slot::kPhone, ""}, {Slot::kAddress, ""}}),
            "what is the address and phone number ?");
}

TEST(Lexicalize, InvertsDelexicalizeOnFixtureValues) {
  corpus::Delexicalizer delex(fixture_db());
  for (const auto& r : fixture_db().all()) {
    std::string text = canonical(r.name + " is a " + r.food + " place at " + r.address +
                                 " , call " + r.phone + " , postcode " + r.postcode + " .");
    SlotMap replaced;
    Tokens d = delex.apply(tokenize(text), {}, &replaced);
    EXPECT_EQ(lexicalize(join(d), replaced), text);
  }
}

TEST(TfIdf, FourCandidateFixture) {
  std::vector<Tokens> docs = {tokenize("what area would you like"),
                              tokenize("what food would you like ? cheap food"),
                              tokenize("the phone number is here"),
                              tokenize("what food do you want")};
  std::vector<RetrievalCandidate> cands;
  for (std::size_t i = 0; i < docs.size(); ++i) cands.push_back({docs[i], "inform_type", std::to_string(i)});
  TfIdfIndex index(cands);
  Tokens query = tokenize("which food would you like");
  std::vector<std::string> vocab;
  for (const auto& d : docs) {
    for (const auto& t : d) {
      if (std::find(vocab.begin(), vocab.end(), t) == vocab.end()) vocab.push_back(t);
    }
  }
  auto qv = dense_tfidf(docs, query, vocab);
  std::vector<double> expected;
  for (const auto& d : docs) expected.push_back(dense_cos(qv, dense_tfidf(docs, d, vocab)));
  SparseVector q = index.vectorize(query);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    EXPECT_NEAR(cosine(q, index.vector(i)), expected[i], 1e-12);
  }
  auto argmax = std::max_element(expected.begin(), expected.end()) - expected.begin();
  EXPECT_EQ(argmax, 1);
  EXPECT_EQ(index.retrieve("inform_type", query), 1u);
  EXPECT_NEAR(index.idf("what"), std::log(4.0 / 3.0), 1e-15);
  EXPECT_EQ(index.retrieve("inform_type", docs[2]), 2u);
  EXPECT_EQ(index.retrieve("inform_type", tokenize("zebra")), 0u);
  EXPECT_EQ(index.retrieve("goodbye", query), std::nullopt);
  auto copy = TfIdfIndex::from_json(index.to_json());
  EXPECT_EQ(copy.retrieve("inform_type", query), 1u);
}

TEST(TfIdf, CosineSymmetricAndScaleInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    SparseVector a, b, scaled;
    double alpha = 0.1 + 10 * uniform01(rng);
    for (int i = 0; i < 12; ++i) {
      if (uniform01(rng) < 0.5) a.emplace_back(i, uniform01(rng));
      if (uniform01(rng) < 0.5) b.emplace_back(i, uniform01(rng));
    }
    for (auto [i, w] : a) scaled.emplace_back(i, alpha * w);
    double c = cosine(a, b);
    EXPECT_NEAR(c, cosine(b, a), 1e-15);
    EXPECT_NEAR(c, cosine(scaled, b), 1e-12);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0 + 1e-12);
  }
}

TEST(CondLm, SingleUtteranceGreedy) {
  auto lm = train_cond_lm({{"goodbye", tokenize("good bye .")}});
  Rng rng(1);
  EXPECT_EQ(join(*lm.generate("goodbye", rng)), "good bye .");
  EXPECT_EQ(lm.generate("nope", rng), std::nullopt);
}

TEST(CondLm, HandComputedAddK) {
  auto lm = train_cond_lm({{"k", tokenize("a b")}, {"k", tokenize("a c")}, {"k", tokenize("a b")}});
  // V = {a, b, c, </s>}, k = 0.1
  EXPECT_NEAR(lm.prob("k", "<s>", "<s>", "a"), 3.1 / 3.4, 1e-15);
  EXPECT_NEAR(lm.prob("k", "<s>", "a", "b"), 2.1 / 3.4, 1e-15);
  EXPECT_NEAR(lm.prob("k", "<s>", "a", "c"), 1.1 / 3.4, 1e-15);
  EXPECT_NEAR(lm.prob("k", "a", "b", "</s>"), 2.1 / 2.4, 1e-15);
  EXPECT_NEAR(lm.prob("k", "a", "c", "a"), 0.1 / 1.4, 1e-15);
}

TEST(CondLm, DistributionsSumToOne) {
  auto dialogs = corpus::load_corpus(data_path("synthetic_multiwoz.json"));
  corpus::Annotator annotator(fixture_db());
  auto [annotated, report] = corpus::annotate_user_acts(dialogs, annotator);
  corpus::Delexicalizer delex(fixture_db());
  auto lm = build_user_lm(collect_user_utterances(annotated, delex));
  Rng rng(2);
  int checked = 0;
  for (const auto& u : collect_user_utterances(annotated, delex)) {
    if (checked++ > 200) break;
    std::string a(kBos), b(kBos);
    for (const auto& w : u.delexicalized) {
      auto p = lm.next(u.signature, a, b);
      double s = 0;
      for (double x : p) s += x;
      EXPECT_NEAR(s, 1.0, 1e-9);
      a = b;
      b = w;
    }
  }
  Rng r1(5), r2(6);
  for (const auto& key : {"goodbye|", "request_info|?phone"}) {
    EXPECT_EQ(lm.generate(key, r1), lm.generate(key, r2));
  }
  auto copy = CondNgramLM::from_json(lm.to_json());
  EXPECT_EQ(copy.generate("goodbye|", r1), lm.generate("goodbye|", r2));
}

TEST(UserNlg, StrategiesProduceLexicalText) {
  auto dialogs = corpus::load_corpus(data_path("synthetic_multiwoz.json"));
  corpus::Annotator annotator(fixture_db());
  auto [annotated, report] = corpus::annotate_user_acts(dialogs, annotator);
  corpus::Delexicalizer delex(fixture_db());
  auto utts = collect_user_utterances(annotated, delex);
  auto bank = std::make_shared<TemplateBank>(user_bank());
  RetrievalUserNlg retrieval(std::make_shared<TfIdfIndex>(build_user_index(utts)), bank);
  GenerationUserNlg generation(std::make_shared<CondNgramLM>(build_user_lm(utts)), bank);
  TemplateUserNlg templ(bank);
  Rng rng(8);
  std::vector<UserAct> acts = {
      UserAct::make(UserActKind::kInformType, {{Slot::kFood, "thai"}, {Slot::kArea, "east"}}),
      UserAct::make(UserActKind::kRequestInfo, {{Slot::kPhone, ""}}),
      UserAct::make(UserActKind::kMakeReservation,
                    {{Slot::kPeople, "3"}, {Slot::kDay, "monday"}, {Slot::kTime, "18:00"}}),
      UserAct::make(UserActKind::kGoodbye)};
  Tokens ctx = retrieval_context(delex, "what food would you like ?", "");
  for (const auto& act : acts) {
    for (UserNlg* n : std::initializer_list<UserNlg*>{&templ, &retrieval, &generation}) {
      std::string text = n->realize(act, ctx, rng);
      EXPECT_EQ(text.find('<'), std::string::npos) << n->name() << ": " << text;
      EXPECT_EQ(annotator.annotate(text).act.kind, act.kind) << n->name() << ": " << text;
    }
  }
  EXPECT_LT(retrieval.stats().fallbacks, retrieval.stats().calls);
}

}  // namespace
}  // namespace usersim::nlg
