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

#include "usersim/resources.h"

namespace usersim {

std::vector<std::string> required_user_keys() {
  std::vector<std::string> out;
  for (UserActKind k : kAllUserActs) out.emplace_back(act_name(k));
  return out;
}

std::vector<std::string> required_system_keys() {
  std::vector<std::string> out;
  for (SystemActKind k : kAllSystemActs) out.emplace_back(act_name(k));
  out.push_back("present_result_failed");
  out.push_back("inform_reservation_result_failed");
  return out;
}

Resources load_resources(const ResourceConfig& config) {
  Resources r;
  r.config = config;
  const auto& dir = config.data_dir;
  auto db = std::make_shared<RestaurantDB>(RestaurantDB::load(dir / config.db_file));
  r.db = db;
  r.annotator = std::make_shared<corpus::Annotator>(*db);
  r.delex = std::make_shared<corpus::Delexicalizer>(*db);

  auto [annotated, report] = corpus::annotate_user_acts(corpus::load_corpus(dir / config.corpus_file),
                                                        *r.annotator);
  r.corpus = std::move(annotated);
  r.annotation = report;
  r.goals = corpus::build_goal_db(r.corpus, derive_seed(config.seed, "goals"));

  auto user_bank = std::make_shared<nlg::TemplateBank>(
      nlg::TemplateBank::load(dir / config.user_templates));
  user_bank->validate(required_user_keys());
  r.user_bank = user_bank;
  auto system_bank = std::make_shared<nlg::TemplateBank>(
      nlg::TemplateBank::load(dir / config.system_templates));
  system_bank->validate(required_system_keys());
  r.system_bank = system_bank;

  r.user_utterances = nlg::collect_user_utterances(r.corpus, *r.delex);
  r.user_index = std::make_shared<nlg::TfIdfIndex>(nlg::build_user_index(r.user_utterances));
  r.user_lm = std::make_shared<nlg::CondNgramLM>(nlg::build_user_lm(r.user_utterances, config.lm_k));

  auto examples = sim::act_examples(r.corpus, r.annotator->spotter());
  r.act_model = std::make_shared<sim::ActModel>(
      sim::sl_train(examples, config.act_model, &r.act_model_losses));
  r.sle_index = std::make_shared<sim::SleIndex>(
      sim::build_sle_index(r.corpus, *r.delex, r.annotator->spotter()));
  return r;
}

sim::SimulatorResources Resources::simulator_resources() const {
  return {db, annotator, delex, user_bank, user_index, user_lm, act_model, sle_index, config.agenda};
}

std::unique_ptr<sim::UserSimulator> Resources::simulator(std::string_view id) const {
  return sim::make_simulator(id, simulator_resources());
}

}  // namespace usersim
