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

// Everything trained or loaded once from the data directory and shared by
// simulators, systems, evaluation and the service.

#ifndef USERSIM_RESOURCES_H_
#define USERSIM_RESOURCES_H_

#include <filesystem>
#include <memory>
#include <vector>

#include "usersim/annotator.h"
#include "usersim/corpus.h"
#include "usersim/dialog_system.h"
#include "usersim/nlg.h"
#include "usersim/simulator.h"

namespace usersim {

struct ResourceConfig {
  std::filesystem::path data_dir = "data";
  std::string corpus_file = "synthetic_multiwoz.json";
  std::string db_file = "restaurants.json";
  std::string user_templates = "user_templates.tsv";
  std::string system_templates = "system_templates.tsv";
  std::uint64_t seed = 7;
  sim::AgendaConfig agenda;
  sim::ActModelConfig act_model;
  double lm_k = 0.1;
};

struct Resources {
  ResourceConfig config;
  std::shared_ptr<const RestaurantDB> db;
  std::shared_ptr<const corpus::Annotator> annotator;
  std::shared_ptr<const corpus::Delexicalizer> delex;
  std::vector<Dialog> corpus;  // annotated restaurant dialogs
  corpus::AnnotationReport annotation;
  corpus::GoalDB goals;
  std::shared_ptr<const nlg::TemplateBank> user_bank;
  std::shared_ptr<const nlg::TemplateBank> system_bank;
  std::vector<nlg::UserUtterance> user_utterances;
  std::shared_ptr<const nlg::TfIdfIndex> user_index;
  std::shared_ptr<const nlg::CondNgramLM> user_lm;
  std::shared_ptr<const sim::ActModel> act_model;
  std::vector<double> act_model_losses;
  std::shared_ptr<const sim::SleIndex> sle_index;

  sim::SimulatorResources simulator_resources() const;
  std::unique_ptr<sim::UserSimulator> simulator(std::string_view id) const;
};

// Loads the data files and trains every corpus-derived model. Deterministic
// for a given config.
Resources load_resources(const ResourceConfig& config);

// Act keys every user and system template bank must cover.
std::vector<std::string> required_user_keys();
std::vector<std::string> required_system_keys();

}  // namespace usersim

#endif  // USERSIM_RESOURCES_H_
