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

#include <benchmark/benchmark.h>

#include "usersim/eval.h"
#include "usersim/resources.h"
#include "usersim/rl.h"

namespace usersim {
namespace {

const Resources& resources() {
  static const Resources r = [] {
    ResourceConfig c;
    c.data_dir = USERSIM_DATA_DIR;
    return load_resources(c);
  }();
  return r;
}

struct Ctx {
  sys::Nlu nlu{*resources().db};
  rl::FeatureSpace features =
      rl::FeatureSpace::from_corpus(resources().corpus, *resources().user_bank);
  rl::TrainContext train;
  Ctx() {
    train.episode = {resources().db.get(), &nlu, resources().system_bank.get(), &features, {}};
    train.goals = &resources().goals;
  }
};

const Ctx& ctx() {
  static const Ctx c;
  return c;
}

std::vector<std::string> user_lines() {
  std::vector<std::string> out;
  for (const auto& d : resources().corpus) {
    for (const auto& t : d.turns) {
      if (t.speaker == Speaker::kUser) out.push_back(t.utterance);
    }
    if (out.size() >= 512) break;
  }
  return out;
}

void BM_Annotate(benchmark::State& state) {
  const auto lines = user_lines();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(resources().annotator->annotate(lines[i++ % lines.size()]));
  }
}
BENCHMARK(BM_Annotate);

void BM_NluParse(benchmark::State& state) {
  const auto lines = user_lines();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ctx().nlu.parse(lines[i++ % lines.size()]));
}
BENCHMARK(BM_NluParse);

void BM_TfIdfRank(benchmark::State& state) {
  const auto& index = *resources().user_index;
  const Tokens query = tokenize("do you have a cheap restaurant in the north");
  for (auto _ : state) benchmark::DoNotOptimize(index.rank(query));
  state.counters["candidates"] = static_cast<double>(index.size());
}
BENCHMARK(BM_TfIdfRank);

void BM_Episode(benchmark::State& state, const char* sim_id) {
  auto simulator = resources().simulator(sim_id);
  Rng goals(1);
  const rl::Chooser rule = rl::rule_chooser();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const Goal& g = corpus::sample_goal(resources().goals, goals);
    benchmark::DoNotOptimize(rl::run_episode(*simulator, g, ++seed, rule, ctx().train.episode));
  }
}
BENCHMARK_CAPTURE(BM_Episode, agen_t, "agen-t");
BENCHMARK_CAPTURE(BM_Episode, agen_r, "agen-r");
BENCHMARK_CAPTURE(BM_Episode, agen_g, "agen-g");
BENCHMARK_CAPTURE(BM_Episode, sl_t, "sl-t");
BENCHMARK_CAPTURE(BM_Episode, sl_r, "sl-r");
BENCHMARK_CAPTURE(BM_Episode, sl_e, "sl-e");

void BM_PolicyProbabilities(benchmark::State& state) {
  const auto kind = state.range(0) ? rl::PolicyKind::kMlp : rl::PolicyKind::kLinear;
  rl::Policy p(kind, ctx().features.dim(), 32, 1);
  DialogState s;
  const rl::RlState x = ctx().features.featurize(s, "i want cheap italian food in the centre");
  sys::ActionMask mask;
  mask.fill(true);
  for (auto _ : state) benchmark::DoNotOptimize(p.probabilities(x, mask));
}
BENCHMARK(BM_PolicyProbabilities)->Arg(0)->Arg(1);

void BM_ReinforceUpdate(benchmark::State& state) {
  auto simulator = resources().simulator("agen-t");
  rl::Policy p(rl::PolicyKind::kLinear, ctx().features.dim(), 0, 1);
  rl::RlConfig c;
  std::vector<rl::Trajectory> batch;
  Rng goals(2);
  for (int i = 0; i < c.batch_size; ++i) {
    const Goal& g = corpus::sample_goal(resources().goals, goals);
    batch.push_back(rl::run_episode(*simulator, g, i, rl::policy_chooser(p, 0.1),
                                    ctx().train.episode)
                        .trajectory);
  }
  for (auto _ : state) benchmark::DoNotOptimize(rl::reinforce_update(p, batch, c));
}
BENCHMARK(BM_ReinforceUpdate);

void BM_TrigramPpl(benchmark::State& state) {
  auto simulator = resources().simulator("agen-r");
  const auto dialogs = eval::simulate_corpus(*simulator, ctx().train, 200, 1);
  const auto train = eval::user_sentences(dialogs);
  const auto test = eval::ppl_test_set(resources().corpus, 5000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(eval::trigram_ppl(train, test));
}
BENCHMARK(BM_TrigramPpl)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace usersim

BENCHMARK_MAIN();
