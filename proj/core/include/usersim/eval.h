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

// Automatic metrics: simulated corpora against the Rule-System, trigram
// perplexity, vocabulary and utterance length, success rates, the
// simulator x system cross study, act histograms and correlations.

#ifndef USERSIM_EVAL_H_
#define USERSIM_EVAL_H_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "usersim/resources.h"
#include "usersim/rl.h"

namespace usersim::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// n dialogs between the simulator and the Rule-System. Throws EvalError if
// any episode was aborted by a simulator failure.
std::vector<Dialog> simulate_corpus(sim::UserSimulator& simulator, const rl::TrainContext& ctx,
                                    int n, std::uint64_t seed);

// Word trigram model with add-k smoothing over a closed vocabulary: the
// training tokens plus "</s>" and "<unk>". Test tokens outside it become
// "<unk>". Each sentence is padded with two "<s>"; "</s>" is scored, the
// padding is not.
class TrigramLM {
 public:
  static constexpr std::string_view kUnk = "<unk>";

  // Counts start empty, so every probability is 1 / |V| until add().
  explicit TrigramLM(const std::vector<std::string>& vocab, double k = 0.1);
  static TrigramLM train(const std::vector<Tokens>& sentences, double k = 0.1);

  void add(const Tokens& sentence);
  double prob(const std::string& u, const std::string& v, const std::string& w) const;
  // exp(-(1/T) sum ln p) over every scored token of `test`.
  double perplexity(const std::vector<Tokens>& test) const;
  std::size_t vocab_size() const { return vocab_.size(); }

 private:
  const std::string& map(const std::string& w) const;

  double k_;
  std::map<std::string, int, std::less<>> vocab_;
  std::map<std::tuple<std::string, std::string, std::string>, int> tri_;
  std::map<std::pair<std::string, std::string>, int> ctx_;
};

double trigram_ppl(const std::vector<Tokens>& train, const std::vector<Tokens>& test,
                   double k = 0.1);

std::vector<Tokens> user_sentences(const std::vector<Dialog>& dialogs);

// Up to n corpus user utterances in a seeded order.
std::vector<Tokens> ppl_test_set(const std::vector<Dialog>& corpus, std::size_t n,
                                 std::uint64_t seed);

struct VocabStats {
  std::size_t vocab = 0;
  double avg_len = 0.0;
};
// Distinct user-turn tokens and mean user-turn length in tokens.
VocabStats vocab_and_len(const std::vector<Dialog>& dialogs);

using ActHistogram = std::array<double, kNumUserActs>;
// Recorded user acts, or the annotator's reading for act-free turns.
ActHistogram act_histogram(const std::vector<Dialog>& dialogs, const corpus::Annotator& annotator);

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided, t distribution with n - 2 degrees of freedom
};
Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys);

double success_rate(sim::UserSimulator& simulator, const rl::Chooser& chooser,
                    const rl::TrainContext& ctx, int n, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct MetricsConfig {
  int dialogs = 200;
  std::size_t test_utterances = 5000;
  double k = 0.1;
  std::uint64_t seed = 1;
  double nlu_noise = 0.0;
  Json to_json() const;
};

struct MetricReport {
  std::string simulator;
  double ppl = 0.0;
  std::size_t vocab = 0;
  double avg_utt_len = 0.0;
  int dialogs = 0;
  double success = 0.0;  // against the Rule-System
  ActHistogram acts{};
  std::uint64_t seed = 0;
  std::string config_hash;
  Json to_json() const;
};

struct SimulatedMetrics {
  MetricReport report;
  std::vector<Dialog> dialogs;
};

SimulatedMetrics compute_metrics(const Resources& resources, std::string_view simulator_id,
                                 const MetricsConfig& config);

// A system under test: a trained policy with its feature space, or the
// Rule-System when `policy` is empty.
struct SystemSpec {
  std::string id;
  std::optional<rl::Policy> policy;
  rl::FeatureSpace features;
};

// Policies in <dir>/<simulator id>/policy.json for every simulator id,
// named "sys-<simulator id>". Throws EvalError listing the missing ids.
std::vector<SystemSpec> load_systems(const std::filesystem::path& dir);

struct CrossMatrix {
  std::vector<std::string> simulators;  // rows
  std::vector<std::string> systems;     // columns
  std::vector<std::vector<double>> cells;
  int episodes = 0;  // per cell
  std::uint64_t seed = 0;

  std::vector<double> column_averages() const;
  Json to_json() const;
  std::string to_csv() const;
};

// Every cell uses its own derived seed, so cells are independent of the
// order they are computed in.
CrossMatrix cross_study(const Resources& resources, const std::vector<std::string>& simulators,
                        const std::vector<SystemSpec>& systems, int n, std::uint64_t seed,
                        double nlu_noise = 0.0);

std::string act_hist_csv(const std::vector<std::pair<std::string, ActHistogram>>& rows);
std::string curve_svg(const std::vector<std::pair<std::string, std::vector<rl::CurvePoint>>>& curves);
std::string histogram_svg(const std::vector<std::pair<std::string, ActHistogram>>& rows);

// 16 hex characters of the FNV-1a hash of the compact JSON dump.
std::string config_hash(const Json& config);
// Fixed six-decimal rendering used in every CSV.
std::string fixed(double v);

}  // namespace usersim::eval

#endif  // USERSIM_EVAL_H_
