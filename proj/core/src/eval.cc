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

#include "usersim/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <boost/math/distributions/students_t.hpp>

namespace usersim::eval {
namespace {

constexpr std::string_view kBos = "<s>";
constexpr std::string_view kEos = "</s>";

}  // namespace

std::string fixed(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string config_hash(const Json& config) { return hex64(fnv1a(config.dump())); }

std::vector<Dialog> simulate_corpus(sim::UserSimulator& simulator, const rl::TrainContext& ctx,
                                    int n, std::uint64_t seed) {
  if (n < 0) throw EvalError("dialog count must not be negative");
  std::vector<Dialog> out;
  out.reserve(n);
  Rng goals(derive_seed(seed, "corpus-goals"));
  const rl::Chooser rule = rl::rule_chooser();
  for (int i = 0; i < n; ++i) {
    const Goal& g = corpus::sample_goal(*ctx.goals, goals);
    rl::Episode ep =
        rl::run_episode(simulator, g, derive_seed(seed, "corpus-episode", i), rule, ctx.episode);
    if (ep.trajectory.aborted) {
      throw EvalError("simulator " + std::string(simulator.id()) + " failed in dialog " +
                      std::to_string(i) + "; partial corpus rejected");
    }
    out.push_back(std::move(ep.dialog));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trigram LM

TrigramLM::TrigramLM(const std::vector<std::string>& vocab, double k) : k_(k) {
  if (!(k > 0)) throw EvalError("smoothing constant must be positive");
  for (const auto& w : vocab) {
    if (w == kBos) continue;
    vocab_.emplace(w, 0);
  }
  vocab_.emplace(std::string(kEos), 0);
  vocab_.emplace(std::string(kUnk), 0);
}

TrigramLM TrigramLM::train(const std::vector<Tokens>& sentences, double k) {
  std::set<std::string> words;
  for (const auto& s : sentences) words.insert(s.begin(), s.end());
  TrigramLM lm({words.begin(), words.end()}, k);
  for (const auto& s : sentences) lm.add(s);
  return lm;
}

const std::string& TrigramLM::map(const std::string& w) const {
  if (w == kBos) return w;
  auto it = vocab_.find(w);
  if (it != vocab_.end()) return it->first;
  return vocab_.find(kUnk)->first;
}

void TrigramLM::add(const Tokens& sentence) {
  std::string u(kBos), v(kBos);
  Tokens words = sentence;
  words.emplace_back(kEos);
  for (const auto& raw : words) {
    const std::string& w = map(raw);
    ++tri_[{u, v, w}];
    ++ctx_[{u, v}];
    u = std::move(v);
    v = w;
  }
}

double TrigramLM::prob(const std::string& u, const std::string& v, const std::string& w) const {
  const std::string& mu = map(u);
  const std::string& mv = map(v);
  const std::string& mw = map(w);
  auto t = tri_.find({mu, mv, mw});
  auto c = ctx_.find({mu, mv});
  const double num = (t == tri_.end() ? 0.0 : t->second) + k_;
  const double den = (c == ctx_.end() ? 0.0 : c->second) + k_ * static_cast<double>(vocab_.size());
  return num / den;
}

double TrigramLM::perplexity(const std::vector<Tokens>& test) const {
  double log_sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : test) {
    std::string u(kBos), v(kBos);
    for (std::size_t i = 0; i <= s.size(); ++i) {
      const std::string w = i < s.size() ? s[i] : std::string(kEos);
      log_sum += std::log(prob(u, v, w));
      ++count;
      u = std::move(v);
      v = map(w);
    }
  }
  if (count == 0) throw EvalError("perplexity needs a non-empty test set");
  return std::exp(-log_sum / static_cast<double>(count));
}

double trigram_ppl(const std::vector<Tokens>& train, const std::vector<Tokens>& test, double k) {
  if (train.empty()) throw EvalError("perplexity needs a non-empty training set");
  if (test.empty()) throw EvalError("perplexity needs a non-empty test set");
  return TrigramLM::train(train, k).perplexity(test);
}

std::vector<Tokens> user_sentences(const std::vector<Dialog>& dialogs) {
  std::vector<Tokens> out;
  for (const auto& d : dialogs) {
    for (const auto& t : d.turns) {
      if (t.speaker != Speaker::kUser) continue;
      Tokens toks = tokenize(t.utterance);
      if (!toks.empty()) out.push_back(std::move(toks));
    }
  }
  return out;
}

std::vector<Tokens> ppl_test_set(const std::vector<Dialog>& corpus, std::size_t n,
                                 std::uint64_t seed) {
  std::vector<Tokens> all = user_sentences(corpus);
  Rng rng(derive_seed(seed, "ppl-test"));
  // Partial Fisher-Yates over the first n slots.
  const std::size_t take = std::min(n, all.size());
  for (std::size_t i = 0; i < take; ++i) {
    std::swap(all[i], all[i + uniform_index(rng, all.size() - i)]);
  }
  all.resize(take);
  return all;
}

VocabStats vocab_and_len(const std::vector<Dialog>& dialogs) {
  std::set<std::string> vocab;
  std::size_t tokens = 0, turns = 0;
  for (const auto& d : dialogs) {
    for (const auto& t : d.turns) {
      if (t.speaker != Speaker::kUser) continue;
      Tokens toks = tokenize(t.utterance);
      tokens += toks.size();
      ++turns;
      vocab.insert(toks.begin(), toks.end());
    }
  }
  VocabStats s;
  s.vocab = vocab.size();
  s.avg_len = turns ? static_cast<double>(tokens) / static_cast<double>(turns) : 0.0;
  return s;
}

ActHistogram act_histogram(const std::vector<Dialog>& dialogs, const corpus::Annotator& annotator) {
  ActHistogram h{};
  std::size_t total = 0;
  for (const auto& d : dialogs) {
    for (const auto& t : d.turns) {
      if (t.speaker != Speaker::kUser) continue;
      const UserActKind k = t.user_act ? t.user_act->kind : annotator.annotate(t.utterance).act.kind;
      h[index_of(k)] += 1.0;
      ++total;
    }
  }
  if (total == 0) throw EvalError("act histogram needs at least one user turn");
  for (double& x : h) x /= static_cast<double>(total);
  return h;
}

Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw EvalError("pearson needs paired samples");
  const std::size_t n = xs.size();
  if (n < 3) throw EvalError("pearson needs at least three points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0 || syy == 0) throw EvalError("pearson is undefined for a constant sample");
  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(c.r) >= 1.0) {
    c.p = 0.0;
    return c;
  }
  const double df = static_cast<double>(n - 2);
  const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
  boost::math::students_t dist(df);
  c.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return c;
}

double success_rate(sim::UserSimulator& simulator, const rl::Chooser& chooser,
                    const rl::TrainContext& ctx, int n, std::uint64_t seed) {
  return rl::evaluate(simulator, chooser, ctx, n, seed);
}

// ---------------------------------------------------------------------------
// Reports

Json MetricsConfig::to_json() const {
  return Json{{"dialogs", dialogs},
              {"test_utterances", test_utterances},
              {"k", k},
              {"seed", seed},
              {"nlu_noise", nlu_noise}};
}

Json MetricReport::to_json() const {
  Json acts_j = Json::object();
  for (UserActKind k : kAllUserActs) acts_j[std::string(act_name(k))] = acts[index_of(k)];
  return Json{{"simulator", simulator},
              {"dialogs", dialogs},
              {"ppl", ppl},
              {"vocab", vocab},
              {"avg_utt_len", avg_utt_len},
              {"success", success},
              {"acts", acts_j},
              {"seed", seed},
              {"config_hash", config_hash}};
}

SimulatedMetrics compute_metrics(const Resources& resources, std::string_view simulator_id,
                                 const MetricsConfig& config) {
  if (config.dialogs <= 0) throw EvalError("metrics need at least one dialog");
  sys::Nlu nlu(*resources.db, config.nlu_noise);
  rl::FeatureSpace features = rl::FeatureSpace::from_corpus(resources.corpus, *resources.user_bank);
  rl::TrainContext ctx;
  ctx.episode = {resources.db.get(), &nlu, resources.system_bank.get(), &features, {}};
  ctx.goals = &resources.goals;
  auto simulator = resources.simulator(simulator_id);

  SimulatedMetrics out;
  out.dialogs = simulate_corpus(*simulator, ctx, config.dialogs, derive_seed(config.seed, "metrics"));
  MetricReport& r = out.report;
  r.simulator = std::string(simulator_id);
  r.dialogs = config.dialogs;
  r.seed = config.seed;
  r.config_hash = config_hash(config.to_json());
  int ok = 0;
  for (const auto& d : out.dialogs) ok += d.outcome == Outcome::kSuccess;
  r.success = static_cast<double>(ok) / config.dialogs;
  r.ppl = trigram_ppl(user_sentences(out.dialogs),
                      ppl_test_set(resources.corpus, config.test_utterances, config.seed), config.k);
  VocabStats vs = vocab_and_len(out.dialogs);
  r.vocab = vs.vocab;
  r.avg_utt_len = vs.avg_len;
  r.acts = act_histogram(out.dialogs, *resources.annotator);
  return out;
}

std::vector<SystemSpec> load_systems(const std::filesystem::path& dir) {
  std::vector<SystemSpec> out;
  std::vector<std::string> missing;
  for (auto id : sim::kSimulatorIds) {
    const auto path = dir / std::string(id) / "policy.json";
    if (!std::filesystem::exists(path)) {
      missing.emplace_back(id);
      continue;
    }
    auto [policy, features] = rl::load_policy(path);
    out.push_back({"sys-" + std::string(id), std::move(policy), std::move(features)});
  }
  if (!missing.empty()) {
    std::string msg = "missing policies for:";
    for (const auto& m : missing) msg += " " + m;
    throw EvalError(msg);
  }
  return out;
}

std::vector<double> CrossMatrix::column_averages() const {
  std::vector<double> avg(systems.size(), 0.0);
  if (simulators.empty()) return avg;
  for (const auto& row : cells) {
    for (std::size_t j = 0; j < row.size(); ++j) avg[j] += row[j];
  }
  for (double& a : avg) a /= static_cast<double>(simulators.size());
  return avg;
}

Json CrossMatrix::to_json() const {
  return Json{{"simulators", simulators}, {"systems", systems},     {"cells", cells},
              {"episodes", episodes},     {"seed", seed},           {"column_averages", column_averages()}};
}

std::string CrossMatrix::to_csv() const {
  std::string out = "simulator";
  for (const auto& s : systems) out += "," + s;
  out += "\n";
  for (std::size_t i = 0; i < simulators.size(); ++i) {
    out += simulators[i];
    for (double v : cells[i]) out += "," + fixed(v);
    out += "\n";
  }
  out += "average";
  for (double v : column_averages()) out += "," + fixed(v);
  out += "\n";
  return out;
}

CrossMatrix cross_study(const Resources& resources, const std::vector<std::string>& simulators,
                        const std::vector<SystemSpec>& systems, int n, std::uint64_t seed,
                        double nlu_noise) {
  if (n <= 0) throw EvalError("cross study needs at least one episode per cell");
  CrossMatrix m;
  m.simulators = simulators;
  m.episodes = n;
  m.seed = seed;
  for (const auto& s : systems) m.systems.push_back(s.id);
  sys::Nlu nlu(*resources.db, nlu_noise);
  m.cells.assign(simulators.size(), std::vector<double>(systems.size(), 0.0));
  for (std::size_t i = 0; i < simulators.size(); ++i) {
    auto simulator = resources.simulator(simulators[i]);
    for (std::size_t j = 0; j < systems.size(); ++j) {
      const SystemSpec& s = systems[j];
      rl::TrainContext ctx;
      ctx.episode = {resources.db.get(), &nlu, resources.system_bank.get(), &s.features, {}};
      ctx.goals = &resources.goals;
      const rl::Chooser chooser =
          s.policy ? rl::policy_chooser(*s.policy, 0.0) : rl::rule_chooser();
      const std::uint64_t cell_seed = derive_seed(derive_seed(seed, "cross-row", i), "cross-col", j);
      m.cells[i][j] = rl::evaluate(*simulator, chooser, ctx, n, cell_seed);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// CSV and SVG

std::string act_hist_csv(const std::vector<std::pair<std::string, ActHistogram>>& rows) {
  std::string out = "source";
  for (UserActKind k : kAllUserActs) out += "," + std::string(act_name(k));
  out += "\n";
  for (const auto& [name, h] : rows) {
    out += name;
    for (double v : h) out += "," + fixed(v);
    out += "\n";
  }
  return out;
}

namespace {

constexpr std::array<std::string_view, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                      "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string svg_open(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"11\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string curve_svg(const std::vector<std::pair<std::string, std::vector<rl::CurvePoint>>>& curves) {
  constexpr int kW = 640, kH = 400, kLeft = 50, kRight = 140, kTop = 20, kBottom = 40;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  int max_ep = 1;
  for (const auto& [_, c] : curves) {
    for (const auto& p : c) max_ep = std::max(max_ep, p.episode);
  }
  std::string out = svg_open(kW, kH);
  out += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop + (int)ph) +
         "\" x2=\"" + std::to_string(kLeft + (int)pw) + "\" y2=\"" + std::to_string(kTop + (int)ph) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop) + "\" x2=\"" +
         std::to_string(kLeft) + "\" y2=\"" + std::to_string(kTop + (int)ph) +
         "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = kTop + ph * (1.0 - t / 4.0);
    out += "<text x=\"" + std::to_string(kLeft - 30) + "\" y=\"" + fmt2(y + 4) + "\">" +
           fmt2(t / 4.0) + "</text>\n";
  }
  out += "<text x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kH - 10) +
         "\">episodes (max " + std::to_string(max_ep) + ")</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& [name, c] = curves[i];
    const std::string color(kPalette[i % kPalette.size()]);
    out += "<polyline fill=\"none\" stroke=\"" + color + "\" points=\"";
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j) out += " ";
      out += fmt2(kLeft + pw * c[j].episode / max_ep) + "," + fmt2(kTop + ph * (1.0 - c[j].success));
    }
    out += "\"/>\n";
    const double ly = kTop + 14.0 * (i + 1);
    out += "<text x=\"" + std::to_string(kW - kRight + 10) + "\" y=\"" + fmt2(ly) + "\" fill=\"" +
           color + "\">" + name + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string histogram_svg(const std::vector<std::pair<std::string, ActHistogram>>& rows) {
  constexpr int kW = 720, kH = 400, kLeft = 50, kRight = 120, kTop = 20, kBottom = 60;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const double group = pw / kNumUserActs;
  const double bar = rows.empty() ? group : (group * 0.8) / rows.size();
  std::string out = svg_open(kW, kH);
  out += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + fmt2(kTop + ph) + "\" x2=\"" +
         fmt2(kLeft + pw) + "\" y2=\"" + fmt2(kTop + ph) + "\" stroke=\"black\"/>\n";
  for (int a = 0; a < kNumUserActs; ++a) {
    out += "<text x=\"" + fmt2(kLeft + group * a + 2) + "\" y=\"" + fmt2(kTop + ph + 14 + 12 * (a % 2)) +
           "\">" + std::string(act_name(kAllUserActs[a])) + "</text>\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double v = rows[r].second[a];
      out += "<rect x=\"" + fmt2(kLeft + group * a + group * 0.1 + bar * r) + "\" y=\"" +
             fmt2(kTop + ph * (1.0 - v)) + "\" width=\"" + fmt2(bar) + "\" height=\"" +
             fmt2(ph * v) + "\" fill=\"" + std::string(kPalette[r % kPalette.size()]) + "\"/>\n";
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += "<text x=\"" + std::to_string(kW - kRight + 10) + "\" y=\"" + fmt2(kTop + 14.0 * (r + 1)) +
           "\" fill=\"" + std::string(kPalette[r % kPalette.size()]) + "\">" + rows[r].first +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace usersim::eval
