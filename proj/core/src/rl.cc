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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace usersim::rl {

FeatureSpace::FeatureSpace(std::vector<std::string> vocab) : vocab_(std::move(vocab)) {
  std::sort(vocab_.begin(), vocab_.end());
  vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
  for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], static_cast<int>(i));
}

FeatureSpace FeatureSpace::from_corpus(const std::vector<Dialog>& dialogs,
                                       const nlg::TemplateBank& user_bank) {
  std::set<std::string> words;
  for (const auto& d : dialogs) {
    for (const auto& t : d.turns) {
      if (t.speaker != Speaker::kUser) continue;
      for (auto& w : tokenize(t.utterance)) words.insert(std::move(w));
    }
  }
  for (const auto& key : user_bank.keys()) {
    for (const auto& text : user_bank.templates(key)) {
      for (auto& w : tokenize(text)) {
        if (w.front() != '<') words.insert(std::move(w));
      }
    }
  }
  return FeatureSpace({words.begin(), words.end()});
}

std::vector<std::string> FeatureSpace::flag_names() {
  std::vector<std::string> out = {"has_food",   "has_area",    "has_pricerange", "has_name",
                                  "search_complete", "presented", "no_match"};
  for (const char* s : {"address", "phone", "postcode", "reference"}) {
    out.push_back(std::string("pending_") + s);
  }
  for (const char* s : {"address", "phone", "postcode", "reference"}) {
    out.push_back(std::string("provided_") + s);
  }
  for (const char* s : {"people", "day", "time"}) out.push_back(std::string("has_") + s);
  for (const char* s : {"booking_complete", "booking_requested", "reservation_confirmed",
                        "reservation_failed"}) {
    out.emplace_back(s);
  }
  for (UserActKind k : kAllUserActs) out.push_back("user_" + std::string(act_name(k)));
  for (const char* s : {"user_done", "turn_0_2", "turn_3_5", "turn_6_plus", "offered_before",
                        "bias"}) {
    out.emplace_back(s);
  }
  return out;
}

RlState FeatureSpace::featurize(const DialogState& s, std::string_view user_utterance) const {
  RlState x(static_cast<std::size_t>(dim()), 0.0);
  int i = 0;
  for (Slot slot : {Slot::kFood, Slot::kArea, Slot::kPriceRange, Slot::kName}) {
    x[i++] = s.constraints.count(slot) ? 1 : 0;
  }
  x[i++] = s.search_complete();
  x[i++] = s.presented.has_value();
  x[i++] = s.no_match;
  constexpr Slot kReq[] = {Slot::kAddress, Slot::kPhone, Slot::kPostcode, Slot::kReference};
  for (Slot slot : kReq) x[i++] = s.pending_requests.count(slot) ? 1 : 0;
  for (Slot slot : kReq) x[i++] = s.provided.count(slot) ? 1 : 0;
  x[i++] = s.booking.people.has_value();
  x[i++] = s.booking.day.has_value();
  x[i++] = s.booking.time.has_value();
  x[i++] = s.booking.complete();
  x[i++] = s.booking_requested;
  x[i++] = s.reservation_confirmed;
  x[i++] = s.reservation_failed;
  for (UserActKind k : kAllUserActs) x[i++] = s.last_user_act == k;
  x[i++] = s.user_done;
  x[i++] = s.turn <= 2;
  x[i++] = s.turn >= 3 && s.turn <= 5;
  x[i++] = s.turn >= 6;
  x[i++] = s.offer_index > 1;
  x[i++] = 1;
  for (const auto& w : tokenize(user_utterance)) {
    auto it = index_.find(w);
    if (it != index_.end()) x[kNumFlags + it->second] += 1.0;
  }
  return x;
}

double step_reward(Outcome o) {
  double r = -0.1;
  if (o == Outcome::kSuccess) r += 1.0;
  if (o == Outcome::kFailure) r -= 1.0;
  return r;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    g[i] = acc;
  }
  return g;
}

// ---------------------------------------------------------------------------

Policy::Policy(PolicyKind kind, int input_dim, int hidden, std::uint64_t seed)
    : kind_(kind), in_(input_dim), hidden_(kind == PolicyKind::kMlp ? hidden : 0) {
  if (input_dim <= 0) throw RlError("policy input dimension must be positive");
  if (kind_ == PolicyKind::kLinear) {
    params_.assign(static_cast<std::size_t>(kNumSystemActs) * in_, 0.0);
    return;
  }
  if (hidden <= 0) throw RlError("hidden width must be positive");
  const std::size_t n = static_cast<std::size_t>(hidden_) * in_ + hidden_ +
                        static_cast<std::size_t>(kNumSystemActs) * hidden_ + kNumSystemActs;
  params_.assign(n, 0.0);
  Rng rng(derive_seed(seed, "policy-init"));
  const double a = 1.0 / std::sqrt(static_cast<double>(in_));
  for (std::size_t i = 0; i < static_cast<std::size_t>(hidden_) * in_; ++i) {
    params_[i] = (2 * uniform01(rng) - 1) * a;
  }
  const std::size_t w2 = static_cast<std::size_t>(hidden_) * in_ + hidden_;
  const double b = 1.0 / std::sqrt(static_cast<double>(hidden_));
  for (std::size_t i = 0; i < static_cast<std::size_t>(kNumSystemActs) * hidden_; ++i) {
    params_[w2 + i] = (2 * uniform01(rng) - 1) * b * 0.1;
  }
}

namespace {

void hidden_layer(const std::vector<double>& p, int in, int h, const RlState& x,
                  std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(h), 0.0);
  const std::size_t b1 = static_cast<std::size_t>(h) * in;
  for (int j = 0; j < h; ++j) {
    double v = p[b1 + j];
    const double* row = &p[static_cast<std::size_t>(j) * in];
    for (int i = 0; i < in; ++i) {
      if (x[i] != 0) v += row[i] * x[i];
    }
    out[j] = std::tanh(v);
  }
}

}  // namespace

std::array<double, kNumSystemActs> Policy::scores(const RlState& x) const {
  if (static_cast<int>(x.size()) != in_) throw RlError("state dimension mismatch");
  std::array<double, kNumSystemActs> s{};
  if (kind_ == PolicyKind::kLinear) {
    for (int a = 0; a < kNumSystemActs; ++a) {
      const double* row = &params_[static_cast<std::size_t>(a) * in_];
      double v = 0;
      for (int i = 0; i < in_; ++i) {
        if (x[i] != 0) v += row[i] * x[i];
      }
      s[a] = v;
    }
    return s;
  }
  std::vector<double> h;
  hidden_layer(params_, in_, hidden_, x, h);
  const std::size_t w2 = static_cast<std::size_t>(hidden_) * in_ + hidden_;
  const std::size_t b2 = w2 + static_cast<std::size_t>(kNumSystemActs) * hidden_;
  for (int a = 0; a < kNumSystemActs; ++a) {
    double v = params_[b2 + a];
    for (int j = 0; j < hidden_; ++j) v += params_[w2 + a * hidden_ + j] * h[j];
    s[a] = v;
  }
  return s;
}

std::array<double, kNumSystemActs> Policy::probabilities(const RlState& x,
                                                         const sys::ActionMask& mask) const {
  auto s = scores(x);
  std::array<double, kNumSystemActs> p{};
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw RlError("every action is masked");
  }
  double top = -INFINITY;
  for (int a = 0; a < kNumSystemActs; ++a) {
    if (mask[a]) top = std::max(top, s[a]);
  }
  double z = 0;
  for (int a = 0; a < kNumSystemActs; ++a) {
    p[a] = mask[a] ? std::exp(s[a] - top) : 0.0;
    z += p[a];
  }
  for (auto& v : p) v /= z;
  return p;
}

double Policy::log_prob(const RlState& x, const sys::ActionMask& mask, SystemActKind a) const {
  return std::log(probabilities(x, mask)[index_of(a)]);
}

void Policy::accumulate_grad(const RlState& x, const sys::ActionMask& mask, SystemActKind act,
                             double scale, std::vector<double>& grad) const {
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  auto p = probabilities(x, mask);
  std::array<double, kNumSystemActs> ds{};  // d log pi / d score
  for (int a = 0; a < kNumSystemActs; ++a) {
    ds[a] = mask[a] ? ((a == index_of(act) ? 1.0 : 0.0) - p[a]) * scale : 0.0;
  }
  if (kind_ == PolicyKind::kLinear) {
    for (int a = 0; a < kNumSystemActs; ++a) {
      if (ds[a] == 0) continue;
      double* row = &grad[static_cast<std::size_t>(a) * in_];
      for (int i = 0; i < in_; ++i) {
        if (x[i] != 0) row[i] += ds[a] * x[i];
      }
    }
    return;
  }
  std::vector<double> h;
  hidden_layer(params_, in_, hidden_, x, h);
  const std::size_t b1 = static_cast<std::size_t>(hidden_) * in_;
  const std::size_t w2 = b1 + hidden_;
  const std::size_t b2 = w2 + static_cast<std::size_t>(kNumSystemActs) * hidden_;
  std::vector<double> dh(static_cast<std::size_t>(hidden_), 0.0);
  for (int a = 0; a < kNumSystemActs; ++a) {
    if (ds[a] == 0) continue;
    grad[b2 + a] += ds[a];
    for (int j = 0; j < hidden_; ++j) {
      grad[w2 + a * hidden_ + j] += ds[a] * h[j];
      dh[j] += ds[a] * params_[w2 + a * hidden_ + j];
    }
  }
  for (int j = 0; j < hidden_; ++j) {
    const double dz = dh[j] * (1 - h[j] * h[j]);
    if (dz == 0) continue;
    grad[b1 + j] += dz;
    double* row = &grad[static_cast<std::size_t>(j) * in_];
    for (int i = 0; i < in_; ++i) {
      if (x[i] != 0) row[i] += dz * x[i];
    }
  }
}

Json Policy::to_json() const {
  return {{"kind", kind_ == PolicyKind::kLinear ? "linear" : "mlp"},
          {"input_dim", in_},
          {"hidden", hidden_},
          {"params", params_}};
}

Policy Policy::from_json(const Json& j) {
  Policy p;
  std::string kind = j.at("kind").get<std::string>();
  if (kind != "linear" && kind != "mlp") throw RlError("unknown policy kind '" + kind + "'");
  p.kind_ = kind == "linear" ? PolicyKind::kLinear : PolicyKind::kMlp;
  p.in_ = j.at("input_dim").get<int>();
  p.hidden_ = j.at("hidden").get<int>();
  p.params_ = j.at("params").get<std::vector<double>>();
  Policy shape(p.kind_, p.in_, std::max(p.hidden_, 1));
  if (shape.params_.size() != p.params_.size()) throw RlError("policy parameter count mismatch");
  return p;
}

SystemActKind select_action(const Policy& policy, const RlState& x, const sys::ActionMask& mask,
                            double epsilon, Rng& rng) {
  std::vector<int> allowed;
  for (int a = 0; a < kNumSystemActs; ++a) {
    if (mask[a]) allowed.push_back(a);
  }
  if (allowed.empty()) throw RlError("every action is masked");
  if (epsilon > 0 && uniform01(rng) < epsilon) {
    return kAllSystemActs[allowed[uniform_index(rng, allowed.size())]];
  }
  auto p = policy.probabilities(x, mask);
  double u = uniform01(rng);
  for (int a : allowed) {
    if (u < p[a]) return kAllSystemActs[a];
    u -= p[a];
  }
  return kAllSystemActs[allowed.back()];
}

std::vector<double> Trajectory::rewards() const {
  std::vector<double> r;
  for (const auto& s : steps) r.push_back(s.reward);
  return r;
}

Chooser policy_chooser(const Policy& policy, double epsilon) {
  return [&policy, epsilon](const DialogState&, const RlState& x, const sys::ActionMask& m,
                            Rng& rng) { return select_action(policy, x, m, epsilon, rng); };
}

Chooser rule_chooser() {
  return [](const DialogState& s, const RlState&, const sys::ActionMask&, Rng&) {
    return sys::rule_policy(s);
  };
}

Episode run_episode(sim::UserSimulator& simulator, const Goal& goal, std::uint64_t seed,
                    const Chooser& chooser, const EpisodeContext& ctx) {
  Episode ep;
  ep.dialog.id = goal.id;
  ep.dialog.goal = goal;
  Rng rng(derive_seed(seed, "episode"));
  DialogState state;
  std::optional<SystemAct> sys_act;
  std::string sys_utt;
  try {
    simulator.reset(goal, derive_seed(seed, "simulator"));
    while (true) {
      sim::SimTurn u = simulator.respond(sys_act, sys_utt);
      Turn ut;
      ut.speaker = Speaker::kUser;
      ut.utterance = canonical(u.utterance);
      ut.user_act = u.act;
      ep.dialog.turns.push_back(std::move(ut));

      state = sys::track(state, ctx.nlu->parse(u.utterance, &rng));
      Step step;
      step.state = ctx.features->featurize(state, u.utterance);
      step.mask = sys::mask(state);
      step.action = chooser(state, step.state, step.mask, rng);
      if (!sys::allowed(step.mask, step.action)) throw RlError("chooser picked a masked action");
      SystemAct act = sys::execute_action(step.action, state, *ctx.db, goal.id, ctx.backend);
      state = sys::apply_system_act(state, act, *ctx.db);
      std::string text = sys::render_system(act, state, *ctx.system_bank, rng);

      Turn st;
      st.speaker = Speaker::kSystem;
      st.utterance = text;
      st.system_act = act;
      st.state = state;
      ep.dialog.turns.push_back(std::move(st));

      Outcome o = goal_satisfied(goal, state);
      const bool terminal = o != Outcome::kOngoing || u.done ||
                            step.action == SystemActKind::kGoodbye || state.turn >= kMaxTurns;
      if (terminal && o == Outcome::kOngoing) o = Outcome::kFailure;
      step.reward = step_reward(terminal ? o : Outcome::kOngoing);
      ep.trajectory.steps.push_back(std::move(step));
      if (terminal) {
        ep.trajectory.outcome = o;
        break;
      }
      sys_act = act;
      sys_utt = text;
    }
  } catch (const RlError&) {
    throw;
  } catch (const std::exception&) {
    ep.trajectory.aborted = true;
    ep.trajectory.outcome = Outcome::kFailure;
    if (!ep.trajectory.steps.empty()) ep.trajectory.steps.back().reward = step_reward(Outcome::kFailure);
  }
  ep.dialog.outcome = ep.trajectory.outcome;
  return ep;
}

UpdateReport reinforce_update(Policy& policy, const std::vector<Trajectory>& batch,
                              const RlConfig& config) {
  if (batch.empty()) throw RlError("empty batch");
  UpdateReport rep;
  std::vector<std::vector<double>> returns;
  double sum = 0;
  std::size_t count = 0;
  for (const auto& t : batch) {
    returns.push_back(discounted_returns(t.rewards(), config.gamma));
    for (double g : returns.back()) {
      sum += g;
      ++count;
    }
  }
  rep.baseline = config.baseline && count ? sum / static_cast<double>(count) : 0.0;
  std::vector<double> grad(policy.params().size(), 0.0);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& steps = batch[b].steps;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const double adv = returns[b][t] - rep.baseline;
      if (adv == 0) continue;
      policy.accumulate_grad(steps[t].state, steps[t].mask, steps[t].action, adv, grad);
    }
  }
  double norm = 0;
  for (auto& g : grad) {
    g /= static_cast<double>(batch.size());
    norm += g * g;
  }
  rep.grad_norm = std::sqrt(norm);
  if (!std::isfinite(rep.grad_norm)) return rep;
  auto& p = policy.params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += config.learning_rate * grad[i];
  rep.applied = true;
  return rep;
}

Json RlConfig::to_json() const {
  return {{"policy", policy == PolicyKind::kLinear ? "linear" : "mlp"},
          {"hidden", hidden},
          {"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"epsilon", epsilon},
          {"gamma", gamma},
          {"baseline", baseline},
          {"max_episodes", max_episodes},
          {"eval_every", eval_every},
          {"eval_dialogs", eval_dialogs},
          {"target", target},
          {"patience", patience},
          {"seed", seed}};
}

std::optional<int> TrainResult::checkpoints_to_target() const {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].success >= target) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

double evaluate(sim::UserSimulator& simulator, const Chooser& chooser, const TrainContext& ctx,
                int n, std::uint64_t seed) {
  if (n <= 0) throw RlError("evaluation needs at least one dialog");
  Rng goals(derive_seed(seed, "eval-goals"));
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    const Goal& g = corpus::sample_goal(*ctx.goals, goals);
    Episode ep = run_episode(simulator, g, derive_seed(seed, "eval-episode", i), chooser,
                             ctx.episode);
    if (ep.trajectory.outcome == Outcome::kSuccess) ++ok;
  }
  return static_cast<double>(ok) / n;
}

TrainResult train(sim::UserSimulator& simulator, const TrainContext& ctx, const RlConfig& config) {
  if (config.batch_size <= 0 || config.eval_every <= 0 || config.max_episodes <= 0) {
    throw RlError("batch size, eval interval and episode budget must be positive");
  }
  TrainResult res;
  res.target = config.target;
  res.policy = Policy(config.policy, ctx.episode.features->dim(), config.hidden, config.seed);
  Rng goals(derive_seed(config.seed, "train-goals"));
  std::vector<Trajectory> batch;
  int streak = 0;
  double batch_return = 0;
  int batch_success = 0, window = 0;
  for (int ep = 1; ep <= config.max_episodes; ++ep) {
    const Goal& g = corpus::sample_goal(*ctx.goals, goals);
    Episode e = run_episode(simulator, g, derive_seed(config.seed, "train-episode", ep),
                            policy_chooser(res.policy, config.epsilon), ctx.episode);
    batch_return += discounted_returns(e.trajectory.rewards(), config.gamma).front();
    batch_success += e.trajectory.outcome == Outcome::kSuccess;
    ++window;
    batch.push_back(std::move(e.trajectory));
    if (static_cast<int>(batch.size()) == config.batch_size) {
      UpdateReport rep = reinforce_update(res.policy, batch, config);
      if (!rep.applied) {
        res.log.push_back({{"event", "skipped_update"}, {"episode", ep}});
      }
      batch.clear();
    }
    res.episodes = ep;
    if (ep % config.eval_every == 0) {
      double s = evaluate(simulator, policy_chooser(res.policy, 0.0), ctx, config.eval_dialogs,
                          derive_seed(config.seed, "eval"));
      res.curve.push_back({ep, s});
      res.log.push_back({{"event", "checkpoint"},
                         {"episode", ep},
                         {"eval_success", s},
                         {"train_success", static_cast<double>(batch_success) / window},
                         {"train_return", batch_return / window}});
      batch_return = 0;
      batch_success = window = 0;
      streak = s >= config.target ? streak + 1 : 0;
      if (streak >= config.patience) break;
    }
  }
  return res;
}

void save_policy(const std::filesystem::path& path, const Policy& policy,
                 const FeatureSpace& features, const Json& meta) {
  Json j = policy.to_json();
  j["vocab"] = features.vocab();
  j["flags"] = FeatureSpace::flag_names();
  j["meta"] = meta;
  write_file_atomic(path, j.dump() + "\n");
}

std::pair<Policy, FeatureSpace> load_policy(const std::filesystem::path& path) {
  Json j = Json::parse(read_file(path));
  if (j.at("flags").get<std::vector<std::string>>() != FeatureSpace::flag_names()) {
    throw RlError("policy feature schema mismatch");
  }
  FeatureSpace fs(j.at("vocab").get<std::vector<std::string>>());
  Policy p = Policy::from_json(j);
  if (p.input_dim() != fs.dim()) throw RlError("policy input dimension mismatch");
  return {std::move(p), std::move(fs)};
}

void write_training_outputs(const std::filesystem::path& dir, const TrainResult& result,
                            const FeatureSpace& features, const RlConfig& config,
                            std::string_view simulator_id) {
  std::filesystem::create_directories(dir);
  std::string csv = "episode,success\n";
  for (const auto& p : result.curve) {
    char line[64];
    std::snprintf(line, sizeof line, "%d,%.4f\n", p.episode, p.success);
    csv += line;
  }
  write_file_atomic(dir / "curve.csv", csv);
  Json meta = {{"simulator", simulator_id}, {"config", config.to_json()},
               {"episodes", result.episodes}};
  save_policy(dir / "policy.json", result.policy, features, meta);
  std::string log;
  for (const auto& l : result.log) log += l.dump() + "\n";
  write_file_atomic(dir / "train_log.jsonl", log);
}

}  // namespace usersim::rl
