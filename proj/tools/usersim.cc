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

// usersim: corpus ingestion, policy training, evaluation, the chat service
// and a terminal chat.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "usersim/eval.h"
#include "usersim/resources.h"
#include "usersim/rl.h"
#include "usersim/service.h"

namespace fs = std::filesystem;
using namespace usersim;

namespace {

struct Globals {
  std::string data_dir = "data";
  double nlu_noise = 0.0;
};

Resources load(const Globals& g) {
  std::cerr << "loading resources from " << g.data_dir << " ...\n";
  ResourceConfig c;
  c.data_dir = g.data_dir;
  return load_resources(c);
}

// Everything an episode needs beyond the simulator.
struct Context {
  sys::Nlu nlu;
  rl::FeatureSpace features;
  rl::TrainContext ctx;
  Context(const Resources& r, double noise)
      : nlu(*r.db, noise), features(rl::FeatureSpace::from_corpus(r.corpus, *r.user_bank)) {
    ctx.episode = {r.db.get(), &nlu, r.system_bank.get(), &features, {}};
    ctx.goals = &r.goals;
  }
};

void check_sim(const std::string& id) {
  if (!sim::is_simulator_id(id)) {
    throw CLI::ValidationError("--sim", "unknown simulator " + id +
                                            " (agen-t, agen-r, agen-g, sl-t, sl-r, sl-e)");
  }
}

std::vector<rl::CurvePoint> read_curve(const fs::path& path) {
  std::vector<rl::CurvePoint> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    out.push_back({std::stoi(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return out;
}

// ---------------------------------------------------------------------------

void corpus_ingest(const Globals& g, const std::string& input, const fs::path& out) {
  auto db = RestaurantDB::load(fs::path(g.data_dir) / "restaurants.json");
  corpus::Annotator annotator(db);
  auto [dialogs, report] = corpus::annotate_user_acts(corpus::load_corpus(input), annotator);
  auto goals = corpus::build_goal_db(dialogs, derive_seed(7, "goals"));
  fs::create_directories(out);
  write_jsonl(out / "annotated.jsonl", dialogs);
  Json gj{{"goals", goals.goals},
          {"pre_balance_reservation_share", goals.pre_balance_reservation_share},
          {"post_balance_reservation_share", goals.post_balance_reservation_share},
          {"augmented", goals.augmented}};
  write_file_atomic(out / "goals.json", gj.dump(1) + "\n");
  write_file_atomic(out / "restaurants.json", Json(db.all()).dump(1) + "\n");
  Json per_act = Json::object();
  for (UserActKind k : kAllUserActs) {
    auto it = report.per_act.find(k);
    per_act[std::string(act_name(k))] = it == report.per_act.end() ? 0 : it->second;
  }
  Json rj{{"dialogs", dialogs.size()},
          {"user_turns", report.user_turns},
          {"matched", report.matched},
          {"match_rate", report.match_rate()},
          {"per_act", per_act}};
  write_file_atomic(out / "annotation_report.json", rj.dump(1) + "\n");
  std::cout << dialogs.size() << " restaurant dialogs, match rate " << report.match_rate()
            << ", " << goals.goals.size() << " goals -> " << out.string() << "\n";
}

struct TrainOptions {
  rl::RlConfig rl;
  std::string policy = "linear";
};

rl::TrainResult train_one(const Resources& r, const Globals& g, const std::string& sim_id,
                          const TrainOptions& o, const fs::path& out) {
  rl::RlConfig c = o.rl;
  c.policy = o.policy == "mlp" ? rl::PolicyKind::kMlp : rl::PolicyKind::kLinear;
  Context cx(r, g.nlu_noise);
  auto simulator = r.simulator(sim_id);
  std::cerr << "training against " << sim_id << " for up to " << c.max_episodes << " episodes\n";
  rl::TrainResult res = rl::train(*simulator, cx.ctx, c);
  rl::write_training_outputs(out, res, cx.features, c, sim_id);
  const auto hit = res.checkpoints_to_target();
  std::cout << sim_id << ": " << res.episodes << " episodes, final success "
            << (res.curve.empty() ? 0.0 : res.curve.back().success) << ", checkpoints to "
            << c.target << ": " << (hit ? std::to_string(*hit) : "not reached") << " -> " << out.string()
            << "\n";
  return res;
}

void eval_metrics(const Resources& r, const Globals& g, const std::string& sim_id,
                  const eval::MetricsConfig& mc, const fs::path& out) {
  std::vector<std::string> ids;
  if (sim_id == "all") {
    ids.assign(sim::kSimulatorIds.begin(), sim::kSimulatorIds.end());
  } else {
    check_sim(sim_id);
    ids.push_back(sim_id);
  }
  eval::MetricsConfig c = mc;
  c.nlu_noise = g.nlu_noise;
  Json reports = Json::array();
  std::vector<std::pair<std::string, eval::ActHistogram>> hist;
  hist.emplace_back("corpus", eval::act_histogram(r.corpus, *r.annotator));
  for (const auto& id : ids) {
    auto m = eval::compute_metrics(r, id, c);
    reports.push_back(m.report.to_json());
    hist.emplace_back(id, m.report.acts);
    std::cout << id << ": ppl " << m.report.ppl << ", vocab " << m.report.vocab << ", utt "
              << m.report.avg_utt_len << ", success " << m.report.success << "\n";
  }
  fs::create_directories(out);
  const Json doc{{"config", c.to_json()}, {"config_hash", eval::config_hash(c.to_json())},
                 {"reports", reports}};
  write_file_atomic(out / "metrics.json", doc.dump(1) + "\n");
  write_file_atomic(out / "act_hist.csv", eval::act_hist_csv(hist));
  write_file_atomic(out / "hist.svg", eval::histogram_svg(hist));
  std::cout << "wrote metrics.json, act_hist.csv, hist.svg to " << out.string() << "\n";
}

void eval_cross(const Resources& r, const Globals& g, const fs::path& policies, int episodes,
                std::uint64_t seed, const fs::path& out) {
  auto systems = eval::load_systems(policies);
  std::vector<std::string> sims(sim::kSimulatorIds.begin(), sim::kSimulatorIds.end());
  std::cerr << "cross study: " << sims.size() << " x " << systems.size() << " cells, " << episodes
            << " episodes each\n";
  auto m = eval::cross_study(r, sims, systems, episodes, seed, g.nlu_noise);
  fs::create_directories(out);
  write_file_atomic(out / "cross_matrix.csv", m.to_csv());
  write_file_atomic(out / "cross_matrix.json", m.to_json().dump(1) + "\n");
  std::vector<std::pair<std::string, std::vector<rl::CurvePoint>>> curves;
  for (const auto& id : sims) {
    const auto path = policies / id / "curve.csv";
    if (fs::exists(path)) curves.emplace_back(id, read_curve(path));
  }
  if (!curves.empty()) write_file_atomic(out / "curve.svg", eval::curve_svg(curves));
  std::cout << m.to_csv();
}

std::vector<eval::SystemSpec> available_systems(const fs::path& dir) {
  std::vector<eval::SystemSpec> out;
  if (dir.empty()) return out;
  for (auto id : sim::kSimulatorIds) {
    const auto path = dir / std::string(id) / "policy.json";
    if (!fs::exists(path)) continue;
    auto [p, f] = rl::load_policy(path);
    out.push_back({"sys-" + std::string(id), std::move(p), std::move(f)});
  }
  return out;
}

service::HttpServer* g_server = nullptr;

void serve(const Resources& r, const Globals& g, const fs::path& policies, const std::string& host,
           int port, const fs::path& store) {
  service::ServiceConfig c;
  c.store_dir = store;
  c.nlu_noise = g.nlu_noise;
  service::SessionManager manager(r, available_systems(policies), c);
  service::HttpServer server(manager);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "serving";
  for (const auto& s : manager.systems()) std::cout << " " << s;
  std::cout << " on http://" << host << ":" << port << std::endl;
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on port " + std::to_string(port));
}

// The human plays the user against a system.
void chat_as_user(const Resources& r, const Globals& g, const std::string& policy) {
  std::vector<eval::SystemSpec> systems;
  std::string system_id(service::SessionManager::kRuleSystem);
  if (policy != "rule") {
    auto [p, f] = rl::load_policy(policy);
    systems.push_back({"policy", std::move(p), std::move(f)});
    system_id = "policy";
  }
  service::ServiceConfig c;
  c.store_dir = fs::temp_directory_path() / "usersim_chat";
  c.nlu_noise = g.nlu_noise;
  service::SessionManager manager(r, std::move(systems), c);
  auto created = manager.create_session(system_id);
  std::cout << created.goal_text << "\n";
  std::string line;
  while (std::cout << "you> " << std::flush && std::getline(std::cin, line)) {
    if (line.empty()) continue;
    auto reply = manager.post_message(created.session_id, line);
    std::cout << "system> " << reply.reply << "\n";
    if (reply.done) break;
  }
  std::cout << "outcome: " << manager.session(created.session_id).outcome() << "\n";
}

// The human plays the system: pick an act each turn, the simulator answers.
void chat_as_system(const Resources& r, const Globals& g, const std::string& sim_id,
                    std::uint64_t seed) {
  check_sim(sim_id);
  Context cx(r, g.nlu_noise);
  auto simulator = r.simulator(sim_id);
  Rng goals(derive_seed(seed, "chat-goals"));
  const Goal& goal = corpus::sample_goal(r.goals, goals);
  std::cout << "user goal: " << service::goal_instructions(goal) << "\n";
  simulator->reset(goal, derive_seed(seed, "simulator"));
  Rng rng(derive_seed(seed, "episode"));
  DialogState state;
  std::optional<SystemAct> sys_act;
  std::string sys_utt;
  while (true) {
    sim::SimTurn u = simulator->respond(sys_act, sys_utt);
    std::cout << "user> " << u.utterance << "\n";
    state = sys::track(state, cx.nlu.parse(u.utterance, &rng));
    if (u.done) break;
    const auto mask = sys::mask(state);
    std::cout << "acts:";
    for (auto a : kAllSystemActs) {
      if (sys::allowed(mask, a)) std::cout << " " << index_of(a) << "=" << act_name(a);
    }
    std::cout << "\n";
    int k = -1;
    std::string line;
    while (std::cout << "act> " << std::flush && std::getline(std::cin, line)) {
      try {
        k = std::stoi(line);
      } catch (const std::exception&) {
        k = -1;
      }
      if (k >= 0 && k < kNumSystemActs && sys::allowed(mask, kAllSystemActs[k])) break;
      std::cout << "pick one of the listed act numbers\n";
      k = -1;
    }
    if (k < 0) break;
    SystemAct act = sys::execute_action(kAllSystemActs[k], state, *r.db, goal.id, {});
    state = sys::apply_system_act(state, act, *r.db);
    sys_utt = sys::render_system(act, state, *r.system_bank, rng);
    sys_act = act;
    std::cout << "system> " << sys_utt << "\n";
    const Outcome o = goal_satisfied(goal, state);
    if (o != Outcome::kOngoing || act.kind == SystemActKind::kGoodbye || state.turn >= kMaxTurns) {
      break;
    }
  }
  std::cout << "outcome: " << outcome_name(goal_satisfied(goal, state) == Outcome::kSuccess
                                               ? Outcome::kSuccess
                                               : Outcome::kFailure)
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"usersim: user simulators, dialog policy training and evaluation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--data", g.data_dir, "Data directory")->capture_default_str();
  app.add_option("--nlu-noise", g.nlu_noise, "Probability of corrupting an NLU parse")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  // corpus ingest
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus tools");
  corpus_cmd->require_subcommand(1);
  auto* ingest = corpus_cmd->add_subcommand("ingest", "Annotate a corpus and build the goal set");
  std::string input;
  fs::path ingest_out = "corpus_out";
  ingest->add_option("--input", input, "MultiWOZ-format JSON file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "Output directory")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a policy against one simulator");
  auto* train_all = app.add_subcommand("train-all", "Train one policy per simulator");
  TrainOptions topt;
  std::string train_sim;
  fs::path train_out = "policies";
  train_cmd->add_option("--sim", train_sim, "Simulator id")->required();
  for (auto* cmd : {train_cmd, train_all}) {
    cmd->add_option("--episodes", topt.rl.max_episodes, "Episode budget")->capture_default_str();
    cmd->add_option("--seed", topt.rl.seed, "Seed")->capture_default_str();
    cmd->add_option("--out", train_out, "Output directory")->capture_default_str();
    cmd->add_option("--policy", topt.policy, "linear or mlp")
        ->check(CLI::IsMember({"linear", "mlp"}))
        ->capture_default_str();
    cmd->add_option("--hidden", topt.rl.hidden, "MLP hidden units")->capture_default_str();
    cmd->add_option("--lr", topt.rl.learning_rate, "Learning rate")->capture_default_str();
    cmd->add_option("--batch", topt.rl.batch_size, "Episodes per update")->capture_default_str();
    cmd->add_option("--epsilon", topt.rl.epsilon, "Exploration rate")->capture_default_str();
    cmd->add_option("--eval-every", topt.rl.eval_every, "Episodes per checkpoint")
        ->capture_default_str();
    cmd->add_option("--eval-dialogs", topt.rl.eval_dialogs, "Dialogs per checkpoint")
        ->capture_default_str();
    cmd->add_option("--patience", topt.rl.patience,
                    "Stop after this many consecutive checkpoints at target")
        ->capture_default_str();
  }

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Automatic metrics and the cross study");
  eval_cmd->require_subcommand(1);
  auto* metrics = eval_cmd->add_subcommand("metrics", "Perplexity, vocabulary, length, acts");
  std::string metrics_sim = "all";
  eval::MetricsConfig mc;
  fs::path eval_out = "eval_out";
  metrics->add_option("--sim", metrics_sim, "Simulator id or all")->capture_default_str();
  metrics->add_option("--dialogs", mc.dialogs, "Simulated dialogs")->capture_default_str();
  metrics->add_option("--test-utterances", mc.test_utterances, "Corpus utterances to score")
      ->capture_default_str();
  metrics->add_option("--seed", mc.seed, "Seed")->capture_default_str();
  metrics->add_option("--out", eval_out, "Output directory")->capture_default_str();
  auto* cross = eval_cmd->add_subcommand("cross", "Every system against every simulator");
  fs::path cross_policies = "policies";
  int cross_episodes = 200;
  std::uint64_t cross_seed = 1;
  cross->add_option("--policies", cross_policies, "Directory with <sim>/policy.json")
      ->capture_default_str();
  cross->add_option("--episodes", cross_episodes, "Episodes per cell")->capture_default_str();
  cross->add_option("--seed", cross_seed, "Seed")->capture_default_str();
  cross->add_option("--out", eval_out, "Output directory")->capture_default_str();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP chat and survey service");
  int port = 8080;
  std::string host = "127.0.0.1";
  fs::path serve_policies, store = "service_store";
  serve_cmd->add_option("--port", port, "Port")->capture_default_str();
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--policies", serve_policies, "Directory with <sim>/policy.json");
  serve_cmd->add_option("--store", store, "Transcript and survey directory")->capture_default_str();

  // chat
  auto* chat = app.add_subcommand("chat", "Terminal chat");
  std::string chat_sim, chat_policy;
  std::uint64_t chat_seed = 1;
  auto* sim_opt = chat->add_option("--sim", chat_sim, "Talk to a simulator by picking system acts");
  auto* pol_opt =
      chat->add_option("--policy", chat_policy, "policy.json path or rule; you play the user");
  sim_opt->excludes(pol_opt);
  chat->add_option("--seed", chat_seed, "Seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      corpus_ingest(g, input, ingest_out);
      return 0;
    }
    if (chat->parsed() && chat_sim.empty() && chat_policy.empty()) {
      throw CLI::ValidationError("chat", "give --sim or --policy");
    }
    if (train_cmd->parsed()) check_sim(train_sim);
    const Resources r = load(g);
    if (train_cmd->parsed()) {
      train_one(r, g, train_sim, topt, train_out);
    } else if (train_all->parsed()) {
      std::vector<std::pair<std::string, std::vector<rl::CurvePoint>>> curves;
      for (auto id : sim::kSimulatorIds) {
        auto res = train_one(r, g, std::string(id), topt, train_out / std::string(id));
        curves.emplace_back(std::string(id), res.curve);
      }
      write_file_atomic(train_out / "curve.svg", eval::curve_svg(curves));
    } else if (metrics->parsed()) {
      eval_metrics(r, g, metrics_sim, mc, eval_out);
    } else if (cross->parsed()) {
      eval_cross(r, g, cross_policies, cross_episodes, cross_seed, eval_out);
    } else if (serve_cmd->parsed()) {
      serve(r, g, serve_policies, host, port, store);
    } else if (chat->parsed()) {
      if (!chat_sim.empty()) {
        chat_as_system(r, g, chat_sim, chat_seed);
      } else {
        chat_as_user(r, g, chat_policy);
      }
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
