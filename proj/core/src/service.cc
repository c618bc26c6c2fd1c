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

#include "usersim/service.h"

#include <cmath>
#include <ctime>
#include <fstream>

#include "httplib.h"

namespace usersim::service {
namespace {

constexpr std::array<const char*, 4> kLikertItems = {"satisfaction", "efficiency", "naturalness",
                                                     "rule_likeness"};

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string day_of(std::chrono::system_clock::time_point t) { return iso_time(t).substr(0, 10); }

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += i + 1 == words.size() ? " and " : ", ";
    out += words[i];
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void SurveyResult::validate() const {
  if (solved != 1.0 && solved != 0.5 && solved != 0.0) {
    throw ServiceError(400, "solved must be 1, 0.5 or 0");
  }
  for (int v : {satisfaction, efficiency, naturalness, rule_likeness}) {
    if (v < 1 || v > 5) throw ServiceError(400, "ratings must be integers from 1 to 5");
  }
}

Json SurveyResult::to_json() const {
  return Json{{"solved", solved},
              {"satisfaction", satisfaction},
              {"efficiency", efficiency},
              {"naturalness", naturalness},
              {"rule_likeness", rule_likeness}};
}

SurveyResult SurveyResult::from_json(const Json& j) {
  if (!j.is_object()) throw ServiceError(400, "survey must be a JSON object");
  SurveyResult s;
  if (!j.contains("solved") || !j["solved"].is_number()) {
    throw ServiceError(400, "survey field solved must be a number");
  }
  s.solved = j["solved"].get<double>();
  int* fields[] = {&s.satisfaction, &s.efficiency, &s.naturalness, &s.rule_likeness};
  for (std::size_t i = 0; i < kLikertItems.size(); ++i) {
    const char* k = kLikertItems[i];
    if (!j.contains(k) || !j[k].is_number_integer()) {
      throw ServiceError(400, std::string("survey field ") + k + " must be an integer");
    }
    *fields[i] = j[k].get<int>();
  }
  s.validate();
  return s;
}

std::string_view status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::kOpen: return "open";
    case SessionStatus::kClosed: return "closed";
    case SessionStatus::kAbandoned: return "abandoned";
  }
  return "open";
}

std::string Session::outcome() const {
  if (status == SessionStatus::kAbandoned) return "abandoned";
  if (status == SessionStatus::kOpen) return "ongoing";
  return succeeded ? "success" : "failure";
}

Json Session::to_json() const {
  Json j{{"session_id", id},
         {"system_id", system_id},
         {"seed", seed},
         {"status", status_name(status)},
         {"outcome", outcome()},
         {"created", iso_time(created)},
         {"closed", closed ? Json(iso_time(*closed)) : Json(nullptr)},
         {"goal", goal},
         {"goal_text", goal_instructions(goal)},
         {"transcript", transcript.turns},
         {"survey", survey ? survey->to_json() : Json(nullptr)}};
  return j;
}

std::string goal_instructions(const Goal& goal) {
  std::string text = "Find a restaurant";
  std::vector<std::string> parts;
  for (const auto& [slot, value] : goal.constraints) {
    switch (slot) {
      case Slot::kName: parts.push_back("called " + value); break;
      case Slot::kFood: parts.push_back("that serves " + value + " food"); break;
      case Slot::kArea:
        parts.push_back(value == "centre" ? "in the centre" : "in the " + value + " of town");
        break;
      case Slot::kPriceRange: parts.push_back("with " + value + " prices"); break;
      default: break;
    }
  }
  if (!parts.empty()) text += " " + join_words(parts);
  text += ".";
  if (!goal.requestables.empty()) {
    std::vector<std::string> words;
    for (Slot s : goal.requestables) words.emplace_back(slot_words(s));
    text += " Ask for its " + join_words(words) + ".";
  }
  if (goal.booking) {
    const Booking& b = *goal.booking;
    text += " Then book a table for " + std::to_string(b.people.value_or(1)) +
            (b.people.value_or(1) == 1 ? " person" : " people") + " on " + b.day.value_or("") +
            " at " + b.time.value_or("") +
            ". If that time is taken, try one hour later. Get the booking reference.";
  }
  text += " Say goodbye when you are done.";
  return text;
}

std::pair<double, double> mean_ci95(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

// ---------------------------------------------------------------------------

struct SessionManager::SystemEntry {
  std::string id;
  std::optional<rl::Policy> policy;
  rl::FeatureSpace features;
  rl::Chooser chooser;
};

struct SessionManager::Slot {
  std::mutex mu;
  Session s;
  Rng rng;
  const SystemEntry* system = nullptr;
};

SessionManager::SessionManager(const Resources& resources, std::vector<eval::SystemSpec> systems,
                               ServiceConfig config, Clock clock)
    : resources_(resources),
      config_(std::move(config)),
      clock_(std::move(clock)),
      nlu_(*resources.db, config_.nlu_noise),
      goal_rng_(derive_seed(config_.seed, "service-goals")) {
  auto rule = std::make_unique<SystemEntry>();
  rule->id = std::string(kRuleSystem);
  rule->features = rl::FeatureSpace::from_corpus(resources.corpus, *resources.user_bank);
  rule->chooser = rl::rule_chooser();
  systems_.emplace(rule->id, std::move(rule));
  for (auto& spec : systems) {
    if (systems_.count(spec.id)) throw ServiceError(400, "duplicate system id " + spec.id);
    auto e = std::make_unique<SystemEntry>();
    e->id = spec.id;
    e->policy = std::move(spec.policy);
    e->features = std::move(spec.features);
    e->chooser = e->policy ? rl::policy_chooser(*e->policy, 0.0) : rl::rule_chooser();
    systems_.emplace(e->id, std::move(e));
  }
  std::filesystem::create_directories(config_.store_dir / "transcripts");
  std::filesystem::create_directories(config_.store_dir / "surveys");
  load_store();
}

SessionManager::~SessionManager() = default;

void SessionManager::load_store() {
  const auto index_path = config_.store_dir / "index.json";
  index_ = Json{{"sessions", Json::object()}};
  if (std::filesystem::exists(index_path)) index_ = Json::parse(read_file(index_path));
  for (const auto& [id, entry] : index_["sessions"].items()) {
    if (!entry.value("survey", false)) continue;
    Json j = Json::parse(read_file(config_.store_dir / "surveys" / (id + ".json")));
    surveys_.emplace_back(j.at("system_id").get<std::string>(),
                          SurveyResult::from_json(j.at("survey")));
  }
  counter_ = index_["sessions"].size();
}

void SessionManager::write_index() {
  write_file_atomic(config_.store_dir / "index.json", index_.dump(1) + "\n");
}

std::vector<std::string> SessionManager::systems() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : systems_) out.push_back(id);
  return out;
}

Created SessionManager::create_session(std::string_view system_id) {
  auto it = systems_.find(system_id);
  if (it == systems_.end()) throw ServiceError(404, "unknown system " + std::string(system_id));
  expire_idle();
  auto slot = std::make_shared<Slot>();
  slot->system = it->second.get();
  Session& s = slot->s;
  s.system_id = it->first;
  s.created = s.last_activity = clock_();
  {
    std::lock_guard lock(mu_);
    std::lock_guard store(store_mu_);
    do {
      s.id = hex64(derive_seed(config_.seed, "session-id", counter_));
      s.seed = derive_seed(config_.seed, "session-episode", counter_);
      ++counter_;
    } while (sessions_.count(s.id) || index_["sessions"].contains(s.id));
    s.goal = corpus::sample_goal(resources_.goals, goal_rng_);
    sessions_.emplace(s.id, slot);
  }
  s.transcript.id = s.id;
  s.transcript.goal = s.goal;
  // Same stream as the offline episode loop, so transcripts replay.
  slot->rng.seed(derive_seed(s.seed, "episode"));
  return {s.id, s.system_id, goal_instructions(s.goal)};
}

std::shared_ptr<SessionManager::Slot> SessionManager::find(std::string_view session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session " + std::string(session_id));
  return it->second;
}

void SessionManager::close(Slot& slot, SessionStatus status) {
  Session& s = slot.s;
  s.status = status;
  s.closed = clock_();
  s.transcript.outcome = s.succeeded ? Outcome::kSuccess : Outcome::kFailure;
  persist_closed(s);
}

void SessionManager::persist_closed(const Session& s) {
  std::lock_guard lock(store_mu_);
  const std::string day = day_of(*s.closed);
  const auto path = config_.store_dir / "transcripts" / (day + ".jsonl");
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot append to " + path.string());
    out << s.to_json().dump() << "\n";
  }
  index_["sessions"][s.id] = Json{{"system_id", s.system_id},
                                  {"day", day},
                                  {"status", status_name(s.status)},
                                  {"outcome", s.outcome()},
                                  {"survey", false}};
  write_index();
}

Reply SessionManager::post_message(std::string_view session_id, std::string_view text) {
  auto slot = find(session_id);
  std::lock_guard lock(slot->mu);
  Session& s = slot->s;
  const auto now = clock_();
  if (s.status == SessionStatus::kOpen && now - s.last_activity >= config_.idle_timeout) {
    close(*slot, SessionStatus::kAbandoned);
  }
  if (s.status != SessionStatus::kOpen) throw ServiceError(409, "session is closed");
  s.last_activity = now;

  Turn ut;
  ut.speaker = Speaker::kUser;
  ut.utterance = canonical(text);
  s.transcript.turns.push_back(std::move(ut));

  const SystemEntry& sysent = *slot->system;
  s.state = sys::track(s.state, nlu_.parse(text, &slot->rng));
  const rl::RlState x = sysent.features.featurize(s.state, text);
  const sys::ActionMask mask = sys::mask(s.state);
  const SystemActKind action = sysent.chooser(s.state, x, mask, slot->rng);
  SystemAct act = sys::execute_action(action, s.state, *resources_.db, s.goal.id, {});
  s.state = sys::apply_system_act(s.state, act, *resources_.db);
  Reply r;
  r.reply = sys::render_system(act, s.state, *resources_.system_bank, slot->rng);

  Turn st;
  st.speaker = Speaker::kSystem;
  st.utterance = r.reply;
  st.system_act = act;
  st.state = s.state;
  s.transcript.turns.push_back(std::move(st));

  if (goal_satisfied(s.goal, s.state) == Outcome::kSuccess) s.succeeded = true;
  r.done = action == SystemActKind::kGoodbye || s.state.user_done || s.state.turn >= kMaxTurns;
  if (r.done) close(*slot, SessionStatus::kClosed);
  return r;
}

void SessionManager::post_survey(std::string_view session_id, const SurveyResult& survey) {
  survey.validate();
  auto slot = find(session_id);
  std::lock_guard lock(slot->mu);
  Session& s = slot->s;
  if (s.status == SessionStatus::kOpen) throw ServiceError(409, "session is still open");
  if (s.survey) throw ServiceError(409, "survey already submitted");
  std::lock_guard store(store_mu_);
  const Json record{{"session_id", s.id}, {"system_id", s.system_id}, {"survey", survey.to_json()}};
  write_file_atomic(config_.store_dir / "surveys" / (s.id + ".json"), record.dump(1) + "\n");
  s.survey = survey;
  index_["sessions"][s.id]["survey"] = true;
  write_index();
  surveys_.emplace_back(s.system_id, survey);
}

Session SessionManager::session(std::string_view session_id) const {
  auto slot = find(session_id);
  std::lock_guard lock(slot->mu);
  return slot->s;
}

int SessionManager::expire_idle() {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard lock(mu_);
    for (const auto& [_, slot] : sessions_) slots.push_back(slot);
  }
  const auto now = clock_();
  int n = 0;
  for (const auto& slot : slots) {
    std::lock_guard lock(slot->mu);
    if (slot->s.status == SessionStatus::kOpen &&
        now - slot->s.last_activity >= config_.idle_timeout) {
      close(*slot, SessionStatus::kAbandoned);
      ++n;
    }
  }
  return n;
}

Json SessionManager::survey_report() const {
  std::lock_guard lock(store_mu_);
  std::vector<std::string> ids = systems();
  for (const auto& [id, _] : surveys_) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  Json rows = Json::array();
  for (const auto& id : ids) {
    std::vector<double> solved;
    std::array<std::vector<double>, kLikertItems.size()> likert;
    for (const auto& [sid, s] : surveys_) {
      if (sid != id) continue;
      solved.push_back(s.solved);
      const int vals[] = {s.satisfaction, s.efficiency, s.naturalness, s.rule_likeness};
      for (std::size_t i = 0; i < likert.size(); ++i) likert[i].push_back(vals[i]);
    }
    int success = 0, finished = 0;
    for (const auto& [_, entry] : index_["sessions"].items()) {
      if (entry["system_id"] != id) continue;
      const std::string o = entry["outcome"];
      if (o == "abandoned") continue;
      ++finished;
      success += o == "success";
    }
    Json row{{"system_id", id}, {"surveys", solved.size()}};
    auto [m, h] = mean_ci95(solved);
    row["solved"] = Json{{"mean", m}, {"ci95", h}};
    for (std::size_t i = 0; i < likert.size(); ++i) {
      auto [lm, lh] = mean_ci95(likert[i]);
      row[kLikertItems[i]] = Json{{"mean", lm}, {"ci95", lh}};
    }
    row["dialogs"] = finished;
    row["success_rate"] = finished ? static_cast<double>(success) / finished : 0.0;
    rows.push_back(std::move(row));
  }
  return Json{{"systems", rows}};
}

// ---------------------------------------------------------------------------
// HTTP

struct HttpServer::Impl {
  SessionManager& manager;
  httplib::Server server;

  explicit Impl(SessionManager& m) : manager(m) {}

  static void respond(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename F>
  static httplib::Server::Handler wrap(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const ServiceError& e) {
        respond(res, e.status(), Json{{"error", e.what()}});
      } catch (const Json::exception& e) {
        respond(res, 400, Json{{"error", std::string("bad request: ") + e.what()}});
      } catch (const std::exception& e) {
        respond(res, 500, Json{{"error", e.what()}});
      }
    };
  }

  static Json body(const httplib::Request& req) {
    Json j = Json::parse(req.body);
    if (!j.is_object()) throw ServiceError(400, "request body must be a JSON object");
    return j;
  }

  void routes() {
    server.Get("/systems", wrap([this](const httplib::Request&, httplib::Response& res) {
                 respond(res, 200, Json{{"systems", manager.systems()}});
               }));
    server.Get("/reports/surveys", wrap([this](const httplib::Request&, httplib::Response& res) {
                 respond(res, 200, manager.survey_report());
               }));
    server.Post("/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
                  Json j = body(req);
                  if (!j.contains("system_id") || !j["system_id"].is_string()) {
                    throw ServiceError(400, "system_id is required");
                  }
                  Created c = manager.create_session(j["system_id"].get<std::string>());
                  respond(res, 201,
                          Json{{"session_id", c.session_id},
                               {"system_id", c.system_id},
                               {"goal_text", c.goal_text}});
                }));
    server.Get(R"(/sessions/([^/]+))",
               wrap([this](const httplib::Request& req, httplib::Response& res) {
                 respond(res, 200, manager.session(req.matches[1].str()).to_json());
               }));
    server.Post(R"(/sessions/([^/]+)/messages)",
                wrap([this](const httplib::Request& req, httplib::Response& res) {
                  Json j = body(req);
                  if (!j.contains("text") || !j["text"].is_string()) {
                    throw ServiceError(400, "text is required");
                  }
                  Reply r = manager.post_message(req.matches[1].str(), j["text"].get<std::string>());
                  respond(res, 200, Json{{"reply", r.reply}, {"done", r.done}});
                }));
    server.Post(R"(/sessions/([^/]+)/survey)",
                wrap([this](const httplib::Request& req, httplib::Response& res) {
                  manager.post_survey(req.matches[1].str(), SurveyResult::from_json(body(req)));
                  respond(res, 201, Json{{"stored", true}});
                }));
  }
};

HttpServer::HttpServer(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {
  impl_->routes();
}

HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_to_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace usersim::service
