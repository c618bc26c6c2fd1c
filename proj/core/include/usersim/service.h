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

// Live chat sessions against trained systems (or the Rule-System), survey
// collection, file persistence and the HTTP JSON API on top of them.

#ifndef USERSIM_SERVICE_H_
#define USERSIM_SERVICE_H_

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "usersim/eval.h"
#include "usersim/resources.h"
#include "usersim/rl.h"

namespace usersim::service {

// Carries the HTTP status the API layer answers with.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct SurveyResult {
  double solved = 0.0;  // 1, 0.5 or 0
  int satisfaction = 0;
  int efficiency = 0;
  int naturalness = 0;
  int rule_likeness = 0;

  // Throws ServiceError(400) on a value outside its domain.
  void validate() const;
  Json to_json() const;
  static SurveyResult from_json(const Json& j);
};

enum class SessionStatus { kOpen, kClosed, kAbandoned };
std::string_view status_name(SessionStatus s);

using Clock = std::function<std::chrono::system_clock::time_point()>;

struct Session {
  std::string id;
  std::string system_id;
  Goal goal;
  std::uint64_t seed = 0;  // episode seed, for offline replay
  DialogState state;
  Dialog transcript;
  SessionStatus status = SessionStatus::kOpen;
  bool succeeded = false;  // the goal was met at some turn
  std::chrono::system_clock::time_point created;
  std::chrono::system_clock::time_point last_activity;
  std::optional<std::chrono::system_clock::time_point> closed;
  std::optional<SurveyResult> survey;

  // Success, failure, or "abandoned" which stays out of success statistics.
  std::string outcome() const;
  Json to_json() const;
};

// Task instructions shown to the human before chatting.
std::string goal_instructions(const Goal& goal);

struct ServiceConfig {
  std::filesystem::path store_dir = "service_store";
  double nlu_noise = 0.0;
  std::chrono::seconds idle_timeout{30 * 60};
  std::uint64_t seed = 1;
};

struct Created {
  std::string session_id;
  std::string system_id;
  std::string goal_text;
};

struct Reply {
  std::string reply;
  bool done = false;
};

// Owns every session. Calls on different sessions run in parallel; calls
// on one session are serialized.
class SessionManager {
 public:
  static constexpr std::string_view kRuleSystem = "rule";

  // `systems` are trained policies; the Rule-System is always available as
  // "rule". Previously stored surveys are loaded from the store.
  SessionManager(const Resources& resources, std::vector<eval::SystemSpec> systems,
                 ServiceConfig config, Clock clock = std::chrono::system_clock::now);
  ~SessionManager();

  std::vector<std::string> systems() const;
  Created create_session(std::string_view system_id);
  Reply post_message(std::string_view session_id, std::string_view text);
  void post_survey(std::string_view session_id, const SurveyResult& survey);
  Session session(std::string_view session_id) const;
  // Marks sessions idle past the timeout as abandoned; returns how many.
  int expire_idle();
  // Per system: number of surveys and, for every survey item, the mean and
  // the 95% normal-approximation half-width 1.96 * sd / sqrt(n).
  Json survey_report() const;

 private:
  struct Slot;
  struct SystemEntry;

  std::shared_ptr<Slot> find(std::string_view session_id) const;
  void close(Slot& slot, SessionStatus status);
  void persist_closed(const Session& s);
  void write_index();
  void load_store();

  const Resources& resources_;
  ServiceConfig config_;
  Clock clock_;
  sys::Nlu nlu_;
  std::map<std::string, std::unique_ptr<SystemEntry>, std::less<>> systems_;

  mutable std::mutex mu_;  // guards sessions_, goal_rng_, counter_
  std::map<std::string, std::shared_ptr<Slot>, std::less<>> sessions_;
  Rng goal_rng_;
  std::uint64_t counter_ = 0;

  mutable std::mutex store_mu_;  // guards the store files, index_ and surveys_
  Json index_;
  std::vector<std::pair<std::string, SurveyResult>> surveys_;  // (system, survey)
};

// Mean and 1.96 * sd / sqrt(n), sd with n - 1 in the denominator; the
// half-width is 0 for a single value.
std::pair<double, double> mean_ci95(const std::vector<double>& xs);

// The JSON API:
//   POST /sessions                {system_id} -> {session_id, system_id, goal_text}
//   POST /sessions/{id}/messages  {text} -> {reply, done}
//   POST /sessions/{id}/survey    {solved, satisfaction, efficiency,
//                                  naturalness, rule_likeness} -> {stored}
//   GET  /sessions/{id}           session record
//   GET  /systems                 {systems: [...]}
//   GET  /reports/surveys         survey_report()
// Errors answer {error} with the ServiceError status.
class HttpServer {
 public:
  explicit HttpServer(SessionManager& manager);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Blocks until stop().
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace usersim::service

#endif  // USERSIM_SERVICE_H_
