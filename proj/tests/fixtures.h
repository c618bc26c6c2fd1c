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

// Resources trained from the bundled data, shared by the heavier tests.

#ifndef USERSIM_TESTS_FIXTURES_H_
#define USERSIM_TESTS_FIXTURES_H_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "test_util.h"
#include "usersim/resources.h"
#include "usersim/rl.h"

namespace usersim::testing {

inline const Resources& shared_resources() {
  static const Resources r = [] {
    ResourceConfig c;
    c.data_dir = USERSIM_DATA_DIR;
    return load_resources(c);
  }();
  return r;
}

struct EpisodeFixture {
  sys::Nlu nlu;
  rl::FeatureSpace features;
  rl::TrainContext ctx;

  explicit EpisodeFixture(double nlu_noise = 0.0)
      : nlu(*shared_resources().db, nlu_noise),
        features(rl::FeatureSpace::from_corpus(shared_resources().corpus,
                                               *shared_resources().user_bank)) {
    const Resources& r = shared_resources();
    ctx.episode = {r.db.get(), &nlu, r.system_bank.get(), &features, {}};
    ctx.goals = &r.goals;
  }
  EpisodeFixture(const EpisodeFixture&) = delete;
  EpisodeFixture& operator=(const EpisodeFixture&) = delete;
};

// Agenda simulator with a fixed number of slots per inform/request turn and
// no AnythingElse, so its act sequence is a function of the goal.
inline std::unique_ptr<sim::UserSimulator> deterministic_agenda() {
  auto res = shared_resources().simulator_resources();
  res.agenda.p_else = 0.0;
  res.agenda.min_inform = res.agenda.max_inform = 3;
  res.agenda.min_request = res.agenda.max_request = 3;
  return sim::make_simulator("agen-t", res);
}

// Time on `day` at `restaurant` that is fully booked while the next hour is
// free; the fixture goal below exercises the change-time path with it.
inline std::string booked_out_time(const std::string& restaurant, const std::string& day) {
  for (int h = 11; h <= 21; ++h) {
    for (const char* m : {":00", ":15", ":30", ":45"}) {
      std::string t = (h < 10 ? "0" : "") + std::to_string(h) + m;
      std::string next = std::to_string(h + 1) + m;
      if (!sys::booking_available(restaurant, day, t, {}) &&
          sys::booking_available(restaurant, day, next, {})) {
        return t;
      }
    }
  }
  return "";
}

inline Booking make_booking(int people, std::string day, std::string time) {
  Booking b;
  b.people = people;
  b.day = std::move(day);
  b.time = std::move(time);
  return b;
}

// The five fixed goals with their reference act traces.
struct TracedGoal {
  Goal goal;
  std::vector<UserActKind> user;
  std::vector<SystemActKind> system;
  std::vector<bool> system_failed;
};

inline std::vector<TracedGoal> traced_goals() {
  using U = UserActKind;
  using S = SystemActKind;
  std::vector<TracedGoal> out;
  out.push_back({Goal::make("fixture-info",
                            {{Slot::kFood, "italian"}, {Slot::kArea, "centre"},
                             {Slot::kPriceRange, "expensive"}},
                            {Slot::kAddress}, std::nullopt),
                 {U::kInformType, U::kRequestInfo},
                 {S::kPresentResult, S::kProvideInfo},
                 {false, false}});
  out.push_back({Goal::make("fixture-book", {{Slot::kFood, "chinese"}, {Slot::kArea, "north"}}, {},
                            make_booking(2, "friday", "18:00")),
                 {U::kInformType, U::kInformType, U::kMakeReservation},
                 {S::kAskType, S::kPresentResult, S::kInformReservationResult},
                 {false, false, false}});
  out.push_back({Goal::make("fixture-name", {{Slot::kName, "anatolia"}},
                            {Slot::kPhone, Slot::kPostcode}, std::nullopt),
                 {U::kInformType, U::kRequestInfo},
                 {S::kPresentResult, S::kProvideInfo},
                 {false, false}});
  out.push_back({Goal::make("fixture-relax", {{Slot::kFood, "thai"}, {Slot::kArea, "north"}},
                            {Slot::kPhone}, std::nullopt),
                 {U::kInformType, U::kInformType, U::kInformTypeChange, U::kRequestInfo},
                 {S::kAskType, S::kPresentResult, S::kPresentResult, S::kProvideInfo},
                 {false, true, false, false}});
  const std::string t = booked_out_time("la margherita", "saturday");
  out.push_back({Goal::make("fixture-rebook",
                            {{Slot::kFood, "italian"}, {Slot::kArea, "west"},
                             {Slot::kPriceRange, "cheap"}},
                            {}, make_booking(4, "saturday", t)),
                 {U::kInformType, U::kMakeReservation, U::kReservationChangeTime},
                 {S::kPresentResult, S::kInformReservationResult,
                  S::kInformReservationResult},
                 {false, true, false}});
  return out;
}

}  // namespace usersim::testing

#endif  // USERSIM_TESTS_FIXTURES_H_
