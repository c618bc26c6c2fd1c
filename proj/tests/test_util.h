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

#ifndef USERSIM_TESTS_TEST_UTIL_H_
#define USERSIM_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "usersim/domain.h"
#include "usersim/restaurant_db.h"

namespace usersim::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(USERSIM_DATA_DIR) / name;
}

inline const RestaurantDB& fixture_db() {
  static const RestaurantDB db = RestaurantDB::load(data_path("restaurants.json"));
  return db;
}

struct GoldUtterance {
  UserActKind act;
  SlotMap slots;
  std::string text;
};

// act<TAB>slots<TAB>utterance; slots as "food=italian;area=centre" or
// "address;phone" for requestables.
inline std::vector<GoldUtterance> load_gold() {
  std::ifstream in(data_path("gold_user_acts.tsv"));
  std::vector<GoldUtterance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string act, slots, text;
    std::getline(row, act, '\t');
    std::getline(row, slots, '\t');
    std::getline(row, text);
    GoldUtterance g{*parse_user_act(act), {}, text};
    std::istringstream items(slots);
    std::string item;
    while (std::getline(items, item, ';')) {
      if (item.empty()) continue;
      auto eq = item.find('=');
      auto slot = parse_slot(item.substr(0, eq));
      g.slots[*slot] = eq == std::string::npos ? "" : item.substr(eq + 1);
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace usersim::testing

#endif  // USERSIM_TESTS_TEST_UTIL_H_
