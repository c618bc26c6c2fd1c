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

#ifndef USERSIM_RESTAURANT_DB_H_
#define USERSIM_RESTAURANT_DB_H_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "usersim/domain.h"

namespace usersim {

// Immutable restaurant table, sorted by name, with per-value posting lists
// for the informable slots.
class RestaurantDB {
 public:
  RestaurantDB() = default;
  // Throws DomainError on duplicate names or empty fields.
  explicit RestaurantDB(std::vector<Restaurant> restaurants);

  // Reads a JSON array of restaurant records (the layout of the MultiWOZ
  // restaurant_db.json file, and of the bundled fixture).
  static RestaurantDB load(const std::filesystem::path& path);

  // All and only the restaurants satisfying every constraint, ordered by
  // name. kDontCare values match anything; an empty map returns everything.
  std::vector<Restaurant> query(const SlotMap& constraints) const;

  const std::vector<Restaurant>& all() const { return restaurants_; }
  std::size_t size() const { return restaurants_.size(); }
  bool empty() const { return restaurants_.empty(); }
  const Restaurant* find(std::string_view name) const;

  // Distinct values of an informable slot, sorted.
  std::vector<std::string> values(Slot slot) const;

 private:
  std::vector<Restaurant> restaurants_;
  std::map<std::pair<Slot, std::string>, std::vector<std::size_t>> postings_;
};

}  // namespace usersim

#endif  // USERSIM_RESTAURANT_DB_H_
