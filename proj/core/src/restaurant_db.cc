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

#include "usersim/restaurant_db.h"

#include <algorithm>
#include <set>

#include "usersim/serialization.h"

namespace usersim {

RestaurantDB::RestaurantDB(std::vector<Restaurant> restaurants)
    : restaurants_(std::move(restaurants)) {
  for (auto& r : restaurants_) {
    for (std::string* f : {&r.name, &r.food, &r.area, &r.pricerange, &r.address,
                           &r.phone, &r.postcode}) {
      *f = normalize_value(*f);
      if (f->empty()) throw DomainError("restaurant record with an empty field");
    }
  }
  std::sort(restaurants_.begin(), restaurants_.end(),
            [](const Restaurant& a, const Restaurant& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < restaurants_.size(); ++i) {
    if (restaurants_[i].name == restaurants_[i - 1].name) {
      throw DomainError("duplicate restaurant name '" + restaurants_[i].name + "'");
    }
  }
  for (std::size_t i = 0; i < restaurants_.size(); ++i) {
    for (Slot s : {Slot::kName, Slot::kFood, Slot::kArea, Slot::kPriceRange}) {
      postings_[{s, restaurants_[i].value(s)}].push_back(i);
    }
  }
}

RestaurantDB RestaurantDB::load(const std::filesystem::path& path) {
  auto j = Json::parse(read_file(path));
  std::vector<Restaurant> rows;
  for (const auto& item : j) {
    Restaurant r;
    r.name = item.at("name").get<std::string>();
    r.food = item.at("food").get<std::string>();
    r.area = item.at("area").get<std::string>();
    r.pricerange = item.at("pricerange").get<std::string>();
    r.address = item.value("address", "");
    r.phone = item.value("phone", "");
    r.postcode = item.value("postcode", "");
    // MultiWOZ has a few records without a phone; keep them queryable
    if (r.phone.empty()) r.phone = "unknown";
    if (r.postcode.empty()) r.postcode = "unknown";
    if (r.address.empty()) r.address = "unknown";
    rows.push_back(std::move(r));
  }
  return RestaurantDB(std::move(rows));
}

std::vector<Restaurant> RestaurantDB::query(const SlotMap& constraints) const {
  std::vector<std::size_t> hits(restaurants_.size());
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i] = i;
  for (const auto& [slot, raw] : constraints) {
    if (category(slot) != SlotCategory::kInformable) {
      throw DomainError("query on non-informable slot " + std::string(slot_name(slot)));
    }
    std::string value = normalize_value(raw);
    if (value == kDontCare) continue;
    auto it = postings_.find({slot, value});
    if (it == postings_.end()) return {};
    std::vector<std::size_t> next;
    std::set_intersection(hits.begin(), hits.end(), it->second.begin(), it->second.end(),
                          std::back_inserter(next));
    hits.swap(next);
    if (hits.empty()) break;
  }
  std::vector<Restaurant> out;
  out.reserve(hits.size());
  for (std::size_t i : hits) out.push_back(restaurants_[i]);
  return out;
}

const Restaurant* RestaurantDB::find(std::string_view name) const {
  auto key = normalize_value(name);
  auto it = std::lower_bound(restaurants_.begin(), restaurants_.end(), key,
                             [](const Restaurant& r, const std::string& k) { return r.name < k; });
  if (it == restaurants_.end() || it->name != key) return nullptr;
  return &*it;
}

std::vector<std::string> RestaurantDB::values(Slot slot) const {
  std::set<std::string> out;
  for (const auto& r : restaurants_) out.insert(r.value(slot));
  return {out.begin(), out.end()};
}

}  // namespace usersim
