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

#include "usersim/tfidf.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace usersim::nlg {

double cosine(const SparseVector& a, const SparseVector& b) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [i, w] : a) na += w * w;
  for (const auto& [i, w] : b) nb += w * w;
  std::size_t p = 0, q = 0;
  while (p < a.size() && q < b.size()) {
    if (a[p].first < b[q].first) {
      ++p;
    } else if (b[q].first < a[p].first) {
      ++q;
    } else {
      dot += a[p++].second * b[q++].second;
    }
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

TfIdfIndex::TfIdfIndex(std::vector<RetrievalCandidate> candidates)
    : candidates_(std::move(candidates)) {
  std::map<std::string, int> df;
  for (const auto& c : candidates_) {
    std::set<std::string> seen(c.context.begin(), c.context.end());
    for (const auto& t : seen) ++df[t];
  }
  const double n = static_cast<double>(candidates_.size());
  for (const auto& [term, count] : df) {
    vocab_.emplace(term, static_cast<int>(idf_.size()));
    idf_.push_back(std::log(n / count));
  }
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    vectors_.push_back(vectorize(candidates_[i].context));
    by_key_[candidates_[i].key].push_back(i);
    all_ids_.push_back(i);
  }
  postings_.resize(idf_.size());
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    for (const auto& [id, w] : vectors_[i]) postings_[id].emplace_back(i, w);
  }
}

// Vectors are unit length (or empty), so the cosine is the dot product.
std::vector<double> TfIdfIndex::scores(const SparseVector& q) const {
  std::vector<double> out(candidates_.size(), 0.0);
  for (const auto& [id, wq] : q) {
    for (const auto& [doc, wd] : postings_[id]) out[doc] += wq * wd;
  }
  return out;
}

SparseVector TfIdfIndex::vectorize(const Tokens& tokens) const {
  std::map<int, double> tf;
  for (const auto& t : tokens) {
    auto it = vocab_.find(t);
    if (it != vocab_.end()) tf[it->second] += 1.0;
  }
  SparseVector v;
  double norm = 0;
  for (const auto& [id, count] : tf) {
    double w = count * idf_[id];
    if (w == 0) continue;
    v.emplace_back(id, w);
    norm += w * w;
  }
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (auto& [id, w] : v) w /= norm;
  }
  return v;
}

std::optional<std::size_t> TfIdfIndex::best(const std::vector<std::size_t>& ids,
                                            const Tokens& context) const {
  if (ids.empty()) return std::nullopt;
  auto score = scores(vectorize(context));
  std::size_t arg = ids.front();
  double top = -1.0;
  for (std::size_t id : ids) {
    if (score[id] > top) {
      top = score[id];
      arg = id;
    }
  }
  return arg;
}

std::optional<std::size_t> TfIdfIndex::retrieve(const std::string& key,
                                                const Tokens& context) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return best(it->second, context);
}

std::optional<std::size_t> TfIdfIndex::retrieve_any(const Tokens& context) const {
  return best(all_ids_, context);
}

std::vector<std::size_t> TfIdfIndex::rank(const Tokens& context) const {
  auto score = scores(vectorize(context));
  std::vector<std::size_t> hit, rest;
  for (std::size_t i = 0; i < score.size(); ++i) (score[i] > 0 ? hit : rest).push_back(i);
  std::stable_sort(hit.begin(), hit.end(),
                   [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  hit.insert(hit.end(), rest.begin(), rest.end());
  return hit;
}

double TfIdfIndex::idf(const std::string& term) const {
  auto it = vocab_.find(term);
  return it == vocab_.end() ? 0.0 : idf_[it->second];
}

Json TfIdfIndex::to_json() const {
  Json out = Json::object();
  Json cands = Json::array();
  for (const auto& c : candidates_) {
    cands.push_back({{"context", c.context}, {"key", c.key}, {"utterance", c.utterance}});
  }
  out["candidates"] = std::move(cands);
  Json idf = Json::object();
  for (const auto& [term, id] : vocab_) idf[term] = idf_[id];
  out["idf"] = std::move(idf);
  return out;
}

TfIdfIndex TfIdfIndex::from_json(const Json& j) {
  std::vector<RetrievalCandidate> cands;
  for (const auto& c : j.at("candidates")) {
    cands.push_back({c.at("context").get<Tokens>(), c.at("key").get<std::string>(),
                     c.at("utterance").get<std::string>()});
  }
  return TfIdfIndex(std::move(cands));
}

}  // namespace usersim::nlg
