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

#ifndef USERSIM_TFIDF_H_
#define USERSIM_TFIDF_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "usersim/serialization.h"
#include "usersim/text.h"

namespace usersim::nlg {

// Sparse vector: (term id, weight), sorted by term id.
using SparseVector = std::vector<std::pair<int, double>>;

double cosine(const SparseVector& a, const SparseVector& b);

struct RetrievalCandidate {
  Tokens context;
  std::string key;        // act kind, optionally with a slot signature
  std::string utterance;  // stored (possibly delexicalized) response
};

// Bag-of-words TF-IDF index over candidate contexts. Term weights are raw
// counts times idf = ln(N / df), N the number of candidates; vectors are
// L2-normalized.
class TfIdfIndex {
 public:
  TfIdfIndex() = default;
  explicit TfIdfIndex(std::vector<RetrievalCandidate> candidates);

  SparseVector vectorize(const Tokens& tokens) const;

  // Candidate id with the highest cosine among those whose key is `key`;
  // ties go to the lowest id. nullopt when no candidate has that key.
  std::optional<std::size_t> retrieve(const std::string& key, const Tokens& context) const;
  // Same over every candidate.
  std::optional<std::size_t> retrieve_any(const Tokens& context) const;
  // Every candidate id ordered by decreasing cosine, ties by id.
  std::vector<std::size_t> rank(const Tokens& context) const;
  // Cosine of the context with every candidate, indexed by id.
  std::vector<double> similarities(const Tokens& context) const { return scores(vectorize(context)); }

  const RetrievalCandidate& candidate(std::size_t id) const { return candidates_.at(id); }
  std::size_t size() const { return candidates_.size(); }
  bool empty() const { return candidates_.empty(); }
  bool has_key(const std::string& key) const { return by_key_.count(key) > 0; }
  double idf(const std::string& term) const;
  const SparseVector& vector(std::size_t id) const { return vectors_.at(id); }

  Json to_json() const;
  static TfIdfIndex from_json(const Json& j);

 private:
  std::optional<std::size_t> best(const std::vector<std::size_t>& ids, const Tokens& context) const;
  std::vector<double> scores(const SparseVector& query) const;

  std::vector<RetrievalCandidate> candidates_;
  std::map<std::string, int> vocab_;
  std::vector<double> idf_;
  std::vector<SparseVector> vectors_;
  std::vector<std::vector<std::pair<std::size_t, double>>> postings_;  // term -> (id, weight)
  std::map<std::string, std::vector<std::size_t>> by_key_;
  std::vector<std::size_t> all_ids_;
};

}  // namespace usersim::nlg

#endif  // USERSIM_TFIDF_H_
