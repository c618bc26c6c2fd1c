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

#ifndef USERSIM_COND_LM_H_
#define USERSIM_COND_LM_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "usersim/serialization.h"
#include "usersim/text.h"

namespace usersim::nlg {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

// Trigram model over delexicalized tokens, one count table per act key and
// a vocabulary shared by all keys (every training token plus "</s>").
// P(w | u v) = (c(u v w) + k) / (c(u v) + k |V|).
class CondNgramLM {
 public:
  static constexpr int kMaxTokens = 30;

  explicit CondNgramLM(double k = 0.1) : k_(k) {}

  void add(const std::string& key, const Tokens& tokens);

  bool has_key(const std::string& key) const { return keys_.count(key) > 0; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  double k() const { return k_; }

  double prob(const std::string& key, const std::string& u, const std::string& v,
              const std::string& w) const;
  // Next-token distribution over the vocabulary, in vocabulary order. Unseen
  // (u v) contexts back off to the bigram, then the unigram counts of the key.
  std::vector<double> next(const std::string& key, const std::string& u,
                           const std::string& v) const;

  // temperature 0 is greedy (ties to the first token in vocabulary order).
  // nullopt for an unseen key.
  std::optional<Tokens> generate(const std::string& key, Rng& rng,
                                 double temperature = 0.0) const;

  Json to_json() const;
  static CondNgramLM from_json(const Json& j);

 private:
  struct Table {
    std::map<std::tuple<std::string, std::string, std::string>, int> tri;
    std::map<std::pair<std::string, std::string>, int> tri_ctx;
    std::map<std::pair<std::string, std::string>, int> bi;
    std::map<std::string, int> bi_ctx;
    std::map<std::string, int> uni;
    int total = 0;
    std::vector<Tokens> sentences;
  };
  int index_of(const std::string& token) const;

  double k_;
  std::map<std::string, Table> keys_;
  std::vector<std::string> vocab_;  // sorted
};

// Collects (key, tokens) pairs and builds the model. Keys with fewer than
// `min_per_key` sentences are dropped.
CondNgramLM train_cond_lm(const std::vector<std::pair<std::string, Tokens>>& data,
                          double k = 0.1, std::size_t min_per_key = 1);

}  // namespace usersim::nlg

#endif  // USERSIM_COND_LM_H_
