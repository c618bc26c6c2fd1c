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

#include "usersim/cond_lm.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace usersim::nlg {

void CondNgramLM::add(const std::string& key, const Tokens& tokens) {
  Table& t = keys_[key];
  t.sentences.push_back(tokens);
  std::string u(kBos), v(kBos);
  Tokens seq = tokens;
  seq.emplace_back(kEos);
  for (const auto& w : seq) {
    ++t.tri[{u, v, w}];
    ++t.tri_ctx[{u, v}];
    ++t.bi[{v, w}];
    ++t.bi_ctx[v];
    ++t.uni[w];
    ++t.total;
    u = v;
    v = w;
  }
  for (const auto& w : seq) {
    auto it = std::lower_bound(vocab_.begin(), vocab_.end(), w);
    if (it == vocab_.end() || *it != w) vocab_.insert(it, w);
  }
}

int CondNgramLM::index_of(const std::string& token) const {
  auto it = std::lower_bound(vocab_.begin(), vocab_.end(), token);
  if (it == vocab_.end() || *it != token) return -1;
  return static_cast<int>(it - vocab_.begin());
}

double CondNgramLM::prob(const std::string& key, const std::string& u, const std::string& v,
                         const std::string& w) const {
  auto kt = keys_.find(key);
  if (kt == keys_.end()) throw std::out_of_range("unknown lm key '" + key + "'");
  const Table& t = kt->second;
  const double size = static_cast<double>(vocab_.size());
  auto c = t.tri.find({u, v, w});
  auto ctx = t.tri_ctx.find({u, v});
  double num = (c == t.tri.end() ? 0 : c->second) + k_;
  double den = (ctx == t.tri_ctx.end() ? 0 : ctx->second) + k_ * size;
  return num / den;
}

std::vector<double> CondNgramLM::next(const std::string& key, const std::string& u,
                                      const std::string& v) const {
  auto kt = keys_.find(key);
  if (kt == keys_.end()) throw std::out_of_range("unknown lm key '" + key + "'");
  const Table& t = kt->second;
  const double size = static_cast<double>(vocab_.size());
  std::vector<double> p(vocab_.size());
  if (t.tri_ctx.count({u, v})) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) p[i] = prob(key, u, v, vocab_[i]);
  } else if (auto b = t.bi_ctx.find(v); b != t.bi_ctx.end()) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      auto c = t.bi.find({v, vocab_[i]});
      p[i] = ((c == t.bi.end() ? 0 : c->second) + k_) / (b->second + k_ * size);
    }
  } else {
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      auto c = t.uni.find(vocab_[i]);
      p[i] = ((c == t.uni.end() ? 0 : c->second) + k_) / (t.total + k_ * size);
    }
  }
  return p;
}

std::optional<Tokens> CondNgramLM::generate(const std::string& key, Rng& rng,
                                            double temperature) const {
  if (!has_key(key)) return std::nullopt;
  Tokens out;
  std::string u(kBos), v(kBos);
  for (int step = 0; step < kMaxTokens; ++step) {
    std::vector<double> p = next(key, u, v);
    std::size_t pick = 0;
    if (temperature <= 0) {
      pick = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    } else {
      double total = 0;
      for (double& x : p) total += (x = std::pow(x, 1.0 / temperature));
      double r = uniform01(rng) * total;
      pick = p.size() - 1;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if ((r -= p[i]) < 0) {
          pick = i;
          break;
        }
      }
    }
    const std::string& w = vocab_[pick];
    if (w == kEos) break;
    out.push_back(w);
    u = v;
    v = w;
  }
  return out;
}

Json CondNgramLM::to_json() const {
  Json out = Json::object();
  out["k"] = k_;
  Json keys = Json::object();
  for (const auto& [key, t] : keys_) {
    Json sents = Json::array();
    for (const auto& s : t.sentences) sents.push_back(join(s));
    keys[key] = std::move(sents);
  }
  out["sentences"] = std::move(keys);
  return out;
}

CondNgramLM CondNgramLM::from_json(const Json& j) {
  CondNgramLM lm(j.at("k").get<double>());
  for (const auto& [key, sents] : j.at("sentences").items()) {
    for (const auto& s : sents) lm.add(key, tokenize(s.get<std::string>()));
  }
  return lm;
}

CondNgramLM train_cond_lm(const std::vector<std::pair<std::string, Tokens>>& data, double k,
                          std::size_t min_per_key) {
  std::map<std::string, std::size_t> counts;
  for (const auto& [key, tokens] : data) ++counts[key];
  CondNgramLM lm(k);
  for (const auto& [key, tokens] : data) {
    if (counts[key] >= min_per_key) lm.add(key, tokens);
  }
  return lm;
}

}  // namespace usersim::nlg
