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

#include "usersim/user_nlg.h"

#include <algorithm>
#include <set>

namespace usersim::nlg {

std::string act_signature(UserActKind kind, const SlotMap& slots) {
  std::vector<std::string> parts;
  for (const auto& [slot, value] : slots) {
    std::string name(slot_name(slot));
    if (value.empty()) name = "?" + name;
    else if (value == kDontCare) name = "~" + name;
    parts.push_back(std::move(name));
  }
  std::sort(parts.begin(), parts.end());
  std::string out(act_name(kind));
  out += '|';
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

Tokens retrieval_context(const corpus::Delexicalizer& delex, std::string_view system_utterance,
                         std::string_view last_user_utterance) {
  Tokens out = delex.apply(tokenize(system_utterance));
  for (auto& t : delex.apply(tokenize(last_user_utterance))) out.push_back(std::move(t));
  return out;
}

std::vector<UserUtterance> collect_user_utterances(const std::vector<Dialog>& annotated,
                                                   const corpus::Delexicalizer& delex) {
  std::vector<UserUtterance> out;
  for (const auto& d : annotated) {
    std::string prev_system, prev_user;
    for (const auto& t : d.turns) {
      if (t.speaker == Speaker::kSystem) {
        prev_system = t.utterance;
        continue;
      }
      if (!t.user_act) continue;
      UserUtterance u;
      u.dialog_id = d.id;
      u.act = *t.user_act;
      u.delexicalized = delex.apply(tokenize(t.utterance), t.user_act->slots);
      u.context = retrieval_context(delex, prev_system, prev_user);
      SlotMap recovered;
      for (const auto& tok : u.delexicalized) {
        if (auto s = corpus::placeholder_slot(tok)) recovered[*s] = "x";
      }
      for (const auto& [slot, value] : u.act.slots) {
        if (value.empty() || value == kDontCare) recovered[slot] = value;
      }
      u.signature = act_signature(u.act.kind, recovered);
      out.push_back(std::move(u));
      prev_user = t.utterance;
    }
  }
  return out;
}

namespace {

// Every valued slot must survive generation as its placeholder.
bool conveys_slots(const Tokens& tokens, const SlotMap& slots) {
  for (const auto& [slot, value] : slots) {
    if (value.empty() || value == kDontCare) continue;
    if (std::find(tokens.begin(), tokens.end(), corpus::placeholder(slot)) == tokens.end()) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string TemplateUserNlg::realize(const UserAct& act, const Tokens&, Rng& rng) {
  ++stats_.calls;
  return render_template(*bank_, template_key(act), act.slots, rng);
}

RetrievalUserNlg::RetrievalUserNlg(std::shared_ptr<const TfIdfIndex> index,
                                   std::shared_ptr<const TemplateBank> fallback)
    : index_(std::move(index)), fallback_(std::move(fallback)) {}

std::string RetrievalUserNlg::realize(const UserAct& act, const Tokens& context, Rng& rng) {
  ++stats_.calls;
  if (auto id = index_->retrieve(act_signature(act), context)) {
    try {
      return lexicalize(index_->candidate(*id).utterance, act.slots);
    } catch (const NlgError&) {
    }
  }
  ++stats_.fallbacks;
  return fallback_.realize(act, context, rng);
}

GenerationUserNlg::GenerationUserNlg(std::shared_ptr<const CondNgramLM> lm,
                                     std::shared_ptr<const TemplateBank> fallback,
                                     double temperature)
    : lm_(std::move(lm)), fallback_(std::move(fallback)), temperature_(temperature) {}

std::string GenerationUserNlg::realize(const UserAct& act, const Tokens& context, Rng& rng) {
  ++stats_.calls;
  if (auto tokens = lm_->generate(act_signature(act), rng, temperature_);
      tokens && conveys_slots(*tokens, act.slots)) {
    try {
      std::string text = lexicalize(join(*tokens), act.slots);
      if (!text.empty()) return text;
    } catch (const NlgError&) {
    }
  }
  ++stats_.fallbacks;
  return fallback_.realize(act, context, rng);
}

TfIdfIndex build_user_index(const std::vector<UserUtterance>& utterances) {
  std::vector<RetrievalCandidate> cands;
  cands.reserve(utterances.size());
  for (const auto& u : utterances) cands.push_back({u.context, u.signature, join(u.delexicalized)});
  return TfIdfIndex(std::move(cands));
}

CondNgramLM build_user_lm(const std::vector<UserUtterance>& utterances, double k) {
  std::vector<std::pair<std::string, Tokens>> data;
  for (const auto& u : utterances) data.emplace_back(u.signature, u.delexicalized);
  return train_cond_lm(data, k);
}

}  // namespace usersim::nlg
