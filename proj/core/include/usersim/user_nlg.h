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

// User-side NLG strategies behind one interface, and the corpus view they
// are trained on.

#ifndef USERSIM_USER_NLG_H_
#define USERSIM_USER_NLG_H_

#include <memory>
#include <string>
#include <vector>

#include "usersim/cond_lm.h"
#include "usersim/corpus.h"
#include "usersim/nlg.h"
#include "usersim/tfidf.h"

namespace usersim::nlg {

// "inform_type|area,food", with "?slot" for slots without a value and
// "~slot" for dontcare slots.
std::string act_signature(UserActKind kind, const SlotMap& slots);
inline std::string act_signature(const UserAct& act) { return act_signature(act.kind, act.slots); }

// One annotated corpus user turn, delexicalized, with its retrieval context
// (previous system and previous user utterance, delexicalized).
struct UserUtterance {
  std::string dialog_id;
  UserAct act;
  Tokens delexicalized;
  Tokens context;
  std::string signature;  // act kind + slots recovered from the placeholders
};

std::vector<UserUtterance> collect_user_utterances(const std::vector<Dialog>& annotated,
                                                   const corpus::Delexicalizer& delex);

// Context tokens: delexicalized previous system utterance followed by the
// delexicalized last user utterance.
Tokens retrieval_context(const corpus::Delexicalizer& delex, std::string_view system_utterance,
                         std::string_view last_user_utterance);

struct NlgStats {
  int calls = 0;
  int fallbacks = 0;  // template fallbacks of retrieval/generation
};

class UserNlg {
 public:
  virtual ~UserNlg() = default;
  // `context` comes from retrieval_context().
  virtual std::string realize(const UserAct& act, const Tokens& context, Rng& rng) = 0;
  virtual std::string_view name() const = 0;
  const NlgStats& stats() const { return stats_; }

 protected:
  NlgStats stats_;
};

class TemplateUserNlg : public UserNlg {
 public:
  explicit TemplateUserNlg(std::shared_ptr<const TemplateBank> bank) : bank_(std::move(bank)) {}
  std::string realize(const UserAct& act, const Tokens& context, Rng& rng) override;
  std::string_view name() const override { return "template"; }

 private:
  std::shared_ptr<const TemplateBank> bank_;
};

// TF-IDF retrieval among corpus utterances with the act's signature;
// template fallback when none exists.
class RetrievalUserNlg : public UserNlg {
 public:
  RetrievalUserNlg(std::shared_ptr<const TfIdfIndex> index,
                   std::shared_ptr<const TemplateBank> fallback);
  std::string realize(const UserAct& act, const Tokens& context, Rng& rng) override;
  std::string_view name() const override { return "retrieval"; }

 private:
  std::shared_ptr<const TfIdfIndex> index_;
  TemplateUserNlg fallback_;
};

// Act-conditioned trigram generation, greedy by default; template fallback
// for unseen acts and for outputs that drop a valued slot or cannot be
// lexicalized.
class GenerationUserNlg : public UserNlg {
 public:
  GenerationUserNlg(std::shared_ptr<const CondNgramLM> lm,
                    std::shared_ptr<const TemplateBank> fallback, double temperature = 0.0);
  std::string realize(const UserAct& act, const Tokens& context, Rng& rng) override;
  std::string_view name() const override { return "generation"; }

 private:
  std::shared_ptr<const CondNgramLM> lm_;
  TemplateUserNlg fallback_;
  double temperature_;
};

TfIdfIndex build_user_index(const std::vector<UserUtterance>& utterances);
CondNgramLM build_user_lm(const std::vector<UserUtterance>& utterances, double k = 0.1);

}  // namespace usersim::nlg

#endif  // USERSIM_USER_NLG_H_
