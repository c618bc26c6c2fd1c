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

// Template natural language generation and lexicalization.
//
// Templates are delexicalized strings. Besides `<slot>` placeholders two
// list placeholders exist: `<slot_list>` renders the words of every slot the
// act carries without a value (requested or asked-for slots), `<dontcare>`
// those of every slot whose value is "dontcare".

#ifndef USERSIM_NLG_H_
#define USERSIM_NLG_H_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "usersim/domain.h"
#include "usersim/text.h"

namespace usersim::nlg {

class NlgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSlotList = "<slot_list>";
inline constexpr std::string_view kDontCareList = "<dontcare>";

// Bank key of an act: its name, with "_failed" appended for failed
// system results.
std::string template_key(const UserAct& act);
std::string template_key(const SystemAct& act);

class TemplateBank {
 public:
  // One `key<TAB>template` per line; blank lines and lines starting with
  // '#' are skipped. Templates are stored in canonical token form.
  static TemplateBank parse(std::string_view tsv);
  static TemplateBank load(const std::filesystem::path& path);

  void add(const std::string& key, std::string_view text);
  bool contains(std::string_view key) const;
  const std::vector<std::string>& templates(std::string_view key) const;
  std::vector<std::string> keys() const;
  std::size_t size() const;

  // Throws NlgError if a key has fewer than `min_templates` templates or an
  // unknown placeholder.
  void validate(const std::vector<std::string>& required_keys, std::size_t min_templates = 2) const;

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> bank_;
};

// "address", "address and phone number", "area , food and price range".
std::string slot_list_words(const std::vector<Slot>& slots);

// Renders `slots` with templates of `key`. Each step keeps the templates
// whose placeholders are all fillable (from the remaining slots, or from
// `presented`) and that convey the largest number of remaining slots, then
// picks one uniformly. Steps repeat until every slot has been conveyed; the
// sentences are joined with a space. Throws NlgError when nothing fits.
std::string render_template(const TemplateBank& bank, std::string_view key, const SlotMap& slots,
                            Rng& rng, const Restaurant* presented = nullptr);

// The templates the first render step chooses among.
std::vector<std::string> candidate_templates(const TemplateBank& bank, std::string_view key,
                                             const SlotMap& slots,
                                             const Restaurant* presented = nullptr);

// Replaces `<slot>` placeholders by slot values, falling back to the
// presented restaurant; list placeholders are expanded as described above.
// Throws NlgError on anything unresolvable, so no `<...>` survives.
std::string lexicalize(std::string_view delexicalized, const SlotMap& slots,
                       const Restaurant* presented = nullptr);

}  // namespace usersim::nlg

#endif  // USERSIM_NLG_H_
