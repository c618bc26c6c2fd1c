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

// Shared vocabulary of the restaurant task: slots, user and system dialog
// acts, goals, the system-side dialog state and dialog transcripts.

#ifndef USERSIM_DOMAIN_H_
#define USERSIM_DOMAIN_H_

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace usersim {

// Maximum number of exchanges (system turns) in one dialog.
inline constexpr int kMaxTurns = 10;

// Value used for an informable the user explicitly has no preference on.
inline constexpr std::string_view kDontCare = "dontcare";

enum class SlotCategory { kInformable, kRequestable, kBooking };

enum class Slot {
  kFood,
  kArea,
  kPriceRange,
  kName,
  kAddress,
  kPhone,
  kPostcode,
  kReference,
  kPeople,
  kDay,
  kTime,
};

inline constexpr std::array<Slot, 11> kAllSlots = {
    Slot::kFood,    Slot::kArea,     Slot::kPriceRange, Slot::kName,
    Slot::kAddress, Slot::kPhone,    Slot::kPostcode,   Slot::kReference,
    Slot::kPeople,  Slot::kDay,      Slot::kTime};

// The informables a user searches with (name excluded: it short-circuits).
inline constexpr std::array<Slot, 3> kSearchSlots = {Slot::kFood, Slot::kArea,
                                                     Slot::kPriceRange};
inline constexpr std::array<Slot, 3> kInfoSlots = {Slot::kAddress, Slot::kPhone,
                                                   Slot::kPostcode};
inline constexpr std::array<Slot, 3> kBookingSlots = {Slot::kPeople, Slot::kDay,
                                                      Slot::kTime};

SlotCategory category(Slot slot);
std::string_view slot_name(Slot slot);
std::optional<Slot> parse_slot(std::string_view name);
// Surface words for a slot, e.g. "price range" or "phone number".
std::string_view slot_words(Slot slot);

using SlotMap = std::map<Slot, std::string>;

// The seven user dialog acts.
enum class UserActKind {
  kInformType,
  kInformTypeChange,
  kAnythingElse,
  kRequestInfo,
  kMakeReservation,
  kReservationChangeTime,
  kGoodbye,
};
inline constexpr int kNumUserActs = 7;
inline constexpr std::array<UserActKind, kNumUserActs> kAllUserActs = {
    UserActKind::kInformType,      UserActKind::kInformTypeChange,
    UserActKind::kAnythingElse,    UserActKind::kRequestInfo,
    UserActKind::kMakeReservation, UserActKind::kReservationChangeTime,
    UserActKind::kGoodbye};

// The six system dialog acts (the RL action space).
enum class SystemActKind {
  kAskType,
  kPresentResult,
  kProvideInfo,
  kAskReservationInfo,
  kInformReservationResult,
  kGoodbye,
};
inline constexpr int kNumSystemActs = 6;
inline constexpr std::array<SystemActKind, kNumSystemActs> kAllSystemActs = {
    SystemActKind::kAskType,
    SystemActKind::kPresentResult,
    SystemActKind::kProvideInfo,
    SystemActKind::kAskReservationInfo,
    SystemActKind::kInformReservationResult,
    SystemActKind::kGoodbye};

std::string_view act_name(UserActKind kind);
std::string_view act_name(SystemActKind kind);
std::optional<UserActKind> parse_user_act(std::string_view name);
std::optional<SystemActKind> parse_system_act(std::string_view name);

inline int index_of(UserActKind k) { return static_cast<int>(k); }
inline int index_of(SystemActKind k) { return static_cast<int>(k); }

// Thrown when a value violates a domain invariant.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A user dialog act. Construct through make(); the slot categories allowed
// for each kind are enforced there.
struct UserAct {
  UserActKind kind = UserActKind::kInformType;
  SlotMap slots;

  static UserAct make(UserActKind kind, SlotMap slots = {});
  bool operator==(const UserAct&) const = default;
};

// True when `slot` may be attached to an act of `kind`.
bool slot_allowed(UserActKind kind, Slot slot);

struct SystemAct {
  SystemActKind kind = SystemActKind::kAskType;
  SlotMap slots;
  // PresentResult with no match, or InformReservationResult that failed.
  bool failed = false;

  bool operator==(const SystemAct&) const = default;
};

struct Booking {
  std::optional<int> people;
  std::optional<std::string> day;
  std::optional<std::string> time;

  bool complete() const { return people && day && time; }
  bool operator==(const Booking&) const = default;
};

enum class Subtask { kAskInfo, kMakeReservation };

struct Goal {
  std::string id;
  SlotMap constraints;        // informables only
  std::set<Slot> requestables;
  std::optional<Booking> booking;  // complete when present
  std::vector<Subtask> subtasks;

  // Builds a goal and derives `subtasks` from requestables and booking.
  static Goal make(std::string id, SlotMap constraints,
                   std::set<Slot> requestables, std::optional<Booking> booking);
  // Throws DomainError when an invariant is violated.
  void validate() const;
  bool has(Subtask t) const;
  bool operator==(const Goal&) const = default;
};

struct Restaurant {
  std::string name;
  std::string food;
  std::string area;
  std::string pricerange;
  std::string address;
  std::string phone;
  std::string postcode;

  // Value of an informable or requestable slot; empty for other slots.
  std::string value(Slot slot) const;
  bool operator==(const Restaurant&) const = default;
};

// Lowercase and collapse runs of whitespace.
std::string normalize_value(std::string_view v);
bool values_match(std::string_view a, std::string_view b);

// System-side tracked state.
struct DialogState {
  SlotMap constraints;  // filled informables, may hold kDontCare
  std::optional<Restaurant> presented;
  std::set<Slot> provided;          // requestables already given to the user
  std::set<Slot> pending_requests;  // asked by the user, not yet provided
  Booking booking;
  bool booking_requested = false;
  bool reservation_confirmed = false;
  bool reservation_failed = false;
  std::string reference;
  std::string booked_restaurant;
  bool no_match = false;     // the last search returned nothing
  std::set<Slot> relaxed;    // constraints changed after a failed search/booking
  int offer_index = 0;       // alternatives presented for the current search
  std::optional<UserActKind> last_user_act;
  bool user_done = false;
  int turn = 0;

  bool search_complete() const;
  void validate() const;
  bool operator==(const DialogState&) const = default;
};

enum class Outcome { kOngoing, kSuccess, kFailure };
std::string_view outcome_name(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view name);

// Success when the presented restaurant satisfies the goal (allowing for
// constraints relaxed after a no-match), every requested slot was provided
// and any booking was confirmed as asked. Failure once the turn cap is hit.
Outcome goal_satisfied(const Goal& goal, const DialogState& state);

enum class Speaker { kUser, kSystem };

struct Turn {
  Speaker speaker = Speaker::kUser;
  std::string utterance;  // space-joined tokens
  std::optional<UserAct> user_act;
  std::optional<SystemAct> system_act;
  std::optional<DialogState> state;
  // Native annotation categories of corpus system turns.
  std::vector<std::string> categories;

  bool operator==(const Turn&) const = default;
};

struct Dialog {
  std::string id;
  Goal goal;
  std::vector<Turn> turns;
  Outcome outcome = Outcome::kOngoing;

  int user_turns() const;
  bool operator==(const Dialog&) const = default;
};

}  // namespace usersim

#endif  // USERSIM_DOMAIN_H_
