// Copyright 2026 The P6 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// The fuzzing environment. A mutation dictionary is mined from the program
// layouts, the control plane rules and the query literals; a finite action
// space mutates packets field by field; an environment binds one query
// condition to one switch and turns its fail verdicts into rewards.

#ifndef P6_FUZZ_H_
#define P6_FUZZ_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p6/control_plane.h"
#include "p6/p4q.h"
#include "p6/packet.h"
#include "p6/program.h"
#include "p6/rng.h"
#include "p6/switch.h"

namespace p6 {

// Octet positions encoded into a state vector; longer packets are cut off,
// shorter ones padded with zeros.
inline constexpr int kStateOctets = 64;

// Octet counts for the structural grow/shrink actions (K = 2 variants).
inline constexpr int kStructuralSizes[] = {1, 8};

enum class ActionKind {
  kSetFieldDictLow,
  kSetFieldDictHigh,
  kSetFieldRandom,
  kSetFieldZero,
  kSetFieldMax,
  kRecomputeChecksum,
  kCorruptChecksum,
  kAppendRandomOctets,
  kTruncateOctets,
};

struct MutationAction {
  ActionKind kind = ActionKind::kSetFieldZero;
  std::string header;  // set_field_* actions only
  std::string field;
  int octets = 0;  // append / truncate only

  bool operator==(const MutationAction&) const = default;
  std::string describe() const;
};

// Union of the three mining sources. Boundary and forwarding values are
// stored per field and always fit the field's bit width.
struct MutationDictionary {
  std::vector<HeaderLayout> layouts;               // declaration order
  std::vector<BoundaryValue> field_boundary_values;  // from query literals
  std::vector<BoundaryValue> forwarding_values;      // from table entry keys
  std::vector<uint64_t> clone_session_ids;
  std::vector<uint64_t> multicast_group_ids;

  // All dictionary values for one field, ascending and deduplicated.
  std::vector<uint64_t> values_for(const std::string& header, const std::string& field) const;
  int field_count() const;
};

MutationDictionary build_dictionary(const StaticAnalysis& analysis, const ControlPlane& config,
                                    const std::vector<Query>& queries);

// Stable, duplicate-free action list: five set actions per field, the two
// checksum actions, then one append and one truncate per structural size.
std::vector<MutationAction> enumerate_actions(const MutationDictionary& dict);

// Returns a mutated copy; the input packet is never modified. Set actions
// locate their header by walking the dictionary layouts (a layout with an
// 'ihl' field has dynamic length) and are no-ops when the header is not
// present. Writing ihl >= 5 resizes the options region, zero-filling new
// octets. Structural actions clamp to the legal frame lengths.
PacketBytes apply_action(const PacketBytes& packet, const MutationAction& action,
                         const MutationDictionary& dict, Rng& rng);

// encoding[i] = octet_i / 255 for i < packet length, 0 beyond it.
using FuzzState = std::vector<float>;
FuzzState encode_state(const PacketBytes& packet);

struct FuzzOptions {
  int max_episode_len = 32;
};

struct StepOutcome {
  FuzzState state;  // encoding of the packet that was sent
  double reward = 0;
  bool terminal = false;
  std::vector<ConditionVerdict> verdicts;
  PacketBytes packet;
};

struct EpisodeStep {
  PacketBytes packet;
  std::optional<MutationAction> action;  // empty when a policy sent raw bytes
  std::vector<ConditionVerdict> verdicts;
  double reward = 0;
  bool terminal = false;
};

struct EpisodeLog {
  std::vector<EpisodeStep> steps;
  int packets_sent = 0;
};

// One test case: one query condition judged on one switch. The reward is
// exactly the indicator of a fail verdict for the bound condition, and an
// episode ends on the first reward or after max_episode_len steps.
class FuzzEnv {
 public:
  FuzzEnv(const Switch& sw, Query query, int condition_index, MutationDictionary dict,
          std::vector<PacketBytes> seeds, uint64_t seed, FuzzOptions options = {});

  // Starts a new episode from the next seed packet (round robin).
  FuzzState reset();

  // Mutates the current packet with actions()[action_index] and sends it.
  StepOutcome step(int action_index);

  // Replaces the current packet and sends it; used by the baselines.
  StepOutcome send(const PacketBytes& packet);

  const std::vector<MutationAction>& actions() const { return actions_; }
  const MutationDictionary& dictionary() const { return dict_; }
  const EpisodeLog& episode() const { return episode_; }
  const PacketBytes& current() const { return current_; }
  const Query& query() const { return query_; }
  int condition_index() const { return condition_index_; }
  int total_packets_sent() const { return total_sent_; }
  Rng& rng() { return rng_; }

 private:
  StepOutcome observe(std::optional<MutationAction> action);

  const Switch& switch_;
  Query query_;
  int condition_index_;
  MutationDictionary dict_;
  std::vector<MutationAction> actions_;
  std::vector<PacketBytes> seeds_;
  Rng rng_;
  FuzzOptions options_;
  PacketBytes current_;
  EpisodeLog episode_;
  int episode_steps_ = 0;
  std::size_t seed_cursor_ = 0;
  int total_sent_ = 0;
};

// One well-formed packet per destination mined from the rules, or a single
// default packet when the rules name none.
std::vector<PacketBytes> make_seed_packets(const MutationDictionary& dict);

// Baseline policies. The advanced baseline shares the agent's action space;
// the IPv4 baseline redraws every fixed IPv4 field except the destination
// address, leaving options and the frame length alone and recomputing
// nothing; the naive baseline emits uniformly random frames of 14 to 128
// octets.
int policy_advanced(int action_count, Rng& rng);
PacketBytes policy_ipv4(const PacketBytes& seed, Rng& rng);
PacketBytes policy_naive(Rng& rng);

}  // namespace p6

#endif  // P6_FUZZ_H_
