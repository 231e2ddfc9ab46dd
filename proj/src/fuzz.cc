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

#include "p6/fuzz.h"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace p6 {
namespace {

uint64_t width_max(int bit_width) {
  return bit_width >= 64 ? ~0ULL : (1ULL << bit_width) - 1;
}

uint64_t random_value(int bit_width, Rng& rng) {
  return bit_width >= 64 ? rng.next_u64() : rng.below(1ULL << bit_width);
}

// Where a field sits in the frame if the packet reaches that header. Layouts
// are packed in declaration order; a layout with an 'ihl' field occupies
// 4 * ihl octets (its fixed size when ihl < 5).
struct FieldLocation {
  int byte_offset = 0;   // of the enclosing header
  const HeaderLayout* layout = nullptr;
  const HeaderField* field = nullptr;
};

int header_octets_at(const HeaderLayout& layout, const std::vector<uint8_t>& bytes, int offset) {
  const int fixed = layout.bit_size() / 8;
  const HeaderField* ihl = layout.field("ihl");
  if (ihl == nullptr) return fixed;
  const uint64_t v = read_bits(bytes, offset * 8 + ihl->bit_offset, ihl->bit_width);
  return v >= 5 ? static_cast<int>(4 * v) : fixed;
}

std::optional<FieldLocation> locate_field(const MutationDictionary& dict,
                                          const std::vector<uint8_t>& bytes,
                                          const std::string& header, const std::string& field) {
  int offset = 0;
  for (const HeaderLayout& layout : dict.layouts) {
    const int fixed = layout.bit_size() / 8;
    if (offset + fixed > static_cast<int>(bytes.size())) return std::nullopt;
    if (layout.header_name == header) {
      const HeaderField* f = layout.field(field);
      if (f == nullptr) return std::nullopt;
      return FieldLocation{offset, &layout, f};
    }
    offset += header_octets_at(layout, bytes, offset);
  }
  return std::nullopt;
}

// First layout with a checksum field that is present in the frame.
std::optional<FieldLocation> locate_checksum(const MutationDictionary& dict,
                                             const std::vector<uint8_t>& bytes) {
  for (const HeaderLayout& layout : dict.layouts) {
    if (layout.field("checksum") == nullptr) continue;
    return locate_field(dict, bytes, layout.header_name, "checksum");
  }
  return std::nullopt;
}

uint16_t checksum_at(const FieldLocation& loc, const std::vector<uint8_t>& bytes) {
  const int fixed = loc.layout->bit_size() / 8;
  const int total = header_octets_at(*loc.layout, bytes, loc.byte_offset);
  std::vector<uint8_t> fixed_bytes(bytes.begin() + loc.byte_offset,
                                   bytes.begin() + loc.byte_offset + fixed);
  const int avail = static_cast<int>(bytes.size()) - loc.byte_offset - fixed;
  const int opt_len = std::clamp(total - fixed, 0, std::max(0, avail));
  std::vector<uint8_t> options(bytes.begin() + loc.byte_offset + fixed,
                               bytes.begin() + loc.byte_offset + fixed + opt_len);
  return header_image_checksum(*loc.layout, fixed_bytes, options);
}

void write_field(std::vector<uint8_t>& bytes, const FieldLocation& loc, uint64_t value) {
  write_bits(bytes, loc.byte_offset * 8 + loc.field->bit_offset, loc.field->bit_width, value);
}

// Writing a new ihl moves the payload: the options region after the fixed
// header grows or shrinks to 4 * ihl total octets, keeping what it can.
std::vector<uint8_t> resize_for_ihl(std::vector<uint8_t> bytes, const FieldLocation& loc,
                                    uint64_t old_ihl, uint64_t new_ihl) {
  const int fixed = loc.layout->bit_size() / 8;
  const int hdr_start = loc.byte_offset;
  const int old_total = old_ihl >= 5 ? static_cast<int>(4 * old_ihl) : fixed;
  const int new_total = static_cast<int>(4 * new_ihl);
  const int old_end = std::min(hdr_start + old_total, static_cast<int>(bytes.size()));

  std::vector<uint8_t> out(bytes.begin(), bytes.begin() + hdr_start + fixed);
  const int keep = std::min(old_end - hdr_start - fixed, new_total - fixed);
  out.insert(out.end(), bytes.begin() + hdr_start + fixed,
             bytes.begin() + hdr_start + fixed + std::max(0, keep));
  out.resize(hdr_start + new_total, 0);
  out.insert(out.end(), bytes.begin() + old_end, bytes.end());

  if (out.size() > kMaxFrameOctets) {
    out.resize(kMaxFrameOctets);
  } else if (out.size() < kMinFrameOctets) {
    out.resize(kMinFrameOctets, 0);
  }
  return out;
}

}  // namespace

std::string MutationAction::describe() const {
  switch (kind) {
    case ActionKind::kSetFieldDictLow:
      return "set_field_dict_low(" + header + "." + field + ")";
    case ActionKind::kSetFieldDictHigh:
      return "set_field_dict_high(" + header + "." + field + ")";
    case ActionKind::kSetFieldRandom:
      return "set_field_random(" + header + "." + field + ")";
    case ActionKind::kSetFieldZero:
      return "set_field_zero(" + header + "." + field + ")";
    case ActionKind::kSetFieldMax:
      return "set_field_max(" + header + "." + field + ")";
    case ActionKind::kRecomputeChecksum:
      return "recompute_checksum";
    case ActionKind::kCorruptChecksum:
      return "corrupt_checksum";
    case ActionKind::kAppendRandomOctets:
      return "append_random_octets(" + std::to_string(octets) + ")";
    case ActionKind::kTruncateOctets:
      return "truncate_octets(" + std::to_string(octets) + ")";
  }
  return "unknown";
}

std::vector<uint64_t> MutationDictionary::values_for(const std::string& header,
                                                     const std::string& field) const {
  std::vector<uint64_t> out;
  for (const BoundaryValue& v : field_boundary_values) {
    if (v.header == header && v.field == field) out.push_back(v.value);
  }
  for (const BoundaryValue& v : forwarding_values) {
    if (v.header == header && v.field == field) out.push_back(v.value);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int MutationDictionary::field_count() const {
  int n = 0;
  for (const HeaderLayout& l : layouts) n += static_cast<int>(l.fields.size());
  return n;
}

MutationDictionary build_dictionary(const StaticAnalysis& analysis, const ControlPlane& config,
                                    const std::vector<Query>& queries) {
  MutationDictionary dict;
  dict.layouts = analysis.layouts;

  auto field_width = [&](const std::string& header, const std::string& field) -> int {
    for (const HeaderLayout& l : dict.layouts) {
      if (l.header_name != header) continue;
      const HeaderField* f = l.field(field);
      if (f != nullptr) return f->bit_width;
    }
    return 0;
  };
  auto push_clamped = [&](std::vector<BoundaryValue>& into, const std::string& header,
                          const std::string& field, uint64_t value) {
    const int width = field_width(header, field);
    if (width == 0) return;  // the queries may name fields this program lacks
    BoundaryValue entry{header, field, std::min(value, width_max(width))};
    if (std::find(into.begin(), into.end(), entry) == into.end()) into.push_back(entry);
  };

  for (const BoundaryValue& v : extract_boundary_values(queries)) {
    push_clamped(dict.field_boundary_values, v.header, v.field, v.value);
  }
  for (const TableKeyRef& t : analysis.table_keys) {
    if (t.key.kind != FieldRef::Kind::kHeader) continue;
    for (uint64_t v : config.key_values(t.table)) {
      push_clamped(dict.forwarding_values, t.key.header, t.key.field, v);
    }
  }
  for (const auto& [id, port] : config.clone_sessions) dict.clone_session_ids.push_back(id);
  for (const auto& [id, ports] : config.multicast_groups) dict.multicast_group_ids.push_back(id);
  return dict;
}

std::vector<MutationAction> enumerate_actions(const MutationDictionary& dict) {
  std::vector<MutationAction> out;
  constexpr ActionKind kPerField[] = {ActionKind::kSetFieldDictLow, ActionKind::kSetFieldDictHigh,
                                      ActionKind::kSetFieldRandom, ActionKind::kSetFieldZero,
                                      ActionKind::kSetFieldMax};
  for (const HeaderLayout& layout : dict.layouts) {
    for (const HeaderField& field : layout.fields) {
      for (ActionKind kind : kPerField) {
        MutationAction a;
        a.kind = kind;
        a.header = layout.header_name;
        a.field = field.name;
        out.push_back(std::move(a));
      }
    }
  }
  out.push_back({ActionKind::kRecomputeChecksum, "", "", 0});
  out.push_back({ActionKind::kCorruptChecksum, "", "", 0});
  for (int k : kStructuralSizes) out.push_back({ActionKind::kAppendRandomOctets, "", "", k});
  for (int k : kStructuralSizes) out.push_back({ActionKind::kTruncateOctets, "", "", k});
  return out;
}

PacketBytes apply_action(const PacketBytes& packet, const MutationAction& action,
                         const MutationDictionary& dict, Rng& rng) {
  std::vector<uint8_t> bytes = packet.octets();
  switch (action.kind) {
    case ActionKind::kSetFieldDictLow:
    case ActionKind::kSetFieldDictHigh:
    case ActionKind::kSetFieldRandom:
    case ActionKind::kSetFieldZero:
    case ActionKind::kSetFieldMax: {
      const std::optional<FieldLocation> loc =
          locate_field(dict, bytes, action.header, action.field);
      if (!loc.has_value()) break;
      const int width = loc->field->bit_width;
      uint64_t value = 0;
      if (action.kind == ActionKind::kSetFieldRandom) {
        value = random_value(width, rng);
      } else if (action.kind == ActionKind::kSetFieldMax) {
        value = width_max(width);
      } else if (action.kind != ActionKind::kSetFieldZero) {
        const std::vector<uint64_t> values = dict.values_for(action.header, action.field);
        if (values.empty()) {
          value = action.kind == ActionKind::kSetFieldDictLow ? 0 : width_max(width);
        } else {
          value = action.kind == ActionKind::kSetFieldDictLow ? values.front() : values.back();
        }
      }
      if (action.field == "ihl" && value >= 5) {
        const uint64_t old_ihl =
            read_bits(bytes, loc->byte_offset * 8 + loc->field->bit_offset, width);
        write_field(bytes, *loc, value);
        bytes = resize_for_ihl(std::move(bytes), *loc, old_ihl, value);
      } else {
        write_field(bytes, *loc, value);
      }
      break;
    }
    case ActionKind::kRecomputeChecksum:
    case ActionKind::kCorruptChecksum: {
      const std::optional<FieldLocation> loc = locate_checksum(dict, bytes);
      if (!loc.has_value()) break;
      uint16_t sum = checksum_at(*loc, bytes);
      if (action.kind == ActionKind::kCorruptChecksum) sum ^= 0x0001;
      write_field(bytes, *loc, sum);
      break;
    }
    case ActionKind::kAppendRandomOctets: {
      const int room = static_cast<int>(kMaxFrameOctets) - static_cast<int>(bytes.size());
      const int k = std::clamp(action.octets, 0, room);
      for (int i = 0; i < k; ++i) bytes.push_back(static_cast<uint8_t>(rng.below(256)));
      break;
    }
    case ActionKind::kTruncateOctets: {
      const int spare = static_cast<int>(bytes.size()) - static_cast<int>(kMinFrameOctets);
      const int k = std::clamp(action.octets, 0, spare);
      bytes.resize(bytes.size() - static_cast<std::size_t>(k));
      break;
    }
  }
  return PacketBytes(std::move(bytes));
}

FuzzState encode_state(const PacketBytes& packet) {
  FuzzState state(kStateOctets, 0.0f);
  const std::vector<uint8_t>& bytes = packet.octets();
  const int n = std::min<int>(kStateOctets, static_cast<int>(bytes.size()));
  for (int i = 0; i < n; ++i) state[i] = static_cast<float>(bytes[i]) / 255.0f;
  return state;
}

FuzzEnv::FuzzEnv(const Switch& sw, Query query, int condition_index, MutationDictionary dict,
                 std::vector<PacketBytes> seeds, uint64_t seed, FuzzOptions options)
    : switch_(sw),
      query_(std::move(query)),
      condition_index_(condition_index),
      dict_(std::move(dict)),
      actions_(enumerate_actions(dict_)),
      seeds_(std::move(seeds)),
      rng_(seed),
      options_(options),
      current_(seeds_.empty() ? throw std::invalid_argument("FuzzEnv needs at least one seed")
                              : seeds_.front()) {
  if (condition_index_ < 0 || condition_index_ >= query_.condition_count()) {
    throw std::out_of_range("condition index " + std::to_string(condition_index_) +
                            " out of range for query " + std::to_string(query_.id));
  }
}

FuzzState FuzzEnv::reset() {
  episode_ = EpisodeLog{};
  episode_steps_ = 0;
  current_ = seeds_[seed_cursor_ % seeds_.size()];
  ++seed_cursor_;
  return encode_state(current_);
}

StepOutcome FuzzEnv::step(int action_index) {
  const MutationAction& action = actions_.at(action_index);
  current_ = apply_action(current_, action, dict_, rng_);
  return observe(action);
}

StepOutcome FuzzEnv::send(const PacketBytes& packet) {
  current_ = packet;
  return observe(std::nullopt);
}

StepOutcome FuzzEnv::observe(std::optional<MutationAction> action) {
  const ProcessResult result = switch_.process(current_);
  QueryEnv qenv;
  qenv.program = &switch_.program();
  qenv.analysis = &switch_.analysis();
  qenv.control_plane = &switch_.control_plane();

  StepOutcome out;
  out.verdicts = evaluate_query(query_, qenv, result);
  for (const ConditionVerdict& v : out.verdicts) {
    if (v.condition_index == condition_index_ && v.verdict == Verdict::kFail) out.reward = 1;
  }
  ++episode_steps_;
  ++total_sent_;
  out.terminal = out.reward == 1 || episode_steps_ >= options_.max_episode_len;
  out.packet = current_;
  out.state = encode_state(current_);
  episode_.steps.push_back({current_, std::move(action), out.verdicts, out.reward, out.terminal});
  ++episode_.packets_sent;
  return out;
}

std::vector<PacketBytes> make_seed_packets(const MutationDictionary& dict) {
  std::vector<uint64_t> dsts;
  for (const BoundaryValue& v : dict.forwarding_values) {
    if (v.header == "ipv4" && v.field == "dst") dsts.push_back(v.value);
  }
  if (dsts.empty()) dsts.push_back(0x0a000001);

  std::vector<PacketBytes> out;
  for (uint64_t dst : dsts) {
    Ipv4Fields ipv4;
    ipv4.dst = static_cast<uint32_t>(dst);
    out.push_back(encode_packet(EthernetFields{}, ipv4, {0xde, 0xad, 0xbe, 0xef}));
  }
  return out;
}

int policy_advanced(int action_count, Rng& rng) {
  return static_cast<int>(rng.below(static_cast<uint64_t>(action_count)));
}

PacketBytes policy_ipv4(const PacketBytes& seed, Rng& rng) {
  std::vector<uint8_t> bytes = seed.octets();
  for (const HeaderField& f : ipv4_fixed_layout().fields) {
    if (f.name == "dst") continue;
    const uint64_t value = random_value(f.bit_width, rng);
    write_bits(bytes, static_cast<int>(kMinFrameOctets) * 8 + f.bit_offset, f.bit_width, value);
  }
  return PacketBytes(std::move(bytes));
}

PacketBytes policy_naive(Rng& rng) {
  const std::size_t len = kMinFrameOctets + rng.below(128 - kMinFrameOctets + 1);
  std::vector<uint8_t> bytes(len);
  for (uint8_t& b : bytes) b = static_cast<uint8_t>(rng.below(256));
  return PacketBytes(std::move(bytes));
}

}  // namespace p6
