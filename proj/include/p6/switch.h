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
// In-process switch model. A deployed program processes one frame at a
// time: parser, ingress, packet replication, per-copy egress, deparser.
//
// Replication follows the configured profile. The bmv2-like profile lets
// clone, resubmit and multicast requests survive an ingress drop; the
// strict profile cancels all of them when the original is dropped.

#ifndef P6_SWITCH_H_
#define P6_SWITCH_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "p6/control_plane.h"
#include "p6/packet.h"
#include "p6/program.h"

namespace p6 {

enum class PreProfile { kBmv2Like, kStrict };

enum class CopyKind { kUnicast, kClone, kMulticastCopy };

struct SwitchOptions {
  PreProfile pre_profile = PreProfile::kBmv2Like;
  int resubmit_limit = 4;
};

// One frame leaving the switch. A copy dropped during egress keeps its
// record with port == kDropPort.
struct EgressRecord {
  CopyKind kind = CopyKind::kUnicast;
  uint32_t port = kDropPort;
  bool dropped = true;
  PacketBytes bytes;
  uint64_t clone_session = 0;  // meaningful for kClone
  uint64_t mcast_group = 0;    // meaningful for kMulticastCopy
  bool from_resubmit = false;  // produced by a resubmitted pass
};

struct ProcessResult {
  PacketBytes input;
  std::vector<EgressRecord> records;
  // True when no unicast copy left the switch.
  bool dropped_original = true;
  // Statement lines executed at least once, in first-hit order, across all
  // passes and copies.
  std::vector<int> trace;
  // First pass reached accept (the frame parsed).
  bool parsed = false;
  int passes = 0;
};

// A header as laid on the wire: fixed part plus the variable options tail
// for headers with an ihl field.
struct HeaderImage {
  bool valid = false;
  std::vector<uint8_t> bytes;
  std::vector<uint8_t> options;
};

// Wire-level view of a frame under a program's header layouts. Built by
// following only the extract/select/transition skeleton of the parser, so
// validation statements in the program cannot hide fields from queries.
struct HeaderStack {
  std::map<std::string, HeaderImage> headers;

  bool has(const std::string& header) const { return headers.count(header) > 0; }
  std::optional<uint64_t> field(const StaticAnalysis& analysis, const std::string& header,
                                const std::string& field) const;
};

HeaderStack structural_parse(const ProgramAst& program, const StaticAnalysis& analysis,
                             const std::vector<uint8_t>& octets);

// Ones-complement checksum of a header image with its checksum field read
// as zero. Matches ipv4_header_checksum on the canonical 20 octet layout.
uint16_t header_image_checksum(const HeaderLayout& layout, const std::vector<uint8_t>& fixed,
                               const std::vector<uint8_t>& options);

class Switch {
 public:
  // Deploys a program with its rules. Throws std::invalid_argument when the
  // program has validation diagnostics and ConfigError when the rules do
  // not fit the program.
  Switch(ProgramAst program, ControlPlane control_plane, SwitchOptions options = {});

  ProcessResult process(const PacketBytes& frame) const;

  const ProgramAst& program() const { return program_; }
  const ControlPlane& control_plane() const { return control_plane_; }
  const StaticAnalysis& analysis() const { return analysis_; }
  const SwitchOptions& options() const { return options_; }

 private:
  ProgramAst program_;
  ControlPlane control_plane_;
  SwitchOptions options_;
  StaticAnalysis analysis_;
};

}  // namespace p6

#endif  // P6_SWITCH_H_
