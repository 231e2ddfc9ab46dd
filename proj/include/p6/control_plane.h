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
// Control plane state: table rules, clone sessions and multicast groups.
//
// Rules files are line oriented, '#' starts a comment. Three entry forms:
//
//   <table> <key>[/<prefix>] -> <action> [<param>=<value> ...]
//   clone_session <id> port=<port>
//   mcast_group <id> ports=<port>,<port>,...
//
// Keys and values are decimal, 0x-hex, or dotted IPv4 quads.

#ifndef P6_CONTROL_PLANE_H_
#define P6_CONTROL_PLANE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "p6/program.h"

namespace p6 {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error("rules:" + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct RuleEntry {
  uint64_t key = 0;
  // -1 means no prefix was written; LPM lookup then uses the full key width.
  int prefix_len = -1;
  std::string action;
  std::vector<std::pair<std::string, uint64_t>> params;
  int line = 0;

  std::optional<uint64_t> param(const std::string& name) const;
};

struct RuleTable {
  std::string name;
  std::vector<RuleEntry> entries;
};

class ControlPlane {
 public:
  // Parses rules text. Throws ConfigError on malformed lines. Structural
  // errors that need the program (unknown tables, bad prefixes on exact
  // tables) are reported by validate_against().
  static ControlPlane parse(const std::string& text);

  // Cross-checks the rules against a program. Throws ConfigError on the
  // first mismatch: unknown table or action, action not listed for the
  // table, missing or extra action parameters, prefixes on exact tables,
  // keys or prefixes that do not fit the key field.
  void validate_against(const ProgramAst& program) const;

  bool has_table(const std::string& name) const;
  const RuleTable* table(const std::string& name) const;

  // Exact: key equality, first match. LPM: longest prefix wins, ties go to
  // the earlier entry; entries without a prefix match on all key_width bits.
  const RuleEntry* lookup(const std::string& table, TableKind kind, uint64_t key,
                          int key_width) const;

  std::optional<uint32_t> clone_port(uint64_t session) const;
  const std::vector<uint32_t>* multicast_ports(uint64_t group) const;

  // Distinct key values configured for one table, in first-seen order.
  std::vector<uint64_t> key_values(const std::string& table) const;

  std::map<std::string, RuleTable> tables;
  std::map<uint64_t, uint32_t> clone_sessions;
  std::map<uint64_t, std::vector<uint32_t>> multicast_groups;
};

// Parses a decimal, 0x-hex, or dotted-quad token. Returns nullopt when the
// token is not a value.
std::optional<uint64_t> parse_value_token(const std::string& token);

}  // namespace p6

#endif  // P6_CONTROL_PLANE_H_
