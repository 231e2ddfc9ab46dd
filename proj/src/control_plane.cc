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

#include "p6/control_plane.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace p6 {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

uint64_t require_value(const std::string& token, int line) {
  std::optional<uint64_t> v = parse_value_token(token);
  if (!v.has_value()) throw ConfigError(line, "bad value '" + token + "'");
  return *v;
}

}  // namespace

std::optional<uint64_t> parse_value_token(const std::string& token) {
  if (token.empty()) return std::nullopt;
  // Dotted quad.
  if (token.find('.') != std::string::npos) {
    uint64_t out = 0;
    int parts = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= token.size(); ++i) {
      if (i == token.size() || token[i] == '.') {
        const std::string part = token.substr(start, i - start);
        if (part.empty() || part.size() > 3 ||
            part.find_first_not_of("0123456789") != std::string::npos) {
          return std::nullopt;
        }
        const unsigned long v = std::stoul(part);
        if (v > 255 || ++parts > 4) return std::nullopt;
        out = (out << 8) | v;
        start = i + 1;
      }
    }
    if (parts != 4) return std::nullopt;
    return out;
  }
  if (token.size() > 2 && token[0] == '0' && (token[1] == 'x' || token[1] == 'X')) {
    if (token.find_first_not_of("0123456789abcdefABCDEF", 2) != std::string::npos ||
        token.size() > 18) {
      return std::nullopt;
    }
    return std::stoull(token.substr(2), nullptr, 16);
  }
  if (token.find_first_not_of("0123456789") != std::string::npos || token.size() > 20) {
    return std::nullopt;
  }
  try {
    return std::stoull(token, nullptr, 10);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<uint64_t> RuleEntry::param(const std::string& name) const {
  for (const auto& [k, v] : params) {
    if (k == name) return v;
  }
  return std::nullopt;
}

ControlPlane ControlPlane::parse(const std::string& text) {
  ControlPlane cp;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> toks = split_ws(line);
    if (toks.empty()) continue;

    if (toks[0] == "clone_session") {
      if (toks.size() != 3 || toks[2].rfind("port=", 0) != 0) {
        throw ConfigError(line_no, "expected: clone_session <id> port=<port>");
      }
      const uint64_t id = require_value(toks[1], line_no);
      const uint64_t port = require_value(toks[2].substr(5), line_no);
      if (port >= (1u << kEgressPortBits)) throw ConfigError(line_no, "port does not fit 9 bits");
      if (cp.clone_sessions.count(id)) throw ConfigError(line_no, "duplicate clone session");
      cp.clone_sessions[id] = static_cast<uint32_t>(port);
      continue;
    }

    if (toks[0] == "mcast_group") {
      if (toks.size() != 3 || toks[2].rfind("ports=", 0) != 0) {
        throw ConfigError(line_no, "expected: mcast_group <id> ports=<p>,<p>,...");
      }
      const uint64_t id = require_value(toks[1], line_no);
      std::vector<uint32_t> ports;
      std::string list = toks[2].substr(6);
      std::size_t start = 0;
      for (std::size_t i = 0; i <= list.size(); ++i) {
        if (i == list.size() || list[i] == ',') {
          const uint64_t p = require_value(list.substr(start, i - start), line_no);
          if (p >= (1u << kEgressPortBits)) throw ConfigError(line_no, "port does not fit 9 bits");
          ports.push_back(static_cast<uint32_t>(p));
          start = i + 1;
        }
      }
      if (ports.empty()) throw ConfigError(line_no, "multicast group needs at least one port");
      if (cp.multicast_groups.count(id)) throw ConfigError(line_no, "duplicate multicast group");
      cp.multicast_groups[id] = std::move(ports);
      continue;
    }

    // Table entry.
    if (toks.size() < 4 || toks[2] != "->") {
      throw ConfigError(line_no, "expected: <table> <key>[/<prefix>] -> <action> [<p>=<v> ...]");
    }
    RuleEntry entry;
    entry.line = line_no;
    std::string key_tok = toks[1];
    const std::size_t slash = key_tok.find('/');
    if (slash != std::string::npos) {
      const std::string plen = key_tok.substr(slash + 1);
      if (plen.empty() || plen.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError(line_no, "bad prefix length");
      }
      entry.prefix_len = std::stoi(plen);
      key_tok = key_tok.substr(0, slash);
    }
    entry.key = require_value(key_tok, line_no);
    entry.action = toks[3];
    for (std::size_t i = 4; i < toks.size(); ++i) {
      const std::size_t eq = toks[i].find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError(line_no, "expected <param>=<value>, got '" + toks[i] + "'");
      }
      const std::string name = toks[i].substr(0, eq);
      entry.params.emplace_back(name, require_value(toks[i].substr(eq + 1), line_no));
    }
    RuleTable& table = cp.tables[toks[0]];
    table.name = toks[0];
    table.entries.push_back(std::move(entry));
  }
  return cp;
}

void ControlPlane::validate_against(const ProgramAst& program) const {
  for (const auto& [name, rule_table] : tables) {
    const TableDecl* decl = program.table(name);
    if (decl == nullptr) {
      throw ConfigError(rule_table.entries.front().line, "unknown table '" + name + "'");
    }
    int key_width = 64;
    if (decl->key.kind == FieldRef::Kind::kHeader) {
      const HeaderDecl* h = program.header(decl->key.header);
      if (h != nullptr) {
        for (const FieldDecl& f : h->fields) {
          if (f.name == decl->key.field) key_width = f.bit_width;
        }
      }
    } else {
      for (const FieldDecl& f : program.metadata) {
        if (f.name == decl->key.field) key_width = f.bit_width;
      }
      for (const FieldDecl& f : builtin_metadata_fields()) {
        if (f.name == decl->key.field) key_width = f.bit_width;
      }
    }
    for (const RuleEntry& e : rule_table.entries) {
      if (e.prefix_len >= 0 && decl->kind == TableKind::kExact) {
        throw ConfigError(e.line, "exact table '" + name + "' cannot take a prefix");
      }
      if (e.prefix_len > key_width) {
        throw ConfigError(e.line, "prefix longer than the key field");
      }
      if (key_width < 64 && e.key >= (uint64_t{1} << key_width)) {
        throw ConfigError(e.line, "key does not fit the key field");
      }
      if (std::find(decl->actions.begin(), decl->actions.end(), e.action) ==
          decl->actions.end()) {
        throw ConfigError(e.line,
                          "action '" + e.action + "' is not listed for table '" + name + "'");
      }
      const ActionDecl* action = program.action(e.action);
      if (action == nullptr) throw ConfigError(e.line, "unknown action '" + e.action + "'");
      std::set<std::string> given;
      for (const auto& [pname, pv] : e.params) {
        (void)pv;
        if (!given.insert(pname).second) {
          throw ConfigError(e.line, "duplicate parameter '" + pname + "'");
        }
        if (std::find(action->params.begin(), action->params.end(), pname) ==
            action->params.end()) {
          throw ConfigError(e.line,
                            "action '" + e.action + "' has no parameter '" + pname + "'");
        }
      }
      for (const std::string& pname : action->params) {
        if (!given.count(pname)) {
          throw ConfigError(e.line, "missing parameter '" + pname + "'");
        }
      }
    }
  }
}

bool ControlPlane::has_table(const std::string& name) const { return tables.count(name) > 0; }

const RuleTable* ControlPlane::table(const std::string& name) const {
  auto it = tables.find(name);
  return it == tables.end() ? nullptr : &it->second;
}

const RuleEntry* ControlPlane::lookup(const std::string& table_name, TableKind kind, uint64_t key,
                                      int key_width) const {
  const RuleTable* t = table(table_name);
  if (t == nullptr) return nullptr;
  if (kind == TableKind::kExact) {
    for (const RuleEntry& e : t->entries) {
      if (e.key == key) return &e;
    }
    return nullptr;
  }
  const RuleEntry* best = nullptr;
  int best_len = -1;
  for (const RuleEntry& e : t->entries) {
    const int plen = e.prefix_len < 0 ? key_width : e.prefix_len;
    const int shift = std::max(0, key_width - plen);
    const bool match =
        shift >= 64 ? plen == 0 : ((key >> shift) == (e.key >> shift));
    if (match && plen > best_len) {
      best = &e;
      best_len = plen;
    }
  }
  return best;
}

std::optional<uint32_t> ControlPlane::clone_port(uint64_t session) const {
  auto it = clone_sessions.find(session);
  if (it == clone_sessions.end()) return std::nullopt;
  return it->second;
}

const std::vector<uint32_t>* ControlPlane::multicast_ports(uint64_t group) const {
  auto it = multicast_groups.find(group);
  return it == multicast_groups.end() ? nullptr : &it->second;
}

std::vector<uint64_t> ControlPlane::key_values(const std::string& table_name) const {
  std::vector<uint64_t> out;
  const RuleTable* t = table(table_name);
  if (t == nullptr) return out;
  for (const RuleEntry& e : t->entries) {
    if (std::find(out.begin(), out.end(), e.key) == out.end()) out.push_back(e.key);
  }
  return out;
}

}  // namespace p6
