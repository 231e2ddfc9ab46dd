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
// A small line-oriented packet program language. Programs declare headers,
// parser states, match-action tables, actions and the ingress/egress
// controls, one statement per line so that execution traces attribute
// unambiguously to source lines. The grammar is keyword-led:
//
//   header ipv4 {            parser {                      table lpm_fwd lpm on hdr.ipv4.dst { forward }
//     field ttl : 8            state start {               action forward(port, dmac, smac) {
//     ...                        extract ethernet            set meta.egress_port = port
//   }                            select hdr.ethernet.ether_type { 0x0800 -> parse_ipv4, default -> accept }
//                              }                           }
//   metadata {               ingress {                     deparser {
//     field mark : 8            apply lpm_fwd                emit ethernet
//   }                        }                             }
//
// Statements: extract, select, transition, set, decrement, update_checksum,
// verify_checksum, drop, reject, clone, multicast, resubmit, apply, if/else,
// action calls (name()), emit. Comments run from '#' to end of line.

#ifndef P6_PROGRAM_H_
#define P6_PROGRAM_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "p6/packet.h"

namespace p6 {

// Grammar violation; line is 1-based, 0 when no line applies.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A name lookup that the caller's contract says must succeed.
class UnresolvedIdentifier : public std::runtime_error {
 public:
  UnresolvedIdentifier(int line, const std::string& name)
      : std::runtime_error("line " + std::to_string(line) + ": unresolved identifier '" + name +
                           "'"),
        line_(line),
        name_(name) {}
  int line() const { return line_; }
  const std::string& name() const { return name_; }

 private:
  int line_;
  std::string name_;
};

// Program text as numbered lines; line n of the file is lines[n-1].
struct SourceText {
  std::vector<std::string> lines;

  static SourceText from_string(const std::string& text);
  std::string to_string() const;

  bool operator==(const SourceText&) const = default;
};

// Reference to a value-bearing name inside expressions and statements.
struct FieldRef {
  enum class Kind {
    kHeader,    // hdr.<header>.<field>
    kMetadata,  // meta.<field>
    kParam,     // bare name, bound by the enclosing action
  };
  Kind kind = Kind::kHeader;
  std::string header;  // kHeader only
  std::string field;   // field or parameter name

  bool operator==(const FieldRef&) const = default;
};

// Sum of signed terms; each term is a literal or a FieldRef. Evaluation
// wraps at the destination field width on assignment.
struct Expr {
  struct Term {
    bool negated = false;
    bool is_literal = false;
    uint64_t literal = 0;
    FieldRef ref;

    bool operator==(const Term&) const = default;
  };
  std::vector<Term> terms;

  bool operator==(const Expr&) const = default;
};

enum class RelOp { kEq, kNe, kLt, kLe, kGt, kGe };

struct Condition {
  Expr lhs;
  RelOp op = RelOp::kEq;
  Expr rhs;

  bool operator==(const Condition&) const = default;
};

struct SelectArm {
  uint64_t value = 0;
  std::string target;

  bool operator==(const SelectArm&) const = default;
};

struct Stmt {
  enum class Kind {
    kExtract,         // extract <header>
    kSelect,          // select <fieldref> { v -> state, ..., default -> state }
    kTransition,      // transition <state|accept|reject>
    kSet,             // set <fieldref> = <expr>
    kDecrement,       // decrement <fieldref>
    kUpdateChecksum,  // update_checksum(<header>)
    kVerifyChecksum,  // verify_checksum(<header>)
    kDrop,            // drop
    kReject,          // reject (parser only)
    kClone,           // clone <expr>
    kMulticast,       // multicast <expr>
    kResubmit,        // resubmit
    kApply,           // apply <table>
    kIf,              // if <cond> { ... } [else { ... }]
    kCall,            // <action>()
    kEmit,            // emit <header> (deparser only)
  };

  Kind kind = Kind::kDrop;
  int line = 0;
  std::string name;     // header/table/action/state argument
  FieldRef target;      // kSet/kDecrement destination, kSelect source
  Expr value;           // kSet right side, kClone/kMulticast id
  Condition cond;       // kIf
  bool inline_body = false;  // if written as `if <cond> { <stmt> }` on one line
  std::vector<Stmt> then_body;
  std::vector<Stmt> else_body;
  std::vector<SelectArm> arms;
  std::string default_target;  // kSelect; empty means implicit reject

  bool operator==(const Stmt&) const = default;
};

struct FieldDecl {
  std::string name;
  int bit_width = 0;
  int line = 0;

  bool operator==(const FieldDecl&) const = default;
};

struct HeaderDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  int line = 0;

  bool operator==(const HeaderDecl&) const = default;
};

struct ParserStateDecl {
  std::string name;
  std::vector<Stmt> body;
  int line = 0;       // line of `state <name> {`
  int close_line = 0;

  bool operator==(const ParserStateDecl&) const = default;
};

struct ActionDecl {
  std::string name;
  std::vector<std::string> params;
  std::vector<Stmt> body;
  int line = 0;
  int close_line = 0;

  bool operator==(const ActionDecl&) const = default;
};

enum class TableKind { kExact, kLpm };

struct TableDecl {
  std::string name;
  TableKind kind = TableKind::kExact;
  FieldRef key;
  std::vector<std::string> actions;
  int line = 0;

  bool operator==(const TableDecl&) const = default;
};

// Line span of a braced block; zero lines mean the block is absent.
struct BlockSpan {
  int open_line = 0;
  int close_line = 0;

  bool operator==(const BlockSpan&) const = default;
};

struct ProgramAst {
  SourceText source;
  std::vector<HeaderDecl> headers;
  std::vector<FieldDecl> metadata;  // user-declared metadata fields
  std::vector<ParserStateDecl> states;
  std::vector<ActionDecl> actions;
  std::vector<TableDecl> tables;
  std::vector<Stmt> ingress;
  std::vector<Stmt> egress;
  std::vector<Stmt> deparser;
  BlockSpan parser_span;
  BlockSpan metadata_span;
  BlockSpan ingress_span;
  BlockSpan egress_span;
  BlockSpan deparser_span;

  const HeaderDecl* header(const std::string& name) const;
  const ParserStateDecl* state(const std::string& name) const;
  const ActionDecl* action(const std::string& name) const;
  const TableDecl* table(const std::string& name) const;
};

struct Diagnostic {
  int line = 0;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

// A table together with the field it matches on.
struct TableKeyRef {
  std::string table;
  TableKind kind = TableKind::kExact;
  FieldRef key;
};

// Facts about a program that mutation dictionaries and patch templates need.
struct StaticAnalysis {
  std::vector<HeaderLayout> layouts;  // declaration order
  std::vector<std::string> header_names;
  std::vector<std::string> parser_state_names;
  std::map<std::string, std::vector<std::string>> field_names;  // per header
  std::vector<std::string> metadata_names;                      // user metadata only
  std::vector<TableKeyRef> table_keys;                          // declaration order
  // True when some parser select branches on a field named "ihl", meaning
  // the program distinguishes option-carrying headers.
  bool accepts_options = false;
  std::map<std::string, std::string> extracted_in_state;  // header -> state
};

// Builtin metadata available to every program. egress_port is 9 bits wide
// and starts at the drop sentinel (511); resubmitted is 1 bit and marks
// passes that re-entered the parser through resubmission.
inline constexpr int kEgressPortBits = 9;
inline constexpr uint64_t kDropPort = 511;
std::vector<FieldDecl> builtin_metadata_fields();

// Builds the AST. Throws SyntaxError on any grammar violation, including
// multiple statements on one line and a missing parser start state.
ProgramAst parse_program(const SourceText& source);

// Name resolution and placement rules that parsing alone cannot see.
// Returns one diagnostic per violation; an empty result means deployable.
std::vector<Diagnostic> validate_program(const ProgramAst& program);

// Precondition: validate_program(program) is empty.
StaticAnalysis analyze_program(const ProgramAst& program);

// Canonical source for an AST. parse_program(render_program(ast)) yields an
// AST that renders identically (the canonical form is a fixpoint).
SourceText render_program(const ProgramAst& program);

// All 1-based line numbers that hold an executable statement, including
// statements nested in ifs, action bodies and deparser emits.
std::set<int> statement_lines(const ProgramAst& program);

}  // namespace p6

#endif  // P6_PROGRAM_H_
