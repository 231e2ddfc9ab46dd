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
// Behavioral queries over switch executions. A query is an if/then(/else)
// tuple: the guard is judged on the ingress frame, every then-condition on
// each applicable egress copy, and each condition is its own test case.
//
//   # corrupted checksums never leave the switch
//   if (calcChksum(ipv4) != ing.ipv4.checksum)
//   then (egr.dropped == true)
//
//   clone if (table_val(mirror, ing.ipv4.dst, session) >= 0)
//   then (egr.port == clone_port(table_val(mirror, ing.ipv4.dst, session)))
//        pd: (egr.dropped == false)
//
// A leading `clone` or `multicast` keyword scopes the then-conditions to
// those copies; the default scope is the unicast output (including unicast
// output of resubmitted passes). `pd:` marks a condition whose failure is
// platform dependent: reported as a vendor notice, never patched.
//
// Value semantics: terms evaluate to integers or to undefined (missing
// header, table miss, absent parameter, no clone session, no group). Any
// comparison over an undefined operand is false, and undefined is false in
// boolean position. With zero applicable egress copies, egr.dropped reads
// the fate of the original and every other egr term is undefined.

#ifndef P6_P4Q_H_
#define P6_P4Q_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "p6/control_plane.h"
#include "p6/program.h"
#include "p6/switch.h"

namespace p6 {

class QuerySyntaxError : public std::runtime_error {
 public:
  QuerySyntaxError(int line, const std::string& message)
      : std::runtime_error("query:" + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class UnknownField : public std::runtime_error {
 public:
  explicit UnknownField(const std::string& what) : std::runtime_error(what) {}
};

class UnknownTable : public std::runtime_error {
 public:
  explicit UnknownTable(const std::string& what) : std::runtime_error(what) {}
};

struct QExpr {
  enum class Kind {
    kOr,          // kids
    kAnd,         // kids
    kNot,         // kids[0]
    kCompare,     // kids[0] op kids[1]
    kArith,       // sum of kids, signs[i] true = subtract
    kLiteral,     // literal
    kIngField,    // header, field
    kEgrField,    // header, field
    kEgrPort,
    kEgrDropped,
    kCalcChksum,  // header
    kTableVal,    // table, kids[0] = key, param
    kClonePort,   // kids[0] = session
    kMcastHas,    // kids[0] = group, kids[1] = port
    kUndefined,   // always undefined; used when binding rewrites an atom
  };

  Kind kind = Kind::kUndefined;
  std::vector<QExpr> kids;
  std::vector<bool> signs;
  RelOp op = RelOp::kEq;
  uint64_t literal = 0;
  std::string header;
  std::string field;
  std::string table;
  std::string param;
  int line = 0;
};

enum class QueryScope { kUnicast, kClone, kMulticast };

struct QCondition {
  QExpr expr;
  bool platform_dependent = false;
  int line = 0;
};

struct Query {
  int id = 0;  // 1-based position in the file
  QueryScope scope = QueryScope::kUnicast;
  QExpr guard;
  std::vector<QCondition> then_conds;
  std::vector<QCondition> else_conds;
  int line = 0;

  int condition_count() const {
    return static_cast<int>(then_conds.size() + else_conds.size());
  }
  // Conditions are indexed then-first, else after.
  const QCondition& condition(int index) const {
    const int t = static_cast<int>(then_conds.size());
    return index < t ? then_conds[index] : else_conds[index - t];
  }
};

enum class Verdict { kPass, kFail, kNotApplicable };

struct ConditionVerdict {
  int query_id = 0;
  int condition_index = 0;
  bool is_else = false;
  bool platform_dependent = false;
  Verdict verdict = Verdict::kNotApplicable;
};

std::vector<Query> parse_queries(const std::string& text);

struct QueryEnv {
  const ProgramAst* program = nullptr;
  const StaticAnalysis* analysis = nullptr;
  const ControlPlane* control_plane = nullptr;
};

// Evaluates one query against one processed packet. Emits exactly one
// verdict per condition: then-conditions are not_applicable when the guard
// is false, else-conditions when it is true. A then-condition passes only
// if it holds on every applicable copy. Throws UnknownField / UnknownTable
// when the query names something the program does not declare.
std::vector<ConditionVerdict> evaluate_query(const Query& query, const QueryEnv& env,
                                             const ProcessResult& result);

std::vector<ConditionVerdict> evaluate_queries(const std::vector<Query>& queries,
                                               const QueryEnv& env, const ProcessResult& result);

// Rewrites atoms that cannot resolve against the program (unknown headers,
// fields or tables) into the undefined term, so a generic query file runs
// against any program. Each rewrite is reported as a human-readable note.
struct BoundQueries {
  std::vector<Query> queries;
  std::vector<std::string> notes;
};

BoundQueries bind_queries(const std::vector<Query>& queries, const ProgramAst& program,
                          const StaticAnalysis& analysis);

// A boundary candidate mined from a field-versus-literal comparison:
// {c-1, c, c+1} clamped at zero. Width clamping happens where layouts are
// known, in the fuzzing dictionary.
struct BoundaryValue {
  std::string header;
  std::string field;
  uint64_t value = 0;

  bool operator==(const BoundaryValue&) const = default;
};

std::vector<BoundaryValue> extract_boundary_values(const std::vector<Query>& queries);

}  // namespace p6

#endif  // P6_P4Q_H_
