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

#include "p6/p4q.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>

namespace p6 {
namespace {

struct Tok {
  std::string text;
  int line;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Tok> tokenize(const std::string& text) {
  std::vector<Tok> out;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_char(text[j])) ++j;
      out.push_back({text.substr(i, j - i), line});
      i = j;
      continue;
    }
    if ((c == '&' || c == '|') && i + 1 < text.size() && text[i + 1] == c) {
      out.push_back({std::string(2, c), line});
      i += 2;
      continue;
    }
    if ((c == '=' || c == '!' || c == '<' || c == '>') && i + 1 < text.size() &&
        text[i + 1] == '=') {
      out.push_back({text.substr(i, 2), line});
      i += 2;
      continue;
    }
    if (std::string("(),:!<>+-").find(c) != std::string::npos) {
      out.push_back({std::string(1, c), line});
      ++i;
      continue;
    }
    throw QuerySyntaxError(line, std::string("unexpected character '") + c + "'");
  }
  return out;
}

bool is_integer(const std::string& t) {
  if (t.empty()) return false;
  if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
    return t.find_first_not_of("0123456789abcdefABCDEF", 2) == std::string::npos;
  }
  return t.find_first_not_of("0123456789") == std::string::npos;
}

std::vector<std::string> split_dots(const std::string& t) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= t.size(); ++i) {
    if (i == t.size() || t[i] == '.') {
      parts.push_back(t.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

class QueryParser {
 public:
  explicit QueryParser(const std::string& text) : toks_(tokenize(text)) {}

  std::vector<Query> run() {
    std::vector<Query> out;
    while (!done()) {
      Query q = parse_query();
      q.id = static_cast<int>(out.size()) + 1;
      out.push_back(std::move(q));
    }
    return out;
  }

 private:
  bool done() const { return pos_ >= toks_.size(); }
  const Tok& peek() const {
    static const Tok kEnd{"", 0};
    return done() ? kEnd : toks_[pos_];
  }
  Tok take() {
    if (done()) throw QuerySyntaxError(last_line(), "unexpected end of file");
    return toks_[pos_++];
  }
  int last_line() const { return toks_.empty() ? 1 : toks_.back().line; }
  void expect(const std::string& t) {
    const Tok tok = take();
    if (tok.text != t) {
      throw QuerySyntaxError(tok.line, "expected '" + t + "', got '" + tok.text + "'");
    }
  }

  Query parse_query() {
    Query q;
    if (peek().text == "clone") {
      q.scope = QueryScope::kClone;
      take();
    } else if (peek().text == "multicast") {
      q.scope = QueryScope::kMulticast;
      take();
    }
    q.line = peek().line;
    expect("if");
    expect("(");
    q.guard = parse_or();
    expect(")");
    expect("then");
    q.then_conds = parse_conditions();
    if (q.then_conds.empty()) throw QuerySyntaxError(q.line, "then needs at least one condition");
    if (peek().text == "else") {
      take();
      q.else_conds = parse_conditions();
      if (q.else_conds.empty()) {
        throw QuerySyntaxError(q.line, "else needs at least one condition");
      }
    }
    return q;
  }

  std::vector<QCondition> parse_conditions() {
    std::vector<QCondition> out;
    while (true) {
      bool pd = false;
      int line = peek().line;
      if (peek().text == "pd") {
        take();
        expect(":");
        pd = true;
      } else if (peek().text != "(") {
        break;
      }
      expect("(");
      QCondition cond;
      cond.platform_dependent = pd;
      cond.line = line;
      cond.expr = parse_or();
      expect(")");
      out.push_back(std::move(cond));
    }
    return out;
  }

  QExpr parse_or() {
    QExpr e = parse_and();
    if (peek().text != "||") return e;
    QExpr node;
    node.kind = QExpr::Kind::kOr;
    node.line = e.line;
    node.kids.push_back(std::move(e));
    while (peek().text == "||") {
      take();
      node.kids.push_back(parse_and());
    }
    return node;
  }

  QExpr parse_and() {
    QExpr e = parse_not();
    if (peek().text != "&&") return e;
    QExpr node;
    node.kind = QExpr::Kind::kAnd;
    node.line = e.line;
    node.kids.push_back(std::move(e));
    while (peek().text == "&&") {
      take();
      node.kids.push_back(parse_not());
    }
    return node;
  }

  // Negation applies to the next comparison or parenthesized expression.
  QExpr parse_not() {
    if (peek().text == "!") {
      const Tok bang = take();
      QExpr node;
      node.kind = QExpr::Kind::kNot;
      node.line = bang.line;
      node.kids.push_back(parse_not());
      return node;
    }
    return parse_compare();
  }

  QExpr parse_compare() {
    QExpr lhs = parse_arith();
    static const std::string kOps[] = {"==", "!=", "<", "<=", ">", ">="};
    const std::string& t = peek().text;
    if (std::find(std::begin(kOps), std::end(kOps), t) == std::end(kOps)) return lhs;
    const Tok op = take();
    QExpr node;
    node.kind = QExpr::Kind::kCompare;
    node.line = lhs.line;
    if (op.text == "==") node.op = RelOp::kEq;
    if (op.text == "!=") node.op = RelOp::kNe;
    if (op.text == "<") node.op = RelOp::kLt;
    if (op.text == "<=") node.op = RelOp::kLe;
    if (op.text == ">") node.op = RelOp::kGt;
    if (op.text == ">=") node.op = RelOp::kGe;
    node.kids.push_back(std::move(lhs));
    node.kids.push_back(parse_arith());
    return node;
  }

  QExpr parse_arith() {
    QExpr first = parse_primary();
    if (peek().text != "+" && peek().text != "-") return first;
    QExpr node;
    node.kind = QExpr::Kind::kArith;
    node.line = first.line;
    node.kids.push_back(std::move(first));
    node.signs.push_back(false);
    while (peek().text == "+" || peek().text == "-") {
      const bool minus = take().text == "-";
      node.kids.push_back(parse_primary());
      node.signs.push_back(minus);
    }
    return node;
  }

  QExpr parse_primary() {
    const Tok tok = take();
    QExpr e;
    e.line = tok.line;
    if (tok.text == "(") {
      e = parse_or();
      expect(")");
      return e;
    }
    if (is_integer(tok.text)) {
      e.kind = QExpr::Kind::kLiteral;
      e.literal = std::stoull(tok.text, nullptr, 0);
      return e;
    }
    if (tok.text == "true" || tok.text == "false") {
      e.kind = QExpr::Kind::kLiteral;
      e.literal = tok.text == "true" ? 1 : 0;
      return e;
    }
    if (tok.text == "calcChksum") {
      expect("(");
      e.kind = QExpr::Kind::kCalcChksum;
      e.header = take_word(tok.line);
      expect(")");
      return e;
    }
    if (tok.text == "table_val") {
      expect("(");
      e.kind = QExpr::Kind::kTableVal;
      e.table = take_word(tok.line);
      expect(",");
      e.kids.push_back(parse_or());
      expect(",");
      e.param = take_word(tok.line);
      expect(")");
      return e;
    }
    if (tok.text == "clone_port") {
      expect("(");
      e.kind = QExpr::Kind::kClonePort;
      e.kids.push_back(parse_or());
      expect(")");
      return e;
    }
    if (tok.text == "mcast_has") {
      expect("(");
      e.kind = QExpr::Kind::kMcastHas;
      e.kids.push_back(parse_or());
      expect(",");
      e.kids.push_back(parse_or());
      expect(")");
      return e;
    }
    if (tok.text == "egr.port") {
      e.kind = QExpr::Kind::kEgrPort;
      return e;
    }
    if (tok.text == "egr.dropped") {
      e.kind = QExpr::Kind::kEgrDropped;
      return e;
    }
    std::vector<std::string> parts = split_dots(tok.text);
    if (parts.size() == 3 && (parts[0] == "ing" || parts[0] == "egr")) {
      for (const std::string& p : parts) {
        if (p.empty()) throw QuerySyntaxError(tok.line, "bad reference '" + tok.text + "'");
      }
      e.kind = parts[0] == "ing" ? QExpr::Kind::kIngField : QExpr::Kind::kEgrField;
      e.header = parts[1];
      e.field = parts[2];
      return e;
    }
    throw QuerySyntaxError(tok.line, "unexpected token '" + tok.text + "'");
  }

  std::string take_word(int line) {
    const Tok tok = take();
    if (tok.text.empty() || !is_word_char(tok.text[0]) || is_integer(tok.text)) {
      throw QuerySyntaxError(line, "expected a name, got '" + tok.text + "'");
    }
    return tok.text;
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
};

using Val = std::optional<uint64_t>;

struct EvalCtx {
  const QueryEnv* env = nullptr;
  const HeaderStack* ing = nullptr;
  const HeaderStack* egr = nullptr;
  const EgressRecord* record = nullptr;
  Val dropped_override;
  // calcChksum reads the egress image inside conditions, the ingress image
  // inside the guard.
  bool egress_side = false;
};

bool truthy(const Val& v) { return v.has_value() && *v != 0; }

void check_field_declared(const EvalCtx& ctx, const QExpr& e) {
  auto it = ctx.env->analysis->field_names.find(e.header);
  if (it == ctx.env->analysis->field_names.end()) {
    throw UnknownField("query references undeclared header '" + e.header + "'");
  }
  if (std::find(it->second.begin(), it->second.end(), e.field) == it->second.end()) {
    throw UnknownField("header '" + e.header + "' has no field '" + e.field + "'");
  }
}

const HeaderLayout* layout_of(const StaticAnalysis& analysis, const std::string& name) {
  for (const HeaderLayout& l : analysis.layouts) {
    if (l.header_name == name) return &l;
  }
  return nullptr;
}

Val eval(const QExpr& e, const EvalCtx& ctx) {
  switch (e.kind) {
    case QExpr::Kind::kOr: {
      for (const QExpr& kid : e.kids) {
        if (truthy(eval(kid, ctx))) return 1;
      }
      return 0;
    }
    case QExpr::Kind::kAnd: {
      for (const QExpr& kid : e.kids) {
        if (!truthy(eval(kid, ctx))) return 0;
      }
      return 1;
    }
    case QExpr::Kind::kNot:
      return truthy(eval(e.kids[0], ctx)) ? 0 : 1;
    case QExpr::Kind::kCompare: {
      const Val lhs = eval(e.kids[0], ctx);
      const Val rhs = eval(e.kids[1], ctx);
      if (!lhs.has_value() || !rhs.has_value()) return 0;
      switch (e.op) {
        case RelOp::kEq:
          return *lhs == *rhs ? 1 : 0;
        case RelOp::kNe:
          return *lhs != *rhs ? 1 : 0;
        case RelOp::kLt:
          return *lhs < *rhs ? 1 : 0;
        case RelOp::kLe:
          return *lhs <= *rhs ? 1 : 0;
        case RelOp::kGt:
          return *lhs > *rhs ? 1 : 0;
        case RelOp::kGe:
          return *lhs >= *rhs ? 1 : 0;
      }
      return 0;
    }
    case QExpr::Kind::kArith: {
      uint64_t acc = 0;
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        const Val v = eval(e.kids[i], ctx);
        if (!v.has_value()) return std::nullopt;
        acc = e.signs[i] ? acc - *v : acc + *v;
      }
      return acc;
    }
    case QExpr::Kind::kLiteral:
      return e.literal;
    case QExpr::Kind::kIngField:
      check_field_declared(ctx, e);
      return ctx.ing->field(*ctx.env->analysis, e.header, e.field);
    case QExpr::Kind::kEgrField:
      check_field_declared(ctx, e);
      if (ctx.egr == nullptr) return std::nullopt;
      return ctx.egr->field(*ctx.env->analysis, e.header, e.field);
    case QExpr::Kind::kEgrPort:
      if (ctx.record == nullptr) return std::nullopt;
      return ctx.record->port;
    case QExpr::Kind::kEgrDropped:
      if (ctx.record != nullptr) return ctx.record->dropped ? 1 : 0;
      return ctx.dropped_override;
    case QExpr::Kind::kCalcChksum: {
      const HeaderLayout* layout = layout_of(*ctx.env->analysis, e.header);
      if (layout == nullptr) {
        throw UnknownField("calcChksum of undeclared header '" + e.header + "'");
      }
      const HeaderStack* stack = ctx.egress_side ? ctx.egr : ctx.ing;
      if (stack == nullptr) return std::nullopt;
      auto it = stack->headers.find(e.header);
      if (it == stack->headers.end() || !it->second.valid) return std::nullopt;
      return header_image_checksum(*layout, it->second.bytes, it->second.options);
    }
    case QExpr::Kind::kTableVal: {
      const TableDecl* decl = ctx.env->program->table(e.table);
      if (decl == nullptr) throw UnknownTable("query references undeclared table '" + e.table + "'");
      const Val key = eval(e.kids[0], ctx);
      if (!key.has_value()) return std::nullopt;
      int width = 64;
      if (decl->key.kind == FieldRef::Kind::kHeader) {
        const HeaderLayout* layout = layout_of(*ctx.env->analysis, decl->key.header);
        if (layout != nullptr) {
          const HeaderField* f = layout->field(decl->key.field);
          if (f != nullptr) width = f->bit_width;
        }
      }
      const RuleEntry* entry = ctx.env->control_plane->lookup(e.table, decl->kind, *key, width);
      if (entry == nullptr) return std::nullopt;
      return entry->param(e.param);
    }
    case QExpr::Kind::kClonePort: {
      const Val session = eval(e.kids[0], ctx);
      if (!session.has_value()) return std::nullopt;
      std::optional<uint32_t> port = ctx.env->control_plane->clone_port(*session);
      if (!port.has_value()) return std::nullopt;
      return static_cast<uint64_t>(*port);
    }
    case QExpr::Kind::kMcastHas: {
      const Val group = eval(e.kids[0], ctx);
      const Val port = eval(e.kids[1], ctx);
      if (!group.has_value() || !port.has_value()) return std::nullopt;
      const std::vector<uint32_t>* ports = ctx.env->control_plane->multicast_ports(*group);
      if (ports == nullptr) return std::nullopt;
      return std::find(ports->begin(), ports->end(), *port) != ports->end() ? 1 : 0;
    }
    case QExpr::Kind::kUndefined:
      return std::nullopt;
  }
  return std::nullopt;
}

struct PacketView {
  HeaderStack ing;
  std::vector<HeaderStack> egr;
};

PacketView build_view(const QueryEnv& env, const ProcessResult& result) {
  PacketView view;
  view.ing = structural_parse(*env.program, *env.analysis, result.input.octets());
  view.egr.reserve(result.records.size());
  for (const EgressRecord& rec : result.records) {
    view.egr.push_back(structural_parse(*env.program, *env.analysis, rec.bytes.octets()));
  }
  return view;
}

bool record_in_scope(const EgressRecord& rec, QueryScope scope) {
  switch (scope) {
    case QueryScope::kUnicast:
      return rec.kind == CopyKind::kUnicast;
    case QueryScope::kClone:
      return rec.kind == CopyKind::kClone;
    case QueryScope::kMulticast:
      return rec.kind == CopyKind::kMulticastCopy;
  }
  return false;
}

Verdict judge_condition(const QCondition& cond, const QueryEnv& env, const ProcessResult& result,
                        const PacketView& view, QueryScope scope) {
  bool any = false;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    if (!record_in_scope(result.records[i], scope)) continue;
    any = true;
    EvalCtx ctx{&env, &view.ing, &view.egr[i], &result.records[i], std::nullopt, true};
    if (!truthy(eval(cond.expr, ctx))) return Verdict::kFail;
  }
  if (any) return Verdict::kPass;
  // No copy in scope: egr.dropped reflects the original's fate, every other
  // egress term is undefined.
  EvalCtx ctx{&env, &view.ing, nullptr, nullptr, Val(result.dropped_original ? 1 : 0), true};
  return truthy(eval(cond.expr, ctx)) ? Verdict::kPass : Verdict::kFail;
}

std::vector<ConditionVerdict> evaluate_with_view(const Query& query, const QueryEnv& env,
                                                 const ProcessResult& result,
                                                 const PacketView& view) {
  std::vector<ConditionVerdict> out;
  EvalCtx guard_ctx{&env, &view.ing, nullptr, nullptr, std::nullopt, false};
  const bool guard = truthy(eval(query.guard, guard_ctx));
  int index = 0;
  for (const QCondition& cond : query.then_conds) {
    ConditionVerdict v{query.id, index++, false, cond.platform_dependent,
                       Verdict::kNotApplicable};
    if (guard) v.verdict = judge_condition(cond, env, result, view, query.scope);
    out.push_back(v);
  }
  for (const QCondition& cond : query.else_conds) {
    ConditionVerdict v{query.id, index++, true, cond.platform_dependent,
                       Verdict::kNotApplicable};
    if (!guard) v.verdict = judge_condition(cond, env, result, view, query.scope);
    out.push_back(v);
  }
  return out;
}

std::string describe_atom(const QExpr& e) {
  switch (e.kind) {
    case QExpr::Kind::kIngField:
      return "ing." + e.header + "." + e.field;
    case QExpr::Kind::kEgrField:
      return "egr." + e.header + "." + e.field;
    case QExpr::Kind::kCalcChksum:
      return "calcChksum(" + e.header + ")";
    case QExpr::Kind::kTableVal:
      return "table_val(" + e.table + ", ...)";
    default:
      return "?";
  }
}

void bind_expr(QExpr& e, int query_id, const ProgramAst& program, const StaticAnalysis& analysis,
               std::vector<std::string>& notes) {
  const auto unresolved = [&](const std::string& why) {
    notes.push_back("query " + std::to_string(query_id) + ": " + describe_atom(e) + " " + why +
                    "; treated as undefined");
    QExpr replacement;
    replacement.kind = QExpr::Kind::kUndefined;
    replacement.line = e.line;
    e = std::move(replacement);
  };
  switch (e.kind) {
    case QExpr::Kind::kIngField:
    case QExpr::Kind::kEgrField: {
      auto it = analysis.field_names.find(e.header);
      if (it == analysis.field_names.end()) {
        unresolved("names a header the program does not declare");
        return;
      }
      if (std::find(it->second.begin(), it->second.end(), e.field) == it->second.end()) {
        unresolved("names a field the header does not declare");
      }
      return;
    }
    case QExpr::Kind::kCalcChksum:
      if (layout_of(analysis, e.header) == nullptr) {
        unresolved("names a header the program does not declare");
      }
      return;
    case QExpr::Kind::kTableVal:
      if (program.table(e.table) == nullptr) {
        unresolved("names a table the program does not declare");
        return;
      }
      break;
    default:
      break;
  }
  for (QExpr& kid : e.kids) bind_expr(kid, query_id, program, analysis, notes);
}

}  // namespace

std::vector<Query> parse_queries(const std::string& text) { return QueryParser(text).run(); }

std::vector<ConditionVerdict> evaluate_query(const Query& query, const QueryEnv& env,
                                             const ProcessResult& result) {
  const PacketView view = build_view(env, result);
  return evaluate_with_view(query, env, result, view);
}

std::vector<ConditionVerdict> evaluate_queries(const std::vector<Query>& queries,
                                               const QueryEnv& env, const ProcessResult& result) {
  const PacketView view = build_view(env, result);
  std::vector<ConditionVerdict> out;
  for (const Query& q : queries) {
    std::vector<ConditionVerdict> verdicts = evaluate_with_view(q, env, result, view);
    out.insert(out.end(), verdicts.begin(), verdicts.end());
  }
  return out;
}

BoundQueries bind_queries(const std::vector<Query>& queries, const ProgramAst& program,
                          const StaticAnalysis& analysis) {
  BoundQueries out;
  out.queries = queries;
  for (Query& q : out.queries) {
    bind_expr(q.guard, q.id, program, analysis, out.notes);
    for (QCondition& c : q.then_conds) bind_expr(c.expr, q.id, program, analysis, out.notes);
    for (QCondition& c : q.else_conds) bind_expr(c.expr, q.id, program, analysis, out.notes);
  }
  return out;
}

std::vector<BoundaryValue> extract_boundary_values(const std::vector<Query>& queries) {
  std::vector<BoundaryValue> out;
  const auto add = [&out](const std::string& header, const std::string& field, uint64_t value) {
    BoundaryValue bv{header, field, value};
    if (std::find(out.begin(), out.end(), bv) == out.end()) out.push_back(bv);
  };
  std::function<void(const QExpr&)> walk = [&](const QExpr& e) {
    if (e.kind == QExpr::Kind::kCompare) {
      const QExpr* field_side = nullptr;
      const QExpr* literal_side = nullptr;
      for (const QExpr* kid : {&e.kids[0], &e.kids[1]}) {
        if (kid->kind == QExpr::Kind::kIngField || kid->kind == QExpr::Kind::kEgrField) {
          field_side = kid;
        } else if (kid->kind == QExpr::Kind::kLiteral) {
          literal_side = kid;
        }
      }
      if (field_side != nullptr && literal_side != nullptr) {
        const uint64_t c = literal_side->literal;
        if (c > 0) add(field_side->header, field_side->field, c - 1);
        add(field_side->header, field_side->field, c);
        if (c < ~uint64_t{0}) add(field_side->header, field_side->field, c + 1);
      }
    }
    for (const QExpr& kid : e.kids) walk(kid);
  };
  for (const Query& q : queries) {
    walk(q.guard);
    for (const QCondition& c : q.then_conds) walk(c.expr);
    for (const QCondition& c : q.else_conds) walk(c.expr);
  }
  return out;
}

}  // namespace p6
