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

#include "p6/program.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace p6 {
namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<std::string> tokenize_line(const std::string& line, int line_no) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') break;
    if (is_word_char(c)) {
      std::size_t j = i;
      while (j < line.size() && is_word_char(line[j])) ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
      continue;
    }
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      out.push_back("->");
      i += 2;
      continue;
    }
    if ((c == '=' || c == '!' || c == '<' || c == '>') && i + 1 < line.size() &&
        line[i + 1] == '=') {
      out.push_back(line.substr(i, 2));
      i += 2;
      continue;
    }
    if (std::string("{}(),:=+-<>").find(c) != std::string::npos) {
      out.push_back(std::string(1, c));
      ++i;
      continue;
    }
    throw SyntaxError(line_no, std::string("unexpected character '") + c + "'");
  }
  return out;
}

bool is_integer_literal(const std::string& t) {
  if (t.empty()) return false;
  if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
    return t.find_first_not_of("0123456789abcdefABCDEF", 2) == std::string::npos;
  }
  return t.find_first_not_of("0123456789") == std::string::npos;
}

uint64_t parse_integer(const std::string& t, int line_no) {
  try {
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) {
      return std::stoull(t.substr(2), nullptr, 16);
    }
    return std::stoull(t, nullptr, 10);
  } catch (const std::exception&) {
    throw SyntaxError(line_no, "bad integer literal '" + t + "'");
  }
}

bool is_identifier(const std::string& t) {
  if (t.empty() || std::isdigit(static_cast<unsigned char>(t[0]))) return false;
  return t.find('.') == std::string::npos;
}

FieldRef parse_field_ref(const std::string& t, int line_no) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= t.size(); ++i) {
    if (i == t.size() || t[i] == '.') {
      parts.push_back(t.substr(start, i - start));
      start = i + 1;
    }
  }
  for (const std::string& p : parts) {
    if (p.empty() || std::isdigit(static_cast<unsigned char>(p[0]))) {
      throw SyntaxError(line_no, "bad reference '" + t + "'");
    }
  }
  FieldRef ref;
  if (parts.size() == 3 && parts[0] == "hdr") {
    ref.kind = FieldRef::Kind::kHeader;
    ref.header = parts[1];
    ref.field = parts[2];
  } else if (parts.size() == 2 && parts[0] == "meta") {
    ref.kind = FieldRef::Kind::kMetadata;
    ref.field = parts[1];
  } else if (parts.size() == 1) {
    ref.kind = FieldRef::Kind::kParam;
    ref.field = parts[0];
  } else {
    throw SyntaxError(line_no, "bad reference '" + t + "' (expected hdr.<h>.<f>, meta.<f> or a parameter)");
  }
  return ref;
}

std::optional<RelOp> parse_rel_op(const std::string& t) {
  if (t == "==") return RelOp::kEq;
  if (t == "!=") return RelOp::kNe;
  if (t == "<") return RelOp::kLt;
  if (t == "<=") return RelOp::kLe;
  if (t == ">") return RelOp::kGt;
  if (t == ">=") return RelOp::kGe;
  return std::nullopt;
}

// Token cursor over one line.
struct Cursor {
  const std::vector<std::string>& toks;
  std::size_t pos = 0;
  int line_no;

  bool done() const { return pos >= toks.size(); }
  const std::string& peek() const {
    static const std::string kEnd;
    return done() ? kEnd : toks[pos];
  }
  std::string take() {
    if (done()) throw SyntaxError(line_no, "unexpected end of line");
    return toks[pos++];
  }
  void expect(const std::string& t) {
    if (done() || toks[pos] != t) {
      throw SyntaxError(line_no, "expected '" + t + "'" + (done() ? "" : ", got '" + toks[pos] + "'"));
    }
    ++pos;
  }
};

Expr parse_expr(Cursor& c) {
  Expr e;
  bool negated = false;
  while (true) {
    Expr::Term term;
    term.negated = negated;
    const std::string t = c.take();
    if (is_integer_literal(t)) {
      term.is_literal = true;
      term.literal = parse_integer(t, c.line_no);
    } else {
      term.ref = parse_field_ref(t, c.line_no);
    }
    e.terms.push_back(std::move(term));
    if (c.peek() == "+" || c.peek() == "-") {
      negated = c.take() == "-";
      continue;
    }
    return e;
  }
}

Condition parse_condition(Cursor& c) {
  bool parens = false;
  if (c.peek() == "(") {
    parens = true;
    c.take();
  }
  Condition cond;
  cond.lhs = parse_expr(c);
  std::optional<RelOp> op = parse_rel_op(c.peek());
  if (!op.has_value()) throw SyntaxError(c.line_no, "expected a comparison operator");
  c.take();
  cond.op = *op;
  cond.rhs = parse_expr(c);
  if (parens) c.expect(")");
  return cond;
}

enum class Region { kParserState, kAction, kIngress, kEgress, kDeparser };

bool stmt_allowed(Stmt::Kind k, Region r) {
  switch (k) {
    case Stmt::Kind::kExtract:
    case Stmt::Kind::kSelect:
    case Stmt::Kind::kTransition:
    case Stmt::Kind::kReject:
      return r == Region::kParserState;
    case Stmt::Kind::kApply:
      return r == Region::kIngress || r == Region::kEgress;
    case Stmt::Kind::kClone:
    case Stmt::Kind::kMulticast:
    case Stmt::Kind::kResubmit:
      return r == Region::kAction || r == Region::kIngress || r == Region::kEgress;
    case Stmt::Kind::kCall:
      return r == Region::kAction || r == Region::kIngress || r == Region::kEgress;
    case Stmt::Kind::kEmit:
      return r == Region::kDeparser;
    case Stmt::Kind::kIf:
      return r != Region::kDeparser;
    default:
      return r != Region::kDeparser;
  }
}

const char* region_name(Region r) {
  switch (r) {
    case Region::kParserState:
      return "parser state";
    case Region::kAction:
      return "action";
    case Region::kIngress:
      return "ingress";
    case Region::kEgress:
      return "egress";
    case Region::kDeparser:
      return "deparser";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(const SourceText& source) : src_(source) { ast_.source = source; }

  ProgramAst run() {
    for (std::size_t i = 0; i < src_.lines.size(); ++i) {
      line_no_ = static_cast<int>(i) + 1;
      std::vector<std::string> toks = tokenize_line(src_.lines[i], line_no_);
      if (toks.empty()) continue;
      handle_line(toks);
    }
    if (!stack_.empty()) throw SyntaxError(stack_.back().open_line, "unclosed block");
    const ParserStateDecl* start = ast_.state("start");
    if (ast_.parser_span.open_line == 0 || start == nullptr) {
      throw SyntaxError(ast_.parser_span.open_line, "no start state");
    }
    return std::move(ast_);
  }

 private:
  enum class Ctx { kHeader, kMetadata, kParser, kState, kAction, kIngress, kEgress, kDeparser, kIf };

  struct Frame {
    Ctx ctx;
    Region region = Region::kIngress;
    std::vector<Stmt>* body = nullptr;
    Stmt* owner_if = nullptr;
    bool in_else = false;
    int open_line = 0;
    int* close_slot = nullptr;
  };

  void handle_line(const std::vector<std::string>& toks) {
    if (toks[0] == "}") {
      handle_close(toks);
      return;
    }
    if (stack_.empty()) {
      handle_top(toks);
      return;
    }
    Frame& f = stack_.back();
    switch (f.ctx) {
      case Ctx::kHeader:
      case Ctx::kMetadata:
        handle_field(toks, f);
        return;
      case Ctx::kParser:
        handle_state_open(toks);
        return;
      case Ctx::kState:
      case Ctx::kAction:
      case Ctx::kIngress:
      case Ctx::kEgress:
      case Ctx::kDeparser:
      case Ctx::kIf: {
        Cursor c{toks, 0, line_no_};
        Stmt stmt = parse_stmt(c, f.region);
        if (!c.done()) throw SyntaxError(line_no_, "one statement per line");
        if (stmt.kind == Stmt::Kind::kIf && !stmt.inline_body) {
          f.body->push_back(std::move(stmt));
          Stmt& owner = f.body->back();
          stack_.push_back(Frame{Ctx::kIf, f.region, &owner.then_body, &owner, false, line_no_, nullptr});
        } else {
          f.body->push_back(std::move(stmt));
        }
        return;
      }
    }
  }

  void handle_close(const std::vector<std::string>& toks) {
    if (stack_.empty()) throw SyntaxError(line_no_, "unmatched '}'");
    Frame& f = stack_.back();
    if (toks.size() == 1) {
      if (f.close_slot != nullptr) *f.close_slot = line_no_;
      stack_.pop_back();
      return;
    }
    if (toks.size() == 3 && toks[1] == "else" && toks[2] == "{") {
      if (f.ctx != Ctx::kIf || f.in_else) throw SyntaxError(line_no_, "'else' without matching 'if'");
      f.body = &f.owner_if->else_body;
      f.in_else = true;
      return;
    }
    throw SyntaxError(line_no_, "unexpected tokens after '}'");
  }

  void handle_top(const std::vector<std::string>& toks) {
    Cursor c{toks, 0, line_no_};
    const std::string kw = c.take();
    if (kw == "header") {
      HeaderDecl h;
      h.name = take_identifier(c);
      h.line = line_no_;
      c.expect("{");
      require_end(c);
      ast_.headers.push_back(std::move(h));
      stack_.push_back(Frame{Ctx::kHeader, Region::kIngress, nullptr, nullptr, false, line_no_, nullptr});
      return;
    }
    if (kw == "metadata") {
      c.expect("{");
      require_end(c);
      ast_.metadata_span.open_line = line_no_;
      stack_.push_back(Frame{Ctx::kMetadata, Region::kIngress, nullptr, nullptr, false, line_no_,
                             &ast_.metadata_span.close_line});
      return;
    }
    if (kw == "parser") {
      c.expect("{");
      require_end(c);
      ast_.parser_span.open_line = line_no_;
      stack_.push_back(Frame{Ctx::kParser, Region::kParserState, nullptr, nullptr, false, line_no_,
                             &ast_.parser_span.close_line});
      return;
    }
    if (kw == "action") {
      ActionDecl a;
      a.name = take_identifier(c);
      a.line = line_no_;
      if (c.peek() == "(") {
        c.take();
        while (c.peek() != ")") {
          a.params.push_back(take_identifier(c));
          if (c.peek() == ",") c.take();
        }
        c.expect(")");
      }
      c.expect("{");
      require_end(c);
      ast_.actions.push_back(std::move(a));
      ActionDecl& owner = ast_.actions.back();
      stack_.push_back(Frame{Ctx::kAction, Region::kAction, &owner.body, nullptr, false, line_no_,
                             &owner.close_line});
      return;
    }
    if (kw == "table") {
      TableDecl t;
      t.name = take_identifier(c);
      t.line = line_no_;
      const std::string kind = c.take();
      if (kind == "lpm") {
        t.kind = TableKind::kLpm;
      } else if (kind == "exact") {
        t.kind = TableKind::kExact;
      } else {
        throw SyntaxError(line_no_, "table kind must be lpm or exact");
      }
      c.expect("on");
      t.key = parse_field_ref(c.take(), line_no_);
      c.expect("{");
      while (c.peek() != "}") {
        t.actions.push_back(take_identifier(c));
        if (c.peek() == ",") c.take();
      }
      c.expect("}");
      require_end(c);
      ast_.tables.push_back(std::move(t));
      return;
    }
    if (kw == "ingress" || kw == "egress" || kw == "deparser") {
      c.expect("{");
      require_end(c);
      if (kw == "ingress") {
        ast_.ingress_span.open_line = line_no_;
        stack_.push_back(Frame{Ctx::kIngress, Region::kIngress, &ast_.ingress, nullptr, false,
                               line_no_, &ast_.ingress_span.close_line});
      } else if (kw == "egress") {
        ast_.egress_span.open_line = line_no_;
        stack_.push_back(Frame{Ctx::kEgress, Region::kEgress, &ast_.egress, nullptr, false, line_no_,
                               &ast_.egress_span.close_line});
      } else {
        ast_.deparser_span.open_line = line_no_;
        stack_.push_back(Frame{Ctx::kDeparser, Region::kDeparser, &ast_.deparser, nullptr, false,
                               line_no_, &ast_.deparser_span.close_line});
      }
      return;
    }
    throw SyntaxError(line_no_, "expected a declaration, got '" + kw + "'");
  }

  void handle_field(const std::vector<std::string>& toks, Frame& f) {
    Cursor c{toks, 0, line_no_};
    c.expect("field");
    FieldDecl field;
    field.name = take_identifier(c);
    field.line = line_no_;
    c.expect(":");
    field.bit_width = static_cast<int>(parse_integer(c.take(), line_no_));
    require_end(c);
    if (f.ctx == Ctx::kHeader) {
      ast_.headers.back().fields.push_back(std::move(field));
    } else {
      ast_.metadata.push_back(std::move(field));
    }
  }

  void handle_state_open(const std::vector<std::string>& toks) {
    Cursor c{toks, 0, line_no_};
    c.expect("state");
    ParserStateDecl s;
    s.name = take_identifier(c);
    s.line = line_no_;
    c.expect("{");
    require_end(c);
    ast_.states.push_back(std::move(s));
    ParserStateDecl& owner = ast_.states.back();
    stack_.push_back(Frame{Ctx::kState, Region::kParserState, &owner.body, nullptr, false, line_no_,
                           &owner.close_line});
  }

  Stmt parse_stmt(Cursor& c, Region region) {
    Stmt s;
    s.line = line_no_;
    const std::string kw = c.peek();

    if (kw == "extract") {
      c.take();
      s.kind = Stmt::Kind::kExtract;
      s.name = take_identifier(c);
    } else if (kw == "select") {
      c.take();
      s.kind = Stmt::Kind::kSelect;
      s.target = parse_field_ref(c.take(), line_no_);
      c.expect("{");
      bool saw_default = false;
      while (c.peek() != "}") {
        if (c.peek() == "default") {
          c.take();
          c.expect("->");
          s.default_target = take_identifier(c);
          saw_default = true;
        } else {
          if (saw_default) throw SyntaxError(line_no_, "default arm must come last");
          SelectArm arm;
          arm.value = parse_integer(c.take(), line_no_);
          c.expect("->");
          arm.target = take_identifier(c);
          s.arms.push_back(std::move(arm));
        }
        if (c.peek() == ",") c.take();
      }
      c.expect("}");
    } else if (kw == "transition") {
      c.take();
      s.kind = Stmt::Kind::kTransition;
      s.name = take_identifier(c);
    } else if (kw == "set") {
      c.take();
      s.kind = Stmt::Kind::kSet;
      s.target = parse_field_ref(c.take(), line_no_);
      c.expect("=");
      s.value = parse_expr(c);
    } else if (kw == "decrement") {
      c.take();
      s.kind = Stmt::Kind::kDecrement;
      s.target = parse_field_ref(c.take(), line_no_);
    } else if (kw == "update_checksum" || kw == "verify_checksum") {
      c.take();
      s.kind = kw == "update_checksum" ? Stmt::Kind::kUpdateChecksum : Stmt::Kind::kVerifyChecksum;
      c.expect("(");
      s.name = take_identifier(c);
      c.expect(")");
    } else if (kw == "drop") {
      c.take();
      s.kind = Stmt::Kind::kDrop;
    } else if (kw == "reject") {
      c.take();
      s.kind = Stmt::Kind::kReject;
    } else if (kw == "resubmit") {
      c.take();
      s.kind = Stmt::Kind::kResubmit;
    } else if (kw == "clone" || kw == "multicast") {
      c.take();
      s.kind = kw == "clone" ? Stmt::Kind::kClone : Stmt::Kind::kMulticast;
      s.value = parse_expr(c);
    } else if (kw == "apply") {
      c.take();
      s.kind = Stmt::Kind::kApply;
      s.name = take_identifier(c);
    } else if (kw == "emit") {
      c.take();
      s.kind = Stmt::Kind::kEmit;
      s.name = take_identifier(c);
    } else if (kw == "if") {
      c.take();
      s.kind = Stmt::Kind::kIf;
      s.cond = parse_condition(c);
      c.expect("{");
      if (!c.done()) {
        // Inline form: if <cond> { <stmt> } carries exactly one statement.
        if (c.peek() == "if") throw SyntaxError(line_no_, "inline if cannot nest");
        Stmt inner = parse_stmt(c, region);
        c.expect("}");
        s.inline_body = true;
        s.then_body.push_back(std::move(inner));
      }
    } else if (is_identifier(kw)) {
      c.take();
      s.kind = Stmt::Kind::kCall;
      s.name = kw;
      c.expect("(");
      c.expect(")");
    } else {
      throw SyntaxError(line_no_, "expected a statement, got '" + kw + "'");
    }

    if (!stmt_allowed(s.kind, region)) {
      throw SyntaxError(line_no_, "statement not allowed in " + std::string(region_name(region)));
    }
    return s;
  }

  std::string take_identifier(Cursor& c) {
    const std::string t = c.take();
    if (!is_identifier(t)) throw SyntaxError(line_no_, "expected an identifier, got '" + t + "'");
    return t;
  }

  void require_end(Cursor& c) {
    if (!c.done()) throw SyntaxError(line_no_, "one statement per line");
  }

  const SourceText& src_;
  ProgramAst ast_;
  std::vector<Frame> stack_;
  int line_no_ = 0;
};

}  // namespace

SourceText SourceText::from_string(const std::string& text) {
  SourceText src;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      src.lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) src.lines.push_back(cur);
  return src;
}

std::string SourceText::to_string() const {
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

const HeaderDecl* ProgramAst::header(const std::string& name) const {
  for (const HeaderDecl& h : headers) {
    if (h.name == name) return &h;
  }
  return nullptr;
}

const ParserStateDecl* ProgramAst::state(const std::string& name) const {
  for (const ParserStateDecl& s : states) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const ActionDecl* ProgramAst::action(const std::string& name) const {
  for (const ActionDecl& a : actions) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const TableDecl* ProgramAst::table(const std::string& name) const {
  for (const TableDecl& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<FieldDecl> builtin_metadata_fields() {
  return {{"egress_port", kEgressPortBits, 0}, {"resubmitted", 1, 0}};
}

ProgramAst parse_program(const SourceText& source) { return Parser(source).run(); }

namespace {

void walk_stmts(const std::vector<Stmt>& body, const std::function<void(const Stmt&)>& fn) {
  for (const Stmt& s : body) {
    fn(s);
    walk_stmts(s.then_body, fn);
    walk_stmts(s.else_body, fn);
  }
}

class Validator {
 public:
  explicit Validator(const ProgramAst& p) : p_(p) {}

  std::vector<Diagnostic> run() {
    check_declarations();
    check_tables();
    check_states();
    check_bodies();
    check_call_graph();
    check_egress_restrictions();
    if (p_.deparser_span.open_line == 0 || p_.deparser.empty()) {
      diag(0, "deparser with at least one emit is required");
    }
    return std::move(diags_);
  }

 private:
  void diag(int line, const std::string& msg) { diags_.push_back({line, msg}); }

  void check_declarations() {
    std::set<std::string> names;
    for (const HeaderDecl& h : p_.headers) {
      if (!names.insert(h.name).second) diag(h.line, "duplicate header '" + h.name + "'");
      std::set<std::string> fields;
      for (const FieldDecl& f : h.fields) {
        if (!fields.insert(f.name).second) {
          diag(f.line, "duplicate field '" + f.name + "' in header '" + h.name + "'");
        }
        if (f.bit_width < 1 || f.bit_width > 64) {
          diag(f.line, "field width must be in [1, 64]");
        }
      }
      if (h.fields.empty()) diag(h.line, "header '" + h.name + "' has no fields");
      int total = 0;
      for (const FieldDecl& f : h.fields) total += f.bit_width;
      if (total % 8 != 0) {
        diag(h.line, "header '" + h.name + "' is not a whole number of octets");
      }
    }
    std::set<std::string> meta;
    for (const FieldDecl& f : builtin_metadata_fields()) meta.insert(f.name);
    for (const FieldDecl& f : p_.metadata) {
      if (!meta.insert(f.name).second) diag(f.line, "duplicate metadata field '" + f.name + "'");
      if (f.bit_width < 1 || f.bit_width > 64) diag(f.line, "field width must be in [1, 64]");
    }
    std::set<std::string> states;
    for (const ParserStateDecl& s : p_.states) {
      if (s.name == "accept" || s.name == "reject") diag(s.line, "state name '" + s.name + "' is reserved");
      if (!states.insert(s.name).second) diag(s.line, "duplicate state '" + s.name + "'");
    }
    std::set<std::string> actions;
    for (const ActionDecl& a : p_.actions) {
      if (!actions.insert(a.name).second) diag(a.line, "duplicate action '" + a.name + "'");
      std::set<std::string> params(a.params.begin(), a.params.end());
      if (params.size() != a.params.size()) diag(a.line, "duplicate parameter in action '" + a.name + "'");
    }
    std::set<std::string> tables;
    for (const TableDecl& t : p_.tables) {
      if (!tables.insert(t.name).second) diag(t.line, "duplicate table '" + t.name + "'");
    }
  }

  bool metadata_field_exists(const std::string& name) const {
    for (const FieldDecl& f : builtin_metadata_fields()) {
      if (f.name == name) return true;
    }
    for (const FieldDecl& f : p_.metadata) {
      if (f.name == name) return true;
    }
    return false;
  }

  void check_ref(const FieldRef& ref, int line, const ActionDecl* enclosing) {
    switch (ref.kind) {
      case FieldRef::Kind::kHeader: {
        const HeaderDecl* h = p_.header(ref.header);
        if (h == nullptr) {
          diag(line, "unknown header '" + ref.header + "'");
          return;
        }
        for (const FieldDecl& f : h->fields) {
          if (f.name == ref.field) return;
        }
        diag(line, "header '" + ref.header + "' has no field '" + ref.field + "'");
        return;
      }
      case FieldRef::Kind::kMetadata:
        if (!metadata_field_exists(ref.field)) diag(line, "unknown metadata field '" + ref.field + "'");
        return;
      case FieldRef::Kind::kParam:
        if (enclosing == nullptr) {
          diag(line, "'" + ref.field + "' is not a declared name");
          return;
        }
        if (std::find(enclosing->params.begin(), enclosing->params.end(), ref.field) ==
            enclosing->params.end()) {
          diag(line, "'" + ref.field + "' is not a parameter of action '" + enclosing->name + "'");
        }
        return;
    }
  }

  void check_expr(const Expr& e, int line, const ActionDecl* enclosing) {
    for (const Expr::Term& t : e.terms) {
      if (!t.is_literal) check_ref(t.ref, line, enclosing);
    }
  }

  void check_checksum_target(const Stmt& s) {
    const HeaderDecl* h = p_.header(s.name);
    if (h == nullptr) {
      diag(s.line, "unknown header '" + s.name + "'");
      return;
    }
    for (const FieldDecl& f : h->fields) {
      if (f.name == "checksum") return;
    }
    diag(s.line, "header '" + s.name + "' has no checksum field");
  }

  void check_stmt(const Stmt& s, const ActionDecl* enclosing) {
    switch (s.kind) {
      case Stmt::Kind::kExtract:
      case Stmt::Kind::kEmit:
        if (p_.header(s.name) == nullptr) diag(s.line, "unknown header '" + s.name + "'");
        break;
      case Stmt::Kind::kSelect:
        check_ref(s.target, s.line, enclosing);
        for (const SelectArm& arm : s.arms) check_target(arm.target, s.line);
        if (!s.default_target.empty()) check_target(s.default_target, s.line);
        break;
      case Stmt::Kind::kTransition:
        check_target(s.name, s.line);
        break;
      case Stmt::Kind::kSet:
        if (s.target.kind == FieldRef::Kind::kParam) {
          diag(s.line, "cannot assign to parameter '" + s.target.field + "'");
        } else {
          check_ref(s.target, s.line, enclosing);
        }
        check_expr(s.value, s.line, enclosing);
        break;
      case Stmt::Kind::kDecrement:
        if (s.target.kind == FieldRef::Kind::kParam) {
          diag(s.line, "cannot assign to parameter '" + s.target.field + "'");
        } else {
          check_ref(s.target, s.line, enclosing);
        }
        break;
      case Stmt::Kind::kUpdateChecksum:
      case Stmt::Kind::kVerifyChecksum:
        check_checksum_target(s);
        break;
      case Stmt::Kind::kClone:
      case Stmt::Kind::kMulticast:
        check_expr(s.value, s.line, enclosing);
        break;
      case Stmt::Kind::kApply:
        if (p_.table(s.name) == nullptr) diag(s.line, "unknown table '" + s.name + "'");
        break;
      case Stmt::Kind::kIf:
        check_expr(s.cond.lhs, s.line, enclosing);
        check_expr(s.cond.rhs, s.line, enclosing);
        break;
      case Stmt::Kind::kCall: {
        const ActionDecl* a = p_.action(s.name);
        if (a == nullptr) {
          diag(s.line, "unknown action '" + s.name + "'");
        } else if (!a->params.empty()) {
          diag(s.line, "action '" + s.name + "' takes parameters and cannot be called directly");
        }
        break;
      }
      default:
        break;
    }
  }

  void check_target(const std::string& target, int line) {
    if (target == "accept" || target == "reject") return;
    if (p_.state(target) == nullptr) diag(line, "unknown parser state '" + target + "'");
  }

  void check_tables() {
    for (const TableDecl& t : p_.tables) {
      if (t.key.kind == FieldRef::Kind::kParam) {
        diag(t.line, "table key must be a header or metadata field");
      } else {
        check_ref(t.key, t.line, nullptr);
      }
      if (t.actions.empty()) diag(t.line, "table '" + t.name + "' lists no actions");
      for (const std::string& a : t.actions) {
        if (p_.action(a) == nullptr) diag(t.line, "unknown action '" + a + "'");
      }
    }
  }

  // Every state reachable from start must be able to reach accept or reject.
  void check_states() {
    std::map<std::string, std::vector<std::string>> edges;
    std::map<std::string, bool> falls_through;
    for (const ParserStateDecl& s : p_.states) {
      std::vector<std::string>& out = edges[s.name];
      bool terminated = false;
      for (const Stmt& st : s.body) {
        if (st.kind == Stmt::Kind::kTransition) {
          out.push_back(st.name);
          terminated = true;
        } else if (st.kind == Stmt::Kind::kSelect) {
          for (const SelectArm& arm : st.arms) out.push_back(arm.target);
          out.push_back(st.default_target.empty() ? "reject" : st.default_target);
          terminated = true;
        }
      }
      falls_through[s.name] = !terminated;
      if (!terminated) out.push_back("accept");
    }
    // Backward search from the terminal states.
    std::set<std::string> can_finish = {"accept", "reject"};
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [state, out] : edges) {
        if (can_finish.count(state)) continue;
        for (const std::string& t : out) {
          if (can_finish.count(t)) {
            can_finish.insert(state);
            changed = true;
            break;
          }
        }
      }
    }
    for (const ParserStateDecl& s : p_.states) {
      if (!can_finish.count(s.name)) {
        diag(s.line, "state '" + s.name + "' cannot reach accept or reject");
      }
    }
  }

  void check_bodies() {
    for (const ParserStateDecl& s : p_.states) {
      walk_stmts(s.body, [&](const Stmt& st) { check_stmt(st, nullptr); });
    }
    for (const ActionDecl& a : p_.actions) {
      walk_stmts(a.body, [&](const Stmt& st) { check_stmt(st, &a); });
    }
    walk_stmts(p_.ingress, [&](const Stmt& st) { check_stmt(st, nullptr); });
    walk_stmts(p_.egress, [&](const Stmt& st) { check_stmt(st, nullptr); });
    for (const Stmt& st : p_.deparser) check_stmt(st, nullptr);
  }

  void check_call_graph() {
    // Depth-first search over action calls; a back edge means recursion.
    std::map<std::string, int> mark;  // 0 unvisited, 1 on stack, 2 done
    std::function<void(const ActionDecl&)> visit = [&](const ActionDecl& a) {
      mark[a.name] = 1;
      walk_stmts(a.body, [&](const Stmt& st) {
        if (st.kind != Stmt::Kind::kCall) return;
        const ActionDecl* callee = p_.action(st.name);
        if (callee == nullptr) return;
        if (mark[callee->name] == 1) {
          diag(st.line, "recursive action call '" + st.name + "'");
        } else if (mark[callee->name] == 0) {
          visit(*callee);
        }
      });
      mark[a.name] = 2;
    };
    for (const ActionDecl& a : p_.actions) {
      if (mark[a.name] == 0) visit(a);
    }
  }

  // Replication and resubmission decisions belong to ingress; egress runs
  // once per copy after the replication engine has resolved them.
  void check_egress_restrictions() {
    std::map<std::string, bool> uses_pre;
    std::map<std::string, bool> sets_port;
    std::function<bool(const ActionDecl&, std::map<std::string, bool>&, Stmt::Kind, Stmt::Kind,
                       Stmt::Kind)>
        dummy;
    // Transitive action properties.
    std::function<void(const ActionDecl&)> compute = [&](const ActionDecl& a) {
      if (uses_pre.count(a.name)) return;
      uses_pre[a.name] = false;
      sets_port[a.name] = false;
      walk_stmts(a.body, [&](const Stmt& st) {
        if (st.kind == Stmt::Kind::kClone || st.kind == Stmt::Kind::kMulticast ||
            st.kind == Stmt::Kind::kResubmit) {
          uses_pre[a.name] = true;
        }
        if (st.kind == Stmt::Kind::kSet && st.target.kind == FieldRef::Kind::kMetadata &&
            st.target.field == "egress_port") {
          sets_port[a.name] = true;
        }
        if (st.kind == Stmt::Kind::kCall) {
          const ActionDecl* callee = p_.action(st.name);
          if (callee != nullptr) {
            compute(*callee);
            uses_pre[a.name] = uses_pre[a.name] || uses_pre[callee->name];
            sets_port[a.name] = sets_port[a.name] || sets_port[callee->name];
          }
        }
      });
    };
    for (const ActionDecl& a : p_.actions) compute(a);

    walk_stmts(p_.egress, [&](const Stmt& st) {
      switch (st.kind) {
        case Stmt::Kind::kClone:
        case Stmt::Kind::kMulticast:
        case Stmt::Kind::kResubmit:
          diag(st.line, "replication decisions are not allowed in egress");
          break;
        case Stmt::Kind::kSet:
          if (st.target.kind == FieldRef::Kind::kMetadata && st.target.field == "egress_port") {
            diag(st.line, "egress cannot redirect a copy (egress_port is read-only here)");
          }
          break;
        case Stmt::Kind::kCall:
          if (uses_pre[st.name]) diag(st.line, "action '" + st.name + "' replicates and cannot run in egress");
          if (sets_port[st.name]) diag(st.line, "action '" + st.name + "' redirects and cannot run in egress");
          break;
        case Stmt::Kind::kApply: {
          const TableDecl* t = p_.table(st.name);
          if (t == nullptr) break;
          for (const std::string& a : t->actions) {
            if (uses_pre.count(a) && uses_pre[a]) {
              diag(st.line, "table '" + t->name + "' can replicate and cannot run in egress");
              break;
            }
          }
          break;
        }
        default:
          break;
      }
    });
  }

  const ProgramAst& p_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> validate_program(const ProgramAst& program) {
  return Validator(program).run();
}

StaticAnalysis analyze_program(const ProgramAst& program) {
  StaticAnalysis out;
  for (const HeaderDecl& h : program.headers) {
    HeaderLayout layout;
    layout.header_name = h.name;
    int offset = 0;
    for (const FieldDecl& f : h.fields) {
      layout.fields.push_back({f.name, offset, f.bit_width});
      offset += f.bit_width;
    }
    out.layouts.push_back(std::move(layout));
    out.header_names.push_back(h.name);
    std::vector<std::string>& names = out.field_names[h.name];
    for (const FieldDecl& f : h.fields) names.push_back(f.name);
  }
  for (const FieldDecl& f : program.metadata) out.metadata_names.push_back(f.name);
  for (const TableDecl& t : program.tables) out.table_keys.push_back({t.name, t.kind, t.key});
  for (const ParserStateDecl& s : program.states) {
    out.parser_state_names.push_back(s.name);
    walk_stmts(s.body, [&](const Stmt& st) {
      if (st.kind == Stmt::Kind::kSelect && st.target.field == "ihl") out.accepts_options = true;
      if (st.kind == Stmt::Kind::kExtract && !out.extracted_in_state.count(st.name)) {
        out.extracted_in_state[st.name] = s.name;
      }
    });
  }
  return out;
}

namespace {

std::string render_ref(const FieldRef& r) {
  switch (r.kind) {
    case FieldRef::Kind::kHeader:
      return "hdr." + r.header + "." + r.field;
    case FieldRef::Kind::kMetadata:
      return "meta." + r.field;
    case FieldRef::Kind::kParam:
      return r.field;
  }
  return "?";
}

std::string render_expr(const Expr& e) {
  std::string out;
  for (std::size_t i = 0; i < e.terms.size(); ++i) {
    const Expr::Term& t = e.terms[i];
    if (i > 0) out += t.negated ? " - " : " + ";
    out += t.is_literal ? std::to_string(t.literal) : render_ref(t.ref);
  }
  return out;
}

std::string render_op(RelOp op) {
  switch (op) {
    case RelOp::kEq:
      return "==";
    case RelOp::kNe:
      return "!=";
    case RelOp::kLt:
      return "<";
    case RelOp::kLe:
      return "<=";
    case RelOp::kGt:
      return ">";
    case RelOp::kGe:
      return ">=";
  }
  return "?";
}

std::string render_cond(const Condition& c) {
  return "(" + render_expr(c.lhs) + " " + render_op(c.op) + " " + render_expr(c.rhs) + ")";
}

void render_stmt(const Stmt& s, int indent, std::vector<std::string>& out) {
  const std::string pad(2 * indent, ' ');
  switch (s.kind) {
    case Stmt::Kind::kExtract:
      out.push_back(pad + "extract " + s.name);
      break;
    case Stmt::Kind::kSelect: {
      std::string line = pad + "select " + render_ref(s.target) + " { ";
      for (const SelectArm& arm : s.arms) {
        line += std::to_string(arm.value) + " -> " + arm.target + ", ";
      }
      line += "default -> " + (s.default_target.empty() ? std::string("reject") : s.default_target);
      line += " }";
      out.push_back(line);
      break;
    }
    case Stmt::Kind::kTransition:
      out.push_back(pad + "transition " + s.name);
      break;
    case Stmt::Kind::kSet:
      out.push_back(pad + "set " + render_ref(s.target) + " = " + render_expr(s.value));
      break;
    case Stmt::Kind::kDecrement:
      out.push_back(pad + "decrement " + render_ref(s.target));
      break;
    case Stmt::Kind::kUpdateChecksum:
      out.push_back(pad + "update_checksum(" + s.name + ")");
      break;
    case Stmt::Kind::kVerifyChecksum:
      out.push_back(pad + "verify_checksum(" + s.name + ")");
      break;
    case Stmt::Kind::kDrop:
      out.push_back(pad + "drop");
      break;
    case Stmt::Kind::kReject:
      out.push_back(pad + "reject");
      break;
    case Stmt::Kind::kClone:
      out.push_back(pad + "clone " + render_expr(s.value));
      break;
    case Stmt::Kind::kMulticast:
      out.push_back(pad + "multicast " + render_expr(s.value));
      break;
    case Stmt::Kind::kResubmit:
      out.push_back(pad + "resubmit");
      break;
    case Stmt::Kind::kApply:
      out.push_back(pad + "apply " + s.name);
      break;
    case Stmt::Kind::kCall:
      out.push_back(pad + s.name + "()");
      break;
    case Stmt::Kind::kEmit:
      out.push_back(pad + "emit " + s.name);
      break;
    case Stmt::Kind::kIf:
      if (s.inline_body && s.then_body.size() == 1 && s.else_body.empty()) {
        std::vector<std::string> inner;
        render_stmt(s.then_body[0], 0, inner);
        out.push_back(pad + "if " + render_cond(s.cond) + " { " + inner[0] + " }");
        break;
      }
      out.push_back(pad + "if " + render_cond(s.cond) + " {");
      for (const Stmt& st : s.then_body) render_stmt(st, indent + 1, out);
      if (!s.else_body.empty()) {
        out.push_back(pad + "} else {");
        for (const Stmt& st : s.else_body) render_stmt(st, indent + 1, out);
      }
      out.push_back(pad + "}");
      break;
  }
}

}  // namespace

SourceText render_program(const ProgramAst& p) {
  std::vector<std::string> out;
  for (const HeaderDecl& h : p.headers) {
    out.push_back("header " + h.name + " {");
    for (const FieldDecl& f : h.fields) {
      out.push_back("  field " + f.name + " : " + std::to_string(f.bit_width));
    }
    out.push_back("}");
    out.push_back("");
  }
  if (!p.metadata.empty()) {
    out.push_back("metadata {");
    for (const FieldDecl& f : p.metadata) {
      out.push_back("  field " + f.name + " : " + std::to_string(f.bit_width));
    }
    out.push_back("}");
    out.push_back("");
  }
  out.push_back("parser {");
  for (const ParserStateDecl& s : p.states) {
    out.push_back("  state " + s.name + " {");
    for (const Stmt& st : s.body) render_stmt(st, 2, out);
    out.push_back("  }");
  }
  out.push_back("}");
  out.push_back("");
  for (const ActionDecl& a : p.actions) {
    std::string head = "action " + a.name;
    if (!a.params.empty()) {
      head += "(";
      for (std::size_t i = 0; i < a.params.size(); ++i) {
        if (i > 0) head += ", ";
        head += a.params[i];
      }
      head += ")";
    }
    out.push_back(head + " {");
    for (const Stmt& st : a.body) render_stmt(st, 1, out);
    out.push_back("}");
    out.push_back("");
  }
  for (const TableDecl& t : p.tables) {
    std::string line = "table " + t.name + (t.kind == TableKind::kLpm ? " lpm" : " exact") +
                       " on " + render_ref(t.key) + " { ";
    for (std::size_t i = 0; i < t.actions.size(); ++i) {
      if (i > 0) line += ", ";
      line += t.actions[i];
    }
    line += " }";
    out.push_back(line);
    out.push_back("");
  }
  out.push_back("ingress {");
  for (const Stmt& st : p.ingress) render_stmt(st, 1, out);
  out.push_back("}");
  out.push_back("");
  out.push_back("egress {");
  for (const Stmt& st : p.egress) render_stmt(st, 1, out);
  out.push_back("}");
  out.push_back("");
  out.push_back("deparser {");
  for (const Stmt& st : p.deparser) render_stmt(st, 1, out);
  out.push_back("}");
  return SourceText{std::move(out)};
}

std::set<int> statement_lines(const ProgramAst& p) {
  std::set<int> lines;
  auto add = [&](const Stmt& s) { lines.insert(s.line); };
  for (const ParserStateDecl& s : p.states) walk_stmts(s.body, add);
  for (const ActionDecl& a : p.actions) walk_stmts(a.body, add);
  walk_stmts(p.ingress, add);
  walk_stmts(p.egress, add);
  for (const Stmt& s : p.deparser) add(s);
  return lines;
}

}  // namespace p6
