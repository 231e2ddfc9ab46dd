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

#include <gtest/gtest.h>

#include <algorithm>
#include <string>

namespace p6 {
namespace {

constexpr char kSample[] = R"(# Minimal router used by the parser tests.
header ethernet {
  field dst_addr : 48
  field src_addr : 48
  field ether_type : 16
}

header ipv4 {
  field version : 4
  field ihl : 4
  field dscp_ecn : 8
  field total_len : 16
  field id : 16
  field flags : 3
  field frag_offset : 13
  field ttl : 8
  field protocol : 8
  field checksum : 16
  field src : 32
  field dst : 32
}

metadata {
  field l3_class : 4
}

parser {
  state start {
    extract ethernet
    select hdr.ethernet.ether_type { 0x0800 -> parse_ipv4, default -> accept }
  }
  state parse_ipv4 {
    extract ipv4
    verify_checksum(ipv4)
    if (hdr.ipv4.ttl <= 1) { drop }
    transition accept
  }
}

action drop_packet {
  drop
}

action forward(port, dmac, smac) {
  set meta.egress_port = port
  set hdr.ethernet.dst_addr = dmac
  set hdr.ethernet.src_addr = smac
  decrement hdr.ipv4.ttl
}

table ipv4_lpm lpm on hdr.ipv4.dst { forward, drop_packet }

ingress {
  if (hdr.ipv4.ttl > 1) {
    apply ipv4_lpm
  } else {
    drop
  }
}

egress {
  update_checksum(ipv4)
}

deparser {
  emit ethernet
  emit ipv4
}
)";

ProgramAst parse_text(const std::string& text) {
  return parse_program(SourceText::from_string(text));
}

TEST(ProgramParse, SampleStructure) {
  ProgramAst p = parse_text(kSample);
  ASSERT_EQ(p.headers.size(), 2u);
  EXPECT_EQ(p.headers[0].name, "ethernet");
  EXPECT_EQ(p.headers[0].fields.size(), 3u);
  EXPECT_EQ(p.headers[1].fields.size(), 12u);
  ASSERT_EQ(p.metadata.size(), 1u);
  EXPECT_EQ(p.metadata[0].name, "l3_class");

  ASSERT_EQ(p.states.size(), 2u);
  EXPECT_EQ(p.states[0].name, "start");
  ASSERT_EQ(p.states[0].body.size(), 2u);
  EXPECT_EQ(p.states[0].body[0].kind, Stmt::Kind::kExtract);
  const Stmt& sel = p.states[0].body[1];
  EXPECT_EQ(sel.kind, Stmt::Kind::kSelect);
  ASSERT_EQ(sel.arms.size(), 1u);
  EXPECT_EQ(sel.arms[0].value, 0x0800u);
  EXPECT_EQ(sel.arms[0].target, "parse_ipv4");
  EXPECT_EQ(sel.default_target, "accept");

  const ParserStateDecl* ipv4_state = p.state("parse_ipv4");
  ASSERT_NE(ipv4_state, nullptr);
  ASSERT_EQ(ipv4_state->body.size(), 4u);
  const Stmt& guard = ipv4_state->body[2];
  EXPECT_EQ(guard.kind, Stmt::Kind::kIf);
  EXPECT_TRUE(guard.inline_body);
  ASSERT_EQ(guard.then_body.size(), 1u);
  EXPECT_EQ(guard.then_body[0].kind, Stmt::Kind::kDrop);
  EXPECT_EQ(guard.then_body[0].line, guard.line);
  EXPECT_EQ(guard.cond.op, RelOp::kLe);

  ASSERT_EQ(p.actions.size(), 2u);
  EXPECT_TRUE(p.actions[0].params.empty());
  ASSERT_EQ(p.actions[1].params.size(), 3u);
  EXPECT_EQ(p.actions[1].params[1], "dmac");

  ASSERT_EQ(p.tables.size(), 1u);
  EXPECT_EQ(p.tables[0].kind, TableKind::kLpm);
  EXPECT_EQ(p.tables[0].key.header, "ipv4");
  EXPECT_EQ(p.tables[0].key.field, "dst");
  ASSERT_EQ(p.tables[0].actions.size(), 2u);

  ASSERT_EQ(p.ingress.size(), 1u);
  const Stmt& branch = p.ingress[0];
  EXPECT_EQ(branch.kind, Stmt::Kind::kIf);
  EXPECT_FALSE(branch.inline_body);
  ASSERT_EQ(branch.then_body.size(), 1u);
  EXPECT_EQ(branch.then_body[0].kind, Stmt::Kind::kApply);
  ASSERT_EQ(branch.else_body.size(), 1u);
  EXPECT_EQ(branch.else_body[0].kind, Stmt::Kind::kDrop);

  ASSERT_EQ(p.deparser.size(), 2u);
  EXPECT_EQ(p.deparser[1].name, "ipv4");

  EXPECT_TRUE(validate_program(p).empty());
}

TEST(ProgramParse, SpansCoverBlocks) {
  ProgramAst p = parse_text(kSample);
  EXPECT_GT(p.parser_span.open_line, 0);
  EXPECT_GT(p.parser_span.close_line, p.parser_span.open_line);
  EXPECT_GT(p.ingress_span.close_line, p.ingress_span.open_line);
  EXPECT_GT(p.states[1].close_line, p.states[1].line);
  EXPECT_GT(p.actions[1].close_line, p.actions[1].line);
}

TEST(ProgramParse, HexAndDecimalLiterals) {
  ProgramAst p = parse_text(
      "header h {\n  field a : 16\n}\nparser {\n  state start {\n    extract h\n"
      "    select hdr.h.a { 2048 -> accept, 0x800 -> accept, default -> reject }\n  }\n}\n"
      "ingress {\n}\negress {\n}\ndeparser {\n  emit h\n}\n");
  const Stmt& sel = p.states[0].body[1];
  EXPECT_EQ(sel.arms[0].value, sel.arms[1].value);
}

TEST(ProgramParse, ExpressionChains) {
  ProgramAst p = parse_text(
      "header h {\n  field a : 8\n  field b : 8\n}\nmetadata {\n  field m : 8\n}\n"
      "parser {\n  state start {\n    extract h\n    transition accept\n  }\n}\n"
      "ingress {\n  set meta.m = hdr.h.a + 3 - hdr.h.b\n}\negress {\n}\n"
      "deparser {\n  emit h\n}\n");
  const Expr& e = p.ingress[0].value;
  ASSERT_EQ(e.terms.size(), 3u);
  EXPECT_FALSE(e.terms[0].negated);
  EXPECT_TRUE(e.terms[1].is_literal);
  EXPECT_FALSE(e.terms[1].negated);
  EXPECT_TRUE(e.terms[2].negated);
  EXPECT_EQ(e.terms[2].ref.field, "b");
}

TEST(ProgramParse, ErrorsCarryLineNumbers) {
  try {
    parse_text("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h extract h\n");
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 6);
    EXPECT_NE(std::string(e.what()).find("one statement per line"), std::string::npos);
  }
}

TEST(ProgramParse, MissingStartState) {
  EXPECT_THROW(
      parse_text("header h {\n  field a : 8\n}\nparser {\n  state s0 {\n    extract h\n"
                 "    transition accept\n  }\n}\ningress {\n}\negress {\n}\n"
                 "deparser {\n  emit h\n}\n"),
      SyntaxError);
  EXPECT_THROW(parse_text("header h {\n  field a : 8\n}\ningress {\n}\n"), SyntaxError);
}

TEST(ProgramParse, UnclosedAndUnmatchedBlocks) {
  EXPECT_THROW(parse_text("header h {\n  field a : 8\n"), SyntaxError);
  EXPECT_THROW(parse_text("}\n"), SyntaxError);
  EXPECT_THROW(parse_text("header h {\n  field a : 8\n} else {\n"), SyntaxError);
}

TEST(ProgramParse, PlacementIsEnforced) {
  // extract outside a parser state.
  EXPECT_THROW(
      parse_text("header h {\n  field a : 8\n}\nparser {\n  state start {\n    transition accept\n"
                 "  }\n}\ningress {\n  extract h\n}\n"),
      SyntaxError);
  // apply inside a parser state.
  EXPECT_THROW(
      parse_text("header h {\n  field a : 8\n}\nparser {\n  state start {\n    apply t\n  }\n}\n"),
      SyntaxError);
  // emit outside the deparser.
  EXPECT_THROW(
      parse_text("header h {\n  field a : 8\n}\nparser {\n  state start {\n    transition accept\n"
                 "  }\n}\ningress {\n  emit h\n}\n"),
      SyntaxError);
  // arbitrary statements inside the deparser.
  EXPECT_THROW(
      parse_text("header h {\n  field a : 8\n}\nparser {\n  state start {\n    transition accept\n"
                 "  }\n}\ndeparser {\n  drop\n}\n"),
      SyntaxError);
}

TEST(ProgramParse, InlineIfCannotNest) {
  EXPECT_THROW(
      parse_text("header h {\n  field a : 8\n}\nparser {\n  state start {\n"
                 "    if (hdr.h.a == 1) { if (hdr.h.a == 2) { drop } }\n"
                 "    transition accept\n  }\n}\n"),
      SyntaxError);
}

TEST(ProgramValidate, CleanSampleHasNoDiagnostics) {
  EXPECT_TRUE(validate_program(parse_text(kSample)).empty());
}

std::vector<Diagnostic> diags_for(const std::string& text) {
  return validate_program(parse_text(text));
}

bool mentions(const std::vector<Diagnostic>& ds, const std::string& needle) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) {
    return d.message.find(needle) != std::string::npos;
  });
}

constexpr char kValidTail[] =
    "parser {\n  state start {\n    extract h\n    transition accept\n  }\n}\n"
    "ingress {\n}\negress {\n}\ndeparser {\n  emit h\n}\n";

TEST(ProgramValidate, DuplicateNames) {
  EXPECT_TRUE(mentions(
      diags_for(std::string("header h {\n  field a : 8\n}\nheader h {\n  field b : 8\n}\n") + kValidTail),
      "duplicate header"));
  EXPECT_TRUE(mentions(
      diags_for(std::string("header h {\n  field a : 8\n  field a : 8\n}\n") + kValidTail),
      "duplicate field"));
  EXPECT_TRUE(mentions(
      diags_for(std::string("header h {\n  field a : 8\n}\nmetadata {\n  field egress_port : 9\n}\n") +
                kValidTail),
      "duplicate metadata"));
}

TEST(ProgramValidate, FieldWidthBounds) {
  EXPECT_TRUE(mentions(diags_for(std::string("header h {\n  field a : 0\n}\n") + kValidTail),
                       "width"));
  EXPECT_TRUE(mentions(diags_for(std::string("header h {\n  field a : 65\n}\n") + kValidTail),
                       "width"));
  EXPECT_FALSE(mentions(diags_for(std::string("header h {\n  field a : 64\n}\n") + kValidTail),
                        "width"));
}

TEST(ProgramValidate, UnknownReferences) {
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    transition accept\n  }\n}\ningress {\n  set hdr.h.zz = 1\n}\negress {\n}\n"
                "deparser {\n  emit h\n}\n"),
      "no field 'zz'"));
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract nope\n"
                "    transition accept\n  }\n}\ningress {\n}\negress {\n}\n"
                "deparser {\n  emit h\n}\n"),
      "unknown header"));
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    transition accept\n  }\n}\ningress {\n  apply nope\n}\negress {\n}\n"
                "deparser {\n  emit h\n}\n"),
      "unknown table"));
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    select hdr.h.a { 1 -> nowhere, default -> accept }\n  }\n}\n"
                "ingress {\n}\negress {\n}\ndeparser {\n  emit h\n}\n"),
      "unknown parser state"));
}

TEST(ProgramValidate, ParamRules) {
  // Params resolve only inside their own action.
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    transition accept\n  }\n}\n"
                "action f(x) {\n  set hdr.h.a = y\n}\n"
                "ingress {\n}\negress {\n}\ndeparser {\n  emit h\n}\n"),
      "not a parameter"));
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    transition accept\n  }\n}\n"
                "action f(x) {\n  set x = 1\n}\n"
                "ingress {\n}\negress {\n}\ndeparser {\n  emit h\n}\n"),
      "cannot assign to parameter"));
  // Parameterised actions are table-invoked, never called directly.
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    transition accept\n  }\n}\n"
                "action f(x) {\n  set hdr.h.a = x\n}\n"
                "ingress {\n  f()\n}\negress {\n}\ndeparser {\n  emit h\n}\n"),
      "takes parameters"));
}

TEST(ProgramValidate, RecursiveActions) {
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    transition accept\n  }\n}\n"
                "action f {\n  g()\n}\naction g {\n  f()\n}\n"
                "ingress {\n  f()\n}\negress {\n}\ndeparser {\n  emit h\n}\n"),
      "recursive action"));
}

TEST(ProgramValidate, ChecksumNeedsChecksumField) {
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    verify_checksum(h)\n    transition accept\n  }\n}\n"
                "ingress {\n}\negress {\n}\ndeparser {\n  emit h\n}\n"),
      "no checksum field"));
}

TEST(ProgramValidate, EgressRestrictions) {
  const std::string head =
      "header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
      "    transition accept\n  }\n}\n";
  EXPECT_TRUE(mentions(diags_for(head + "ingress {\n}\negress {\n  clone 1\n}\n"
                                        "deparser {\n  emit h\n}\n"),
                       "not allowed in egress"));
  EXPECT_TRUE(mentions(diags_for(head + "ingress {\n}\negress {\n  resubmit\n}\n"
                                        "deparser {\n  emit h\n}\n"),
                       "not allowed in egress"));
  EXPECT_TRUE(mentions(diags_for(head + "ingress {\n}\negress {\n  set meta.egress_port = 2\n}\n"
                                        "deparser {\n  emit h\n}\n"),
                       "read-only"));
  EXPECT_TRUE(mentions(
      diags_for(head + "action spawn {\n  clone 1\n}\ningress {\n}\negress {\n  spawn()\n}\n"
                       "deparser {\n  emit h\n}\n"),
      "cannot run in egress"));
  // The same action is fine from ingress.
  EXPECT_TRUE(diags_for(head +
                        "action spawn {\n  clone 1\n}\ningress {\n  spawn()\n}\negress {\n}\n"
                        "deparser {\n  emit h\n}\n")
                  .empty());
}

TEST(ProgramValidate, ParserMustTerminate) {
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    transition loop_a\n  }\n  state loop_a {\n    transition loop_b\n  }\n"
                "  state loop_b {\n    transition loop_a\n  }\n}\n"
                "ingress {\n}\negress {\n}\ndeparser {\n  emit h\n}\n"),
      "cannot reach accept"));
}

TEST(ProgramValidate, DeparserRequired) {
  EXPECT_TRUE(mentions(
      diags_for("header h {\n  field a : 8\n}\nparser {\n  state start {\n    extract h\n"
                "    transition accept\n  }\n}\ningress {\n}\negress {\n}\n"),
      "deparser"));
}

TEST(ProgramAnalyze, LayoutsAndOptions) {
  ProgramAst p = parse_text(kSample);
  StaticAnalysis a = analyze_program(p);
  ASSERT_EQ(a.layouts.size(), 2u);
  EXPECT_EQ(a.layouts[0].bit_size(), 112);
  EXPECT_EQ(a.layouts[1].bit_size(), 160);
  const HeaderField* ttl = a.layouts[1].field("ttl");
  ASSERT_NE(ttl, nullptr);
  EXPECT_EQ(ttl->bit_offset, 64);
  EXPECT_EQ(a.field_names.at("ipv4").size(), 12u);
  ASSERT_EQ(a.metadata_names.size(), 1u);
  EXPECT_EQ(a.metadata_names[0], "l3_class");
  EXPECT_EQ(a.extracted_in_state.at("ipv4"), "parse_ipv4");
  ASSERT_EQ(a.table_keys.size(), 1u);
  EXPECT_EQ(a.table_keys[0].table, "ipv4_lpm");
  EXPECT_EQ(a.table_keys[0].kind, TableKind::kLpm);
  EXPECT_EQ(a.table_keys[0].key.header, "ipv4");
  EXPECT_EQ(a.table_keys[0].key.field, "dst");
  // The sample never selects on ihl, so options are not handled.
  EXPECT_FALSE(a.accepts_options);

  ProgramAst q = parse_text(
      "header h {\n  field ihl : 4\n}\nparser {\n  state start {\n    extract h\n"
      "    select hdr.h.ihl { 5 -> accept, default -> reject }\n  }\n}\n"
      "ingress {\n}\negress {\n}\ndeparser {\n  emit h\n}\n");
  EXPECT_TRUE(analyze_program(q).accepts_options);
}

TEST(ProgramRender, RenderIsAFixpoint) {
  ProgramAst p = parse_text(kSample);
  SourceText first = render_program(p);
  ProgramAst reparsed = parse_program(first);
  EXPECT_TRUE(validate_program(reparsed).empty());
  SourceText second = render_program(reparsed);
  EXPECT_EQ(first.lines, second.lines);
}

TEST(ProgramRender, InlineIfSurvivesRoundTrip) {
  ProgramAst p = parse_text(kSample);
  SourceText rendered = render_program(p);
  const std::string text = rendered.to_string();
  EXPECT_NE(text.find("if (hdr.ipv4.ttl <= 1) { drop }"), std::string::npos);
  EXPECT_NE(text.find("} else {"), std::string::npos);
}

TEST(ProgramLines, StatementLinesMatchSource) {
  // Line numbers are 1-based indexes into the original text.
  const std::string text =
      "header h {\n"        // 1
      "  field a : 8\n"     // 2
      "}\n"                 // 3
      "parser {\n"          // 4
      "  state start {\n"   // 5
      "    extract h\n"     // 6
      "    if (hdr.h.a == 1) { drop }\n"  // 7
      "    transition accept\n"           // 8
      "  }\n"               // 9
      "}\n"                 // 10
      "ingress {\n"         // 11
      "  if (hdr.h.a == 2) {\n"  // 12
      "    drop\n"               // 13
      "  } else {\n"             // 14
      "    set hdr.h.a = 0\n"    // 15
      "  }\n"                    // 16
      "}\n"                      // 17
      "egress {\n"               // 18
      "}\n"                      // 19
      "deparser {\n"             // 20
      "  emit h\n"               // 21
      "}\n";                     // 22
  ProgramAst p = parse_text(text);
  std::set<int> lines = statement_lines(p);
  std::set<int> expected = {6, 7, 8, 12, 13, 15, 21};
  EXPECT_EQ(lines, expected);
}

}  // namespace
}  // namespace p6
