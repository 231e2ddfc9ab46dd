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

#include "p6/patcher.h"

#include <algorithm>
#include <sstream>

namespace p6 {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Collapses every whitespace run to one space and trims the ends, so two
// spellings of a statement compare equal regardless of layout.
std::string normalize_ws(const std::string& s) {
  std::string out;
  bool in_gap = true;  // swallow leading whitespace
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!in_gap) out.push_back(' ');
      in_gap = true;
    } else {
      out.push_back(c);
      in_gap = false;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> split_fields(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool uses_placeholder(const PatchTemplate& tmpl, const std::string& name) {
  const std::string token = "{" + name + "}";
  for (const std::string& line : tmpl.body) {
    if (line.find(token) != std::string::npos) return true;
  }
  return false;
}

void substitute(std::string& line, const std::string& name, const std::string& value) {
  const std::string token = "{" + name + "}";
  for (std::size_t pos = line.find(token); pos != std::string::npos;
       pos = line.find(token, pos)) {
    line.replace(pos, token.size(), value);
    pos += value.size();
  }
}

// Interior lines of a braced block; empty when the block is absent.
void append_interior(std::vector<int>& lines, const BlockSpan& span) {
  for (int l = span.open_line + 1; l < span.close_line; ++l) lines.push_back(l);
}

// The statement lines that count as evidence for this patch.
std::vector<int> anchor_region(const ProgramAst& program, const ConcretePatch& patch) {
  std::vector<int> lines;
  switch (patch.anchor) {
    case PatchAnchor::kAfterExtract: {
      const ParserStateDecl* state = program.state(patch.parser_state);
      if (state != nullptr) {
        for (int l = state->line + 1; l < state->close_line; ++l) lines.push_back(l);
      }
      break;
    }
    case PatchAnchor::kIngressStart:
      append_interior(lines, program.ingress_span);
      break;
    case PatchAnchor::kEgressStart:
      append_interior(lines, program.egress_span);
      append_interior(lines, program.deparser_span);
      break;
  }
  return lines;
}

// 1-based line the body goes after, or 0 when the program offers no anchor.
int insertion_line(const ProgramAst& program, const ConcretePatch& patch) {
  switch (patch.anchor) {
    case PatchAnchor::kAfterExtract: {
      const ParserStateDecl* state = program.state(patch.parser_state);
      if (state == nullptr) return 0;
      for (const Stmt& stmt : state->body) {
        if (stmt.kind == Stmt::Kind::kExtract && stmt.name == patch.header) return stmt.line;
      }
      return 0;
    }
    case PatchAnchor::kIngressStart:
      return program.ingress_span.open_line;
    case PatchAnchor::kEgressStart:
      return program.egress_span.open_line;
  }
  return 0;
}

std::string indent_of(const std::string& line) {
  std::string out;
  for (char c : line) {
    if (c == ' ' || c == '\t') {
      out.push_back(c);
    } else {
      break;
    }
  }
  return out;
}

// Indents the body to sit alongside its insertion point: statement anchors
// share their line's indent, block-open anchors add one level.
std::vector<std::string> indented_body(const ConcretePatch& patch, const std::string& anchor_text) {
  std::string indent = indent_of(anchor_text);
  if (patch.anchor != PatchAnchor::kAfterExtract) indent += "  ";
  std::vector<std::string> out;
  out.reserve(patch.lines.size());
  for (const std::string& line : patch.lines) out.push_back(indent + line);
  return out;
}

}  // namespace

PatchTemplate parse_patch_template(const std::string& text) {
  PatchTemplate tmpl;
  bool in_body = false;
  bool saw_patch = false;
  bool saw_query = false;
  bool saw_condition = false;
  bool saw_anchor = false;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    if (in_body) {
      const std::string line = trim(raw);
      if (!line.empty()) tmpl.body.push_back(line);
      continue;
    }
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line == "---") {
      in_body = true;
      continue;
    }
    const auto gap = line.find(' ');
    const std::string key = line.substr(0, gap);
    const std::string rest = gap == std::string::npos ? "" : trim(line.substr(gap + 1));
    if (key == "patch") {
      if (rest.empty()) throw TemplateSyntaxError("patch directive needs a name");
      tmpl.patch_id = rest;
      saw_patch = true;
    } else if (key == "query") {
      try {
        tmpl.query_id = std::stoi(rest);
      } catch (const std::exception&) {
        throw TemplateSyntaxError("query directive needs an integer, got '" + rest + "'");
      }
      saw_query = true;
    } else if (key == "condition") {
      try {
        tmpl.condition_index = std::stoi(rest);
      } catch (const std::exception&) {
        throw TemplateSyntaxError("condition directive needs an integer, got '" + rest + "'");
      }
      saw_condition = true;
    } else if (key == "anchor") {
      if (rest == "after_extract") {
        tmpl.anchor = PatchAnchor::kAfterExtract;
      } else if (rest == "ingress_start") {
        tmpl.anchor = PatchAnchor::kIngressStart;
      } else if (rest == "egress_start") {
        tmpl.anchor = PatchAnchor::kEgressStart;
      } else {
        throw TemplateSyntaxError("unknown anchor '" + rest + "'");
      }
      saw_anchor = true;
    } else if (key == "needs") {
      tmpl.needs = split_fields(rest);
    } else if (key == "field") {
      if (rest.empty()) throw TemplateSyntaxError("field directive needs a name");
      tmpl.field = rest;
    } else {
      throw TemplateSyntaxError("unknown directive '" + key + "'");
    }
  }

  if (!saw_patch) throw TemplateSyntaxError("missing patch directive");
  if (!saw_query) throw TemplateSyntaxError("missing query directive");
  if (!saw_condition) throw TemplateSyntaxError("missing condition directive");
  if (!saw_anchor) throw TemplateSyntaxError("missing anchor directive");
  if (!in_body) throw TemplateSyntaxError("missing --- separator");
  if (tmpl.body.empty()) throw TemplateSyntaxError("empty body");
  return tmpl;
}

ConcretePatch instantiate(const PatchTemplate& tmpl, const StaticAnalysis& analysis) {
  ConcretePatch patch;
  patch.patch_id = tmpl.patch_id;
  patch.anchor = tmpl.anchor;

  const bool needs_header = tmpl.anchor == PatchAnchor::kAfterExtract ||
                            uses_placeholder(tmpl, "header") ||
                            uses_placeholder(tmpl, "parser_state");
  if (needs_header) {
    for (const std::string& name : analysis.header_names) {
      const auto it = analysis.field_names.find(name);
      if (it == analysis.field_names.end()) continue;
      const std::vector<std::string>& declared = it->second;
      const bool covers = std::all_of(
          tmpl.needs.begin(), tmpl.needs.end(), [&](const std::string& f) {
            return std::find(declared.begin(), declared.end(), f) != declared.end();
          });
      if (covers) {
        patch.header = name;
        break;
      }
    }
    if (patch.header.empty()) throw MissingName("header");
  }

  if (tmpl.anchor == PatchAnchor::kAfterExtract || uses_placeholder(tmpl, "parser_state")) {
    const auto it = analysis.extracted_in_state.find(patch.header);
    if (it == analysis.extracted_in_state.end()) throw MissingName("parser_state");
    patch.parser_state = it->second;
  }

  if (uses_placeholder(tmpl, "field")) {
    if (tmpl.field.empty()) throw MissingName("field");
    const auto it = analysis.field_names.find(patch.header);
    const bool declared = it != analysis.field_names.end() &&
                          std::find(it->second.begin(), it->second.end(), tmpl.field) !=
                              it->second.end();
    if (!declared) throw MissingName("field");
  }

  std::string metadata;
  if (uses_placeholder(tmpl, "metadata")) {
    if (analysis.metadata_names.empty()) throw MissingName("metadata");
    metadata = analysis.metadata_names.front();
  }

  patch.lines.reserve(tmpl.body.size());
  for (std::string line : tmpl.body) {
    substitute(line, "header", patch.header);
    substitute(line, "parser_state", patch.parser_state);
    substitute(line, "field", tmpl.field);
    substitute(line, "metadata", metadata);
    patch.lines.push_back(std::move(line));
  }
  return patch;
}

bool patch_present(const ProgramAst& program, const ConcretePatch& patch) {
  const std::vector<int> region = anchor_region(program, patch);
  std::vector<std::string> present;
  present.reserve(region.size());
  for (int l : region) {
    present.push_back(normalize_ws(program.source.lines[l - 1]));
  }
  return std::all_of(patch.lines.begin(), patch.lines.end(), [&](const std::string& line) {
    return std::find(present.begin(), present.end(), normalize_ws(line)) != present.end();
  });
}

PatchResult run_patcher(const ProgramAst& program, const StaticAnalysis& analysis,
                        const LocalizationReport& report, int query_id, int condition_index,
                        const std::vector<PatchTemplate>& library) {
  // Bind every template that serves this condition class; ones whose
  // placeholders have no binding in this program are out of play.
  std::vector<ConcretePatch> candidates;
  for (const PatchTemplate& tmpl : library) {
    if (tmpl.query_id != query_id || tmpl.condition_index != condition_index) continue;
    try {
      candidates.push_back(instantiate(tmpl, analysis));
    } catch (const MissingName&) {
      continue;
    }
  }
  PatchResult result;
  if (candidates.empty()) {
    result.note = "no template fits query " + std::to_string(query_id) + " condition " +
                  std::to_string(condition_index) + " on this program";
    return result;
  }

  // Presence first: a previous run may have repaired the program already,
  // and line numbers in the report say nothing about that.
  for (const ConcretePatch& patch : candidates) {
    if (patch_present(program, patch)) {
      result.outcome = PatchOutcome::kAlreadyPresent;
      result.patch_id = patch.patch_id;
      result.note = "every line of " + patch.patch_id + " is already in place";
      return result;
    }
  }

  for (const ScoredLine& scored : report.lines) {
    if (scored.suspiciousness < 0.5) break;
    for (const ConcretePatch& patch : candidates) {
      const std::vector<int> region = anchor_region(program, patch);
      if (std::find(region.begin(), region.end(), scored.line) == region.end()) continue;

      const int after = insertion_line(program, patch);
      if (after <= 0) continue;
      SourceText patched = program.source;
      const std::vector<std::string> body =
          indented_body(patch, patched.lines[after - 1]);
      patched.lines.insert(patched.lines.begin() + after, body.begin(), body.end());

      ProgramAst reparsed;
      try {
        reparsed = parse_program(patched);
      } catch (const SyntaxError& e) {
        throw PatchRejected("patch " + patch.patch_id +
                            " does not parse once inserted: " + e.what());
      }
      const std::vector<Diagnostic> diags = validate_program(reparsed);
      if (!diags.empty()) {
        throw PatchRejected("patch " + patch.patch_id + " breaks validation: line " +
                            std::to_string(diags.front().line) + ": " + diags.front().message);
      }

      result.outcome = PatchOutcome::kApplied;
      result.patch_id = patch.patch_id;
      result.patched_source = std::move(patched);
      result.insert_after_line = after;
      result.inserted_lines = body;
      result.note = patch.patch_id + " inserted after line " + std::to_string(after) +
                    ", admitted by line " + std::to_string(scored.line);
      return result;
    }
  }

  result.note = "no suspicious line at or above 0.5 falls in a template's anchor region";
  return result;
}

}  // namespace p6
