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
// Template-driven program repair. A patch template serves one query
// condition class and describes where its statements belong, not a concrete
// program location: placeholders resolve against the program's static
// analysis, so one template repairs any program that declares the right
// fields. Templates only ever add lines.
//
//   # drops expired datagrams before the pipeline sees them
//   patch ttl_bound_check
//   query 5
//   condition 0
//   anchor after_extract
//   needs ttl
//   field ttl
//   ---
//   if (hdr.{header}.{field} <= 1) { drop }
//
// Directives before the `---` separator configure the template; the lines
// after it are the body. {header} names the first header declaring every
// field listed under `needs`, {parser_state} the state that extracts it,
// {field} the template's declared field, {metadata} the first user metadata
// field.

#ifndef P6_PATCHER_H_
#define P6_PATCHER_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "p6/localizer.h"
#include "p6/program.h"

namespace p6 {

class TemplateSyntaxError : public std::runtime_error {
 public:
  explicit TemplateSyntaxError(const std::string& what)
      : std::runtime_error("patch template: " + what) {}
};

// Raised when a placeholder cannot resolve against the program: no header
// declares the needed fields, the header is never extracted, the declared
// field is missing, or the program has no user metadata.
class MissingName : public std::runtime_error {
 public:
  explicit MissingName(const std::string& placeholder)
      : std::runtime_error("patch template: no binding for {" + placeholder + "}"),
        placeholder_(placeholder) {}
  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

// Raised when an applied template yields a program that no longer parses or
// validates; the template body is incompatible with this program.
class PatchRejected : public std::runtime_error {
 public:
  explicit PatchRejected(const std::string& what) : std::runtime_error(what) {}
};

// Where a template's body is inserted, and which statement lines count as
// evidence for it. A suspicious line admits a template only when it falls
// inside the template's anchor region.
enum class PatchAnchor {
  kAfterExtract,  // body follows `extract {header}`; region is that state
  kIngressStart,  // body opens the ingress block; region is the block
  kEgressStart,   // body opens the egress block; region spans egress and
                  // deparser, since an egress omission leaves its only
                  // executed evidence downstream in the emits
};

struct PatchTemplate {
  std::string patch_id;
  int query_id = 0;
  int condition_index = 0;
  PatchAnchor anchor = PatchAnchor::kAfterExtract;
  std::vector<std::string> needs;  // fields {header} must declare
  std::string field;               // value of {field}, may be empty
  std::vector<std::string> body;   // statement lines with placeholders
};

// A template bound to one program: placeholders resolved, body concrete.
struct ConcretePatch {
  std::string patch_id;
  PatchAnchor anchor = PatchAnchor::kAfterExtract;
  std::string header;        // resolved {header}; empty when unused
  std::string parser_state;  // resolved {parser_state}; empty when unused
  std::vector<std::string> lines;
};

enum class PatchOutcome { kApplied, kAlreadyPresent, kNoPatchAvailable };

struct PatchResult {
  PatchOutcome outcome = PatchOutcome::kNoPatchAvailable;
  std::string patch_id;  // set unless no patch was available
  // The program with the body inserted; only set when outcome is applied.
  std::optional<SourceText> patched_source;
  // Insertion record against the input source, so several patches computed
  // from one baseline can be merged: the indented body lines were placed
  // immediately after this 1-based line.
  int insert_after_line = 0;
  std::vector<std::string> inserted_lines;
  std::string note;
};

// Parses one template file. Throws TemplateSyntaxError on malformed or
// incomplete input.
PatchTemplate parse_patch_template(const std::string& text);

// Resolves every placeholder the template uses. Deterministic: headers are
// scanned in declaration order and the first match wins. Throws MissingName
// when the program offers no binding.
ConcretePatch instantiate(const PatchTemplate& tmpl, const StaticAnalysis& analysis);

// True when every body line already appears inside the patch's anchor
// region, compared with runs of whitespace collapsed.
bool patch_present(const ProgramAst& program, const ConcretePatch& patch);

// Picks and applies a repair for one violated condition. Templates serving
// the condition class are tried presence-first (so a repaired program is
// recognized no matter how its line numbers shifted), then suspicious lines
// are walked in report order down to suspiciousness 0.5: the first line
// inside a template's anchor region selects that template. Templates whose
// placeholders cannot bind are skipped. Never rewrites or removes lines.
// Throws PatchRejected when an application breaks the program.
PatchResult run_patcher(const ProgramAst& program, const StaticAnalysis& analysis,
                        const LocalizationReport& report, int query_id, int condition_index,
                        const std::vector<PatchTemplate>& library);

}  // namespace p6

#endif  // P6_PATCHER_H_
