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
// Spectrum-based fault localization. Each verdicted packet contributes its
// execution trace once; a statement's suspiciousness grows with the share
// of failing packets that crossed it and shrinks with the share of passing
// ones. Scores rank candidate lines for the patcher; the localizer itself
// applies no threshold.

#ifndef P6_LOCALIZER_H_
#define P6_LOCALIZER_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "p6/p4q.h"
#include "p6/packet.h"
#include "p6/program.h"

namespace p6 {

// Raised when no record carries a fail verdict: suspiciousness is a ratio
// over failing runs, so there is nothing to localize.
class NoFailingInput : public std::runtime_error {
 public:
  NoFailingInput() : std::runtime_error("localizer: no failing input in the record set") {}
};

// Raised when a trace names a line that is not a statement of the program
// under analysis, i.e. the traces were taken from a different source.
class TraceProgramMismatch : public std::runtime_error {
 public:
  explicit TraceProgramMismatch(int line)
      : std::runtime_error("localizer: traced line " + std::to_string(line) +
                           " is not a statement of this program") {}
};

// One fuzzing outcome: the frame that was sent, the statement lines it
// executed (a set; repeats within one packet carry no extra weight), and
// the verdict of the condition under analysis. Records with verdict
// not_applicable are kept for bookkeeping but contribute nothing.
struct TestRecord {
  PacketBytes packet;
  std::vector<int> lines;
  Verdict verdict = Verdict::kNotApplicable;
};

struct ScoredLine {
  int line = 0;
  double suspiciousness = 0.0;

  bool operator==(const ScoredLine&) const = default;
};

struct LocalizationReport {
  // Every line executed by at least one pass- or fail-verdicted packet,
  // sorted by descending suspiciousness, ties by ascending line number.
  std::vector<ScoredLine> lines;
  int total_passed = 0;
  int total_failed = 0;
  // Fingerprint of the packets and verdicts the scores were computed from,
  // so a report can be tied back to its evidence.
  std::string inputs_digest;
};

// Scores every executed statement from the verdicted records. Throws
// NoFailingInput when no record failed and TraceProgramMismatch when a
// pass/fail trace strays outside the program's statement lines.
LocalizationReport localize(const ProgramAst& program, const std::vector<TestRecord>& records);

}  // namespace p6

#endif  // P6_LOCALIZER_H_
