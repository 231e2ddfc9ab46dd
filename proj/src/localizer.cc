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

#include "p6/localizer.h"

#include <algorithm>
#include <map>
#include <set>

namespace p6 {
namespace {

// FNV-1a, 64 bit. Stable across platforms; only used as an evidence tag.
class Fnv1a {
 public:
  void feed(const uint8_t* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= data[i];
      hash_ *= 0x100000001b3ull;
    }
  }
  void feed_byte(uint8_t b) { feed(&b, 1); }
  void feed_u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) feed_byte(static_cast<uint8_t>(v >> (8 * i)));
  }

  std::string hex() const {
    static const char* kDigits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) {
      out[15 - i] = kDigits[(hash_ >> (4 * i)) & 0xf];
    }
    return out;
  }

 private:
  uint64_t hash_ = 0xcbf29ce484222325ull;
};

}  // namespace

LocalizationReport localize(const ProgramAst& program, const std::vector<TestRecord>& records) {
  const std::set<int> statements = statement_lines(program);

  // Per-line pass/fail counts. A line counts once per packet no matter how
  // often the trace repeats it.
  struct Tally {
    int passed = 0;
    int failed = 0;
  };
  std::map<int, Tally> tallies;
  int total_passed = 0;
  int total_failed = 0;

  Fnv1a digest;
  for (const TestRecord& record : records) {
    digest.feed_u32(static_cast<uint32_t>(record.packet.size()));
    digest.feed(record.packet.octets().data(), record.packet.size());
    digest.feed_byte(static_cast<uint8_t>(record.verdict));

    if (record.verdict == Verdict::kNotApplicable) continue;
    const bool failed = record.verdict == Verdict::kFail;
    (failed ? total_failed : total_passed) += 1;

    const std::set<int> executed(record.lines.begin(), record.lines.end());
    for (int line : executed) {
      if (!statements.count(line)) throw TraceProgramMismatch(line);
      Tally& t = tallies[line];
      (failed ? t.failed : t.passed) += 1;
    }
  }

  if (total_failed == 0) throw NoFailingInput();

  LocalizationReport report;
  report.total_passed = total_passed;
  report.total_failed = total_failed;
  report.inputs_digest = digest.hex();
  report.lines.reserve(tallies.size());
  for (const auto& [line, t] : tallies) {
    const double fail_ratio = static_cast<double>(t.failed) / total_failed;
    // With no passing run at all the pass share is taken as zero, so every
    // executed line scores 1: the evidence cannot tell them apart.
    const double pass_ratio =
        total_passed == 0 ? 0.0 : static_cast<double>(t.passed) / total_passed;
    // Tallied lines were crossed by a verdicted packet, so the denominator
    // is never zero.
    const double score = fail_ratio / (pass_ratio + fail_ratio);
    report.lines.push_back({line, score});
  }
  std::stable_sort(report.lines.begin(), report.lines.end(),
                   [](const ScoredLine& a, const ScoredLine& b) {
                     if (a.suspiciousness != b.suspiciousness) {
                       return a.suspiciousness > b.suspiciousness;
                     }
                     return a.line < b.line;
                   });
  return report;
}

}  // namespace p6
