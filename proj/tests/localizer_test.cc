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
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "p6/p4q.h"
#include "p6/rng.h"
#include "test_programs.h"

namespace p6 {
namespace {

// A router whose only action is a long run of assignments, so the property
// tests have a wide pool of statement lines to draw traces from.
std::string wide_program(int assignments) {
  std::string text(kHeaderDecls);
  text += R"(
parser {
  state start {
    extract ethernet
    select hdr.ethernet.ether_type { 0x0800 -> parse_ipv4, default -> accept }
  }
  state parse_ipv4 {
    extract ipv4
    transition accept
  }
}

action touch {
)";
  for (int i = 0; i < assignments; ++i) {
    text += "  set hdr.ipv4.id = " + std::to_string(i) + "\n";
  }
  text += R"(}

table ipv4_lpm lpm on hdr.ipv4.dst { touch }

ingress {
  apply ipv4_lpm
}

egress {
}

deparser {
  emit ethernet
  emit ipv4
}
)";
  return text;
}

ProgramAst parse(const std::string& text) {
  return parse_program(SourceText::from_string(text));
}

std::vector<int> sorted_statements(const ProgramAst& program) {
  const std::set<int> s = statement_lines(program);
  return {s.begin(), s.end()};
}

PacketBytes tagged_packet(int tag) {
  std::vector<uint8_t> octets(16, 0);
  octets[0] = static_cast<uint8_t>(tag);
  octets[1] = static_cast<uint8_t>(tag >> 8);
  return PacketBytes(octets);
}

TestRecord record(int tag, std::vector<int> lines, Verdict verdict) {
  return {tagged_packet(tag), std::move(lines), verdict};
}

double score_of(const LocalizationReport& report, int line) {
  for (const ScoredLine& s : report.lines) {
    if (s.line == line) return s.suspiciousness;
  }
  ADD_FAILURE() << "line " << line << " missing from report";
  return -1.0;
}

// Independent per-line recount, written as a flat scan instead of a tally
// map so the two implementations do not share structure.
double oracle_score(const std::vector<TestRecord>& records, int line) {
  int total_pass = 0;
  int total_fail = 0;
  int pass_hits = 0;
  int fail_hits = 0;
  for (const TestRecord& r : records) {
    if (r.verdict == Verdict::kNotApplicable) continue;
    const bool hit = std::find(r.lines.begin(), r.lines.end(), line) != r.lines.end();
    if (r.verdict == Verdict::kFail) {
      ++total_fail;
      fail_hits += hit ? 1 : 0;
    } else {
      ++total_pass;
      pass_hits += hit ? 1 : 0;
    }
  }
  const double fail_ratio = static_cast<double>(fail_hits) / total_fail;
  const double pass_ratio =
      total_pass == 0 ? 0.0 : static_cast<double>(pass_hits) / total_pass;
  return fail_ratio / (pass_ratio + fail_ratio);
}

TEST(LocalizeTest, FailOnlyLinesScoreOne) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  const LocalizationReport report = localize(
      program, {record(1, {l[0], l[1]}, Verdict::kFail), record(2, {l[0]}, Verdict::kPass)});
  EXPECT_DOUBLE_EQ(score_of(report, l[1]), 1.0);
  EXPECT_DOUBLE_EQ(score_of(report, l[0]), 0.5);
  EXPECT_EQ(report.total_failed, 1);
  EXPECT_EQ(report.total_passed, 1);
}

TEST(LocalizeTest, PassOnlyLinesScoreZero) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  const LocalizationReport report = localize(
      program, {record(1, {l[0]}, Verdict::kFail), record(2, {l[0], l[2]}, Verdict::kPass)});
  EXPECT_DOUBLE_EQ(score_of(report, l[2]), 0.0);
}

TEST(LocalizeTest, SharedLineMatchesTheWorkedRatio) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  // One fail and four passes; l[0] is hit by the fail and by two passes:
  // (1/1) / (2/4 + 1/1) = 2/3.
  const LocalizationReport report =
      localize(program, {record(1, {l[0], l[1]}, Verdict::kFail),
                         record(2, {l[0]}, Verdict::kPass),
                         record(3, {l[0], l[2]}, Verdict::kPass),
                         record(4, {l[2]}, Verdict::kPass),
                         record(5, {l[3]}, Verdict::kPass)});
  EXPECT_DOUBLE_EQ(score_of(report, l[0]), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(score_of(report, l[1]), 1.0);
  EXPECT_DOUBLE_EQ(score_of(report, l[2]), 0.0);
  EXPECT_DOUBLE_EQ(score_of(report, l[3]), 0.0);
  EXPECT_EQ(report.total_failed, 1);
  EXPECT_EQ(report.total_passed, 4);
}

TEST(LocalizeTest, AllFailingEvidenceScoresEveryLineOne) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  const LocalizationReport report = localize(
      program, {record(1, {l[0]}, Verdict::kFail), record(2, {l[4], l[5]}, Verdict::kFail)});
  ASSERT_EQ(report.lines.size(), 3u);
  for (const ScoredLine& s : report.lines) {
    EXPECT_DOUBLE_EQ(s.suspiciousness, 1.0);
  }
  EXPECT_EQ(report.total_passed, 0);
}

TEST(LocalizeTest, RepeatsWithinOneTraceCarryNoWeight) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  const LocalizationReport noisy = localize(
      program, {record(1, {l[0], l[0], l[0], l[0]}, Verdict::kFail),
                record(2, {l[0]}, Verdict::kPass)});
  EXPECT_DOUBLE_EQ(score_of(noisy, l[0]), 0.5);
}

TEST(LocalizeTest, NotApplicableRecordsContributeNothing) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  const LocalizationReport report = localize(
      program, {record(1, {l[0]}, Verdict::kFail), record(2, {l[0]}, Verdict::kPass),
                record(3, {l[0], l[1]}, Verdict::kNotApplicable)});
  // The not_applicable trace neither adds l[1] to the report nor skews l[0].
  EXPECT_DOUBLE_EQ(score_of(report, l[0]), 0.5);
  ASSERT_EQ(report.lines.size(), 1u);
}

TEST(LocalizeTest, ReportContainsExactlyTheExecutedLines) {
  const ProgramAst program = parse(wide_program(12));
  const std::vector<int> l = sorted_statements(program);
  const LocalizationReport report = localize(
      program, {record(1, {l[1], l[3]}, Verdict::kFail), record(2, {l[3], l[5]}, Verdict::kPass),
                record(3, {l[7]}, Verdict::kNotApplicable)});
  std::vector<int> reported;
  for (const ScoredLine& s : report.lines) reported.push_back(s.line);
  std::sort(reported.begin(), reported.end());
  EXPECT_EQ(reported, (std::vector<int>{l[1], l[3], l[5]}));
}

TEST(LocalizeTest, SortsByScoreThenLine) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  const LocalizationReport report = localize(
      program, {record(1, {l[2], l[6], l[4]}, Verdict::kFail),
                record(2, {l[4], l[1], l[3]}, Verdict::kPass)});
  // Fail-only lines first in ascending order, then the shared line, then
  // pass-only lines in ascending order.
  std::vector<int> order;
  for (const ScoredLine& s : report.lines) order.push_back(s.line);
  EXPECT_EQ(order, (std::vector<int>{l[2], l[6], l[4], l[1], l[3]}));
  EXPECT_TRUE(std::is_sorted(report.lines.begin(), report.lines.end(),
                             [](const ScoredLine& a, const ScoredLine& b) {
                               return a.suspiciousness > b.suspiciousness;
                             }));
}

TEST(LocalizeTest, ThrowsWithoutAFailingRecord) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  EXPECT_THROW(localize(program, {}), NoFailingInput);
  EXPECT_THROW(localize(program, {record(1, {l[0]}, Verdict::kPass)}), NoFailingInput);
  EXPECT_THROW(localize(program, {record(1, {l[0]}, Verdict::kNotApplicable)}), NoFailingInput);
}

TEST(LocalizeTest, ThrowsWhenATraceLeavesTheProgram) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  EXPECT_THROW(localize(program, {record(1, {9999}, Verdict::kFail)}), TraceProgramMismatch);
  // A line of the source that is not an executable statement is just as
  // foreign as one past the end of the file.
  const std::set<int> statements = statement_lines(program);
  int non_statement = 1;
  while (statements.count(non_statement)) ++non_statement;
  EXPECT_THROW(localize(program, {record(1, {l[0]}, Verdict::kFail),
                                  record(2, {non_statement}, Verdict::kPass)}),
               TraceProgramMismatch);
}

TEST(LocalizeTest, SkipsValidationForNotApplicableTraces) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  // Records that carry no verdict are dead weight; their traces are not
  // held against the program.
  const LocalizationReport report = localize(
      program, {record(1, {l[0]}, Verdict::kFail), record(2, {9999}, Verdict::kNotApplicable)});
  EXPECT_EQ(report.lines.size(), 1u);
}

TEST(LocalizeTest, DigestIsStableAndInputSensitive) {
  const ProgramAst program = parse(wide_program(8));
  const std::vector<int> l = sorted_statements(program);
  const std::vector<TestRecord> records = {record(1, {l[0]}, Verdict::kFail),
                                           record(2, {l[1]}, Verdict::kPass)};
  const LocalizationReport a = localize(program, records);
  const LocalizationReport b = localize(program, records);
  EXPECT_EQ(a.inputs_digest, b.inputs_digest);
  EXPECT_EQ(a.inputs_digest.size(), 16u);

  std::vector<TestRecord> flipped = records;
  flipped[1].verdict = Verdict::kNotApplicable;
  EXPECT_NE(localize(program, flipped).inputs_digest, a.inputs_digest);

  std::vector<TestRecord> retagged = {record(9, {l[0]}, Verdict::kFail),
                                      record(2, {l[1]}, Verdict::kPass)};
  EXPECT_NE(localize(program, retagged).inputs_digest, a.inputs_digest);
}

TEST(LocalizeTest, MatchesACountingOracleOnRandomRecordSets) {
  const ProgramAst program = parse(wide_program(45));
  const std::vector<int> pool = sorted_statements(program);
  ASSERT_GE(pool.size(), 50u);
  ASSERT_LE(pool.size(), 60u);

  Rng rng(0x10ca112e);
  for (int round = 0; round < 100; ++round) {
    std::vector<TestRecord> records;
    bool has_fail = false;
    const int count = 1 + static_cast<int>(rng.below(50));
    for (int i = 0; i < count; ++i) {
      std::vector<int> lines;
      const int hits = static_cast<int>(rng.below(static_cast<uint64_t>(pool.size())));
      for (int h = 0; h < hits; ++h) {
        lines.push_back(pool[rng.below(pool.size())]);  // repeats allowed
      }
      const uint64_t pick = rng.below(3);
      const Verdict v = pick == 0   ? Verdict::kFail
                        : pick == 1 ? Verdict::kPass
                                    : Verdict::kNotApplicable;
      has_fail = has_fail || (v == Verdict::kFail && !lines.empty());
      records.push_back(record(round * 64 + i, std::move(lines), v));
    }
    if (!has_fail) {
      records.push_back(record(round * 64 + 63, {pool[0]}, Verdict::kFail));
    }

    const LocalizationReport report = localize(program, records);
    std::set<int> expected_lines;
    for (const TestRecord& r : records) {
      if (r.verdict == Verdict::kNotApplicable) continue;
      expected_lines.insert(r.lines.begin(), r.lines.end());
    }
    ASSERT_EQ(report.lines.size(), expected_lines.size());
    for (const ScoredLine& s : report.lines) {
      ASSERT_TRUE(expected_lines.count(s.line));
      ASSERT_NEAR(s.suspiciousness, oracle_score(records, s.line), 1e-12);
    }
  }
}

// Routed frames with ttl 1 leak through the permissive router while
// unroutable ones drop, so the forward action and the deparser emits carry
// all the blame and the shared parser path sits at one half.
TEST(LocalizeTest, RanksTheFaultyActionFromSwitchTraces) {
  Switch sw = make_switch(kLeaky, kRules);
  const std::vector<Query> queries =
      parse_queries("if (ing.ipv4.ttl <= 1) then (egr.dropped)\n");
  const QueryEnv env{&sw.program(), &sw.analysis(), &sw.control_plane()};

  std::vector<TestRecord> records;
  for (const PacketBytes& packet :
       {make_ipv4(0x0a000005, 1), make_ipv4(0xc0a80101, 1), make_ipv4(0x0a000007, 64)}) {
    const ProcessResult result = sw.process(packet);
    const std::vector<ConditionVerdict> verdicts = evaluate_query(queries[0], env, result);
    records.push_back({packet, result.trace, verdicts[0].verdict});
  }
  ASSERT_EQ(records[0].verdict, Verdict::kFail);
  ASSERT_EQ(records[1].verdict, Verdict::kPass);
  ASSERT_EQ(records[2].verdict, Verdict::kNotApplicable);

  const LocalizationReport report = localize(sw.program(), records);
  ASSERT_FALSE(report.lines.empty());

  // Forward-action lines plus the deparser emits: executed by the leaked
  // frame only.
  std::set<int> top;
  std::set<int> shared;
  for (const ScoredLine& s : report.lines) {
    if (s.suspiciousness == 1.0) top.insert(s.line);
    if (s.suspiciousness == 0.5) shared.insert(s.line);
  }
  EXPECT_EQ(top.size() + shared.size(), report.lines.size());
  EXPECT_EQ(top.size(), 6u);
  EXPECT_EQ(shared.size(), 5u);

  // The decrement statement inside forward is among the accused lines.
  const std::vector<int> fail_trace(records[0].lines.begin(), records[0].lines.end());
  for (int line : fail_trace) {
    const bool in_pass = std::find(records[1].lines.begin(), records[1].lines.end(), line) !=
                         records[1].lines.end();
    EXPECT_DOUBLE_EQ(score_of(report, line), in_pass ? 0.5 : 1.0);
  }
}

}  // namespace
}  // namespace p6
