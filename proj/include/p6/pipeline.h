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
// The closed loop: deploy, fuzz every query condition, localize and patch
// platform-independent violations, redeploy and re-test until the program
// is clean or no template helps. Platform-dependent violations become
// vendor notices and are never patched. A baseline-comparison mode runs
// detection-only campaigns for several packet sources over paired seeds.

#ifndef P6_PIPELINE_H_
#define P6_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "p6/agent.h"
#include "p6/fuzz.h"
#include "p6/localizer.h"
#include "p6/p4q.h"
#include "p6/patcher.h"
#include "p6/program.h"
#include "p6/switch.h"

namespace p6 {

// Where campaign packets come from. The p6 mode trains a learner per test
// case (or loads one) and then exploits it; the other three are the
// baselines from fuzz.h.
enum class FuzzMode { kP6, kAdvanced, kIpv4, kNaive };

std::string to_string(FuzzMode mode);
std::optional<FuzzMode> parse_fuzz_mode(const std::string& name);

struct PipelineInput {
  std::string program_name;  // echoed into reports
  SourceText program;
  ControlPlane control_plane;
  std::vector<Query> queries;
  std::vector<PatchTemplate> library;
};

// Reads the program and rules from disk; empty queries_path or library_dir
// selects the bundled defaults. Directory libraries load *.patch files in
// filename order. Throws std::runtime_error (or the parsers' own errors)
// on unreadable or malformed input.
PipelineInput load_pipeline_input(const std::string& program_path, const std::string& rules_path,
                                  const std::string& queries_path, const std::string& library_dir);

struct PipelineOptions {
  FuzzMode mode = FuzzMode::kP6;
  int budget = 5000;  // packets per test case per round
  uint64_t seed = 1;
  PreProfile pre_profile = PreProfile::kBmv2Like;
  int jobs = 1;
  // p6 mode only: train one model per test case on the first round. When
  // false, models are loaded from model_dir (q<id>c<index>.model); a test
  // case with no file falls back to an untrained network.
  bool train = true;
  std::string model_dir;
  std::string save_model_dir;  // when set, first-round models are written here
  Hyperparams hp;
  int max_rounds = 8;
  // Packets sent beyond the first detection to enrich the localization
  // evidence with passing runs.
  int evidence_packets = 200;
  int runs = 1;  // baseline comparison repetitions
};

// One test case (query condition) in one round.
struct ConditionOutcome {
  int query_id = 0;
  int condition_index = 0;
  QueryScope scope = QueryScope::kUnicast;
  bool platform_dependent = false;
  bool detected = false;
  int packets_sent = 0;
  int packets_to_detection = 0;  // valid when detected
  PacketBytes witness;           // first failing packet
  std::optional<LocalizationReport> localization;
  std::optional<PatchResult> patch;
  std::string note;
};

struct RoundReport {
  int round = 1;
  std::vector<ConditionOutcome> conditions;
  int patches_applied = 0;
  // The rule-matching reference packet kept forwarding as before. Unset on
  // the first round and when no seed packet forwards at all.
  std::optional<bool> sanity_forwarded;
};

struct PipelineReport {
  std::string program_name;
  PreProfile pre_profile = PreProfile::kBmv2Like;
  FuzzMode mode = FuzzMode::kP6;
  int budget = 0;
  uint64_t seed = 0;
  bool trained = false;
  std::vector<std::string> binding_notes;
  std::vector<RoundReport> rounds;
  std::vector<std::string> vendor_notices;  // deduplicated, query order
  SourceText final_program;
  bool program_changed = false;
  // Platform-independent conditions still failing in the last round.
  int unresolved_violations = 0;
  bool sanity_ok = true;
  double wall_seconds = 0;  // summary only, never serialized

  bool resolved() const { return unresolved_violations == 0 && sanity_ok; }
};

PipelineReport run_default_pipeline(const PipelineInput& input, const PipelineOptions& options);

// Per-mode detection statistics for one test case over options.runs runs.
// Runs that never detect are censored at budget + 1 packets.
struct ModeStats {
  FuzzMode mode = FuzzMode::kP6;
  std::vector<int> packets;  // per run, in run order
  int detections = 0;
  double median = 0;
  double lower_quartile = 0;
  double upper_quartile = 0;
};

struct BaselineCase {
  int query_id = 0;
  int condition_index = 0;
  bool platform_dependent = false;
  std::vector<ModeStats> modes;
};

struct BaselineReport {
  std::string program_name;
  PreProfile pre_profile = PreProfile::kBmv2Like;
  int budget = 0;
  uint64_t seed = 0;
  int runs = 0;
  std::vector<BaselineCase> cases;
  double wall_seconds = 0;  // summary only, never serialized
};

// Detection-only campaigns, no patching. Seeds are paired: for a given
// test case and run index every mode fuzzes from the same stream, so the
// comparison isolates the packet source. only_cases, when nonempty,
// restricts the table to the listed (query id, condition index) pairs.
BaselineReport run_baseline_comparison(
    const PipelineInput& input, const PipelineOptions& options, const std::vector<FuzzMode>& modes,
    const std::vector<std::pair<int, int>>& only_cases = {});

// Machine-readable form: stable key order, no timings, so equal configs
// and seeds serialize byte-identically regardless of --jobs.
nlohmann::ordered_json report_json(const PipelineReport& report);
nlohmann::ordered_json report_json(const BaselineReport& report);

// Human-readable form, includes the wall time.
std::string human_summary(const PipelineReport& report);
std::string human_summary(const BaselineReport& report);

}  // namespace p6

#endif  // P6_PIPELINE_H_
