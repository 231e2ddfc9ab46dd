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

#include "p6/pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "p6/defaults.h"
#include "p6/rng.h"

namespace p6 {
namespace {

// Residual exploration during the exploitation pass, so a learner whose
// greedy path misses can still leave it. Multi-step triggers lean on this:
// the learner reliably finishes a chain whose first link came from an
// exploratory step.
constexpr double kExploitEps = 0.2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Every mode of one test case and run shares this stream, and every
// (round, test case) pair gets its own.
uint64_t case_stream(uint64_t seed, int round, int query_id, int condition_index) {
  const uint64_t tag = (static_cast<uint64_t>(round) << 40) |
                       (static_cast<uint64_t>(query_id) << 20) |
                       static_cast<uint64_t>(condition_index);
  return Rng::substream(seed, tag);
}

void run_parallel(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Verdict verdict_for(const std::vector<ConditionVerdict>& verdicts, int condition_index) {
  for (const ConditionVerdict& v : verdicts) {
    if (v.condition_index == condition_index) return v.verdict;
  }
  return Verdict::kNotApplicable;
}

struct Campaign {
  bool detected = false;
  int packets_to_detection = 0;
  int packets_sent = 0;
  PacketBytes witness;
  std::vector<TestRecord> records;
};

// One detection campaign: fuzz until the budget runs out, plus a bounded
// evidence tail after the first detection.
Campaign run_campaign(const Switch& sw, const Query& query, int condition_index,
                      const MutationDictionary& dict, const std::vector<PacketBytes>& seeds,
                      FuzzMode mode, const MlpModel* model, int budget, int evidence_packets,
                      uint64_t seed, bool collect) {
  Campaign out;
  FuzzEnv env(sw, query, condition_index, dict, seeds, seed);
  FuzzState state = env.reset();
  PacketBytes episode_seed = env.current();
  int limit = budget;
  while (env.total_packets_sent() < limit) {
    StepOutcome step;
    switch (mode) {
      case FuzzMode::kP6:
        step = env.step(select_action(*model, state, kExploitEps, env.rng()));
        break;
      case FuzzMode::kAdvanced:
        step = env.step(policy_advanced(static_cast<int>(env.actions().size()), env.rng()));
        break;
      case FuzzMode::kIpv4:
        step = env.send(policy_ipv4(episode_seed, env.rng()));
        break;
      case FuzzMode::kNaive:
        step = env.send(policy_naive(env.rng()));
        break;
    }
    const Verdict verdict = verdict_for(step.verdicts, condition_index);
    if (collect) out.records.push_back({step.packet, {}, verdict});
    if (verdict == Verdict::kFail && !out.detected) {
      out.detected = true;
      out.packets_to_detection = env.total_packets_sent();
      out.witness = step.packet;
      limit = std::min(budget, env.total_packets_sent() + evidence_packets);
    }
    if (step.terminal) {
      state = env.reset();
      episode_seed = env.current();
    } else {
      state = std::move(step.state);
    }
  }
  out.packets_sent = env.total_packets_sent();
  return out;
}

std::string model_file(const std::string& dir, int query_id, int condition_index) {
  return dir + "/q" + std::to_string(query_id) + "c" + std::to_string(condition_index) + ".model";
}

// Train-or-load, once per test case on the first round's deployment.
MlpModel acquire_model(const Switch& sw, const Query& query, int condition_index,
                       const MutationDictionary& dict, const std::vector<PacketBytes>& seeds,
                       const PipelineOptions& options, uint64_t stream) {
  if (options.train) {
    FuzzEnv env(sw, query, condition_index, dict, seeds, Rng::substream(stream, 1));
    TrainResult trained = train_agent(env, options.hp, Rng::substream(stream, 2));
    if (!options.save_model_dir.empty()) {
      save_model(trained.online,
                 model_file(options.save_model_dir, query.id, condition_index));
    }
    return std::move(trained.online);
  }
  if (!options.model_dir.empty()) {
    const std::string path = model_file(options.model_dir, query.id, condition_index);
    if (std::filesystem::exists(path)) return load_model(path);
  }
  // No file shipped for this test case: an untrained network still yields a
  // deterministic policy.
  std::vector<int> sizes;
  sizes.push_back(kStateOctets);
  for (int h : options.hp.hidden) sizes.push_back(h);
  sizes.push_back(static_cast<int>(enumerate_actions(dict).size()));
  Rng rng(Rng::substream(stream, 4));
  return MlpModel::init(sizes, rng);
}

// (copy kind, port) of every copy that leaves the switch, sorted. The
// forwarding decision for the sanity packet must survive patching even
// though patched header contents may legitimately change.
std::vector<std::pair<int, uint32_t>> forwarded_ports(const Switch& sw, const PacketBytes& packet) {
  std::vector<std::pair<int, uint32_t>> out;
  for (const EgressRecord& rec : sw.process(packet).records) {
    if (!rec.dropped) out.emplace_back(static_cast<int>(rec.kind), rec.port);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SourceText merge_insertions(const SourceText& base, std::vector<const PatchResult*> patches) {
  std::stable_sort(patches.begin(), patches.end(),
                   [](const PatchResult* a, const PatchResult* b) {
                     return a->insert_after_line < b->insert_after_line;
                   });
  SourceText out = base;
  // Splice back to front so earlier insertion points stay valid; patches
  // sharing a point end up in test-case order.
  for (auto it = patches.rbegin(); it != patches.rend(); ++it) {
    out.lines.insert(out.lines.begin() + (*it)->insert_after_line,
                     (*it)->inserted_lines.begin(), (*it)->inserted_lines.end());
  }
  return out;
}

std::string hex_packet(const PacketBytes& packet) {
  if (packet.size() == 0) return "";
  std::string out = "0x";
  char buf[3];
  for (uint8_t b : packet.octets()) {
    std::snprintf(buf, sizeof(buf), "%02x", b);
    out += buf;
  }
  return out;
}

const char* profile_name(PreProfile profile) {
  return profile == PreProfile::kBmv2Like ? "bmv2-like" : "strict";
}

const char* scope_name(QueryScope scope) {
  switch (scope) {
    case QueryScope::kUnicast: return "unicast";
    case QueryScope::kClone: return "clone";
    case QueryScope::kMulticast: return "multicast";
  }
  return "unicast";
}

const char* outcome_name(PatchOutcome outcome) {
  switch (outcome) {
    case PatchOutcome::kApplied: return "applied";
    case PatchOutcome::kAlreadyPresent: return "already_present";
    case PatchOutcome::kNoPatchAvailable: return "no_patch_available";
  }
  return "no_patch_available";
}

double percentile(const std::vector<int>& sorted, double p) {
  if (sorted.empty()) return 0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return static_cast<double>(sorted[lo]) +
         frac * static_cast<double>(sorted[hi] - sorted[lo]);
}

struct Case {
  const Query* query = nullptr;
  int condition_index = 0;
};

std::vector<Case> enumerate_cases(const std::vector<Query>& queries) {
  std::vector<Case> out;
  for (const Query& q : queries) {
    for (int c = 0; c < q.condition_count(); ++c) out.push_back({&q, c});
  }
  return out;
}

}  // namespace

std::string to_string(FuzzMode mode) {
  switch (mode) {
    case FuzzMode::kP6: return "p6";
    case FuzzMode::kAdvanced: return "advanced";
    case FuzzMode::kIpv4: return "ipv4";
    case FuzzMode::kNaive: return "naive";
  }
  return "p6";
}

std::optional<FuzzMode> parse_fuzz_mode(const std::string& name) {
  if (name == "p6") return FuzzMode::kP6;
  if (name == "advanced") return FuzzMode::kAdvanced;
  if (name == "ipv4") return FuzzMode::kIpv4;
  if (name == "naive") return FuzzMode::kNaive;
  return std::nullopt;
}

PipelineInput load_pipeline_input(const std::string& program_path, const std::string& rules_path,
                                  const std::string& queries_path,
                                  const std::string& library_dir) {
  PipelineInput input;
  input.program_name = program_path;
  input.program = SourceText::from_string(slurp(program_path));
  input.control_plane = ControlPlane::parse(slurp(rules_path));
  input.queries = parse_queries(queries_path.empty() ? default_queries() : slurp(queries_path));
  if (library_dir.empty()) {
    input.library = default_patch_library();
  } else {
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(library_dir)) {
      if (entry.path().extension() == ".patch") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    for (const std::string& file : files) {
      input.library.push_back(parse_patch_template(slurp(file)));
    }
    if (input.library.empty()) {
      throw std::runtime_error("no .patch templates in " + library_dir);
    }
  }
  return input;
}

PipelineReport run_default_pipeline(const PipelineInput& input, const PipelineOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  PipelineReport report;
  report.program_name = input.program_name;
  report.pre_profile = options.pre_profile;
  report.mode = options.mode;
  report.budget = options.budget;
  report.seed = options.seed;
  report.trained = options.mode == FuzzMode::kP6 && options.train;

  SourceText source = input.program;
  std::vector<MlpModel> models;  // one per test case, p6 mode, first round
  bool models_ready = false;
  std::set<std::pair<int, int>> noticed;
  PacketBytes sanity_packet;
  std::vector<std::pair<int, uint32_t>> sanity_reference;
  bool have_sanity = false;

  for (int round = 1; round <= options.max_rounds; ++round) {
    ProgramAst ast = parse_program(source);
    const std::vector<Diagnostic> diagnostics = validate_program(ast);
    if (!diagnostics.empty()) {
      throw std::invalid_argument("program does not validate: " + diagnostics[0].message);
    }
    SwitchOptions sw_options;
    sw_options.pre_profile = options.pre_profile;
    const Switch sw(std::move(ast), input.control_plane, sw_options);
    const BoundQueries bound = bind_queries(input.queries, sw.program(), sw.analysis());
    if (round == 1) report.binding_notes = bound.notes;
    const MutationDictionary dict = build_dictionary(sw.analysis(), sw.control_plane(), bound.queries);
    const std::vector<PacketBytes> seeds = make_seed_packets(dict);
    const std::vector<Case> cases = enumerate_cases(bound.queries);

    RoundReport round_report;
    round_report.round = round;
    round_report.conditions.resize(cases.size());
    if (round == 1) {
      for (const PacketBytes& seed : seeds) {
        std::vector<std::pair<int, uint32_t>> ports = forwarded_ports(sw, seed);
        if (!ports.empty()) {
          sanity_packet = seed;
          sanity_reference = std::move(ports);
          have_sanity = true;
          break;
        }
      }
    } else if (have_sanity) {
      const bool ok = forwarded_ports(sw, sanity_packet) == sanity_reference;
      round_report.sanity_forwarded = ok;
      if (!ok) report.sanity_ok = false;
    }

    if (options.mode == FuzzMode::kP6 && !models_ready) models.resize(cases.size());
    run_parallel(options.jobs, cases.size(), [&](std::size_t i) {
      const Query& query = *cases[i].query;
      const int ci = cases[i].condition_index;
      ConditionOutcome& outcome = round_report.conditions[i];
      outcome.query_id = query.id;
      outcome.condition_index = ci;
      outcome.scope = query.scope;
      outcome.platform_dependent = query.condition(ci).platform_dependent;

      const MlpModel* model = nullptr;
      if (options.mode == FuzzMode::kP6) {
        if (!models_ready) {
          models[i] = acquire_model(sw, query, ci, dict, seeds, options,
                                    case_stream(options.seed, 1, query.id, ci));
        }
        model = &models[i];
      }
      Campaign campaign = run_campaign(
          sw, query, ci, dict, seeds, options.mode, model, options.budget,
          outcome.platform_dependent ? 0 : options.evidence_packets,
          Rng::substream(case_stream(options.seed, round, query.id, ci), 3),
          !outcome.platform_dependent);
      outcome.detected = campaign.detected;
      outcome.packets_sent = campaign.packets_sent;
      outcome.packets_to_detection = campaign.packets_to_detection;
      outcome.witness = campaign.witness;
      if (campaign.detected && !outcome.platform_dependent) {
        for (TestRecord& record : campaign.records) {
          record.lines = sw.process(record.packet).trace;
        }
        outcome.localization = localize(sw.program(), campaign.records);
      }
    });
    models_ready = models_ready || options.mode == FuzzMode::kP6;

    std::vector<PatchResult> applied;
    for (ConditionOutcome& outcome : round_report.conditions) {
      if (!outcome.detected) continue;
      if (outcome.platform_dependent) {
        if (noticed.insert({outcome.query_id, outcome.condition_index}).second) {
          report.vendor_notices.push_back(
              "query " + std::to_string(outcome.query_id) + " condition " +
              std::to_string(outcome.condition_index) +
              ": platform-dependent violation under the " +
              std::string(profile_name(options.pre_profile)) +
              " replication profile; witness " + hex_packet(outcome.witness) +
              "; vendor informed, no patch attempted");
        }
        continue;
      }
      try {
        PatchResult result =
            run_patcher(sw.program(), sw.analysis(), *outcome.localization, outcome.query_id,
                        outcome.condition_index, input.library);
        result.patched_source.reset();  // the merged source below supersedes it
        if (result.outcome == PatchOutcome::kApplied) {
          applied.push_back(result);
        } else if (result.outcome == PatchOutcome::kAlreadyPresent) {
          outcome.note = "patch " + result.patch_id +
                         " is already present but the condition still fails";
        }
        outcome.patch = std::move(result);
      } catch (const PatchRejected& e) {
        outcome.note = e.what();
      }
    }
    round_report.patches_applied = static_cast<int>(applied.size());
    report.rounds.push_back(std::move(round_report));

    if (applied.empty()) break;
    std::vector<const PatchResult*> pointers;
    pointers.reserve(applied.size());
    for (const PatchResult& r : applied) pointers.push_back(&r);
    source = merge_insertions(source, std::move(pointers));
  }

  for (const ConditionOutcome& outcome : report.rounds.back().conditions) {
    if (outcome.detected && !outcome.platform_dependent) ++report.unresolved_violations;
  }
  report.final_program = source;
  report.program_changed = !(source == input.program);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

BaselineReport run_baseline_comparison(const PipelineInput& input, const PipelineOptions& options,
                                       const std::vector<FuzzMode>& modes,
                                       const std::vector<std::pair<int, int>>& only_cases) {
  const auto started = std::chrono::steady_clock::now();
  ProgramAst ast = parse_program(input.program);
  const std::vector<Diagnostic> diagnostics = validate_program(ast);
  if (!diagnostics.empty()) {
    throw std::invalid_argument("program does not validate: " + diagnostics[0].message);
  }
  SwitchOptions sw_options;
  sw_options.pre_profile = options.pre_profile;
  const Switch sw(std::move(ast), input.control_plane, sw_options);
  const BoundQueries bound = bind_queries(input.queries, sw.program(), sw.analysis());
  const MutationDictionary dict = build_dictionary(sw.analysis(), sw.control_plane(), bound.queries);
  const std::vector<PacketBytes> seeds = make_seed_packets(dict);

  std::vector<Case> cases;
  for (const Case& c : enumerate_cases(bound.queries)) {
    if (only_cases.empty() ||
        std::find(only_cases.begin(), only_cases.end(),
                  std::make_pair(c.query->id, c.condition_index)) != only_cases.end()) {
      cases.push_back(c);
    }
  }

  BaselineReport report;
  report.program_name = input.program_name;
  report.pre_profile = options.pre_profile;
  report.budget = options.budget;
  report.seed = options.seed;
  report.runs = options.runs;
  report.cases.resize(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    report.cases[i].query_id = cases[i].query->id;
    report.cases[i].condition_index = cases[i].condition_index;
    report.cases[i].platform_dependent =
        cases[i].query->condition(cases[i].condition_index).platform_dependent;
    report.cases[i].modes.resize(modes.size());
    for (std::size_t m = 0; m < modes.size(); ++m) {
      report.cases[i].modes[m].mode = modes[m];
      report.cases[i].modes[m].packets.resize(options.runs);
    }
  }

  // Flat task list; a task is one (test case, mode, run) campaign.
  const std::size_t tasks = cases.size() * modes.size() * static_cast<std::size_t>(options.runs);
  run_parallel(options.jobs, tasks, [&](std::size_t task) {
    const std::size_t i = task / (modes.size() * options.runs);
    const std::size_t m = (task / options.runs) % modes.size();
    const int run = static_cast<int>(task % options.runs);
    const Query& query = *cases[i].query;
    const int ci = cases[i].condition_index;
    // Streams keyed by (test case, run) only, so modes are paired.
    const uint64_t stream = case_stream(options.seed, run + 1, query.id, ci);
    MlpModel model;
    if (modes[m] == FuzzMode::kP6) {
      model = acquire_model(sw, query, ci, dict, seeds, options, stream);
    }
    const Campaign campaign =
        run_campaign(sw, query, ci, dict, seeds, modes[m],
                     modes[m] == FuzzMode::kP6 ? &model : nullptr, options.budget,
                     /*evidence_packets=*/0, Rng::substream(stream, 3), /*collect=*/false);
    ModeStats& stats = report.cases[i].modes[m];
    stats.packets[run] = campaign.detected ? campaign.packets_to_detection : options.budget + 1;
  });

  for (BaselineCase& c : report.cases) {
    for (ModeStats& stats : c.modes) {
      for (int p : stats.packets) {
        if (p <= options.budget) ++stats.detections;
      }
      std::vector<int> sorted = stats.packets;
      std::sort(sorted.begin(), sorted.end());
      stats.median = percentile(sorted, 0.5);
      stats.lower_quartile = percentile(sorted, 0.25);
      stats.upper_quartile = percentile(sorted, 0.75);
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

nlohmann::ordered_json report_json(const PipelineReport& report) {
  nlohmann::ordered_json j;
  j["program"] = report.program_name;
  j["pre_profile"] = profile_name(report.pre_profile);
  j["mode"] = to_string(report.mode);
  j["budget"] = report.budget;
  j["seed"] = report.seed;
  j["trained"] = report.trained;
  j["binding_notes"] = report.binding_notes;
  j["rounds"] = nlohmann::ordered_json::array();
  for (const RoundReport& round : report.rounds) {
    nlohmann::ordered_json rj;
    rj["round"] = round.round;
    if (round.sanity_forwarded.has_value()) rj["sanity_forwarded"] = *round.sanity_forwarded;
    rj["patches_applied"] = round.patches_applied;
    rj["conditions"] = nlohmann::ordered_json::array();
    for (const ConditionOutcome& outcome : round.conditions) {
      nlohmann::ordered_json cj;
      cj["query"] = outcome.query_id;
      cj["condition"] = outcome.condition_index;
      cj["scope"] = scope_name(outcome.scope);
      cj["platform_dependent"] = outcome.platform_dependent;
      cj["detected"] = outcome.detected;
      cj["packets_sent"] = outcome.packets_sent;
      if (outcome.detected) {
        cj["packets_to_detection"] = outcome.packets_to_detection;
        cj["witness"] = hex_packet(outcome.witness);
      }
      if (outcome.localization.has_value()) {
        const LocalizationReport& loc = *outcome.localization;
        nlohmann::ordered_json lj;
        lj["total_passed"] = loc.total_passed;
        lj["total_failed"] = loc.total_failed;
        lj["inputs_digest"] = loc.inputs_digest;
        lj["lines"] = nlohmann::ordered_json::array();
        const std::size_t shown = std::min<std::size_t>(loc.lines.size(), 10);
        for (std::size_t i = 0; i < shown; ++i) {
          lj["lines"].push_back({{"line", loc.lines[i].line},
                                 {"suspiciousness", loc.lines[i].suspiciousness}});
        }
        cj["localization"] = std::move(lj);
      }
      if (outcome.patch.has_value()) {
        const PatchResult& patch = *outcome.patch;
        nlohmann::ordered_json pj;
        pj["outcome"] = outcome_name(patch.outcome);
        if (!patch.patch_id.empty()) pj["patch_id"] = patch.patch_id;
        if (patch.outcome == PatchOutcome::kApplied) {
          pj["insert_after_line"] = patch.insert_after_line;
          pj["inserted_lines"] = patch.inserted_lines;
        }
        if (!patch.note.empty()) pj["note"] = patch.note;
        cj["patch"] = std::move(pj);
      }
      if (!outcome.note.empty()) cj["note"] = outcome.note;
      rj["conditions"].push_back(std::move(cj));
    }
    j["rounds"].push_back(std::move(rj));
  }
  j["vendor_notices"] = report.vendor_notices;
  j["unresolved_violations"] = report.unresolved_violations;
  j["sanity_ok"] = report.sanity_ok;
  j["resolved"] = report.resolved();
  j["program_changed"] = report.program_changed;
  if (report.program_changed) j["final_program"] = report.final_program.lines;
  return j;
}

nlohmann::ordered_json report_json(const BaselineReport& report) {
  nlohmann::ordered_json j;
  j["program"] = report.program_name;
  j["pre_profile"] = profile_name(report.pre_profile);
  j["budget"] = report.budget;
  j["seed"] = report.seed;
  j["runs"] = report.runs;
  j["cases"] = nlohmann::ordered_json::array();
  for (const BaselineCase& c : report.cases) {
    nlohmann::ordered_json cj;
    cj["query"] = c.query_id;
    cj["condition"] = c.condition_index;
    cj["platform_dependent"] = c.platform_dependent;
    cj["modes"] = nlohmann::ordered_json::array();
    for (const ModeStats& stats : c.modes) {
      nlohmann::ordered_json mj;
      mj["mode"] = to_string(stats.mode);
      mj["packets"] = stats.packets;
      mj["detections"] = stats.detections;
      mj["median"] = stats.median;
      mj["lower_quartile"] = stats.lower_quartile;
      mj["upper_quartile"] = stats.upper_quartile;
      cj["modes"].push_back(std::move(mj));
    }
    j["cases"].push_back(std::move(cj));
  }
  return j;
}

std::string human_summary(const PipelineReport& report) {
  std::ostringstream out;
  out << "p6: " << report.program_name << " (" << profile_name(report.pre_profile) << " profile, "
      << to_string(report.mode) << " mode, budget " << report.budget << ", seed " << report.seed
      << ")\n";
  for (const RoundReport& round : report.rounds) {
    int detections = 0;
    for (const ConditionOutcome& outcome : round.conditions) detections += outcome.detected;
    out << "round " << round.round << ": " << round.conditions.size() << " test cases, "
        << detections << " detections, " << round.patches_applied << " patches applied\n";
    for (const ConditionOutcome& outcome : round.conditions) {
      if (!outcome.detected) continue;
      out << "  q" << outcome.query_id << "c" << outcome.condition_index << " detected after "
          << outcome.packets_to_detection << " packets";
      if (outcome.platform_dependent) {
        out << " (platform dependent)";
      } else if (outcome.patch.has_value()) {
        out << "; patch " << outcome.patch->patch_id << " " << outcome_name(outcome.patch->outcome);
      } else {
        out << "; not patched";
      }
      out << "\n";
      if (!outcome.note.empty()) out << "    note: " << outcome.note << "\n";
    }
    if (round.sanity_forwarded.has_value()) {
      out << "  sanity packet " << (*round.sanity_forwarded ? "still forwards" : "BROKEN") << "\n";
    }
  }
  for (const std::string& notice : report.vendor_notices) out << "vendor notice: " << notice << "\n";
  out << "result: " << (report.resolved() ? "resolved" : "UNRESOLVED") << " ("
      << report.unresolved_violations << " unresolved violations) in " << std::fixed
      << std::setprecision(1) << report.wall_seconds << " s\n";
  return out.str();
}

std::string human_summary(const BaselineReport& report) {
  std::ostringstream out;
  out << "baseline comparison: " << report.program_name << " ("
      << profile_name(report.pre_profile) << " profile, budget " << report.budget << ", seed "
      << report.seed << ", " << report.runs << " runs; undetected runs count as budget+1)\n";
  for (const BaselineCase& c : report.cases) {
    out << "  q" << c.query_id << "c" << c.condition_index << ":";
    for (const ModeStats& stats : c.modes) {
      out << " " << to_string(stats.mode) << " median " << stats.median << " [" << stats.lower_quartile
          << ", " << stats.upper_quartile << "] (" << stats.detections << "/" << report.runs
          << " detected)";
    }
    out << "\n";
  }
  out << "wall time " << std::fixed << std::setprecision(1) << report.wall_seconds << " s\n";
  return out.str();
}

}  // namespace p6
