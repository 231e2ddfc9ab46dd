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

#include "p6/switch.h"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace p6 {
namespace {

constexpr int kMaxParserSteps = 256;

uint64_t width_mask(int bits) {
  return bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
}

const HeaderLayout* find_layout(const StaticAnalysis& analysis, const std::string& name) {
  for (const HeaderLayout& l : analysis.layouts) {
    if (l.header_name == name) return &l;
  }
  return nullptr;
}

// Extracts one header at octets[cursor...]. Headers carrying an ihl field
// are variable length: 4*ihl octets when ihl >= 5, the fixed size
// otherwise. Returns false when the frame is too short.
bool extract_image(const HeaderLayout& layout, const std::vector<uint8_t>& octets,
                   std::size_t& cursor, HeaderImage& out) {
  const std::size_t fixed = static_cast<std::size_t>(layout.bit_size()) / 8;
  if (octets.size() - cursor < fixed) return false;
  std::size_t total = fixed;
  const HeaderField* ihl = layout.field("ihl");
  if (ihl != nullptr) {
    std::vector<uint8_t> head(octets.begin() + cursor, octets.begin() + cursor + fixed);
    const uint64_t v = read_bits(head, ihl->bit_offset, ihl->bit_width);
    if (v >= 5) total = static_cast<std::size_t>(4 * v);
    if (total < fixed) total = fixed;
    if (octets.size() - cursor < total) return false;
  }
  out.valid = true;
  out.bytes.assign(octets.begin() + cursor, octets.begin() + cursor + fixed);
  out.options.assign(octets.begin() + cursor + fixed, octets.begin() + cursor + total);
  cursor += total;
  return true;
}

enum class FlowKind { kFall, kGoto, kAbort };

struct Flow {
  FlowKind kind = FlowKind::kFall;
  std::string target;
};

struct Exec {
  std::map<std::string, HeaderImage> headers;
  std::map<std::string, uint64_t> meta;
  std::vector<uint8_t> payload;
  bool killed = false;
  std::vector<uint64_t> clone_requests;
  std::optional<uint64_t> mcast_request;
  bool resubmit_request = false;
};

// Interprets one frame against a deployed program. Holds the shared trace
// so repeated hits of one line are recorded once.
class Machine {
 public:
  Machine(const ProgramAst& program, const StaticAnalysis& analysis, const ControlPlane& cp,
          const SwitchOptions& options)
      : program_(program), analysis_(analysis), cp_(cp), options_(options) {
    for (const FieldDecl& f : builtin_metadata_fields()) meta_widths_[f.name] = f.bit_width;
    for (const FieldDecl& f : program.metadata) meta_widths_[f.name] = f.bit_width;
  }

  ProcessResult run(const PacketBytes& frame) {
    ProcessResult result{frame, {}, true, {}, false, 0};
    struct Pass {
      std::vector<uint8_t> octets;
      bool resubmitted;
    };
    std::vector<Pass> queue{{frame.octets(), false}};
    int resubmits_used = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const Pass pass = queue[qi];
      ++result.passes;
      Exec exec;
      for (const auto& [name, width] : meta_widths_) {
        (void)width;
        exec.meta[name] = 0;
      }
      exec.meta["egress_port"] = kDropPort;
      exec.meta["resubmitted"] = pass.resubmitted ? 1 : 0;

      const bool parsed = run_parser(exec, pass.octets);
      if (qi == 0) result.parsed = parsed;
      if (!parsed) continue;

      run_body(program_.ingress, exec, nullptr, /*in_ingress=*/true);

      const bool original_dropped = exec.killed || exec.meta["egress_port"] == kDropPort;
      const bool replication_survives =
          options_.pre_profile == PreProfile::kBmv2Like || !original_dropped;

      if (!original_dropped) {
        EgressRecord rec = egress_copy(exec, CopyKind::kUnicast);
        rec.from_resubmit = pass.resubmitted;
        result.records.push_back(std::move(rec));
      }
      if (replication_survives) {
        for (uint64_t session : exec.clone_requests) {
          std::optional<uint32_t> port = cp_.clone_port(session);
          if (!port.has_value()) continue;
          Exec copy = exec;
          copy.killed = false;
          copy.meta["egress_port"] = *port;
          EgressRecord rec = egress_copy(copy, CopyKind::kClone);
          rec.clone_session = session;
          rec.from_resubmit = pass.resubmitted;
          result.records.push_back(std::move(rec));
        }
        if (exec.mcast_request.has_value()) {
          const std::vector<uint32_t>* ports = cp_.multicast_ports(*exec.mcast_request);
          if (ports != nullptr) {
            for (uint32_t port : *ports) {
              Exec copy = exec;
              copy.killed = false;
              copy.meta["egress_port"] = port;
              EgressRecord rec = egress_copy(copy, CopyKind::kMulticastCopy);
              rec.mcast_group = *exec.mcast_request;
              rec.from_resubmit = pass.resubmitted;
              result.records.push_back(std::move(rec));
            }
          }
        }
        if (exec.resubmit_request && resubmits_used < options_.resubmit_limit) {
          ++resubmits_used;
          queue.push_back({pass.octets, true});
        }
      }
    }
    for (const EgressRecord& rec : result.records) {
      if (rec.kind == CopyKind::kUnicast && !rec.dropped) result.dropped_original = false;
    }
    result.trace = trace_;
    return result;
  }

 private:
  void hit(int line) {
    if (seen_.insert(line).second) trace_.push_back(line);
  }

  bool run_parser(Exec& exec, const std::vector<uint8_t>& octets) {
    std::size_t cursor = 0;
    std::string state = "start";
    int steps = 0;
    while (true) {
      if (state == "accept") {
        exec.payload.assign(octets.begin() + cursor, octets.end());
        return !exec.killed;
      }
      if (state == "reject") return false;
      if (++steps > kMaxParserSteps) return false;
      const ParserStateDecl* decl = program_.state(state);
      if (decl == nullptr) return false;
      Flow flow = run_parser_body(decl->body, exec, octets, cursor);
      switch (flow.kind) {
        case FlowKind::kAbort:
          return false;
        case FlowKind::kGoto:
          state = flow.target;
          break;
        case FlowKind::kFall:
          // Falling off the end of a state accepts.
          state = "accept";
          break;
      }
    }
  }

  Flow run_parser_body(const std::vector<Stmt>& body, Exec& exec,
                       const std::vector<uint8_t>& octets, std::size_t& cursor) {
    for (const Stmt& s : body) {
      hit(s.line);
      switch (s.kind) {
        case Stmt::Kind::kExtract: {
          const HeaderLayout* layout = find_layout(analysis_, s.name);
          HeaderImage image;
          if (layout == nullptr || !extract_image(*layout, octets, cursor, image)) {
            return {FlowKind::kAbort, {}};
          }
          exec.headers[s.name] = std::move(image);
          break;
        }
        case Stmt::Kind::kSelect: {
          const uint64_t v = read_ref(s.target, exec, nullptr);
          std::string target = s.default_target.empty() ? "reject" : s.default_target;
          for (const SelectArm& arm : s.arms) {
            if (arm.value == v) {
              target = arm.target;
              break;
            }
          }
          return {FlowKind::kGoto, target};
        }
        case Stmt::Kind::kTransition:
          return {FlowKind::kGoto, s.name};
        case Stmt::Kind::kSet:
          write_ref(s.target, eval_expr(s.value, exec, nullptr), exec);
          break;
        case Stmt::Kind::kDecrement:
          write_ref(s.target, read_ref(s.target, exec, nullptr) - 1, exec);
          break;
        case Stmt::Kind::kUpdateChecksum:
          update_checksum(s.name, exec);
          break;
        case Stmt::Kind::kVerifyChecksum:
          if (!checksum_ok(s.name, exec)) return {FlowKind::kAbort, {}};
          break;
        case Stmt::Kind::kDrop:
        case Stmt::Kind::kReject:
          return {FlowKind::kAbort, {}};
        case Stmt::Kind::kIf: {
          const std::vector<Stmt>& branch =
              eval_cond(s.cond, exec, nullptr) ? s.then_body : s.else_body;
          Flow flow = run_parser_body(branch, exec, octets, cursor);
          if (flow.kind != FlowKind::kFall) return flow;
          break;
        }
        default:
          break;
      }
    }
    return {FlowKind::kFall, {}};
  }

  void run_body(const std::vector<Stmt>& body, Exec& exec,
                const std::map<std::string, uint64_t>* params, bool in_ingress) {
    for (const Stmt& s : body) {
      hit(s.line);
      switch (s.kind) {
        case Stmt::Kind::kSet:
          write_ref(s.target, eval_expr(s.value, exec, params), exec);
          break;
        case Stmt::Kind::kDecrement:
          write_ref(s.target, read_ref(s.target, exec, params) - 1, exec);
          break;
        case Stmt::Kind::kUpdateChecksum:
          update_checksum(s.name, exec);
          break;
        case Stmt::Kind::kVerifyChecksum:
          // A failed verification in a control is a sticky kill; execution
          // continues but the copy drops at the end of the stage.
          if (!checksum_ok(s.name, exec)) exec.killed = true;
          break;
        case Stmt::Kind::kDrop:
          exec.meta["egress_port"] = kDropPort;
          break;
        case Stmt::Kind::kClone:
          if (in_ingress) exec.clone_requests.push_back(eval_expr(s.value, exec, params));
          break;
        case Stmt::Kind::kMulticast:
          if (in_ingress) exec.mcast_request = eval_expr(s.value, exec, params);
          break;
        case Stmt::Kind::kResubmit:
          if (in_ingress) exec.resubmit_request = true;
          break;
        case Stmt::Kind::kApply:
          apply_table(s.name, exec, in_ingress);
          break;
        case Stmt::Kind::kCall: {
          const ActionDecl* action = program_.action(s.name);
          if (action != nullptr) run_body(action->body, exec, nullptr, in_ingress);
          break;
        }
        case Stmt::Kind::kIf:
          run_body(eval_cond(s.cond, exec, params) ? s.then_body : s.else_body, exec, params,
                   in_ingress);
          break;
        default:
          break;
      }
    }
  }

  void apply_table(const std::string& name, Exec& exec, bool in_ingress) {
    const TableDecl* decl = program_.table(name);
    if (decl == nullptr) return;
    const uint64_t key = read_ref(decl->key, exec, nullptr);
    const RuleEntry* entry = cp_.lookup(name, decl->kind, key, ref_width(decl->key));
    if (entry == nullptr) return;
    const ActionDecl* action = program_.action(entry->action);
    if (action == nullptr) return;
    std::map<std::string, uint64_t> params;
    for (const auto& [pname, value] : entry->params) params[pname] = value;
    run_body(action->body, exec, &params, in_ingress);
  }

  EgressRecord egress_copy(Exec copy, CopyKind kind) {
    copy.clone_requests.clear();
    copy.mcast_request.reset();
    copy.resubmit_request = false;
    run_body(program_.egress, copy, nullptr, /*in_ingress=*/false);
    if (copy.killed) copy.meta["egress_port"] = kDropPort;
    EgressRecord rec{kind,
                     static_cast<uint32_t>(copy.meta["egress_port"]),
                     false,
                     PacketBytes(deparse(copy)),
                     0,
                     0,
                     false};
    rec.dropped = rec.port == kDropPort;
    return rec;
  }

  std::vector<uint8_t> deparse(Exec& exec) {
    std::vector<uint8_t> out;
    for (const Stmt& s : program_.deparser) {
      hit(s.line);
      auto it = exec.headers.find(s.name);
      if (it == exec.headers.end() || !it->second.valid) continue;
      out.insert(out.end(), it->second.bytes.begin(), it->second.bytes.end());
      out.insert(out.end(), it->second.options.begin(), it->second.options.end());
    }
    out.insert(out.end(), exec.payload.begin(), exec.payload.end());
    while (out.size() < kMinFrameOctets) out.push_back(0);
    return out;
  }

  int ref_width(const FieldRef& ref) const {
    if (ref.kind == FieldRef::Kind::kHeader) {
      const HeaderLayout* layout = find_layout(analysis_, ref.header);
      if (layout != nullptr) {
        const HeaderField* f = layout->field(ref.field);
        if (f != nullptr) return f->bit_width;
      }
      return 64;
    }
    auto it = meta_widths_.find(ref.field);
    return it == meta_widths_.end() ? 64 : it->second;
  }

  uint64_t read_ref(const FieldRef& ref, const Exec& exec,
                    const std::map<std::string, uint64_t>* params) const {
    switch (ref.kind) {
      case FieldRef::Kind::kHeader: {
        auto it = exec.headers.find(ref.header);
        if (it == exec.headers.end() || !it->second.valid) return 0;
        const HeaderLayout* layout = find_layout(analysis_, ref.header);
        if (layout == nullptr) return 0;
        const HeaderField* f = layout->field(ref.field);
        if (f == nullptr) return 0;
        return read_bits(it->second.bytes, f->bit_offset, f->bit_width);
      }
      case FieldRef::Kind::kMetadata: {
        auto it = exec.meta.find(ref.field);
        return it == exec.meta.end() ? 0 : it->second;
      }
      case FieldRef::Kind::kParam: {
        if (params == nullptr) return 0;
        auto it = params->find(ref.field);
        return it == params->end() ? 0 : it->second;
      }
    }
    return 0;
  }

  void write_ref(const FieldRef& ref, uint64_t value, Exec& exec) const {
    switch (ref.kind) {
      case FieldRef::Kind::kHeader: {
        auto it = exec.headers.find(ref.header);
        if (it == exec.headers.end() || !it->second.valid) return;
        const HeaderLayout* layout = find_layout(analysis_, ref.header);
        if (layout == nullptr) return;
        const HeaderField* f = layout->field(ref.field);
        if (f == nullptr) return;
        write_bits(it->second.bytes, f->bit_offset, f->bit_width,
                   value & width_mask(f->bit_width));
        return;
      }
      case FieldRef::Kind::kMetadata: {
        auto it = meta_widths_.find(ref.field);
        if (it == meta_widths_.end()) return;
        exec.meta[ref.field] = value & width_mask(it->second);
        return;
      }
      case FieldRef::Kind::kParam:
        return;
    }
  }

  uint64_t eval_expr(const Expr& expr, const Exec& exec,
                     const std::map<std::string, uint64_t>* params) const {
    uint64_t acc = 0;
    for (const Expr::Term& t : expr.terms) {
      const uint64_t v = t.is_literal ? t.literal : read_ref(t.ref, exec, params);
      acc = t.negated ? acc - v : acc + v;
    }
    return acc;
  }

  bool eval_cond(const Condition& cond, const Exec& exec,
                 const std::map<std::string, uint64_t>* params) const {
    const uint64_t lhs = eval_expr(cond.lhs, exec, params);
    const uint64_t rhs = eval_expr(cond.rhs, exec, params);
    switch (cond.op) {
      case RelOp::kEq:
        return lhs == rhs;
      case RelOp::kNe:
        return lhs != rhs;
      case RelOp::kLt:
        return lhs < rhs;
      case RelOp::kLe:
        return lhs <= rhs;
      case RelOp::kGt:
        return lhs > rhs;
      case RelOp::kGe:
        return lhs >= rhs;
    }
    return false;
  }

  bool checksum_ok(const std::string& header, const Exec& exec) const {
    auto it = exec.headers.find(header);
    if (it == exec.headers.end() || !it->second.valid) return true;
    const HeaderLayout* layout = find_layout(analysis_, header);
    if (layout == nullptr) return true;
    const HeaderField* f = layout->field("checksum");
    if (f == nullptr) return true;
    const uint16_t want = header_image_checksum(*layout, it->second.bytes, it->second.options);
    return read_bits(it->second.bytes, f->bit_offset, f->bit_width) == want;
  }

  void update_checksum(const std::string& header, Exec& exec) const {
    auto it = exec.headers.find(header);
    if (it == exec.headers.end() || !it->second.valid) return;
    const HeaderLayout* layout = find_layout(analysis_, header);
    if (layout == nullptr) return;
    const HeaderField* f = layout->field("checksum");
    if (f == nullptr) return;
    const uint16_t sum = header_image_checksum(*layout, it->second.bytes, it->second.options);
    write_bits(it->second.bytes, f->bit_offset, f->bit_width, sum);
  }

  const ProgramAst& program_;
  const StaticAnalysis& analysis_;
  const ControlPlane& cp_;
  const SwitchOptions& options_;
  std::map<std::string, int> meta_widths_;
  std::set<int> seen_;
  std::vector<int> trace_;
};

}  // namespace

std::optional<uint64_t> HeaderStack::field(const StaticAnalysis& analysis,
                                           const std::string& header,
                                           const std::string& field) const {
  auto it = headers.find(header);
  if (it == headers.end() || !it->second.valid) return std::nullopt;
  const HeaderLayout* layout = find_layout(analysis, header);
  if (layout == nullptr) return std::nullopt;
  const HeaderField* f = layout->field(field);
  if (f == nullptr) return std::nullopt;
  return read_bits(it->second.bytes, f->bit_offset, f->bit_width);
}

HeaderStack structural_parse(const ProgramAst& program, const StaticAnalysis& analysis,
                             const std::vector<uint8_t>& octets) {
  HeaderStack stack;
  std::size_t cursor = 0;
  std::string state = "start";
  int steps = 0;

  // Only the extract/select/transition skeleton runs here. Reject ends the
  // walk but keeps what was already extracted.
  std::function<std::optional<std::string>(const std::vector<Stmt>&)> walk =
      [&](const std::vector<Stmt>& body) -> std::optional<std::string> {
    for (const Stmt& s : body) {
      switch (s.kind) {
        case Stmt::Kind::kExtract: {
          const HeaderLayout* layout = find_layout(analysis, s.name);
          HeaderImage image;
          if (layout == nullptr || !extract_image(*layout, octets, cursor, image)) {
            return "reject";
          }
          stack.headers[s.name] = std::move(image);
          break;
        }
        case Stmt::Kind::kSelect: {
          uint64_t v = 0;
          if (s.target.kind == FieldRef::Kind::kHeader) {
            v = stack.field(analysis, s.target.header, s.target.field).value_or(0);
          }
          for (const SelectArm& arm : s.arms) {
            if (arm.value == v) return arm.target;
          }
          return s.default_target.empty() ? "reject" : s.default_target;
        }
        case Stmt::Kind::kTransition:
          return s.name;
        case Stmt::Kind::kIf: {
          // Guards are skipped, but both branches may hold skeleton
          // statements; only the then branch is followed to keep the walk
          // deterministic and validation free.
          std::optional<std::string> next = walk(s.then_body);
          if (next.has_value()) return next;
          break;
        }
        default:
          break;
      }
    }
    return std::nullopt;
  };

  while (state != "accept" && state != "reject") {
    if (++steps > kMaxParserSteps) break;
    const ParserStateDecl* decl = program.state(state);
    if (decl == nullptr) break;
    std::optional<std::string> next = walk(decl->body);
    state = next.value_or("accept");
  }
  return stack;
}

uint16_t header_image_checksum(const HeaderLayout& layout, const std::vector<uint8_t>& fixed,
                               const std::vector<uint8_t>& options) {
  std::vector<uint8_t> image = fixed;
  const HeaderField* f = layout.field("checksum");
  if (f != nullptr) write_bits(image, f->bit_offset, f->bit_width, 0);
  image.insert(image.end(), options.begin(), options.end());
  if (image.size() % 2 != 0) image.push_back(0);
  uint32_t acc = 0;
  for (std::size_t i = 0; i + 1 < image.size(); i += 2) {
    acc += static_cast<uint32_t>(image[i]) << 8 | image[i + 1];
    acc = (acc & 0xffff) + (acc >> 16);
  }
  return static_cast<uint16_t>(~acc & 0xffff);
}

Switch::Switch(ProgramAst program, ControlPlane control_plane, SwitchOptions options)
    : program_(std::move(program)), control_plane_(std::move(control_plane)), options_(options) {
  std::vector<Diagnostic> diags = validate_program(program_);
  if (!diags.empty()) {
    throw std::invalid_argument("program:" + std::to_string(diags[0].line) + ": " +
                                diags[0].message);
  }
  control_plane_.validate_against(program_);
  analysis_ = analyze_program(program_);
}

ProcessResult Switch::process(const PacketBytes& frame) const {
  Machine machine(program_, analysis_, control_plane_, options_);
  return machine.run(frame);
}

}  // namespace p6
