#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conch/fsim.hpp"
#include "conch/json_io.hpp"
#include "conch/lincheck.hpp"
#include "conch/objects/afek_stack.hpp"
#include "conch/objects/atomic.hpp"
#include "conch/objects/hw_queue.hpp"
#include "conch/objects/programs.hpp"
#include "conch/objects/register.hpp"
#include "conch/objects/snapshot.hpp"
#include "conch/sched.hpp"
#include "conch/snapshot_relation.hpp"
#include "conch/strong_lin.hpp"

namespace conch::cli {

enum Exit : int { kHolds = 0, kDisproved = 1, kBudget = 2, kInput = 3 };

/// Model parameters shared by every preset; unset fields keep the preset default.
struct Params {
  std::optional<int> threads, capacity, max_ops, n, updaters, scanners, updates, scans, snapshot_bound, max_pushes,
      max_pops, max_enqs, max_deqs, index_base;
  std::optional<std::string> values, encoding;
};

inline std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw InputError("--values needs at least one value");
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read file `" + path + "`");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool is_file_arg(const std::string& s) {
  return s.size() > 5 && s.compare(s.size() - 5, 5, ".json") == 0;
}

inline objects::SnapshotConfig snapshot_config(const Params& p) {
  objects::SnapshotConfig c;
  if (p.n) c.n = *p.n;
  if (p.values) c.values = split_values(*p.values);
  if (p.updaters) c.updaters = *p.updaters;
  if (p.scanners) c.scanners = *p.scanners;
  if (p.updates) c.updates_per_updater = *p.updates;
  if (p.scans) c.scans_per_scanner = *p.scans;
  if (p.snapshot_bound) c.snapshot_bound = *p.snapshot_bound;
  if (p.index_base) c.index_base = *p.index_base;
  return c;
}

/// Sequential spec presets: stack, queue, register, snapshot.
inline SequentialSpec spec_preset(const std::string& name, const Params& p) {
  if (name == "stack") return specs::stack_spec(p.values ? split_values(*p.values) : std::vector<std::string>{"0", "1", "2"});
  if (name == "queue") return specs::queue_spec(p.values ? split_values(*p.values) : std::vector<std::string>{"1", "2"});
  if (name == "register")
    return specs::register_spec(p.values ? split_values(*p.values) : std::vector<std::string>{"0", "1"});
  if (name == "snapshot") return objects::snapshot_sequential_spec(snapshot_config(p));
  throw InputError("unknown spec `" + name + "` (expected stack, queue, register or snapshot)");
}

inline const std::vector<std::string>& object_presets() {
  static const std::vector<std::string> names{"atomic-stack",    "atomic-queue",     "atomic-register",
                                              "atomic-snapshot", "afek-stack",       "hw-queue",
                                              "snapshot-impl",   "snapshot-spec",    "fixed-lp-register",
                                              "deferred-register"};
  return names;
}

/// An object or program preset, or a path to a JSON LTS file.
inline Lts load_model(const std::string& name, const Params& p, const Budget& budget) {
  if (is_file_arg(name)) return io::lts_from_json(read_file(name));
  if (name.rfind("atomic-", 0) == 0) {
    objects::AtomicConfig cfg;
    cfg.max_ops = p.max_ops.value_or(5);
    if (p.threads) cfg.max_pending = *p.threads;
    const std::string enc = p.encoding.value_or("quotient");
    if (enc != "full" && enc != "quotient") throw InputError("--encoding must be full or quotient");
    cfg.encoding = enc == "full" ? objects::AtomicEncoding::Full : objects::AtomicEncoding::Quotient;
    return objects::explore_atomic(spec_preset(name.substr(7), p), cfg, budget).lts;
  }
  if (name == "afek-stack") {
    objects::AfekStackConfig c;
    if (p.threads) c.threads = *p.threads;
    if (p.capacity) c.capacity = *p.capacity;
    if (p.values) c.values = split_values(*p.values);
    if (p.max_pushes) c.max_pushes = *p.max_pushes;
    if (p.max_pops) c.max_pops = *p.max_pops;
    return objects::afek_stack(c, budget);
  }
  if (name == "hw-queue") {
    objects::HwQueueConfig c;
    if (p.threads) c.threads = *p.threads;
    if (p.capacity) c.capacity = *p.capacity;
    if (p.values) c.values = split_values(*p.values);
    if (p.max_enqs) c.max_enqs = *p.max_enqs;
    if (p.max_deqs) c.max_deqs = *p.max_deqs;
    return objects::hw_queue(c, budget);
  }
  if (name == "snapshot-impl") return objects::snapshot_impl(snapshot_config(p), budget);
  if (name == "snapshot-spec") return objects::snapshot_spec_lts(snapshot_config(p), budget);
  if (name == "fixed-lp-register" || name == "deferred-register") {
    objects::RegisterConfig c;
    if (p.values) c.values = split_values(*p.values);
    if (p.max_ops) c.max_ops = *p.max_ops;
    if (p.threads) c.threads = *p.threads;
    if (name == "fixed-lp-register") return materialize(objects::FixedLpRegisterModel(c), budget);
    return materialize(objects::DeferredRegisterModel(c), budget);
  }
  if (name == "fig1") return materialize(objects::Fig1Program(), budget);
  if (name == "snapshot-client") {
    const auto cfg = snapshot_config(p);
    std::vector<std::string> results;
    for (const auto& r : objects::snapshot_sequential_spec(cfg).return_values)
      if (r != values::ok()) results.emplace_back(r.str());
    return materialize(objects::SnapshotClientProgram(results, cfg.index_base), budget);
  }
  throw InputError("unknown model `" + name + "`; use a preset or a .json LTS file");
}

/// Result of one subcommand.
struct Report {
  std::string command;
  io::Json config = io::Json::object();
  std::string verdict;
  io::Json artifact;
  std::string text;
  std::size_t explored = 0;
  int exit = kHolds;
};

inline void emit(const Report& r, double ms, bool json, std::ostream& out) {
  if (json) {
    io::Json j;
    j["command"] = r.command;
    j["config"] = r.config;
    j["verdict"] = r.verdict;
    j["exitCode"] = r.exit;
    j["artifact"] = r.artifact;
    j["exploredStates"] = r.explored;
    j["elapsedMs"] = ms;
    out << j.dump(2) << "\n";
    return;
  }
  out << r.command << ": " << r.verdict << "\n";
  if (!r.text.empty()) out << r.text << (r.text.back() == '\n' ? "" : "\n");
  out << "explored states: " << r.explored << "\n";
  out << "time: " << static_cast<long long>(ms) << " ms\n";
}

inline std::string relation_text(const SimRelation& f, const Lts& a1, const Lts& a2) {
  return io::relation_to_json(f, a1, a2).dump() + "\n";
}

/// Terminal-state predicates on the client program's observations.
inline std::function<bool(StateId)> fig1_goal(const Lts& po, const std::string& goal) {
  if (goal != "low1=high" && goal != "low2=high") throw InputError("--goal must be low1=high or low2=high");
  const bool first = goal == "low1=high";
  return [&po, first](StateId s) {
    auto o = objects::fig1_outcome(po.name(s));
    return o && (first ? o->low1 : o->low2) == o->high;
  };
}

/// Runs one command line (without the program name). Output goes to `out`,
/// diagnostics to `err`; returns the exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"conch: concurrent-object semantics workbench"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Params p;
  bool json = false, suppression = false;
  int depth = 12;
  std::size_t max_states = Budget{}.max_states, max_traces = Budget{}.max_traces;
  if (const char* env = std::getenv("CONCH_BUDGET_STATES")) {
    try {
      max_states = std::stoull(env);
    } catch (const std::exception&) {
      err << "error: CONCH_BUDGET_STATES must be a number\n";
      return kInput;
    }
  }
  std::string model, from, to, object, program, spec, history, witness, relation, goal, templ, output;

  auto params = [&](CLI::App* sub) {
    sub->add_option("--threads", p.threads, "max concurrently pending invocations");
    sub->add_option("--capacity", p.capacity, "array size of afek-stack / hw-queue");
    sub->add_option("--values", p.values, "comma-separated value domain");
    sub->add_option("--max-ops", p.max_ops, "operation bound of atomic objects and registers");
    sub->add_option("--n", p.n, "snapshot size");
    sub->add_option("--updaters", p.updaters, "snapshot: concurrent updaters");
    sub->add_option("--scanners", p.scanners, "snapshot: concurrent scanners");
    sub->add_option("--updates", p.updates, "snapshot: updates per updater");
    sub->add_option("--scans", p.scans, "snapshot: scans per scanner");
    sub->add_option("--snapshot-bound", p.snapshot_bound, "snapshot spec: max snapshots per scan");
    sub->add_option("--index-base", p.index_base, "snapshot: first cell index");
    sub->add_option("--max-pushes", p.max_pushes, "afek-stack push bound");
    sub->add_option("--max-pops", p.max_pops, "afek-stack pop bound");
    sub->add_option("--max-enqs", p.max_enqs, "hw-queue enqueue bound");
    sub->add_option("--max-deqs", p.max_deqs, "hw-queue dequeue bound");
    sub->add_option("--encoding", p.encoding, "atomic objects: full or quotient (default quotient)");
    sub->add_option("--depth", depth, "trace depth bound, 0 for unbounded (default 12)");
    sub->add_option("--max-states", max_states, "state budget (default 5000000, or CONCH_BUDGET_STATES)");
    sub->add_option("--max-traces", max_traces, "trace budget (default 2000000)");
    sub->add_flag("--json", json, "machine-readable report");
  };

  auto* export_cmd = app.add_subcommand("export-model", "write a preset as a JSON LTS");
  export_cmd->add_option("--model", model, "preset or .json file")->required();
  export_cmd->add_option("--output", output, "output file (default stdout)");
  params(export_cmd);

  auto* traces_cmd = app.add_subcommand("traces", "list traces up to --depth");
  traces_cmd->add_option("--model", model, "preset or .json file")->required();
  params(traces_cmd);

  auto* lin_cmd = app.add_subcommand("check-lin", "linearizability of a history file");
  lin_cmd->add_option("--history", history, "history file, one `call|ret method value opId` per line")->required();
  lin_cmd->add_option("--spec", spec, "stack, queue, register or snapshot")->required();
  params(lin_cmd);

  auto* slin_cmd = app.add_subcommand("check-strong-lin", "check or search a strong-linearizability witness");
  slin_cmd->add_option("--object", object, "preset or .json file")->required();
  slin_cmd->add_option("--spec", spec, "stack, queue, register or snapshot")->required();
  slin_cmd->add_option("--witness", witness, "witness file; searched when omitted");
  params(slin_cmd);

  auto* fsim_cmd = app.add_subcommand("check-fsim", "verify a forward simulation");
  fsim_cmd->add_option("--from", from, "concrete model")->required();
  fsim_cmd->add_option("--to", to, "abstract model")->required();
  fsim_cmd->add_option("--relation", relation, "relation file, or `snapshot` for the built-in snapshot relation")
      ->required();
  params(fsim_cmd);

  auto* exists_cmd = app.add_subcommand("fsim-exists", "decide whether a forward simulation exists");
  exists_cmd->add_option("--from", from, "concrete model")->required();
  exists_cmd->add_option("--to", to, "abstract model")->required();
  exists_cmd->add_option("--output", output, "write the relation to this file");
  params(exists_cmd);

  auto* ref_cmd = app.add_subcommand("check-refinement", "bounded trace inclusion on calls and returns");
  ref_cmd->add_option("--from", from, "concrete model")->required();
  ref_cmd->add_option("--to", to, "abstract model")->required();
  params(ref_cmd);

  auto* adv_cmd = app.add_subcommand("find-adversary", "synthesize a scheduler forcing a goal");
  adv_cmd->add_option("--program", program, "program preset or .json file")->required();
  adv_cmd->add_option("--object", object, "object preset or .json file")->required();
  adv_cmd->add_option("--goal", goal, "low1=high or low2=high")->required();
  adv_cmd->add_flag("--allow-program-suppression", suppression, "let the scheduler offer a subset of program actions");
  params(adv_cmd);

  auto* hyper_cmd = app.add_subcommand("check-hyper", "hyperproperty verdict for program x object");
  hyper_cmd->add_option("--program", program, "program preset or .json file")->required();
  hyper_cmd->add_option("--object", object, "object preset or .json file")->required();
  hyper_cmd->add_option("--template", templ, "noninterference")->required();
  hyper_cmd->add_flag("--allow-program-suppression", suppression, "let the scheduler offer a subset of program actions");
  params(hyper_cmd);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInput;
  }

  const auto start = std::chrono::steady_clock::now();
  Budget budget;
  budget.max_states = max_states;
  budget.max_traces = max_traces;
  const std::size_t d = depth <= 0 ? SIZE_MAX : static_cast<std::size_t>(depth);
  Report r;
  r.command = app.get_subcommands().front()->get_name();
  for (const auto* opt : app.get_subcommands().front()->get_options())
    if (opt->count() > 0 && opt->get_name() != "--help") r.config[opt->get_name()] = opt->as<std::string>();
  r.config["--depth"] = depth;
  r.config["--max-states"] = max_states;

  try {
    if (export_cmd->parsed()) {
      const Lts a = load_model(model, p, budget);
      r.explored = a.num_states();
      const std::string text = io::lts_to_json(a).dump(2) + "\n";
      if (output.empty()) {
        out << text;
        return kHolds;
      }
      std::ofstream f(output);
      if (!f) throw InputError("cannot write `" + output + "`");
      f << text;
      r.verdict = "exported " + std::to_string(a.num_states()) + " states, " + std::to_string(a.num_transitions()) +
                  " transitions to " + output;
    } else if (traces_cmd->parsed()) {
      const Lts a = load_model(model, p, budget);
      r.explored = a.num_states();
      const auto ts = traces(a, d, budget);
      r.verdict = std::to_string(ts.size()) + " traces";
      r.artifact = io::Json::array();
      for (const auto& t : ts) {
        r.artifact.push_back(io::trace_to_json(t));
        r.text += (t.empty() ? std::string("(empty)") : to_string(t)) + "\n";
      }
    } else if (lin_cmd->parsed()) {
      const SequentialSpec s = spec_preset(spec, p);
      std::ifstream in(history);
      if (!in) throw InputError("cannot read file `" + history + "`");
      const History h = parse_history(in);
      auto w = LinChecker(s).check(h);
      r.exit = w ? kHolds : kDisproved;
      r.verdict = w ? "linearizable" : "not linearizable";
      if (w) {
        r.artifact = io::trace_to_json(w->sequential);
        r.text = "linearization:\n" + format_history(w->sequential);
      }
    } else if (slin_cmd->parsed()) {
      const Lts o = load_model(object, p, budget);
      const SequentialSpec s = spec_preset(spec, p);
      r.explored = o.num_states();
      if (!witness.empty()) {
        const auto w = io::witness_from_json(read_file(witness));
        const bool ok = check_strong_lin_witness(o, s, w, d, budget);
        r.exit = ok ? kHolds : kDisproved;
        r.verdict = ok ? "valid witness" : "invalid witness";
      } else {
        auto w = find_strong_lin_witness(o, s, d, budget);
        r.exit = w ? kHolds : kDisproved;
        r.verdict = w ? "strongly linearizable (witness found)" : "no witness";
        if (w) {
          r.artifact = io::witness_to_json(*w);
          r.text = std::to_string(w->size()) + " trace nodes assigned";
        }
      }
    } else if (fsim_cmd->parsed()) {
      SimRelation f;
      Lts a1, a2;
      if (relation == "snapshot") {
        if (from != "snapshot-impl" || to != "snapshot-spec")
          throw InputError("the built-in snapshot relation needs --from snapshot-impl --to snapshot-spec");
        const auto cfg = snapshot_config(p);
        auto impl = explore(objects::SnapshotImplModel(cfg), budget);
        auto sp = explore(objects::SnapshotSpecModel(cfg), budget);
        f = snapshot_relation_pairs(impl, sp);
        a1 = std::move(impl.lts);
        a2 = std::move(sp.lts);
      } else {
        a1 = load_model(from, p, budget);
        a2 = load_model(to, p, budget);
        f = io::relation_from_json(read_file(relation), a1, a2);
      }
      r.explored = a1.num_states() + a2.num_states();
      const auto res = check_fsim(a1, a2, f);
      r.exit = res.holds ? kHolds : kDisproved;
      r.verdict = res.holds ? "forward simulation" : "not a forward simulation";
      r.text = std::to_string(f.size()) + " pairs";
      if (!res.holds) {
        r.text += "\n" + res.reason;
        if (res.action) {
          r.text += "\nfailing step: " + a1.name(*res.s1) + " --" + res.action->to_string() + "--> " +
                    a1.name(*res.s1_next) + " (related to " + a2.name(*res.s2) + ")";
          r.artifact = io::Json{{"s1", a1.name(*res.s1)},
                                {"action", io::action_to_json(*res.action)},
                                {"s1Next", a1.name(*res.s1_next)},
                                {"s2", a2.name(*res.s2)}};
        }
      }
    } else if (exists_cmd->parsed()) {
      const Lts a1 = load_model(from, p, budget);
      const Lts a2 = load_model(to, p, budget);
      r.explored = a1.num_states() + a2.num_states();
      auto f = fsim_exists(a1, a2, Gamma::calls_returns(), budget);
      r.exit = f ? kHolds : kDisproved;
      r.verdict = f ? "forward simulation exists" : "no forward simulation";
      if (f) {
        r.artifact = io::relation_to_json(*f, a1, a2);
        r.text = std::to_string(f->size()) + " pairs";
        if (!output.empty()) {
          std::ofstream file(output);
          if (!file) throw InputError("cannot write `" + output + "`");
          file << r.artifact.dump() << "\n";
          r.text += ", written to " + output;
        } else {
          r.text += "\n" + relation_text(*f, a1, a2);
        }
      }
    } else if (ref_cmd->parsed()) {
      const Lts a1 = load_model(from, p, budget);
      const Lts a2 = load_model(to, p, budget);
      auto res = refines_bounded(a1, a2, Gamma::calls_returns(), d, budget);
      r.explored = res.explored;
      r.exit = res.holds ? kHolds : kDisproved;
      r.verdict = res.holds ? "refines" : "does not refine";
      if (!res.holds) {
        r.artifact = io::trace_to_json(res.counterexample);
        r.text = "counterexample: " + to_string(res.counterexample);
      }
    } else if (adv_cmd->parsed() || hyper_cmd->parsed()) {
      if (hyper_cmd->parsed() && templ != "noninterference")
        throw InputError("unknown template `" + templ + "` (expected noninterference)");
      const Lts prog = load_model(program, p, budget);
      const Lts obj = load_model(object, p, budget);
      const ProductLts po = product_with_components(prog, obj, ProductMode::ProgramObject, budget);
      r.explored = po.lts.num_states();
      std::optional<Strategy> strategy;
      if (adv_cmd->parsed()) {
        strategy = synthesize_adversary(po.lts, fig1_goal(po.lts, goal), suppression);
        r.exit = strategy ? kHolds : kDisproved;
        r.verdict = strategy ? "adversary found" : "no adversary";
      } else {
        Hyperproperty phi;
        phi.kind = Hyperproperty::Kind::Noninterference;
        phi.leak1 = fig1_goal(po.lts, "low1=high");
        phi.leak2 = fig1_goal(po.lts, "low2=high");
        Verdict v = check_hyperproperty(po.lts, phi, d, Semantics::Maximal, suppression, budget);
        r.exit = v.satisfied ? kHolds : kDisproved;
        r.verdict = v.satisfied ? "SATISFIED" : "VIOLATED";
        r.text = v.detail;
        strategy = std::move(v.strategy);
      }
      if (strategy) {
        r.artifact = io::strategy_to_json(*strategy, po.lts);
        r.text += (r.text.empty() ? "" : "\n") + narrate(po.lts, *strategy, budget);
        if (!json) r.text += "strategy:\n" + r.artifact.dump(1) + "\n";
      }
    }
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const ContractViolation& e) {
    err << "input error: " << e.what() << "\n";
    return kInput;
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  emit(r, ms, json, out);
  return r.exit;
}

}  // namespace conch::cli
