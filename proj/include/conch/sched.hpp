#pragma once

#include <algorithm>
#include <climits>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "conch/fsim.hpp"
#include "conch/lts.hpp"

namespace conch {

/// One scheduler step: offer program actions, fix one object action, or halt.
struct Decision {
  enum class Kind { Yield, Pick, Stop };
  Kind kind = Kind::Stop;
  Action action;                // Pick
  std::vector<Action> offered;  // Yield: explicit subset; empty offers every enabled program action

  static Decision yield(std::vector<Action> subset = {}) { return {Kind::Yield, {}, std::move(subset)}; }
  static Decision pick(Action a) { return {Kind::Pick, std::move(a), {}}; }
  static Decision stop() { return {}; }

  friend bool operator==(const Decision&, const Decision&) = default;

  std::string to_string() const {
    switch (kind) {
      case Kind::Yield: {
        if (offered.empty()) return "yield";
        std::string out = "yield{";
        for (std::size_t i = 0; i < offered.size(); ++i) out += (i ? "," : "") + offered[i].to_string();
        return out + "}";
      }
      case Kind::Pick: return "pick " + action.to_string();
      case Kind::Stop: return "stop";
    }
    return {};
  }
};

/// Deterministic scheduler keyed by product state.
using Strategy = std::map<StateId, Decision>;
/// Deterministic scheduler keyed by the trace so far.
using TraceStrategy = std::map<Trace, Decision>;
/// Either form, as a function of (trace, state). nullopt means undefined.
using Policy = std::function<std::optional<Decision>(const Trace&, StateId)>;

inline Policy policy_of(const Strategy& s) {
  return [&s](const Trace&, StateId q) -> std::optional<Decision> {
    auto it = s.find(q);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
}

inline Policy policy_of(const TraceStrategy& s) {
  return [&s](const Trace& t, StateId) -> std::optional<Decision> {
    auto it = s.find(t);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
}

/// Edges of `state` allowed by `d`. Throws when `d` offers a disabled action.
inline std::vector<Lts::Edge> prescribed(const Lts& a, StateId state, const Decision& d) {
  std::vector<Lts::Edge> out;
  switch (d.kind) {
    case Decision::Kind::Stop: break;
    case Decision::Kind::Pick: {
      for (const auto& e : a.out(state))
        if (a.action(e.action) == d.action) out.push_back(e);
      if (out.empty()) throw ContractViolation("scheduler picks disabled action " + d.action.to_string());
      break;
    }
    case Decision::Kind::Yield: {
      for (const auto& e : a.out(state)) {
        const Action& b = a.action(e.action);
        if (!b.is_program()) continue;
        if (d.offered.empty() || std::find(d.offered.begin(), d.offered.end(), b) != d.offered.end()) out.push_back(e);
      }
      for (const auto& b : d.offered)
        if (!b.is_program() || !a.step(state, b))
          throw ContractViolation("scheduler offers non-program or disabled action " + b.to_string());
      if (out.empty()) throw ContractViolation("scheduler yields where no program action is enabled");
      break;
    }
  }
  return out;
}

namespace detail {

/// Walks consistent traces; `leaf` is called on traces whose prescribed set
/// is empty (maximal), `node` on every consistent trace.
inline void walk_consistent(const Lts& a, const Policy& policy, std::size_t depth, const Budget& budget,
                            const std::function<void(const Trace&, StateId)>& node,
                            const std::function<void(const Trace&, StateId)>& leaf) {
  Trace t;
  std::size_t count = 0;
  std::function<void(StateId)> dfs = [&](StateId s) {
    if (++count > budget.max_traces) throw BudgetExceeded("consistent trace budget exceeded");
    node(t, s);
    auto d = policy(t, s);
    if (!d) {
      if (!a.out(s).empty()) throw ContractViolation("scheduler undefined at reached state " + a.name(s));
      d = Decision::stop();
    }
    auto edges = prescribed(a, s, *d);
    if (edges.empty()) {
      leaf(t, s);
      return;
    }
    if (t.size() == depth) return;
    for (const auto& e : edges) {
      t.push_back(a.action(e.action));
      dfs(e.target);
      t.pop_back();
    }
  };
  dfs(a.initial());
}

}  // namespace detail

/// Traces of length <= depth consistent with the policy.
inline std::set<Trace> consistent_traces(const Lts& a, const Policy& policy, std::size_t depth = SIZE_MAX,
                                         const Budget& budget = {}) {
  std::set<Trace> out;
  detail::walk_consistent(
      a, policy, depth, budget, [&](const Trace& t, StateId) { out.insert(t); }, [](const Trace&, StateId) {});
  return out;
}

inline std::set<Trace> consistent_traces(const Lts& a, const Strategy& s, std::size_t depth = SIZE_MAX,
                                         const Budget& budget = {}) {
  return consistent_traces(a, policy_of(s), depth, budget);
}

inline std::set<Trace> consistent_traces(const Lts& a, const TraceStrategy& s, std::size_t depth = SIZE_MAX,
                                         const Budget& budget = {}) {
  return consistent_traces(a, policy_of(s), depth, budget);
}

/// Maximal consistent traces with the state each one ends in.
inline std::vector<std::pair<Trace, StateId>> maximal_traces(const Lts& a, const Policy& policy,
                                                             std::size_t depth = SIZE_MAX, const Budget& budget = {}) {
  std::vector<std::pair<Trace, StateId>> out;
  detail::walk_consistent(
      a, policy, depth, budget, [](const Trace&, StateId) {}, [&](const Trace& t, StateId s) { out.emplace_back(t, s); });
  return out;
}

inline std::set<Trace> project_all(const std::set<Trace>& ts, Gamma gamma = Gamma::program()) {
  std::set<Trace> out;
  for (const auto& t : ts) out.insert(project(t, gamma));
  return out;
}

/// Admission at every reachable node: the decision is defined, non-empty
/// where anything is enabled, and only offers enabled actions. Stop is
/// accepted only at states without enabled actions.
inline bool is_admitted(const Lts& a, const Strategy& s, const Budget& budget = {}) {
  std::vector<bool> seen(a.num_states(), false);
  std::vector<StateId> stack{a.initial()};
  seen[a.initial()] = true;
  std::size_t visited = 0;
  while (!stack.empty()) {
    const StateId q = stack.back();
    stack.pop_back();
    if (++visited > budget.max_states) throw BudgetExceeded("admission check budget exceeded");
    if (a.out(q).empty()) continue;
    auto it = s.find(q);
    if (it == s.end() || it->second.kind == Decision::Kind::Stop) return false;
    std::vector<Lts::Edge> edges;
    try {
      edges = prescribed(a, q, it->second);
    } catch (const ContractViolation&) {
      return false;
    }
    for (const auto& e : edges)
      if (!seen[e.target]) {
        seen[e.target] = true;
        stack.push_back(e.target);
      }
  }
  return true;
}

/// Solves the scheduler game on an explicit product: at each state the
/// adversary either yields (every enabled program action must lead to a win)
/// or picks one non-program action. Wins are terminal states satisfying
/// `goal`. Returns a strategy on the states it reaches, or nullopt. With
/// `allow_suppression` the adversary may also offer a single program action.
inline std::optional<Strategy> synthesize_adversary(const Lts& a, const std::function<bool(StateId)>& goal,
                                                    bool allow_suppression = false) {
  const std::size_t n = a.num_states();
  std::vector<std::vector<std::pair<StateId, ActionId>>> preds(n);
  std::vector<std::uint32_t> program_out(n, 0);
  for (StateId s = 0; s < n; ++s)
    for (const auto& e : a.out(s)) {
      preds[e.target].emplace_back(s, e.action);
      if (a.action(e.action).is_program()) ++program_out[s];
    }

  constexpr std::uint32_t kLosing = UINT32_MAX;
  std::vector<std::uint32_t> rank(n, kLosing);
  std::vector<std::uint32_t> pending = program_out;
  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s)
    if (a.out(s).empty() && goal(s)) {
      rank[s] = 0;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    const StateId t = queue.front();
    queue.pop_front();
    for (const auto& [s, act] : preds[t]) {
      if (rank[s] != kLosing) continue;
      bool wins = false;
      if (a.action(act).is_program() && !allow_suppression) {
        wins = --pending[s] == 0;
      } else {
        wins = true;
      }
      if (wins) {
        rank[s] = rank[t] + 1;
        queue.push_back(s);
      }
    }
  }
  if (rank[a.initial()] == kLosing) return std::nullopt;

  // choose, per winning state, the option with the lowest successor rank;
  // ties go to yielding, then to the smallest action
  auto choose = [&](StateId s) {
    std::optional<Decision> best;
    std::uint32_t best_rank = kLosing;
    if (program_out[s]) {
      std::uint32_t worst = 0;
      for (const auto& e : a.out(s))
        if (a.action(e.action).is_program()) worst = std::max(worst, rank[e.target]);
      if (worst != kLosing) {
        best = Decision::yield();
        best_rank = worst;
      }
    }
    auto single = [](const Decision& d) -> const Action* {
      if (d.kind == Decision::Kind::Pick) return &d.action;
      return d.offered.size() == 1 ? &d.offered.front() : nullptr;
    };
    for (const auto& e : a.out(s)) {
      const Action& b = a.action(e.action);
      if ((b.is_program() && !allow_suppression) || rank[e.target] == kLosing) continue;
      const Action* current = best ? single(*best) : nullptr;
      if (rank[e.target] < best_rank || (rank[e.target] == best_rank && current && b < *current)) {
        best = b.is_program() ? Decision::yield({b}) : Decision::pick(b);
        best_rank = rank[e.target];
      }
    }
    return *best;
  };

  Strategy strategy;
  std::vector<StateId> stack{a.initial()};
  while (!stack.empty()) {
    const StateId s = stack.back();
    stack.pop_back();
    if (strategy.count(s) || a.out(s).empty()) continue;
    auto d = choose(s);
    for (const auto& e : prescribed(a, s, d)) stack.push_back(e.target);
    strategy.emplace(s, std::move(d));
  }
  return strategy;
}

/// Outcome of a hyperproperty check.
struct Verdict {
  bool satisfied = true;
  std::optional<Strategy> strategy;     // violating scheduler, when one is synthesized
  std::optional<Trace> counterexample;  // violating trace, for trace-predicate templates
  std::set<Trace> trace_set;            // Σp-projected traces under the witness
  std::string detail;
};

/// How a scheduler may end an execution.
enum class Semantics {
  Maximal,  // halt only where nothing is enabled
  Halting,  // halt anywhere
};

struct Hyperproperty {
  enum class Kind { AllSets, Noninterference, AllTraces, TraceSetIn };
  Kind kind = Kind::AllSets;
  // Noninterference: goals on terminal states; a scheduler forcing either one everywhere violates
  std::function<bool(StateId)> leak1, leak2;
  // AllTraces: predicate on Σp-projected traces
  std::function<bool(const Trace&)> predicate;
  // TraceSetIn: the admitted family of Σp-projected trace sets
  std::set<std::set<Trace>> family;
};

/// Every Σp-projected trace set some scheduler can produce within `depth`.
/// Memoized on (state, remaining depth).
inline std::set<std::set<Trace>> achievable_trace_sets(const Lts& a, std::size_t depth, Semantics sem,
                                                       bool allow_suppression = false, const Budget& budget = {}) {
  using Family = std::set<std::set<Trace>>;
  std::map<std::pair<StateId, std::size_t>, Family> memo;
  std::size_t work = 0;
  std::function<const Family&(StateId, std::size_t)> ach = [&](StateId s, std::size_t d) -> const Family& {
    if (auto it = memo.find({s, d}); it != memo.end()) return it->second;
    Family out;
    const bool any = !a.out(s).empty();
    if (!any || d == 0 || sem == Semantics::Halting) out.insert(std::set<Trace>{Trace{}});
    if (any && d > 0) {
      std::vector<Lts::Edge> program;
      for (const auto& e : a.out(s)) {
        if (a.action(e.action).is_program()) {
          program.push_back(e);
        } else {
          const auto& sub = ach(e.target, d - 1);
          out.insert(sub.begin(), sub.end());
        }
      }
      // yield: combine one achievable set per offered program edge
      std::vector<std::vector<Lts::Edge>> offers;
      if (allow_suppression) {
        for (std::uint32_t m = 1; m < (1u << program.size()); ++m) {
          std::vector<Lts::Edge> sub;
          for (std::size_t i = 0; i < program.size(); ++i)
            if (m & (1u << i)) sub.push_back(program[i]);
          offers.push_back(std::move(sub));
        }
      } else if (!program.empty()) {
        offers.push_back(program);
      }
      for (const auto& offer : offers) {
        std::vector<const Family*> parts;
        for (const auto& e : offer) parts.push_back(&ach(e.target, d - 1));
        std::function<void(std::size_t, std::set<Trace>)> combine = [&](std::size_t i, std::set<Trace> acc) {
          if (++work > budget.max_traces) throw BudgetExceeded("scheduler enumeration budget exceeded");
          if (i == offer.size()) {
            out.insert(std::move(acc));
            return;
          }
          const Action& b = a.action(offer[i].action);
          for (const auto& x : *parts[i]) {
            auto next = acc;
            for (const auto& t : x) {
              Trace u{b};
              u.insert(u.end(), t.begin(), t.end());
              next.insert(std::move(u));
            }
            combine(i + 1, std::move(next));
          }
        };
        combine(0, std::set<Trace>{Trace{}});
      }
    }
    return memo.emplace(std::pair{s, d}, std::move(out)).first->second;
  };
  return ach(a.initial(), depth);
}

/// P×O ⊨ φ for the supported templates, within `depth` where it applies.
inline Verdict check_hyperproperty(const Lts& po, const Hyperproperty& phi, std::size_t depth,
                                   Semantics sem = Semantics::Maximal, bool allow_suppression = false,
                                   const Budget& budget = {}) {
  Verdict v;
  switch (phi.kind) {
    case Hyperproperty::Kind::AllSets: return v;
    case Hyperproperty::Kind::Noninterference: {
      int which = 1;
      for (const auto* goal : {&phi.leak1, &phi.leak2}) {
        if (auto s = synthesize_adversary(po, *goal, allow_suppression)) {
          v.satisfied = false;
          v.trace_set = project_all(consistent_traces(po, *s, SIZE_MAX, budget));
          v.strategy = std::move(s);
          v.detail = "a scheduler forces leak " + std::to_string(which) + " on every maximal trace";
          return v;
        }
        ++which;
      }
      v.detail = "no scheduler forces either leak";
      return v;
    }
    case Hyperproperty::Kind::AllTraces: {
      for (const auto& t : traces(po, depth, budget)) {
        if (!phi.predicate(project(t, Gamma::program()))) {
          v.satisfied = false;
          v.counterexample = t;
          v.detail = "a consistent trace violates the predicate";
          return v;
        }
      }
      return v;
    }
    case Hyperproperty::Kind::TraceSetIn: {
      for (const auto& x : achievable_trace_sets(po, depth, sem, allow_suppression, budget)) {
        if (!phi.family.count(x)) {
          v.satisfied = false;
          v.trace_set = x;
          v.detail = "some scheduler produces a trace set outside the property";
          return v;
        }
      }
      return v;
    }
  }
  return v;
}

/// Builds S2 for P×O2 from S1 for P×O1 and a simulation F from O1 to O2:
/// program decisions are copied and every object step of O1 is replaced by
/// its F-simulating sequence in O2, issued one action at a time.
inline TraceStrategy scheduler_from_fsim(const ProductLts& po1, const ProductLts& po2, const Lts& o1, const Lts& o2,
                                         const SimRelation& f, const TraceStrategy& s1, std::size_t depth) {
  if (!check_fsim(o1, o2, f).holds) throw ContractViolation("scheduler_from_fsim: relation is not a forward simulation");
  const Lts& p1 = po1.lts;
  const Lts& p2 = po2.lts;
  WeakSteps weak(o2, f.gamma);
  TraceStrategy s2;

  auto assign = [&](const Trace& t2, const Decision& d) {
    auto [it, inserted] = s2.emplace(t2, d);
    if (!inserted && !(it->second == d)) throw ContractViolation("scheduler_from_fsim: conflicting decisions");
  };
  auto step2 = [&](StateId x2, const Action& b) {
    auto next = p2.step(x2, b);
    if (!next) throw ContractViolation("scheduler_from_fsim: simulating action " + b.to_string() + " is disabled in P×O2");
    return *next;
  };

  Trace t1, t2;
  std::function<void(StateId, StateId)> rec = [&](StateId x1, StateId x2) {
    auto it = s1.find(t1);
    Decision d = it == s1.end() ? Decision::stop() : it->second;
    if (it == s1.end() && !p1.out(x1).empty()) throw ContractViolation("S1 undefined at a consistent trace");
    if (t1.size() == depth) d = Decision::stop();
    const bool object_pick = d.kind == Decision::Kind::Pick && !d.action.is_program();
    if (!object_pick) {
      assign(t2, d);
      for (const auto& e : prescribed(p1, x1, d)) {
        const Action& a = p1.action(e.action);
        const StateId y2 = step2(x2, a);
        t1.push_back(a);
        t2.push_back(a);
        rec(e.target, y2);
        t1.pop_back();
        t2.pop_back();
      }
      return;
    }
    const auto edges = prescribed(p1, x1, d);
    const StateId y1 = edges.front().target;
    const StateId o1_next = po1.components[y1].second;
    const StateId o2_now = po2.components[x2].second;
    std::optional<StateId> target;
    for (auto c : weak.of(o2_now, d.action))
      if (f.contains(o1_next, c)) {
        target = c;
        break;
      }
    if (!target) throw ContractViolation("scheduler_from_fsim: no simulating step");
    const Trace sigma = *weak.path(o2_now, d.action, *target);
    const std::size_t mark = t2.size();
    StateId y2 = x2;
    for (const auto& b : sigma) {
      assign(t2, Decision::pick(b));
      y2 = step2(y2, b);
      t2.push_back(b);
    }
    t1.push_back(d.action);
    rec(y1, y2);
    t1.pop_back();
    t2.resize(mark);
  };
  const auto root1 = po1.components[p1.initial()];
  const auto root2 = po2.components[p2.initial()];
  if (root1.first != root2.first || !f.contains(root1.second, root2.second))
    throw ContractViolation("scheduler_from_fsim: products do not start from related states");
  rec(p1.initial(), p2.initial());
  return s2;
}

/// Human-readable schedule: every maximal trace under the strategy, one
/// numbered step per line.
inline std::string narrate(const Lts& a, const Strategy& s, const Budget& budget = {}) {
  std::string out;
  auto leaves = maximal_traces(a, policy_of(s), SIZE_MAX, budget);
  std::size_t run = 0;
  for (const auto& [t, end] : leaves) {
    std::string inputs;
    for (const auto& x : t)
      if (x.is_program()) inputs += (inputs.empty() ? "" : " ") + std::string(x.label.str());
    out += "schedule " + std::to_string(++run) + " [" + inputs + "]\n";
    for (std::size_t i = 0; i < t.size(); ++i) out += "  " + std::to_string(i + 1) + ". " + t[i].to_string() + "\n";
    out += "  end: " + a.name(end) + "\n";
  }
  return out;
}

}  // namespace conch
