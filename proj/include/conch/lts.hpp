#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <deque>
#include <functional>
#include <iterator>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "conch/action.hpp"
#include "conch/error.hpp"

namespace conch {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

/// Resource caps for explicit exploration.
struct Budget {
  std::size_t max_states = 5'000'000;
  std::size_t max_traces = 2'000'000;
};

struct VectorHash {
  template <class T>
  std::size_t operator()(const std::vector<T>& v) const noexcept {
    std::size_t h = v.size();
    for (const auto& x : v) h ^= std::hash<T>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

/// Finite labeled transition system. States carry canonical names; actions
/// are interned into a per-LTS alphabet table and edges refer to them by id.
class Lts {
 public:
  struct Edge {
    ActionId action;
    StateId target;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
  };

  std::size_t num_states() const { return names_.size(); }
  std::size_t num_actions() const { return actions_.size(); }
  std::size_t num_transitions() const {
    std::size_t n = 0;
    for (const auto& v : out_) n += v.size();
    return n;
  }
  StateId initial() const { return initial_; }
  const std::string& name(StateId s) const { return names_[s]; }
  std::optional<StateId> find_state(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const Edge> out(StateId s) const { return out_[s]; }
  const Action& action(ActionId a) const { return actions_[a]; }
  std::optional<ActionId> find_action(const Action& a) const {
    auto it = action_index_.find(a);
    if (it == action_index_.end()) return std::nullopt;
    return it->second;
  }

  /// Actions labelling at least one transition, canonically sorted.
  std::vector<Action> alphabet() const {
    std::vector<bool> used(actions_.size(), false);
    for (const auto& v : out_)
      for (const auto& e : v) used[e.action] = true;
    std::vector<Action> out;
    for (ActionId a = 0; a < actions_.size(); ++a)
      if (used[a]) out.push_back(actions_[a]);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// No two transitions share (source, action) with distinct targets.
  bool is_deterministic() const {
    for (const auto& v : out_)
      for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i].action == v[i - 1].action && v[i].target != v[i - 1].target) return false;
    return true;
  }

  /// Successor of `s` under `a`, if any (first one for nondeterministic LTSs).
  std::optional<StateId> step(StateId s, const Action& a) const {
    auto id = find_action(a);
    if (!id) return std::nullopt;
    for (const auto& e : out_[s])
      if (e.action == *id) return e.target;
    return std::nullopt;
  }

  std::vector<Action> enabled(StateId s) const {
    std::vector<Action> out;
    for (const auto& e : out_[s]) out.push_back(actions_[e.action]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  friend class LtsBuilder;
  std::vector<std::string> names_;
  std::unordered_map<std::string, StateId> index_;
  StateId initial_ = 0;
  std::vector<Action> actions_;
  std::unordered_map<Action, ActionId, ActionHash> action_index_;
  std::vector<std::vector<Edge>> out_;
};

class LtsBuilder {
 public:
  StateId add_state(const std::string& name) {
    auto [it, inserted] = lts_.index_.try_emplace(name, static_cast<StateId>(lts_.names_.size()));
    if (inserted) {
      lts_.names_.push_back(name);
      lts_.out_.emplace_back();
    }
    return it->second;
  }

  bool has_state(const std::string& name) const { return lts_.index_.count(name) != 0; }
  std::size_t num_states() const { return lts_.names_.size(); }

  ActionId intern(const Action& a) {
    auto [it, inserted] = lts_.action_index_.try_emplace(a, static_cast<ActionId>(lts_.actions_.size()));
    if (inserted) lts_.actions_.push_back(a);
    return it->second;
  }

  void add_transition(StateId from, const Action& a, StateId to) {
    if (from >= lts_.names_.size() || to >= lts_.names_.size())
      throw ContractViolation("transition endpoint is not a state");
    lts_.out_[from].push_back({intern(a), to});
  }

  void set_initial(StateId s) { lts_.initial_ = s; }

  Lts build() && {
    if (lts_.names_.empty()) throw ContractViolation("an LTS needs at least one state");
    if (lts_.initial_ >= lts_.names_.size()) throw ContractViolation("initial state is not a state");
    for (auto& v : lts_.out_) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return std::move(lts_);
  }

 private:
  Lts lts_;
};

/// An implicitly described transition system that can be explored on demand.
template <class M>
concept TransitionModel = requires(const M& m, const typename M::State& s) {
  { m.initial() } -> std::convertible_to<typename M::State>;
  { m.successors(s) } -> std::same_as<std::vector<std::pair<Action, typename M::State>>>;
  { m.key(s) } -> std::convertible_to<std::string>;
};

template <TransitionModel M>
struct Explored {
  Lts lts;
  std::vector<typename M::State> states;  // indexed by StateId
};

/// Breadth-first materialization of the reachable part of a model.
template <TransitionModel M>
Explored<M> explore(const M& model, const Budget& budget = {}) {
  LtsBuilder builder;
  std::vector<typename M::State> states;
  auto init = model.initial();
  builder.set_initial(builder.add_state(model.key(init)));
  states.push_back(std::move(init));
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto succ = model.successors(states[i]);
    for (auto& [a, next] : succ) {
      auto key = model.key(next);
      const bool fresh = !builder.has_state(key);
      const StateId t = builder.add_state(key);
      if (fresh) {
        if (states.size() >= budget.max_states)
          throw BudgetExceeded("state budget of " + std::to_string(budget.max_states) + " exceeded");
        states.push_back(std::move(next));
      }
      builder.add_transition(static_cast<StateId>(i), a, t);
    }
  }
  return {std::move(builder).build(), std::move(states)};
}

template <TransitionModel M>
Lts materialize(const M& model, const Budget& budget = {}) {
  return explore(model, budget).lts;
}

/// Adapts an explicit LTS to the model interface.
class LtsModel {
 public:
  using State = StateId;
  explicit LtsModel(const Lts& lts) : lts_(&lts) {}
  State initial() const { return lts_->initial(); }
  std::vector<std::pair<Action, State>> successors(State s) const {
    std::vector<std::pair<Action, State>> out;
    for (const auto& e : lts_->out(s)) out.emplace_back(lts_->action(e.action), e.target);
    return out;
  }
  std::string key(State s) const { return lts_->name(s); }
  const Lts& lts() const { return *lts_; }

 private:
  const Lts* lts_;
};

/// Synchronous product on actions selected by `sync`, interleaving elsewhere.
template <TransitionModel M1, TransitionModel M2>
class ProductModel {
 public:
  using State = std::pair<typename M1::State, typename M2::State>;
  using SyncPredicate = std::function<bool(const Action&)>;

  ProductModel(M1 left, M2 right, SyncPredicate sync)
      : left_(std::move(left)), right_(std::move(right)), sync_(std::move(sync)) {}

  State initial() const { return {left_.initial(), right_.initial()}; }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    std::vector<std::pair<Action, State>> out;
    auto ls = left_.successors(s.first);
    auto rs = right_.successors(s.second);
    for (auto& [a, l2] : ls) {
      if (sync_(a)) {
        for (auto& [b, r2] : rs)
          if (a == b) out.emplace_back(a, State{l2, r2});
      } else {
        out.emplace_back(a, State{l2, s.second});
      }
    }
    for (auto& [b, r2] : rs)
      if (!sync_(b)) out.emplace_back(b, State{s.first, r2});
    return out;
  }

  std::string key(const State& s) const { return left_.key(s.first) + "||" + right_.key(s.second); }

  const M1& left() const { return left_; }
  const M2& right() const { return right_; }

 private:
  M1 left_;
  M2 right_;
  SyncPredicate sync_;
};

/// How a product chooses the synchronized actions.
enum class ProductMode {
  ProgramObject,  // synchronize on every call/return action
  SharedLabels,   // synchronize on the intersection of the two alphabets
  Interleave,     // disjoint alphabets; no synchronization
};

/// Splits a product state name "left||right" at the first separator.
inline std::pair<std::string, std::string> split_product_name(const std::string& name) {
  auto pos = name.find("||");
  if (pos == std::string::npos) return {name, {}};
  return {name.substr(0, pos), name.substr(pos + 2)};
}

namespace detail {
inline void check_private_labels(const Lts& a1, const Lts& a2, const std::function<bool(const Action&)>& sync) {
  std::set<Action> left;
  for (const auto& a : a1.alphabet())
    if (!sync(a)) left.insert(a);
  for (const auto& a : a2.alphabet())
    if (!sync(a) && left.count(a))
      throw ContractViolation("private action " + a.to_string() + " occurs in both product components");
}
}  // namespace detail

struct ProductLts {
  Lts lts;
  std::vector<std::pair<StateId, StateId>> components;  // (left, right) per product state
};

inline ProductLts product_with_components(const Lts& a1, const Lts& a2, ProductMode mode = ProductMode::SharedLabels,
                                          const Budget& budget = {}) {
  std::function<bool(const Action&)> sync;
  switch (mode) {
    case ProductMode::ProgramObject:
      sync = [](const Action& a) { return a.is_call_or_return(); };
      break;
    case ProductMode::SharedLabels: {
      auto both = std::make_shared<std::set<Action>>();
      auto l = a1.alphabet();
      auto r = a2.alphabet();
      std::set_intersection(l.begin(), l.end(), r.begin(), r.end(), std::inserter(*both, both->end()));
      sync = [both](const Action& a) { return both->count(a) != 0; };
      break;
    }
    case ProductMode::Interleave:
      sync = [](const Action&) { return false; };
      break;
  }
  detail::check_private_labels(a1, a2, sync);
  auto ex = explore(ProductModel<LtsModel, LtsModel>(LtsModel(a1), LtsModel(a2), sync), budget);
  return {std::move(ex.lts), std::move(ex.states)};
}

inline Lts product(const Lts& a1, const Lts& a2, ProductMode mode = ProductMode::SharedLabels,
                   const Budget& budget = {}) {
  return product_with_components(a1, a2, mode, budget).lts;
}

/// Renames actions; used to hide a base object's calls/returns inside a
/// parametrized object.
inline Lts relabel(const Lts& a, const std::function<Action(const Action&)>& f) {
  LtsBuilder b;
  for (StateId s = 0; s < a.num_states(); ++s) b.add_state(a.name(s));
  b.set_initial(a.initial());
  for (StateId s = 0; s < a.num_states(); ++s)
    for (const auto& e : a.out(s)) b.add_transition(s, f(a.action(e.action)), e.target);
  return std::move(b).build();
}

/// All traces of length <= depth, exactly.
inline std::set<Trace> traces(const Lts& a, std::size_t depth, const Budget& budget = {}) {
  std::set<Trace> out;
  Trace prefix;
  std::function<void(StateId)> dfs = [&](StateId s) {
    if (out.insert(prefix).second && out.size() > budget.max_traces)
      throw BudgetExceeded("trace budget of " + std::to_string(budget.max_traces) + " exceeded");
    if (prefix.size() == depth) return;
    for (const auto& e : a.out(s)) {
      prefix.push_back(a.action(e.action));
      dfs(e.target);
      prefix.pop_back();
    }
  };
  dfs(a.initial());
  return out;
}

/// Reflexive-transitive closure over transitions whose label is outside gamma,
/// memoized per state.
class SilentClosure {
 public:
  SilentClosure(const Lts& a, Gamma gamma) : lts_(&a), gamma_(gamma), cache_(a.num_states()), done_(a.num_states()) {
    silent_.resize(a.num_actions());
    for (ActionId i = 0; i < a.num_actions(); ++i) silent_[i] = !gamma.contains(a.action(i));
  }

  const std::vector<StateId>& of(StateId s) {
    if (done_[s]) return cache_[s];
    std::vector<StateId> seen{s};
    std::vector<bool> mark(lts_->num_states(), false);
    mark[s] = true;
    for (std::size_t i = 0; i < seen.size(); ++i)
      for (const auto& e : lts_->out(seen[i]))
        if (silent_[e.action] && !mark[e.target]) {
          mark[e.target] = true;
          seen.push_back(e.target);
        }
    std::sort(seen.begin(), seen.end());
    cache_[s] = std::move(seen);
    done_[s] = true;
    return cache_[s];
  }

  std::vector<StateId> of(const std::vector<StateId>& set) {
    std::vector<StateId> out;
    for (auto s : set) {
      const auto& c = of(s);
      out.insert(out.end(), c.begin(), c.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool is_silent(ActionId a) const { return silent_[a]; }
  const Lts& lts() const { return *lts_; }
  Gamma gamma() const { return gamma_; }

 private:
  const Lts* lts_;
  Gamma gamma_;
  std::vector<bool> silent_;
  std::vector<std::vector<StateId>> cache_;
  std::vector<bool> done_;
};

/// Closure of the a-successors of a (closed) macro state.
inline std::vector<StateId> macro_post(SilentClosure& closure, const std::vector<StateId>& macro, const Action& a) {
  const Lts& lts = closure.lts();
  auto id = lts.find_action(a);
  if (!id) return {};
  std::vector<StateId> next;
  for (auto s : macro)
    for (const auto& e : lts.out(s))
      if (e.action == *id) next.push_back(e.target);
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  return closure.of(next);
}

/// True iff every macro state reachable in the determinization of the
/// gamma-projection is a singleton (reading: tau'|gamma = tau).
inline bool is_gamma_deterministic(const Lts& a, Gamma gamma, const Budget& budget = {}) {
  SilentClosure closure(a, gamma);
  std::unordered_map<std::vector<StateId>, std::size_t, VectorHash> seen;
  std::deque<std::vector<StateId>> queue;
  auto start = closure.of(a.initial());
  seen.emplace(start, 0);
  queue.push_back(start);
  while (!queue.empty()) {
    auto macro = std::move(queue.front());
    queue.pop_front();
    if (macro.size() != 1) return false;
    for (const auto& e : a.out(macro.front())) {
      if (closure.is_silent(e.action)) continue;
      auto next = macro_post(closure, macro, a.action(e.action));
      if (seen.emplace(next, seen.size()).second) {
        if (seen.size() > budget.max_states) throw BudgetExceeded("macro-state budget exceeded");
        queue.push_back(std::move(next));
      }
    }
  }
  return true;
}

struct RefinementResult {
  bool holds = true;
  Trace counterexample;  // a trace of the concrete LTS whose projection the abstract one lacks
  std::size_t explored = 0;
};

/// Decides traces(a1, depth)|gamma is included in T(a2)|gamma by running each
/// concrete trace against the silent-closed determinization of a2.
inline RefinementResult refines_bounded(const Lts& a1, const Lts& a2, Gamma gamma, std::size_t depth,
                                        const Budget& budget = {}) {
  SilentClosure closure(a2, gamma);
  std::unordered_map<std::vector<StateId>, std::uint32_t, VectorHash> macro_ids;
  std::vector<std::vector<StateId>> macros;
  auto intern = [&](std::vector<StateId> m) {
    auto [it, inserted] = macro_ids.try_emplace(m, static_cast<std::uint32_t>(macros.size()));
    if (inserted) macros.push_back(std::move(m));
    return it->second;
  };

  struct Node {
    StateId s1;
    std::uint32_t macro;
    std::size_t depth;
    std::size_t parent;
    Action via;
  };
  std::vector<Node> nodes;
  std::unordered_map<std::uint64_t, std::size_t> visited;
  auto key = [](StateId s, std::uint32_t m) { return (std::uint64_t{s} << 32) | m; };

  nodes.push_back({a1.initial(), intern(closure.of(a2.initial())), 0, 0, {}});
  visited.emplace(key(nodes[0].s1, nodes[0].macro), 0);

  auto trace_to = [&](std::size_t i) {
    Trace t;
    while (i != 0) {
      t.push_back(nodes[i].via);
      i = nodes[i].parent;
    }
    std::reverse(t.begin(), t.end());
    return t;
  };

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].depth == depth) continue;
    const Node cur = nodes[i];
    for (const auto& e : a1.out(cur.s1)) {
      const Action& a = a1.action(e.action);
      std::uint32_t next_macro = cur.macro;
      if (gamma.contains(a)) {
        auto post = macro_post(closure, macros[cur.macro], a);
        if (post.empty()) {
          Trace t = trace_to(i);
          t.push_back(a);
          return {false, std::move(t), nodes.size()};
        }
        next_macro = intern(std::move(post));
      }
      if (visited.try_emplace(key(e.target, next_macro), nodes.size()).second) {
        if (nodes.size() >= budget.max_states) throw BudgetExceeded("refinement state budget exceeded");
        nodes.push_back({e.target, next_macro, cur.depth + 1, i, a});
      }
    }
  }
  return {true, {}, nodes.size()};
}

}  // namespace conch
