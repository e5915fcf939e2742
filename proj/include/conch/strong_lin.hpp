#pragma once

#include <climits>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "conch/fsim.hpp"
#include "conch/history.hpp"
#include "conch/lincheck.hpp"
#include "conch/objects/atomic.hpp"

namespace conch {

/// Assignment of a sequential history to every node of a bounded trace tree.
using StrongLinWitness = std::map<Trace, History>;

constexpr std::size_t kUnbounded = SIZE_MAX;

namespace detail {

inline bool is_prefix(const History& a, const History& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

/// Visits the trace tree of `a` depth-first, parents before children.
inline void walk_traces(const Lts& a, std::size_t depth, const Budget& budget,
                        const std::function<void(const Trace&, StateId)>& visit) {
  Trace t;
  std::size_t nodes = 0;
  std::function<void(StateId)> dfs = [&](StateId s) {
    if (++nodes > budget.max_traces) throw BudgetExceeded("trace tree budget exceeded");
    visit(t, s);
    if (t.size() == depth) return;
    for (const auto& e : a.out(s)) {
      t.push_back(a.action(e.action));
      dfs(e.target);
      t.pop_back();
    }
  };
  dfs(a.initial());
}

}  // namespace detail

/// Checks both clauses at every node of the trace tree up to `depth`:
/// hist(τ) ⊑ w(τ) with w(τ) in Seq, and w is prefix-preserving.
inline bool check_strong_lin_witness(const Lts& o1, const SequentialSpec& spec, const StrongLinWitness& w,
                                     std::size_t depth, const Budget& budget = {}) {
  bool ok = true;
  detail::walk_traces(o1, depth, budget, [&](const Trace& t, StateId) {
    if (!ok) return;
    auto it = w.find(t);
    if (it == w.end()) throw ContractViolation("witness does not cover trace " + to_string(t));
    const History& f = it->second;
    if (!is_legal_sequential(spec, f) || !linearizes(hist(t), f)) {
      ok = false;
      return;
    }
    if (!t.empty()) {
      const Trace parent(t.begin(), t.end() - 1);
      if (!detail::is_prefix(w.at(parent), f)) ok = false;
    }
  });
  return ok;
}

/// Exhaustive search for a strong-linearizability witness. At each node the
/// parent's linearization is extended by some legal ordering of invoked but
/// not yet linearized operations.
class StrongLinSearch {
 public:
  StrongLinSearch(const Lts& o1, SequentialSpec spec, std::size_t depth = kUnbounded, Budget budget = {})
      : o1_(&o1), spec_(std::move(spec)), depth_(depth), budget_(budget) {}

  std::optional<StrongLinWitness> run() {
    if (!good(o1_->initial(), {}, {}, 0)) return std::nullopt;
    StrongLinWitness w;
    Trace t;
    std::function<void(StateId, const History&, const History&)> build = [&](StateId s, const History& h,
                                                                             const History& hs) {
      w[t] = hs;
      if (t.size() == depth_) return;
      const auto& picks = choice_.at(key(s, h, hs, t.size()));
      std::size_t i = 0;
      for (const auto& e : o1_->out(s)) {
        const Action& a = o1_->action(e.action);
        History h2 = h;
        if (a.is_call_or_return()) h2.push_back(a);
        t.push_back(a);
        build(e.target, h2, picks[i++]);
        t.pop_back();
      }
    };
    build(o1_->initial(), {}, {});
    return w;
  }

 private:
  std::string key(StateId s, const History& h, const History& hs, std::size_t d) const {
    std::string k = std::to_string(s) + "|" + std::to_string(depth_ == kUnbounded ? 0 : d) + "|";
    for (const auto& a : h) k += a.to_string();
    k += "|";
    for (const auto& a : hs) k += a.to_string();
    return k;
  }

  /// Sequential extensions of hs by operations called in h but absent from hs.
  std::vector<History> extensions(const History& h, const History& hs) const {
    std::vector<Action> candidates;
    for (const auto& a : h) {
      if (!a.is_call()) continue;
      bool present = false;
      for (std::size_t i = 0; i < hs.size(); i += 2) present |= hs[i].op == a.op;
      if (!present) candidates.push_back(a);
    }
    SpecState state = spec_.initial;
    for (std::size_t i = 0; i < hs.size(); i += 2) state = spec_.apply(state, hs[i].method, hs[i].value).first;
    std::vector<History> out;
    std::vector<bool> used(candidates.size(), false);
    History cur = hs;
    std::function<void(const SpecState&)> rec = [&](const SpecState& st) {
      out.push_back(cur);
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (used[i]) continue;
        auto [next, ret] = spec_.apply(st, candidates[i].method, candidates[i].value);
        used[i] = true;
        cur.push_back(candidates[i]);
        cur.push_back(Action::ret(candidates[i].method, ret, candidates[i].op));
        rec(next);
        cur.pop_back();
        cur.pop_back();
        used[i] = false;
      }
    };
    rec(state);
    return out;
  }

  bool good(StateId s, const History& h, const History& hs, std::size_t d) {
    const std::string k = key(s, h, hs, d);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    if (memo_.size() > budget_.max_states) throw BudgetExceeded("strong linearizability search budget exceeded");
    if (!active_.insert(k).second)
      throw ContractViolation("strong linearizability search hit a cycle; give a depth bound");
    bool result = true;
    std::vector<History> picks;
    if (d < depth_) {
      for (const auto& e : o1_->out(s)) {
        const Action& a = o1_->action(e.action);
        History h2 = h;
        if (a.is_call_or_return()) h2.push_back(a);
        bool found = false;
        for (auto& ext : extensions(h2, hs)) {
          if (!linearizes(h2, ext)) continue;
          if (good(e.target, h2, ext, d + 1)) {
            picks.push_back(std::move(ext));
            found = true;
            break;
          }
        }
        if (!found) {
          result = false;
          break;
        }
      }
    }
    active_.erase(k);
    memo_.emplace(k, result);
    if (result) choice_.emplace(k, std::move(picks));
    return result;
  }

  const Lts* o1_;
  SequentialSpec spec_;
  std::size_t depth_;
  Budget budget_;
  std::unordered_map<std::string, bool> memo_;
  std::unordered_set<std::string> active_;
  std::unordered_map<std::string, std::vector<History>> choice_;
};

inline std::optional<StrongLinWitness> find_strong_lin_witness(const Lts& o1, const SequentialSpec& spec,
                                                               std::size_t depth = kUnbounded,
                                                               const Budget& budget = {}) {
  return StrongLinSearch(o1, spec, depth, budget).run();
}

namespace detail {
inline void require_full(const objects::AtomicModel& model) {
  if (model.config().encoding != objects::AtomicEncoding::Full)
    throw ContractViolation("witness conversions need the full (h, hs) encoding of the atomic object");
}
}  // namespace detail

/// F = {(state(τ), (hist(τ), w(τ)))} into the atomic object.
inline SimRelation fsim_from_witness(const Lts& o1, const objects::AtomicModel& model,
                                     const Explored<objects::AtomicModel>& atomic, const StrongLinWitness& w,
                                     std::size_t depth = kUnbounded, const Budget& budget = {}) {
  detail::require_full(model);
  if (!check_strong_lin_witness(o1, model.spec(), w, depth, budget))
    throw ContractViolation("fsim_from_witness: invalid witness");
  SimRelation r;
  r.left_size = o1.num_states();
  r.right_size = atomic.lts.num_states();
  detail::walk_traces(o1, depth, budget, [&](const Trace& t, StateId s) {
    objects::AtomicModel::State q;
    q.h = hist(t);
    q.hs = w.at(t);
    auto id = atomic.lts.find_state(model.key(q));
    if (!id) throw ContractViolation("atomic object does not contain the state for trace " + to_string(t));
    r.pairs.emplace_back(s, *id);
  });
  r.normalize();
  return r;
}

/// f(τ) = hs of the canonical F-related atomic state reached along τ.
inline StrongLinWitness witness_from_fsim(const Lts& o1, const objects::AtomicModel& model,
                                          const Explored<objects::AtomicModel>& atomic, const SimRelation& f,
                                          std::size_t depth = kUnbounded, const Budget& budget = {}) {
  detail::require_full(model);
  if (!check_fsim(o1, atomic.lts, f).holds) throw ContractViolation("witness_from_fsim: relation is not a simulation");
  WeakSteps weak(atomic.lts, f.gamma);
  StrongLinWitness w;
  std::map<Trace, StateId> related;
  related[{}] = atomic.lts.initial();
  detail::walk_traces(o1, depth, budget, [&](const Trace& t, StateId s1) {
    if (!t.empty()) {
      const Trace parent(t.begin(), t.end() - 1);
      const StateId s2 = related.at(parent);
      std::optional<StateId> pick;
      for (auto c : weak.of(s2, t.back()))
        if (f.contains(s1, c)) {
          pick = c;
          break;
        }
      related[t] = *pick;
    }
    w[t] = atomic.states[related.at(t)].hs;
  });
  return w;
}

}  // namespace conch
