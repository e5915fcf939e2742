#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "conch/history.hpp"
#include "conch/lts.hpp"
#include "conch/spec.hpp"

namespace conch {

/// Evidence for h1 ⊑ h2.
struct LinWitness {
  History completion;  // h1 with returns appended for the pending calls it keeps
  History sequential;  // h2
  std::vector<OpId> order() const {
    std::vector<OpId> out;
    for (std::size_t i = 0; i < sequential.size(); i += 2) out.push_back(sequential[i].op);
    return out;
  }
};

namespace detail {

struct OpInfo {
  OpId op = 0;
  Symbol method, arg, ret;
  bool returned = false;
  std::size_t call_pos = 0, ret_pos = 0;
};

/// Operations of a well-formed history in call order.
inline std::vector<OpInfo> operations(const History& h) {
  std::vector<OpInfo> ops;
  std::unordered_map<OpId, std::size_t> index;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Action& a = h[i];
    if (a.is_call()) {
      index[a.op] = ops.size();
      ops.push_back({a.op, a.method, a.value, {}, false, i, 0});
    } else {
      auto& o = ops[index.at(a.op)];
      o.returned = true;
      o.ret = a.value;
      o.ret_pos = i;
    }
  }
  return ops;
}

}  // namespace detail

/// Decides h1 ⊑ h2: some completion of h1 (returns appended to, or calls
/// deleted from, pending operations) is a permutation of h2 that keeps every
/// return-before-call order of h1.
inline std::optional<LinWitness> linearizes(const History& h1, const History& h2) {
  require_well_formed(h1);
  require_well_formed(h2);
  if (!is_sequential(h2)) throw ContractViolation("linearizes: second history is not sequential");

  const auto ops = detail::operations(h1);
  std::unordered_map<OpId, std::size_t> index;
  for (std::size_t i = 0; i < ops.size(); ++i) index[ops[i].op] = i;

  std::vector<std::size_t> pos(ops.size(), SIZE_MAX);
  for (std::size_t i = 0; i < h2.size(); i += 2) {
    auto it = index.find(h2[i].op);
    if (it == index.end()) return std::nullopt;
    const auto& o = ops[it->second];
    if (o.method != h2[i].method || o.arg != h2[i].value) return std::nullopt;
    if (o.returned && o.ret != h2[i + 1].value) return std::nullopt;
    pos[it->second] = i / 2;
  }
  for (std::size_t x = 0; x < ops.size(); ++x)
    if (ops[x].returned && pos[x] == SIZE_MAX) return std::nullopt;
  for (std::size_t x = 0; x < ops.size(); ++x) {
    if (!ops[x].returned) continue;
    for (std::size_t y = 0; y < ops.size(); ++y)
      if (pos[y] != SIZE_MAX && ops[x].ret_pos < ops[y].call_pos && pos[x] > pos[y]) return std::nullopt;
  }

  LinWitness w;
  for (const auto& a : h1)
    if (!a.is_call() || pos[index.at(a.op)] != SIZE_MAX) w.completion.push_back(a);
  for (std::size_t i = 0; i < h2.size(); i += 2)
    if (!ops[index.at(h2[i].op)].returned) w.completion.push_back(h2[i + 1]);
  w.sequential = h2;
  return w;
}

/// Reusable linearizability checker for one sequential spec. Spec states and
/// transitions are interned across calls.
class LinChecker {
 public:
  explicit LinChecker(SequentialSpec spec) : spec_(std::move(spec)) { intern(spec_.initial); }

  /// Some h2 in Seq with h ⊑ h2, or nullopt. Among witnesses, the one whose
  /// operation order is lexicographically least by opId.
  std::optional<LinWitness> check(const History& h) {
    require_well_formed(h);
    if (!search(h)) return std::nullopt;
    return build_witness(h);
  }

  bool linearizable(const History& h) {
    require_well_formed(h);
    return search(h);
  }

  const SequentialSpec& spec() const { return spec_; }

 private:
  struct Step {
    std::uint32_t state;
    Symbol ret;
  };

  std::uint32_t intern(const SpecState& s) {
    auto [it, inserted] = state_ids_.try_emplace(s, static_cast<std::uint32_t>(states_.size()));
    if (inserted) states_.push_back(s);
    return it->second;
  }

  Step step(std::uint32_t state, Symbol method, Symbol arg) {
    const std::uint64_t op_key = (std::uint64_t{method.id()} << 32) | arg.id();
    auto [oit, fresh] = opcodes_.try_emplace(op_key, static_cast<std::uint32_t>(opcodes_.size()));
    const std::uint64_t key = (std::uint64_t{state} << 32) | oit->second;
    if (auto it = steps_.find(key); it != steps_.end()) return it->second;
    auto [next, ret] = spec_.apply(states_[state], method, arg);
    Step s{intern(next), ret};
    steps_.emplace(key, s);
    return s;
  }

  bool search(const History& h) {
    ops_ = detail::operations(h);
    if (ops_.size() > 64) throw ContractViolation("lincheck supports at most 64 operations");
    std::sort(ops_.begin(), ops_.end(), [](const auto& a, const auto& b) { return a.op < b.op; });
    const std::size_t n = ops_.size();
    preds_.assign(n, 0);
    required_ = 0;
    for (std::size_t y = 0; y < n; ++y) {
      if (ops_[y].returned) required_ |= std::uint64_t{1} << y;
      for (std::size_t x = 0; x < n; ++x)
        if (ops_[x].returned && ops_[x].ret_pos < ops_[y].call_pos) preds_[y] |= std::uint64_t{1} << x;
    }
    failed_.clear();
    order_.clear();
    return dfs(0, 0);
  }

  bool dfs(std::uint64_t mask, std::uint32_t state) {
    if ((mask & required_) == required_) return true;
    if (failed_.count({mask, state})) return false;
    for (std::size_t y = 0; y < ops_.size(); ++y) {
      const std::uint64_t bit = std::uint64_t{1} << y;
      if ((mask & bit) || (preds_[y] & ~mask)) continue;
      const Step s = step(state, ops_[y].method, ops_[y].arg);
      if (ops_[y].returned && s.ret != ops_[y].ret) continue;
      order_.push_back(y);
      if (dfs(mask | bit, s.state)) return true;
      order_.pop_back();
    }
    failed_.insert({mask, state});
    return false;
  }

  LinWitness build_witness(const History& h) {
    LinWitness w;
    std::uint64_t mask = 0;
    std::uint32_t state = 0;
    auto emit = [&](std::size_t y) {
      const Step s = step(state, ops_[y].method, ops_[y].arg);
      w.sequential.push_back(Action::call(ops_[y].method, ops_[y].arg, ops_[y].op));
      w.sequential.push_back(Action::ret(ops_[y].method, s.ret, ops_[y].op));
      state = s.state;
      mask |= std::uint64_t{1} << y;
    };
    for (auto y : order_) emit(y);
    // remaining pending operations are completed at the end
    for (std::size_t y = 0; y < ops_.size(); ++y)
      if (!(mask & (std::uint64_t{1} << y))) emit(y);
    w.completion = h;
    for (std::size_t i = 0; i < w.sequential.size(); i += 2) {
      const OpId k = w.sequential[i].op;
      auto it = std::find_if(ops_.begin(), ops_.end(), [k](const auto& o) { return o.op == k; });
      if (!it->returned) w.completion.push_back(w.sequential[i + 1]);
    }
    return w;
  }

  struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint32_t>& p) const noexcept {
      return static_cast<std::size_t>(p.first * 0x9e3779b97f4a7c15ULL) ^ p.second;
    }
  };

  SequentialSpec spec_;
  std::vector<SpecState> states_;
  std::unordered_map<SpecState, std::uint32_t, VectorHash> state_ids_;
  std::unordered_map<std::uint64_t, std::uint32_t> opcodes_;
  std::unordered_map<std::uint64_t, Step> steps_;

  std::vector<detail::OpInfo> ops_;
  std::vector<std::uint64_t> preds_;
  std::uint64_t required_ = 0;
  std::unordered_set<std::pair<std::uint64_t, std::uint32_t>, PairHash> failed_;
  std::vector<std::size_t> order_;
};

/// Witness that h is linearizable w.r.t. spec, if any.
inline std::optional<LinWitness> is_linearizable(const History& h, const SequentialSpec& spec) {
  return LinChecker(spec).check(h);
}

}  // namespace conch
