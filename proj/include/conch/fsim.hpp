#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "conch/lts.hpp"

namespace conch {

/// Pairs (state of A1, state of A2), kept sorted and unique.
struct SimRelation {
  std::vector<std::pair<StateId, StateId>> pairs;
  Gamma gamma = Gamma::calls_returns();
  std::size_t left_size = 0, right_size = 0;  // 0 when unknown

  void normalize() {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  }
  bool contains(StateId s1, StateId s2) const {
    return std::binary_search(pairs.begin(), pairs.end(), std::pair{s1, s2});
  }
  std::size_t size() const { return pairs.size(); }
  bool subset_of(const SimRelation& other) const {
    return std::includes(other.pairs.begin(), other.pairs.end(), pairs.begin(), pairs.end());
  }
};

inline SimRelation identity_relation(const Lts& a, Gamma gamma = Gamma::calls_returns()) {
  SimRelation r;
  r.gamma = gamma;
  r.left_size = r.right_size = a.num_states();
  for (StateId s = 0; s < a.num_states(); ++s) r.pairs.emplace_back(s, s);
  return r;
}

/// Weak steps of A2: for a outside Γ, the silent closure; for a in Γ,
/// closure · a · closure. Memoized per (state, action).
class WeakSteps {
 public:
  WeakSteps(const Lts& a2, Gamma gamma) : closure_(a2, gamma) {}

  const std::vector<StateId>& of(StateId s2, const Action& a) {
    if (!closure_.gamma().contains(a)) return closure_.of(s2);
    auto id = closure_.lts().find_action(a);
    if (!id) return empty_;
    const std::uint64_t key = (std::uint64_t{s2} << 32) | *id;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    auto targets = macro_post(closure_, closure_.of(s2), a);
    return memo_.emplace(key, std::move(targets)).first->second;
  }

  /// A shortest concrete sequence realizing a weak a-step from s2 to t.
  std::optional<Trace> path(StateId s2, const Action& a, StateId t) {
    const Lts& lts = closure_.lts();
    const bool visible = closure_.gamma().contains(a);
    // BFS over (state, whether a has been taken)
    using Node = std::pair<StateId, bool>;
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, ActionId>> parent;
    auto key = [](Node n) { return (std::uint64_t{n.first} << 1) | n.second; };
    std::deque<Node> queue{{s2, !visible}};
    parent.emplace(key(queue.front()), std::pair{UINT64_MAX, ActionId{0}});
    while (!queue.empty()) {
      Node n = queue.front();
      queue.pop_front();
      if (n.second && n.first == t) {
        Trace out;
        for (std::uint64_t k = key(n); parent.at(k).first != UINT64_MAX; k = parent.at(k).first)
          out.push_back(lts.action(parent.at(k).second));
        std::reverse(out.begin(), out.end());
        return out;
      }
      for (const auto& e : lts.out(n.first)) {
        const Action& b = lts.action(e.action);
        Node next;
        if (closure_.is_silent(e.action)) {
          next = {e.target, n.second};
        } else if (!n.second && b == a) {
          next = {e.target, true};
        } else {
          continue;
        }
        if (parent.try_emplace(key(next), std::pair{key(n), e.action}).second) queue.push_back(next);
      }
    }
    return std::nullopt;
  }

  const Lts& lts() const { return closure_.lts(); }
  Gamma gamma() const { return closure_.gamma(); }

 private:
  SilentClosure closure_;
  std::unordered_map<std::uint64_t, std::vector<StateId>> memo_;
  std::vector<StateId> empty_;
};

struct FsimCheck {
  bool holds = true;
  std::string reason;
  // failing transition s1 -a-> s1' of A1 from a related pair (s1, s2)
  std::optional<StateId> s1, s2, s1_next;
  std::optional<Action> action;
};

/// Verifies that F is a Γ-forward simulation from A1 to A2.
inline FsimCheck check_fsim(const Lts& a1, const Lts& a2, const SimRelation& f) {
  for (const auto& [s1, s2] : f.pairs)
    if (s1 >= a1.num_states() || s2 >= a2.num_states())
      throw ContractViolation("relation references a state outside the LTSs");
  FsimCheck r;
  if (!f.contains(a1.initial(), a2.initial())) {
    r.holds = false;
    r.reason = "initial states are not related";
    return r;
  }
  WeakSteps weak(a2, f.gamma);
  for (const auto& [s1, s2] : f.pairs) {
    for (const auto& e : a1.out(s1)) {
      const Action& a = a1.action(e.action);
      const auto& targets = weak.of(s2, a);
      const bool matched =
          std::any_of(targets.begin(), targets.end(), [&](StateId t) { return f.contains(e.target, t); });
      if (!matched) {
        r.holds = false;
        r.reason = "no weak step of the second LTS matches " + a.to_string() + " inside the relation";
        r.s1 = s1;
        r.s2 = s2;
        r.s1_next = e.target;
        r.action = a;
        return r;
      }
    }
  }
  return r;
}

/// The greatest Γ-forward simulation restricted to pairs reachable from the
/// initial pair by weak matching, or nullopt when it drops the initial pair.
inline std::optional<SimRelation> fsim_exists(const Lts& a1, const Lts& a2, Gamma gamma = Gamma::calls_returns(),
                                              const Budget& budget = {}) {
  WeakSteps weak(a2, gamma);
  std::unordered_map<std::uint64_t, std::uint32_t> ids;
  std::vector<std::pair<StateId, StateId>> pairs;
  std::vector<std::uint32_t> first_slot;   // per pair, index of its first edge counter
  std::vector<std::uint32_t> count;        // per (pair, edge of s1): live matching successors
  std::vector<std::uint32_t> slot_owner;
  std::vector<std::vector<std::uint32_t>> dependents;  // per pair, slots counting it

  auto intern = [&](StateId s1, StateId s2) {
    const std::uint64_t key = (std::uint64_t{s1} << 32) | s2;
    auto [it, inserted] = ids.try_emplace(key, static_cast<std::uint32_t>(pairs.size()));
    if (inserted) {
      if (pairs.size() >= budget.max_states)
        throw BudgetExceeded("simulation pair budget of " + std::to_string(budget.max_states) + " exceeded");
      pairs.emplace_back(s1, s2);
      dependents.emplace_back();
    }
    return it->second;
  };

  intern(a1.initial(), a2.initial());
  for (std::uint32_t p = 0; p < pairs.size(); ++p) {
    const auto [s1, s2] = pairs[p];
    first_slot.push_back(static_cast<std::uint32_t>(count.size()));
    for (const auto& e : a1.out(s1)) {
      const auto slot = static_cast<std::uint32_t>(count.size());
      count.push_back(0);
      slot_owner.push_back(p);
      const auto targets = weak.of(s2, a1.action(e.action));
      for (StateId t : targets) {
        const auto q = intern(e.target, t);
        ++count[slot];
        dependents[q].push_back(slot);
      }
    }
  }

  std::vector<bool> alive(pairs.size(), true);
  std::vector<std::uint32_t> work;
  for (std::uint32_t slot = 0; slot < count.size(); ++slot)
    if (count[slot] == 0 && alive[slot_owner[slot]]) {
      alive[slot_owner[slot]] = false;
      work.push_back(slot_owner[slot]);
    }
  while (!work.empty()) {
    const auto q = work.back();
    work.pop_back();
    for (auto slot : dependents[q]) {
      const auto p = slot_owner[slot];
      if (!alive[p]) continue;
      if (--count[slot] == 0) {
        alive[p] = false;
        work.push_back(p);
      }
    }
  }
  if (!alive[0]) return std::nullopt;
  SimRelation r;
  r.gamma = gamma;
  r.left_size = a1.num_states();
  r.right_size = a2.num_states();
  for (std::uint32_t p = 0; p < pairs.size(); ++p)
    if (alive[p]) r.pairs.push_back(pairs[p]);
  r.normalize();
  return r;
}

/// Relational composition F1;F2.
inline SimRelation compose_relations(const SimRelation& f1, const SimRelation& f2) {
  if (f1.right_size && f2.left_size && f1.right_size != f2.left_size)
    throw ContractViolation("composed relations do not share their middle LTS");
  std::unordered_map<StateId, std::vector<StateId>> by_left;
  for (const auto& [m, t] : f2.pairs) by_left[m].push_back(t);
  SimRelation r;
  r.gamma = f1.gamma;
  r.left_size = f1.left_size;
  r.right_size = f2.right_size;
  for (const auto& [s, m] : f1.pairs)
    if (auto it = by_left.find(m); it != by_left.end())
      for (auto t : it->second) r.pairs.emplace_back(s, t);
  r.normalize();
  return r;
}

}  // namespace conch
