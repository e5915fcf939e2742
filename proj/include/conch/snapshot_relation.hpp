#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "conch/fsim.hpp"
#include "conch/objects/snapshot.hpp"

namespace conch {

namespace detail {

/// Fits per-position snapshot indices for `r` (positions [0, set) only),
/// nondecreasing and starting at or after `lower`. Returns the last index
/// used, `lower` when nothing is set, or nullopt when no fit exists. Taking
/// the smallest index at each position is optimal for a chain constraint.
inline std::optional<std::size_t> fit_snapshots(const std::vector<std::vector<std::uint32_t>>& snaps,
                                                const std::vector<std::uint32_t>& r, std::size_t set,
                                                std::size_t lower) {
  std::size_t k = lower;
  for (std::size_t i = 0; i < set; ++i) {
    while (k < snaps.size() && snaps[k][i] != r[i]) ++k;
    if (k == snaps.size()) return std::nullopt;
  }
  return k;
}

/// First index in the r1 chain, used for the bound fst(r2,n) <= fst(r1,first).
inline bool scan_related(const objects::SnapshotImplModel::Frame& impl,
                         const objects::SnapshotSpecModel::Frame& spec, const std::vector<std::uint32_t>& mem) {
  using Pc = objects::SnapshotImplModel::Pc;
  const auto& snaps = spec.snaps;
  if (snaps.empty() || snaps.back() != mem) return false;
  const std::size_t n = mem.size();
  const std::size_t r1_set = (impl.pc == Pc::Collect1 || impl.pc == Pc::Collect2) ? impl.cell : n;
  auto r2_end = fit_snapshots(snaps, impl.r2, n, 0);
  if (!r2_end) return false;
  if (!fit_snapshots(snaps, impl.r1, r1_set, *r2_end)) return false;
  if (impl.pc == Pc::Done && std::find(snaps.begin(), snaps.end(), impl.r1) == snaps.end()) return false;
  return true;
}

}  // namespace detail

/// Relation between a double-collect snapshot state and a concurrent-spec
/// state: same mem, same counters, same active invocations; updates at the
/// same location; each scan's r2 and the already-read prefix of r1 are
/// explained by nondecreasing positions in snaps with r2 no later than r1,
/// last(snaps) = mem, and r1 in snaps once the equality test has passed.
inline bool snapshot_relation(const objects::SnapshotImplModel::State& s1,
                              const objects::SnapshotSpecModel::State& s2) {
  if (s1.mem.size() != s2.mem.size()) throw ContractViolation("snapshot relation: array sizes differ");
  if (s1.mem != s2.mem || s1.next != s2.next || s1.updates != s2.updates || s1.scans != s2.scans) return false;
  if (s1.frames.size() != s2.frames.size()) return false;
  for (std::size_t i = 0; i < s1.frames.size(); ++i) {
    const auto& f1 = s1.frames[i];
    const auto& f2 = s2.frames[i];
    if (f1.op != f2.op || f1.is_scan() != f2.is_scan()) return false;
    if (!f1.is_scan()) {
      const bool done1 = f1.pc == objects::SnapshotImplModel::UpdateDone;
      const bool done2 = f2.pc == objects::SnapshotSpecModel::UpdateDone;
      if (done1 != done2 || f1.cell != f2.cell || f1.value != f2.value) return false;
    } else if (!detail::scan_related(f1, f2, s1.mem)) {
      return false;
    }
  }
  return true;
}

/// All pairs of reachable states satisfying the snapshot relation.
inline SimRelation snapshot_relation_pairs(const Explored<objects::SnapshotImplModel>& impl,
                                           const Explored<objects::SnapshotSpecModel>& spec) {
  SimRelation r;
  r.left_size = impl.lts.num_states();
  r.right_size = spec.lts.num_states();
  // bucket spec states by their shared part to avoid the full cross product
  std::unordered_map<std::string, std::vector<StateId>> buckets;
  auto shared_key = [](const auto& s) {
    std::string k;
    for (auto c : s.mem) k += std::to_string(c) + ",";
    k += "|" + std::to_string(s.next) + "|" + std::to_string(s.updates) + "|" + std::to_string(s.scans);
    for (const auto& f : s.frames) k += "|" + std::to_string(f.op);
    return k;
  };
  for (StateId t = 0; t < spec.states.size(); ++t) buckets[shared_key(spec.states[t])].push_back(t);
  for (StateId s = 0; s < impl.states.size(); ++s) {
    auto it = buckets.find(shared_key(impl.states[s]));
    if (it == buckets.end()) continue;
    for (auto t : it->second)
      if (snapshot_relation(impl.states[s], spec.states[t])) r.pairs.emplace_back(s, t);
  }
  r.normalize();
  return r;
}

}  // namespace conch
