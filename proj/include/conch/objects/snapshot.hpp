#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "conch/lts.hpp"
#include "conch/objects/model_util.hpp"
#include "conch/spec.hpp"

namespace conch::objects {

struct SnapshotConfig {
  int n = 2;
  std::vector<std::string> values{"0", "1"};
  std::string initial = "0";
  int updaters = 1;             // max concurrently pending updates
  int scanners = 1;             // max concurrently pending scans
  int updates_per_updater = 2;  // total updates = updaters * updates_per_updater
  int scans_per_scanner = 1;
  int snapshot_bound = 3;  // max length of snaps in the concurrent spec
  int index_base = 1;      // first index accepted by update(i,d)

  int max_updates() const { return updaters * updates_per_updater; }
  int max_scans() const { return scanners * scans_per_scanner; }
};

namespace detail {
struct UpdateArg {
  Symbol arg;
  std::size_t cell;
  std::uint32_t value;
};
inline std::vector<UpdateArg> update_args(const SnapshotConfig& cfg) {
  std::vector<UpdateArg> out;
  for (int i = 0; i < cfg.n; ++i)
    for (const auto& v : cfg.values)
      out.push_back({specs::update_arg(cfg.index_base + i, v), static_cast<std::size_t>(i), Symbol(v).id()});
  return out;
}
inline void check(const SnapshotConfig& cfg) {
  if (cfg.n < 1 || cfg.updaters < 1 || cfg.scanners < 1 || cfg.updates_per_updater < 0 || cfg.scans_per_scanner < 0 ||
      cfg.snapshot_bound < 1 || cfg.values.empty())
    throw ContractViolation("snapshot: invalid configuration");
}
}  // namespace detail

/// Double-collect snapshot. The scan's locals r1 and r2 start equal to mem at
/// the call; pc walks Collect1(i), Copy, Collect2(i), Test, Done.
class SnapshotImplModel {
 public:
  enum Pc : std::uint8_t { UpdateWrite, UpdateDone, Collect1, Copy, Collect2, Test, Done };
  struct Frame {
    OpId op = 0;
    Pc pc = UpdateWrite;
    std::size_t cell = 0;     // update target, or next cell to read
    std::uint32_t value = 0;  // update payload
    std::vector<std::uint32_t> r1, r2;
    bool is_scan() const { return pc >= Collect1; }
  };
  struct State {
    std::vector<std::uint32_t> mem;
    OpId next = 1;
    int updates = 0, scans = 0;
    std::vector<Frame> frames;
  };

  explicit SnapshotImplModel(SnapshotConfig cfg, std::string prefix = "snap") : cfg_(std::move(cfg)), prefix_(std::move(prefix)) {
    detail::check(cfg_);
    args_ = detail::update_args(cfg_);
  }

  State initial() const {
    State s;
    s.mem.assign(static_cast<std::size_t>(cfg_.n), Symbol(cfg_.initial).id());
    return s;
  }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    static const Symbol update("update"), scan("scan");
    std::vector<std::pair<Action, State>> out;
    int pending_updates = 0, pending_scans = 0;
    for (const auto& f : s.frames) (f.is_scan() ? pending_scans : pending_updates)++;
    if (pending_updates < cfg_.updaters && s.updates < cfg_.max_updates()) {
      for (const auto& u : args_) {
        State t = s;
        t.frames.push_back({s.next, UpdateWrite, u.cell, u.value, {}, {}});
        ++t.next;
        ++t.updates;
        out.emplace_back(Action::call(update, u.arg, s.next), std::move(t));
      }
    }
    if (pending_scans < cfg_.scanners && s.scans < cfg_.max_scans()) {
      State t = s;
      t.frames.push_back({s.next, Collect1, 0, 0, s.mem, s.mem});
      ++t.next;
      ++t.scans;
      out.emplace_back(Action::call(scan, values::unit(), s.next), std::move(t));
    }
    const auto n = static_cast<std::size_t>(cfg_.n);
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const Frame& f = s.frames[i];
      State t = s;
      Frame& g = t.frames[i];
      switch (f.pc) {
        case UpdateWrite:
          t.mem[f.cell] = f.value;
          g.pc = UpdateDone;
          out.emplace_back(Action::internal(label(prefix_, "write", f.op)), std::move(t));
          break;
        case UpdateDone:
          t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
          out.emplace_back(Action::ret(update, values::ok(), f.op), std::move(t));
          break;
        case Collect1:
        case Collect2:
          g.r1[f.cell] = s.mem[f.cell];
          if (++g.cell == n) {
            g.cell = 0;
            g.pc = f.pc == Collect1 ? Copy : Test;
          }
          out.emplace_back(Action::internal(label(prefix_, "read", f.op)), std::move(t));
          break;
        case Copy:
          g.r2 = f.r1;
          g.pc = Collect2;
          out.emplace_back(Action::internal(label(prefix_, "copy", f.op)), std::move(t));
          break;
        case Test:
          g.pc = f.r1 == f.r2 ? Done : Copy;
          out.emplace_back(Action::internal(label(prefix_, "test", f.op)), std::move(t));
          break;
        case Done:
          t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
          out.emplace_back(Action::ret(scan, specs::array_value(f.r1), f.op), std::move(t));
          break;
      }
    }
    return out;
  }

  std::string key(const State& s) const {
    KeyWriter w;
    w.tag("mem=").cells(s.mem).tag(";n=").num(s.next).num(s.updates).num(s.scans);
    for (const auto& f : s.frames) {
      w.tag("{").num(f.op).num(f.pc).num(static_cast<long long>(f.cell));
      if (f.is_scan()) {
        w.cells(f.r1).cells(f.r2);
      } else {
        w.sym(f.value);
      }
      w.tag("}");
    }
    return std::move(w).str();
  }

  const SnapshotConfig& config() const { return cfg_; }

 private:
  SnapshotConfig cfg_;
  std::string prefix_;
  std::vector<detail::UpdateArg> args_;
};

/// Concurrent snapshot specification: a scan collects instantaneous
/// snapshots into snaps and returns any element of it. A snapshot step is
/// enabled only when mem differs from last(snaps) and snaps is below the
/// bound.
class SnapshotSpecModel {
 public:
  enum Pc : std::uint8_t { UpdateWrite, UpdateDone, Scanning };
  struct Frame {
    OpId op = 0;
    Pc pc = UpdateWrite;
    std::size_t cell = 0;
    std::uint32_t value = 0;
    std::vector<std::vector<std::uint32_t>> snaps;
    bool is_scan() const { return pc == Scanning; }
  };
  struct State {
    std::vector<std::uint32_t> mem;
    OpId next = 1;
    int updates = 0, scans = 0;
    std::vector<Frame> frames;
  };

  explicit SnapshotSpecModel(SnapshotConfig cfg, std::string prefix = "snapspec")
      : cfg_(std::move(cfg)), prefix_(std::move(prefix)) {
    detail::check(cfg_);
    args_ = detail::update_args(cfg_);
  }

  State initial() const {
    State s;
    s.mem.assign(static_cast<std::size_t>(cfg_.n), Symbol(cfg_.initial).id());
    return s;
  }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    static const Symbol update("update"), scan("scan");
    std::vector<std::pair<Action, State>> out;
    int pending_updates = 0, pending_scans = 0;
    for (const auto& f : s.frames) (f.is_scan() ? pending_scans : pending_updates)++;
    if (pending_updates < cfg_.updaters && s.updates < cfg_.max_updates()) {
      for (const auto& u : args_) {
        State t = s;
        t.frames.push_back({s.next, UpdateWrite, u.cell, u.value, {}});
        ++t.next;
        ++t.updates;
        out.emplace_back(Action::call(update, u.arg, s.next), std::move(t));
      }
    }
    if (pending_scans < cfg_.scanners && s.scans < cfg_.max_scans()) {
      State t = s;
      t.frames.push_back({s.next, Scanning, 0, 0, {s.mem}});
      ++t.next;
      ++t.scans;
      out.emplace_back(Action::call(scan, values::unit(), s.next), std::move(t));
    }
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const Frame& f = s.frames[i];
      switch (f.pc) {
        case UpdateWrite: {
          State t = s;
          t.mem[f.cell] = f.value;
          t.frames[i].pc = UpdateDone;
          out.emplace_back(Action::internal(label(prefix_, "write", f.op)), std::move(t));
          break;
        }
        case UpdateDone: {
          State t = s;
          t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
          out.emplace_back(Action::ret(update, values::ok(), f.op), std::move(t));
          break;
        }
        case Scanning: {
          if (f.snaps.back() != s.mem && static_cast<int>(f.snaps.size()) < cfg_.snapshot_bound) {
            State t = s;
            t.frames[i].snaps.push_back(s.mem);
            out.emplace_back(Action::internal(label(prefix_, "atomic_snapshot", f.op)), std::move(t));
          }
          std::vector<std::vector<std::uint32_t>> distinct = f.snaps;
          std::sort(distinct.begin(), distinct.end());
          distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
          for (const auto& r : distinct) {
            State t = s;
            t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
            out.emplace_back(Action::ret(scan, specs::array_value(r), f.op), std::move(t));
          }
          break;
        }
      }
    }
    return out;
  }

  std::string key(const State& s) const {
    KeyWriter w;
    w.tag("mem=").cells(s.mem).tag(";n=").num(s.next).num(s.updates).num(s.scans);
    for (const auto& f : s.frames) {
      w.tag("{").num(f.op).num(f.pc);
      if (f.is_scan()) {
        for (const auto& snap : f.snaps) w.cells(snap);
      } else {
        w.num(static_cast<long long>(f.cell)).sym(f.value);
      }
      w.tag("}");
    }
    return std::move(w).str();
  }

  const SnapshotConfig& config() const { return cfg_; }

 private:
  SnapshotConfig cfg_;
  std::string prefix_;
  std::vector<detail::UpdateArg> args_;
};

inline Lts snapshot_impl(const SnapshotConfig& cfg, const Budget& budget = {}) {
  return materialize(SnapshotImplModel(cfg), budget);
}

inline Lts snapshot_spec_lts(const SnapshotConfig& cfg, const Budget& budget = {}) {
  return materialize(SnapshotSpecModel(cfg), budget);
}

/// The sequential snapshot matching a configuration, for the atomic object.
inline SequentialSpec snapshot_sequential_spec(const SnapshotConfig& cfg) {
  return specs::snapshot_spec(cfg.n, cfg.values, cfg.initial, cfg.index_base);
}

}  // namespace conch::objects
