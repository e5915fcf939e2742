#pragma once

#include <climits>
#include <string>
#include <vector>

#include "conch/lts.hpp"
#include "conch/objects/model_util.hpp"

namespace conch::objects {

struct AfekStackConfig {
  int threads = 3;   // max concurrently pending invocations
  int capacity = 3;  // size of items[]
  std::vector<std::string> values{"0", "1", "2"};
  int max_pushes = -1;  // -1: capacity
  int max_pops = -1;    // -1: capacity
  std::string prefix = "afek";
};

/// Array-based stack: push reserves a slot then writes it; pop reads range
/// and swaps cells with null from range-1 down to 0.
class AfekStackModel {
 public:
  enum Pc : std::uint8_t { Reserve, Write, PushDone, ReadRange, Swap, PopDone };
  struct Frame {
    OpId op = 0;
    Pc pc = Reserve;
    std::uint32_t arg = 0;     // pushed value
    int index = 0;             // push: reserved slot; pop: next cell to swap
    std::uint32_t result = 0;  // pop result
  };
  struct State {
    int range = 0;
    std::vector<std::uint32_t> items;
    OpId next = 1;
    int pushes = 0, pops = 0;
    std::vector<Frame> frames;
  };

  explicit AfekStackModel(AfekStackConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.max_pushes < 0) cfg_.max_pushes = cfg_.capacity;
    if (cfg_.max_pops < 0) cfg_.max_pops = cfg_.capacity;
    if (cfg_.max_pushes > cfg_.capacity) throw ContractViolation("afek stack: more pushes than capacity");
    values_ = symbol_ids(cfg_.values);
  }

  State initial() const {
    State s;
    s.items.assign(static_cast<std::size_t>(cfg_.capacity), 0);
    return s;
  }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    static const Symbol push("push"), pop("pop");
    std::vector<std::pair<Action, State>> out;
    const bool room = static_cast<int>(s.frames.size()) < cfg_.threads;
    if (room && s.pushes < cfg_.max_pushes) {
      for (auto v : values_) {
        State t = s;
        t.frames.push_back({s.next, Reserve, v, 0, 0});
        ++t.next;
        ++t.pushes;
        out.emplace_back(Action::call(push, symbol_of(v), s.next), std::move(t));
      }
    }
    if (room && s.pops < cfg_.max_pops) {
      State t = s;
      t.frames.push_back({s.next, ReadRange, 0, 0, 0});
      ++t.next;
      ++t.pops;
      out.emplace_back(Action::call(pop, values::unit(), s.next), std::move(t));
    }
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const Frame& f = s.frames[i];
      State t = s;
      Frame& g = t.frames[i];
      switch (f.pc) {
        case Reserve:
          g.index = t.range++;
          g.pc = Write;
          out.emplace_back(Action::internal(label(cfg_.prefix, "reserve", f.op)), std::move(t));
          break;
        case Write:
          t.items[static_cast<std::size_t>(f.index)] = f.arg;
          g.pc = PushDone;
          out.emplace_back(Action::internal(label(cfg_.prefix, "write", f.op)), std::move(t));
          break;
        case PushDone:
          t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
          out.emplace_back(Action::ret(push, values::ok(), f.op), std::move(t));
          break;
        case ReadRange:
          g.index = s.range - 1;
          g.pc = s.range == 0 ? PopDone : Swap;
          if (s.range == 0) g.result = values::empty().id();
          out.emplace_back(Action::internal(label(cfg_.prefix, "read_range", f.op)), std::move(t));
          break;
        case Swap: {
          auto& cell = t.items[static_cast<std::size_t>(f.index)];
          if (cell) {
            g.result = cell;
            cell = 0;
            g.pc = PopDone;
          } else if (f.index == 0) {
            g.result = values::empty().id();
            g.pc = PopDone;
          } else {
            --g.index;
          }
          out.emplace_back(Action::internal(label(cfg_.prefix, "swap", f.op)), std::move(t));
          break;
        }
        case PopDone:
          t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
          out.emplace_back(Action::ret(pop, symbol_of(f.result), f.op), std::move(t));
          break;
      }
    }
    return out;
  }

  std::string key(const State& s) const {
    KeyWriter w;
    w.tag("range=").num(s.range).tag("items=").cells(s.items).tag(";n=").num(s.next).num(s.pushes).num(s.pops);
    for (const auto& f : s.frames) w.tag("{").num(f.op).num(f.pc).sym(f.arg).num(f.index).sym(f.result).tag("}");
    return std::move(w).str();
  }

  const AfekStackConfig& config() const { return cfg_; }

 private:
  AfekStackConfig cfg_;
  std::vector<std::uint32_t> values_;
};

inline Lts afek_stack(const AfekStackConfig& cfg, const Budget& budget = {}) {
  return materialize(AfekStackModel(cfg), budget);
}

}  // namespace conch::objects
