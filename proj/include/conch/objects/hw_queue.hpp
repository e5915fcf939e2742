#pragma once

#include <string>
#include <vector>

#include "conch/lts.hpp"
#include "conch/objects/model_util.hpp"

namespace conch::objects {

struct HwQueueConfig {
  int threads = 4;
  int capacity = 2;
  std::vector<std::string> values{"1", "2"};
  int max_enqs = -1;  // -1: capacity
  int max_deqs = 2;
  std::string prefix = "hwq";
};

/// Herlihy&Wing queue. A dequeue that sweeps every reserved slot without
/// finding an item reads `back` again, so it may spin forever.
class HwQueueModel {
 public:
  enum Pc : std::uint8_t { Reserve, Write, EnqDone, ReadBack, Sweep, DeqDone };
  struct Frame {
    OpId op = 0;
    Pc pc = Reserve;
    std::uint32_t arg = 0;
    int index = 0;  // enq: reserved slot; deq: next cell to swap
    int range = 0;  // deq: value of back read
    std::uint32_t result = 0;
  };
  struct State {
    int back = 0;
    std::vector<std::uint32_t> items;
    OpId next = 1;
    int enqs = 0, deqs = 0;
    std::vector<Frame> frames;
  };

  explicit HwQueueModel(HwQueueConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.max_enqs < 0) cfg_.max_enqs = cfg_.capacity;
    if (cfg_.max_enqs > cfg_.capacity) throw ContractViolation("hw queue: more enqueues than capacity");
    values_ = symbol_ids(cfg_.values);
  }

  State initial() const {
    State s;
    s.items.assign(static_cast<std::size_t>(cfg_.capacity), 0);
    return s;
  }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    static const Symbol enq("enq"), deq("deq");
    std::vector<std::pair<Action, State>> out;
    const bool room = static_cast<int>(s.frames.size()) < cfg_.threads;
    if (room && s.enqs < cfg_.max_enqs) {
      for (auto v : values_) {
        State t = s;
        t.frames.push_back({s.next, Reserve, v, 0, 0, 0});
        ++t.next;
        ++t.enqs;
        out.emplace_back(Action::call(enq, symbol_of(v), s.next), std::move(t));
      }
    }
    if (room && s.deqs < cfg_.max_deqs) {
      State t = s;
      t.frames.push_back({s.next, ReadBack, 0, 0, 0, 0});
      ++t.next;
      ++t.deqs;
      out.emplace_back(Action::call(deq, values::unit(), s.next), std::move(t));
    }
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const Frame& f = s.frames[i];
      State t = s;
      Frame& g = t.frames[i];
      switch (f.pc) {
        case Reserve:
          g.index = t.back++;
          g.pc = Write;
          out.emplace_back(Action::internal(label(cfg_.prefix, "reserve", f.op)), std::move(t));
          break;
        case Write:
          t.items[static_cast<std::size_t>(f.index)] = f.arg;
          g.pc = EnqDone;
          out.emplace_back(Action::internal(label(cfg_.prefix, "write", f.op)), std::move(t));
          break;
        case EnqDone:
          t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
          out.emplace_back(Action::ret(enq, values::ok(), f.op), std::move(t));
          break;
        case ReadBack:
          g.range = s.back;
          g.index = 0;
          g.pc = s.back == 0 ? ReadBack : Sweep;
          out.emplace_back(Action::internal(label(cfg_.prefix, "read_back", f.op)), std::move(t));
          break;
        case Sweep: {
          auto& cell = t.items[static_cast<std::size_t>(f.index)];
          if (cell) {
            g.result = cell;
            cell = 0;
            g.pc = DeqDone;
          } else if (f.index + 1 == f.range) {
            g.pc = ReadBack;
          } else {
            ++g.index;
          }
          out.emplace_back(Action::internal(label(cfg_.prefix, "swap", f.op)), std::move(t));
          break;
        }
        case DeqDone:
          t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
          out.emplace_back(Action::ret(deq, symbol_of(f.result), f.op), std::move(t));
          break;
      }
    }
    return out;
  }

  std::string key(const State& s) const {
    KeyWriter w;
    w.tag("back=").num(s.back).tag("items=").cells(s.items).tag(";n=").num(s.next).num(s.enqs).num(s.deqs);
    for (const auto& f : s.frames) {
      // index/range are dead while reading back
      const bool reading = f.pc == ReadBack;
      w.tag("{").num(f.op).num(f.pc).sym(f.arg).num(reading ? 0 : f.index).num(reading ? 0 : f.range).sym(f.result);
      w.tag("}");
    }
    return std::move(w).str();
  }

  const HwQueueConfig& config() const { return cfg_; }

 private:
  HwQueueConfig cfg_;
  std::vector<std::uint32_t> values_;
};

inline Lts hw_queue(const HwQueueConfig& cfg, const Budget& budget = {}) {
  return materialize(HwQueueModel(cfg), budget);
}

}  // namespace conch::objects
