#pragma once

#include <algorithm>
#include <climits>
#include <string>
#include <vector>

#include "conch/lts.hpp"
#include "conch/objects/model_util.hpp"

namespace conch::objects {

struct RegisterConfig {
  std::vector<std::string> values{"0", "1"};
  std::string initial = "0";
  int max_ops = 2;
  int threads = INT_MAX;
  std::string prefix = "reg";
};

/// Register whose operations take effect at one internal step each
/// (read or write of the cell). Strongly linearizable.
class FixedLpRegisterModel {
 public:
  enum Pc : std::uint8_t { Pending, Done };
  struct Frame {
    OpId op = 0;
    bool write = false;
    Pc pc = Pending;
    std::uint32_t value = 0;  // write argument, or read result
  };
  struct State {
    std::uint32_t cell = 0;
    OpId next = 1;
    std::vector<Frame> frames;
  };

  explicit FixedLpRegisterModel(RegisterConfig cfg) : cfg_(std::move(cfg)), values_(symbol_ids(cfg_.values)) {}

  State initial() const {
    State s;
    s.cell = Symbol(cfg_.initial).id();
    return s;
  }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    static const Symbol write("write"), read("read");
    std::vector<std::pair<Action, State>> out;
    if (static_cast<int>(s.next) - 1 < cfg_.max_ops && static_cast<int>(s.frames.size()) < cfg_.threads) {
      for (auto v : values_) {
        State t = s;
        t.frames.push_back({s.next, true, Pending, v});
        ++t.next;
        out.emplace_back(Action::call(write, symbol_of(v), s.next), std::move(t));
      }
      State t = s;
      t.frames.push_back({s.next, false, Pending, 0});
      ++t.next;
      out.emplace_back(Action::call(read, values::unit(), s.next), std::move(t));
    }
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const Frame& f = s.frames[i];
      State t = s;
      if (f.pc == Pending) {
        if (f.write) {
          t.cell = f.value;
        } else {
          t.frames[i].value = s.cell;
        }
        t.frames[i].pc = Done;
        out.emplace_back(Action::internal(label(cfg_.prefix, f.write ? "store" : "load", f.op)), std::move(t));
      } else {
        t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
        out.emplace_back(Action::ret(f.write ? write : read, f.write ? values::ok() : symbol_of(f.value), f.op),
                         std::move(t));
      }
    }
    return out;
  }

  std::string key(const State& s) const {
    KeyWriter w;
    w.tag("cell=").sym(s.cell).tag("n=").num(s.next);
    for (const auto& f : s.frames) w.tag("{").num(f.op).num(f.write).num(f.pc).sym(f.value).tag("}");
    return std::move(w).str();
  }

 private:
  RegisterConfig cfg_;
  std::vector<std::uint32_t> values_;
};

/// Register whose read records every value the cell holds while the read is
/// pending and commits to one of them by a later internal choice step.
/// Linearizable, but the choice can be deferred past a concurrent write's
/// return, so no forward simulation to the atomic register exists.
class DeferredRegisterModel {
 public:
  enum Pc : std::uint8_t { Pending, Done };
  struct Frame {
    OpId op = 0;
    bool write = false;
    Pc pc = Pending;
    std::uint32_t value = 0;           // write argument, or chosen read result
    std::vector<std::uint32_t> seen;  // read: values observed, in order
  };
  struct State {
    std::uint32_t cell = 0;
    OpId next = 1;
    std::vector<Frame> frames;
  };

  explicit DeferredRegisterModel(RegisterConfig cfg) : cfg_(std::move(cfg)), values_(symbol_ids(cfg_.values)) {}

  State initial() const {
    State s;
    s.cell = Symbol(cfg_.initial).id();
    return s;
  }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    static const Symbol write("write"), read("read");
    std::vector<std::pair<Action, State>> out;
    if (static_cast<int>(s.next) - 1 < cfg_.max_ops && static_cast<int>(s.frames.size()) < cfg_.threads) {
      for (auto v : values_) {
        State t = s;
        t.frames.push_back({s.next, true, Pending, v, {}});
        ++t.next;
        out.emplace_back(Action::call(write, symbol_of(v), s.next), std::move(t));
      }
      State t = s;
      t.frames.push_back({s.next, false, Pending, 0, {s.cell}});
      ++t.next;
      out.emplace_back(Action::call(read, values::unit(), s.next), std::move(t));
    }
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const Frame& f = s.frames[i];
      if (f.pc == Done) {
        State t = s;
        t.frames.erase(t.frames.begin() + static_cast<std::ptrdiff_t>(i));
        out.emplace_back(Action::ret(f.write ? write : read, f.write ? values::ok() : symbol_of(f.value), f.op),
                         std::move(t));
      } else if (f.write) {
        State t = s;
        t.cell = f.value;
        t.frames[i].pc = Done;
        for (auto& g : t.frames)
          if (!g.write && g.pc == Pending && g.seen.back() != f.value) g.seen.push_back(f.value);
        out.emplace_back(Action::internal(label(cfg_.prefix, "store", f.op)), std::move(t));
      } else {
        std::vector<std::uint32_t> options = f.seen;
        std::sort(options.begin(), options.end());
        options.erase(std::unique(options.begin(), options.end()), options.end());
        for (auto v : options) {
          State t = s;
          t.frames[i].pc = Done;
          t.frames[i].value = v;
          t.frames[i].seen.clear();
          out.emplace_back(Action::internal(label(cfg_.prefix, "choose_" + std::string(text(v)), f.op)),
                           std::move(t));
        }
      }
    }
    return out;
  }

  std::string key(const State& s) const {
    KeyWriter w;
    w.tag("cell=").sym(s.cell).tag("n=").num(s.next);
    for (const auto& f : s.frames) {
      w.tag("{").num(f.op).num(f.write).num(f.pc).sym(f.value);
      for (auto v : f.seen) w.sym(v);
      w.tag("}");
    }
    return std::move(w).str();
  }

 private:
  RegisterConfig cfg_;
  std::vector<std::uint32_t> values_;
};

}  // namespace conch::objects
