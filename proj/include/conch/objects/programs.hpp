#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "conch/lts.hpp"
#include "conch/objects/model_util.hpp"

namespace conch::objects {

/// Values a program accepts on a return; it must cover everything the
/// object can answer.
inline std::vector<std::string> default_return_domain() { return {"0", "1", "2", "EMPTY", "OK"}; }

/// Three-thread stack client:
///   T1: a = push(0); low1 = pop()
///   T2: b = push(1); low2 = pop()
///   T3: assume a == b == OK; push(2); high = highInput()
/// When all threads finish the program emits lowObs(low1,low2,high) and stops
/// in a state named done(l1=..,l2=..,high=..).
class Fig1Program {
 public:
  struct State {
    std::array<int, 3> pc{0, 0, 0};
    std::array<OpId, 3> op{0, 0, 0};
    std::uint32_t a = 0, b = 0, low1 = 0, low2 = 0, high = 0;
    OpId next = 1;
    bool finished = false;
  };

  explicit Fig1Program(std::vector<std::string> return_domain = default_return_domain())
      : domain_(symbol_ids(return_domain)) {}

  State initial() const { return {}; }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    static const Symbol push("push"), pop("pop");
    std::vector<std::pair<Action, State>> out;
    if (s.finished) return out;
    auto call = [&](int t, Symbol m, Symbol v) {
      State n = s;
      n.op[t] = s.next;
      ++n.next;
      ++n.pc[t];
      out.emplace_back(Action::call(m, v, s.next), std::move(n));
    };
    auto rets = [&](int t, Symbol m, auto store) {
      for (auto v : domain_) {
        State n = s;
        ++n.pc[t];
        store(n, v);
        out.emplace_back(Action::ret(m, symbol_of(v), s.op[t]), std::move(n));
      }
    };
    for (int t = 0; t < 2; ++t) {
      switch (s.pc[t]) {
        case 0: call(t, push, values::of(t)); break;
        case 1: rets(t, push, [t](State& n, std::uint32_t v) { (t == 0 ? n.a : n.b) = v; }); break;
        case 2: call(t, pop, values::unit()); break;
        case 3: rets(t, pop, [t](State& n, std::uint32_t v) { (t == 0 ? n.low1 : n.low2) = v; }); break;
        default: break;
      }
    }
    const auto ok = values::ok().id();
    switch (s.pc[2]) {
      case 0:
        if (s.a == ok && s.b == ok) call(2, push, values::of(2));
        break;
      case 1: rets(2, push, [](State&, std::uint32_t) {}); break;
      case 2:
        for (int bit = 0; bit < 2; ++bit) {
          State n = s;
          n.high = values::of(bit).id();
          ++n.pc[2];
          out.emplace_back(Action::program("highInput(" + std::to_string(bit) + ")"), std::move(n));
        }
        break;
      default: break;
    }
    if (s.pc[0] == 4 && s.pc[1] == 4 && s.pc[2] == 3) {
      State n = s;
      n.finished = true;
      out.emplace_back(Action::program("lowObs(" + std::string(text(s.low1)) + "," + std::string(text(s.low2)) + "," +
                                       std::string(text(s.high)) + ")"),
                       std::move(n));
    }
    return out;
  }

  std::string key(const State& s) const {
    if (s.finished)
      return "done(l1=" + std::string(text(s.low1)) + ",l2=" + std::string(text(s.low2)) +
             ",high=" + std::string(text(s.high)) + ")";
    KeyWriter w;
    w.tag("fig1{");
    for (int t = 0; t < 3; ++t) w.num(s.pc[t]).num(s.op[t]);
    w.sym(s.a).sym(s.b).sym(s.low1).sym(s.low2).sym(s.high).num(s.next).tag("}");
    return std::move(w).str();
  }

 private:
  std::vector<std::uint32_t> domain_;
};

/// Observation at a terminal state of a Fig1Program product.
struct Fig1Outcome {
  std::string low1, low2, high;
};

/// Parses the program half of a product state name; nullopt unless the
/// program has terminated.
inline std::optional<Fig1Outcome> fig1_outcome(const std::string& state_name) {
  const std::string program = state_name.substr(0, state_name.find("||"));
  static const std::string head = "done(l1=";
  if (program.rfind(head, 0) != 0) return std::nullopt;
  auto l2 = program.find(",l2=");
  auto hi = program.find(",high=");
  if (l2 == std::string::npos || hi == std::string::npos || program.back() != ')') return std::nullopt;
  return Fig1Outcome{program.substr(head.size(), l2 - head.size()), program.substr(l2 + 4, hi - l2 - 4),
                     program.substr(hi + 6, program.size() - hi - 7)};
}

/// Two-thread snapshot client:
///   U: b = coin(); update(1,b); update(2,b)
///   S: r = scan(); obs(r)
/// Program actions are coin(b) and obs(r).
class SnapshotClientProgram {
 public:
  struct State {
    int upc = 0, spc = 0;
    OpId uop = 0, sop = 0;
    std::uint32_t coin = 0;
    std::uint32_t seen = 0;
    OpId next = 1;
  };

  /// `results` lists the scan results the program accepts.
  SnapshotClientProgram(std::vector<std::string> results, int index_base = 1)
      : results_(symbol_ids(results)), base_(index_base) {}

  State initial() const { return {}; }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    static const Symbol update("update"), scan("scan");
    std::vector<std::pair<Action, State>> out;
    switch (s.upc) {
      case 0:
        for (int bit = 0; bit < 2; ++bit) {
          State n = s;
          n.coin = values::of(bit).id();
          n.upc = 1;
          out.emplace_back(Action::program("coin(" + std::to_string(bit) + ")"), std::move(n));
        }
        break;
      case 1:
      case 3: {
        State n = s;
        n.uop = s.next;
        ++n.next;
        ++n.upc;
        const int cell = base_ + (s.upc == 1 ? 0 : 1);
        out.emplace_back(
            Action::call(update, Symbol("(" + std::to_string(cell) + "," + std::string(text(s.coin)) + ")"), s.next),
            std::move(n));
        break;
      }
      case 2:
      case 4: {
        State n = s;
        ++n.upc;
        out.emplace_back(Action::ret(update, values::ok(), s.uop), std::move(n));
        break;
      }
      default: break;
    }
    switch (s.spc) {
      case 0: {
        State n = s;
        n.sop = s.next;
        ++n.next;
        n.spc = 1;
        out.emplace_back(Action::call(scan, values::unit(), s.next), std::move(n));
        break;
      }
      case 1:
        for (auto r : results_) {
          State n = s;
          n.seen = r;
          n.spc = 2;
          out.emplace_back(Action::ret(scan, symbol_of(r), s.sop), std::move(n));
        }
        break;
      case 2: {
        State n = s;
        n.spc = 3;
        out.emplace_back(Action::program("obs(" + std::string(text(s.seen)) + ")"), std::move(n));
        break;
      }
      default: break;
    }
    return out;
  }

  std::string key(const State& s) const {
    KeyWriter w;
    w.tag("client{").num(s.upc).num(s.spc).num(s.uop).num(s.sop).sym(s.coin).sym(s.seen).num(s.next).tag("}");
    return std::move(w).str();
  }

 private:
  std::vector<std::uint32_t> results_;
  int base_;
};

}  // namespace conch::objects
