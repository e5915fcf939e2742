#pragma once

#include <algorithm>
#include <climits>
#include <string>
#include <vector>

#include "conch/history.hpp"
#include "conch/lts.hpp"
#include "conch/objects/model_util.hpp"
#include "conch/spec.hpp"

namespace conch::objects {

/// Full keys states by the literal pair (h, hs). Quotient keys them by the
/// spec state, the opId counter and the pending frames, which is bisimilar
/// and much smaller.
enum class AtomicEncoding { Full, Quotient };

struct AtomicConfig {
  int max_ops = 3;
  int max_pending = INT_MAX;
  AtomicEncoding encoding = AtomicEncoding::Full;
  std::string prefix = "atomic";
};

/// The atomic object of a sequential spec, with internal lin(k) actions.
class AtomicModel {
 public:
  struct Frame {
    OpId op = 0;
    Symbol method, arg;
    bool linearized = false;
    Symbol ret;
  };
  struct State {
    History h, hs;
    SpecState spec;
    OpId next = 1;
    std::vector<Frame> pending;
  };

  AtomicModel(SequentialSpec spec, AtomicConfig cfg) : spec_(std::move(spec)), cfg_(std::move(cfg)) {
    if (cfg_.max_ops < 0) throw ContractViolation("max_ops must be non-negative");
  }

  State initial() const {
    State s;
    s.spec = spec_.initial;
    return s;
  }

  std::vector<std::pair<Action, State>> successors(const State& s) const {
    std::vector<std::pair<Action, State>> out;
    if (static_cast<int>(s.next) - 1 < cfg_.max_ops && static_cast<int>(s.pending.size()) < cfg_.max_pending) {
      for (const auto& op : spec_.operations) {
        State t = s;
        Action a = Action::call(op.method, op.arg, s.next);
        t.h.push_back(a);
        t.pending.push_back({s.next, op.method, op.arg, false, {}});
        ++t.next;
        out.emplace_back(a, std::move(t));
      }
    }
    for (std::size_t i = 0; i < s.pending.size(); ++i) {
      const Frame& f = s.pending[i];
      if (!f.linearized) {
        State t = s;
        auto [next, ret] = spec_.apply(s.spec, f.method, f.arg);
        t.spec = std::move(next);
        t.pending[i].linearized = true;
        t.pending[i].ret = ret;
        t.hs.push_back(Action::call(f.method, f.arg, f.op));
        t.hs.push_back(Action::ret(f.method, ret, f.op));
        out.emplace_back(Action::internal(lin_label(f.op)), std::move(t));
      } else {
        State t = s;
        Action a = Action::ret(f.method, f.ret, f.op);
        t.h.push_back(a);
        t.pending.erase(t.pending.begin() + static_cast<std::ptrdiff_t>(i));
        out.emplace_back(a, std::move(t));
      }
    }
    return out;
  }

  std::string key(const State& s) const {
    KeyWriter w;
    if (cfg_.encoding == AtomicEncoding::Full) {
      w.tag("h=");
      for (const auto& a : s.h) w.tag(a.is_call() ? "c" : "r").sym(a.method.id()).sym(a.value.id()).num(a.op);
      w.tag(";hs=");
      for (std::size_t i = 0; i < s.hs.size(); i += 2) w.num(s.hs[i].op).sym(s.hs[i + 1].value.id());
      return std::move(w).str();
    }
    w.tag("q=").cells(s.spec).tag(";n=").num(s.next).tag(";");
    for (const auto& f : s.pending) {
      w.tag("{").num(f.op).sym(f.method.id()).sym(f.arg.id());
      if (f.linearized) w.tag("lin:").sym(f.ret.id());
      w.tag("}");
    }
    return std::move(w).str();
  }

  std::string lin_label(OpId k) const { return label(cfg_.prefix, "lin", k); }
  const SequentialSpec& spec() const { return spec_; }
  const AtomicConfig& config() const { return cfg_; }

 private:
  SequentialSpec spec_;
  AtomicConfig cfg_;
};

inline Explored<AtomicModel> explore_atomic(const SequentialSpec& spec, AtomicConfig cfg, const Budget& budget = {}) {
  return explore(AtomicModel(spec, std::move(cfg)), budget);
}

/// Atomic-object LTS truncated to at most `max_ops` invocations.
inline Lts atomic_lts(const SequentialSpec& spec, int max_ops, AtomicEncoding encoding = AtomicEncoding::Full,
                      const Budget& budget = {}) {
  if (max_ops < 1) throw ContractViolation("max_ops must be at least 1");
  AtomicConfig cfg;
  cfg.max_ops = max_ops;
  cfg.encoding = encoding;
  return explore_atomic(spec, cfg, budget).lts;
}

}  // namespace conch::objects
