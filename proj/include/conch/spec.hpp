#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "conch/action.hpp"
#include "conch/error.hpp"
#include "conch/history.hpp"

namespace conch {

/// Sequential object state as a vector of interned symbol ids; the layout is
/// owned by the spec that produced it.
using SpecState = std::vector<std::uint32_t>;

struct SpecOperation {
  Symbol method;
  Symbol arg;
  friend bool operator==(const SpecOperation&, const SpecOperation&) = default;
};

/// Deterministic, total sequential specification over finite domains.
struct SequentialSpec {
  std::string name;
  SpecState initial;
  std::vector<SpecOperation> operations;  // every (method, argument) a client may invoke
  std::vector<Symbol> return_values;      // finite return-value domain
  std::function<std::pair<SpecState, Symbol>(const SpecState&, Symbol method, Symbol arg)> apply;

  bool has_method(Symbol m) const {
    for (const auto& op : operations)
      if (op.method == m) return true;
    return false;
  }
};

inline std::string show_state(const SpecState& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += detail::SymbolTable::instance().lookup(s[i]);
  }
  return out + "]";
}

/// True iff `h` is sequential and obtained by iterating `apply` from the
/// initial state, i.e. h is in Seq.
inline bool is_legal_sequential(const SequentialSpec& spec, const History& h) {
  if (!is_sequential(h) || !is_well_formed(h)) return false;
  SpecState state = spec.initial;
  for (std::size_t i = 0; i < h.size(); i += 2) {
    auto [next, ret] = spec.apply(state, h[i].method, h[i].value);
    if (ret != h[i + 1].value) return false;
    state = std::move(next);
  }
  return true;
}

namespace specs {

namespace detail {
inline Symbol sym(std::uint32_t id) {
  // Rebuild a Symbol from an id produced by Symbol::id().
  return Symbol(conch::detail::SymbolTable::instance().lookup(id));
}
inline std::vector<Symbol> symbols(const std::vector<std::string>& xs) {
  std::vector<Symbol> out;
  for (const auto& x : xs) out.emplace_back(x);
  return out;
}
[[noreturn]] inline void bad_method(const std::string& spec, Symbol m) {
  throw ContractViolation(spec + ": unknown method " + std::string(m.str()));
}
}  // namespace detail

inline SequentialSpec register_spec(const std::vector<std::string>& values, const std::string& initial = "0") {
  SequentialSpec s;
  s.name = "register";
  s.initial = {Symbol(initial).id()};
  const Symbol write("write"), read("read");
  for (const auto& v : detail::symbols(values)) s.operations.push_back({write, v});
  s.operations.push_back({read, values::unit()});
  s.return_values = detail::symbols(values);
  s.return_values.push_back(values::ok());
  s.apply = [write, read](const SpecState& st, Symbol m, Symbol arg) -> std::pair<SpecState, Symbol> {
    if (m == write) return {SpecState{arg.id()}, values::ok()};
    if (m == read) return {st, detail::sym(st.at(0))};
    detail::bad_method("register", m);
  };
  return s;
}

inline SequentialSpec stack_spec(const std::vector<std::string>& values) {
  SequentialSpec s;
  s.name = "stack";
  const Symbol push("push"), pop("pop");
  for (const auto& v : detail::symbols(values)) s.operations.push_back({push, v});
  s.operations.push_back({pop, values::unit()});
  s.return_values = detail::symbols(values);
  s.return_values.push_back(values::ok());
  s.return_values.push_back(values::empty());
  s.apply = [push, pop](const SpecState& st, Symbol m, Symbol arg) -> std::pair<SpecState, Symbol> {
    if (m == push) {
      SpecState next = st;
      next.push_back(arg.id());
      return {std::move(next), values::ok()};
    }
    if (m == pop) {
      if (st.empty()) return {st, values::empty()};
      SpecState next(st.begin(), st.end() - 1);
      return {std::move(next), detail::sym(st.back())};
    }
    detail::bad_method("stack", m);
  };
  return s;
}

inline SequentialSpec queue_spec(const std::vector<std::string>& values) {
  SequentialSpec s;
  s.name = "queue";
  const Symbol enq("enq"), deq("deq");
  for (const auto& v : detail::symbols(values)) s.operations.push_back({enq, v});
  s.operations.push_back({deq, values::unit()});
  s.return_values = detail::symbols(values);
  s.return_values.push_back(values::ok());
  s.return_values.push_back(values::empty());
  s.apply = [enq, deq](const SpecState& st, Symbol m, Symbol arg) -> std::pair<SpecState, Symbol> {
    if (m == enq) {
      SpecState next = st;
      next.push_back(arg.id());
      return {std::move(next), values::ok()};
    }
    if (m == deq) {
      if (st.empty()) return {st, values::empty()};
      SpecState next(st.begin() + 1, st.end());
      return {std::move(next), detail::sym(st.front())};
    }
    detail::bad_method("queue", m);
  };
  return s;
}

/// Formats an update argument `(i,d)`.
inline Symbol update_arg(long long index, const std::string& value) {
  return Symbol("(" + std::to_string(index) + "," + value + ")");
}

/// Formats an array value `[a,b,...]`.
inline Symbol array_value(const std::vector<std::uint32_t>& cells) { return Symbol(show_state(cells)); }

/// Atomic snapshot over `n` cells. Cells are addressed from `index_base`
/// (1 by default, matching the scan pseudo-code's `for i = 1 to n`).
inline SequentialSpec snapshot_spec(int n, const std::vector<std::string>& values, const std::string& initial = "0",
                                    int index_base = 1) {
  SequentialSpec s;
  s.name = "snapshot";
  s.initial.assign(static_cast<std::size_t>(n), Symbol(initial).id());
  const Symbol update("update"), scan("scan");
  struct Decoded {
    std::size_t cell;
    std::uint32_t value;
  };
  auto table = std::make_shared<std::unordered_map<std::uint32_t, Decoded>>();
  for (int i = 0; i < n; ++i)
    for (const auto& v : values) {
      Symbol arg = update_arg(index_base + i, v);
      s.operations.push_back({update, arg});
      (*table)[arg.id()] = {static_cast<std::size_t>(i), Symbol(v).id()};
    }
  s.operations.push_back({scan, values::unit()});
  // every array over the domain is a possible scan result
  std::vector<std::uint32_t> cells(static_cast<std::size_t>(n), 0);
  std::vector<std::uint32_t> ids;
  for (const auto& v : values) ids.push_back(Symbol(v).id());
  std::function<void(std::size_t)> all = [&](std::size_t i) {
    if (i == cells.size()) {
      s.return_values.push_back(array_value(cells));
      return;
    }
    for (auto id : ids) {
      cells[i] = id;
      all(i + 1);
    }
  };
  all(0);
  s.return_values.push_back(values::ok());
  s.apply = [update, scan, table](const SpecState& st, Symbol m, Symbol arg) -> std::pair<SpecState, Symbol> {
    if (m == update) {
      auto it = table->find(arg.id());
      if (it == table->end()) throw ContractViolation("snapshot: bad update argument " + std::string(arg.str()));
      SpecState next = st;
      next[it->second.cell] = it->second.value;
      return {std::move(next), values::ok()};
    }
    if (m == scan) return {st, array_value(st)};
    detail::bad_method("snapshot", m);
  };
  return s;
}

}  // namespace specs
}  // namespace conch
