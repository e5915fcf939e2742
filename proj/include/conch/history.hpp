#pragma once

#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "conch/action.hpp"
#include "conch/error.hpp"

namespace conch {

/// A sequence of call/return actions.
using History = std::vector<Action>;

/// Call/return projection of a trace.
inline History hist(const Trace& t) { return project(t, Gamma::calls_returns()); }

/// Returns a description of the first well-formedness violation, if any.
inline std::optional<std::string> well_formedness_error(const History& h) {
  std::unordered_map<OpId, const Action*> calls;
  std::unordered_set<OpId> returned;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Action& a = h[i];
    const auto where = " at position " + std::to_string(i);
    if (!a.is_call_or_return()) return "non call/return action " + a.to_string() + where;
    if (a.op == 0) return "operation identifiers must be positive" + where;
    if (a.is_call()) {
      if (!calls.emplace(a.op, &a).second) return "operation identifier " + std::to_string(a.op) + " reused" + where;
    } else {
      auto it = calls.find(a.op);
      if (it == calls.end()) return "return without earlier call" + where;
      if (it->second->method != a.method) return "return method does not match its call" + where;
      if (!returned.insert(a.op).second) return "second return for operation " + std::to_string(a.op) + where;
    }
  }
  return std::nullopt;
}

inline bool is_well_formed(const History& h) { return !well_formedness_error(h); }

inline void require_well_formed(const History& h) {
  if (auto err = well_formedness_error(h)) throw InputError("ill-formed history: " + *err);
}

/// Every call is immediately followed by its matching return.
inline bool is_sequential(const History& h) {
  if (h.size() % 2) return false;
  for (std::size_t i = 0; i < h.size(); i += 2)
    if (!h[i].is_call() || !h[i + 1].is_return() || h[i].op != h[i + 1].op || h[i].method != h[i + 1].method)
      return false;
  return true;
}

/// Line format: `call m v k` / `ret m v k`; blank lines and '#' comments are ignored.
inline History parse_history(std::istream& in) {
  History h;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string kind, method, value, op, extra;
    if (!(words >> kind)) continue;
    if (!(words >> method >> value >> op) || (words >> extra))
      throw InputError("expected `call|ret <method> <value> <opId>`", lineno);
    OpId k = 0;
    try {
      std::size_t used = 0;
      long long parsed = std::stoll(op, &used);
      if (used != op.size() || parsed <= 0 || parsed > 0xFFFFFFFFLL) throw std::invalid_argument(op);
      k = static_cast<OpId>(parsed);
    } catch (const std::exception&) {
      throw InputError("operation identifier must be a positive integer, got `" + op + "`", lineno);
    }
    if (kind == "call") {
      h.push_back(Action::call(method, value, k));
    } else if (kind == "ret") {
      h.push_back(Action::ret(method, value, k));
    } else {
      throw InputError("unknown action kind `" + kind + "`", lineno);
    }
    if (auto err = well_formedness_error(h)) throw InputError(*err, lineno);
  }
  return h;
}

inline History parse_history(const std::string& text) {
  std::istringstream in(text);
  return parse_history(in);
}

inline std::string format_history(const History& h) {
  std::string out;
  for (const auto& a : h) {
    out += std::string(kind_name(a.kind)) + " " + std::string(a.method.str()) + " " + std::string(a.value.str()) +
           " " + std::to_string(a.op) + "\n";
  }
  return out;
}

}  // namespace conch
