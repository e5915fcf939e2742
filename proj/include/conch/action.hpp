#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "conch/symbol.hpp"

namespace conch {

enum class ActionKind : std::uint8_t { Call, Return, Internal, Program };

inline std::string_view kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Call: return "call";
    case ActionKind::Return: return "ret";
    case ActionKind::Internal: return "internal";
    case ActionKind::Program: return "program";
  }
  return "?";
}

using OpId = std::uint32_t;

/// Well-known value tokens.
namespace values {
inline Symbol ok() { static const Symbol s("OK"); return s; }
inline Symbol empty() { static const Symbol s("EMPTY"); return s; }
inline Symbol unit() { static const Symbol s("_"); return s; }
inline Symbol of(long long v) { return Symbol(std::to_string(v)); }
}  // namespace values

/// A transition label. Call/Return carry (method, value, op); Internal and
/// Program carry an opaque label. Equality is structural.
struct Action {
  ActionKind kind = ActionKind::Internal;
  Symbol method;
  Symbol value;
  OpId op = 0;
  Symbol label;

  static Action call(Symbol m, Symbol v, OpId k) { return {ActionKind::Call, m, v, k, {}}; }
  static Action ret(Symbol m, Symbol v, OpId k) { return {ActionKind::Return, m, v, k, {}}; }
  static Action call(std::string_view m, std::string_view v, OpId k) {
    return call(Symbol(m), Symbol(v), k);
  }
  static Action ret(std::string_view m, std::string_view v, OpId k) {
    return ret(Symbol(m), Symbol(v), k);
  }
  static Action internal(std::string_view l) { return {ActionKind::Internal, {}, {}, 0, Symbol(l)}; }
  static Action program(std::string_view l) { return {ActionKind::Program, {}, {}, 0, Symbol(l)}; }

  bool is_call() const { return kind == ActionKind::Call; }
  bool is_return() const { return kind == ActionKind::Return; }
  bool is_call_or_return() const { return is_call() || is_return(); }
  bool is_internal() const { return kind == ActionKind::Internal; }
  bool is_program() const { return kind == ActionKind::Program; }

  friend bool operator==(const Action&, const Action&) = default;
  friend std::strong_ordering operator<=>(const Action& a, const Action& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.method <=> b.method; c != 0) return c;
    if (auto c = a.value <=> b.value; c != 0) return c;
    if (auto c = a.op <=> b.op; c != 0) return c;
    return a.label <=> b.label;
  }

  std::string to_string() const {
    switch (kind) {
      case ActionKind::Call:
      case ActionKind::Return:
        return std::string(kind_name(kind)) + "(" + std::string(method.str()) + "," +
               std::string(value.str()) + "," + std::to_string(op) + ")";
      case ActionKind::Internal: return "internal(" + std::string(label.str()) + ")";
      case ActionKind::Program: return "program(" + std::string(label.str()) + ")";
    }
    return {};
  }
};

struct ActionHash {
  std::size_t operator()(const Action& a) const noexcept {
    std::size_t h = static_cast<std::size_t>(a.kind);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(a.method.id());
    mix(a.value.id());
    mix(a.op);
    mix(a.label.id());
    return h;
  }
};

using Trace = std::vector<Action>;

/// Observable-action predicate, expressed as a set of action kinds.
class Gamma {
 public:
  constexpr Gamma() = default;
  static constexpr Gamma none() { return Gamma(0); }
  static constexpr Gamma all() { return Gamma(0xF); }
  static constexpr Gamma of(ActionKind k) { return Gamma(static_cast<std::uint8_t>(1u << static_cast<unsigned>(k))); }
  static constexpr Gamma calls_returns() { return of(ActionKind::Call) | of(ActionKind::Return); }
  static constexpr Gamma program() { return of(ActionKind::Program); }

  constexpr bool contains(ActionKind k) const { return mask_ & (1u << static_cast<unsigned>(k)); }
  constexpr bool contains(const Action& a) const { return contains(a.kind); }
  constexpr bool operator()(const Action& a) const { return contains(a); }

  friend constexpr Gamma operator|(Gamma a, Gamma b) { return Gamma(a.mask_ | b.mask_); }
  friend constexpr bool operator==(Gamma, Gamma) = default;

  std::string to_string() const {
    std::string out;
    for (auto k : {ActionKind::Call, ActionKind::Return, ActionKind::Internal, ActionKind::Program}) {
      if (!contains(k)) continue;
      if (!out.empty()) out += "+";
      out += kind_name(k);
    }
    return out.empty() ? "none" : out;
  }

 private:
  constexpr explicit Gamma(std::uint8_t m) : mask_(m) {}
  std::uint8_t mask_ = 0;
};

/// Maximal subsequence of `t` whose actions satisfy `gamma`.
template <class Pred>
Trace project(const Trace& t, const Pred& gamma) {
  Trace out;
  for (const auto& a : t)
    if (gamma(a)) out.push_back(a);
  return out;
}

inline std::string to_string(const Trace& t) {
  std::string out = "[";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ", ";
    out += t[i].to_string();
  }
  return out + "]";
}

}  // namespace conch

template <>
struct std::hash<conch::Action> : conch::ActionHash {};
