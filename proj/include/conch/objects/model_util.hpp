#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "conch/action.hpp"
#include "conch/symbol.hpp"

namespace conch::objects {

inline std::string_view text(std::uint32_t symbol_id) {
  return conch::detail::SymbolTable::instance().lookup(symbol_id);
}

inline Symbol symbol_of(std::uint32_t symbol_id) { return Symbol(text(symbol_id)); }

/// Builds canonical state keys. Null symbols (id 0) print as `_`.
class KeyWriter {
 public:
  KeyWriter& tag(std::string_view t) {
    out_ += t;
    return *this;
  }
  KeyWriter& num(long long v) {
    out_ += std::to_string(v);
    out_ += ',';
    return *this;
  }
  KeyWriter& sym(std::uint32_t id) {
    out_ += id ? text(id) : std::string_view("_");
    out_ += ',';
    return *this;
  }
  KeyWriter& cells(const std::vector<std::uint32_t>& v) {
    out_ += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out_ += ',';
      out_ += v[i] ? text(v[i]) : std::string_view("_");
    }
    out_ += ']';
    return *this;
  }
  std::string str() && { return std::move(out_); }
  const std::string& str() const& { return out_; }

 private:
  std::string out_;
};

inline std::vector<std::uint32_t> symbol_ids(const std::vector<std::string>& xs) {
  std::vector<std::uint32_t> out;
  for (const auto& x : xs) out.push_back(Symbol(x).id());
  return out;
}

inline std::string label(std::string_view prefix, std::string_view step, OpId k) {
  return std::string(prefix) + "." + std::string(step) + "(" + std::to_string(k) + ")";
}

}  // namespace conch::objects
