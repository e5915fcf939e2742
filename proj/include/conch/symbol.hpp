#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace conch {

namespace detail {

// Process-wide intern table. Ids are stable for the lifetime of the process;
// strings live in a deque so views handed out never dangle.
class SymbolTable {
 public:
  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }

  std::uint32_t intern(std::string_view text) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = index_.find(text); it != index_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    if (auto it = index_.find(text); it != index_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(strings_.size());
    strings_.emplace_back(text);
    index_.emplace(strings_.back(), id);
    return id;
  }

  std::string_view lookup(std::uint32_t id) const {
    std::shared_lock lock(mutex_);
    return strings_[id];
  }

 private:
  SymbolTable() { intern(""); }

  mutable std::shared_mutex mutex_;
  std::deque<std::string> strings_;
  std::unordered_map<std::string_view, std::uint32_t> index_;
};

}  // namespace detail

/// Interned string. Equality and hashing are by id; ordering is by text so
/// that sorted outputs do not depend on interning order.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string_view text)
      : id_(detail::SymbolTable::instance().intern(text)) {}

  std::string_view str() const { return detail::SymbolTable::instance().lookup(id_); }
  std::uint32_t id() const { return id_; }
  bool empty() const { return id_ == 0; }

  friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
  friend std::strong_ordering operator<=>(Symbol a, Symbol b) {
    if (a.id_ == b.id_) return std::strong_ordering::equal;
    return a.str().compare(b.str()) < 0 ? std::strong_ordering::less
                                        : std::strong_ordering::greater;
  }

 private:
  std::uint32_t id_ = 0;
};

}  // namespace conch

template <>
struct std::hash<conch::Symbol> {
  std::size_t operator()(conch::Symbol s) const noexcept { return std::hash<std::uint32_t>{}(s.id()); }
};
