#pragma once

#include <iterator>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "conch/action.hpp"
#include "conch/error.hpp"
#include "conch/fsim.hpp"
#include "conch/lts.hpp"
#include "conch/sched.hpp"
#include "conch/strong_lin.hpp"

namespace conch::io {

using Json = nlohmann::ordered_json;

namespace detail {

// Character iterator that counts newlines as the parser consumes input.
class LineCountingIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  LineCountingIterator() = default;
  LineCountingIterator(const char* p, std::size_t* line) : p_(p), line_(line) {}
  reference operator*() const { return *p_; }
  LineCountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  LineCountingIterator operator++(int) {
    auto old = *this;
    ++*this;
    return old;
  }
  friend bool operator==(const LineCountingIterator& a, const LineCountingIterator& b) { return a.p_ == b.p_; }
  friend bool operator!=(const LineCountingIterator& a, const LineCountingIterator& b) { return a.p_ != b.p_; }

 private:
  const char* p_ = nullptr;
  std::size_t* line_ = nullptr;
};

}  // namespace detail

/// A parsed document plus the source line of every object and array, so that
/// semantic errors can point at the offending element.
class Document {
 public:
  explicit Document(const std::string& text) {
    std::size_t line = 1;
    detail::LineCountingIterator first(text.data(), &line), last(text.data() + text.size(), &line);
    try {
      root_ = Json::parse(first, last, [&](int, Json::parse_event_t event, Json&) {
        if (event == Json::parse_event_t::object_start || event == Json::parse_event_t::array_start)
          starts_.push_back(line);
        return true;
      });
    } catch (const Json::parse_error& e) {
      std::size_t err_line = 1;
      for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
        if (text[i] == '\n') ++err_line;
      std::string what = e.what();
      if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
      throw InputError("malformed JSON: " + what, err_line);
    }
    std::size_t next = 0;
    index(root_, next);
  }

  const Json& root() const { return root_; }

  /// Source line of a container node of this document (0 if unknown).
  std::size_t line_of(const Json& node) const {
    auto it = lines_.find(&node);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  void index(const Json& node, std::size_t& next) {
    if (!node.is_structured()) return;
    if (next < starts_.size()) lines_[&node] = starts_[next];
    ++next;
    for (const auto& child : node) index(child, next);
  }

  Json root_;
  std::vector<std::size_t> starts_;
  std::unordered_map<const Json*, std::size_t> lines_;
};

namespace detail {

[[noreturn]] inline void fail(const Document& doc, const Json& at, const std::string& what) {
  throw InputError(what, doc.line_of(at));
}

inline const Json& field(const Document& doc, const Json& obj, const char* name) {
  if (!obj.is_object()) fail(doc, obj, "expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) fail(doc, obj, std::string("missing field `") + name + "`");
  return *it;
}

inline std::string string_field(const Document& doc, const Json& obj, const char* name) {
  const Json& v = field(doc, obj, name);
  if (!v.is_string()) fail(doc, obj, std::string("field `") + name + "` must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline Json action_to_json(const Action& a) {
  Json j;
  j["kind"] = std::string(kind_name(a.kind));
  if (a.is_call_or_return()) {
    j["method"] = std::string(a.method.str());
    j["value"] = std::string(a.value.str());
    j["opId"] = a.op;
  } else {
    j["label"] = std::string(a.label.str());
  }
  return j;
}

inline Action action_from_json(const Document& doc, const Json& j) {
  const std::string kind = detail::string_field(doc, j, "kind");
  if (kind == "call" || kind == "ret") {
    const std::string method = detail::string_field(doc, j, "method");
    const std::string value = detail::string_field(doc, j, "value");
    const Json& op = detail::field(doc, j, "opId");
    if (!op.is_number_integer() || op.get<long long>() <= 0 || op.get<long long>() > 0xFFFFFFFFLL)
      detail::fail(doc, j, "`opId` must be a positive integer");
    const auto k = static_cast<OpId>(op.get<long long>());
    return kind == "call" ? Action::call(method, value, k) : Action::ret(method, value, k);
  }
  if (kind == "internal") return Action::internal(detail::string_field(doc, j, "label"));
  if (kind == "program") return Action::program(detail::string_field(doc, j, "label"));
  detail::fail(doc, j, "unknown action kind `" + kind + "`");
}

inline Json lts_to_json(const Lts& a) {
  Json j;
  j["states"] = Json::array();
  for (StateId s = 0; s < a.num_states(); ++s) j["states"].push_back(a.name(s));
  j["initial"] = a.name(a.initial());
  j["transitions"] = Json::array();
  for (StateId s = 0; s < a.num_states(); ++s)
    for (const auto& e : a.out(s))
      j["transitions"].push_back(
          Json{{"from", a.name(s)}, {"action", action_to_json(a.action(e.action))}, {"to", a.name(e.target)}});
  return j;
}

inline Lts lts_from_json(const std::string& text) {
  Document doc(text);
  const Json& root = doc.root();
  if (!root.is_object()) detail::fail(doc, root, "an LTS document must be a JSON object");
  const Json& states = detail::field(doc, root, "states");
  if (!states.is_array() || states.empty()) detail::fail(doc, root, "`states` must be a non-empty array");
  LtsBuilder b;
  for (const auto& s : states) {
    if (!s.is_string()) detail::fail(doc, states, "state names must be strings");
    const auto name = s.get<std::string>();
    if (b.has_state(name)) detail::fail(doc, states, "duplicate state `" + name + "`");
    b.add_state(name);
  }
  auto state = [&](const Json& at, const std::string& name) {
    if (!b.has_state(name)) detail::fail(doc, at, "unknown state `" + name + "`");
    return b.add_state(name);
  };
  b.set_initial(state(root, detail::string_field(doc, root, "initial")));
  const Json& ts = detail::field(doc, root, "transitions");
  if (!ts.is_array()) detail::fail(doc, root, "`transitions` must be an array");
  for (const auto& t : ts) {
    const StateId from = state(t, detail::string_field(doc, t, "from"));
    const StateId to = state(t, detail::string_field(doc, t, "to"));
    b.add_transition(from, action_from_json(doc, detail::field(doc, t, "action")), to);
  }
  return std::move(b).build();
}

inline Json relation_to_json(const SimRelation& r, const Lts& a1, const Lts& a2) {
  Json j = Json::array();
  for (const auto& [s1, s2] : r.pairs) j.push_back(Json::array({a1.name(s1), a2.name(s2)}));
  return j;
}

inline SimRelation relation_from_json(const std::string& text, const Lts& a1, const Lts& a2,
                                      Gamma gamma = Gamma::calls_returns()) {
  Document doc(text);
  const Json& root = doc.root();
  if (!root.is_array()) detail::fail(doc, root, "a relation must be a JSON array of [state, state] pairs");
  SimRelation r;
  r.gamma = gamma;
  r.left_size = a1.num_states();
  r.right_size = a2.num_states();
  for (const auto& p : root) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
      detail::fail(doc, p.is_structured() ? p : root, "each pair must be [\"state1\", \"state2\"]");
    auto s1 = a1.find_state(p[0].get<std::string>());
    auto s2 = a2.find_state(p[1].get<std::string>());
    if (!s1) detail::fail(doc, p, "unknown state `" + p[0].get<std::string>() + "` of the first LTS");
    if (!s2) detail::fail(doc, p, "unknown state `" + p[1].get<std::string>() + "` of the second LTS");
    r.pairs.emplace_back(*s1, *s2);
  }
  r.normalize();
  return r;
}

inline Json decision_to_json(const Decision& d) {
  Json j;
  switch (d.kind) {
    case Decision::Kind::Yield:
      j["decision"] = "yield";
      if (!d.offered.empty()) {
        j["offered"] = Json::array();
        for (const auto& a : d.offered) j["offered"].push_back(action_to_json(a));
      }
      break;
    case Decision::Kind::Pick:
      j["decision"] = "pick";
      j["action"] = action_to_json(d.action);
      break;
    case Decision::Kind::Stop: j["decision"] = "stop"; break;
  }
  return j;
}

inline Decision decision_from_json(const Document& doc, const Json& j) {
  const std::string kind = detail::string_field(doc, j, "decision");
  if (kind == "stop") return Decision::stop();
  if (kind == "pick") return Decision::pick(action_from_json(doc, detail::field(doc, j, "action")));
  if (kind == "yield") {
    std::vector<Action> offered;
    if (auto it = j.find("offered"); it != j.end()) {
      if (!it->is_array()) detail::fail(doc, j, "`offered` must be an array of actions");
      for (const auto& a : *it) offered.push_back(action_from_json(doc, a));
    }
    return Decision::yield(std::move(offered));
  }
  detail::fail(doc, j, "unknown decision `" + kind + "`");
}

inline Json strategy_to_json(const Strategy& s, const Lts& a) {
  Json j = Json::object();
  for (const auto& [q, d] : s) j[a.name(q)] = decision_to_json(d);
  return j;
}

inline Strategy strategy_from_json(const std::string& text, const Lts& a) {
  Document doc(text);
  const Json& root = doc.root();
  if (!root.is_object()) detail::fail(doc, root, "a strategy must be a JSON object keyed by state name");
  Strategy s;
  for (const auto& [name, d] : root.items()) {
    auto q = a.find_state(name);
    if (!q) detail::fail(doc, d, "unknown state `" + name + "`");
    s.emplace(*q, decision_from_json(doc, d));
  }
  return s;
}

inline Json trace_to_json(const Trace& t) {
  Json j = Json::array();
  for (const auto& a : t) j.push_back(action_to_json(a));
  return j;
}

inline Trace trace_from_json(const Document& doc, const Json& j) {
  if (!j.is_array()) detail::fail(doc, j, "expected an array of actions");
  Trace t;
  for (const auto& a : j) t.push_back(action_from_json(doc, a));
  return t;
}

/// Witness file: array of {"trace": [...], "linearization": [...]}.
inline Json witness_to_json(const StrongLinWitness& w) {
  Json j = Json::array();
  for (const auto& [t, h] : w) j.push_back(Json{{"trace", trace_to_json(t)}, {"linearization", trace_to_json(h)}});
  return j;
}

inline StrongLinWitness witness_from_json(const std::string& text) {
  Document doc(text);
  const Json& root = doc.root();
  if (!root.is_array()) detail::fail(doc, root, "a witness must be a JSON array of {trace, linearization} entries");
  StrongLinWitness w;
  for (const auto& entry : root) {
    const Json& tj = detail::field(doc, entry, "trace");
    const Json& hj = detail::field(doc, entry, "linearization");
    if (!tj.is_array() || !hj.is_array()) detail::fail(doc, entry, "`trace` and `linearization` must be arrays");
    Trace t = trace_from_json(doc, tj);
    History h = trace_from_json(doc, hj);
    if (!w.emplace(std::move(t), std::move(h)).second) detail::fail(doc, entry, "duplicate trace in witness");
  }
  return w;
}

}  // namespace conch::io
