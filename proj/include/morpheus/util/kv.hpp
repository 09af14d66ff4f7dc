// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MorpheusNet Authors

#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "morpheus/core/errors.hpp"

namespace morpheus {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Ordered `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; keys may repeat.
class KeyValues {
 public:
  using Entry = std::pair<std::string, std::string>;

  static KeyValues parse(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
      ++line_no;
      const std::string t = trim(line);
      if (!t.empty() && t[0] != '#') {
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
          throw ParseError("config line " + std::to_string(line_no) + " has no '='", pos);
        }
        std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) {
          throw ParseError("config line " + std::to_string(line_no) + " has an empty key", pos);
        }
        kv.entries_.emplace_back(std::move(key), trim(std::string_view(t).substr(eq + 1)));
      }
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    return kv;
  }

  static KeyValues load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  void set(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
  }

  bool has(std::string_view key) const { return find(key) != nullptr; }

  const std::string& get(std::string_view key) const {
    if (const auto* v = find(key)) return *v;
    throw ValueError("missing config key '" + std::string(key) + "'");
  }

  std::string get_or(std::string_view key, std::string fallback) const {
    const auto* v = find(key);
    return v ? *v : fallback;
  }

  template <typename N>
  N number(std::string_view key) const {
    return to_number<N>(get(key), key);
  }

  template <typename N>
  N number_or(std::string_view key, N fallback) const {
    const auto* v = find(key);
    return v ? to_number<N>(*v, key) : fallback;
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }

  std::string to_string() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
  }

  template <typename N>
  static N to_number(std::string_view text, std::string_view key = "value") {
    N value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
      throw ValueError("'" + std::string(key) + "': cannot parse '" + std::string(text) +
                       "' as a number");
    }
    return value;
  }

 private:
  // Last occurrence wins for scalar lookups.
  const std::string* find(std::string_view key) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
      if (it->first == key) return &it->second;
    return nullptr;
  }

  std::vector<Entry> entries_;
};

}  // namespace morpheus
