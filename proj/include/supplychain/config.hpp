// Copyright 2026 The supplychain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario files use a small TOML subset, parsed into JSON:
//
//   # comment
//   key = value                 bare keys [A-Za-z0-9_-], dotted keys, "quoted"
//   [table]  [table.sub]        headers open (nested) tables
//   value := "string" | 'literal' | integer | float | inf | true | false
//          | [value, ...]       arrays, may span lines, trailing comma ok
//          | {key = value, ...} inline tables
//
// Numbers may contain '_' separators. `inf` parses to the string "inf",
// which fields such as env.repair_time accept. Redefining a key is an error.

#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "supplychain/error.hpp"

namespace supplychain {

using Json = nlohmann::ordered_json;

namespace detail {

class ConfigParser {
 public:
  explicit ConfigParser(std::string_view text) : text_(text) {}

  Json parse() {
    Json root = Json::object();
    Json* table = &root;
    for (;;) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        get();
        skip_spaces();
        const auto path = parse_key_path();
        skip_spaces();
        expect(']');
        table = &open_table(root, path);
      } else {
        const auto path = parse_key_path();
        skip_spaces();
        expect('=');
        skip_spaces();
        Json value = parse_value();
        assign(*table, path, std::move(value));
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorCode::kConfigParse,
         "line " + std::to_string(line_) + ", column " + std::to_string(col_) + ": " + msg);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void expect(char c) {
    if (peek() != c) error(std::string("expected '") + c + "'");
    get();
  }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') get();
    }
  }
  void skip_blank_lines() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (peek() == '\n') {
        get();
        continue;
      }
      return;
    }
  }
  // Whitespace, comments and newlines inside arrays and inline tables.
  void skip_all() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (peek() == '\n') {
        get();
        continue;
      }
      return;
    }
  }
  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (at_end()) return;
    if (peek() != '\n') error("unexpected trailing characters");
    get();
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> path;
    for (;;) {
      skip_spaces();
      if (peek() == '"') {
        path.push_back(parse_basic_string());
      } else {
        std::string key;
        while (bare_char(peek())) key.push_back(get());
        if (key.empty()) error("expected a key");
        path.push_back(key);
      }
      skip_spaces();
      if (peek() != '.') return path;
      get();
    }
  }

  Json& open_table(Json& root, const std::vector<std::string>& path) {
    Json* t = &root;
    for (const auto& k : path) {
      if (!t->contains(k)) (*t)[k] = Json::object();
      t = &(*t)[k];
      if (!t->is_object()) error("'" + k + "' is not a table");
    }
    return *t;
  }

  void assign(Json& table, const std::vector<std::string>& path, Json value) {
    Json* t = &table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!t->contains(path[i])) (*t)[path[i]] = Json::object();
      t = &(*t)[path[i]];
      if (!t->is_object()) error("'" + path[i] + "' is not a table");
    }
    if (t->contains(path.back())) error("duplicate key '" + path.back() + "'");
    (*t)[path.back()] = std::move(value);
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    for (;;) {
      if (at_end() || peek() == '\n') error("unterminated string");
      const char c = get();
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) error("unterminated string");
      const char e = get();
      switch (e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: error(std::string("unknown escape '\\") + e + "'");
      }
    }
  }

  std::string parse_literal_string() {
    expect('\'');
    std::string out;
    for (;;) {
      if (at_end() || peek() == '\n') error("unterminated string");
      const char c = get();
      if (c == '\'') return out;
      out.push_back(c);
    }
  }

  Json parse_value() {
    const char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    std::string word;
    while (!at_end() && (bare_char(peek()) || peek() == '.' || peek() == '+')) word.push_back(get());
    if (word.empty()) error("expected a value");
    if (word == "true") return true;
    if (word == "false") return false;
    if (word == "inf" || word == "+inf") return "inf";
    return parse_number(word);
  }

  Json parse_number(const std::string& word) {
    std::string digits;
    for (char ch : word) {
      if (ch != '_') digits.push_back(ch);
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      } else {
        const long long v = std::stoll(digits, &used, 10);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    error("invalid value '" + word + "'");
  }

  Json parse_array() {
    expect('[');
    Json arr = Json::array();
    for (;;) {
      skip_all();
      if (peek() == ']') {
        get();
        return arr;
      }
      arr.push_back(parse_value());
      skip_all();
      if (peek() == ',') {
        get();
        continue;
      }
      skip_all();
      expect(']');
      return arr;
    }
  }

  Json parse_inline_table() {
    expect('{');
    Json obj = Json::object();
    for (;;) {
      skip_all();
      if (peek() == '}') {
        get();
        return obj;
      }
      const auto path = parse_key_path();
      skip_spaces();
      expect('=');
      skip_spaces();
      assign(obj, path, parse_value());
      skip_all();
      if (peek() == ',') {
        get();
        continue;
      }
      expect('}');
      return obj;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace detail

inline Json parse_config(std::string_view text) { return detail::ConfigParser(text).parse(); }

/// FNV-1a (64 bit) of the canonical JSON text, as 16 hex digits.
/// FNV-1a over the canonical JSON dump. The worker thread count is left out
/// because it does not change any result.
inline std::string config_hash(const Json& config) {
  Json keyed = config;
  if (keyed.is_object()) keyed.erase("threads");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : keyed.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace supplychain
