#pragma once

// Strict TOML-subset reader for experiment configs: tables, arrays of tables,
// dotted headers, and key = value lines with strings, booleans, integers,
// floats and (possibly nested) arrays. Every key must be consumed by the
// experiment that reads it; leftovers are reported by name.

#include <cctype>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ergolab/common.hpp"

namespace ergolab {

class ConfigValue;
using ConfigArray = std::vector<ConfigValue>;

class ConfigTable {
public:
  ConfigValue& insert(const std::string& key);
  ConfigValue* find(const std::string& key);
  const ConfigValue* find(const std::string& key) const;
  bool contains(const std::string& key) const;

  // typed accessors; mark the key consumed
  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  long integer(const std::string& key);
  long integer_or(const std::string& key, long fallback);
  bool boolean_or(const std::string& key, bool fallback);
  std::string str(const std::string& key);
  std::string str_or(const std::string& key, const std::string& fallback);
  std::vector<double> number_list(const std::string& key);
  std::vector<double> number_list_or(const std::string& key, std::vector<double> fallback);
  ConfigTable& table(const std::string& key);
  std::vector<ConfigTable>& table_array(const std::string& key);
  bool has(const std::string& key) const { return contains(key); }

  // every key must have been consumed; reports the first offender by path
  void check_consumed(const std::string& path = "") const;

  std::map<std::string, ConfigValue> entries;
  std::map<std::string, bool> consumed;

private:
  ConfigValue& fetch(const std::string& key);
};

class ConfigValue {
public:
  using Storage = std::variant<std::monostate, bool, long, double, std::string, ConfigArray,
                               std::shared_ptr<ConfigTable>,
                               std::shared_ptr<std::vector<ConfigTable>>>;
  Storage v;

  bool is_table() const { return std::holds_alternative<std::shared_ptr<ConfigTable>>(v); }
  bool is_table_array() const {
    return std::holds_alternative<std::shared_ptr<std::vector<ConfigTable>>>(v);
  }
  ConfigTable& as_table() { return *std::get<std::shared_ptr<ConfigTable>>(v); }
  const ConfigTable& as_table() const { return *std::get<std::shared_ptr<ConfigTable>>(v); }
  std::vector<ConfigTable>& as_table_array() {
    return *std::get<std::shared_ptr<std::vector<ConfigTable>>>(v);
  }
  const std::vector<ConfigTable>& as_table_array() const {
    return *std::get<std::shared_ptr<std::vector<ConfigTable>>>(v);
  }

  double as_number(const std::string& key) const {
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    if (std::holds_alternative<long>(v)) return static_cast<double>(std::get<long>(v));
    throw InvalidConfig("key '" + key + "' is not a number");
  }
};

inline ConfigValue& ConfigTable::insert(const std::string& key) {
  return entries[key];
}
inline ConfigValue* ConfigTable::find(const std::string& key) {
  auto it = entries.find(key);
  return it == entries.end() ? nullptr : &it->second;
}
inline const ConfigValue* ConfigTable::find(const std::string& key) const {
  auto it = entries.find(key);
  return it == entries.end() ? nullptr : &it->second;
}
inline bool ConfigTable::contains(const std::string& key) const {
  return entries.count(key) != 0;
}
inline ConfigValue& ConfigTable::fetch(const std::string& key) {
  ConfigValue* v = find(key);
  if (!v) throw InvalidConfig("missing required key '" + key + "'");
  consumed[key] = true;
  return *v;
}
inline double ConfigTable::number(const std::string& key) {
  return fetch(key).as_number(key);
}
inline double ConfigTable::number_or(const std::string& key, double fallback) {
  if (!contains(key)) return fallback;
  return number(key);
}
inline long ConfigTable::integer(const std::string& key) {
  ConfigValue& v = fetch(key);
  if (std::holds_alternative<long>(v.v)) return std::get<long>(v.v);
  throw InvalidConfig("key '" + key + "' is not an integer");
}
inline long ConfigTable::integer_or(const std::string& key, long fallback) {
  if (!contains(key)) return fallback;
  return integer(key);
}
inline bool ConfigTable::boolean_or(const std::string& key, bool fallback) {
  if (!contains(key)) return fallback;
  ConfigValue& v = fetch(key);
  if (std::holds_alternative<bool>(v.v)) return std::get<bool>(v.v);
  throw InvalidConfig("key '" + key + "' is not a boolean");
}
inline std::string ConfigTable::str(const std::string& key) {
  ConfigValue& v = fetch(key);
  if (std::holds_alternative<std::string>(v.v)) return std::get<std::string>(v.v);
  throw InvalidConfig("key '" + key + "' is not a string");
}
inline std::string ConfigTable::str_or(const std::string& key, const std::string& fallback) {
  if (!contains(key)) return fallback;
  return str(key);
}
inline std::vector<double> ConfigTable::number_list(const std::string& key) {
  ConfigValue& v = fetch(key);
  if (!std::holds_alternative<ConfigArray>(v.v))
    throw InvalidConfig("key '" + key + "' is not an array");
  std::vector<double> out;
  for (const ConfigValue& e : std::get<ConfigArray>(v.v)) out.push_back(e.as_number(key));
  return out;
}
inline std::vector<double> ConfigTable::number_list_or(const std::string& key,
                                                       std::vector<double> fallback) {
  if (!contains(key)) return fallback;
  return number_list(key);
}
inline ConfigTable& ConfigTable::table(const std::string& key) {
  ConfigValue& v = fetch(key);
  if (!v.is_table()) throw InvalidConfig("key '" + key + "' is not a table");
  return v.as_table();
}
inline std::vector<ConfigTable>& ConfigTable::table_array(const std::string& key) {
  ConfigValue& v = fetch(key);
  if (!v.is_table_array()) throw InvalidConfig("key '" + key + "' is not an array of tables");
  return v.as_table_array();
}
inline void ConfigTable::check_consumed(const std::string& path) const {
  for (const auto& [key, value] : entries) {
    std::string full = path.empty() ? key : path + "." + key;
    auto it = consumed.find(key);
    if (it == consumed.end() || !it->second) throw UnknownKey("unknown key '" + full + "'");
    if (value.is_table()) value.as_table().check_consumed(full);
    if (value.is_table_array()) {
      int i = 0;
      for (const ConfigTable& t : value.as_table_array())
        t.check_consumed(full + "[" + std::to_string(i++) + "]");
    }
  }
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

struct ConfigParser {
  std::string text;
  std::size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
  }
  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char get() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
  void skip_ws_and_comments() {
    for (;;) {
      skip_inline_ws();
      if (!eof() && peek() == '#') {
        while (!eof() && peek() != '\n') ++pos;
      }
      if (!eof() && peek() == '\n') {
        get();
        continue;
      }
      return;
    }
  }
  void expect_line_end() {
    skip_inline_ws();
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos;
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    get();
  }

  static bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key_part() {
    skip_inline_ws();
    std::string k;
    while (!eof() && is_key_char(peek())) k += get();
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> parse_dotted_key() {
    std::vector<std::string> parts{parse_key_part()};
    skip_inline_ws();
    while (!eof() && peek() == '.') {
      get();
      parts.push_back(parse_key_part());
      skip_inline_ws();
    }
    return parts;
  }

  ConfigValue parse_value() {
    skip_inline_ws();
    if (eof()) fail("expected a value");
    char c = peek();
    ConfigValue out;
    if (c == '"') {
      get();
      std::string s;
      while (!eof() && peek() != '"') {
        char ch = get();
        if (ch == '\\' && !eof()) {
          char esc = get();
          switch (esc) {
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            case '"': s += '"'; break;
            case '\\': s += '\\'; break;
            default: fail("unsupported escape");
          }
        } else {
          s += ch;
        }
      }
      if (eof()) fail("unterminated string");
      get();
      out.v = s;
      return out;
    }
    if (c == '[') {
      get();
      ConfigArray arr;
      skip_ws_and_comments();
      if (!eof() && peek() == ']') {
        get();
        out.v = arr;
        return out;
      }
      for (;;) {
        arr.push_back(parse_value());
        skip_ws_and_comments();
        if (eof()) fail("unterminated array");
        if (peek() == ',') {
          get();
          skip_ws_and_comments();
          if (!eof() && peek() == ']') { // trailing comma
            get();
            break;
          }
          continue;
        }
        if (peek() == ']') {
          get();
          break;
        }
        fail("expected ',' or ']' in array");
      }
      out.v = arr;
      return out;
    }
    // bare token: bool or number
    std::string tok;
    while (!eof() && peek() != '\n' && peek() != ',' && peek() != ']' && peek() != '#' &&
           peek() != ' ' && peek() != '\t')
      tok += get();
    if (tok == "true") {
      out.v = true;
      return out;
    }
    if (tok == "false") {
      out.v = false;
      return out;
    }
    try {
      std::size_t used = 0;
      if (tok.find_first_of(".eE") == std::string::npos) {
        long l = std::stol(tok, &used);
        if (used == tok.size()) {
          out.v = l;
          return out;
        }
      }
      double d = std::stod(tok, &used);
      if (used != tok.size()) fail("malformed number '" + tok + "'");
      out.v = d;
      return out;
    } catch (const std::exception&) {
      fail("malformed value '" + tok + "'");
    }
  }

  // navigate to (and create) the table at the dotted path
  ConfigTable* descend(ConfigTable* root, const std::vector<std::string>& parts,
                       std::size_t count) {
    ConfigTable* cur = root;
    for (std::size_t i = 0; i < count; ++i) {
      ConfigValue* v = cur->find(parts[i]);
      if (!v) {
        ConfigValue& nv = cur->insert(parts[i]);
        nv.v = std::make_shared<ConfigTable>();
        cur = &nv.as_table();
      } else if (v->is_table()) {
        cur = &v->as_table();
      } else if (v->is_table_array()) {
        cur = &v->as_table_array().back();
      } else {
        fail("key '" + parts[i] + "' is not a table");
      }
    }
    return cur;
  }

  ConfigTable parse() {
    ConfigTable root;
    ConfigTable* current = &root;
    for (;;) {
      skip_ws_and_comments();
      if (eof()) break;
      if (peek() == '[') {
        get();
        bool array_of_tables = !eof() && peek() == '[';
        if (array_of_tables) get();
        std::vector<std::string> parts = parse_dotted_key();
        skip_inline_ws();
        if (eof() || get() != ']') fail("expected ']'");
        if (array_of_tables && (eof() || get() != ']')) fail("expected ']]'");
        expect_line_end();
        ConfigTable* parent = descend(&root, parts, parts.size() - 1);
        const std::string& leaf = parts.back();
        if (array_of_tables) {
          ConfigValue* v = parent->find(leaf);
          if (!v) {
            ConfigValue& nv = parent->insert(leaf);
            nv.v = std::make_shared<std::vector<ConfigTable>>();
            v = parent->find(leaf);
          }
          if (!v->is_table_array()) fail("key '" + leaf + "' is not an array of tables");
          v->as_table_array().emplace_back();
          current = &v->as_table_array().back();
        } else {
          ConfigValue* v = parent->find(leaf);
          if (!v) {
            ConfigValue& nv = parent->insert(leaf);
            nv.v = std::make_shared<ConfigTable>();
            v = parent->find(leaf);
          }
          if (!v->is_table()) fail("duplicate table '" + leaf + "'");
          current = &v->as_table();
        }
        continue;
      }
      std::vector<std::string> parts = parse_dotted_key();
      skip_inline_ws();
      if (eof() || get() != '=') fail("expected '='");
      ConfigValue value = parse_value();
      expect_line_end();
      ConfigTable* tbl = descend(current, parts, parts.size() - 1);
      if (tbl->contains(parts.back())) fail("duplicate key '" + parts.back() + "'");
      tbl->insert(parts.back()) = std::move(value);
    }
    return root;
  }
};

} // namespace detail

inline ConfigTable parse_config(const std::string& text) {
  detail::ConfigParser p;
  p.text = text;
  return p.parse();
}

} // namespace ergolab
