#include "kaplan/pipeline/toml_lite.hpp"

#include <charconv>
#include <string>
#include <vector>

#include "kaplan/error.hpp"

namespace kaplan::toml_lite {

using nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(std::string_view text) : s_(text) {}

  json run() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        ++i_;
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_inline_ws();
        std::vector<std::string> path = key_path();
        skip_inline_ws();
        expect(']');
        table = &root;
        for (const auto& k : path) {
          json& next = (*table)[k];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("key '" + k + "' is not a table");
          table = &next;
        }
      } else {
        std::vector<std::string> path = key_path();
        skip_inline_ws();
        expect('=');
        skip_inline_ws();
        json v = value();
        assign(*table, path, std::move(v));
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ConfigInvalid, "TOML line " + std::to_string(line_) + ": " + msg);
  }

  [[nodiscard]] bool eof() const { return i_ >= s_.size(); }
  [[nodiscard]] char peek() const { return eof() ? '\0' : s_[i_]; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++i_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++i_;
    }
  }

  void skip_ws_comments_newlines() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i_;
      } else if (c == '\n') {
        ++i_;
        ++line_;
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_inline_ws();
    skip_comment();
    if (peek() == '\r') ++i_;
    if (!eof() && peek() != '\n') fail("unexpected trailing characters");
  }

  static bool bare_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  }

  std::string key() {
    if (peek() == '"') return basic_string();
    const std::size_t start = i_;
    while (!eof() && bare_char(peek())) ++i_;
    if (i_ == start) fail("expected a key");
    return std::string(s_.substr(start, i_ - start));
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> path{key()};
    while (true) {
      skip_inline_ws();
      if (peek() != '.') break;
      ++i_;
      skip_inline_ws();
      path.push_back(key());
    }
    return path;
  }

  void assign(json& table, const std::vector<std::string>& path, json v) {
    json* t = &table;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      json& next = (*t)[path[k]];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) fail("key '" + path[k] + "' is not a table");
      t = &next;
    }
    if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
    (*t)[path.back()] = std::move(v);
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[i_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = s_[i_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '\\': out += '\\'; break;
          case '"': out += '"'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  json number_or_bool() {
    const std::size_t start = i_;
    while (!eof()) {
      const char c = peek();
      if (c == ',' || c == ']' || c == '}' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#') break;
      ++i_;
    }
    std::string tok(s_.substr(start, i_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("expected a value");
    std::string clean;
    for (char c : tok) {
      if (c != '_') clean += c;
    }
    if (!clean.empty() && clean[0] == '+') clean.erase(0, 1);
    const bool is_float = clean.find_first_of(".eE") != std::string::npos || clean == "inf" || clean == "-inf";
    if (!is_float) {
      long long v = 0;
      const auto [p, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), v);
      if (ec != std::errc() || p != clean.data() + clean.size()) fail("malformed number '" + tok + "'");
      return v;
    }
    double v = 0.0;
    const auto [p, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), v);
    if (ec != std::errc() || p != clean.data() + clean.size()) fail("malformed number '" + tok + "'");
    return v;
  }

  json array() {
    expect('[');
    json arr = json::array();
    while (true) {
      skip_ws_comments_newlines();
      if (peek() == ']') {
        ++i_;
        return arr;
      }
      arr.push_back(value());
      skip_ws_comments_newlines();
      if (peek() == ',') {
        ++i_;
        continue;
      }
      skip_ws_comments_newlines();
      expect(']');
      return arr;
    }
  }

  json inline_table() {
    expect('{');
    json t = json::object();
    skip_inline_ws();
    if (peek() == '}') {
      ++i_;
      return t;
    }
    while (true) {
      skip_inline_ws();
      std::vector<std::string> path = key_path();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      assign(t, path, value());
      skip_inline_ws();
      if (peek() == ',') {
        ++i_;
        continue;
      }
      expect('}');
      return t;
    }
  }

  json value() {
    switch (peek()) {
      case '"': return basic_string();
      case '[': return array();
      case '{': return inline_table();
      case '\'': fail("literal strings are not supported");
      default: return number_or_bool();
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
  int line_ = 1;
};

}  // namespace

json parse(std::string_view text) { return Reader(text).run(); }

}  // namespace kaplan::toml_lite
