#include "odegrow/cli/toml.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include "odegrow/data.hpp"
#include "odegrow/error.hpp"

namespace odegrow::cli {

namespace {

class LineReader {
 public:
  LineReader(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  [[nodiscard]] bool at_end_or_comment() {
    skip_space();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }
  [[nodiscard]] char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  std::string bare_key() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                      c == '-' || c == '.';
      if (!ok) break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) fail("unterminated escape");
      switch (text_[pos_++]) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        default: fail("unsupported escape sequence");
      }
    }
  }

  TomlValue value() {
    skip_space();
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '[') {
      ++pos_;
      std::vector<std::string> items;
      skip_space();
      if (peek() == ']') {
        ++pos_;
        return items;
      }
      while (true) {
        items.push_back(basic_string());
        skip_space();
        if (peek() == ',') {
          ++pos_;
          skip_space();
          if (peek() == ']') {
            ++pos_;
            return items;
          }
          continue;
        }
        expect(']');
        return items;
      }
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ' ' && text_[pos_] != '\t' && text_[pos_] != '#') ++pos_;
    std::string token(text_.substr(start, pos_ - start));
    if (token.empty()) fail("missing value");
    if (token == "true") return true;
    if (token == "false") return false;
    std::string digits;
    for (char ch : token) {
      if (ch != '_') digits.push_back(ch);
    }
    if (digits == "inf" || digits == "+inf") return std::numeric_limits<double>::infinity();
    if (digits == "-inf") return -std::numeric_limits<double>::infinity();
    if (digits == "nan" || digits == "+nan" || digits == "-nan") return std::numeric_limits<double>::quiet_NaN();
    const char* first = digits.data();
    const char* last = digits.data() + digits.size();
    if (*first == '+') ++first;
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      std::int64_t n = 0;
      const auto [ptr, ec] = std::from_chars(first, last, n);
      if (ec == std::errc() && ptr == last) return n;
      fail("invalid value '" + token + "'");
    }
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last) fail("invalid value '" + token + "'");
    return x;
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

TomlDocument parse_toml(std::istream& in) {
  TomlDocument doc;
  doc[""];
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    LineReader reader(line, line_no);
    if (reader.at_end_or_comment()) continue;
    if (reader.peek() == '[') {
      reader.expect('[');
      section = reader.bare_key();
      reader.expect(']');
      if (!reader.at_end_or_comment()) reader.fail("unexpected text after section header");
      if (doc.count(section) != 0 && !section.empty()) reader.fail("duplicate section [" + section + "]");
      doc[section];
      continue;
    }
    const std::string key = reader.bare_key();
    reader.expect('=');
    TomlValue value = reader.value();
    if (!reader.at_end_or_comment()) reader.fail("unexpected text after value");
    auto& table = doc[section];
    if (!table.emplace(key, std::move(value)).second) reader.fail("duplicate key '" + key + "'");
  }
  return doc;
}

TomlDocument parse_toml(const std::string& text) {
  std::istringstream in(text);
  return parse_toml(in);
}

std::string toml_quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string toml_float(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::string text = format_number(value);
  if (text.find_first_of(".eE") == std::string::npos) text += ".0";
  return text;
}

}  // namespace odegrow::cli
