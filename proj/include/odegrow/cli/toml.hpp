#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace odegrow::cli {

/// Scalar or string-array value from a config file.
using TomlValue = std::variant<bool, std::int64_t, double, std::string, std::vector<std::string>>;

/// section name ("" for top level) -> key -> value. Dotted section headers
/// such as [calibration.neural] keep their full dotted name.
using TomlDocument = std::map<std::string, std::map<std::string, TomlValue>>;

/// Reads the subset of TOML used by config files and manifests: comments,
/// [section] headers, and `key = value` pairs where the value is a boolean,
/// integer, float, basic string, or an array of basic strings. Throws
/// ParseError with the 1-based line number.
[[nodiscard]] TomlDocument parse_toml(std::istream& in);
[[nodiscard]] TomlDocument parse_toml(const std::string& text);

/// Quoted TOML basic string.
[[nodiscard]] std::string toml_quote(const std::string& text);

/// Float literal that parses back to the same double (always has '.', 'e',
/// "inf" or "nan" so it re-reads as a float).
[[nodiscard]] std::string toml_float(double value);

}  // namespace odegrow::cli
