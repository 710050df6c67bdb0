#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rsport::cli {

/// Raised for malformed or invalid configuration; carries the offending
/// line (0 when unknown) and dotted field name.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, std::size_t line, std::string field, const std::string& what);

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// Value of a TOML-subset document: a number, a string or a (nested) array.
struct TomlValue {
    using Array = std::vector<TomlValue>;
    std::variant<double, std::string, Array> data;
    std::size_t line = 0;
    bool integral = false;  ///< written without a fraction or exponent
    std::string raw;        ///< numeric token with '_' and leading '+' removed

    bool is_number() const { return std::holds_alternative<double>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_array() const { return std::holds_alternative<Array>(data); }
};

/// Parsed document: table name ("" for the root) → key → value.
/// Supports `[a.b]` headers, `key = value`, `#` comments, double-quoted
/// strings and arrays that may span several lines.
struct TomlDocument {
    std::string source;
    std::map<std::string, std::map<std::string, TomlValue>> tables;
    std::map<std::string, std::size_t> table_lines;

    bool has_table(const std::string& name) const { return tables.contains(name); }
};

TomlDocument parse_toml(std::string_view text, std::string source = "<config>");

}  // namespace rsport::cli
