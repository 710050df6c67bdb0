#include "rsport/cli/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace rsport::cli {

ConfigError::ConfigError(std::string source, std::size_t line, std::string field,
                         const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : " [" + field + "]") + ": " + what),
      line_(line),
      field_(std::move(field)) {}

namespace {

class Parser {
public:
    Parser(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

    TomlDocument run() {
        TomlDocument doc;
        doc.source = source_;
        doc.tables[""];
        std::string table;
        while (!at_end()) {
            skip_blank_and_comments();
            if (at_end()) break;
            const char c = peek();
            if (c == '[') {
                ++pos_;
                table = read_until(']', "table header");
                table = trim(table);
                if (table.empty()) fail("empty table name");
                if (doc.tables.contains(table) && doc.table_lines.contains(table)) {
                    fail("duplicate table [" + table + "]");
                }
                doc.tables[table];
                doc.table_lines[table] = line_;
                expect_line_end();
            } else {
                const std::size_t key_line = line_;
                std::string key = trim(read_until('=', "key"));
                if (key.empty()) fail("missing key before '='");
                for (char k : key) {
                    if (!(std::isalnum(static_cast<unsigned char>(k)) || k == '_' || k == '-')) {
                        fail("invalid key '" + key + "'");
                    }
                }
                skip_inline_space();
                TomlValue value = read_value();
                value.line = key_line;
                auto& entries = doc.tables[table];
                if (entries.contains(key)) {
                    fail("duplicate key '" + key + "'", table.empty() ? key : table + "." + key);
                }
                entries.emplace(key, std::move(value));
                expect_line_end();
            }
        }
        return doc;
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    [[noreturn]] void fail(const std::string& what, std::string field = {}) const {
        throw ConfigError(source_, line_, std::move(field), what);
    }

    static std::string trim(std::string_view s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return std::string(s.substr(a, b - a));
    }

    void skip_inline_space() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }

    void skip_comment() {
        if (!at_end() && peek() == '#') {
            while (!at_end() && peek() != '\n') ++pos_;
        }
    }

    // Whitespace, newlines and comments; used inside arrays and between lines.
    void skip_blank_and_comments() {
        for (;;) {
            skip_inline_space();
            if (at_end()) return;
            if (peek() == '#') {
                skip_comment();
            } else if (peek() == '\n') {
                ++pos_;
                ++line_;
            } else {
                return;
            }
        }
    }

    void expect_line_end() {
        skip_inline_space();
        skip_comment();
        if (at_end()) return;
        if (peek() != '\n') fail("unexpected trailing characters");
        ++pos_;
        ++line_;
    }

    std::string read_until(char stop, const char* what) {
        const std::size_t start = pos_;
        while (!at_end() && peek() != stop) {
            if (peek() == '\n') fail(std::string("unterminated ") + what);
            ++pos_;
        }
        if (at_end()) fail(std::string("unterminated ") + what);
        std::string out(text_.substr(start, pos_ - start));
        ++pos_;
        return out;
    }

    TomlValue read_value() {
        if (at_end()) fail("missing value");
        const char c = peek();
        TomlValue v;
        v.line = line_;
        if (c == '"') {
            ++pos_;
            std::string s;
            while (!at_end() && peek() != '"') {
                if (peek() == '\n') fail("unterminated string");
                if (peek() == '\\') {
                    ++pos_;
                    if (at_end()) fail("unterminated string");
                    const char e = peek();
                    if (e == 'n') s.push_back('\n');
                    else if (e == 't') s.push_back('\t');
                    else if (e == '"' || e == '\\') s.push_back(e);
                    else fail("unsupported escape sequence");
                } else {
                    s.push_back(peek());
                }
                ++pos_;
            }
            if (at_end()) fail("unterminated string");
            ++pos_;
            v.data = std::move(s);
            return v;
        }
        if (c == '[') {
            ++pos_;
            TomlValue::Array items;
            for (;;) {
                skip_blank_and_comments();
                if (at_end()) fail("unterminated array");
                if (peek() == ']') {
                    ++pos_;
                    break;
                }
                items.push_back(read_value());
                skip_blank_and_comments();
                if (at_end()) fail("unterminated array");
                if (peek() == ',') {
                    ++pos_;
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
            v.data = std::move(items);
            return v;
        }
        const std::size_t start = pos_;
        while (!at_end() && peek() != ',' && peek() != ']' && peek() != '\n' && peek() != '#' &&
               peek() != ' ' && peek() != '\t' && peek() != '\r') {
            ++pos_;
        }
        std::string token(text_.substr(start, pos_ - start));
        if (token.empty()) fail("missing value");
        std::string clean;
        for (char t : token) {
            if (t != '_') clean.push_back(t);
        }
        if (!clean.empty() && clean.front() == '+') clean.erase(clean.begin());
        double number = 0.0;
        const auto* first = clean.data();
        const auto* last = clean.data() + clean.size();
        const auto [ptr, ec] = std::from_chars(first, last, number);
        if (ec != std::errc() || ptr != last) fail("invalid number '" + token + "'");
        v.data = number;
        v.raw = clean;
        v.integral = clean.find_first_of(".eE") == std::string::npos &&
                     clean != "inf" && clean != "-inf" && clean != "nan";
        return v;
    }

    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

}  // namespace

TomlDocument parse_toml(std::string_view text, std::string source) {
    return Parser(text, std::move(source)).run();
}

}  // namespace rsport::cli
