#ifndef SUBGROUP_CSV_HPP
#define SUBGROUP_CSV_HPP

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "error.hpp"

namespace subgroup::csv {

/**
 * Read one RFC 4180 record. Quoted fields may contain commas, doubled quotes and line breaks.
 * Returns false at end of input. A trailing '\r' before the newline is discarded.
 */
inline bool read_record(std::istream& in, std::vector<std::string>& fields, std::vector<bool>& quoted) {
    fields.clear();
    quoted.clear();
    if (in.peek() == std::char_traits<char>::eof()) {
        return false;
    }

    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    char ch;
    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && field.empty() && !was_quoted) {
            in_quotes = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            quoted.push_back(was_quoted);
            field.clear();
            was_quoted = false;
        } else if (ch == '\n') {
            break;
        } else if (ch == '\r' && in.peek() == '\n') {
            continue;
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) {
        throw Error(ErrorCode::ParseError, "unterminated quoted field");
    }
    fields.push_back(std::move(field));
    quoted.push_back(was_quoted);
    return true;
}

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

/// Missing markers: empty (after trimming) and the literal NA.
inline bool is_missing(std::string_view cell) {
    auto t = trim(cell);
    return t.empty() || t == "NA";
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return v;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) {
            out << ',';
        }
        out << escape(fields[i]);
    }
    out << '\n';
}

}

#endif
