#include "gazefeed/csv.hpp"

#include <charconv>

namespace gazefeed {

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    out.push_back(cur);
    return out;
}

void require_header(std::istream& in, const std::string& expected, const std::string& what) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(what + ": empty input, expected header `" + expected + "`");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected) {
        throw FormatError(what + ": bad header `" + line + "`, expected `" + expected + "`");
    }
}

double parse_double(const std::string& field, const char* name) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw std::runtime_error(std::string(name) + ": not a number `" + field + "`");
    }
    return value;
}

std::int64_t parse_int(const std::string& field, const char* name) {
    std::int64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw std::runtime_error(std::string(name) + ": not an integer `" + field + "`");
    }
    return value;
}

bool parse_bool01(const std::string& field, const char* name) {
    if (field == "1") return true;
    if (field == "0") return false;
    throw std::runtime_error(std::string(name) + ": expected 0 or 1, got `" + field + "`");
}

void enforce_error_budget(std::size_t rows_attempted, const std::vector<RowError>& errors,
                          const std::string& what) {
    if (errors.empty()) return;
    if (errors.size() * 10 > rows_attempted) {
        throw FormatError(what + ": " + std::to_string(errors.size()) + " of " +
                          std::to_string(rows_attempted) + " rows malformed (first at line " +
                          std::to_string(errors.front().line) + ": " + errors.front().message +
                          ")");
    }
}

}  // namespace gazefeed
