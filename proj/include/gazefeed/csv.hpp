// csv.hpp — minimal CSV plumbing shared by the loaders.
//
// All tabular inputs follow the same contract: a mandatory exact header,
// malformed rows collected as RowError (line-numbered) instead of aborting,
// and a hard failure once more than 10% of the data rows are bad.

#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gazefeed {

struct RowError {
    int line = 0;  // 1-based, header is line 1
    std::string message;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Splits on sep, no quoting (none of the formats need it). Trailing '\r' on
// the last field is stripped so CRLF files parse.
std::vector<std::string> split_fields(const std::string& line, char sep = ',');

// Reads the first line and compares against the expected header.
// Throws FormatError when the stream is empty or the header differs.
void require_header(std::istream& in, const std::string& expected, const std::string& what);

// Strict numeric field parsers: the whole field must be consumed.
double parse_double(const std::string& field, const char* name);
std::int64_t parse_int(const std::string& field, const char* name);
bool parse_bool01(const std::string& field, const char* name);

// Throws FormatError when errors exceed 10% of the attempted data rows.
void enforce_error_budget(std::size_t rows_attempted, const std::vector<RowError>& errors,
                          const std::string& what);

}  // namespace gazefeed
