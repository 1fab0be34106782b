#pragma once

// Delimited-text input tables and small output helpers shared by the
// command-line tools.

#include "dpdsis/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dpdsis {

struct InputTable {
    bool has_header = false;
    char delimiter = ',';
    std::string response_name;
    std::vector<std::string> covariate_names;  // header names, or "x<column>" without a header
    Vector y;
    Matrix x;  // n x p, columns in file order with the response removed
};

/// Parses comma- or tab-separated text (the first data line decides; a tab
/// wins). The first line is a header when any of its cells is not a number.
/// `response` is a header name or a 0-based column index. Throws DataError
/// naming the line and column of the first bad cell, and ArgumentError for an
/// unknown response, ragged rows, n < 3 or no covariate column.
InputTable parse_table(const std::string& text, const std::string& response);

/// Reads the whole file; throws DataError if it cannot be opened.
std::string read_file(const std::string& path);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

/// %.17g, with "inf", "-inf" and "nan" spelled out.
std::string format_full(double v);

}  // namespace dpdsis
