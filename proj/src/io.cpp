#include "dpdsis/io.hpp"

#include "dpdsis/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dpdsis {

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, delim)) out.push_back(strip(cell));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

bool parse_number(const std::string& cell, double& value) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last;
}

bool is_blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

InputTable parse_table(const std::string& text, const std::string& response) {
    std::vector<std::pair<int, std::string>> lines;
    {
        std::istringstream in(text);
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            if (!is_blank(line)) lines.emplace_back(no, line);
        }
    }
    if (lines.empty()) {
        throw ArgumentError("input is empty");
    }
    InputTable t;
    t.delimiter = lines.front().second.find('\t') != std::string::npos ? '\t' : ',';

    const auto first = split(lines.front().second, t.delimiter);
    for (const auto& cell : first) {
        double v = 0.0;
        if (!parse_number(cell, v)) {
            t.has_header = true;
            break;
        }
    }
    const std::size_t cols = first.size();
    std::vector<std::string> names(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        names[c] = t.has_header ? first[c] : "x" + std::to_string(c);
    }

    std::size_t resp = cols;
    bool numeric = !response.empty();
    for (char ch : response) numeric = numeric && ch >= '0' && ch <= '9';
    if (numeric) {
        resp = static_cast<std::size_t>(std::stoull(response));
    } else {
        for (std::size_t c = 0; c < cols; ++c) {
            if (t.has_header && names[c] == response) {
                resp = c;
                break;
            }
        }
    }
    if (resp >= cols) {
        throw ArgumentError("response column '" + response + "' not found among " + std::to_string(cols) +
                            " columns");
    }
    if (cols < 2) {
        throw ArgumentError("input needs a response and at least one covariate column");
    }

    const std::size_t start = t.has_header ? 1 : 0;
    const auto n = static_cast<Index>(lines.size() - start);
    if (n < 3) {
        throw ArgumentError("input needs at least 3 data rows, found " + std::to_string(n));
    }
    t.y.resize(n);
    t.x.resize(n, static_cast<Index>(cols - 1));
    for (std::size_t r = start; r < lines.size(); ++r) {
        const auto& [no, line] = lines[r];
        const auto cells = split(line, t.delimiter);
        if (cells.size() != cols) {
            throw ArgumentError("line " + std::to_string(no) + ": expected " + std::to_string(cols) + " fields, found " +
                                std::to_string(cells.size()));
        }
        const auto i = static_cast<Index>(r - start);
        Index j = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            double v = 0.0;
            if (!parse_number(cells[c], v) || !std::isfinite(v)) {
                throw DataError("line " + std::to_string(no) + ", column " + std::to_string(c + 1) + " ('" + names[c] +
                                "'): cannot use '" + cells[c] + "' as a finite number");
            }
            if (c == resp) {
                t.y[i] = v;
            } else {
                t.x(i, j++) = v;
            }
        }
    }
    t.response_name = names[resp];
    for (std::size_t c = 0; c < cols; ++c) {
        if (c != resp) t.covariate_names.push_back(names[c]);
    }
    return t;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_full(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace dpdsis
