#pragma once

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "subpt/common.hpp"

namespace subpt::textio {

// 17 significant digits round-trips any double through decimal text.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_row(const std::vector<double>& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ' ';
        out += fmt(row[i]);
    }
    return out;
}

inline std::vector<double> parse_row(const std::string& line, std::size_t expect,
                                     const std::string& what) {
    std::istringstream ss(line);
    std::vector<double> row;
    double x;
    while (ss >> x) row.push_back(x);
    if (row.size() != expect)
        throw Error("BadFormat", what + ": expected " + std::to_string(expect) +
                                     " values, got " + std::to_string(row.size()));
    if (!all_finite(row)) throw Error("NonFinite", what + ": non-finite value");
    return row;
}

}  // namespace subpt::textio
