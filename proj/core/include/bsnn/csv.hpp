#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bsnn::csv {

// Minimal CSV of unquoted fields. Numeric formatting uses shortest
// round-trip so written floats parse back bit-identical.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string format_float(float v);
std::string format_double(double v);
float parse_float(const std::string& s);

void write_file(const std::string& path, const Table& table);
Table read_file(const std::string& path);

}  // namespace bsnn::csv
