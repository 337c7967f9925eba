#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fopkit::text {

// Shortest representation that parses back to the same double.
std::string format_double(double x);
// Fixed number of decimals, for human-facing tables.
std::string format_fixed(double x, int decimals);

// Each parse_* throws DataError naming `what` on malformed input.
double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);
std::uint64_t parse_uint(std::string_view s, std::string_view what);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
std::vector<std::string_view> lines(std::string_view s);

}  // namespace fopkit::text
