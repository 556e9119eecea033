#pragma once

// Small text helpers shared by the CSV readers and writers.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kscope {

/// printf-style %.{digits}g formatting; 6 significant digits for reports,
/// 9 for f32 round-trip and 17 for f64 round-trip.
std::string format_number(double value, int significant_digits = 6);

double parse_double(std::string_view field);
std::uint64_t parse_uint(std::string_view field);

/// Splits one CSV line on commas. Fields are not quoted in any of our formats.
std::vector<std::string_view> split_csv(std::string_view line);

}  // namespace kscope
