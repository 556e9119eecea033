#include "kernelscope/text.hpp"

#include <charconv>
#include <cstdio>

#include "kernelscope/error.hpp"

namespace kscope {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string format_number(double value, int significant_digits) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.*g", significant_digits, value);
    return std::string(buf, static_cast<std::size_t>(n));
}

double parse_double(std::string_view field) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw FormatError("cannot parse '" + std::string(field) + "' as a real number");
    return v;
}

std::uint64_t parse_uint(std::string_view field) {
    field = trim(field);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw FormatError("cannot parse '" + std::string(field) + "' as a non-negative integer");
    return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace kscope
