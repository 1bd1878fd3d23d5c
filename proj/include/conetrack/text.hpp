#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace conetrack {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Throws CorruptFile when `text` is not entirely a number.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char delimiter);
std::string_view trim(std::string_view text);

} // namespace conetrack
