#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gradlore::csv {

/// Shortest decimal text that reads back to the same double.
std::string format(double v);
double parse_double(std::string_view text);
std::vector<std::string> split(std::string_view line, char sep = ',');

}  // namespace gradlore::csv
