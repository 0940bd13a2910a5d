#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace aabtp::csv {

// Split one line on commas, trimming surrounding whitespace and a trailing '\r'.
std::vector<std::string> split(std::string_view line);

// Whole-field parse; throws ParseError (row) on anything that is not a finite number.
double parse_double(std::string_view field, std::size_t row);
long parse_int(std::string_view field, std::size_t row);

// Shortest representation that round-trips to the same double.
std::string format(double value);

// Reads the next non-empty line; false at end of stream.
bool next_line(std::istream& in, std::string& line, std::size_t& row);

}  // namespace aabtp::csv
