#include "aabtp/csv.hpp"

#include <charconv>
#include <cmath>

#include "aabtp/error.hpp"

namespace aabtp::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    const auto field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    out.emplace_back(trim(field));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t row) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError("non-numeric value '" + std::string(field) + "'", row);
  }
  return value;
}

long parse_int(std::string_view field, std::size_t row) {
  field = trim(field);
  long value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError("non-integer value '" + std::string(field) + "'", row);
  }
  return value;
}

std::string format(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

bool next_line(std::istream& in, std::string& line, std::size_t& row) {
  while (std::getline(in, line)) {
    ++row;
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace aabtp::csv
