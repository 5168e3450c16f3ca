#pragma once

#include <cstdio>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mevdro/matrix.hpp"

namespace mevdro::csv {

/// Round-trippable decimal form: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Splits one line on commas; double-quoted fields may contain commas and
/// doubled quotes. A trailing '\r' is dropped.
std::vector<std::string> split_line(std::string_view line);

/// Parses a finite double; throws ValidationError naming `context` otherwise.
double parse_double(std::string_view field, std::string_view context);

/// Header dim_1,...,dim_d followed by one row per sample.
void write_samples(std::ostream& out, const RowMatrix& samples);
RowMatrix read_samples(std::istream& in);

}  // namespace mevdro::csv
