#include "mevdro/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "mevdro/error.hpp"

namespace mevdro::csv {

std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(std::string_view field, std::string_view context) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ValidationError(std::string(context) + ": cannot parse number '" + std::string(field) +
                          "'");
  }
  return v;
}

void write_samples(std::ostream& out, const RowMatrix& samples) {
  for (std::size_t k = 0; k < samples.cols(); ++k) {
    out << (k ? "," : "") << "dim_" << (k + 1);
  }
  out << '\n';
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    for (std::size_t k = 0; k < samples.cols(); ++k) {
      out << (k ? "," : "") << format_double(samples(i, k));
    }
    out << '\n';
  }
}

RowMatrix read_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("samples csv: missing header");
  const auto header = split_line(line);
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] != "dim_" + std::to_string(k + 1)) {
      throw ValidationError("samples csv: header must be dim_1,...,dim_d");
    }
  }
  RowMatrix out(0, header.size());
  std::vector<double> row(header.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw ValidationError("samples csv: wrong field count on line " + std::to_string(line_no));
    }
    const std::string ctx = "samples csv line " + std::to_string(line_no);
    for (std::size_t k = 0; k < fields.size(); ++k) row[k] = parse_double(fields[k], ctx);
    out.append_row(row);
  }
  return out;
}

}  // namespace mevdro::csv
