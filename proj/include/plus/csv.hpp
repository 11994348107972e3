#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plus {

// Comma-separated, '.' decimal, UTF-8, mandatory header row. Lines starting
// with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& is);

std::vector<std::string> split_csv_line(const std::string& line);

double parse_double(const std::string& s, const std::string& context);

std::string format_double(double v);  // "%.17g", round-trips exactly

}  // namespace plus
