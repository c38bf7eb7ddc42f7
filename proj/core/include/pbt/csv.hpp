#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbt {

/// Shortest round-trippable text for a double ("inf", "-inf", "nan" for non-finite).
std::string format_real(double v);

struct CsvTable {
  /// Written first as "# <line>".
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  void write(std::ostream& os) const;
};

/// Reads a table written by CsvTable::write (no quoting; comments kept).
CsvTable read_csv(std::istream& is);

}  // namespace pbt
