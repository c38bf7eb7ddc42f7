#include "pbt/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "pbt/common.hpp"

namespace pbt {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
  require(row.size() == header.size(), "csv: row has " + std::to_string(row.size()) + " fields, header has " +
                                           std::to_string(header.size()));
  rows.push_back(std::move(row));
}

namespace {
void write_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    require(fields[i].find_first_of(",\n") == std::string::npos, "csv: field contains a separator");
    os << (i ? "," : "") << fields[i];
  }
  os << '\n';
}
}  // namespace

void CsvTable::write(std::ostream& os) const {
  for (const auto& c : comments) os << "# " << c << '\n';
  write_line(os, header);
  for (const auto& r : rows) write_line(os, r);
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      t.comments.push_back(line.substr(2));
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size()) throw FormatError("csv: ragged row '" + line + "'");
      t.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) throw FormatError("csv: missing header");
  return t;
}

}  // namespace pbt
