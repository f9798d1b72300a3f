#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nwsps::csv {

// Shortest round-trippable is not what we want here: every float in output
// files is written with 9 significant digits.
std::string format_number(double value);

// RFC-4180 field quoting (quotes, commas, CR/LF).
std::string quote(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Minimal reader for numeric CSV with a header row. Throws InvalidArgument
// naming the line on malformed input.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};
Table read(std::istream& in);
std::vector<std::string> split_line(std::string_view line);

}  // namespace nwsps::csv
