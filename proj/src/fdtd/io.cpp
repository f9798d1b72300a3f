#include "nwsps/fdtd/io.hpp"

#include <cstdio>
#include <ostream>

#include "nwsps/csv.hpp"

namespace nwsps::fdtd {

void write_field_csv(std::ostream& out, const FieldIntensityMap& map, const CellRect& region,
                     const std::string& provenance_line, int stride) {
  if (stride < 1) stride = 1;
  out << provenance_line << "\r\n";
  csv::write_row(out, {"x", "y", "e2"});
  for (int j = region.j0; j <= region.j1; j += stride)
    for (int i = region.i0; i <= region.i1; i += stride)
      csv::write_row(out, {csv::format_number(i * map.dx), csv::format_number(j * map.dx),
                           csv::format_number(map.at(i, j))});
}

void write_monitors_csv(std::ostream& out, const MonitorReport& report, const std::string& provenance_line) {
  out << provenance_line << "\r\n";
  csv::write_row(out, {"monitor", "flux", "converged"});
  for (const auto& f : report.fluxes)
    csv::write_row(out, {f.id, csv::format_number(f.mean_flux), report.converged ? "true" : "false"});
}

std::string field_file_name(double frequency) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "fields_%.6gTHz.csv", frequency * 1e-12);
  return buf;
}

}  // namespace nwsps::fdtd
