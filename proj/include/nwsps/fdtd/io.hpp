#pragma once

#include <iosfwd>
#include <string>

#include "nwsps/fdtd/solver.hpp"

namespace nwsps::fdtd {

// x, y (m) and |E|^2 for every interior cell. `stride` subsamples the map.
void write_field_csv(std::ostream& out, const FieldIntensityMap& map, const CellRect& region,
                     const std::string& provenance_line, int stride = 1);

// monitor id, time-averaged flux (W/m), converged flag.
void write_monitors_csv(std::ostream& out, const MonitorReport& report, const std::string& provenance_line);

// File name used for a map: fields_<frequency in THz, 6 digits>.csv
std::string field_file_name(double frequency);

}  // namespace nwsps::fdtd
