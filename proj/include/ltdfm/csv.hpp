#pragma once

#include <string>

#include "ltdfm/types.hpp"

namespace ltdfm {

// First column is the time index, remaining columns are channels named in the
// header. Values are written with shortest round-trip formatting so that
// ingest(emit(x)) == x bit-for-bit.
void write_csv(const std::string& path, const ObservationMatrix& data);

// drop_leading rows are removed first, then every stride-th row is kept.
ObservationMatrix read_csv(const std::string& path, int stride = 1, int drop_leading = 0);

std::string format_double(double v);

}  // namespace ltdfm
