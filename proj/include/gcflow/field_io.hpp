#pragma once

#include <filesystem>

#include "gcflow/metric.hpp"
#include "gcflow/solver.hpp"

namespace gcflow {

/// Writes `x,y,u,v,rho,p,L,M,N,kappa` rows, slice-major. Values carry 17
/// significant digits so the file round-trips bit-exactly.
void write_field_csv(const SolutionField& field, const MetricField& m,
                     const std::filesystem::path& path);

/// Reads a field CSV back; only (x, y, u, v) are trusted, derived columns are
/// recomputed on demand. Periodicity is not stored in the file.
SolutionField read_field_csv(const std::filesystem::path& path, bool periodic_y);

}  // namespace gcflow
