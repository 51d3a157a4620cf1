#pragma once

#include <filesystem>

#include "gcflow/reconstruct.hpp"

namespace gcflow {

/// ASCII Wavefront OBJ: `v x y z` per vertex in row-major order (1-based),
/// quad faces; periodic meshes wrap the last row of faces around the seam.
void write_obj(const SurfaceMesh& mesh, const std::filesystem::path& path);

/// JSON sidecar with provenance and per-vertex fundamental-form error norms
/// (null where no interior stencil applies). Pass nullptr for hfield to skip
/// the second-form comparison.
void write_mesh_report(const SurfaceMesh& mesh, const MetricField& m, const SecondFFField* hfield,
                       const std::filesystem::path& path);

}  // namespace gcflow
