#include "gcflow/mesh_io.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "gcflow/csv.hpp"

namespace gcflow {

void write_obj(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  std::string out = "# gcflow surface mesh " + std::to_string(mesh.spec.nx) + "x" +
                    std::to_string(mesh.spec.ny) + "\n";
  for (const auto& p : mesh.position) {
    out += "v ";
    out += format_double(p.x());
    out += ' ';
    out += format_double(p.y());
    out += ' ';
    out += format_double(p.z());
    out += '\n';
  }
  const int nx = mesh.spec.nx, ny = mesh.spec.ny;
  auto vid = [ny](int i, int j) { return i * ny + j + 1; };  // 1-based, row-major
  for (int i = 0; i + 1 < nx; ++i) {
    const int jmax = mesh.spec.periodic_y ? ny : ny - 1;
    for (int j = 0; j < jmax; ++j) {
      const int jp = (j + 1) % ny;
      out += "f " + std::to_string(vid(i, j)) + " " + std::to_string(vid(i + 1, j)) + " " +
             std::to_string(vid(i + 1, jp)) + " " + std::to_string(vid(i, jp)) + "\n";
    }
  }
  atomic_write_text(path, out);
}

void write_mesh_report(const SurfaceMesh& mesh, const MetricField& m, const SecondFFField* hfield,
                       const std::filesystem::path& path) {
  nlohmann::json j;
  j["provenance"] = {{"metric", mesh.metric_tag},
                     {"config_hash", mesh.provenance},
                     {"nx", mesh.spec.nx},
                     {"ny", mesh.spec.ny},
                     {"periodic_y", mesh.spec.periodic_y}};
  j["domain"] = {{"x0", mesh.spec.x0}, {"x1", mesh.spec.x1},
                 {"y0", mesh.spec.y0}, {"y1", mesh.spec.y1}};

  const auto [I, II] = discrete_fundamental_forms(mesh);
  const FormErrorStats ei = first_form_error(mesh, m);
  j["first_form_error"] = {{"max_abs", ei.max_abs}, {"max_rel", ei.max_rel}, {"rms", ei.rms}};

  // Per-vertex infinity-norm error of the discrete first fundamental form.
  std::vector<double> per_vertex(I.a11.size(), std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < mesh.spec.nx; ++i)
    for (int jj = 0; jj < mesh.spec.ny; ++jj) {
      const std::size_t id = mesh.index(i, jj);
      if (std::isnan(I.a11[id])) continue;
      const MetricJet jet = m.jet(mesh.spec.x(i), mesh.spec.y(jj));
      per_vertex[id] = std::max({std::fabs(I.a11[id] - jet.g11), std::fabs(I.a12[id] - jet.g12),
                                 std::fabs(I.a22[id] - jet.g22)});
    }
  j["first_form_error"]["per_vertex"] = per_vertex;  // NaN serializes as null

  if (hfield != nullptr) {
    const FormErrorStats eii = second_form_error(mesh, m, *hfield);
    j["second_form_error"] = {{"max_abs", eii.max_abs}, {"max_rel", eii.max_rel},
                              {"rms", eii.rms}};
    std::vector<double> per_vertex2(II.a11.size(), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < mesh.spec.nx; ++i)
      for (int jj = 0; jj < mesh.spec.ny; ++jj) {
        const std::size_t id = mesh.index(i, jj);
        if (std::isnan(II.a11[id])) continue;
        const double x = mesh.spec.x(i), y = mesh.spec.y(jj);
        const MetricJet jet = m.jet(x, y);
        const double root = std::sqrt(jet.det());
        const SecondFF<double> lmn = hfield->at(x, y);
        per_vertex2[id] =
            std::max({std::fabs(II.a11[id] - root * lmn.L), std::fabs(II.a12[id] - root * lmn.M),
                      std::fabs(II.a22[id] - root * lmn.N)});
      }
    j["second_form_error"]["per_vertex"] = per_vertex2;
  }

  j["frame_gram_drift"] = frame_gram_drift(mesh, m);
  atomic_write_text(path, j.dump(2) + "\n");
}

}  // namespace gcflow
