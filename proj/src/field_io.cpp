#include "gcflow/field_io.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gcflow/csv.hpp"

namespace gcflow {

void write_field_csv(const SolutionField& field, const MetricField& m,
                     const std::filesystem::path& path) {
  std::string out = "x,y,u,v,rho,p,L,M,N,kappa\n";
  const Grid1D& grid = field.grid;
  for (int j = 0; j < field.slice_count(); ++j) {
    const SolutionSlice slice{field.xs[j], field.u[j], field.v[j]};
    DerivedSlice d;
    bool ok = true;
    try {
      d = derive_slice(slice, grid, m);
    } catch (const Error&) {
      ok = false;  // partial fields may end on a degenerate slice
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < grid.n; ++i) {
      out += format_double(slice.x);
      out += ',';
      out += format_double(grid.y(i));
      out += ',';
      out += format_double(slice.u(i));
      out += ',';
      out += format_double(slice.v(i));
      for (const double value :
           {ok ? d.rho(i) : nan, ok ? d.p(i) : nan, ok ? d.L(i) : nan, ok ? d.M(i) : nan,
            ok ? d.N(i) : nan, ok ? d.kappa(i) : nan}) {
        out += ',';
        out += format_double(value);
      }
      out += '\n';
    }
  }
  atomic_write_text(path, out);
}

SolutionField read_field_csv(const std::filesystem::path& path, bool periodic_y) {
  const CsvTable table = read_numeric_csv(path);
  const int cx = table.column("x"), cy = table.column("y");
  const int cu = table.column("u"), cv = table.column("v");
  if (cx < 0 || cy < 0 || cu < 0 || cv < 0)
    throw Error(ErrorCode::Io, path.string() + ": header must contain x,y,u,v");
  if (table.rows.empty()) throw Error(ErrorCode::Io, path.string() + ": no data rows");

  // Slice-major layout: y cycles fastest.
  std::size_t n = 1;
  while (n < table.rows.size() && table.rows[n][cx] == table.rows[0][cx]) ++n;
  if (table.rows.size() % n != 0)
    throw Error(ErrorCode::Io, path.string() + ": ragged slice layout");
  const std::size_t slices = table.rows.size() / n;

  Grid1D grid(static_cast<int>(n), table.rows[0][cy],
              periodic_y ? table.rows[0][cy] +
                               n * (table.rows[1][cy] - table.rows[0][cy])
                         : table.rows[n - 1][cy],
              periodic_y);
  SolutionField field{grid, {}, {}, {}};
  for (std::size_t s = 0; s < slices; ++s) {
    Eigen::ArrayXd u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = table.rows[s * n + i];
      u(i) = row[cu];
      v(i) = row[cv];
    }
    field.xs.push_back(table.rows[s * n][cx]);
    field.u.push_back(std::move(u));
    field.v.push_back(std::move(v));
  }
  return field;
}

}  // namespace gcflow
