#include "gcflow/weak_form.hpp"

#include <cmath>

#include "gcflow/accumulate.hpp"

namespace gcflow {

namespace {

double bump(double t) {
  if (std::fabs(t) >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  return s * s * s;
}

double bump_derivative(double t) {
  if (std::fabs(t) >= 1.0) return 0.0;
  const double s = 1.0 - t * t;
  return -6.0 * t * s * s;
}

}  // namespace

double BumpTestFunction::value(double x, double y) const {
  return bump((x - cx) / rx) * bump((y - cy) / ry);
}

double BumpTestFunction::ddx(double x, double y) const {
  return bump_derivative((x - cx) / rx) / rx * bump((y - cy) / ry);
}

double BumpTestFunction::ddy(double x, double y) const {
  return bump((x - cx) / rx) * bump_derivative((y - cy) / ry) / ry;
}

std::vector<BumpTestFunction> default_test_functions(double x0, double x1, double y0, double y1) {
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const double w = x1 - x0, h = y1 - y0;
  return {
      {cx, cy, 0.45 * w, 0.45 * h},
      {cx - 0.2 * w, cy - 0.2 * h, 0.25 * w, 0.25 * h},
      {cx + 0.2 * w, cy - 0.2 * h, 0.25 * w, 0.25 * h},
      {cx - 0.2 * w, cy + 0.2 * h, 0.25 * w, 0.25 * h},
      {cx + 0.2 * w, cy + 0.2 * h, 0.25 * w, 0.25 * h},
  };
}

double WeakResidualReport::max_abs() const {
  double m = 0.0;
  for (double r : eq1) m = std::max(m, std::fabs(r));
  for (double r : eq2) m = std::max(m, std::fabs(r));
  return m;
}

double EntropyReport::max_abs() const {
  double m = 0.0;
  for (double r : rotationality) m = std::max(m, std::fabs(r));
  for (double r : continuity) m = std::max(m, std::fabs(r));
  return m;
}

namespace {

double uniform_spacing(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error(ErrorCode::Validation, "field needs at least two slices");
  const double h = xs[1] - xs[0];
  for (std::size_t j = 1; j + 1 < xs.size(); ++j)
    if (std::fabs((xs[j + 1] - xs[j]) - h) > 1e-9 * std::max(1.0, std::fabs(h)))
      throw Error(ErrorCode::Validation, "field slices are not uniformly spaced in x");
  return h;
}

}  // namespace

WeakResidualReport weak_codazzi_residual(const SolutionField& field, const MetricField& m,
                                         std::span<const BumpTestFunction> test_fns) {
  const Grid1D& grid = field.grid;
  const double hx = uniform_spacing(field.xs);
  const double hy = grid.dy();
  const double cell = hx * hy;

  WeakResidualReport report;
  std::vector<NeumaierSum> acc1(test_fns.size()), acc2(test_fns.size());
  for (int j = 0; j < field.slice_count(); ++j) {
    const double x = field.xs[j];
    const MetricLine line = sample_metric_line(m, x, grid, 1);
    const SolutionSlice slice{x, field.u[j], field.v[j]};
    const DerivedSlice d = derive_slice(slice, line);
    const SourceTerms src = source_terms(d, line);
    // RHS of the Codazzi pair in (g1)-form: d_x M - d_y L = -R1, d_x N - d_y M = R2.
    for (int i = 0; i < grid.n; ++i) {
      const double y = grid.y(i);
      for (std::size_t t = 0; t < test_fns.size(); ++t) {
        const double phi = test_fns[t].value(x, y);
        const double phix = test_fns[t].ddx(x, y);
        const double phiy = test_fns[t].ddy(x, y);
        if (phi == 0.0 && phix == 0.0 && phiy == 0.0) continue;
        acc1[t].add((d.M(i) * phix - d.L(i) * phiy + (-src.R1(i)) * phi) * cell);
        acc2[t].add((d.N(i) * phix - d.M(i) * phiy + src.R2(i) * phi) * cell);
      }
    }
  }
  for (std::size_t t = 0; t < test_fns.size(); ++t) {
    report.eq1.push_back(acc1[t].value());
    report.eq2.push_back(acc2[t].value());
  }
  return report;
}

EntropyReport entropy_production(const SolutionField& field, const MetricField& m,
                                 std::span<const BumpTestFunction> test_fns) {
  const Grid1D& grid = field.grid;
  const double hx = uniform_spacing(field.xs);
  const double hy = grid.dy();
  const double cell = hx * hy;

  EntropyReport report;
  std::vector<NeumaierSum> rot(test_fns.size()), cont(test_fns.size());
  for (int j = 0; j < field.slice_count(); ++j) {
    const double x = field.xs[j];
    const MetricLine line = sample_metric_line(m, x, grid, 1);
    const SolutionSlice slice{x, field.u[j], field.v[j]};
    const DerivedSlice d = derive_slice(slice, line);
    const SourceTerms src = source_terms(d, line);
    for (int i = 0; i < grid.n; ++i) {
      const double y = grid.y(i);
      const double u = slice.u(i), v = slice.v(i);
      const double q2 = u * u + v * v;
      if (q2 < 1e-14) continue;
      for (std::size_t t = 0; t < test_fns.size(); ++t) {
        const double phi = test_fns[t].value(x, y);
        const double phix = test_fns[t].ddx(x, y);
        const double phiy = test_fns[t].ddy(x, y);
        if (phi == 0.0 && phix == 0.0 && phiy == 0.0) continue;
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        if (phi != 0.0) grad = kappa_gradient(m, x, y);
        const double s_rot = (u * (0.5 * d.rho(i) * grad(1) + src.R1(i)) -
                              v * (0.5 * d.rho(i) * grad(0) + src.R2(i))) /
                             (d.rho(i) * q2);
        // Signed residual integral of d_x A + d_y B - S against phi:
        // -(A phi_x + B phi_y + S phi) summed over nodes.
        rot[t].add(-(v * phix - u * phiy + s_rot * phi) * cell);
        const double s_cont = 0.5 * d.rho(i) * u / q2 * grad(0) +
                              0.5 * d.rho(i) * v / q2 * grad(1) +
                              (v * src.R1(i) + u * src.R2(i)) / q2;
        cont[t].add(-(d.rho(i) * u * phix + d.rho(i) * v * phiy + s_cont * phi) * cell);
      }
    }
  }
  for (std::size_t t = 0; t < test_fns.size(); ++t) {
    report.rotationality.push_back(rot[t].value());
    report.continuity.push_back(cont[t].value());
  }
  return report;
}

double max_gauss_constraint_residual(const SolutionField& field, const MetricField& m) {
  const Grid1D& grid = field.grid;
  double worst = 0.0;
  for (int j = 0; j < field.slice_count(); ++j) {
    const MetricLine line = sample_metric_line(m, field.xs[j], grid, 1);
    const SolutionSlice slice{field.xs[j], field.u[j], field.v[j]};
    const DerivedSlice d = derive_slice(slice, line);
    for (int i = 0; i < grid.n; ++i)
      worst = std::max(worst, std::fabs(d.L(i) * d.N(i) - d.M(i) * d.M(i) - d.kappa(i)));
  }
  return worst;
}

}  // namespace gcflow
