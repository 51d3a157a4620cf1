#include "gcflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gcflow/accumulate.hpp"
#include "gcflow/parallel.hpp"
#include "gcflow/weak_form.hpp"

namespace gcflow {

namespace {

/// Per-cell failure collection for loops that run inside worker threads.
/// Workers must not throw; the first failing index (in index order) is
/// rethrown after the join so behavior does not depend on scheduling.
struct CellStatus {
  std::vector<int> code;
  std::vector<double> value;

  explicit CellStatus(int n) : code(n, -1), value(n, 0.0) {}

  void set(std::size_t i, ErrorCode c, double v) {
    code[i] = static_cast<int>(c);
    value[i] = v;
  }

  void check(const Grid1D& grid, double x, const char* what) const {
    for (std::size_t i = 0; i < code.size(); ++i) {
      if (code[i] >= 0) {
        throw Error(static_cast<ErrorCode>(code[i]),
                    std::string(what) + " at (x, y) = (" + format_double(x) + ", " +
                        format_double(grid.y(static_cast<int>(i))) + "), value " +
                        format_double(value[i]));
      }
    }
  }
};

int wrap_index(int i, int n, bool periodic) {
  if (periodic) return ((i % n) + n) % n;
  return std::clamp(i, 0, n - 1);  // copy-out boundary
}

}  // namespace

MetricLine sample_metric_line(const MetricField& m, double x, const Grid1D& grid, int threads) {
  const int n = grid.n;
  MetricLine line;
  line.kappa.resize(n);
  line.g1_11.resize(n);
  line.g1_12.resize(n);
  line.g1_22.resize(n);
  line.g2_11.resize(n);
  line.g2_12.resize(n);
  line.g2_22.resize(n);
  CellStatus status(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        const MetricJet jet = m.jet(x, grid.y(static_cast<int>(i)));
        const Christoffel G = christoffel(jet);
        line.kappa(i) = curvature(jet).kappa;
        line.g1_11(i) = G(1, 1, 1);
        line.g1_12(i) = G(1, 1, 2);
        line.g1_22(i) = G(1, 2, 2);
        line.g2_11(i) = G(2, 1, 1);
        line.g2_12(i) = G(2, 1, 2);
        line.g2_22(i) = G(2, 2, 2);
      } catch (const Error& err) {
        status.set(i, err.code(), 0.0);
      }
    }
  });
  status.check(grid, x, "metric evaluation failed");
  return line;
}

DerivedSlice derive_slice(const SolutionSlice& slice, const MetricLine& line) {
  const auto n = slice.u.size();
  DerivedSlice d;
  d.rho.resize(n);
  d.p.resize(n);
  d.L.resize(n);
  d.M.resize(n);
  d.N.resize(n);
  d.kappa = line.kappa;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q2 = slice.u(i) * slice.u(i) + slice.v(i) * slice.v(i);
    const double s = q2 + line.kappa(i);
    if (!(s > kSonicTol))
      throw Error(ErrorCode::SonicDegeneracy,
                  "q^2 + kappa = " + format_double(s) + " at cell " + std::to_string(i));
    const double root = std::sqrt(s);
    d.rho(i) = 1.0 / root;
    d.p(i) = -root;
    d.L(i) = d.rho(i) * slice.v(i) * slice.v(i) + d.p(i);
    d.M(i) = -d.rho(i) * slice.u(i) * slice.v(i);
    d.N(i) = d.rho(i) * slice.u(i) * slice.u(i) + d.p(i);
  }
  return d;
}

DerivedSlice derive_slice(const SolutionSlice& slice, const Grid1D& grid, const MetricField& m) {
  return derive_slice(slice, sample_metric_line(m, slice.x, grid, 1));
}

SourceTerms source_terms(const DerivedSlice& d, const MetricLine& line) {
  SourceTerms s;
  s.R1 = -d.L * line.g2_22 + 2.0 * d.M * line.g2_12 - d.N * line.g2_11;
  s.R2 = -d.L * line.g1_22 + 2.0 * d.M * line.g1_12 - d.N * line.g1_11;
  return s;
}

SourceTerms source_terms(const SolutionSlice& slice, const Grid1D& grid, const MetricField& m) {
  const MetricLine line = sample_metric_line(m, slice.x, grid, 1);
  return source_terms(derive_slice(slice, line), line);
}

namespace {

// y-flux of the conserved pair W = (rho u v, rho u^2 + p) under the Bernoulli
// closure: G(W) = ((kappa + w1^2) / w2, w1).
inline void y_flux_of_conserved(double w1, double w2, double kappa, double& g1, double& g2) {
  g1 = (kappa + w1 * w1) / w2;
  g2 = w1;
}

}  // namespace

Eigen::Matrix2d y_flux_jacobian_fd(double w1, double w2, double kappa) {
  const double d1 = 1e-6 * std::max(1.0, std::fabs(w1));
  const double d2 = 1e-6 * std::max(1.0, std::fabs(w2));
  double gp1, gp2, gm1, gm2;
  Eigen::Matrix2d jac;
  y_flux_of_conserved(w1 + d1, w2, kappa, gp1, gp2);
  y_flux_of_conserved(w1 - d1, w2, kappa, gm1, gm2);
  jac(0, 0) = (gp1 - gm1) / (2.0 * d1);
  jac(1, 0) = (gp2 - gm2) / (2.0 * d1);
  y_flux_of_conserved(w1, w2 + d2, kappa, gp1, gp2);
  y_flux_of_conserved(w1, w2 - d2, kappa, gm1, gm2);
  jac(0, 1) = (gp1 - gm1) / (2.0 * d2);
  jac(1, 1) = (gp2 - gm2) / (2.0 * d2);
  return jac;
}

namespace {

double spectral_bound(const Eigen::Matrix2d& jac) {
  const double tr = jac.trace();
  const double det = jac.determinant();
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    return std::max(std::fabs((tr + root) / 2.0), std::fabs((tr - root) / 2.0));
  }
  return std::sqrt(std::fabs(det));  // complex pair: use the modulus
}

double cell_char_speed(double w1, double w2, double kappa) {
  if (w2 == 0.0) return std::numeric_limits<double>::infinity();
  return spectral_bound(y_flux_jacobian_fd(w1, w2, kappa));
}

}  // namespace

double max_char_speed(const Eigen::ArrayXd& w1, const Eigen::ArrayXd& w2,
                      const Eigen::ArrayXd& kappa) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < w1.size(); ++i)
    best = std::max(best, cell_char_speed(w1(i), w2(i), kappa(i)));
  return best;
}

namespace {

struct StageData {
  DerivedSlice derived;
  Eigen::ArrayXd w1, w2;    // conserved pair
  Eigen::ArrayXd k1, k2;    // d/dx of the conserved pair
  Eigen::ArrayXd spd;       // per-cell characteristic speed bound
};

/// Assembles the semi-discrete right-hand side
///   dW/dx = -D_y G + R + eps D_yy (u, v)
/// for one slice. Central or local Lax-Friedrichs interface fluxes.
StageData compute_stage(const SolutionSlice& slice, const MetricLine& line,
                        const SolverConfig& cfg, const Grid1D& grid) {
  const int n = grid.n;
  const double dy = grid.dy();
  StageData st;
  st.derived = derive_slice(slice, line);
  const DerivedSlice& d = st.derived;

  st.w1 = -d.M;  // rho u v
  st.w2 = d.N;   // rho u^2 + p
  const SourceTerms src = source_terms(d, line);

  Eigen::ArrayXd G1 = d.L;
  Eigen::ArrayXd G2 = st.w1;
  Eigen::ArrayXd f1 = src.R1, f2 = src.R2;
  if (cfg.forcing) {
    for (int i = 0; i < n; ++i) {
      const auto [a, b] = cfg.forcing(slice.x, grid.y(i));
      f1(i) += a;
      f2(i) += b;
    }
  }

  st.spd.resize(n);
  for (int i = 0; i < n; ++i) st.spd(i) = cell_char_speed(st.w1(i), st.w2(i), d.kappa(i));

  // Interface fluxes; index i holds the i+1/2 interface.
  Eigen::ArrayXd h1(n), h2(n);
  const bool llf = cfg.flux == FluxScheme::LocalLaxFriedrichs;
  for (int i = 0; i < n; ++i) {
    const int r = wrap_index(i + 1, n, grid.periodic);
    h1(i) = 0.5 * (G1(i) + G1(r));
    h2(i) = 0.5 * (G2(i) + G2(r));
    if (llf) {
      const double a = std::max(st.spd(i), st.spd(r));
      h1(i) -= 0.5 * a * (st.w1(r) - st.w1(i));
      h2(i) -= 0.5 * a * (st.w2(r) - st.w2(i));
    }
  }

  st.k1.resize(n);
  st.k2.resize(n);
  const double visc = cfg.epsilon / (dy * dy);
  parallel_for(static_cast<std::size_t>(n), cfg.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const int ii = static_cast<int>(i);
      const int l = wrap_index(ii - 1, n, grid.periodic);
      const int r = wrap_index(ii + 1, n, grid.periodic);
      // Interface ii-1/2 lives at index ii-1; at a copy-out boundary the ghost
      // state equals the edge cell, so the interface flux collapses to G(0).
      double hl1, hl2;
      if (!grid.periodic && ii == 0) {
        hl1 = G1(0);
        hl2 = G2(0);
      } else {
        const int lf = wrap_index(ii - 1, n, grid.periodic);
        hl1 = h1(lf);
        hl2 = h2(lf);
      }
      const double div1 = (h1(ii) - hl1) / dy;
      const double div2 = (h2(ii) - hl2) / dy;
      const double lap_u = visc * (slice.u(r) - 2.0 * slice.u(ii) + slice.u(l));
      const double lap_v = visc * (slice.v(r) - 2.0 * slice.v(ii) + slice.v(l));
      st.k1(i) = -div1 + f1(ii) + lap_u;
      st.k2(i) = -div2 + f2(ii) + lap_v;
    }
  });
  return st;
}

/// Recovers (u, v) from the conserved pair: L follows from the Gauss
/// constraint, L = (kappa + w1^2) / w2, so the constraint holds identically
/// along the march.
void invert_conserved(const Eigen::ArrayXd& w1, const Eigen::ArrayXd& w2, const MetricLine& line,
                      int threads, Eigen::ArrayXd& u, Eigen::ArrayXd& v, CellStatus& status) {
  const auto n = w1.size();
  u.resize(n);
  v.resize(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double kappa = line.kappa(static_cast<Eigen::Index>(i));
      const double L = (kappa + w1(i) * w1(i)) / w2(i);
      if (!std::isfinite(L)) {
        status.set(i, ErrorCode::SonicDegeneracy, w2(i));
        continue;
      }
      try {
        const FluidState<double> s = lmn_to_fluid(SecondFF<double>{L, -w1(i), w2(i)}, kappa);
        u(i) = s.u;
        v(i) = s.v;
      } catch (const Error&) {
        // Leaving the Chaplygin regime mid-march is a sonic breakdown.
        status.set(i, ErrorCode::SonicDegeneracy, w2(i));
      }
    }
  });
}

struct EntropyIncrements {
  double rot = 0, cont = 0;
};

/// Strong-form residual of the rotationality-continuity pair, integrated over
/// the strip between two consecutive slices (midpoint in x, centered in y).
/// Diagnostic only: smooth exact solutions make both vanish.
EntropyIncrements entropy_increments(const SolutionSlice& a, const DerivedSlice& da,
                                     const SolutionSlice& b, const DerivedSlice& db,
                                     const Grid1D& grid, const MetricField& m) {
  const int n = grid.n;
  const double dx = b.x - a.x;
  const double dy = grid.dy();
  const double xm = 0.5 * (a.x + b.x);
  const MetricLine mid = sample_metric_line(m, xm, grid, 1);

  Eigen::ArrayXd um = 0.5 * (a.u + b.u);
  Eigen::ArrayXd vm = 0.5 * (a.v + b.v);
  SolutionSlice mids{xm, um, vm};
  DerivedSlice dm;
  try {
    dm = derive_slice(mids, mid);
  } catch (const Error&) {
    return {};  // strip touches the Bernoulli boundary; skip the diagnostic
  }
  const SourceTerms src = source_terms(dm, mid);

  Eigen::ArrayXd rho_u_a = da.rho * a.u, rho_u_b = db.rho * b.u;
  Eigen::ArrayXd rho_v_m = dm.rho * vm;

  NeumaierSum rot, cont;
  for (int i = 0; i < n; ++i) {
    const double q2 = um(i) * um(i) + vm(i) * vm(i);
    if (q2 < 1e-14) continue;
    const int l = wrap_index(i - 1, n, grid.periodic);
    const int r = wrap_index(i + 1, n, grid.periodic);
    const Eigen::Vector2d grad = kappa_gradient(m, xm, grid.y(i));

    const double dxv = (b.v(i) - a.v(i)) / dx;
    const double dyu = (um(r) - um(l)) / (2.0 * dy);
    const double s_rot = (um(i) * (0.5 * dm.rho(i) * grad(1) + src.R1(i)) -
                          vm(i) * (0.5 * dm.rho(i) * grad(0) + src.R2(i))) /
                         (dm.rho(i) * q2);
    rot.add((dxv - dyu - s_rot) * dx * dy);

    const double dx_rho_u = (rho_u_b(i) - rho_u_a(i)) / dx;
    const double dy_rho_v = (rho_v_m(r) - rho_v_m(l)) / (2.0 * dy);
    const double s_cont = 0.5 * dm.rho(i) * um(i) / q2 * grad(0) +
                          0.5 * dm.rho(i) * vm(i) / q2 * grad(1) +
                          (vm(i) * src.R1(i) + um(i) * src.R2(i)) / q2;
    cont.add((dx_rho_u + dy_rho_v - s_cont) * dx * dy);
  }
  return {rot.value(), cont.value()};
}

}  // namespace

SolutionSlice step(const SolutionSlice& slice, const SolverConfig& cfg, const Grid1D& grid,
                   const MetricField& m, StepRecord* record) {
  if (!(cfg.dx > 0.0)) throw Error(ErrorCode::Validation, "step requires dx > 0");
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::Validation, "viscosity must be positive");
  if (slice.u.size() != grid.n || slice.v.size() != grid.n)
    throw Error(ErrorCode::Validation, "slice size does not match grid");

  const double dy = grid.dy();
  const MetricLine line0 = sample_metric_line(m, slice.x, grid, cfg.threads);
  const StageData s0 = compute_stage(slice, line0, cfg, grid);

  const double lambda = s0.spd.size() ? s0.spd.maxCoeff() : 0.0;
  const double dx_hyp =
      lambda > 0.0 ? dy / lambda : std::numeric_limits<double>::infinity();
  const double dx_par = dy * dy / (2.0 * cfg.epsilon);
  const double limit = cfg.cfl_safety * std::min(dx_hyp, dx_par);
  if (cfg.dx > limit * (1.0 + 1e-9))
    throw Error(ErrorCode::CflViolation, "dx = " + format_double(cfg.dx) +
                                             " exceeds limit " + format_double(limit) +
                                             " (hyperbolic " + format_double(dx_hyp) +
                                             ", parabolic " + format_double(dx_par) + ")");

  const double x1 = slice.x + cfg.dx;
  const MetricLine line1 = sample_metric_line(m, x1, grid, cfg.threads);

  // Heun: predictor to x1, corrector with the averaged slope.
  CellStatus status(grid.n);
  SolutionSlice pred{x1, Eigen::ArrayXd(grid.n), Eigen::ArrayXd(grid.n)};
  {
    Eigen::ArrayXd w1s = s0.w1 + cfg.dx * s0.k1;
    Eigen::ArrayXd w2s = s0.w2 + cfg.dx * s0.k2;
    invert_conserved(w1s, w2s, line1, cfg.threads, pred.u, pred.v, status);
    status.check(grid, x1, "predictor left the Bernoulli domain");
  }
  const StageData s1 = compute_stage(pred, line1, cfg, grid);

  SolutionSlice next{x1, Eigen::ArrayXd(grid.n), Eigen::ArrayXd(grid.n)};
  {
    Eigen::ArrayXd w1n = s0.w1 + 0.5 * cfg.dx * (s0.k1 + s1.k1);
    Eigen::ArrayXd w2n = s0.w2 + 0.5 * cfg.dx * (s0.k2 + s1.k2);
    invert_conserved(w1n, w2n, line1, cfg.threads, next.u, next.v, status);
    status.check(grid, x1, "corrector left the Bernoulli domain");
  }

  if (record) {
    record->x_from = slice.x;
    record->x_to = x1;
    record->dx = cfg.dx;
    record->lambda_max = lambda;
    record->dx_limit_hyperbolic = dx_hyp;
    record->dx_limit_parabolic = dx_par;

    const DerivedSlice dn = derive_slice(next, line1);
    double gauss = 0.0;
    for (int i = 0; i < grid.n; ++i)
      gauss = std::max(gauss,
                       std::fabs(dn.L(i) * dn.N(i) - dn.M(i) * dn.M(i) - dn.kappa(i)));
    record->max_gauss_residual = gauss;

    const EntropyIncrements inc = entropy_increments(slice, s0.derived, next, dn, grid, m);
    record->entropy_rot_increment = inc.rot;
    record->entropy_cont_increment = inc.cont;

    record->region_violations = 0;
    if (cfg.region_predicate) {
      for (int i = 0; i < grid.n; ++i)
        if (!cfg.region_predicate(next.u(i), next.v(i))) ++record->region_violations;
    }
  }
  return next;
}

RunResult run(const SolutionSlice& init, double x_end, const SolverConfig& cfg,
              const Grid1D& grid, const MetricField& m) {
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::Validation, "viscosity must be positive");
  if (init.u.size() != grid.n || init.v.size() != grid.n)
    throw Error(ErrorCode::Validation, "initial slice size does not match grid");
  const double span = x_end - init.x;
  if (!(span > 0.0)) throw Error(ErrorCode::Validation, "x_end must exceed the initial x");

  RunResult result{SolutionField{grid, {}, {}, {}}, Diagnostics{}, RunStatus::Completed};
  result.field.xs.push_back(init.x);
  result.field.u.push_back(init.u);
  result.field.v.push_back(init.v);

  long steps = 0;
  SolverConfig local = cfg;
  try {
    double target = cfg.dx;
    if (!(target > 0.0)) {
      const MetricLine line = sample_metric_line(m, init.x, grid, cfg.threads);
      const StageData st = compute_stage(init, line, cfg, grid);
      const double lambda = st.spd.maxCoeff();
      const double dy = grid.dy();
      const double dx_hyp =
          lambda > 0.0 ? dy / lambda : std::numeric_limits<double>::infinity();
      target = cfg.cfl_safety * std::min(dx_hyp, dy * dy / (2.0 * cfg.epsilon));
    }
    if (!(target > span / static_cast<double>(cfg.max_steps)))
      throw Error(ErrorCode::CflViolation,
                  "step budget: dx = " + format_double(target) + " needs more than " +
                      std::to_string(cfg.max_steps) + " steps");
    steps = std::max<long>(1, static_cast<long>(std::ceil(span / target - 1e-12)));
    if (steps > cfg.max_steps)
      throw Error(ErrorCode::CflViolation, "step budget: " + std::to_string(steps) +
                                               " steps exceed max_steps");
  } catch (const Error& err) {
    if (err.code() != ErrorCode::SonicDegeneracy && err.code() != ErrorCode::CflViolation) throw;
    result.status = err.code() == ErrorCode::SonicDegeneracy ? RunStatus::SonicDegeneracy
                                                             : RunStatus::CflViolation;
    result.diagnostics.error = err.what();
    return result;
  }
  local.dx = span / static_cast<double>(steps);

  SolutionSlice current = init;
  for (long k = 0; k < steps; ++k) {
    StepRecord record;
    try {
      SolutionSlice next = step(current, local, grid, m, &record);
      current = std::move(next);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::SonicDegeneracy && err.code() != ErrorCode::CflViolation) throw;
      result.status = err.code() == ErrorCode::CflViolation ? RunStatus::CflViolation
                                                            : RunStatus::SonicDegeneracy;
      result.diagnostics.error = err.what();
      break;
    }
    result.diagnostics.steps.push_back(record);
    result.diagnostics.entropy_rot_total += record.entropy_rot_increment;
    result.diagnostics.entropy_cont_total += record.entropy_cont_increment;
    if (record.region_violations > 0) {
      result.diagnostics.region_violations_total += record.region_violations;
      if (!result.diagnostics.first_region_violation && cfg.region_predicate) {
        for (int i = 0; i < grid.n; ++i) {
          if (!cfg.region_predicate(current.u(i), current.v(i))) {
            result.diagnostics.first_region_violation =
                RegionViolation{current.x, grid.y(i), current.u(i), current.v(i)};
            break;
          }
        }
      }
    }
    result.field.xs.push_back(current.x);
    result.field.u.push_back(current.u);
    result.field.v.push_back(current.v);
  }

  if (result.field.slice_count() >= 2) {
    const auto bumps = default_test_functions(result.field.xs.front(), result.field.xs.back(),
                                              grid.y0, grid.y1);
    const WeakResidualReport report = weak_codazzi_residual(result.field, m, bumps);
    for (double r : report.eq1)
      result.diagnostics.final_weak.max_eq1 =
          std::max(result.diagnostics.final_weak.max_eq1, std::fabs(r));
    for (double r : report.eq2)
      result.diagnostics.final_weak.max_eq2 =
          std::max(result.diagnostics.final_weak.max_eq2, std::fabs(r));
  }
  return result;
}

}  // namespace gcflow
