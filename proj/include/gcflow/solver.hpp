#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gcflow/fluid.hpp"
#include "gcflow/metric.hpp"

namespace gcflow {

struct Grid1D {
  int n;
  double y0, y1;
  bool periodic = true;

  Grid1D(int n_, double y0_, double y1_, bool periodic_ = true)
      : n(n_), y0(y0_), y1(y1_), periodic(periodic_) {
    if (n < 8) throw Error(ErrorCode::Validation, "grid needs n >= 8 cells");
    if (!(y1 > y0)) throw Error(ErrorCode::Validation, "grid needs y1 > y0");
  }

  // Periodic grids place n nodes on [y0, y1); bounded grids include both ends.
  double dy() const { return periodic ? (y1 - y0) / n : (y1 - y0) / (n - 1); }
  double y(int i) const { return y0 + i * dy(); }
};

enum class FluxScheme { CentralViscous, LocalLaxFriedrichs };

struct SolverConfig {
  double epsilon = 1e-3;
  double dx = 0.0;  // 0: derive from the CFL limits at the initial slice
  double cfl_safety = 0.4;
  FluxScheme flux = FluxScheme::CentralViscous;
  std::function<bool(double, double)> region_predicate;  // inside(u, v); optional
  long max_steps = 1000000;
  int threads = 1;
  // Extra per-point source appended to (R1, R2); used by manufactured-solution runs.
  std::function<std::pair<double, double>(double, double)> forcing;
};

struct SolutionSlice {
  double x = 0.0;
  Eigen::ArrayXd u, v;
};

/// Pointwise closure of a slice: Bernoulli density, Chaplygin pressure and the
/// induced (L, M, N), plus the curvature samples they must satisfy.
struct DerivedSlice {
  Eigen::ArrayXd rho, p, L, M, N, kappa;
};

struct SourceTerms {
  Eigen::ArrayXd R1, R2;
};

struct StepRecord {
  double x_from = 0, x_to = 0, dx = 0;
  double lambda_max = 0;
  double dx_limit_hyperbolic = 0, dx_limit_parabolic = 0;
  double max_gauss_residual = 0;
  double entropy_rot_increment = 0, entropy_cont_increment = 0;
  long region_violations = 0;
};

struct RegionViolation {
  double x = 0, y = 0, u = 0, v = 0;
};

struct WeakResidualSummary {
  double max_eq1 = 0, max_eq2 = 0;
};

struct Diagnostics {
  std::vector<StepRecord> steps;
  double entropy_rot_total = 0, entropy_cont_total = 0;
  long region_violations_total = 0;
  std::optional<RegionViolation> first_region_violation;
  WeakResidualSummary final_weak;
  std::string error;  // empty when the march completed
};

enum class RunStatus { Completed, SonicDegeneracy, CflViolation };

struct SolutionField {
  Grid1D grid;
  std::vector<double> xs;
  std::vector<Eigen::ArrayXd> u, v;

  int slice_count() const { return static_cast<int>(xs.size()); }
};

struct RunResult {
  SolutionField field;
  Diagnostics diagnostics;
  RunStatus status = RunStatus::Completed;
};

/// Christoffel symbols and curvature sampled along a constant-x line.
struct MetricLine {
  Eigen::ArrayXd kappa;
  Eigen::ArrayXd g1_11, g1_12, g1_22;  // Gamma^(1)_ij
  Eigen::ArrayXd g2_11, g2_12, g2_22;  // Gamma^(2)_ij
};

MetricLine sample_metric_line(const MetricField& m, double x, const Grid1D& grid, int threads);

DerivedSlice derive_slice(const SolutionSlice& slice, const MetricLine& line);
DerivedSlice derive_slice(const SolutionSlice& slice, const Grid1D& grid, const MetricField& m);

SourceTerms source_terms(const DerivedSlice& d, const MetricLine& line);
SourceTerms source_terms(const SolutionSlice& slice, const Grid1D& grid, const MetricField& m);

/// Finite-difference Jacobian of the y-flux (L, -M) with respect to the
/// conserved pair (rho u v, rho u^2 + p) at fixed kappa.
Eigen::Matrix2d y_flux_jacobian_fd(double w1, double w2, double kappa);

/// Largest characteristic-speed magnitude over a slice (fixed-order scan).
double max_char_speed(const Eigen::ArrayXd& w1, const Eigen::ArrayXd& w2,
                      const Eigen::ArrayXd& kappa);

/// One Heun step of size cfg.dx (which must be positive). Throws CflViolation
/// and SonicDegeneracy.
SolutionSlice step(const SolutionSlice& slice, const SolverConfig& cfg, const Grid1D& grid,
                   const MetricField& m, StepRecord* record = nullptr);

/// Marches from init to x_end. Numerical failures stop the march and are
/// reported in the result status and diagnostics; the partial field is kept.
RunResult run(const SolutionSlice& init, double x_end, const SolverConfig& cfg,
              const Grid1D& grid, const MetricField& m);

}  // namespace gcflow
