#pragma once

#include <span>
#include <vector>

#include "gcflow/metric.hpp"
#include "gcflow/solver.hpp"

namespace gcflow {

/// Compactly supported C^2 bump, phi = B((x-cx)/rx) B((y-cy)/ry) with
/// B(t) = (1-t^2)^3 on |t| < 1.
struct BumpTestFunction {
  double cx, cy, rx, ry;

  double value(double x, double y) const;
  double ddx(double x, double y) const;
  double ddy(double x, double y) const;
};

/// A fixed family of five bumps spanning the domain interior.
std::vector<BumpTestFunction> default_test_functions(double x0, double x1, double y0, double y1);

/// Distributional residuals of the two momentum balance laws, evaluated by
/// midpoint quadrature over the stored field:
///   eq1(phi) = integral of M phi_x - L phi_y + RHS1 phi
///   eq2(phi) = integral of N phi_x - M phi_y + RHS2 phi
/// Both vanish to quadrature accuracy on exact solutions.
struct WeakResidualReport {
  std::vector<double> eq1, eq2;
  double max_abs() const;
};

WeakResidualReport weak_codazzi_residual(const SolutionField& field, const MetricField& m,
                                         std::span<const BumpTestFunction> test_fns);

/// Signed residuals of the rotationality-continuity pair against nonnegative
/// test functions. Reported, never asserted: for weak solutions these act as
/// one-sided entropy quantities whose sign pattern is itself the observable.
struct EntropyReport {
  std::vector<double> rotationality, continuity;
  double max_abs() const;
};

EntropyReport entropy_production(const SolutionField& field, const MetricField& m,
                                 std::span<const BumpTestFunction> test_fns);

/// max over stored nodes of |L N - M^2 - kappa|.
double max_gauss_constraint_residual(const SolutionField& field, const MetricField& m);

}  // namespace gcflow
