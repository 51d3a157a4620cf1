#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "gcflow/metric.hpp"
#include "gcflow/solver.hpp"
#include "gcflow/weak_form.hpp"

using namespace gcflow;

namespace {

constexpr double kTwoPi = 6.2831853071795865;
constexpr double kSqrt2 = 1.414213562373095;

double sech2(double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); }

SolutionField sampled_field(const Grid1D& grid, double x0, double x1, int slices,
                            const std::function<double(double, double)>& u,
                            const std::function<double(double, double)>& v) {
  SolutionField field{grid, {}, {}, {}};
  for (int j = 0; j < slices; ++j) {
    const double x = x0 + (x1 - x0) * j / (slices - 1);
    Eigen::ArrayXd uj(grid.n), vj(grid.n);
    for (int i = 0; i < grid.n; ++i) {
      uj(i) = u(x, grid.y(i));
      vj(i) = v(x, grid.y(i));
    }
    field.xs.push_back(x);
    field.u.push_back(std::move(uj));
    field.v.push_back(std::move(vj));
  }
  return field;
}

}  // namespace

TEST_CASE("test function bumps are C1 with compact support") {
  const BumpTestFunction b{0.0, 0.0, 1.0, 1.0};
  CHECK(b.value(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(b.value(1.0, 0.0) == 0.0);
  CHECK(b.value(2.0, 0.3) == 0.0);
  CHECK(b.ddx(1.0 - 1e-9, 0.0) == doctest::Approx(0.0).epsilon(1e-6));
  // Centered difference agrees with the analytic derivative.
  const double h = 1e-6;
  const double fd = (b.value(0.3 + h, 0.2) - b.value(0.3 - h, 0.2)) / (2 * h);
  CHECK(b.ddx(0.3, 0.2) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("weak residual of the sampled exact catenoid field converges at order >= 1.9") {
  auto catenoid = make_builtin_metric("catenoid");
  auto u_exact = [](double x, double) { return kSqrt2 * sech2(x); };
  auto v_exact = [](double, double) { return 0.0; };

  std::vector<double> residuals;
  for (int n : {24, 48, 96}) {
    Grid1D grid(n, 0.0, kTwoPi);
    const SolutionField field = sampled_field(grid, 0.0, 1.0, n + 1, u_exact, v_exact);
    const auto bumps = default_test_functions(0.0, 1.0, 0.0, kTwoPi);
    const WeakResidualReport report = weak_codazzi_residual(field, *catenoid, bumps);
    residuals.push_back(report.max_abs());
    // The Gauss constraint is an identity of the closure.
    CHECK(max_gauss_constraint_residual(field, *catenoid) <= 1e-12);
  }
  CHECK(residuals[0] > residuals[1]);
  CHECK(residuals[1] > residuals[2]);
  for (std::size_t l = 0; l + 1 < residuals.size(); ++l)
    CHECK(std::log2(residuals[l] / residuals[l + 1]) >= 1.9);
}

TEST_CASE("random noise fields have residuals orders of magnitude above exact ones") {
  auto flat = make_builtin_metric("flat");
  Grid1D grid(48, 0.0, kTwoPi);
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u_dist(1.2, 2.2);
  std::uniform_real_distribution<double> v_dist(-0.5, 0.5);

  const SolutionField noise = sampled_field(
      grid, 0.0, 1.0, 49, [&](double, double) { return u_dist(rng); },
      [&](double, double) { return v_dist(rng); });
  const SolutionField constant = sampled_field(
      grid, 0.0, 1.0, 49, [](double, double) { return 1.7; },
      [](double, double) { return 0.2; });

  const auto bumps = default_test_functions(0.0, 1.0, 0.0, kTwoPi);
  const double r_noise = weak_codazzi_residual(noise, *flat, bumps).max_abs();
  const double r_const = weak_codazzi_residual(constant, *flat, bumps).max_abs();
  CHECK(r_noise >= 1e-2);             // not small
  CHECK(r_noise >= 1e6 * r_const);    // constants solve the flat system exactly
}

TEST_CASE("entropy production vanishes for smooth exact and constant fields") {
  auto catenoid = make_builtin_metric("catenoid");
  Grid1D grid(64, 0.0, kTwoPi);
  const SolutionField exact = sampled_field(
      grid, 0.0, 1.0, 65, [](double x, double) { return kSqrt2 * sech2(x); },
      [](double, double) { return 0.0; });
  const auto bumps = default_test_functions(0.0, 1.0, 0.0, kTwoPi);
  const EntropyReport smooth = entropy_production(exact, *catenoid, bumps);
  CHECK(smooth.max_abs() <= 1e-4);  // quadrature error of a vanishing residual

  // Constant state on the flat metric: every term is identically zero.
  auto flat = make_builtin_metric("flat");
  const SolutionField constant = sampled_field(
      grid, 0.0, 1.0, 33, [](double, double) { return 2.0; },
      [](double, double) { return 0.5; });
  const EntropyReport zero = entropy_production(constant, *flat, bumps);
  CHECK(zero.max_abs() <= 1e-13);
}

TEST_CASE("entropy report is signed and per test function") {
  auto flat = make_builtin_metric("flat");
  Grid1D grid(32, 0.0, kTwoPi);
  // A rotational field violates the irrotationality residual with a sign.
  const SolutionField field = sampled_field(
      grid, 0.0, 1.0, 33, [](double, double y) { return 2.0 + 0.3 * std::sin(y); },
      [](double x, double) { return 0.8 + 0.3 * x; });
  const auto bumps = default_test_functions(0.0, 1.0, 0.0, kTwoPi);
  const EntropyReport rep = entropy_production(field, *flat, bumps);
  REQUIRE(rep.rotationality.size() == bumps.size());
  REQUIRE(rep.continuity.size() == bumps.size());
  CHECK(rep.max_abs() > 1e-3);
}

TEST_CASE("non-uniform slice spacing is rejected") {
  auto flat = make_builtin_metric("flat");
  Grid1D grid(16, 0.0, kTwoPi);
  SolutionField field{grid, {0.0, 0.1, 0.3}, {}, {}};
  for (int j = 0; j < 3; ++j) {
    field.u.push_back(Eigen::ArrayXd::Constant(grid.n, 2.0));
    field.v.push_back(Eigen::ArrayXd::Constant(grid.n, 0.5));
  }
  const auto bumps = default_test_functions(0.0, 0.3, 0.0, kTwoPi);
  CHECK_THROWS_AS(weak_codazzi_residual(field, *flat, bumps), Error);
}
