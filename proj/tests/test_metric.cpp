#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gcflow/metric.hpp"

using namespace gcflow;

namespace {

// Closed-form curvature oracles for the builtin charts.
double catenoid_kappa(double x) {
  const double c = std::cosh(x);
  return -1.0 / (c * c * c * c);
}
double helicoid_kappa(double y) { return -1.0 / ((1.0 + y * y) * (1.0 + y * y)); }

constexpr double kTanh1 = 0.76159415595576489;

}  // namespace

TEST_CASE("inverse metric on the builtin charts") {
  auto flat = make_builtin_metric("flat");
  const Eigen::Matrix2d inv_flat = inverse_metric(flat->jet(0.3, 0.7));
  CHECK(inv_flat(0, 0) == doctest::Approx(1.0));
  CHECK(inv_flat(0, 1) == doctest::Approx(0.0));
  CHECK(inv_flat(1, 1) == doctest::Approx(1.0));

  // cosh^2(0) = 1, so the catenoid chart is Euclidean on the waist circle.
  auto catenoid = make_builtin_metric("catenoid");
  const Eigen::Matrix2d inv_cat = inverse_metric(catenoid->jet(0.0, 1.0));
  CHECK(inv_cat(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(inv_cat(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

  auto helicoid = make_builtin_metric("helicoid");
  const Eigen::Matrix2d inv_hel = inverse_metric(helicoid->jet(0.0, 1.0));
  CHECK(inv_hel(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(inv_hel(0, 1) == doctest::Approx(0.0));
  CHECK(inv_hel(1, 1) == doctest::Approx(1.0));

  // Product with the metric is the identity to machine precision.
  const MetricJet jet = helicoid->jet(0.4, 0.8);
  const Eigen::Matrix2d prod = jet.tensor() * inverse_metric(jet);
  CHECK((prod - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("degenerate metrics are rejected") {
  MetricJet jet;
  jet.g11 = 1.0;
  jet.g12 = 1.0;
  jet.g22 = 1.0;  // |g| = 0
  CHECK_THROWS_AS(inverse_metric(jet), Error);
  try {
    inverse_metric(jet);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateMetric);
  }
  jet.g11 = -1.0;
  CHECK_THROWS_AS(inverse_metric(jet), Error);
}

TEST_CASE("christoffel symbols: flat metric vanishes, builtins match closed forms") {
  auto flat = make_builtin_metric("flat");
  const Christoffel gf = christoffel(*flat, 0.2, 0.9);
  for (int k = 1; k <= 2; ++k)
    for (int i = 1; i <= 2; ++i)
      for (int j = 1; j <= 2; ++j) CHECK(gf(k, i, j) == 0.0);

  // Conformal factor cosh^2 x: nonzero symbols are tanh x in three slots.
  auto catenoid = make_builtin_metric("catenoid");
  const Christoffel gc = christoffel(*catenoid, 1.0, 0.5);
  CHECK(gc(1, 1, 1) == doctest::Approx(kTanh1).epsilon(1e-14));
  CHECK(gc(1, 2, 2) == doctest::Approx(-kTanh1).epsilon(1e-14));
  CHECK(gc(2, 1, 2) == doctest::Approx(kTanh1).epsilon(1e-14));
  CHECK(gc(1, 1, 2) == doctest::Approx(0.0));
  CHECK(gc(2, 1, 1) == doctest::Approx(0.0));
  CHECK(gc(2, 2, 2) == doctest::Approx(0.0));

  auto helicoid = make_builtin_metric("helicoid");
  const Christoffel gh = christoffel(*helicoid, 0.3, 1.0);
  CHECK(gh(1, 1, 2) == doctest::Approx(0.5).epsilon(1e-14));   // y/(1+y^2) at y=1
  CHECK(gh(2, 1, 1) == doctest::Approx(-1.0).epsilon(1e-14));  // -y at y=1
  CHECK(gh(1, 1, 1) == doctest::Approx(0.0));
  CHECK(gh(1, 2, 2) == doctest::Approx(0.0));
  CHECK(gh(2, 1, 2) == doctest::Approx(0.0));
  CHECK(gh(2, 2, 2) == doctest::Approx(0.0));

  // Lower-index symmetry is structural: the (1,2) and (2,1) slots coincide.
  CHECK(gh(1, 1, 2) == gh(1, 2, 1));
  CHECK(gc(2, 1, 2) == gc(2, 2, 1));
}

TEST_CASE("gauss curvature matches the closed forms in analytic mode") {
  auto flat = make_builtin_metric("flat");
  CHECK(gauss_curvature(*flat, 0.5, 0.5) == doctest::Approx(0.0));

  auto catenoid = make_builtin_metric("catenoid");
  CHECK(gauss_curvature(*catenoid, 0.0, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
  for (double x : {-0.9, -0.3, 0.2, 0.7})
    CHECK(gauss_curvature(*catenoid, x, 1.0) ==
          doctest::Approx(catenoid_kappa(x)).epsilon(1e-12));

  auto helicoid = make_builtin_metric("helicoid");
  CHECK(gauss_curvature(*helicoid, 0.0, 1.0) == doctest::Approx(-0.25).epsilon(1e-12));
  for (double y : {-0.8, -0.1, 0.4, 0.9})
    CHECK(gauss_curvature(*helicoid, 0.5, y) ==
          doctest::Approx(helicoid_kappa(y)).epsilon(1e-12));
}

TEST_CASE("kappa * |g| equals R1212 pointwise") {
  auto catenoid = make_builtin_metric("catenoid");
  for (double x : {-0.7, 0.0, 0.4}) {
    const MetricJet jet = catenoid->jet(x, 0.3);
    const Curvature c = curvature(jet);
    CHECK(c.kappa * jet.det() == doctest::Approx(c.r1212).epsilon(1e-13));
  }
}

TEST_CASE("finite-difference mode converges at second order to the analytic values") {
  auto catenoid = make_builtin_metric("catenoid");
  auto helicoid = make_builtin_metric("helicoid");

  // Gamma and kappa at a node present at every refinement level.
  auto fd_errors = [](const MetricField& analytic, double px, double py, int ny_extra) {
    std::vector<double> kappa_err, gamma_err;
    for (int n : {32, 64, 128}) {
      auto fd = sample_to_grid_metric(analytic, n + 1, n + ny_extra);
      const double ek =
          std::fabs(gauss_curvature(*fd, px, py) - gauss_curvature(analytic, px, py));
      kappa_err.push_back(ek);
      const Christoffel ga = christoffel(analytic, px, py);
      const Christoffel gf = christoffel(*fd, px, py);
      double eg = 0.0;
      for (int k = 1; k <= 2; ++k)
        for (int i = 1; i <= 2; ++i)
          for (int j = i; j <= 2; ++j)
            eg = std::max(eg, std::fabs(ga(k, i, j) - gf(k, i, j)));
      gamma_err.push_back(eg);
    }
    return std::pair{kappa_err, gamma_err};
  };

  // Query points sit on grid nodes at every level (periodic y keeps n nodes,
  // bounded y needs n+1 so that y = 0.5 stays a node).
  const auto [kc, gc] = fd_errors(*catenoid, 0.0, 3.1415926535897932, 0);
  for (std::size_t l = 0; l + 1 < kc.size(); ++l) {
    CHECK(std::log2(kc[l] / kc[l + 1]) > 1.9);
    CHECK(std::log2(gc[l] / gc[l + 1]) > 1.9);
  }
  const auto [kh, gh] = fd_errors(*helicoid, 0.0, 0.5, 1);
  for (std::size_t l = 0; l + 1 < kh.size(); ++l) {
    CHECK(std::log2(kh[l] / kh[l + 1]) > 1.9);
    CHECK(std::log2(gh[l] / gh[l + 1]) > 1.9);
  }
}

TEST_CASE("grid metric rejects queries outside its domain") {
  auto catenoid = make_builtin_metric("catenoid");
  auto fd = sample_to_grid_metric(*catenoid, 17, 16);
  CHECK_THROWS_AS(fd->jet(1.5, 0.0), Error);
  try {
    fd->jet(1.5, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StencilOutOfDomain);
  }
  // Periodic y wraps instead of failing.
  CHECK_NOTHROW(fd->jet(0.0, 100.0));
  // Boundary nodes use one-sided stencils rather than failing.
  CHECK_NOTHROW(fd->jet(-1.0, 0.0));
  CHECK(gauss_curvature(*fd, -1.0, 0.0) ==
        doctest::Approx(catenoid_kappa(-1.0)).epsilon(5e-2));
}

TEST_CASE("grid metric validates shape and definiteness") {
  const std::vector<double> xs = {0.0, 0.5, 1.0};  // too few nodes
  const std::vector<double> ys = {0.0, 0.5, 1.0, 1.5};
  std::vector<double> ones(12, 1.0), zeros(12, 0.0);
  CHECK_THROWS_AS(make_grid_metric(xs, ys, ones, zeros, ones, false), Error);

  const std::vector<double> xs4 = {0.0, 0.5, 1.0, 1.5};
  std::vector<double> g11(16, 1.0), g12(16, 0.0), g22(16, 1.0);
  CHECK_NOTHROW(make_grid_metric(xs4, ys, g11, g12, g22, false));
  g12[5] = 1.0;  // |g| = 0 at one node
  CHECK_THROWS_AS(make_grid_metric(xs4, ys, g11, g12, g22, false), Error);
}

TEST_CASE("expression metric reproduces the catenoid chart") {
  Domain d{-1.0, 1.0, 0.0, 6.2831853071795865, true};
  auto expr = make_expression_metric("cosh(x)^2", "0", "cosh(x)^2", d);
  auto builtin = make_builtin_metric("catenoid", d);
  for (double x : {-0.6, 0.0, 0.8}) {
    const MetricJet a = expr->jet(x, 1.0);
    const MetricJet b = builtin->jet(x, 1.0);
    CHECK(a.g11 == doctest::Approx(b.g11).epsilon(1e-14));
    CHECK(a.dg11(0) == doctest::Approx(b.dg11(0)).epsilon(1e-9));
    CHECK(a.hg11(0, 0) == doctest::Approx(b.hg11(0, 0)).epsilon(1e-6));
    CHECK(gauss_curvature(*expr, x, 1.0) ==
          doctest::Approx(catenoid_kappa(x)).epsilon(1e-6));
  }
}

TEST_CASE("builtin tags are validated") {
  CHECK_THROWS_AS(make_builtin_metric("moebius"), Error);
  try {
    make_builtin_metric("moebius");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownTag);
  }
}

TEST_CASE("builtin chart values") {
  auto catenoid = make_builtin_metric("catenoid");
  const MetricJet c = catenoid->jet(0.5, 2.0);
  CHECK(c.g11 == doctest::Approx(1.2715403174076219).epsilon(1e-15));  // cosh^2(0.5)
  CHECK(c.g22 == doctest::Approx(1.2715403174076219).epsilon(1e-15));
  CHECK(c.g12 == 0.0);

  auto helicoid = make_builtin_metric("helicoid");
  const MetricJet h = helicoid->jet(0.1, 2.0);
  CHECK(h.g11 == doctest::Approx(5.0));
  CHECK(h.g12 == 0.0);
  CHECK(h.g22 == doctest::Approx(1.0));
}
