#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "gcflow/fluid.hpp"

using namespace gcflow;

namespace {
constexpr double kSqrt2 = 1.414213562373095;
}

TEST_CASE("fluid_to_lmn on hand-evaluated states") {
  // rho=1, u=sqrt2, v=0, p=-1 -> (-1, 0, 1)
  const auto f1 = fluid_to_lmn(FluidState<double>::from_velocity(1.0, kSqrt2, 0.0));
  CHECK(f1.L == doctest::Approx(-1.0));
  CHECK(f1.M == doctest::Approx(0.0));
  CHECK(f1.N == doctest::Approx(1.0));

  // rho=1, u=1, v=1 -> (0, -1, 0)
  const auto f2 = fluid_to_lmn(FluidState<double>::from_velocity(1.0, 1.0, 1.0));
  CHECK(f2.L == doctest::Approx(0.0));
  CHECK(f2.M == doctest::Approx(-1.0));
  CHECK(f2.N == doctest::Approx(0.0));

  // Stagnation: L = N = p.
  const auto f3 = fluid_to_lmn(FluidState<double>::from_velocity(2.0, 0.0, 0.0));
  CHECK(f3.L == doctest::Approx(-0.5));
  CHECK(f3.M == doctest::Approx(0.0));
  CHECK(f3.N == doctest::Approx(-0.5));
}

TEST_CASE("lmn_to_fluid on hand-inverted states") {
  const auto s1 = lmn_to_fluid(SecondFF<double>{-1.0, 0.0, 1.0}, -1.0);
  CHECK(s1.rho == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s1.u == doctest::Approx(kSqrt2).epsilon(1e-14));
  CHECK(s1.v == doctest::Approx(0.0));
  CHECK(s1.p == doctest::Approx(-1.0).epsilon(1e-14));

  // uv = -M/rho fixes equal signs here.
  const auto s2 = lmn_to_fluid(SecondFF<double>{0.0, -1.0, 0.0}, -1.0);
  CHECK(s2.rho == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s2.u == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s2.v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s2.p == doctest::Approx(-1.0).epsilon(1e-14));

  const auto s3 = lmn_to_fluid(SecondFF<double>{-0.5, 0.0, -0.5}, 0.25);
  CHECK(s3.rho == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s3.u == doctest::Approx(0.0));
  CHECK(s3.v == doctest::Approx(0.0));
  CHECK(s3.p == doctest::Approx(-0.5).epsilon(1e-14));

  // Helicoid state at y=1: (0, 1/2, 0) with kappa = -1/4; M > 0 flips v.
  const auto s4 = lmn_to_fluid(SecondFF<double>{0.0, 0.5, 0.0}, -0.25);
  CHECK(s4.rho == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s4.u == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s4.v == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(s4.p == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("lmn_to_fluid error paths") {
  // kappa > 0 with L + N > 0 leaves no negative pressure root.
  CHECK_THROWS_AS(lmn_to_fluid(SecondFF<double>{2.0, 1.0, 1.5}, 1.0), Error);
  try {
    lmn_to_fluid(SecondFF<double>{2.0, 1.0, 1.5}, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoNegativeRoot);
  }
  // kappa = 0 puts the negative root at zero.
  CHECK_THROWS_AS(lmn_to_fluid(SecondFF<double>{1.0, 1.0, 1.0}, 0.0), Error);

  // Constraint mismatch between (L, M, N) and kappa.
  try {
    lmn_to_fluid(SecondFF<double>{-1.0, 0.0, 1.0}, -2.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConstraintViolation);
  }
}

TEST_CASE("bernoulli density and sound speed") {
  const auto [rho1, p1] = bernoulli_density(5.0, -1.0);
  CHECK(rho1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p1 == doctest::Approx(-2.0).epsilon(1e-15));

  const auto [rho2, p2] = bernoulli_density(0.0, 4.0);
  CHECK(rho2 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p2 == doctest::Approx(-2.0).epsilon(1e-15));

  CHECK_THROWS_AS(bernoulli_density(1.0, -1.0), Error);
  try {
    bernoulli_density(1.0, -1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SonicDegeneracy);
  }

  CHECK(sound_speed(0.5) == doctest::Approx(2.0));
}

TEST_CASE("classification is set by the sign of kappa") {
  CHECK(classify(1.0) == FlowType::Subsonic);
  CHECK(classify(-1.0) == FlowType::Supersonic);
  CHECK(classify(0.0) == FlowType::Sonic);
  CHECK(classify(5e-13) == FlowType::Sonic);
  CHECK(classify(-5e-13) == FlowType::Sonic);
}

TEST_CASE("gauss residual") {
  FluidState<double> s{0.5, 0.0, 0.0, -2.0};
  s.u = std::sqrt(5.0);  // q^2 = 5, Bernoulli-consistent with kappa = -1
  CHECK(std::fabs(gauss_residual(s, -1.0)) <= 1e-14);

  const FluidState<double> t{1.0, kSqrt2, 0.0, -1.0};
  CHECK(gauss_residual(t, 0.0) == doctest::Approx(-1.0));
  CHECK(gauss_residual(t, -1.0) == doctest::Approx(0.0));
}

namespace {

// Gauge-normalize: (u, v) and (-u, -v) encode the same state.
FluidState<double> normalize_gauge(FluidState<double> s) {
  if (s.u < 0.0 || (s.u == 0.0 && s.v < 0.0)) {
    s.u = -s.u;
    s.v = -s.v;
  }
  return s;
}

void check_close(double a, double b, double tol) {
  CHECK(std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b)));
}

}  // namespace

TEST_CASE("roundtrip property: 1e4 random states at 1e-12 relative") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> rho_dist(0.1, 10.0);
  std::uniform_real_distribution<double> q_dist(0.0, 10.0);
  std::uniform_real_distribution<double> angle_dist(0.0, 6.2831853071795865);

  for (int trial = 0; trial < 10000; ++trial) {
    const double rho = rho_dist(rng);
    const double q = q_dist(rng);
    const double angle = angle_dist(rng);
    FluidState<double> s = FluidState<double>::from_velocity(rho, q * std::cos(angle),
                                                             q * std::sin(angle));
    const double kappa = gauss_residual(s, 0.0);  // rho p q^2 + p^2
    const SecondFF<double> f = fluid_to_lmn(s);
    const FluidState<double> rt = lmn_to_fluid(f, kappa);
    const FluidState<double> ref = normalize_gauge(s);

    check_close(rt.rho, ref.rho, 1e-12);
    check_close(rt.p, ref.p, 1e-12);
    check_close(rt.u, ref.u, 1e-12);
    check_close(rt.v, ref.v, 1e-12);

    // Root identity with the selected p.
    CHECK(std::fabs((f.N - rt.p) * (f.L - rt.p) - f.M * f.M) <=
          1e-12 * std::max(1.0, f.M * f.M));
    // Chaplygin closure survives the roundtrip.
    CHECK(std::fabs(rt.rho * (-rt.p) - 1.0) <= 1e-14);
  }
}

TEST_CASE("roundtrip covers axis-aligned and tiny velocities") {
  // M = 0 with both orientations, and near-stagnation states whose velocity
  // information rides entirely in M.
  for (auto [rho, u, v] : {std::tuple{2.0, 3.0, 0.0},
                           std::tuple{2.0, 0.0, 3.0},
                           std::tuple{0.5, 1e-7, 2.0},
                           std::tuple{4.0, 2.0, -1e-9},
                           std::tuple{1.0, 1e-8, 1e-8}}) {
    FluidState<double> s = FluidState<double>::from_velocity(rho, u, v);
    const double kappa = gauss_residual(s, 0.0);
    const FluidState<double> rt = lmn_to_fluid(fluid_to_lmn(s), kappa);
    const FluidState<double> ref = normalize_gauge(s);
    check_close(rt.u, ref.u, 1e-12);
    check_close(rt.v, ref.v, 1e-12);
    check_close(rt.rho, ref.rho, 1e-12);
  }
}

TEST_CASE("bernoulli chain: c^2 - q^2 - kappa vanishes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> q2_dist(0.0, 100.0);
  std::uniform_real_distribution<double> kappa_dist(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double q2 = q2_dist(rng);
    const double kappa = kappa_dist(rng);
    if (q2 + kappa <= 1e-6) continue;
    const auto [rho, p] = bernoulli_density(q2, kappa);
    const double c = sound_speed(rho);
    CHECK(std::fabs(c * c - q2 - kappa) <= 1e-12 * std::max(1.0, q2));
    CHECK(std::fabs(rho * (-p) - 1.0) <= 1e-14);
  }
}

TEST_CASE("long double instantiation agrees with double") {
  const auto s = lmn_to_fluid(SecondFF<long double>{-1.0L, 0.0L, 1.0L}, -1.0L);
  CHECK(static_cast<double>(s.u) == doctest::Approx(kSqrt2).epsilon(1e-15));
}
