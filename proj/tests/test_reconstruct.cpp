#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "gcflow/metric.hpp"
#include "gcflow/reconstruct.hpp"

using namespace gcflow;

namespace {

constexpr double kTwoPi = 6.2831853071795865;

double sech2(double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); }

AnalyticSecondFF catenoid_h() {
  return AnalyticSecondFF(
      [](double x, double) { return SecondFF<double>{-sech2(x), 0.0, sech2(x)}; });
}

AnalyticSecondFF helicoid_h() {
  return AnalyticSecondFF(
      [](double, double y) { return SecondFF<double>{0.0, 1.0 / (1.0 + y * y), 0.0}; });
}

Eigen::Vector3d catenoid_chart(double x, double y) {
  return {std::cosh(x) * std::cos(y), std::cosh(x) * std::sin(y), x};
}

Eigen::Vector3d helicoid_chart(double x, double y) {
  return {y * std::cos(x), y * std::sin(x), x};
}

std::vector<Eigen::Vector3d> analytic_vertices(const MeshGridSpec& spec,
                                               Eigen::Vector3d (*chart)(double, double)) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>(spec.nx) * spec.ny);
  for (int i = 0; i < spec.nx; ++i)
    for (int j = 0; j < spec.ny; ++j) out.push_back(chart(spec.x(i), spec.y(j)));
  return out;
}

}  // namespace

TEST_CASE("initial frame factorizations") {
  auto flat = make_builtin_metric("flat");
  const Frame f = initial_frame(*flat, 0.2, 0.3);
  CHECK((f.t1 - Eigen::Vector3d(1, 0, 0)).norm() == doctest::Approx(0.0));
  CHECK((f.t2 - Eigen::Vector3d(0, 1, 0)).norm() == doctest::Approx(0.0));
  CHECK((f.n - Eigen::Vector3d(0, 0, 1)).norm() == doctest::Approx(0.0));

  auto catenoid = make_builtin_metric("catenoid");
  const Frame fc = initial_frame(*catenoid, 0.0, 0.0);  // g = I on the waist
  CHECK((fc.t1 - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-15);
  CHECK((fc.t2 - Eigen::Vector3d(0, 1, 0)).norm() <= 1e-15);

  auto helicoid = make_builtin_metric("helicoid", Domain{-1, 1, -3, 3, false});
  const Frame fh = initial_frame(*helicoid, 0.0, 2.0);
  CHECK(fh.t1(0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(fh.t1(1) == 0.0);
  CHECK((fh.t2 - Eigen::Vector3d(0, 1, 0)).norm() <= 1e-15);

  // Frame invariants hold exactly at the factorization point.
  const MetricJet jet = helicoid->jet(0.0, 2.0);
  CHECK(fh.t1.dot(fh.t1) == doctest::Approx(jet.g11).epsilon(1e-15));
  CHECK(fh.t1.dot(fh.t2) == doctest::Approx(jet.g12));
  CHECK(fh.t2.dot(fh.t2) == doctest::Approx(jet.g22));
}

TEST_CASE("flat metric with vanishing h integrates to the plane") {
  auto flat = make_builtin_metric("flat", Domain{0, 1, 0, 1, false});
  const AnalyticSecondFF zero([](double, double) { return SecondFF<double>{0, 0, 0}; });
  MeshGridSpec spec{17, 17, 0, 1, 0, 1, false};
  const Frame f0 = initial_frame(*flat, 0, 0);
  const SurfaceMesh mesh = integrate_frame(*flat, zero, spec, f0, Eigen::Vector3d::Zero());
  for (int i = 0; i < spec.nx; ++i)
    for (int j = 0; j < spec.ny; ++j) {
      const Eigen::Vector3d expect(spec.x(i), spec.y(j), 0.0);
      CHECK((mesh.at(i, j) - expect).norm() <= 1e-12);
    }
}

TEST_CASE("catenoid reconstruction matches the analytic chart after alignment") {
  auto metric = make_builtin_metric("catenoid", Domain{0, 1, 0, kTwoPi, true});
  const AnalyticSecondFF h = catenoid_h();
  MeshGridSpec spec{49, 48, 0, 1, 0, kTwoPi, true};
  const Frame f0 = initial_frame(*metric, 0, 0);
  const SurfaceMesh mesh = integrate_frame(*metric, h, spec, f0, Eigen::Vector3d::Zero());

  const auto target = analytic_vertices(spec, catenoid_chart);
  const RigidTransform t = align_rigid(mesh.position, target);
  CHECK(t.max_error <= 2e-4);
  CHECK(std::fabs(t.rotation.determinant() - 1.0) <= 1e-12);

  // Frame Gram drift stays at the projection tolerance on smooth data.
  CHECK(frame_gram_drift(mesh, *metric) <= 1e-6);
}

TEST_CASE("helicoid reconstruction matches the analytic chart after alignment") {
  Domain d{-0.8, 0.8, -1.0, 1.0, false};
  auto metric = make_builtin_metric("helicoid", d);
  const AnalyticSecondFF h = helicoid_h();
  MeshGridSpec spec{41, 41, d.x0, d.x1, d.y0, d.y1, false};
  const Frame f0 = initial_frame(*metric, spec.x0, spec.y0);
  const SurfaceMesh mesh = integrate_frame(*metric, h, spec, f0, Eigen::Vector3d::Zero());

  const auto target = analytic_vertices(spec, helicoid_chart);
  const RigidTransform t = align_rigid(mesh.position, target);
  CHECK(t.max_error <= 2e-5);
}

TEST_CASE("discrete fundamental forms: plane and sampled catenoid") {
  // Plane mesh: I = identity, II = 0 exactly.
  MeshGridSpec pspec{9, 9, 0, 1, 0, 1, false};
  SurfaceMesh plane;
  plane.spec = pspec;
  plane.position.resize(81);
  plane.frames.resize(81);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      plane.position[plane.index(i, j)] = Eigen::Vector3d(pspec.x(i), pspec.y(j), 0.0);
  const auto [pi, pii] = discrete_fundamental_forms(plane);
  for (int i = 1; i < 8; ++i)
    for (int j = 1; j < 8; ++j) {
      const std::size_t id = plane.index(i, j);
      CHECK(pi.a11[id] == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(pi.a12[id] == doctest::Approx(0.0));
      CHECK(pi.a22[id] == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(pii.a11[id] == doctest::Approx(0.0));
      CHECK(pii.a22[id] == doctest::Approx(0.0));
    }
  // Boundary vertices carry no stencil.
  CHECK(std::isnan(pi.a11[plane.index(0, 4)]));

  // Analytic catenoid sampled directly (no integration): I within O(h^2) of
  // cosh^2 x * Id, II within O(h^2) of diag(-1, 1).
  auto metric = make_builtin_metric("catenoid", Domain{0, 1, 0, kTwoPi, true});
  for (int n : {32, 64}) {
    MeshGridSpec spec{n + 1, n, 0, 1, 0, kTwoPi, true};
    SurfaceMesh mesh;
    mesh.spec = spec;
    mesh.position = analytic_vertices(spec, catenoid_chart);
    mesh.frames.resize(mesh.position.size());
    const FormErrorStats ei = first_form_error(mesh, *metric);
    const double hy = spec.dy();
    CHECK(ei.max_abs <= 1.5 * hy * hy);  // leading constant is cosh^2(1)/3

    const auto [fi, fii] = discrete_fundamental_forms(mesh);
    double worst = 0.0;
    for (int i = 1; i < spec.nx - 1; ++i)
      for (int j = 0; j < spec.ny; ++j) {
        const std::size_t id = mesh.index(i, j);
        worst = std::max(worst, std::fabs(fii.a11[id] + 1.0));
        worst = std::max(worst, std::fabs(fii.a12[id]));
        worst = std::max(worst, std::fabs(fii.a22[id] - 1.0));
      }
    CHECK(worst <= 2.0 * hy * hy);
  }
}

TEST_CASE("second form error against the exact h-field") {
  auto metric = make_builtin_metric("catenoid", Domain{0, 1, 0, kTwoPi, true});
  const AnalyticSecondFF h = catenoid_h();
  MeshGridSpec spec{33, 32, 0, 1, 0, kTwoPi, true};
  SurfaceMesh mesh;
  mesh.spec = spec;
  mesh.position = analytic_vertices(spec, catenoid_chart);
  mesh.frames.resize(mesh.position.size());
  const FormErrorStats e = second_form_error(mesh, *metric, h);
  CHECK(e.max_abs <= 0.1);
  CHECK(e.max_abs > 0.0);
}

TEST_CASE("align_rigid recovers exact motions and refuses reflections") {
  std::vector<Eigen::Vector3d> cloud;
  for (int i = 0; i < 40; ++i)
    cloud.emplace_back(std::sin(0.37 * i), std::cos(0.91 * i + 0.2), 0.1 * i);

  // Identical clouds: identity to machine precision.
  const RigidTransform id = align_rigid(cloud, cloud);
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(id.translation.norm() <= 1e-12);
  CHECK(id.rms_error <= 1e-12);

  // Known 30-degree rotation about z plus a shift.
  const double c = std::cos(0.52359877559829887), s = std::sin(0.52359877559829887);
  Eigen::Matrix3d rot;
  rot << c, -s, 0, s, c, 0, 0, 0, 1;
  const Eigen::Vector3d shift(0.3, -1.2, 2.0);
  std::vector<Eigen::Vector3d> moved;
  for (const auto& p : cloud) moved.push_back(rot * p + shift);
  const RigidTransform t = align_rigid(cloud, moved);
  CHECK((t.rotation - rot).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((t.translation - shift).norm() <= 1e-10);
  CHECK(t.rms_error <= 1e-12);

  // Mirrored cloud: the fit stays a proper rotation and keeps a residual.
  std::vector<Eigen::Vector3d> mirrored;
  for (const auto& p : cloud) mirrored.emplace_back(-p.x(), p.y(), p.z());
  const RigidTransform mt = align_rigid(cloud, mirrored);
  CHECK(mt.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mt.rms_error > 1e-3);
}

TEST_CASE("align_rigid rejects degenerate configurations") {
  std::vector<Eigen::Vector3d> line, target;
  for (int i = 0; i < 10; ++i) {
    line.emplace_back(i, 0.0, 0.0);
    target.emplace_back(0.0, i, 0.0);
  }
  CHECK_THROWS_AS(align_rigid(line, target), Error);
  try {
    align_rigid(line, target);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateConfiguration);
  }
}

TEST_CASE("path commutation: small for exact data, linear in an injected violation") {
  auto metric = make_builtin_metric("catenoid", Domain{0, 1, 0, kTwoPi, true});
  MeshGridSpec spec{65, 64, 0, 1, 0, kTwoPi, true};

  const double base = path_commutation_error(*metric, catenoid_h(), spec);
  CHECK(base <= 1e-6);

  auto perturbed = [](double a) {
    return AnalyticSecondFF([a](double x, double y) {
      return SecondFF<double>{-sech2(x), a * std::sin(y) * std::sin(3.0 * x), sech2(x)};
    });
  };
  const double c2 = path_commutation_error(*metric, perturbed(1e-2), spec);
  const double c3 = path_commutation_error(*metric, perturbed(1e-3), spec);
  CHECK(c2 > 50.0 * base);
  const double ratio = c2 / c3;
  CHECK(ratio >= 6.0);
  CHECK(ratio <= 16.0);
}

TEST_CASE("frame drift beyond the tolerance raises FrameDrift") {
  auto metric = make_builtin_metric("catenoid", Domain{0, 1, 0, kTwoPi, true});
  MeshGridSpec spec{17, 16, 0, 1, 0, kTwoPi, true};
  IntegrateOptions opts;
  opts.drift_tol = 1e-15;  // below one step's local error
  const Frame f0 = initial_frame(*metric, 0, 0);
  CHECK_THROWS_AS(integrate_frame(*metric, catenoid_h(), spec, f0, Eigen::Vector3d::Zero(), opts),
                  Error);
}

TEST_CASE("column integration is deterministic across thread counts") {
  auto metric = make_builtin_metric("catenoid", Domain{0, 1, 0, kTwoPi, true});
  MeshGridSpec spec{33, 32, 0, 1, 0, kTwoPi, true};
  const Frame f0 = initial_frame(*metric, 0, 0);
  IntegrateOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const SurfaceMesh a =
      integrate_frame(*metric, catenoid_h(), spec, f0, Eigen::Vector3d::Zero(), one);
  const SurfaceMesh b =
      integrate_frame(*metric, catenoid_h(), spec, f0, Eigen::Vector3d::Zero(), many);
  for (std::size_t k = 0; k < a.position.size(); ++k) {
    CHECK(a.position[k].x() == b.position[k].x());
    CHECK(a.position[k].y() == b.position[k].y());
    CHECK(a.position[k].z() == b.position[k].z());
  }
}
