#include "gcflow/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gcflow/accumulate.hpp"
#include "gcflow/parallel.hpp"

namespace gcflow {

// ---------------------------------------------------------------------------
// Gridded second-fundamental-form field

GridSecondFF::GridSecondFF(std::vector<double> xs, Grid1D grid, std::vector<Eigen::ArrayXd> L,
                           std::vector<Eigen::ArrayXd> M, std::vector<Eigen::ArrayXd> N)
    : xs_(std::move(xs)), grid_(grid), L_(std::move(L)), M_(std::move(M)), N_(std::move(N)) {
  if (xs_.size() < 2 || L_.size() != xs_.size() || M_.size() != xs_.size() ||
      N_.size() != xs_.size())
    throw Error(ErrorCode::Validation, "gridded h-field needs matching slice arrays");
}

GridSecondFF GridSecondFF::from_solution(const SolutionField& field, const MetricField& m) {
  std::vector<Eigen::ArrayXd> L, M, N;
  L.reserve(field.xs.size());
  M.reserve(field.xs.size());
  N.reserve(field.xs.size());
  for (int j = 0; j < field.slice_count(); ++j) {
    const SolutionSlice slice{field.xs[j], field.u[j], field.v[j]};
    DerivedSlice d = derive_slice(slice, field.grid, m);
    L.push_back(std::move(d.L));
    M.push_back(std::move(d.M));
    N.push_back(std::move(d.N));
  }
  return GridSecondFF(field.xs, field.grid, std::move(L), std::move(M), std::move(N));
}

SecondFF<double> GridSecondFF::at(double x, double y) const {
  const double hx = xs_[1] - xs_[0];
  int jx = static_cast<int>(std::floor((x - xs_.front()) / hx));
  jx = std::clamp(jx, 0, static_cast<int>(xs_.size()) - 2);
  const double ax = std::clamp((x - xs_[jx]) / hx, 0.0, 1.0);

  const double dy = grid_.dy();
  int jy, jy1;
  double ay;
  if (grid_.periodic) {
    const double span = grid_.y1 - grid_.y0;
    double yy = y - std::floor((y - grid_.y0) / span) * span;
    jy = std::clamp(static_cast<int>(std::floor((yy - grid_.y0) / dy)), 0, grid_.n - 1);
    jy1 = (jy + 1) % grid_.n;
    ay = std::clamp((yy - grid_.y(jy)) / dy, 0.0, 1.0);
  } else {
    jy = std::clamp(static_cast<int>(std::floor((y - grid_.y0) / dy)), 0, grid_.n - 2);
    jy1 = jy + 1;
    ay = std::clamp((y - grid_.y(jy)) / dy, 0.0, 1.0);
  }

  auto blend = [&](const std::vector<Eigen::ArrayXd>& f) {
    return (1 - ax) * ((1 - ay) * f[jx](jy) + ay * f[jx](jy1)) +
           ax * ((1 - ay) * f[jx + 1](jy) + ay * f[jx + 1](jy1));
  };
  return SecondFF<double>{blend(L_), blend(M_), blend(N_)};
}

// ---------------------------------------------------------------------------
// Frame integration

Frame initial_frame(const MetricField& m, double x, double y) {
  const MetricJet jet = m.jet(x, y);
  const double det = jet.det();
  if (jet.g11 <= 0.0 || det <= kDegeneracyTol)
    throw Error(ErrorCode::DegenerateMetric, "at (" + format_double(x) + ", " +
                                                 format_double(y) + ")");
  Frame f;
  const double s11 = std::sqrt(jet.g11);
  f.t1 = {s11, 0.0, 0.0};
  f.t2 = {jet.g12 / s11, std::sqrt(det / jet.g11), 0.0};
  f.n = {0.0, 0.0, 1.0};
  return f;
}

namespace {

// State of the Gauss-Weingarten system along one coordinate line.
struct FrameState {
  Eigen::Vector3d r, t1, t2, n;
};

FrameState operator+(const FrameState& a, const FrameState& b) {
  return {a.r + b.r, a.t1 + b.t1, a.t2 + b.t2, a.n + b.n};
}
FrameState operator*(double s, const FrameState& a) {
  return {s * a.r, s * a.t1, s * a.t2, s * a.n};
}

// dir = 1 integrates in x, dir = 2 in y.
FrameState frame_rhs(const MetricField& m, const SecondFFField& hfield, int dir, double x,
                     double y, const FrameState& s) {
  const MetricJet jet = m.jet(x, y);
  const Christoffel G = christoffel(jet);
  const Eigen::Matrix2d inv = inverse_metric(jet);
  const double det = jet.det();
  const SecondFF<double> lmn = hfield.at(x, y);
  const double root = std::sqrt(det);
  const double h11 = root * lmn.L, h12 = root * lmn.M, h22 = root * lmn.N;

  const double hd1 = dir == 1 ? h11 : h12;  // h_{dir,1}
  const double hd2 = dir == 1 ? h12 : h22;  // h_{dir,2}

  FrameState d;
  d.r = dir == 1 ? s.t1 : s.t2;
  d.t1 = G(1, dir, 1) * s.t1 + G(2, dir, 1) * s.t2 + hd1 * s.n;
  d.t2 = G(1, dir, 2) * s.t1 + G(2, dir, 2) * s.t2 + hd2 * s.n;
  const double c1 = hd1 * inv(0, 0) + hd2 * inv(1, 0);
  const double c2 = hd1 * inv(0, 1) + hd2 * inv(1, 1);
  d.n = -(c1 * s.t1 + c2 * s.t2);
  return d;
}

double frame_drift(const FrameState& s, const MetricJet& jet) {
  double drift = std::fabs(s.t1.dot(s.t1) - jet.g11);
  drift = std::max(drift, std::fabs(s.t1.dot(s.t2) - jet.g12));
  drift = std::max(drift, std::fabs(s.t2.dot(s.t2) - jet.g22));
  drift = std::max(drift, std::fabs(s.n.dot(s.t1)));
  drift = std::max(drift, std::fabs(s.n.dot(s.t2)));
  drift = std::max(drift, std::fabs(s.n.norm() - 1.0));
  return drift;
}

// Modified Gram-Schmidt against the target Gram matrix. Keeps the integrated
// normal's side rather than assuming an orientation.
void project_frame(FrameState& s, const MetricJet& jet) {
  const Eigen::Vector3d e1 = s.t1.normalized();
  Eigen::Vector3d u2 = s.t2 - s.t2.dot(e1) * e1;
  const Eigen::Vector3d e2 = u2.normalized();
  const double s11 = std::sqrt(jet.g11);
  s.t1 = s11 * e1;
  s.t2 = (jet.g12 / s11) * e1 + std::sqrt(jet.det() / jet.g11) * e2;
  Eigen::Vector3d nn = s.n - s.n.dot(e1) * e1 - s.n.dot(e2) * e2;
  s.n = nn.normalized();
}

/// One RK4 step of length h along coordinate dir starting at (x, y).
FrameState rk4_step(const MetricField& m, const SecondFFField& hfield, int dir, double x,
                    double y, double h, const FrameState& s, const IntegrateOptions& opts,
                    int* status) {
  auto at = [&](double t) {
    return dir == 1 ? std::pair<double, double>{x + t, y} : std::pair<double, double>{x, y + t};
  };
  const auto [xa, ya] = at(0.0);
  const FrameState k1 = frame_rhs(m, hfield, dir, xa, ya, s);
  const auto [xb, yb] = at(0.5 * h);
  const FrameState k2 = frame_rhs(m, hfield, dir, xb, yb, s + (0.5 * h) * k1);
  const FrameState k3 = frame_rhs(m, hfield, dir, xb, yb, s + (0.5 * h) * k2);
  const auto [xc, yc] = at(h);
  const FrameState k4 = frame_rhs(m, hfield, dir, xc, yc, s + h * k3);
  FrameState out = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  const MetricJet jet = m.jet(xc, yc);
  const double drift = frame_drift(out, jet);
  if (drift > opts.drift_tol) {
    *status = 1;
    return out;
  }
  if (opts.project_frames) project_frame(out, jet);
  return out;
}

SurfaceMesh integrate_mesh(const MetricField& m, const SecondFFField& hfield,
                           const MeshGridSpec& spec, const Frame& frame0,
                           const Eigen::Vector3d& r0, const IntegrateOptions& opts) {
  SurfaceMesh mesh;
  mesh.spec = spec;
  mesh.metric_tag = m.tag();
  mesh.position.resize(static_cast<std::size_t>(spec.nx) * spec.ny);
  mesh.frames.resize(mesh.position.size());

  std::vector<int> status(std::max(spec.nx, spec.ny), 0);
  FrameState corner{r0, frame0.t1, frame0.t2, frame0.n};

  auto store = [&mesh](int i, int j, const FrameState& s) {
    mesh.position[mesh.index(i, j)] = s.r;
    mesh.frames[mesh.index(i, j)] = Frame{s.t1, s.t2, s.n};
  };

  auto check_status = [&](const char* where) {
    for (std::size_t k = 0; k < status.size(); ++k)
      if (status[k] != 0)
        throw Error(ErrorCode::FrameDrift,
                    std::string(where) + ": frame invariants exceeded the drift tolerance");
  };

  if (opts.sweep == SweepOrder::XThenY) {
    // Edge pass along y = y0.
    std::vector<FrameState> edge(spec.nx);
    edge[0] = corner;
    int edge_status = 0;
    for (int i = 0; i + 1 < spec.nx; ++i)
      edge[i + 1] =
          rk4_step(m, hfield, 1, spec.x(i), spec.y0, spec.dx(), edge[i], opts, &edge_status);
    if (edge_status != 0) throw Error(ErrorCode::FrameDrift, "x-edge pass exceeded drift tolerance");

    parallel_for(static_cast<std::size_t>(spec.nx), opts.threads,
                 [&](std::size_t b, std::size_t e) {
                   for (std::size_t col = b; col < e; ++col) {
                     const int i = static_cast<int>(col);
                     FrameState s = edge[col];
                     store(i, 0, s);
                     for (int j = 0; j + 1 < spec.ny; ++j) {
                       s = rk4_step(m, hfield, 2, spec.x(i), spec.y(j), spec.dy(), s, opts,
                                    &status[col]);
                       store(i, j + 1, s);
                     }
                   }
                 });
    check_status("column pass");
  } else {
    std::vector<FrameState> edge(spec.ny);
    edge[0] = corner;
    int edge_status = 0;
    for (int j = 0; j + 1 < spec.ny; ++j)
      edge[j + 1] =
          rk4_step(m, hfield, 2, spec.x0, spec.y(j), spec.dy(), edge[j], opts, &edge_status);
    if (edge_status != 0) throw Error(ErrorCode::FrameDrift, "y-edge pass exceeded drift tolerance");

    parallel_for(static_cast<std::size_t>(spec.ny), opts.threads,
                 [&](std::size_t b, std::size_t e) {
                   for (std::size_t row = b; row < e; ++row) {
                     const int j = static_cast<int>(row);
                     FrameState s = edge[row];
                     store(0, j, s);
                     for (int i = 0; i + 1 < spec.nx; ++i) {
                       s = rk4_step(m, hfield, 1, spec.x(i), spec.y(j), spec.dx(), s, opts,
                                    &status[row]);
                       store(i + 1, j, s);
                     }
                   }
                 });
    check_status("row pass");
  }
  return mesh;
}

}  // namespace

SurfaceMesh integrate_frame(const MetricField& m, const SecondFFField& h, const MeshGridSpec& spec,
                            const Frame& frame0, const Eigen::Vector3d& r0,
                            const IntegrateOptions& opts) {
  if (spec.nx < 2 || spec.ny < 2)
    throw Error(ErrorCode::Validation, "mesh grid needs at least 2 nodes per axis");
  return integrate_mesh(m, h, spec, frame0, r0, opts);
}

double path_commutation_error(const MetricField& m, const SecondFFField& h,
                              const MeshGridSpec& spec, const IntegrateOptions& opts) {
  const Frame f0 = initial_frame(m, spec.x0, spec.y0);
  const Eigen::Vector3d r0 = Eigen::Vector3d::Zero();
  IntegrateOptions a = opts, b = opts;
  a.sweep = SweepOrder::XThenY;
  b.sweep = SweepOrder::YThenX;
  const SurfaceMesh ma = integrate_frame(m, h, spec, f0, r0, a);
  const SurfaceMesh mb = integrate_frame(m, h, spec, f0, r0, b);
  double worst = 0.0;
  for (std::size_t k = 0; k < ma.position.size(); ++k)
    worst = std::max(worst, (ma.position[k] - mb.position[k]).norm());
  return worst;
}

double frame_gram_drift(const SurfaceMesh& mesh, const MetricField& m) {
  double worst = 0.0;
  for (int i = 0; i < mesh.spec.nx; ++i)
    for (int j = 0; j < mesh.spec.ny; ++j) {
      const MetricJet jet = m.jet(mesh.spec.x(i), mesh.spec.y(j));
      const Frame& f = mesh.frames[mesh.index(i, j)];
      const FrameState s{Eigen::Vector3d::Zero(), f.t1, f.t2, f.n};
      worst = std::max(worst, frame_drift(s, jet));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Discrete fundamental forms

std::pair<FormField, FormField> discrete_fundamental_forms(const SurfaceMesh& mesh) {
  const int nx = mesh.spec.nx, ny = mesh.spec.ny;
  const double hx = mesh.spec.dx(), hy = mesh.spec.dy();
  const bool wrap = mesh.spec.periodic_y;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  FormField I, II;
  const std::size_t total = static_cast<std::size_t>(nx) * ny;
  I.a11.assign(total, nan);
  I.a12.assign(total, nan);
  I.a22.assign(total, nan);
  II.a11.assign(total, nan);
  II.a12.assign(total, nan);
  II.a22.assign(total, nan);

  auto yw = [&](int j) { return ((j % ny) + ny) % ny; };
  for (int i = 1; i + 1 < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (!wrap && (j == 0 || j + 1 == ny)) continue;
      const int jm = wrap ? yw(j - 1) : j - 1;
      const int jp = wrap ? yw(j + 1) : j + 1;
      const Eigen::Vector3d rx = (mesh.at(i + 1, j) - mesh.at(i - 1, j)) / (2.0 * hx);
      const Eigen::Vector3d ry = (mesh.at(i, jp) - mesh.at(i, jm)) / (2.0 * hy);
      const std::size_t id = mesh.index(i, j);
      I.a11[id] = rx.dot(rx);
      I.a12[id] = rx.dot(ry);
      I.a22[id] = ry.dot(ry);

      Eigen::Vector3d nrm = rx.cross(ry);
      const double len = nrm.norm();
      if (len == 0.0) continue;
      nrm /= len;
      const Eigen::Vector3d rxx =
          (mesh.at(i + 1, j) - 2.0 * mesh.at(i, j) + mesh.at(i - 1, j)) / (hx * hx);
      const Eigen::Vector3d ryy =
          (mesh.at(i, jp) - 2.0 * mesh.at(i, j) + mesh.at(i, jm)) / (hy * hy);
      const Eigen::Vector3d rxy = (mesh.at(i + 1, jp) - mesh.at(i + 1, jm) -
                                   mesh.at(i - 1, jp) + mesh.at(i - 1, jm)) /
                                  (4.0 * hx * hy);
      II.a11[id] = rxx.dot(nrm);
      II.a12[id] = rxy.dot(nrm);
      II.a22[id] = ryy.dot(nrm);
    }
  }
  return {I, II};
}

namespace {

FormErrorStats collect_errors(const std::vector<double>& err, const std::vector<double>& scale) {
  FormErrorStats stats;
  NeumaierSum sumsq;
  std::size_t count = 0;
  for (std::size_t k = 0; k < err.size(); ++k) {
    if (std::isnan(err[k])) continue;
    stats.max_abs = std::max(stats.max_abs, err[k]);
    stats.max_rel = std::max(stats.max_rel, err[k] / scale[k]);
    sumsq.add(err[k] * err[k]);
    ++count;
  }
  stats.rms = count ? std::sqrt(sumsq.value() / static_cast<double>(count)) : 0.0;
  return stats;
}

}  // namespace

FormErrorStats first_form_error(const SurfaceMesh& mesh, const MetricField& m) {
  const auto [I, II] = discrete_fundamental_forms(mesh);
  (void)II;
  std::vector<double> err(I.a11.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> scale(I.a11.size(), 1.0);
  for (int i = 0; i < mesh.spec.nx; ++i)
    for (int j = 0; j < mesh.spec.ny; ++j) {
      const std::size_t id = mesh.index(i, j);
      if (std::isnan(I.a11[id])) continue;
      const MetricJet jet = m.jet(mesh.spec.x(i), mesh.spec.y(j));
      const double e = std::max({std::fabs(I.a11[id] - jet.g11), std::fabs(I.a12[id] - jet.g12),
                                 std::fabs(I.a22[id] - jet.g22)});
      err[id] = e;
      scale[id] = std::max({1.0, std::fabs(jet.g11), std::fabs(jet.g12), std::fabs(jet.g22)});
    }
  return collect_errors(err, scale);
}

FormErrorStats second_form_error(const SurfaceMesh& mesh, const MetricField& m,
                                 const SecondFFField& h) {
  const auto [I, II] = discrete_fundamental_forms(mesh);
  (void)I;
  std::vector<double> err(II.a11.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> scale(II.a11.size(), 1.0);
  for (int i = 0; i < mesh.spec.nx; ++i)
    for (int j = 0; j < mesh.spec.ny; ++j) {
      const std::size_t id = mesh.index(i, j);
      if (std::isnan(II.a11[id])) continue;
      const double x = mesh.spec.x(i), y = mesh.spec.y(j);
      const MetricJet jet = m.jet(x, y);
      const double root = std::sqrt(jet.det());
      const SecondFF<double> lmn = h.at(x, y);
      const double h11 = root * lmn.L, h12 = root * lmn.M, h22 = root * lmn.N;
      const double e = std::max({std::fabs(II.a11[id] - h11), std::fabs(II.a12[id] - h12),
                                 std::fabs(II.a22[id] - h22)});
      err[id] = e;
      scale[id] = std::max({1.0, std::fabs(h11), std::fabs(h12), std::fabs(h22)});
    }
  return collect_errors(err, scale);
}

// ---------------------------------------------------------------------------
// Rigid alignment

RigidTransform align_rigid(const std::vector<Eigen::Vector3d>& source,
                           const std::vector<Eigen::Vector3d>& target) {
  if (source.size() != target.size() || source.empty())
    throw Error(ErrorCode::Validation, "point clouds must have equal nonzero size");
  const double count = static_cast<double>(source.size());
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
  for (const auto& p : source) cs += p;
  for (const auto& p : target) ct += p;
  cs /= count;
  ct /= count;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < source.size(); ++k)
    cov += (target[k] - ct) * (source[k] - cs).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sigma = svd.singularValues();
  if (!(sigma(1) > 1e-12 * std::max(sigma(0), 1e-300)))
    throw Error(ErrorCode::DegenerateConfiguration, "cross-covariance is rank-deficient");

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;

  RigidTransform t;
  t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  t.translation = ct - t.rotation * cs;

  NeumaierSum sumsq;
  for (std::size_t k = 0; k < source.size(); ++k) {
    const double e = (t.rotation * source[k] + t.translation - target[k]).norm();
    t.max_error = std::max(t.max_error, e);
    sumsq.add(e * e);
  }
  t.rms_error = std::sqrt(sumsq.value() / count);
  return t;
}

}  // namespace gcflow
