#include "gcflow/metric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "gcflow/csv.hpp"
#include "gcflow/expression.hpp"

namespace gcflow {

Eigen::Matrix2d inverse_metric(const MetricJet& jet) {
  const double det = jet.det();
  if (jet.g11 <= 0.0 || det <= kDegeneracyTol)
    throw Error(ErrorCode::DegenerateMetric,
                "g11 = " + format_double(jet.g11) + ", |g| = " + format_double(det));
  Eigen::Matrix2d inv;
  inv << jet.g22 / det, -jet.g12 / det, -jet.g12 / det, jet.g11 / det;
  return inv;
}

namespace {

// T_lij = d_j g_il + d_i g_jl - d_l g_ij, from the first-derivative jet.
double t_lower(const MetricJet& jet, int l, int i, int j) {
  auto dg = [&jet](int a, int b, int dir) -> double {
    const Eigen::Vector2d* v = nullptr;
    if (a == 1 && b == 1) v = &jet.dg11;
    else if (a == 2 && b == 2) v = &jet.dg22;
    else v = &jet.dg12;
    return (*v)(dir - 1);
  };
  return dg(i, l, j) + dg(j, l, i) - dg(i, j, l);
}

// d_m T_lij from the second-derivative jet.
double t_lower_derivative(const MetricJet& jet, int m, int l, int i, int j) {
  auto ddg = [&jet](int a, int b, int d1, int d2) -> double {
    const Eigen::Matrix2d* h = nullptr;
    if (a == 1 && b == 1) h = &jet.hg11;
    else if (a == 2 && b == 2) h = &jet.hg22;
    else h = &jet.hg12;
    return (*h)(d1 - 1, d2 - 1);
  };
  return ddg(i, l, j, m) + ddg(j, l, i, m) - ddg(i, j, l, m);
}

double metric_entry(const MetricJet& jet, int a, int b) {
  if (a == 1 && b == 1) return jet.g11;
  if (a == 2 && b == 2) return jet.g22;
  return jet.g12;
}

Eigen::Vector2d metric_entry_gradient(const MetricJet& jet, int a, int b) {
  if (a == 1 && b == 1) return jet.dg11;
  if (a == 2 && b == 2) return jet.dg22;
  return jet.dg12;
}

}  // namespace

Christoffel christoffel(const MetricJet& jet) {
  const Eigen::Matrix2d inv = inverse_metric(jet);
  Christoffel G;
  for (int k = 1; k <= 2; ++k)
    for (int i = 1; i <= 2; ++i)
      for (int j = i; j <= 2; ++j) {
        double s = 0.0;
        for (int l = 1; l <= 2; ++l) s += inv(k - 1, l - 1) * t_lower(jet, l, i, j);
        G.slot(k, i, j) = 0.5 * s;
      }
  return G;
}

Christoffel christoffel(const MetricField& m, double x, double y) {
  return christoffel(m.jet(x, y));
}

Christoffel christoffel_derivative(const MetricJet& jet, int dir) {
  const Eigen::Matrix2d inv = inverse_metric(jet);
  // d_m g^{kl} = -g^{ka} (d_m g_ab) g^{bl}
  Eigen::Matrix2d dg;
  dg << jet.dg11(dir - 1), jet.dg12(dir - 1), jet.dg12(dir - 1), jet.dg22(dir - 1);
  const Eigen::Matrix2d dinv = -inv * dg * inv;

  Christoffel dG;
  for (int k = 1; k <= 2; ++k)
    for (int i = 1; i <= 2; ++i)
      for (int j = i; j <= 2; ++j) {
        double s = 0.0;
        for (int l = 1; l <= 2; ++l) {
          s += dinv(k - 1, l - 1) * t_lower(jet, l, i, j);
          s += inv(k - 1, l - 1) * t_lower_derivative(jet, dir, l, i, j);
        }
        dG.slot(k, i, j) = 0.5 * s;
      }
  return dG;
}

Curvature curvature(const MetricJet& jet) {
  const Christoffel G = christoffel(jet);
  const Christoffel dGx = christoffel_derivative(jet, 1);
  const Christoffel dGy = christoffel_derivative(jet, 2);

  // R_1212 = g_1m R^m_212 with
  // R^m_212 = d_1 G^m_22 - d_2 G^m_12 + G^m_1n G^n_22 - G^m_2n G^n_12.
  Curvature c;
  double r = 0.0;
  for (int m = 1; m <= 2; ++m) {
    double rm = dGx(m, 2, 2) - dGy(m, 1, 2);
    for (int n = 1; n <= 2; ++n) rm += G(m, 1, n) * G(n, 2, 2) - G(m, 2, n) * G(n, 1, 2);
    r += metric_entry(jet, 1, m) * rm;
  }
  c.r1212 = r;
  const double det = jet.det();
  if (det <= kDegeneracyTol)
    throw Error(ErrorCode::DegenerateMetric, "|g| = " + format_double(det));
  c.kappa = r / det;
  return c;
}

double gauss_curvature(const MetricField& m, double x, double y) {
  return curvature(m.jet(x, y)).kappa;
}

Eigen::Vector2d kappa_gradient(const MetricField& m, double x, double y) {
  const double hx = 1e-5 * std::max(1.0, std::fabs(x));
  const double hy = 1e-5 * std::max(1.0, std::fabs(y));
  Eigen::Vector2d grad;
  grad(0) = (gauss_curvature(m, x + hx, y) - gauss_curvature(m, x - hx, y)) / (2.0 * hx);
  grad(1) = (gauss_curvature(m, x, y + hy) - gauss_curvature(m, x, y - hy)) / (2.0 * hy);
  return grad;
}

// ---------------------------------------------------------------------------
// Analytic metrics

namespace {

class AnalyticMetric final : public MetricField {
public:
  using JetFn = std::function<MetricJet(double, double)>;
  AnalyticMetric(Domain domain, std::string tag, JetFn fn)
      : MetricField(domain, std::move(tag)), fn_(std::move(fn)) {}

  MetricJet jet(double x, double y) const override { return fn_(x, y); }

private:
  JetFn fn_;
};

MetricJet catenoid_jet(double x, double /*y*/) {
  MetricJet j;
  const double c = std::cosh(x);
  const double lambda = c * c;
  j.g11 = j.g22 = lambda;
  const double dl = std::sinh(2.0 * x);
  const double ddl = 2.0 * std::cosh(2.0 * x);
  j.dg11(0) = j.dg22(0) = dl;
  j.hg11(0, 0) = j.hg22(0, 0) = ddl;
  return j;
}

MetricJet helicoid_jet(double /*x*/, double y) {
  MetricJet j;
  j.g11 = 1.0 + y * y;
  j.g22 = 1.0;
  j.dg11(1) = 2.0 * y;
  j.hg11(1, 1) = 2.0;
  return j;
}

constexpr double kTwoPi = 6.2831853071795865;

}  // namespace

std::unique_ptr<MetricField> make_builtin_metric(const std::string& tag, const Domain& domain) {
  if (tag == "catenoid")
    return std::make_unique<AnalyticMetric>(domain, tag, catenoid_jet);
  if (tag == "helicoid")
    return std::make_unique<AnalyticMetric>(domain, tag, helicoid_jet);
  if (tag == "flat")
    return std::make_unique<AnalyticMetric>(domain, tag,
                                            [](double, double) { return MetricJet{}; });
  throw Error(ErrorCode::UnknownTag, "metric tag '" + tag + "'");
}

std::unique_ptr<MetricField> make_builtin_metric(const std::string& tag) {
  Domain d;
  if (tag == "catenoid") d = {-1.0, 1.0, 0.0, kTwoPi, true};
  else if (tag == "helicoid") d = {-1.0, 1.0, -1.0, 1.0, false};
  else if (tag == "flat") d = {0.0, 1.0, 0.0, kTwoPi, true};
  else throw Error(ErrorCode::UnknownTag, "metric tag '" + tag + "'");
  return make_builtin_metric(tag, d);
}

// ---------------------------------------------------------------------------
// Expression metrics

namespace {

class ExpressionMetric final : public MetricField {
public:
  ExpressionMetric(Expression e11, Expression e12, Expression e22, Domain domain)
      : MetricField(domain, "custom-expression"),
        e11_(std::move(e11)), e12_(std::move(e12)), e22_(std::move(e22)) {}

  MetricJet jet(double x, double y) const override {
    MetricJet j;
    fill(e11_, x, y, j.g11, j.dg11, j.hg11);
    fill(e12_, x, y, j.g12, j.dg12, j.hg12);
    fill(e22_, x, y, j.g22, j.dg22, j.hg22);
    return j;
  }

private:
  // Steps balance truncation against rounding for smooth expressions:
  // ~h1^2 first-derivative and ~h2^2 second-derivative truncation.
  static void fill(const Expression& e, double x, double y, double& value,
                   Eigen::Vector2d& grad, Eigen::Matrix2d& hess) {
    auto f = [&e](double a, double b) {
      const double v[2] = {a, b};
      return e.eval(v);
    };
    const double h1x = 6e-6 * std::max(1.0, std::fabs(x));
    const double h1y = 6e-6 * std::max(1.0, std::fabs(y));
    const double h2x = 2e-4 * std::max(1.0, std::fabs(x));
    const double h2y = 2e-4 * std::max(1.0, std::fabs(y));
    value = f(x, y);
    grad(0) = (f(x + h1x, y) - f(x - h1x, y)) / (2.0 * h1x);
    grad(1) = (f(x, y + h1y) - f(x, y - h1y)) / (2.0 * h1y);
    hess(0, 0) = (f(x + h2x, y) - 2.0 * value + f(x - h2x, y)) / (h2x * h2x);
    hess(1, 1) = (f(x, y + h2y) - 2.0 * value + f(x, y - h2y)) / (h2y * h2y);
    const double cross = (f(x + h2x, y + h2y) - f(x + h2x, y - h2y) - f(x - h2x, y + h2y) +
                          f(x - h2x, y - h2y)) /
                         (4.0 * h2x * h2y);
    hess(0, 1) = hess(1, 0) = cross;
  }

  Expression e11_, e12_, e22_;
};

}  // namespace

std::unique_ptr<MetricField> make_expression_metric(const std::string& g11,
                                                    const std::string& g12,
                                                    const std::string& g22,
                                                    const Domain& domain) {
  const std::vector<std::string> vars = {"x", "y"};
  return std::make_unique<ExpressionMetric>(Expression::parse(g11, vars),
                                            Expression::parse(g12, vars),
                                            Expression::parse(g22, vars), domain);
}

// ---------------------------------------------------------------------------
// Grid metrics

namespace {

// Second-order first/second derivative along one axis of a sampled line.
// Index clamping implements the one-sided boundary stencils; periodic lines
// wrap instead.
struct LineDiff {
  int n = 0;
  double h = 1.0;
  bool periodic = false;

  int wrap(int i) const {
    if (periodic) return ((i % n) + n) % n;
    return i;
  }

  double d1(const std::function<double(int)>& f, int i) const {
    if (periodic || (i > 0 && i < n - 1))
      return (f(wrap(i + 1)) - f(wrap(i - 1))) / (2.0 * h);
    if (i == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
    return (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
  }

  double d2(const std::function<double(int)>& f, int i) const {
    if (periodic || (i > 0 && i < n - 1))
      return (f(wrap(i + 1)) - 2.0 * f(i) + f(wrap(i - 1))) / (h * h);
    if (i == 0) return (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / (h * h);
    return (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / (h * h);
  }
};

class GridMetric final : public MetricField {
public:
  GridMetric(std::vector<double> xs, std::vector<double> ys, std::array<std::vector<double>, 3> g,
             bool periodic_y)
      : MetricField(make_domain(xs, ys, periodic_y), "custom-grid"),
        xs_(std::move(xs)), ys_(std::move(ys)) {
    nx_ = static_cast<int>(xs_.size());
    ny_ = static_cast<int>(ys_.size());
    hx_ = xs_[1] - xs_[0];
    hy_ = ys_[1] - ys_[0];
    validate_samples(g);
    build_jets(g);
  }

  MetricJet jet(double x, double y) const override {
    const double eps_x = 1e-9 * std::max(1.0, std::fabs(hx_) * nx_);
    if (x < domain_.x0 - eps_x || x > domain_.x1 + eps_x)
      throw Error(ErrorCode::StencilOutOfDomain, "x = " + format_double(x));
    if (domain_.periodic_y) {
      const double span = domain_.height() + hy_;  // nodes cover [y0, y1), period y1-y0+hy
      y = y - std::floor((y - domain_.y0) / span) * span;
    } else {
      const double eps_y = 1e-9 * std::max(1.0, std::fabs(hy_) * ny_);
      if (y < domain_.y0 - eps_y || y > domain_.y1 + eps_y)
        throw Error(ErrorCode::StencilOutOfDomain, "y = " + format_double(y));
    }
    int ix = std::clamp(static_cast<int>(std::floor((x - domain_.x0) / hx_)), 0, nx_ - 2);
    double ax = (x - xs_[ix]) / hx_;
    int iy, iy1;
    double ay;
    if (domain_.periodic_y) {
      iy = static_cast<int>(std::floor((y - domain_.y0) / hy_));
      iy = std::clamp(iy, 0, ny_ - 1);
      iy1 = (iy + 1) % ny_;
      ay = (y - (domain_.y0 + iy * hy_)) / hy_;
    } else {
      iy = std::clamp(static_cast<int>(std::floor((y - domain_.y0) / hy_)), 0, ny_ - 2);
      iy1 = iy + 1;
      ay = (y - ys_[iy]) / hy_;
    }
    ax = std::clamp(ax, 0.0, 1.0);
    ay = std::clamp(ay, 0.0, 1.0);
    return blend(node(ix, iy), node(ix + 1, iy), node(ix, iy1), node(ix + 1, iy1), ax, ay);
  }

private:
  static Domain make_domain(const std::vector<double>& xs, const std::vector<double>& ys,
                            bool periodic_y) {
    if (xs.size() < 4 || ys.size() < 4)
      throw Error(ErrorCode::Validation, "grid metric needs at least 4 nodes per axis");
    check_uniform(xs, "x");
    check_uniform(ys, "y");
    return Domain{xs.front(), xs.back(), ys.front(), ys.back(), periodic_y};
  }

  static void check_uniform(const std::vector<double>& v, const char* axis) {
    const double h = v[1] - v[0];
    if (!(h > 0)) throw Error(ErrorCode::Validation, std::string(axis) + " grid not increasing");
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
      if (std::fabs((v[i + 1] - v[i]) - h) > 1e-9 * std::max(1.0, std::fabs(h)))
        throw Error(ErrorCode::Validation, std::string(axis) + " grid spacing not uniform");
  }

  void validate_samples(const std::array<std::vector<double>, 3>& g) const {
    const std::size_t expected = static_cast<std::size_t>(nx_) * ny_;
    for (const auto& comp : g)
      if (comp.size() != expected)
        throw Error(ErrorCode::Validation, "grid metric sample count mismatch");
    for (int i = 0; i < nx_; ++i)
      for (int j = 0; j < ny_; ++j) {
        const std::size_t id = idx(i, j);
        const double det = g[0][id] * g[2][id] - g[1][id] * g[1][id];
        if (g[0][id] <= 0.0 || det <= kDegeneracyTol)
          throw Error(ErrorCode::DegenerateMetric,
                      "at node (" + format_double(xs_[i]) + ", " + format_double(ys_[j]) + ")");
      }
  }

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * ny_ + j; }

  void build_jets(const std::array<std::vector<double>, 3>& g) {
    jets_.resize(static_cast<std::size_t>(nx_) * ny_);
    const LineDiff dx{nx_, hx_, false};
    const LineDiff dy{ny_, hy_, domain_.periodic_y};

    std::array<std::vector<double>, 3> gx;  // d/dx fields, for the mixed term
    for (int c = 0; c < 3; ++c) gx[c].resize(jets_.size());
    for (int c = 0; c < 3; ++c)
      for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i)
          gx[c][idx(i, j)] = dx.d1([&](int a) { return g[c][idx(a, j)]; }, i);

    for (int i = 0; i < nx_; ++i)
      for (int j = 0; j < ny_; ++j) {
        MetricJet jet;
        double* value[3] = {&jet.g11, &jet.g12, &jet.g22};
        Eigen::Vector2d* grad[3] = {&jet.dg11, &jet.dg12, &jet.dg22};
        Eigen::Matrix2d* hess[3] = {&jet.hg11, &jet.hg12, &jet.hg22};
        for (int c = 0; c < 3; ++c) {
          auto fx = [&](int a) { return g[c][idx(a, j)]; };
          auto fy = [&](int b) { return g[c][idx(i, b)]; };
          *value[c] = g[c][idx(i, j)];
          (*grad[c])(0) = gx[c][idx(i, j)];
          (*grad[c])(1) = dy.d1(fy, j);
          (*hess[c])(0, 0) = dx.d2(fx, i);
          (*hess[c])(1, 1) = dy.d2(fy, j);
          const double cross = dy.d1([&](int b) { return gx[c][idx(i, b)]; }, j);
          (*hess[c])(0, 1) = (*hess[c])(1, 0) = cross;
        }
        jets_[idx(i, j)] = jet;
      }
  }

  const MetricJet& node(int i, int j) const { return jets_[idx(i, j)]; }

  static MetricJet blend(const MetricJet& a, const MetricJet& b, const MetricJet& c,
                         const MetricJet& d, double ax, double ay) {
    auto mix = [&](auto&& get) {
      return (1 - ax) * (1 - ay) * get(a) + ax * (1 - ay) * get(b) + (1 - ax) * ay * get(c) +
             ax * ay * get(d);
    };
    MetricJet out;
    out.g11 = mix([](const MetricJet& m) { return m.g11; });
    out.g12 = mix([](const MetricJet& m) { return m.g12; });
    out.g22 = mix([](const MetricJet& m) { return m.g22; });
    out.dg11 = mix([](const MetricJet& m) { return m.dg11; });
    out.dg12 = mix([](const MetricJet& m) { return m.dg12; });
    out.dg22 = mix([](const MetricJet& m) { return m.dg22; });
    out.hg11 = mix([](const MetricJet& m) { return m.hg11; });
    out.hg12 = mix([](const MetricJet& m) { return m.hg12; });
    out.hg22 = mix([](const MetricJet& m) { return m.hg22; });
    return out;
  }

  std::vector<double> xs_, ys_;
  std::vector<MetricJet> jets_;
  int nx_ = 0, ny_ = 0;
  double hx_ = 1.0, hy_ = 1.0;
};

}  // namespace

std::unique_ptr<MetricField> make_grid_metric(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              const std::vector<double>& g11,
                                              const std::vector<double>& g12,
                                              const std::vector<double>& g22, bool periodic_y) {
  return std::make_unique<GridMetric>(xs, ys, std::array<std::vector<double>, 3>{g11, g12, g22},
                                      periodic_y);
}

std::unique_ptr<MetricField> sample_to_grid_metric(const MetricField& m, int nx, int ny) {
  const Domain& d = m.domain();
  std::vector<double> xs(nx), ys(ny);
  const double hx = d.width() / (nx - 1);
  // Periodic grids sample [y0, y1) so the wrap stencil sees one full period.
  const double hy = d.periodic_y ? d.height() / ny : d.height() / (ny - 1);
  for (int i = 0; i < nx; ++i) xs[i] = d.x0 + i * hx;
  for (int j = 0; j < ny; ++j) ys[j] = d.y0 + j * hy;
  std::vector<double> g11(static_cast<std::size_t>(nx) * ny), g12(g11.size()), g22(g11.size());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const MetricJet jet = m.jet(xs[i], ys[j]);
      const std::size_t id = static_cast<std::size_t>(i) * ny + j;
      g11[id] = jet.g11;
      g12[id] = jet.g12;
      g22[id] = jet.g22;
    }
  return make_grid_metric(xs, ys, g11, g12, g22, d.periodic_y);
}

std::unique_ptr<MetricField> load_metric_csv(const std::filesystem::path& path, bool periodic_y) {
  const CsvTable table = read_numeric_csv(path);
  const int cx = table.column("x"), cy = table.column("y");
  const int c11 = table.column("g11"), c12 = table.column("g12"), c22 = table.column("g22");
  if (cx < 0 || cy < 0 || c11 < 0 || c12 < 0 || c22 < 0)
    throw Error(ErrorCode::Io, path.string() + ": header must contain x,y,g11,g12,g22");

  std::vector<double> xs, ys;
  for (const auto& row : table.rows) {
    if (xs.empty() || row[cx] > xs.back() + 1e-12) xs.push_back(row[cx]);
  }
  for (const auto& row : table.rows) {
    if (row[cx] != table.rows.front()[cx]) break;
    ys.push_back(row[cy]);
  }
  const std::size_t expected = xs.size() * ys.size();
  if (table.rows.size() != expected)
    throw Error(ErrorCode::Io, path.string() + ": expected a full x-major tensor grid");

  std::vector<double> g11(expected), g12(expected), g22(expected);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    g11[r] = table.rows[r][c11];
    g12[r] = table.rows[r][c12];
    g22[r] = table.rows[r][c22];
  }
  return make_grid_metric(xs, ys, g11, g12, g22, periodic_y);
}

}  // namespace gcflow
