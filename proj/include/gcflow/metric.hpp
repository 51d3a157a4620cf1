#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <memory>
#include <string>

#include "gcflow/errors.hpp"

namespace gcflow {

inline constexpr double kDegeneracyTol = 1e-12;  // |g| at or below this is degenerate

struct Domain {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  bool periodic_y = false;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Second-order jet of the metric components at a point.
struct MetricJet {
  double g11 = 1.0, g12 = 0.0, g22 = 1.0;
  Eigen::Vector2d dg11 = Eigen::Vector2d::Zero();  // (d/dx, d/dy)
  Eigen::Vector2d dg12 = Eigen::Vector2d::Zero();
  Eigen::Vector2d dg22 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hg11 = Eigen::Matrix2d::Zero();  // Hessian, symmetric
  Eigen::Matrix2d hg12 = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d hg22 = Eigen::Matrix2d::Zero();

  Eigen::Matrix2d tensor() const {
    Eigen::Matrix2d g;
    g << g11, g12, g12, g22;
    return g;
  }
  double det() const { return g11 * g22 - g12 * g12; }
};

/// Christoffel symbols of the second kind; symmetric in the lower pair by
/// construction (only one slot is stored per unordered pair).
class Christoffel {
public:
  /// k, i, j in {1, 2} with the (i, j) pair unordered.
  double operator()(int k, int i, int j) const { return entry_[k - 1][index(i, j)]; }
  double& slot(int k, int i, int j) { return entry_[k - 1][index(i, j)]; }

private:
  static int index(int i, int j) { return (i - 1) + (j - 1); }  // 11 -> 0, 12/21 -> 1, 22 -> 2
  double entry_[2][3] = {{0, 0, 0}, {0, 0, 0}};
};

struct Curvature {
  double kappa = 0.0;
  double r1212 = 0.0;
};

class MetricField {
public:
  virtual ~MetricField() = default;

  virtual MetricJet jet(double x, double y) const = 0;

  const Domain& domain() const { return domain_; }
  bool periodic_y() const { return domain_.periodic_y; }
  const std::string& tag() const { return tag_; }

protected:
  MetricField(Domain domain, std::string tag) : domain_(domain), tag_(std::move(tag)) {}
  Domain domain_;
  std::string tag_;
};

/// Inverse of the metric tensor; throws DegenerateMetric if g11 <= 0 or |g| <= tol.
Eigen::Matrix2d inverse_metric(const MetricJet& jet);

Christoffel christoffel(const MetricJet& jet);
Christoffel christoffel(const MetricField& m, double x, double y);

/// Derivative of the Christoffel symbols in coordinate direction dir (1 = x, 2 = y).
Christoffel christoffel_derivative(const MetricJet& jet, int dir);

Curvature curvature(const MetricJet& jet);
double gauss_curvature(const MetricField& m, double x, double y);

/// Centered finite-difference gradient of the computed Gauss curvature.
Eigen::Vector2d kappa_gradient(const MetricField& m, double x, double y);

/// Builtin charts: "catenoid" (cosh^2 x (dx^2+dy^2), y periodic), "helicoid"
/// ((1+y^2) dx^2 + dy^2), "flat". Throws UnknownTag.
std::unique_ptr<MetricField> make_builtin_metric(const std::string& tag);
std::unique_ptr<MetricField> make_builtin_metric(const std::string& tag, const Domain& domain);

/// Metric from closed-form component expressions in x and y; derivatives are
/// taken by small-step finite differences of the expressions.
std::unique_ptr<MetricField> make_expression_metric(const std::string& g11,
                                                    const std::string& g12,
                                                    const std::string& g22, const Domain& domain);

/// Metric from samples on a uniform grid; derivatives use second-order
/// stencils on the grid (centered inside, one-sided at the boundary) and the
/// jet is interpolated bilinearly between nodes. Requires at least 4 nodes per
/// axis and positive-definite samples everywhere.
std::unique_ptr<MetricField> make_grid_metric(const std::vector<double>& xs,
                                              const std::vector<double>& ys,
                                              const std::vector<double>& g11,
                                              const std::vector<double>& g12,
                                              const std::vector<double>& g22, bool periodic_y);

/// Samples another metric on an n_x x n_y grid and wraps it as a grid metric.
std::unique_ptr<MetricField> sample_to_grid_metric(const MetricField& m, int nx, int ny);

/// Reads a `x,y,g11,g12,g22` CSV covering a full tensor grid.
std::unique_ptr<MetricField> load_metric_csv(const std::filesystem::path& path, bool periodic_y);

}  // namespace gcflow
