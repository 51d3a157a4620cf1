#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gcflow/fluid.hpp"
#include "gcflow/metric.hpp"
#include "gcflow/solver.hpp"

namespace gcflow {

struct Frame {
  Eigen::Vector3d t1, t2, n;
};

/// Continuous evaluator for the normalized second fundamental form.
class SecondFFField {
public:
  virtual ~SecondFFField() = default;
  virtual SecondFF<double> at(double x, double y) const = 0;
};

class AnalyticSecondFF final : public SecondFFField {
public:
  using Fn = std::function<SecondFF<double>(double, double)>;
  explicit AnalyticSecondFF(Fn fn) : fn_(std::move(fn)) {}
  SecondFF<double> at(double x, double y) const override { return fn_(x, y); }

private:
  Fn fn_;
};

/// Bilinear interpolation of a gridded (L, M, N) field, e.g. solver output.
class GridSecondFF final : public SecondFFField {
public:
  GridSecondFF(std::vector<double> xs, Grid1D grid, std::vector<Eigen::ArrayXd> L,
               std::vector<Eigen::ArrayXd> M, std::vector<Eigen::ArrayXd> N);

  /// Derives (L, M, N) from the stored velocities of a solver field.
  static GridSecondFF from_solution(const SolutionField& field, const MetricField& m);

  SecondFF<double> at(double x, double y) const override;

private:
  std::vector<double> xs_;
  Grid1D grid_;
  std::vector<Eigen::ArrayXd> L_, M_, N_;
};

struct MeshGridSpec {
  int nx = 2, ny = 8;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool periodic_y = false;

  double dx() const { return (x1 - x0) / (nx - 1); }
  double dy() const { return periodic_y ? (y1 - y0) / ny : (y1 - y0) / (ny - 1); }
  double x(int i) const { return x0 + i * dx(); }
  double y(int j) const { return y0 + j * dy(); }
};

enum class SweepOrder { XThenY, YThenX };

struct IntegrateOptions {
  SweepOrder sweep = SweepOrder::XThenY;
  bool project_frames = true;   // re-impose the Gram constraints after each step
  double drift_tol = 1e-6;      // pre-projection drift beyond this is FrameDrift
  int threads = 1;
};

struct SurfaceMesh {
  MeshGridSpec spec;
  std::vector<Eigen::Vector3d> position;  // row-major, index = i * ny + j
  std::vector<Frame> frames;
  std::string metric_tag;
  std::string provenance;

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * spec.ny + j; }
  const Eigen::Vector3d& at(int i, int j) const { return position[index(i, j)]; }
};

/// Lower-triangular frame at a point: t1 = (sqrt(g11), 0, 0),
/// t2 = (g12/sqrt(g11), sqrt(|g|/g11), 0), n = e_z.
Frame initial_frame(const MetricField& m, double x, double y);

/// Integrates the frame ODEs (RK4) over the grid: along the x-edge first,
/// then along y for every column (or the transpose order). Columns after the
/// edge pass are independent and may run in parallel.
SurfaceMesh integrate_frame(const MetricField& m, const SecondFFField& h, const MeshGridSpec& spec,
                            const Frame& frame0, const Eigen::Vector3d& r0,
                            const IntegrateOptions& opts = {});

/// Max vertex distance between the two sweep orders; measures how far the
/// input is from satisfying the compatibility equations.
double path_commutation_error(const MetricField& m, const SecondFFField& h,
                              const MeshGridSpec& spec, const IntegrateOptions& opts = {});

/// Worst Gram-matrix drift over mesh vertices: max |t_i . t_j - g_ij|,
/// |n . t_i|, ||n| - 1|.
double frame_gram_drift(const SurfaceMesh& mesh, const MetricField& m);

struct FormField {
  // Row-major per-vertex coefficients; NaN where no stencil applies.
  std::vector<double> a11, a12, a22;
};

/// Centered-difference first and second fundamental forms of the mesh.
std::pair<FormField, FormField> discrete_fundamental_forms(const SurfaceMesh& mesh);

struct FormErrorStats {
  double max_abs = 0;
  double max_rel = 0;  // normalized by the local metric magnitude, floor 1
  double rms = 0;
};

FormErrorStats first_form_error(const SurfaceMesh& mesh, const MetricField& m);
FormErrorStats second_form_error(const SurfaceMesh& mesh, const MetricField& m,
                                 const SecondFFField& h);

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double rms_error = 0;
  double max_error = 0;
};

/// Least-squares proper rigid motion (det +1) taking source onto target.
RigidTransform align_rigid(const std::vector<Eigen::Vector3d>& source,
                           const std::vector<Eigen::Vector3d>& target);

}  // namespace gcflow
