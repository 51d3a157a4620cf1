#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "gcflow/metric.hpp"
#include "gcflow/solver.hpp"

namespace gcflow {

struct MetricSpec {
  std::string builtin;                       // one of the builtin tags, or empty
  std::string g11, g12, g22;                 // component expressions, or empty
  std::string csv;                           // sample file, or empty
};

struct InitialSpec {
  std::string type = "exact-catenoid";       // exact-catenoid | exact-helicoid | expressions | csv
  std::string u, v;                          // expressions in x (= x0) and y
  std::string csv;                           // `y,u,v` slice file
};

/// One reproducible run: metric, domain, discretization, initial data, output.
struct RunConfig {
  int schema = 1;
  MetricSpec metric;
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 6.2831853071795865;
  bool periodic_y = true;
  int ny = 256;
  double epsilon = 1e-3;
  double dx = 0.0;  // 0 = derive from the CFL limits
  double cfl_safety = 0.4;
  std::string flux = "central";  // central | llf
  std::string region_predicate;  // expression in u, v; inside iff >= 0
  long max_steps = 1000000;
  InitialSpec initial;
  std::string output_dir = "out";
  unsigned long seed = 0;

  Grid1D make_grid() const { return Grid1D(ny, y0, y1, periodic_y); }
  Domain make_domain() const { return Domain{x0, x1, y0, y1, periodic_y}; }
};

/// Parses and validates; reports every validation problem, not just the first.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);

/// Canonical serialized form of the config; its FNV-1a hash stamps outputs.
std::string canonical_config_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

std::unique_ptr<MetricField> build_metric(const RunConfig& cfg);
SolutionSlice build_initial_slice(const RunConfig& cfg, const Grid1D& grid);
SolverConfig build_solver_config(const RunConfig& cfg, int threads);

}  // namespace gcflow
