#include "gcflow/config.hpp"

#include <cmath>
#include <vector>

#include "json.hpp"

#include "gcflow/csv.hpp"
#include "gcflow/expression.hpp"

namespace gcflow {

namespace {

using nlohmann::json;

void read_if(const json& j, const char* key, double& out, std::vector<std::string>& issues) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) {
    issues.push_back(std::string(key) + ": expected a number");
    return;
  }
  out = j[key].get<double>();
}

void read_if(const json& j, const char* key, long& out, std::vector<std::string>& issues) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer()) {
    issues.push_back(std::string(key) + ": expected an integer");
    return;
  }
  out = j[key].get<long>();
}

void read_if(const json& j, const char* key, int& out, std::vector<std::string>& issues) {
  long tmp = out;
  read_if(j, key, tmp, issues);
  out = static_cast<int>(tmp);
}

void read_if(const json& j, const char* key, bool& out, std::vector<std::string>& issues) {
  if (!j.contains(key)) return;
  if (!j[key].is_boolean()) {
    issues.push_back(std::string(key) + ": expected a boolean");
    return;
  }
  out = j[key].get<bool>();
}

void read_if(const json& j, const char* key, std::string& out, std::vector<std::string>& issues) {
  if (!j.contains(key)) return;
  if (!j[key].is_string()) {
    issues.push_back(std::string(key) + ": expected a string");
    return;
  }
  out = j[key].get<std::string>();
}

void check_expression(const std::string& text, std::span<const std::string> vars,
                      const std::string& what, std::vector<std::string>& issues) {
  if (text.empty()) {
    issues.push_back(what + ": empty expression");
    return;
  }
  try {
    Expression::parse(text, vars);
  } catch (const Error& err) {
    issues.push_back(what + ": " + err.what());
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  std::vector<std::string> issues;

  if (!j.contains("schema") || !j["schema"].is_number_integer() || j["schema"].get<int>() != 1)
    issues.push_back("schema: must be the integer 1");

  if (j.contains("metric")) {
    const json& m = j["metric"];
    if (m.is_object()) {
      read_if(m, "builtin", cfg.metric.builtin, issues);
      read_if(m, "csv", cfg.metric.csv, issues);
      if (m.contains("expressions")) {
        const json& e = m["expressions"];
        if (e.is_object()) {
          read_if(e, "g11", cfg.metric.g11, issues);
          read_if(e, "g12", cfg.metric.g12, issues);
          read_if(e, "g22", cfg.metric.g22, issues);
        } else {
          issues.push_back("metric.expressions: expected an object");
        }
      }
    } else {
      issues.push_back("metric: expected an object");
    }
  }

  if (j.contains("domain")) {
    const json& d = j["domain"];
    read_if(d, "x0", cfg.x0, issues);
    read_if(d, "x1", cfg.x1, issues);
    read_if(d, "y0", cfg.y0, issues);
    read_if(d, "y1", cfg.y1, issues);
    read_if(d, "periodic_y", cfg.periodic_y, issues);
  }

  if (j.contains("grid")) read_if(j["grid"], "ny", cfg.ny, issues);

  if (j.contains("solver")) {
    const json& s = j["solver"];
    read_if(s, "epsilon", cfg.epsilon, issues);
    read_if(s, "dx", cfg.dx, issues);
    read_if(s, "cfl_safety", cfg.cfl_safety, issues);
    read_if(s, "flux", cfg.flux, issues);
    read_if(s, "region_predicate", cfg.region_predicate, issues);
    read_if(s, "max_steps", cfg.max_steps, issues);
  }

  if (j.contains("initial")) {
    const json& in = j["initial"];
    read_if(in, "type", cfg.initial.type, issues);
    read_if(in, "u", cfg.initial.u, issues);
    read_if(in, "v", cfg.initial.v, issues);
    read_if(in, "csv", cfg.initial.csv, issues);
  }

  if (j.contains("output")) read_if(j["output"], "dir", cfg.output_dir, issues);
  if (j.contains("seed")) {
    if (j["seed"].is_number_unsigned() || j["seed"].is_number_integer())
      cfg.seed = j["seed"].get<unsigned long>();
    else
      issues.push_back("seed: expected an integer");
  }

  // Cross-field validation; every problem is reported.
  const int metric_choices = (cfg.metric.builtin.empty() ? 0 : 1) +
                             (cfg.metric.csv.empty() ? 0 : 1) +
                             (cfg.metric.g11.empty() && cfg.metric.g12.empty() &&
                                      cfg.metric.g22.empty()
                                  ? 0
                                  : 1);
  if (metric_choices == 0)
    issues.push_back("metric: one of builtin, expressions, or csv is required");
  if (metric_choices > 1)
    issues.push_back("metric: builtin, expressions, and csv are mutually exclusive");
  if (!cfg.metric.builtin.empty() && cfg.metric.builtin != "catenoid" &&
      cfg.metric.builtin != "helicoid" && cfg.metric.builtin != "flat")
    issues.push_back("metric.builtin: unknown tag '" + cfg.metric.builtin + "'");
  const std::vector<std::string> xy = {"x", "y"};
  if (!cfg.metric.g11.empty() || !cfg.metric.g12.empty() || !cfg.metric.g22.empty()) {
    check_expression(cfg.metric.g11, xy, "metric.expressions.g11", issues);
    check_expression(cfg.metric.g12, xy, "metric.expressions.g12", issues);
    check_expression(cfg.metric.g22, xy, "metric.expressions.g22", issues);
  }
  if (!cfg.metric.csv.empty()) {
    const auto path = base_dir / cfg.metric.csv;
    if (!std::filesystem::exists(path))
      issues.push_back("metric.csv: file does not exist: " + path.string());
    else
      cfg.metric.csv = path.string();
  }

  if (!(cfg.x1 > cfg.x0)) issues.push_back("domain: x1 must exceed x0");
  if (!(cfg.y1 > cfg.y0)) issues.push_back("domain: y1 must exceed y0");
  if (cfg.ny < 8) issues.push_back("grid.ny: must be at least 8");
  if (!(cfg.epsilon > 0.0)) issues.push_back("solver.epsilon: must be positive");
  if (cfg.dx < 0.0) issues.push_back("solver.dx: must be nonnegative");
  if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
    issues.push_back("solver.cfl_safety: must lie in (0, 1]");
  if (cfg.flux != "central" && cfg.flux != "llf")
    issues.push_back("solver.flux: must be 'central' or 'llf'");
  if (cfg.max_steps < 1) issues.push_back("solver.max_steps: must be positive");
  if (!cfg.region_predicate.empty())
    check_expression(cfg.region_predicate, std::vector<std::string>{"u", "v"},
                     "solver.region_predicate", issues);

  if (cfg.initial.type == "expressions") {
    check_expression(cfg.initial.u, xy, "initial.u", issues);
    check_expression(cfg.initial.v, xy, "initial.v", issues);
  } else if (cfg.initial.type == "csv") {
    if (cfg.initial.csv.empty()) {
      issues.push_back("initial.csv: path is required for type 'csv'");
    } else {
      const auto path = base_dir / cfg.initial.csv;
      if (!std::filesystem::exists(path))
        issues.push_back("initial.csv: file does not exist: " + path.string());
      else
        cfg.initial.csv = path.string();
    }
  } else if (cfg.initial.type != "exact-catenoid" && cfg.initial.type != "exact-helicoid") {
    issues.push_back("initial.type: unknown type '" + cfg.initial.type + "'");
  }
  if (cfg.initial.type == "exact-catenoid" && cfg.metric.builtin != "catenoid")
    issues.push_back("initial.type: exact-catenoid requires the catenoid metric");
  if (cfg.initial.type == "exact-helicoid" && cfg.metric.builtin != "helicoid")
    issues.push_back("initial.type: exact-helicoid requires the helicoid metric");
  if (cfg.output_dir.empty()) issues.push_back("output.dir: must not be empty");

  if (!issues.empty()) throw ValidationError(std::move(issues));
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  return parse_config_text(read_text_file(path), path.parent_path());
}

std::string canonical_config_json(const RunConfig& cfg) {
  json j;
  j["schema"] = cfg.schema;
  if (!cfg.metric.builtin.empty()) j["metric"]["builtin"] = cfg.metric.builtin;
  if (!cfg.metric.csv.empty()) j["metric"]["csv"] = cfg.metric.csv;
  if (!cfg.metric.g11.empty())
    j["metric"]["expressions"] = {{"g11", cfg.metric.g11}, {"g12", cfg.metric.g12},
                                  {"g22", cfg.metric.g22}};
  j["domain"] = {{"x0", cfg.x0}, {"x1", cfg.x1}, {"y0", cfg.y0}, {"y1", cfg.y1},
                 {"periodic_y", cfg.periodic_y}};
  j["grid"] = {{"ny", cfg.ny}};
  j["solver"] = {{"epsilon", cfg.epsilon},   {"dx", cfg.dx},
                 {"cfl_safety", cfg.cfl_safety}, {"flux", cfg.flux},
                 {"max_steps", cfg.max_steps}};
  if (!cfg.region_predicate.empty()) j["solver"]["region_predicate"] = cfg.region_predicate;
  j["initial"] = {{"type", cfg.initial.type}};
  if (!cfg.initial.u.empty()) j["initial"]["u"] = cfg.initial.u;
  if (!cfg.initial.v.empty()) j["initial"]["v"] = cfg.initial.v;
  if (!cfg.initial.csv.empty()) j["initial"]["csv"] = cfg.initial.csv;
  j["output"] = {{"dir", cfg.output_dir}};
  j["seed"] = cfg.seed;
  return j.dump();
}

std::string config_hash(const RunConfig& cfg) {
  // FNV-1a, 64-bit.
  const std::string text = canonical_config_json(cfg);
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

std::unique_ptr<MetricField> build_metric(const RunConfig& cfg) {
  if (!cfg.metric.builtin.empty())
    return make_builtin_metric(cfg.metric.builtin, cfg.make_domain());
  if (!cfg.metric.csv.empty()) return load_metric_csv(cfg.metric.csv, cfg.periodic_y);
  return make_expression_metric(cfg.metric.g11, cfg.metric.g12, cfg.metric.g22,
                                cfg.make_domain());
}

SolutionSlice build_initial_slice(const RunConfig& cfg, const Grid1D& grid) {
  SolutionSlice slice{cfg.x0, Eigen::ArrayXd(grid.n), Eigen::ArrayXd(grid.n)};
  if (cfg.initial.type == "exact-catenoid") {
    const double sech2 = 1.0 / (std::cosh(cfg.x0) * std::cosh(cfg.x0));
    slice.u.setConstant(std::sqrt(2.0) * sech2);
    slice.v.setZero();
  } else if (cfg.initial.type == "exact-helicoid") {
    for (int i = 0; i < grid.n; ++i) {
      const double y = grid.y(i);
      slice.u(i) = 1.0 / (1.0 + y * y);
      slice.v(i) = -slice.u(i);
    }
  } else if (cfg.initial.type == "expressions") {
    const std::vector<std::string> xy = {"x", "y"};
    const Expression eu = Expression::parse(cfg.initial.u, xy);
    const Expression ev = Expression::parse(cfg.initial.v, xy);
    for (int i = 0; i < grid.n; ++i) {
      const double vals[2] = {cfg.x0, grid.y(i)};
      slice.u(i) = eu.eval(vals);
      slice.v(i) = ev.eval(vals);
    }
  } else {  // csv
    const CsvTable table = read_numeric_csv(cfg.initial.csv);
    const int cy = table.column("y"), cu = table.column("u"), cv = table.column("v");
    if (cy < 0 || cu < 0 || cv < 0)
      throw Error(ErrorCode::Io, cfg.initial.csv + ": header must contain y,u,v");
    if (static_cast<int>(table.rows.size()) != grid.n)
      throw Error(ErrorCode::Validation,
                  "initial slice has " + std::to_string(table.rows.size()) + " rows, grid has " +
                      std::to_string(grid.n) + " cells");
    for (int i = 0; i < grid.n; ++i) {
      if (std::fabs(table.rows[i][cy] - grid.y(i)) > 1e-9 * std::max(1.0, std::fabs(grid.y(i))))
        throw Error(ErrorCode::Validation, "initial slice y-grid does not match the run grid");
      slice.u(i) = table.rows[i][cu];
      slice.v(i) = table.rows[i][cv];
    }
  }
  return slice;
}

SolverConfig build_solver_config(const RunConfig& cfg, int threads) {
  SolverConfig sc;
  sc.epsilon = cfg.epsilon;
  sc.dx = cfg.dx;
  sc.cfl_safety = cfg.cfl_safety;
  sc.flux = cfg.flux == "llf" ? FluxScheme::LocalLaxFriedrichs : FluxScheme::CentralViscous;
  sc.max_steps = cfg.max_steps;
  sc.threads = threads;
  if (!cfg.region_predicate.empty()) {
    const std::vector<std::string> uv = {"u", "v"};
    auto expr = std::make_shared<Expression>(Expression::parse(cfg.region_predicate, uv));
    sc.region_predicate = [expr](double u, double v) {
      const double vals[2] = {u, v};
      return expr->eval(vals) >= 0.0;
    };
  }
  return sc;
}

}  // namespace gcflow
