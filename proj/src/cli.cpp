#include "gcflow/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "gcflow/config.hpp"
#include "gcflow/csv.hpp"
#include "gcflow/field_io.hpp"
#include "gcflow/gasref.hpp"
#include "gcflow/mesh_io.hpp"
#include "gcflow/metric.hpp"
#include "gcflow/parallel.hpp"
#include "gcflow/reconstruct.hpp"
#include "gcflow/solver.hpp"
#include "gcflow/weak_form.hpp"

namespace gcflow {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int default_threads() {
  if (const char* env = std::getenv("GCFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;  // resolve_thread_count turns 0 into the hardware count
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty())
    std::cout << content;
  else
    atomic_write_text(out_path, content);
}

// ---------------------------------------------------------------------------
// curvature

struct CurvatureArgs {
  std::string metric = "catenoid";
  std::string out;
  std::string mode = "analytic";
  int n = 64;
  int nx = 0;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool has_x0 = false, has_x1 = false, has_y0 = false, has_y1 = false;
};

int run_curvature(const CurvatureArgs& a) {
  auto metric = make_builtin_metric(a.metric);
  Domain d = metric->domain();
  if (a.has_x0) d.x0 = a.x0;
  if (a.has_x1) d.x1 = a.x1;
  if (a.has_y0) d.y0 = a.y0;
  if (a.has_y1) d.y1 = a.y1;
  metric = make_builtin_metric(a.metric, d);

  const int ny = a.n;
  const int nx = a.nx > 0 ? a.nx : a.n;
  std::unique_ptr<MetricField> fd;
  const MetricField* eval = metric.get();
  if (a.mode == "fd") {
    fd = sample_to_grid_metric(*metric, nx, ny);
    eval = fd.get();
  } else if (a.mode != "analytic") {
    throw Error(ErrorCode::Validation, "mode must be 'analytic' or 'fd'");
  }

  const double hx = d.width() / (nx - 1);
  const double hy = d.periodic_y ? d.height() / ny : d.height() / (ny - 1);
  std::string out = "x,y,kappa\n";
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double x = d.x0 + i * hx;
      const double y = d.y0 + j * hy;
      out += format_double(x);
      out += ',';
      out += format_double(y);
      out += ',';
      out += format_double(gauss_curvature(*eval, x, y));
      out += '\n';
    }
  emit(out, a.out);
  return 0;
}

// ---------------------------------------------------------------------------
// gasref

struct GasrefArgs {
  double gamma = 1.4;
  int n = 100;
  double qmax = -1.0;
  bool isothermal = false;
  double c = 1.0;
  double rho0 = 1.0;
  std::string out;
};

int run_gasref(const GasrefArgs& a) {
  std::string out = "q,rho,c,type\n";
  if (a.isothermal) {
    if (!(a.c > 0.0) || !(a.rho0 > 0.0))
      throw Error(ErrorCode::Validation, "isothermal flow needs c > 0 and rho0 > 0");
    const double qmax = a.qmax > 0 ? a.qmax : 3.0 * a.c;
    const double qcr = gasref::isothermal_critical_speed(a.c);
    for (int k = 0; k < a.n; ++k) {
      const double q = qmax * k / (a.n - 1);
      out += format_double(q);
      out += ',';
      out += format_double(gasref::isothermal_density(q, a.c, a.rho0));
      out += ',';
      out += format_double(a.c);
      out += ',';
      out += to_string(gasref::classify_speed(q, qcr));
      out += '\n';
    }
  } else {
    if (!(a.gamma > 1.0))
      throw Error(ErrorCode::Validation, "gamma must exceed 1 (use --isothermal for gamma = 1)");
    const auto speeds = gasref::critical_speeds(a.gamma);
    const double qmax = a.qmax > 0 ? std::min(a.qmax, speeds.q_cav) : speeds.q_cav;
    for (int k = 0; k < a.n; ++k) {
      const double q = qmax * k / (a.n - 1);
      const double rho = gasref::isentropic_density(q, a.gamma);
      const double c2 = gasref::sound_speed_sq(q, a.gamma);
      out += format_double(q);
      out += ',';
      out += format_double(rho);
      out += ',';
      out += format_double(std::sqrt(std::max(c2, 0.0)));
      out += ',';
      out += to_string(gasref::classify_speed(q, speeds.q_cr));
      out += '\n';
    }
  }
  emit(out, a.out);
  return 0;
}

// ---------------------------------------------------------------------------
// solve / reconstruct / verify / pipeline

json diagnostics_to_json(const RunConfig& cfg, const RunResult& result) {
  const Diagnostics& d = result.diagnostics;
  json j;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  switch (result.status) {
    case RunStatus::Completed: j["status"] = "completed"; break;
    case RunStatus::SonicDegeneracy: j["status"] = "sonic-degeneracy"; break;
    case RunStatus::CflViolation: j["status"] = "cfl-violation"; break;
  }
  if (!d.error.empty()) j["error"] = d.error;
  j["steps"] = d.steps.size();
  j["x_final"] = result.field.xs.empty() ? cfg.x0 : result.field.xs.back();

  double max_gauss = 0.0;
  json xs = json::array(), lam = json::array(), hyp = json::array(), par = json::array();
  json gauss = json::array(), erot = json::array(), econt = json::array(), viol = json::array();
  for (const StepRecord& r : d.steps) {
    max_gauss = std::max(max_gauss, r.max_gauss_residual);
    xs.push_back(r.x_to);
    lam.push_back(r.lambda_max);
    hyp.push_back(r.dx_limit_hyperbolic);
    par.push_back(r.dx_limit_parabolic);
    gauss.push_back(r.max_gauss_residual);
    erot.push_back(r.entropy_rot_increment);
    econt.push_back(r.entropy_cont_increment);
    viol.push_back(r.region_violations);
  }
  j["max_gauss_residual"] = max_gauss;
  j["entropy_production"] = {{"rotationality", d.entropy_rot_total},
                             {"continuity", d.entropy_cont_total}};
  j["region_violations"] = {{"total", d.region_violations_total}};
  if (d.first_region_violation) {
    const RegionViolation& v = *d.first_region_violation;
    j["region_violations"]["first"] = {{"x", v.x}, {"y", v.y}, {"u", v.u}, {"v", v.v}};
  }
  j["weak_codazzi_final"] = {{"eq1", d.final_weak.max_eq1}, {"eq2", d.final_weak.max_eq2}};
  j["per_step"] = {{"x", xs},
                   {"lambda_max", lam},
                   {"dx_limit_hyperbolic", hyp},
                   {"dx_limit_parabolic", par},
                   {"max_gauss_residual", gauss},
                   {"entropy_rot", erot},
                   {"entropy_cont", econt},
                   {"region_violations", viol}};
  return j;
}

struct SolveOutputs {
  RunResult result;
  std::unique_ptr<MetricField> metric;
};

SolveOutputs do_solve(const RunConfig& cfg, int threads) {
  auto metric = build_metric(cfg);
  const Grid1D grid = cfg.make_grid();
  const SolutionSlice init = build_initial_slice(cfg, grid);
  const SolverConfig sc = build_solver_config(cfg, resolve_thread_count(threads));
  RunResult result = run(init, cfg.x1, sc, grid, *metric);

  const fs::path dir = cfg.output_dir;
  write_field_csv(result.field, *metric, dir / "field.csv");
  atomic_write_text(dir / "diagnostics.json", diagnostics_to_json(cfg, result).dump(2) + "\n");
  return SolveOutputs{std::move(result), std::move(metric)};
}

int run_solve(const std::string& config_path, int threads) {
  const RunConfig cfg = parse_config(config_path);
  const SolveOutputs out = do_solve(cfg, threads);
  if (out.result.status != RunStatus::Completed) {
    std::cerr << "solve: " << out.result.diagnostics.error << "\n";
    return 2;
  }
  return 0;
}

SurfaceMesh do_reconstruct(const RunConfig& cfg, const MetricField& metric,
                           const SolutionField& field, int threads) {
  if (field.slice_count() < 2)
    throw Error(ErrorCode::Validation, "field has fewer than two slices; nothing to integrate");
  MeshGridSpec spec;
  spec.nx = field.slice_count();
  spec.ny = field.grid.n;
  spec.x0 = field.xs.front();
  spec.x1 = field.xs.back();
  spec.y0 = field.grid.y0;
  spec.y1 = field.grid.y1;
  spec.periodic_y = field.grid.periodic;

  const GridSecondFF hfield = GridSecondFF::from_solution(field, metric);
  IntegrateOptions opts;
  opts.threads = resolve_thread_count(threads);
  const Frame f0 = initial_frame(metric, spec.x0, spec.y0);
  SurfaceMesh mesh = integrate_frame(metric, hfield, spec, f0, Eigen::Vector3d::Zero(), opts);
  mesh.provenance = config_hash(cfg);

  const fs::path dir = cfg.output_dir;
  write_obj(mesh, dir / "mesh.obj");
  write_mesh_report(mesh, metric, &hfield, dir / "mesh_report.json");
  return mesh;
}

int run_reconstruct(const std::string& config_path, const std::string& field_path, int threads) {
  const RunConfig cfg = parse_config(config_path);
  const auto metric = build_metric(cfg);
  const fs::path fpath =
      field_path.empty() ? fs::path(cfg.output_dir) / "field.csv" : fs::path(field_path);
  const SolutionField field = read_field_csv(fpath, cfg.periodic_y);
  do_reconstruct(cfg, *metric, field, threads);
  return 0;
}

json verify_to_json(const SolutionField& field, const MetricField& metric) {
  const auto bumps = default_test_functions(field.xs.front(), field.xs.back(), field.grid.y0,
                                            field.grid.y1);
  const WeakResidualReport weak = weak_codazzi_residual(field, metric, bumps);
  const EntropyReport entropy = entropy_production(field, metric, bumps);

  json j;
  j["grid"] = {{"slices", field.slice_count()}, {"ny", field.grid.n}};
  j["gauss_constraint_max_abs"] = max_gauss_constraint_residual(field, metric);
  j["weak_codazzi"] = {{"eq1", weak.eq1}, {"eq2", weak.eq2}, {"max_abs", weak.max_abs()}};
  j["entropy"] = {{"rotationality", entropy.rotationality},
                  {"continuity", entropy.continuity},
                  {"max_abs", entropy.max_abs()}};
  json fns = json::array();
  for (const auto& b : bumps)
    fns.push_back({{"cx", b.cx}, {"cy", b.cy}, {"rx", b.rx}, {"ry", b.ry}});
  j["test_functions"] = fns;
  return j;
}

int run_verify(const std::string& config_path, const std::string& field_path,
               const std::string& metric_tag, const std::string& out_path) {
  std::unique_ptr<MetricField> metric;
  bool periodic = true;
  fs::path fpath = field_path;
  if (!config_path.empty()) {
    const RunConfig cfg = parse_config(config_path);
    metric = build_metric(cfg);
    periodic = cfg.periodic_y;
    if (fpath.empty()) fpath = fs::path(cfg.output_dir) / "field.csv";
  } else if (!metric_tag.empty()) {
    metric = make_builtin_metric(metric_tag);
    periodic = metric->periodic_y();
  } else {
    throw Error(ErrorCode::Validation, "verify needs --config or --metric");
  }
  if (fpath.empty()) throw Error(ErrorCode::Validation, "verify needs --field");
  const SolutionField field = read_field_csv(fpath, periodic);
  emit(verify_to_json(field, *metric).dump(2) + "\n", out_path);
  return 0;
}

int run_pipeline(const std::string& config_path, int threads) {
  const RunConfig cfg = parse_config(config_path);
  const SolveOutputs solved = do_solve(cfg, threads);
  if (solved.result.status != RunStatus::Completed) {
    std::cerr << "pipeline: solve failed: " << solved.result.diagnostics.error << "\n";
    return 2;
  }
  do_reconstruct(cfg, *solved.metric, solved.result.field, threads);
  atomic_write_text(fs::path(cfg.output_dir) / "verify.json",
                    verify_to_json(solved.result.field, *solved.metric).dump(2) + "\n");
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"Gauss-Codazzi marching solver and surface reconstruction"};
  app.require_subcommand(1);

  CurvatureArgs cur;
  CLI::App* curvature = app.add_subcommand("curvature", "Tabulate Gauss curvature as CSV");
  curvature->add_option("--metric", cur.metric, "builtin metric tag");
  auto* ox0 = curvature->add_option("--x0", cur.x0);
  auto* ox1 = curvature->add_option("--x1", cur.x1);
  auto* oy0 = curvature->add_option("--y0", cur.y0);
  auto* oy1 = curvature->add_option("--y1", cur.y1);
  curvature->add_option("--n", cur.n, "y-resolution (and x unless --nx)")->check(CLI::Range(4, 100000));
  curvature->add_option("--nx", cur.nx, "x-resolution");
  curvature->add_option("--mode", cur.mode, "analytic | fd");
  curvature->add_option("--out", cur.out, "output path (default stdout)");

  GasrefArgs gas;
  CLI::App* gasref_cmd = app.add_subcommand("gasref", "Gas-dynamics reference table as CSV");
  gasref_cmd->add_option("--gamma", gas.gamma);
  gasref_cmd->add_option("--n", gas.n)->check(CLI::Range(2, 10000000));
  gasref_cmd->add_option("--qmax", gas.qmax);
  gasref_cmd->add_flag("--isothermal", gas.isothermal);
  gasref_cmd->add_option("--c", gas.c, "isothermal sound speed");
  gasref_cmd->add_option("--rho0", gas.rho0, "isothermal stagnation density");
  gasref_cmd->add_option("--out", gas.out);

  std::string cfg_solve, cfg_rec, cfg_verify, cfg_pipe;
  std::string field_rec, field_verify, metric_verify, out_verify;
  int threads = default_threads();

  CLI::App* solve = app.add_subcommand("solve", "March the viscous balance laws");
  solve->add_option("--config", cfg_solve)->required();
  solve->add_option("--threads", threads);

  CLI::App* reconstruct =
      app.add_subcommand("reconstruct", "Integrate the frame equations over a solved field");
  reconstruct->add_option("--config", cfg_rec)->required();
  reconstruct->add_option("--field", field_rec, "field CSV (default <out>/field.csv)");
  reconstruct->add_option("--threads", threads);

  CLI::App* verify = app.add_subcommand("verify", "Residual report for a stored field");
  verify->add_option("--config", cfg_verify);
  verify->add_option("--field", field_verify);
  verify->add_option("--metric", metric_verify, "builtin metric tag");
  verify->add_option("--out", out_verify, "output path (default stdout)");

  CLI::App* pipeline = app.add_subcommand("pipeline", "solve, reconstruct, verify in one run");
  pipeline->add_option("--config", cfg_pipe)->required();
  pipeline->add_option("--threads", threads);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 pops from the back
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (curvature->parsed()) {
      cur.has_x0 = ox0->count() > 0;
      cur.has_x1 = ox1->count() > 0;
      cur.has_y0 = oy0->count() > 0;
      cur.has_y1 = oy1->count() > 0;
      return run_curvature(cur);
    }
    if (gasref_cmd->parsed()) return run_gasref(gas);
    if (solve->parsed()) return run_solve(cfg_solve, threads);
    if (reconstruct->parsed()) return run_reconstruct(cfg_rec, field_rec, threads);
    if (verify->parsed()) return run_verify(cfg_verify, field_verify, metric_verify, out_verify);
    if (pipeline->parsed()) return run_pipeline(cfg_pipe, threads);
  } catch (const Error& err) {
    std::cerr << "gcflow: " << err.what() << "\n";
    switch (err.code()) {
      case ErrorCode::Validation:
      case ErrorCode::UnknownTag:
        return 1;
      case ErrorCode::Io:
        return 3;
      default:
        return 2;
    }
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args);
}

}  // namespace gcflow
