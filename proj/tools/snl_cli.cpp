// Command-line surface: instance generation, solving (gd / sdr / sdr-gd),
// non-convexity certification, Monte Carlo experiments, landscape and
// connecting-path exports.
//
// Exit codes: 0 success, 1 usage or input error, 2 solver non-convergence.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snl/analysis.hpp"
#include "snl/descent.hpp"
#include "snl/json_io.hpp"
#include "snl/loss.hpp"
#include "snl/model.hpp"
#include "snl/sdr.hpp"

namespace {

using snl::Rect;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConvergence = 2;

std::vector<Eigen::VectorXd> parse_anchors(const std::string& spec,
                                           const std::vector<std::string>& extra,
                                           const Rect& region) {
  std::vector<Eigen::VectorXd> anchors;
  if (spec == "corners4") {
    anchors = snl::corner_anchors(region);
  } else if (spec != "none") {
    throw CLI::ValidationError("--anchors must be corners4 or none");
  }
  for (const auto& s : extra) {
    std::stringstream ss(s);
    std::vector<double> vals;
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (static_cast<int>(vals.size()) != region.dim())
      throw CLI::ValidationError("--anchor needs " + std::to_string(region.dim()) +
                                 " coordinates");
    anchors.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
  }
  return anchors;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    snl::write_file(out_path, content);
}

ordered_json positions_json(const std::vector<Eigen::VectorXd>& rows) {
  ordered_json a = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < r.size(); ++k) row.push_back(r[k]);
    a.push_back(row);
  }
  return a;
}

struct GdFlags {
  double b = 2.0, c = 2.0;
  int starts = 1;
  std::uint64_t seed = 0;
  double box_lo = -2.0, box_hi = 2.0;
  int max_iters = 5000;
  std::string step = "auto";
  double eta = 1.0;
  std::string trace_out;
};

snl::DescentOptions descent_options(const GdFlags& f) {
  snl::DescentOptions opts;
  opts.max_iters = f.max_iters;
  opts.eta = f.eta;
  opts.keep_trace = !f.trace_out.empty();
  if (f.step == "auto")
    opts.step_rule = (f.c == 1.0) ? snl::StepRule::Diminishing
                                  : snl::StepRule::Backtracking;
  else if (f.step == "backtracking")
    opts.step_rule = snl::StepRule::Backtracking;
  else if (f.step == "diminishing")
    opts.step_rule = snl::StepRule::Diminishing;
  else if (f.step == "constant")
    opts.step_rule = snl::StepRule::Constant;
  else if (f.step == "polyak")
    opts.step_rule = snl::StepRule::Polyak;
  else
    throw CLI::ValidationError("unknown --step rule");
  return opts;
}

int run_solve_gd(const std::string& file, const GdFlags& f,
                 const std::string& out) {
  const auto pf = snl::load_problem(file);
  const auto& p = pf.problem;
  const snl::LossSpec spec{f.b, f.c, 0};
  const auto opts = descent_options(f);
  const int cfg_dim = p.dim * p.topology.n_sensors();
  const Rect box = Rect::cube(cfg_dim, f.box_lo, f.box_hi);
  const auto results = snl::multistart(p, spec, f.starts, box, opts, f.seed);
  const auto clusters = snl::cluster_minima(results);

  bool any_converged = false;
  for (const auto& r : results) any_converged |= r.converged;

  ordered_json j;
  j["method"] = "gd";
  j["b"] = f.b;
  j["c"] = f.c;
  j["starts"] = f.starts;
  j["seed"] = f.seed;
  j["converged"] = any_converged;
  j["n_clusters"] = clusters.size();
  ordered_json cl = ordered_json::array();
  for (const auto& c : clusters) {
    ordered_json e;
    e["loss"] = c.loss;
    e["hits"] = c.hits;
    e["positions"] = positions_json(
        snl::positions_from_config(c.representative, p.topology.n_sensors(), p.dim));
    cl.push_back(e);
  }
  j["clusters"] = cl;
  emit(out, j.dump(2) + "\n");
  if (!f.trace_out.empty() && !results.empty())
    snl::write_file(f.trace_out, snl::trace_to_csv(results.front()));

  std::fprintf(stderr, "gd: %zu cluster(s), best loss %.3e, %s\n",
               clusters.size(), clusters.empty() ? 0.0 : clusters.front().loss,
               any_converged ? "converged" : "not converged");
  return any_converged ? kExitOk : kExitNoConvergence;
}

int run_solve_sdr(const std::string& file, const snl::SdrOptions& opts,
                  const std::string& out) {
  const auto pf = snl::load_problem(file);
  const auto sol = snl::solve_sdr(pf.problem, opts);
  emit(out, snl::sdr_solution_to_json(sol));
  std::fprintf(stderr,
               "sdr: objective %.3e, rank %d, %d iters, residuals %.1e/%.1e\n",
               sol.objective, sol.numeric_rank, sol.iters_used,
               sol.primal_residual, sol.dual_residual);
  return sol.converged ? kExitOk : kExitNoConvergence;
}

int run_solve_sdr_gd(const std::string& file, const snl::SdrOptions& sdr_opts,
                     const GdFlags& f, const std::string& out) {
  const auto pf = snl::load_problem(file);
  const auto& p = pf.problem;
  GdFlags smooth = f;
  smooth.b = 2.0;
  smooth.c = 2.0;  // the pipeline descends the smooth loss
  const auto res = snl::sdr_gd_pipeline(p, sdr_opts, descent_options(smooth));

  ordered_json j;
  j["method"] = "sdr-gd";
  j["sdr_objective"] = res.sdr.objective;
  j["sdr_rank"] = res.sdr.numeric_rank;
  j["warm"] = positions_json(
      snl::positions_from_config(res.warm, p.topology.n_sensors(), p.dim));
  j["loss_final"] = res.result.loss_final;
  j["iters_used"] = res.result.iters_used;
  j["converged"] = res.result.converged;
  j["positions"] = positions_json(snl::positions_from_config(
      res.result.x_final, p.topology.n_sensors(), p.dim));
  emit(out, j.dump(2) + "\n");
  std::fprintf(stderr, "sdr-gd: final loss %.3e after %d GD iters, %s\n",
               res.result.loss_final, res.result.iters_used,
               res.result.converged ? "converged" : "not converged");
  return res.result.converged ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sensor network localization toolkit"};
  app.require_subcommand(1);

  std::string out_path;
  std::string format = "json";
  app.add_option("--format", format, "output format hint (json|csv)")
      ->check(CLI::IsMember({"json", "csv"}));

  // ---- gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate problem instances");
  gen->require_subcommand(1);

  struct {
    double square = 1.0;
    double r = 0.35;
    int n = 10;
    std::string anchors = "corners4";
    std::vector<std::string> anchor_list;
    std::uint64_t seed = 0;
    std::string out;
  } gu;
  auto* gen_ud = gen->add_subcommand("unitdisk", "random unit-disk instance");
  gen_ud->add_option("--square", gu.square, "side of the [0,s]^2 region");
  gen_ud->add_option("--r", gu.r, "connection radius")->required();
  gen_ud->add_option("--n", gu.n, "number of sensors")->required();
  gen_ud->add_option("--anchors", gu.anchors, "anchor layout (corners4|none)");
  gen_ud->add_option("--anchor", gu.anchor_list, "extra anchor at x,y");
  gen_ud->add_option("--seed", gu.seed, "rng seed")->required();
  gen_ud->add_option("--out", gu.out, "output problem file");

  struct {
    int dim = 2;
    int n = 5;
    double square = 1.0;
    std::uint64_t seed = 0;
    std::string out;
  } gt;
  auto* gen_tri = gen->add_subcommand("trilateration", "universally rigid instance");
  gen_tri->add_option("--dim", gt.dim, "spatial dimension");
  gen_tri->add_option("--n", gt.n, "number of sensors")->required();
  gen_tri->add_option("--square", gt.square, "side of the region");
  gen_tri->add_option("--seed", gt.seed, "rng seed")->required();
  gen_tri->add_option("--out", gt.out, "output problem file");

  struct {
    std::string name;
    double e = 1.0, h = 1.99, r = 1.995;
    std::string out;
  } ge;
  auto* gen_ex = gen->add_subcommand("example", "named built-in example");
  gen_ex->set_help_flag("--help", "print help");  // frees -h for the height flag
  gen_ex->add_option("name", ge.name,
                     "three_anchor_one_sensor | one_anchor_one_sensor | radius_example")
      ->required();
  gen_ex->add_option("--e", ge.e, "radius_example half-spacing");
  gen_ex->add_option("--h", ge.h, "radius_example anchor height");
  gen_ex->add_option("--r", ge.r, "radius_example connection radius");
  gen_ex->add_option("--out", ge.out, "output problem file");

  // ---- solve --------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "solve a problem file");
  solve->require_subcommand(1);

  GdFlags gd;
  std::string gd_file, gd_out;
  auto* solve_gd = solve->add_subcommand("gd", "multistart (sub)gradient descent");
  solve_gd->add_option("file", gd_file, "problem file")->required();
  solve_gd->add_option("--b", gd.b, "inside degree");
  solve_gd->add_option("--c", gd.c, "outside degree");
  solve_gd->add_option("--starts", gd.starts, "number of random starts");
  solve_gd->add_option("--seed", gd.seed, "rng seed")->required();
  solve_gd->add_option("--box-lo", gd.box_lo, "start box lower bound");
  solve_gd->add_option("--box-hi", gd.box_hi, "start box upper bound");
  solve_gd->add_option("--max-iters", gd.max_iters, "iteration cap");
  solve_gd->add_option("--step", gd.step,
                       "step rule (auto|backtracking|diminishing|constant|polyak)");
  solve_gd->add_option("--eta", gd.eta, "step scale for constant/diminishing");
  solve_gd->add_option("--trace-out", gd.trace_out, "CSV trace of the first start");
  solve_gd->add_option("--out", gd_out, "result file");

  snl::SdrOptions sdr_opts;
  std::string sdr_file, sdr_out;
  auto* solve_sdr_cmd = solve->add_subcommand("sdr", "semidefinite relaxation");
  solve_sdr_cmd->add_option("file", sdr_file, "problem file")->required();
  solve_sdr_cmd->add_option("--tol", sdr_opts.solver_tol, "residual tolerance");
  solve_sdr_cmd->add_option("--max-iters", sdr_opts.max_iters, "iteration cap");
  solve_sdr_cmd->add_option("--reg", sdr_opts.regularization_weight,
                            "regularization weight (maximize unconnected distances)");
  solve_sdr_cmd->add_option("--rho", sdr_opts.penalty, "splitting penalty");
  solve_sdr_cmd->add_option("--out", sdr_out, "solution file");

  snl::SdrOptions pipe_sdr_opts;
  GdFlags pipe_gd;
  std::string pipe_file, pipe_out;
  auto* solve_pipe = solve->add_subcommand("sdr-gd", "SDR warm start + descent");
  solve_pipe->add_option("file", pipe_file, "problem file")->required();
  solve_pipe->add_option("--tol", pipe_sdr_opts.solver_tol, "SDR tolerance");
  solve_pipe->add_option("--max-iters", pipe_sdr_opts.max_iters, "SDR iteration cap");
  solve_pipe->add_option("--reg", pipe_sdr_opts.regularization_weight,
                         "SDR regularization weight");
  solve_pipe->add_option("--rho", pipe_sdr_opts.penalty, "splitting penalty");
  solve_pipe->add_option("--gd-max-iters", pipe_gd.max_iters, "GD iteration cap");
  solve_pipe->add_option("--out", pipe_out, "result file");

  // ---- certify ------------------------------------------------------------
  struct {
    std::string file;
    bool sufficient = false;
    bool augmented = false;
    bool scan = false;
    double b = 2.0, c = 1.0;
    int segments = 1000;
    int samples = 17;
    double box_lo = -3.0, box_hi = 3.0;
    std::uint64_t seed = 0;
    std::string out;
  } cert;
  auto* certify = app.add_subcommand("certify", "non-convexity certificates");
  certify->add_option("file", cert.file, "problem file")->required();
  certify->add_flag("--sufficient", cert.sufficient,
                    "one-point sufficient condition (default)");
  certify->add_flag("--augmented", cert.augmented,
                    "evaluate in the directly augmented dimension n+d");
  certify->add_flag("--scan", cert.scan, "random segment convexity scan");
  certify->add_option("--b", cert.b, "inside degree");
  certify->add_option("--c", cert.c, "outside degree");
  certify->add_option("--segments", cert.segments, "scan segment count");
  certify->add_option("--samples", cert.samples, "scan samples per segment");
  certify->add_option("--box-lo", cert.box_lo, "scan box lower bound");
  certify->add_option("--box-hi", cert.box_hi, "scan box upper bound");
  certify->add_option("--seed", cert.seed, "rng seed (required with --scan)");
  certify->add_option("--out", cert.out, "certificate file");

  // ---- mc -----------------------------------------------------------------
  struct {
    double square = 1.0;
    double r = 0.35;
    std::string anchors = "corners4";
    std::vector<std::string> anchor_list;
    std::string n_list = "25,50,100,200";
    int trials = 200;
    double eps = 0.5;
    double b = 2.0, c = 1.0;
    std::uint64_t seed = 0;
    std::string out;
  } mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo non-convexity experiment");
  mc_cmd->add_option("--square", mc.square, "side of the region");
  mc_cmd->add_option("--r", mc.r, "connection radius")->required();
  mc_cmd->add_option("--anchors", mc.anchors, "anchor layout (corners4|none)");
  mc_cmd->add_option("--anchor", mc.anchor_list, "extra anchor at x,y");
  mc_cmd->add_option("--n-list", mc.n_list, "comma-separated sensor counts");
  mc_cmd->add_option("--trials", mc.trials, "trials per n");
  mc_cmd->add_option("--eps", mc.eps, "annulus inner fraction");
  mc_cmd->add_option("--b", mc.b, "inside degree");
  mc_cmd->add_option("--c", mc.c, "outside degree");
  mc_cmd->add_option("--seed", mc.seed, "rng seed")->required();
  mc_cmd->add_option("--out", mc.out, "report CSV");

  // ---- landscape ----------------------------------------------------------
  struct {
    std::string file;
    int sensor = 0;
    double xmin = -2, xmax = 2, ymin = -2, ymax = 2;
    int res = 201;
    double b = 2.0, c = 1.0;
    std::string out;
  } land;
  auto* land_cmd = app.add_subcommand("landscape", "loss grid over one sensor");
  land_cmd->add_option("file", land.file, "problem file")->required();
  land_cmd->add_option("--sensor", land.sensor, "sensor index to vary");
  land_cmd->add_option("--xmin", land.xmin);
  land_cmd->add_option("--xmax", land.xmax);
  land_cmd->add_option("--ymin", land.ymin);
  land_cmd->add_option("--ymax", land.ymax);
  land_cmd->add_option("--res", land.res, "grid resolution per axis");
  land_cmd->add_option("--b", land.b, "inside degree");
  land_cmd->add_option("--c", land.c, "outside degree");
  land_cmd->add_option("--out", land.out, "grid CSV");

  // ---- pathcheck ----------------------------------------------------------
  struct {
    std::string file;
    std::string p_file, q_file;
    int samples = 101;
  } path;
  auto* path_cmd =
      app.add_subcommand("pathcheck", "connecting-path isometry check");
  path_cmd->add_option("file", path.file, "problem file")->required();
  path_cmd->add_option("--p", path.p_file, "first solution config (JSON rows)")
      ->required();
  path_cmd->add_option("--q", path.q_file, "second solution config (JSON rows)")
      ->required();
  path_cmd->add_option("--samples", path.samples, "path sample count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_ud->parsed()) {
      const Rect region = Rect::cube(2, 0.0, gu.square);
      snl::UnitDiskCase c;
      c.region = region;
      c.radius = gu.r;
      c.n_sensors = gu.n;
      c.anchors = parse_anchors(gu.anchors, gu.anchor_list, region);
      const auto fw = snl::sample_unit_disk(c, gu.seed);
      emit(gu.out, snl::problem_to_json(snl::problem_from_framework(fw), fw.sensors));
      return kExitOk;
    }
    if (gen_tri->parsed()) {
      const Rect region = Rect::cube(gt.dim, 0.0, gt.square);
      const auto fw = snl::gen_trilateration(gt.dim, gt.n, region, gt.seed);
      emit(gt.out, snl::problem_to_json(snl::problem_from_framework(fw), fw.sensors));
      return kExitOk;
    }
    if (gen_ex->parsed()) {
      const auto fw = snl::builtin_example(ge.name, ge.e, ge.h, ge.r);
      emit(ge.out, snl::problem_to_json(snl::problem_from_framework(fw), fw.sensors));
      return kExitOk;
    }
    if (solve_gd->parsed()) return run_solve_gd(gd_file, gd, gd_out);
    if (solve_sdr_cmd->parsed()) return run_solve_sdr(sdr_file, sdr_opts, sdr_out);
    if (solve_pipe->parsed())
      return run_solve_sdr_gd(pipe_file, pipe_sdr_opts, pipe_gd, pipe_out);

    if (certify->parsed()) {
      const auto pf = snl::load_problem(cert.file);
      snl::Certificate result;
      if (cert.scan) {
        if (certify->count("--seed") == 0) {
          std::cerr << "certify: --scan is randomized and requires --seed\n";
          return kExitUsage;
        }
        const snl::LossSpec spec{cert.b, cert.c, 0};
        const int cfg = pf.problem.dim * pf.problem.topology.n_sensors();
        const auto hit = snl::segment_convexity_scan(
            pf.problem, spec, Rect::cube(cfg, cert.box_lo, cert.box_hi),
            cert.segments, cert.samples, cert.seed);
        ordered_json j;
        j["scan_segments"] = cert.segments;
        j["violation_found"] = hit.has_value();
        if (hit)
          j["certificate"] =
              ordered_json::parse(snl::certificate_to_json(*hit));
        emit(cert.out, j.dump(2) + "\n");
        return kExitOk;
      }
      if (!pf.sensors_true) {
        std::cerr << "certify: --sufficient needs true sensor positions in the file\n";
        return kExitUsage;
      }
      const snl::Framework fw = pf.framework();
      const snl::LossSpec spec{cert.b, cert.c, 0};
      result = cert.augmented
                   ? snl::augmented_nonconvexity(fw, spec)
                   : snl::check_sufficient_condition(pf.problem, *pf.sensors_true, spec);
      emit(cert.out, snl::certificate_to_json(result));
      return kExitOk;
    }

    if (mc_cmd->parsed()) {
      const Rect region = Rect::cube(2, 0.0, mc.square);
      snl::UnitDiskCase c;
      c.region = region;
      c.radius = mc.r;
      c.anchors = parse_anchors(mc.anchors, mc.anchor_list, region);
      std::vector<int> ns;
      std::stringstream ss(mc.n_list);
      std::string tok;
      while (std::getline(ss, tok, ',')) ns.push_back(std::stoi(tok));
      c.n_sensors = ns.empty() ? 0 : ns.back();
      const auto rep = snl::monte_carlo_nonconvexity(
          c, snl::LossSpec{mc.b, mc.c, 0}, ns, mc.trials, mc.seed, mc.eps);
      emit(mc.out, rep.to_csv());
      return kExitOk;
    }

    if (land_cmd->parsed()) {
      const auto pf = snl::load_problem(land.file);
      const auto& p = pf.problem;
      Rect window;
      window.lo = Eigen::Vector2d(land.xmin, land.ymin);
      window.hi = Eigen::Vector2d(land.xmax, land.ymax);
      snl::SensorConfig fixed;
      if (pf.sensors_true)
        fixed = snl::config_from_positions(*pf.sensors_true, p.dim);
      else
        fixed = snl::SensorConfig::Zero(p.dim * p.topology.n_sensors());
      const auto grid =
          snl::landscape_grid(p, snl::LossSpec{land.b, land.c, 0}, land.sensor,
                              window, land.res, land.res, fixed);
      emit(land.out, grid.to_csv());
      return kExitOk;
    }

    if (path_cmd->parsed()) {
      const auto pf = snl::load_problem(path.file);
      const auto& p = pf.problem;
      const auto p_cfg =
          snl::config_from_positions(snl::load_config(path.p_file), p.dim);
      const auto q_cfg =
          snl::config_from_positions(snl::load_config(path.q_file), p.dim);
      const double dev =
          snl::verify_path_isometry(p, p_cfg, q_cfg, path.samples);
      std::printf("%.17g\n", dev);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
