#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "incpose/errors.hpp"
#include "incpose/io.hpp"
#include "incpose/synth.hpp"

using namespace incpose;

namespace {

struct Args {
  RunConfig run;
  std::string method = "naive";
  std::size_t n = 1000;
  double inlier_ratio = 0.1;
  double noise_sigma = 0.02;
  std::vector<double> true_pose{kDefaultTruePose.x, kDefaultTruePose.y, kDefaultTruePose.z, kDefaultTruePose.kappa};
  std::string sweep;
  std::string plot_dir;
  std::vector<std::string> records;
  int repeats = 5;
  bool no_warmup = false;
};

void add_constants(CLI::App* app, AnalyticConstants& k) {
  app->add_option("--a", k.a, "Condition threshold a");
  app->add_option("--c1", k.c1, "Essential-parameter lattice constant");
  app->add_option("--c2", k.c2, "Canonical epsilon' divisor");
  app->add_option("--c-kappa", k.c_kappa, "Bound on |dF/dkappa|");
  app->add_option("--c-grid", k.c_grid, "Kappa cell multiplier");
  app->add_option("--gamma", k.gamma, "Dual-cell ratio (0 estimates it)");
  app->add_option("--alpha", k.alpha, "Inflation bound for counted pairs");
  app->add_option("--beta", k.beta, "Lipschitz constant of the frame distance");
  app->add_option("--image-bound", k.image_bound, "Bound on |xi| and |eta|");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InvalidConfig("cannot write " + path);
  f << text;
}

Pose pose_of(const std::vector<double>& v) { return {v[0], v[1], v[2], v[3]}; }

int cmd_generate(const Args& a) {
  SceneConfig sc;
  sc.n = a.n;
  sc.inlier_ratio = a.inlier_ratio;
  sc.noise_sigma = a.noise_sigma;
  sc.true_pose = pose_of(a.true_pose);
  sc.seed = a.run.seed;
  sc.image_bound = a.run.constants.image_bound;
  const Scene s = generate_scene(sc);
  std::ostringstream o;
  o << "# seed=" << sc.seed << " n=" << sc.n << " inlier_ratio=" << sc.inlier_ratio
    << " noise_sigma=" << sc.noise_sigma << " true_pose=" << sc.true_pose.x << ',' << sc.true_pose.y << ','
    << sc.true_pose.z << ',' << sc.true_pose.kappa << '\n';
  write_correspondences(o, s.correspondences);
  write_text(a.run.output, o.str());
  return 0;
}

int cmd_solve(Args a, Method method) {
  a.run.method = method;
  a.run.validate();
  if (a.run.input.empty()) throw InvalidConfig("--input is required");
  std::vector<Correspondence> cs = parse_correspondences(a.run.input);
  RunInfo info;
  info.n_input = cs.size();
  info.normalization = normalize(cs);
  info.n_filtered = ingest_filter(cs, a.run.constants);
  if (info.n_filtered > 0)
    std::cerr << "warning: dropped " << info.n_filtered << " correspondences outside the image bound\n";
  if (cs.empty()) throw EmptyInput("no usable correspondences");

  SolveOptions so;
  so.method = method;
  so.epsilon = a.run.epsilon;
  so.constants = a.run.constants;
  so.top_k = a.run.top_k;
  so.early_exit = a.run.early_exit;
  const auto t0 = std::chrono::steady_clock::now();
  const IncidenceResult r = solve(cs, so);
  info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(a.run.output, format_result(r, a.run, info));
  return 0;
}

int cmd_bench(const Args& a) {
  if (a.sweep.empty()) throw InvalidConfig("--sweep is required");
  std::vector<BenchConfig> configs = parse_sweep(a.sweep);
  for (auto& c : configs) c.true_pose = pose_of(a.true_pose);
  if (configs.empty()) std::cerr << "warning: empty sweep, no records written\n";
  BenchOptions bo;
  bo.repeats = a.repeats;
  bo.warmup = !a.no_warmup;
  bo.early_exit = a.run.early_exit;
  bo.constants = a.run.constants;
  const auto recs = run_benchmark(configs, bo);
  std::ostringstream o;
  write_bench_records(o, recs);
  write_text(a.run.output, o.str());
  if (!a.plot_dir.empty()) write_plot_data(a.plot_dir, recs);
  std::size_t failed = 0;
  for (const auto& r : recs)
    if (!r.ok) {
      ++failed;
      std::cerr << "warning: " << method_name(r.config.method) << " n=" << r.config.n
                << " epsilon=" << r.config.epsilon << " failed: " << r.error << '\n';
    }
  if (failed) std::cerr << failed << " of " << recs.size() << " records failed\n";
  return 0;
}

int cmd_compare(const Args& a) {
  std::vector<BenchRecord> all;
  for (const auto& path : a.records) {
    std::ifstream f(path);
    if (!f) throw InvalidConfig("cannot open " + path);
    auto r = read_bench_records(f);
    all.insert(all.end(), r.begin(), r.end());
  }
  const auto rows = compare_methods(all);
  write_text(a.run.output, format_comparison(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate-incidence pose estimation from 2D-3D correspondences"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Args a;
  const std::vector<std::string> methods{"naive", "primal-dual", "canonical", "oracle"};

  auto* gen = app.add_subcommand("generate", "Write a synthetic correspondence file");
  auto* solve_cmd = app.add_subcommand("solve", "Estimate the pose from a correspondence file");
  auto* oracle = app.add_subcommand("oracle", "Brute-force exact counts over all grid vertices");
  auto* bench = app.add_subcommand("bench", "Run a sweep of synthetic benchmarks");
  auto* compare = app.add_subcommand("compare", "Compare methods from bench records");

  for (auto* c : {gen, solve_cmd, oracle, bench, compare})
    c->add_option("-o,--output", a.run.output, "Output path (default stdout)");
  for (auto* c : {gen, solve_cmd, oracle, bench}) {
    c->add_option("--seed", a.run.seed, "Random seed");
    add_constants(c, a.run.constants);
  }
  for (auto* c : {gen, bench})
    c->add_option("--true-pose", a.true_pose, "x,y,z,kappa")->delimiter(',')->expected(4);
  gen->add_option("--n", a.n, "Number of correspondences")->check(CLI::PositiveNumber);
  gen->add_option("--inlier-ratio", a.inlier_ratio, "Fraction of inliers");
  gen->add_option("--noise-sigma", a.noise_sigma, "Scene-point noise");

  for (auto* c : {solve_cmd, oracle}) {
    c->add_option("-i,--input", a.run.input, "Correspondence file")->required();
    c->add_option("--epsilon", a.run.epsilon, "Approximation parameter");
    c->add_option("--top-k", a.run.top_k, "Candidates to report");
  }
  solve_cmd->add_option("--method", a.method, "naive | primal-dual | canonical | oracle")
      ->check(CLI::IsMember(methods));
  for (auto* c : {solve_cmd, bench}) c->add_flag("--early-exit", a.run.early_exit, "Prune by count bounds");

  bench->add_option("--sweep", a.sweep, "Sweep file")->required();
  bench->add_option("--plot-dir", a.plot_dir, "Directory for per-method plot data");
  bench->add_option("--repeats", a.repeats, "Timed repetitions")->check(CLI::PositiveNumber);
  bench->add_flag("--no-warmup", a.no_warmup, "Skip the warm-up run");
  compare->add_option("records", a.records, "Bench record files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_generate(a);
    if (*solve_cmd) return cmd_solve(a, parse_method(a.method));
    if (*oracle) return cmd_solve(a, Method::Oracle);
    if (*bench) return cmd_bench(a);
    if (*compare) return cmd_compare(a);
  } catch (const ParseError& e) {
    std::cerr << format_error(e.kind(), e.what());
    return 1;
  } catch (const Error& e) {
    std::cerr << format_error(e.kind(), e.what());
    return e.kind() == "InvalidConfig" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << format_error("Internal", e.what());
    return 1;
  }
  return 2;
}
