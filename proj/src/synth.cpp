#include "incpose/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <tuple>

#include "incpose/families.hpp"
#include "incpose/naive.hpp"
#include "incpose/primal_dual.hpp"

namespace incpose {

Scene generate_scene(const SceneConfig& cfg) {
  if (cfg.n < 1) throw InvalidConfig("scene needs n >= 1");
  if (!(cfg.inlier_ratio > 0 && cfg.inlier_ratio <= 1)) throw InvalidConfig("inlier ratio must lie in (0, 1]");
  if (!(cfg.noise_sigma >= 0)) throw InvalidConfig("noise sigma must be >= 0");
  if (!in_primal_domain(cfg.true_pose)) throw InvalidConfig("true pose outside [0,1]^3 x [-1,1]");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0 ? cfg.noise_sigma : 1.0);
  auto jitter = [&](double w) {
    return cfg.noise_sigma > 0 ? std::clamp(w + noise(rng), 0.0, 1.0) : w;
  };

  Scene scene;
  scene.true_pose = cfg.true_pose;
  const auto inliers = std::size_t(std::ceil(double(cfg.n) * cfg.inlier_ratio - 1e-9));
  const std::uint64_t budget = 1000ull * cfg.n;
  scene.correspondences.reserve(cfg.n);
  scene.inlier.reserve(cfg.n);

  for (std::size_t i = 0; i < cfg.n; ++i) {
    const bool inlier = i < inliers;
    for (;;) {
      const double w1 = unit(rng), w2 = unit(rng), w3 = unit(rng);
      Correspondence c;
      std::optional<ImagePoint> p;
      if (inlier) {
        p = try_project(cfg.true_pose, w1, w2, w3);
        c = {jitter(w1), jitter(w2), jitter(w3), 0, 0};
      } else {
        c = {jitter(w1), jitter(w2), jitter(w3), 0, 0};
        const Pose random{unit(rng), unit(rng), unit(rng), sym(rng)};
        p = try_project(random, c.w1, c.w2, c.w3);
      }
      if (p && std::abs(p->xi) <= cfg.image_bound && std::abs(p->eta) <= cfg.image_bound) {
        c.xi = p->xi;
        c.eta = p->eta;
        if (!cfg.accept || cfg.accept(c, inlier)) {
          scene.correspondences.push_back(c);
          scene.inlier.push_back(inlier ? 1 : 0);
          break;
        }
      }
      if (++scene.redraws > budget) throw RejectionOverflow("more than 1000 n redraws");
    }
  }
  return scene;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::PrimalDual: return "primal-dual";
    case Method::Canonical: return "canonical";
    case Method::Oracle: return "oracle";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "naive") return Method::Naive;
  if (s == "primal-dual") return Method::PrimalDual;
  if (s == "canonical") return Method::Canonical;
  if (s == "oracle") return Method::Oracle;
  throw InvalidConfig("unknown method '" + s + "'");
}

IncidenceResult solve(std::span<const Correspondence> surfaces, const SolveOptions& opt) {
  opt.constants.validate();
  if (opt.top_k < 1) throw InvalidConfig("top_k must be >= 1");
  switch (opt.method) {
    case Method::Naive: {
      NaiveOptions o;
      o.parallel = opt.parallel;
      return naive_solve(surfaces, opt.epsilon, opt.constants, opt.top_k, o);
    }
    case Method::PrimalDual: {
      PrimalDualOptions o;
      o.parallel = opt.parallel;
      o.early_exit = opt.early_exit;
      o.top_k = opt.top_k;
      return primal_dual_solve(surfaces, opt.epsilon, opt.constants, o);
    }
    case Method::Canonical: {
      CanonicalOptions o;
      o.parallel = opt.parallel;
      o.early_exit = opt.early_exit;
      o.top_k = opt.top_k;
      return canonical_solve(surfaces, opt.epsilon, opt.constants, o);
    }
    case Method::Oracle:
      return oracle_solve(surfaces, opt.epsilon, opt.constants, opt.top_k);
  }
  throw InvalidConfig("unknown method");
}

std::vector<BenchRecord> run_benchmark(std::span<const BenchConfig> configs, const BenchOptions& opt) {
  std::vector<BenchRecord> out;
  for (const BenchConfig& cfg : configs) {
    BenchRecord rec;
    rec.config = cfg;
    try {
      SceneConfig sc;
      sc.n = cfg.n;
      sc.inlier_ratio = cfg.inlier_ratio;
      sc.noise_sigma = cfg.noise_sigma;
      sc.true_pose = cfg.true_pose;
      sc.seed = cfg.seed;
      sc.image_bound = opt.constants.image_bound;
      const Scene scene = generate_scene(sc);
      SolveOptions so;
      so.method = cfg.method;
      so.epsilon = cfg.epsilon;
      so.constants = opt.constants;
      so.early_exit = opt.early_exit;
      if (opt.warmup) (void)solve(scene.correspondences, so);
      IncidenceResult last;
      for (int r = 0; r < std::max(1, opt.repeats); ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        last = solve(scene.correspondences, so);
        const auto t1 = std::chrono::steady_clock::now();
        rec.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      std::vector<double> sorted = rec.seconds;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t h = sorted.size() / 2;
      rec.median_seconds = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
      rec.epsilon_effective = last.epsilon_effective;
      rec.recovered = last.candidates.front().pose;
      rec.count = last.candidates.front().count;
      for (int a = 0; a < 4; ++a) rec.pose_error[std::size_t(a)] = std::abs(rec.recovered[a] - cfg.true_pose[a]);
      rec.counters = last.diagnostics;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ComparisonRow> compare_methods(std::span<const BenchRecord> records) {
  using Key = std::tuple<std::size_t, double, double, double, std::uint64_t>;
  std::map<Key, std::vector<const BenchRecord*>> groups;
  for (const auto& r : records)
    if (r.ok)
      groups[{r.config.n, r.config.epsilon, r.config.inlier_ratio, r.config.noise_sigma, r.config.seed}]
          .push_back(&r);
  std::vector<ComparisonRow> rows;
  for (const auto& [key, recs] : groups) {
    ComparisonRow row;
    std::tie(row.n, row.epsilon, row.inlier_ratio, row.noise_sigma, row.seed) = key;
    for (const BenchRecord* r : recs) {
      const std::string m = method_name(r->config.method);
      row.seconds[m] = r->median_seconds;
      row.pose_error[m] = r->pose_error;
    }
    if (row.seconds.size() < 2) continue;
    double slowest = 0, fastest = std::numeric_limits<double>::infinity();
    for (const auto& [m, s] : row.seconds) {
      slowest = std::max(slowest, s);
      if (s < fastest) {
        fastest = s;
        row.fastest = m;
      }
    }
    for (const auto& [m, s] : row.seconds) row.speedup[m] = s > 0 ? slowest / s : 1.0;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw MismatchedConfigs("no scene config has records from two or more methods");
  return rows;
}

std::vector<std::string> write_plot_data(const std::string& dir, std::span<const BenchRecord> records) {
  std::filesystem::create_directories(dir);
  std::map<std::string, std::vector<const BenchRecord*>> by_method;
  for (const auto& r : records)
    if (r.ok) by_method[method_name(r.config.method)].push_back(&r);
  std::vector<std::string> paths;
  for (auto& [m, recs] : by_method) {
    std::stable_sort(recs.begin(), recs.end(), [](const BenchRecord* a, const BenchRecord* b) {
      return std::tie(a->config.epsilon, a->config.n) < std::tie(b->config.epsilon, b->config.n);
    });
    const std::string path = (std::filesystem::path(dir) / (m + ".dat")).string();
    std::ofstream f(path);
    if (!f) throw InvalidConfig("cannot write " + path);
    f << "# epsilon\tn\tmedian_seconds\tpose_err_x\tpose_err_y\tpose_err_z\tpose_err_kappa\n";
    char buf[256];
    for (const BenchRecord* r : recs) {
      std::snprintf(buf, sizeof buf, "%.6g\t%zu\t%.6g\t%.6g\t%.6g\t%.6g\t%.6g\n", r->config.epsilon,
                    r->config.n, r->median_seconds, r->pose_error[0], r->pose_error[1], r->pose_error[2],
                    r->pose_error[3]);
      f << buf;
    }
    paths.push_back(path);
  }
  return paths;
}

}  // namespace incpose
