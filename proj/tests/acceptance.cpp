// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gen.hpp"
#include "incpose/families.hpp"
#include "incpose/io.hpp"
#include "incpose/naive.hpp"
#include "incpose/primal_dual.hpp"
#include "incpose/synth.hpp"
#include "scenes.hpp"

using namespace incpose;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

// Criteria 1 and 2 share the separated scenes.
constexpr double kSepEps = 0.05;
constexpr int kSepScenes = 10;

struct SeparatedRun {
  std::uint64_t vertices = 0, naive_low = 0, pd_low = 0, exact_mismatch = 0;
  std::uint64_t naive_pairs = 0, pd_pairs = 0, naive_over = 0, pd_over = 0;
  double naive_alpha = 0, pd_alpha = 0;
  double seconds = 0;
  bool done = false;
};

SeparatedRun& separated() {
  static SeparatedRun run;
  if (run.done) return run;
  const auto t0 = Clock::now();
  const AnalyticConstants k;
  for (int s = 1; s <= kSepScenes; ++s) {
    const Scene scene = scenes::separated_scene(std::uint64_t(s), 200, kSepEps, 0.5, 0.01, k);
    const auto& cs = scene.correspondences;
    NaiveOptions no;
    no.keep_lists = true;
    const NaiveIndex idx = naive_count(cs, kSepEps, k, no);
    PrimalDualOptions po;
    po.audit = true;
    po.keep_vertex_counts = true;
    const PrimalDualRun pd = primal_dual_run(cs, kSepEps, k, po);
    const GridSpec& g = idx.grid;
    for (std::int64_t l = 0; l < g.size(); ++l) {
      const Pose v = g.center(g.unlinear(l));
      const std::uint64_t want = oracle_count(v, cs, kSepEps).count;
      ++run.vertices;
      if (idx.hist.at(l) < want) ++run.naive_low;
      if (pd.vertex_counts->at(l) < want) ++run.pd_low;
      if (exact_count_at(v, cs, kSepEps, idx) != want) ++run.exact_mismatch;
    }
    auto audit = [&](std::int64_t cell, std::uint32_t id, std::uint64_t& pairs, std::uint64_t& over, double& worst) {
      ++pairs;
      const auto d = try_frame_distance(g.center(g.unlinear(cell)), cs[id]);
      const double ratio = d ? *d / kSepEps : INFINITY;
      worst = std::max(worst, ratio);
      if (!(ratio <= k.alpha)) ++over;
    };
    for (std::size_t c = 0; c < idx.lists->cells.size(); ++c)
      for (std::uint32_t q = idx.lists->offsets[c]; q < idx.lists->offsets[c + 1]; ++q)
        audit(idx.lists->cells[c], idx.lists->ids[q], run.naive_pairs, run.naive_over, run.naive_alpha);
    for (const auto& [cell, id] : pd.counted) audit(cell, id, run.pd_pairs, run.pd_over, run.pd_alpha);
  }
  run.seconds = seconds_since(t0);
  run.done = true;
  return run;
}

Outcome criterion1() {
  const SeparatedRun& r = separated();
  Outcome o;
  o.pass = r.naive_low == 0 && r.pd_low == 0 && r.exact_mismatch == 0 && r.seconds < 120;
  o.detail = fmt("%llu vertices over %d scenes; naive below oracle %llu, primal-dual below oracle %llu, "
                 "exact != oracle %llu; %.1fs (limit 120s)",
                 (unsigned long long)r.vertices, kSepScenes, (unsigned long long)r.naive_low,
                 (unsigned long long)r.pd_low, (unsigned long long)r.exact_mismatch, r.seconds);
  return o;
}

Outcome criterion2() {
  const SeparatedRun& r = separated();
  const AnalyticConstants k;
  Outcome o;
  o.pass = r.naive_over == 0 && r.pd_over == 0;
  o.detail = fmt("bound alpha=%.3g; naive max fd/eps %.3f over %llu pairs (%llu beyond); "
                 "primal-dual max fd/eps %.3f over %llu pairs (%llu beyond)",
                 k.alpha, r.naive_alpha, (unsigned long long)r.naive_pairs, (unsigned long long)r.naive_over,
                 r.pd_alpha, (unsigned long long)r.pd_pairs, (unsigned long long)r.pd_over);
  return o;
}

bool recovered(const Pose& got, const Pose& truth) {
  return std::abs(got.x - truth.x) <= 0.05 && std::abs(got.y - truth.y) <= 0.05 && std::abs(got.z - truth.z) <= 0.05 &&
         std::abs(got.kappa - truth.kappa) <= 0.1;
}

Outcome criterion3() {
  const std::size_t ns[] = {8000, 12000, 24000, 32000};
  const Method methods[] = {Method::Naive, Method::PrimalDual, Method::Canonical};
  Outcome o;
  o.pass = true;
  for (std::size_t n : ns) {
    std::map<Method, int> ok;
    std::map<Method, std::vector<double>> secs;
    for (int seed = 1; seed <= 10; ++seed) {
      SceneConfig sc;
      sc.n = n;
      sc.inlier_ratio = 0.1;
      sc.noise_sigma = 0.02;
      sc.seed = std::uint64_t(seed);
      const Scene scene = generate_scene(sc);
      for (Method m : methods) {
        SolveOptions so;
        so.method = m;
        so.epsilon = 0.03;
        so.early_exit = true;
        const auto t0 = Clock::now();
        const IncidenceResult r = solve(scene.correspondences, so);
        secs[m].push_back(seconds_since(t0));
        if (recovered(r.candidates.front().pose, scene.true_pose)) ++ok[m];
      }
    }
    std::string line = fmt("n=%zu:", n);
    for (Method m : methods) {
      line += fmt(" %s %d/10 (median %.2fs)", method_name(m).c_str(), ok[m], median(secs[m]));
      if (ok[m] < 8) o.pass = false;
    }
    o.detail += (o.detail.empty() ? "" : "; ") + line;
  }
  return o;
}

double leaf_side(int depth) { return std::ldexp(1.0, -depth); }

Outcome criterion4() {
  Outcome o;
  o.pass = true;
  const double eps = std::ldexp(1.0, -5);
  for (int d : {2, 3}) {
    gen::Rng r(std::uint64_t(400 + d));
    std::vector<Hyperplane> hs;
    std::vector<SurfaceParams> params;
    while (hs.size() < 500) {
      Hyperplane h;
      double nn = 0;
      for (int i = 0; i < d; ++i) {
        h.normal.push_back(r.uniform(-1, 1));
        nn += h.normal.back() * h.normal.back();
      }
      if (nn < 1e-6) continue;
      for (double& x : h.normal) x /= std::sqrt(nn);
      for (int i = 0; i < d; ++i) h.offset += h.normal[std::size_t(i)] * r.uniform();
      hs.push_back(h);
      params.push_back(hyperplane_params(h));
    }
    const HyperplaneFamily fam(d);
    const CanonicalOctree tree(fam, eps);
    OctreeOptions opt;
    opt.track_members = true;
    opt.collect_leaves = true;
    const OctreeResult res = tree.build(params, opt);
    std::map<std::array<std::int32_t, kMaxDim>, const LeafRecord*> by_index;
    for (const auto& leaf : res.leaves) by_index[leaf.index] = &leaf;

    const int per_axis = 1 << res.depth;
    const double side = leaf_side(res.depth), e = res.epsilon_effective;
    const double upper = (2 * std::sqrt(double(d)) + 1) * e;
    std::uint64_t missed = 0, too_far = 0, checked = 0;
    double worst = 0;
    std::int64_t cells = 1;
    for (int a = 0; a < d; ++a) cells *= per_axis;
    for (std::int64_t l = 0; l < cells; ++l) {
      std::array<std::int32_t, kMaxDim> idx{};
      std::vector<double> center(static_cast<std::size_t>(d));
      std::int64_t rest = l;
      for (int a = d - 1; a >= 0; --a) {
        idx[std::size_t(a)] = std::int32_t(rest % per_axis);
        rest /= per_axis;
        center[std::size_t(a)] = (idx[std::size_t(a)] + 0.5) * side;
      }
      const auto it = by_index.find(idx);
      const std::vector<std::uint32_t> none;
      const auto& members = it == by_index.end() ? none : it->second->members;
      for (std::uint32_t i = 0; i < hs.size(); ++i) {
        const double dist = hyperplane_distance(hs[i], center);
        const bool in = std::binary_search(members.begin(), members.end(), i);
        ++checked;
        if (dist <= e && !in) ++missed;
        if (in) {
          worst = std::max(worst, dist / e);
          if (dist > upper) ++too_far;
        }
      }
    }
    if (missed || too_far) o.pass = false;
    o.detail += fmt("%sd=%d eps=%g: %llu pairs, %llu within eps not counted, %llu counted beyond %.3f eps "
                    "(max counted %.3f eps)",
                    d == 2 ? "" : "; ", d, e, (unsigned long long)checked, (unsigned long long)missed,
                    (unsigned long long)too_far, upper / e, worst);
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  const AnalyticConstants k;
  // (a) naive runtime against 1/eps.
  SceneConfig sc;
  sc.n = 4000;
  sc.seed = 5;
  const Scene scene = generate_scene(sc);
  std::vector<double> inv, times;
  for (double eps : {0.08, 0.04, 0.02}) {
    std::vector<double> t;
    NaiveOptions no;
    no.parallel = false;
    (void)naive_count(scene.correspondences, eps, k, no);
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      (void)naive_count(scene.correspondences, eps, k, no);
      t.push_back(seconds_since(t0));
    }
    inv.push_back(1 / eps);
    times.push_back(median(t));
  }
  const double sa = slope(inv, times);

  // (b) sum of |S_tau| against 1/delta1.
  SceneConfig sb;
  sb.n = 2000;
  sb.seed = 6;
  const Scene sceneb = generate_scene(sb);
  std::vector<double> invd, sums;
  for (double d1 : {0.2, 0.1, 0.05}) {
    const auto lists = assign_primal(sceneb.correspondences, coarse_grid(d1, k), k);
    double total = 0;
    for (const auto& [cell, ids] : lists) total += double(ids.size());
    invd.push_back(1 / d1);
    sums.push_back(total);
  }
  const double sb_slope = slope(invd, sums);

  // (c) per-cell population against the lattice bound, hyperplanes in the plane.
  const HyperplaneFamily fam(2);
  gen::Rng r(55);
  std::vector<SurfaceParams> params;
  const std::size_t nh = 100000;
  while (params.size() < nh) {
    Hyperplane h;
    const double th = r.uniform(0, 2 * std::acos(-1.0));
    h.normal = {std::cos(th), std::sin(th)};
    h.offset = h.normal[0] * r.uniform() + h.normal[1] * r.uniform();
    params.push_back(hyperplane_params(h));
  }
  std::vector<double> cs;
  std::string levels;
  for (int j : {5, 6}) {
    const CanonicalOctree tree(fam, std::ldexp(1.0, -j));
    OctreeOptions opt;
    const OctreeResult res = tree.build(params, opt);
    const int expo = fam.ell() + fam.d() - fam.k();
    double c = 0;
    for (std::size_t lv = 0; lv < res.levels.size(); ++lv) {
      const double delta = std::ldexp(1.0, -int(lv));
      c = std::max(c, double(res.levels[lv].max_population) / std::pow(delta / res.eps_prime, expo));
    }
    cs.push_back(c);
    levels += fmt("%s eps=2^-%d C=%.4g", levels.empty() ? "" : ",", j, c);
  }
  const double ratio = std::max(cs[0], cs[1]) / std::min(cs[0], cs[1]);

  const bool pa = std::abs(sa - 2.0) <= 0.5, pb = std::abs(sb_slope - 2.0) <= 0.5, pc = ratio <= 2.0;
  o.pass = pa && pb && pc;
  o.detail = fmt("(a) naive time slope %.3f [%s] (%.3fs, %.3fs, %.3fs); (b) sum|S_tau| slope %.3f [%s]; "
                 "(c)%s ratio %.3f [%s]",
                 sa, pa ? "ok" : "out of 2.0+-0.5", times[0], times[1], times[2], sb_slope,
                 pb ? "ok" : "out of 2.0+-0.5", levels.c_str(), ratio, pc ? "ok" : "beyond 2x");
  return o;
}

Outcome criterion6() {
  std::vector<BenchConfig> cfgs;
  for (Method m : {Method::Naive, Method::PrimalDual}) {
    BenchConfig c;
    c.method = m;
    c.n = 32768;
    c.epsilon = 0.02;
    c.seed = 1;
    cfgs.push_back(c);
  }
  BenchOptions bo;
  bo.repeats = 5;
  const auto recs = run_benchmark(cfgs, bo);
  Outcome o;
  o.pass = recs[0].ok && recs[1].ok && recs[1].median_seconds < recs[0].median_seconds;
  o.detail = fmt("n=32768 eps=0.02, 5 repetitions: naive median %.3fs, primal-dual median %.3fs", recs[0].median_seconds,
                 recs[1].median_seconds);
  return o;
}

// Normalized dependent values (z, u) of the original surface over (x, y); empty off the
// admissible region used for the canonization bounds.
std::optional<std::array<double, 2>> admissible(const Correspondence& c, double x, double y,
                                                const AnalyticConstants& k) {
  const auto s = try_surface_parametric(c, x, y);
  if (!s || std::abs(s->kappa) > 1 || s->z < 0 || s->z > 1) return std::nullopt;
  if (!check_conditions(Pose{x, y, s->z, s->kappa}, c, k)) return std::nullopt;
  return std::array<double, 2>{s->z, 0.5 * (s->kappa + 1)};
}

Outcome criterion7() {
  const AnalyticConstants k;
  const CameraFamily fam(k);
  const CanonicalOctree tree(fam, 0.03);
  const double eprime = tree.eps_prime(), e = tree.epsilon_effective();
  SceneConfig sc;
  sc.n = 1000;
  sc.inlier_ratio = 0.5;
  sc.noise_sigma = 0.01;
  sc.seed = 7;
  const Scene scene = generate_scene(sc);
  gen::Rng r(77);
  double worst_root = 0, worst_leaf = 0;
  std::uint64_t root_bad = 0, leaf_bad = 0, root_samples = 0, leaf_samples = 0, chains = 0, dropped = 0;
  const double root_bound = (fam.c1() + 1) * eprime, leaf_bound = 2 * e;
  auto deviation = [&](const RoundedSurface& rep, int level, const Correspondence& c, double x, double y,
                       const std::array<double, 2>& want) {
    const double xs[2] = {x, y};
    double got[2];
    tree.value(rep, level, xs, got);
    return std::max(std::abs(got[0] - want[0]), std::abs(got[1] - want[1]));
    (void)c;
  };
  for (const Correspondence& c : scene.correspondences) {
    const RoundedSurface root = tree.canonize_one(camera_params(c));
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) {
        const double x = i / 20.0, y = j / 20.0;
        const auto want = admissible(c, x, y, k);
        if (!want) continue;
        ++root_samples;
        const double dv = deviation(root, 0, c, x, y, *want);
        worst_root = std::max(worst_root, dv);
        if (dv > root_bound) ++root_bad;
      }
    // Follow one admissible point of the surface down to its leaf, dropping the chain
    // where the octree would.
    std::optional<std::array<double, 2>> p;
    double px = 0, py = 0;
    for (int tries = 0; tries < 200 && !p; ++tries) {
      px = r.uniform();
      py = r.uniform();
      p = admissible(c, px, py, k);
    }
    if (!p) continue;
    const double point[4] = {px, py, (*p)[0], (*p)[1]};
    RoundedSurface cur = root;
    bool alive = true;
    double corner[4] = {};
    for (int level = 0; level < tree.depth() && alive; ++level) {
      const double side = std::ldexp(1.0, -(level + 1));
      for (int a = 0; a < 4; ++a) corner[a] = std::min(std::floor(point[a] / side), 1 / side - 1) * side;
      RoundedSurface next;
      alive = tree.reround(cur, level, corner, level + 1, next) && tree.crosses(next, level + 1, corner);
      cur = std::move(next);
    }
    if (!alive) {
      ++dropped;
      continue;
    }
    ++chains;
    const double side = std::ldexp(1.0, -tree.depth());
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; j <= 4; ++j) {
        const double x = corner[0] + side * i / 4.0, y = corner[1] + side * j / 4.0;
        const auto want = admissible(c, x, y, k);
        if (!want) continue;
        ++leaf_samples;
        const double dv = deviation(cur, tree.depth(), c, x, y, *want);
        worst_leaf = std::max(worst_leaf, dv);
        if (dv > leaf_bound) ++leaf_bad;
      }
  }
  Outcome o;
  o.pass = root_bad == 0 && leaf_bad == 0 && root_samples > 0 && leaf_samples > 0;
  o.detail = fmt("root: max deviation %.3g eps' over %llu samples, %llu beyond (c1+1) eps' = %.3g eps'; "
                 "leaf: max %.3g eps over %llu samples on %llu chains (%llu dropped by the crossing test), %llu beyond 2 eps",
                 worst_root / eprime, (unsigned long long)root_samples, (unsigned long long)root_bad, fam.c1() + 1,
                 worst_leaf / e, (unsigned long long)leaf_samples, (unsigned long long)chains,
                 (unsigned long long)dropped, (unsigned long long)leaf_bad);
  return o;
}

std::string run_document(Method m, std::uint64_t seed) {
  SceneConfig sc;
  sc.n = 8000;
  sc.seed = seed;
  const Scene scene = generate_scene(sc);
  RunConfig cfg;
  cfg.method = m;
  cfg.epsilon = 0.03;
  cfg.seed = seed;
  cfg.early_exit = true;
  cfg.top_k = 3;
  SolveOptions so;
  so.method = m;
  so.epsilon = cfg.epsilon;
  so.top_k = cfg.top_k;
  so.early_exit = cfg.early_exit;
  RunInfo info;
  info.n_input = scene.correspondences.size();
  const auto t0 = Clock::now();
  const IncidenceResult r = solve(scene.correspondences, so);
  info.wall_seconds = seconds_since(t0);
  std::ostringstream scene_text;
  write_correspondences(scene_text, scene.correspondences);
  return scene_text.str() + format_result(r, cfg, info);
}

Outcome criterion8() {
  Outcome o;
  o.pass = true;
  for (Method m : {Method::Naive, Method::PrimalDual, Method::Canonical}) {
    const std::string a = strip_timing(run_document(m, 3)), b = strip_timing(run_document(m, 3));
    const bool same = a == b;
    o.pass = o.pass && same;
    o.detail += fmt("%s%s %s (%zu bytes)", o.detail.empty() ? "" : ", ", method_name(m).c_str(),
                    same ? "identical" : "DIFFERENT", a.size());
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (int c = 1; c <= int(criteria.size()); ++c) {
    if (!pick.empty() && !pick.count(c)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[std::size_t(c - 1)]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d: %s  %s  [%.1fs]\n", c, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed ? 1 : 0;
}
