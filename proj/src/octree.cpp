#include "incpose/octree.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "incpose/errors.hpp"

namespace incpose {

double SurfaceFamily::eps_prime(double epsilon) const {
  return epsilon / (c2() * std::log2(1.0 / epsilon));
}

double snap_epsilon(double epsilon) {
  if (!(epsilon > 0)) throw InvalidEpsilon("epsilon must be positive");
  int j = 0;
  while (std::ldexp(1.0, -j) / 4 > epsilon) ++j;
  return std::ldexp(1.0, -j) / 4;
}

CanonicalOctree::CanonicalOctree(const SurfaceFamily& family, double epsilon)
    : fam_(family), eps_requested_(epsilon), ell_(family.ell()) {
  if (!(epsilon > 0) || !(epsilon < 1)) throw InvalidEpsilon("epsilon must lie in (0, 1)");
  eps_ = snap_epsilon(epsilon);
  eps_prime_ = fam_.eps_prime(eps_);
  depth_ = int(std::lround(-std::log2(4 * eps_)));
}

double CanonicalOctree::step_s(int level) const {
  return eps_prime_ / ((ell_ + 1) * std::ldexp(1.0, -level));
}

double CanonicalOctree::step_g() const { return eps_prime_ / (ell_ + 1); }

std::array<double, kMaxEll> CanonicalOctree::essential(const RoundedSurface& s, int level) const {
  std::array<double, kMaxEll> t{};
  const double st = step_s(level);
  for (int i = 0; i < ell_; ++i) t[i] = double(s.s[i]) * st;
  return t;
}

RoundedSurface CanonicalOctree::canonize_one(const SurfaceParams& p) const {
  constexpr double tol = 1e-12;
  RoundedSurface r;
  r.orientation = p.orientation;
  if (p.orientation >= fam_.orientations()) throw ParameterOutOfRange("orientation out of range");
  const double st = step_s(0), sg = step_g();
  for (int i = 0; i < ell_; ++i) {
    const Interval b = fam_.t_bounds(i);
    if (!(p.t[i] >= b.lo - tol && p.t[i] <= b.hi + tol))
      throw ParameterOutOfRange("essential parameter " + std::to_string(i) + " out of range");
    r.s[i] = std::llround(p.t[i] / st);
  }
  for (int j = 0; j < fam_.dependent(); ++j) {
    if (!fam_.genuine_free(j)) continue;
    const Interval b = fam_.f_bounds(j);
    if (!(p.f[j] >= b.lo - tol && p.f[j] <= b.hi + tol))
      throw ParameterOutOfRange("free parameter " + std::to_string(j) + " out of range");
    r.g[j] = std::llround(p.f[j] / sg);
    r.h[j] = double(r.g[j]) * sg;
  }
  return r;
}

namespace {

bool key_less(const RoundedSurface& a, const RoundedSurface& b) {
  if (a.orientation != b.orientation) return a.orientation < b.orientation;
  if (a.s != b.s) return a.s < b.s;
  return a.g < b.g;
}

bool key_equal(const RoundedSurface& a, const RoundedSurface& b) {
  return a.orientation == b.orientation && a.s == b.s && a.g == b.g;
}

// Sorts by lattice key and folds equal keys into one weighted surface.
void merge_equal(std::vector<RoundedSurface>& v) {
  std::stable_sort(v.begin(), v.end(), key_less);
  std::size_t out = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i + 1;
    RoundedSurface acc = std::move(v[i]);
    for (; j < v.size() && key_equal(acc, v[j]); ++j) {
      acc.weight += v[j].weight;
      acc.members.insert(acc.members.end(), v[j].members.begin(), v[j].members.end());
    }
    v[out++] = std::move(acc);
    i = j;
  }
  v.resize(out);
}

}  // namespace

std::vector<RoundedSurface> CanonicalOctree::canonize(std::span<const SurfaceParams> params,
                                                      bool track_members) const {
  std::vector<RoundedSurface> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back(canonize_one(params[i]));
    if (track_members) out.back().members = {std::uint32_t(i)};
  }
  merge_equal(out);
  return out;
}

void CanonicalOctree::value(const RoundedSurface& s, int level, const double* x, double* out) const {
  const auto t = essential(s, level);
  fam_.eval(x, t.data(), out);
  for (int j = 0; j < fam_.dependent(); ++j) out[j] += s.h[j];
}

bool CanonicalOctree::reround(const RoundedSurface& parent, int parent_level, const double* corner,
                              int child_level, RoundedSurface& out) const {
  const int k = fam_.k(), dep = fam_.dependent(), o = parent.orientation;
  double xc[kMaxDim], yc[kMaxDep], fv[kMaxDep], f2[kMaxDep];
  for (int i = 0; i < k; ++i) xc[i] = corner[fam_.axis(o, i)];
  for (int j = 0; j < dep; ++j) yc[j] = corner[fam_.axis(o, k + j)];

  // Step 1: height of the parent surface over the child's corner.
  const auto t = essential(parent, parent_level);
  fam_.eval(xc, t.data(), fv);
  out.orientation = parent.orientation;
  // Step 2: essential parameters onto the child lattice.
  const double st = step_s(child_level);
  for (int i = 0; i < ell_; ++i) out.s[i] = std::llround(t[i] / st);
  const auto t2 = essential(out, child_level);
  fam_.eval(xc, t2.data(), f2);
  // Step 3: free parameters onto the fixed free lattice.
  const double sg = step_g();
  for (int j = 0; j < dep; ++j) {
    const double fprime = fv[j] + parent.h[j] - yc[j];
    if (!std::isfinite(fprime) || !std::isfinite(f2[j]) || std::abs(fprime) > 1e6) return false;
    out.g[j] = std::llround(fprime / sg);
    out.h[j] = double(out.g[j]) * sg + yc[j] - f2[j];
  }
  out.weight = parent.weight;
  out.members = parent.members;
  return true;
}

namespace {

bool hits(const std::vector<DepBox>& boxes, const RoundedSurface& s, const Interval* dep_range, int dep) {
  for (const DepBox& b : boxes) {
    bool all = true;
    for (int j = 0; j < dep && all; ++j) all = (b.r[j] + s.h[j]).overlaps(dep_range[j]);
    if (all) return true;
  }
  return false;
}

}  // namespace

bool CanonicalOctree::crosses(const RoundedSurface& s, int level, const double* corner) const {
  const int k = fam_.k(), dep = fam_.dependent(), o = s.orientation;
  const double side = std::ldexp(1.0, -level);
  Interval xbox[kMaxDim], dr[kMaxDep];
  for (int i = 0; i < k; ++i) {
    const double lo = corner[fam_.axis(o, i)];
    xbox[i] = {lo, lo + side};
  }
  for (int j = 0; j < dep; ++j) {
    const double lo = corner[fam_.axis(o, k + j)];
    dr[j] = {lo, lo + side};
  }
  const auto t = essential(s, level);
  thread_local std::vector<DepBox> boxes;
  boxes.clear();
  fam_.cover(xbox, t.data(), boxes);
  return hits(boxes, s, dr, dep);
}

namespace {

struct LeafTop {
  std::size_t k;
  std::vector<LeafRecord> items;

  static bool better(const LeafRecord& a, const LeafRecord& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.index < b.index;
  }
  void offer(const LeafRecord& r) {
    if (items.size() == k && !better(r, items.back())) return;
    items.insert(std::upper_bound(items.begin(), items.end(), r, better), r);
    if (items.size() > k) items.pop_back();
  }
  std::uint64_t threshold() const { return items.size() < k ? 0 : items.back().weight; }
};

struct Builder {
  const CanonicalOctree& tree;
  const SurfaceFamily& fam;
  const OctreeOptions& opt;
  OctreeResult& res;
  LeafTop top;
  int task_depth;

  std::uint64_t threshold() {
    std::uint64_t t;
#pragma omp critical(incpose_octree_top)
    t = top.threshold();
    return t;
  }

  void leaf(const std::array<std::int32_t, kMaxDim>& idx, std::vector<RoundedSurface>& surfaces) {
    LeafRecord rec;
    rec.index = idx;
    const double side = std::ldexp(1.0, -tree.depth());
    for (int a = 0; a < fam.d(); ++a) rec.center[a] = (idx[a] + 0.5) * side;
    for (const auto& s : surfaces) {
      rec.weight += s.weight;
      rec.members.insert(rec.members.end(), s.members.begin(), s.members.end());
    }
    std::sort(rec.members.begin(), rec.members.end());
    if (rec.weight == 0) return;
#pragma omp critical(incpose_octree_top)
    {
      top.offer(rec);
      if (opt.collect_leaves) res.leaves.push_back(std::move(rec));
    }
  }

  void node(int level, const std::array<std::int32_t, kMaxDim>& idx, std::vector<RoundedSurface>& surfaces) {
#pragma omp critical(incpose_octree_stats)
    {
      LevelStats& ls = res.levels[std::size_t(level)];
      ++ls.nodes;
      ls.population += surfaces.size();
      ls.max_population = std::max<std::uint64_t>(ls.max_population, surfaces.size());
    }
    if (level == tree.depth()) {
      leaf(idx, surfaces);
      return;
    }
    const int d = fam.d(), k = fam.k(), dep = fam.dependent();
    const int nchild = 1 << d;
    const double side = std::ldexp(1.0, -(level + 1));
    std::vector<std::vector<RoundedSurface>> kids(static_cast<std::size_t>(nchild));
    for (auto& v : kids) v.reserve(surfaces.size() / 2);
    std::vector<DepBox> boxes;
    std::uint64_t dropped = 0;
    Interval xbox[kMaxDim], dr[kMaxDep];
    double corner[kMaxDim];

    for (const RoundedSurface& s : surfaces) {
      const int o = s.orientation;
      const auto t = tree.essential(s, level);
      for (int face = 0; face < (1 << k); ++face) {
        int bits[kMaxDim] = {};
        for (int i = 0; i < k; ++i) {
          const int ax = fam.axis(o, i);
          bits[ax] = (face >> i) & 1;
          const double lo = (2 * idx[std::size_t(ax)] + bits[ax]) * side;
          xbox[i] = {lo, lo + side};
        }
        boxes.clear();
        fam.cover(xbox, t.data(), boxes);
        for (int dc = 0; dc < (1 << dep); ++dc) {
          for (int j = 0; j < dep; ++j) {
            const int ax = fam.axis(o, k + j);
            bits[ax] = (dc >> j) & 1;
            const double lo = (2 * idx[std::size_t(ax)] + bits[ax]) * side;
            dr[j] = {lo, lo + side};
          }
          if (!hits(boxes, s, dr, dep)) continue;
          int child = 0;
          for (int a = 0; a < d; ++a) {
            child = (child << 1) | bits[a];
            corner[a] = (2 * idx[std::size_t(a)] + bits[a]) * side;
          }
          RoundedSurface r;
          if (!tree.reround(s, level, corner, level + 1, r) || !tree.crosses(r, level + 1, corner)) {
            ++dropped;
            continue;
          }
          kids[std::size_t(child)].push_back(std::move(r));
        }
      }
    }
    surfaces.clear();
    surfaces.shrink_to_fit();

    std::vector<std::pair<std::uint64_t, int>> order;
    for (int c = 0; c < nchild; ++c) {
      auto& v = kids[std::size_t(c)];
      if (v.empty()) continue;
      merge_equal(v);
      std::uint64_t w = 0;
      for (const auto& s : v) w += s.weight;
      order.emplace_back(w, c);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    std::uint64_t pruned = 0;
    for (const auto& [w, c] : order) {
      if (opt.early_exit && w < threshold()) {
        ++pruned;
        continue;
      }
      std::array<std::int32_t, kMaxDim> cidx{};
      for (int a = 0; a < d; ++a) cidx[std::size_t(a)] = 2 * idx[std::size_t(a)] + ((c >> (d - 1 - a)) & 1);
      auto* list = &kids[std::size_t(c)];
      if (level < task_depth) {
#pragma omp task firstprivate(cidx, list, level)
        node(level + 1, cidx, *list);
      } else {
        node(level + 1, cidx, *list);
      }
    }
#pragma omp taskwait
#pragma omp critical(incpose_octree_stats)
    {
      res.nodes_pruned += pruned;
      res.dropped_after_rounding += dropped;
    }
  }
};

}  // namespace

OctreeResult CanonicalOctree::build(std::span<const SurfaceParams> params, const OctreeOptions& opt) const {
  OctreeResult res;
  res.epsilon_requested = eps_requested_;
  res.epsilon_effective = eps_;
  res.eps_prime = eps_prime_;
  res.depth = depth_;
  res.levels.resize(std::size_t(depth_ + 1));
  std::vector<RoundedSurface> root = canonize(params, opt.track_members);
  for (const auto& s : root) res.root_weight += s.weight;

  Builder b{*this, fam_, opt, res, LeafTop{std::max<std::size_t>(1, opt.top_k), {}},
            opt.parallel ? 2 : -1};
  const std::array<std::int32_t, kMaxDim> origin{};
#pragma omp parallel if (opt.parallel)
#pragma omp single
  b.node(0, origin, root);

  res.top = std::move(b.top.items);
  std::sort(res.leaves.begin(), res.leaves.end(),
            [](const LeafRecord& x, const LeafRecord& y) { return x.index < y.index; });
  return res;
}

}  // namespace incpose
