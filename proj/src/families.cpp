#include "incpose/families.hpp"

#include <cmath>
#include <numeric>

#include "incpose/surface_ranges.hpp"

namespace incpose {

HyperplaneFamily::HyperplaneFamily(int d) : d_(d) {
  if (d < 2 || d > kMaxDim || d - 1 > kMaxEll) throw InvalidConfig("hyperplane dimension out of range");
}

int HyperplaneFamily::axis(int orientation, int local) const {
  if (local == d_ - 1) return orientation;
  return local < orientation ? local : local + 1;
}

double HyperplaneFamily::c1() const { return std::max(1.0, std::sqrt(double(d_ - 1))); }

void HyperplaneFamily::eval(const double* x, const double* t, double* out) const {
  double v = 0;
  for (int i = 0; i < d_ - 1; ++i) v += t[i] * x[i];
  out[0] = v;
}

void HyperplaneFamily::cover(const Interval* xbox, const double* t, std::vector<DepBox>& out) const {
  Interval v = Interval::point(0);
  for (int i = 0; i < d_ - 1; ++i) v = v + t[i] * xbox[i];
  DepBox b;
  b.r[0] = v.padded(1e-13);
  out.push_back(b);
}

SurfaceParams hyperplane_params(int dependent_axis, std::span<const double> a, double b, int d) {
  if (dependent_axis < 0 || dependent_axis >= d || int(a.size()) != d - 1)
    throw CoefficientOutOfRange("hyperplane shape mismatch");
  SurfaceParams p;
  p.orientation = std::uint8_t(dependent_axis);
  for (int i = 0; i < d - 1; ++i) {
    if (!(std::abs(a[std::size_t(i)]) <= 1.0)) throw CoefficientOutOfRange("|a_i| exceeds 1");
    p.t[std::size_t(i)] = a[std::size_t(i)];
  }
  if (!(std::abs(b) <= double(d))) throw CoefficientOutOfRange("|b| exceeds d");
  p.f[0] = b;
  return p;
}

SurfaceParams hyperplane_params(const Hyperplane& h) {
  const int d = int(h.normal.size());
  int dep = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(h.normal[std::size_t(i)]) > std::abs(h.normal[std::size_t(dep)])) dep = i;
  const double nd = h.normal[std::size_t(dep)];
  if (nd == 0) throw CoefficientOutOfRange("zero normal");
  std::vector<double> a;
  for (int i = 0; i < d; ++i)
    if (i != dep) a.push_back(-h.normal[std::size_t(i)] / nd);
  return hyperplane_params(dep, a, h.offset / nd, d);
}

double hyperplane_distance(const Hyperplane& h, std::span<const double> p) {
  double dot = 0, nn = 0;
  for (std::size_t i = 0; i < h.normal.size(); ++i) {
    dot += h.normal[i] * p[i];
    nn += h.normal[i] * h.normal[i];
  }
  return std::abs(dot - h.offset) / std::sqrt(nn);
}

Interval CameraFamily::t_bounds(int i) const {
  if (i < 2) return {0.0, 1.0};
  return {-k_.image_bound, k_.image_bound};
}

void CameraFamily::eval(const double* x, const double* t, double* out) const {
  const double dx = t[0] - x[0], dy = t[1] - x[1];
  out[0] = -t[3] * std::hypot(dx, dy);
  const double den = dx + t[2] * dy;
  out[1] = std::abs(den) < kDegeneracyThreshold ? std::nan("")
                                                 : 0.5 * ((dy - t[2] * dx) / den + 1.0);
}

void CameraFamily::cover(const Interval* xbox, const double* t, std::vector<DepBox>& out) const {
  const SurfaceGeom s(Correspondence{t[0], t[1], 0.0, t[2], t[3]});
  // One box per face: the node's own children refine it, and splitting here cost
  // more than the false positives it removed.
  ColumnTolerance tol;
  tol.max_depth = 0;
  tol.a = 0;
  ColumnStats st;
  column_boxes(
      s, Rect{xbox[0].lo, xbox[0].hi, xbox[1].lo, xbox[1].hi}, tol,
      [&](const ColumnBox& b) {
        DepBox d;
        d.r[0] = b.z;
        d.r[1] = b.kappa.bounded() ? Interval{0.5 * (b.kappa.lo + 1), 0.5 * (b.kappa.hi + 1)}
                                   : Interval::entire();
        out.push_back(d);
      },
      st);
}

SurfaceParams camera_params(const Correspondence& c) {
  SurfaceParams p;
  p.t = {c.w1, c.w2, c.xi, c.eta, 0, 0};
  p.f = {c.w3, 0, 0};
  return p;
}

Pose pose_from_normalized(const double* p) { return {p[0], p[1], p[2], 2 * p[3] - 1}; }

IncidenceResult canonical_solve(std::span<const Correspondence> surfaces, double epsilon,
                                const AnalyticConstants& k, const CanonicalOptions& opt) {
  const CameraFamily fam(k);
  const CanonicalOctree tree(fam, epsilon);
  std::vector<SurfaceParams> params;
  params.reserve(surfaces.size());
  for (const auto& c : surfaces) params.push_back(camera_params(c));
  OctreeOptions oo;
  oo.early_exit = opt.early_exit;
  oo.parallel = opt.parallel;
  oo.top_k = opt.top_k;
  const OctreeResult res = tree.build(params, oo);
  if (res.top.empty()) throw EmptyStructure("no leaf carries weight");

  IncidenceResult r;
  r.method = "canonical";
  r.epsilon_requested = epsilon;
  r.epsilon_effective = res.epsilon_effective;
  for (const LeafRecord& leaf : res.top) {
    Candidate c;
    c.pose = pose_from_normalized(leaf.center.data());
    c.count = leaf.weight;
    for (int a = 0; a < 4; ++a) c.cell[std::size_t(a)] = leaf.index[std::size_t(a)];
    r.candidates.push_back(c);
  }
  r.diagnostics["eps_prime"] = res.eps_prime;
  r.diagnostics["depth"] = res.depth;
  r.diagnostics["root_weight"] = double(res.root_weight);
  r.diagnostics["root_surfaces"] = double(res.levels.front().population);
  std::uint64_t nodes = 0, pop = 0;
  for (const auto& l : res.levels) {
    nodes += l.nodes;
    pop += l.population;
  }
  r.diagnostics["nodes_visited"] = double(nodes);
  r.diagnostics["surfaces_visited"] = double(pop);
  r.diagnostics["nodes_pruned"] = double(res.nodes_pruned);
  r.diagnostics["dropped_after_rounding"] = double(res.dropped_after_rounding);
  return r;
}

}  // namespace incpose
