#include "incpose/primal_dual.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "incpose/naive.hpp"

namespace incpose {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::PrimalOnly: return "primal-only";
    case Regime::Balanced: return "balanced";
    case Regime::DualOnly: return "dual-only";
  }
  return "?";
}

RegimeParams choose_regime(std::size_t n, double epsilon, double gamma, std::int64_t m) {
  if (!(epsilon > 0) || !(epsilon < 1)) throw InvalidEpsilon("epsilon must lie in (0, 1)");
  if (!(gamma > 0)) throw InvalidConfig("gamma must be positive");
  RegimeParams p;
  p.epsilon = epsilon;
  p.gamma = gamma;
  p.m = m;
  const double nn = double(std::max<std::size_t>(n, 1)), mm = double(m);
  const double e2 = epsilon * epsilon, e3 = e2 * epsilon;
  if (nn < e2 * mm) {
    p.regime = Regime::PrimalOnly;
    p.delta1 = epsilon;
    p.delta2 = 1.0;
  } else if (nn > mm / e3) {
    p.regime = Regime::DualOnly;
    p.delta1 = 1.0;
    p.delta2 = epsilon / (2 * gamma);
  } else {
    p.regime = Regime::Balanced;
    p.delta1 = std::clamp(std::pow(e3 * nn / mm, 0.2), epsilon, 1.0);
    p.delta2 = std::clamp(epsilon / (2 * gamma * p.delta1), epsilon / (2 * gamma), 1.0);
  }
  return p;
}

NestedGrid nest_coarse_grid(const GridSpec& fine, double delta1) {
  const double eps = fine.cell[0];
  const double want[4] = {delta1 / eps, delta1 / eps, delta1 / (2 * eps), delta1 / (2 * eps)};
  NestedGrid out;
  out.coarse.origin = fine.origin;
  for (int a = 0; a < 4; ++a) {
    out.ratio[a] = std::clamp<std::int32_t>(std::int32_t(std::lround(want[a])), 1, fine.counts[a]);
    out.coarse.cell[a] = fine.cell[a] * out.ratio[a];
    out.coarse.counts[a] = (fine.counts[a] + out.ratio[a] - 1) / out.ratio[a];
  }
  return out;
}

GridSpec coarse_grid(double delta1, const AnalyticConstants& k) {
  if (!(delta1 > 0) || !(delta1 <= 1)) throw InvalidEpsilon("delta1 must lie in (0, 1]");
  GridSpec g;
  g.origin = {0.0, 0.0, 0.0, -1.0};
  g.cell = {delta1, delta1, std::sqrt(2.0) * delta1, k.c_grid * delta1};
  const double extent[4] = {1.0, 1.0, 1.0, 2.0};
  for (int a = 0; a < 4; ++a)
    g.counts[a] = std::max<std::int32_t>(1, std::int32_t(std::ceil(extent[a] / g.cell[a] * (1 - 1e-12))));
  return g;
}

namespace {

ColumnTolerance coarse_tolerance(const GridSpec& coarse, const AnalyticConstants& k) {
  ColumnTolerance tol;
  tol.z = coarse.cell[2];
  tol.kappa = coarse.cell[3];
  tol.a = k.a;
  // Membership in S_tau is dilated anyway; splitting deeper than soundness needs
  // barely shrinks it and costs more than the dual stage saves.
  tol.max_depth = column_depth_for(std::max(coarse.cell[0], coarse.cell[1]), k.a, k.image_bound);
  return tol;
}

// Calls f(id, zk) for each surface and each dilated (z, kappa) cell of column (i, j).
template <class F>
void visit_column(std::span<const SurfaceGeom> surfaces, const GridSpec& g,
                  const ColumnTolerance& tol, std::int32_t i, std::int32_t j, bool dilate,
                  ColumnStats& st, F&& f) {
  const std::int32_t nz = g.counts[2], nk = g.counts[3];
  const double x0 = g.origin[0] + i * g.cell[0], y0 = g.origin[1] + j * g.cell[1];
  const Rect rect{x0, x0 + g.cell[0], y0, y0 + g.cell[1]};
  std::vector<std::uint32_t> stamp(std::size_t(nz) * nk, 0);
  std::vector<std::int32_t> cells;
  for (std::size_t id = 0; id < surfaces.size(); ++id) {
    const auto mark = std::uint32_t(id + 1);
    cells.clear();
    column_boxes(
        surfaces[id], rect, tol,
        [&](const ColumnBox& b) {
          auto [z0, z1] = g.span(2, b.z);
          auto [k0, k1] = g.span(3, b.kappa);
          if (z0 > z1 || k0 > k1) return;
          if (dilate) {
            z0 = std::max(0, z0 - 1);
            z1 = std::min(nz - 1, z1 + 1);
            k0 = std::max(0, k0 - 1);
            k1 = std::min(nk - 1, k1 + 1);
          }
          for (std::int32_t z = z0; z <= z1; ++z)
            for (std::int32_t q = k0; q <= k1; ++q) {
              const std::int32_t zk = z * nk + q;
              if (stamp[std::size_t(zk)] != mark) {
                stamp[std::size_t(zk)] = mark;
                cells.push_back(zk);
              }
            }
        },
        st);
    for (std::int32_t zk : cells) f(std::uint32_t(id), zk);
  }
}

std::vector<SurfaceGeom> geoms_of(std::span<const Correspondence> surfaces) {
  std::vector<SurfaceGeom> g;
  g.reserve(surfaces.size());
  for (const auto& c : surfaces) g.emplace_back(c);
  return g;
}

void add(ColumnStats& a, const ColumnStats& b) {
  a.pieces += b.pieces;
  a.skipped_conditions += b.skipped_conditions;
  a.singular += b.singular;
}

void add(DualCountStats& a, const DualCountStats& b) {
  a.dual_points += b.dual_points;
  a.dropped_degenerate += b.dropped_degenerate;
  a.residual_overflow += b.residual_overflow;
  a.buckets += b.buckets;
  a.bucket_visits += b.bucket_visits;
  a.enclosures += b.enclosures;
  a.point_evaluations += b.point_evaluations;
}

std::int32_t residual_cell(double r, double eps) { return std::int32_t(std::floor(r / eps + 0.5)); }

Interval pad(Interval v) { return v.padded(1e-12 * (1 + v.mag())); }

}  // namespace

void assign_column(std::span<const SurfaceGeom> surfaces, const GridSpec& coarse,
                   const ColumnTolerance& tol, std::int32_t i, std::int32_t j,
                   std::vector<std::vector<std::uint32_t>>& lists, ColumnStats& stats) {
  lists.resize(std::size_t(coarse.counts[2]) * coarse.counts[3]);
  for (auto& l : lists) l.clear();
  visit_column(surfaces, coarse, tol, i, j, true, stats,
               [&](std::uint32_t id, std::int32_t zk) { lists[std::size_t(zk)].push_back(id); });
}

std::map<std::int64_t, std::vector<std::uint32_t>> assign_primal(
    std::span<const Correspondence> surfaces, const GridSpec& coarse, const AnalyticConstants& k) {
  const auto geoms = geoms_of(surfaces);
  const ColumnTolerance tol = coarse_tolerance(coarse, k);
  std::map<std::int64_t, std::vector<std::uint32_t>> out;
  std::vector<std::vector<std::uint32_t>> lists;
  ColumnStats st;
  for (std::int32_t i = 0; i < coarse.counts[0]; ++i)
    for (std::int32_t j = 0; j < coarse.counts[1]; ++j) {
      assign_column(geoms, coarse, tol, i, j, lists, st);
      for (std::size_t zk = 0; zk < lists.size(); ++zk) {
        if (lists[zk].empty()) continue;
        const std::int32_t z = std::int32_t(zk) / coarse.counts[3], q = std::int32_t(zk) % coarse.counts[3];
        out[coarse.linear({i, j, z, q})] = lists[zk];
      }
    }
  return out;
}

std::optional<DualPoint> dualize(const Correspondence& c, const Pose& tau_center) {
  const auto p = try_project(tau_center, c.w1, c.w2, c.w3);
  if (!p) return std::nullopt;
  return DualPoint{c.w1, c.w2, c.w3, c.xi - p->xi, c.eta - p->eta};
}

ResidualEnclosure enclose_dual_surface(const Pose& v, const Pose& c, const Interval w[3]) {
  ResidualEnclosure out;
  const double w0[3] = {w[0].mid(), w[1].mid(), w[2].mid()};
  const auto fv = try_project(v, w0[0], w0[1], w0[2]);
  const auto fc = try_project(c, w0[0], w0[1], w0[2]);
  if (!fv || !fc) return out;

  // Segment from c to v, boxed per coordinate.
  const Interval sx = Interval::hull(c.x, v.x), sy = Interval::hull(c.y, v.y);
  const Interval sz = Interval::hull(c.z, v.z), sk = Interval::hull(c.kappa, v.kappa);
  const double tx = v.x - c.x, ty = v.y - c.y, tz = v.z - c.z, tk = v.kappa - c.kappa;

  const Interval dx = w[0] - sx, dy = w[1] - sy, dz = w[2] - sz;
  const auto ang = vector_angle_range(dx, dy);
  if (!ang) return out;
  const auto tan_psi =
      tan_range(Interval{ang->lo - std::atan(sk.hi), ang->hi - std::atan(sk.lo)});
  if (!tan_psi) return out;
  const Interval r2 = sqr(dx) + sqr(dy);
  if (!(r2.lo > kDegeneracyThreshold)) return out;

  // F = tan(psi), psi = atan2(dy, dx) - atan(kappa).
  const Interval T = *tan_psi;
  const Interval S = Interval::point(1) + sqr(T);
  const Interval ir2 = recip(r2), ir4 = sqr(ir2);
  const Interval p_dx = -(dy * ir2), p_dy = dx * ir2;
  const Interval p_k = -recip(Interval::point(1) + sqr(sk));
  const Interval p_dxdx = 2.0 * (dx * dy * ir4);
  const Interval p_dydy = -p_dxdx;
  const Interval p_dxdy = (sqr(dy) - sqr(dx)) * ir4;
  const Interval TS2 = 2.0 * (T * S);
  const Interval f_dxdx = TS2 * sqr(p_dx) + S * p_dxdx;
  const Interval f_dydy = TS2 * sqr(p_dy) + S * p_dydy;
  const Interval f_dxdy = TS2 * (p_dx * p_dy) + S * p_dxdy;
  const Interval f_dxk = TS2 * (p_dx * p_k);
  const Interval f_dyk = TS2 * (p_dy * p_k);
  // d/dx = -d/d(dx); d/dw1 = d/d(dx).
  const Interval jf1 = -(tx * f_dxdx) - ty * f_dxdy + tk * f_dxk;
  const Interval jf2 = -(tx * f_dxdy) - ty * f_dydy + tk * f_dyk;

  // G = dz / r.
  Interval ir = recip(Interval{std::sqrt(r2.lo), std::sqrt(r2.hi)});
  const Interval ir3 = ir * sqr(ir), ir5 = ir3 * sqr(ir);
  const Interval g_dzdx = -(dx * ir3), g_dzdy = -(dy * ir3);
  const Interval g_dxdx = -(dz * ir3) + 3.0 * (dz * sqr(dx) * ir5);
  const Interval g_dydy = -(dz * ir3) + 3.0 * (dz * sqr(dy) * ir5);
  const Interval g_dxdy = 3.0 * (dz * dx * dy * ir5);
  const Interval jg1 = -(tx * g_dxdx + ty * g_dxdy + tz * g_dzdx);
  const Interval jg2 = -(tx * g_dxdy + ty * g_dydy + tz * g_dzdy);
  const Interval jg3 = -(tx * g_dzdx + ty * g_dzdy);

  const double h[3] = {0.5 * w[0].width(), 0.5 * w[1].width(), 0.5 * w[2].width()};
  const double rf = jf1.mag() * h[0] + jf2.mag() * h[1];
  const double rg = jg1.mag() * h[0] + jg2.mag() * h[1] + jg3.mag() * h[2];
  if (!std::isfinite(rf) || !std::isfinite(rg)) return out;
  const double df = fv->xi - fc->xi, dg = fv->eta - fc->eta;
  out.bounded = true;
  out.xi = pad(Interval{df - rf, df + rf});
  out.eta = pad(Interval{dg - rg, dg + rg});
  return out;
}

DualCellResult dual_count(const Pose& tau_center, std::span<const Correspondence> surfaces,
                          std::span<const std::uint32_t> s_tau, std::span<const Pose> v_tau,
                          const RegimeParams& params, bool audit, DualCountStats& stats) {
  DualCellResult out;
  out.counts.assign(v_tau.size(), 0);
  if (v_tau.empty() || s_tau.empty()) return out;
  const double eps = params.epsilon, d2 = params.delta2;
  const auto nw = std::max<std::int64_t>(1, std::int64_t(std::ceil(1.0 / d2 - 1e-12)));
  const double bound = params.gamma * params.delta1;

  struct Pt {
    std::int64_t key;
    std::int32_t ix, ie;
    std::uint32_t id;
    double fc, gc;  // F and G at the cell center
  };
  std::vector<Pt> pts;
  pts.reserve(s_tau.size());
  auto wcell = [&](double w) { return std::clamp<std::int64_t>(std::int64_t(std::floor(w / d2)), 0, nw - 1); };
  for (std::uint32_t id : s_tau) {
    const Correspondence& c = surfaces[id];
    const auto dp = dualize(c, tau_center);
    if (!dp) {
      ++stats.dropped_degenerate;
      continue;
    }
    ++stats.dual_points;
    if (std::max(std::abs(dp->xi_tau), std::abs(dp->eta_tau)) > bound) ++stats.residual_overflow;
    pts.push_back({(wcell(c.w1) * nw + wcell(c.w2)) * nw + wcell(c.w3), residual_cell(dp->xi_tau, eps),
                   residual_cell(dp->eta_tau, eps), id, c.xi - dp->xi_tau, c.eta - dp->eta_tau});
  }
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    return std::tie(a.key, a.ix, a.ie, a.id) < std::tie(b.key, b.ix, b.ie, b.id);
  });

  struct Bucket {
    std::size_t begin, end;
    Interval w[3];
  };
  std::vector<Bucket> buckets;
  for (std::size_t b = 0; b < pts.size();) {
    std::size_t e = b;
    Bucket bk{b, b, {}};
    const Correspondence& c0 = surfaces[pts[b].id];
    bk.w[0] = Interval::point(c0.w1);
    bk.w[1] = Interval::point(c0.w2);
    bk.w[2] = Interval::point(c0.w3);
    while (e < pts.size() && pts[e].key == pts[b].key) {
      const Correspondence& c = surfaces[pts[e].id];
      bk.w[0] = hull(bk.w[0], Interval::point(c.w1));
      bk.w[1] = hull(bk.w[1], Interval::point(c.w2));
      bk.w[2] = hull(bk.w[2], Interval::point(c.w3));
      ++e;
    }
    bk.end = e;
    buckets.push_back(bk);
    b = e;
  }
  stats.buckets += buckets.size();

  constexpr std::size_t kPointwise = 4;  // buckets this small are evaluated point by point
  for (std::size_t a = 0; a < v_tau.size(); ++a) {
    const Pose& v = v_tau[a];
    std::uint32_t count = 0;
    auto take = [&](const Pt& p) {
      ++count;
      if (audit) out.counted.emplace_back(std::uint32_t(a), p.id);
    };
    auto pointwise = [&](const Bucket& bk) {
      for (std::size_t q = bk.begin; q < bk.end; ++q) {
        const Pt& p = pts[q];
        const Correspondence& c = surfaces[p.id];
        ++stats.point_evaluations;
        const auto fv = try_project(v, c.w1, c.w2, c.w3);
        if (!fv) continue;
        const std::int32_t ix = residual_cell(fv->xi - p.fc, eps);
        const std::int32_t ie = residual_cell(fv->eta - p.gc, eps);
        if (std::abs(ix - p.ix) <= 1 && std::abs(ie - p.ie) <= 1) take(p);
      }
    };
    for (const Bucket& bk : buckets) {
      ++stats.bucket_visits;
      if (bk.end - bk.begin <= kPointwise) {
        pointwise(bk);
        continue;
      }
      ++stats.enclosures;
      const ResidualEnclosure enc = enclose_dual_surface(v, tau_center, bk.w);
      if (!enc.bounded) {
        pointwise(bk);
        continue;
      }
      const std::int32_t x0 = residual_cell(enc.xi.lo, eps) - 1, x1 = residual_cell(enc.xi.hi, eps) + 1;
      const std::int32_t e0 = residual_cell(enc.eta.lo, eps) - 1, e1 = residual_cell(enc.eta.hi, eps) + 1;
      for (std::size_t q = bk.begin; q < bk.end; ++q) {
        const Pt& p = pts[q];
        if (p.ix >= x0 && p.ix <= x1 && p.ie >= e0 && p.ie <= e1) take(p);
      }
    }
    out.counts[a] = count;
  }
  return out;
}

double estimate_gamma(std::span<const Correspondence> surfaces, const NestedGrid& grid,
                      const AnalyticConstants& k) {
  const GridSpec& g = grid.coarse;
  const double delta1 = g.cell[0];
  const std::size_t stride = std::max<std::size_t>(1, std::min<std::size_t>(100, surfaces.size() / 20));
  const ColumnTolerance tol = coarse_tolerance(g, k);
  std::vector<double> ratios;
  ColumnStats st;
  for (std::size_t id = 0; id < surfaces.size(); id += stride) {
    const SurfaceGeom s(surfaces[id]);
    const SurfaceGeom one[1] = {s};
    for (std::int32_t i = 0; i < g.counts[0]; ++i)
      for (std::int32_t j = 0; j < g.counts[1]; ++j)
        visit_column(one, g, tol, i, j, false, st, [&](std::uint32_t, std::int32_t zk) {
          const Pose c = g.center({i, j, zk / g.counts[3], zk % g.counts[3]});
          if (const auto dp = dualize(s.c, c))
            ratios.push_back(std::max(std::abs(dp->xi_tau), std::abs(dp->eta_tau)) / delta1);
        });
  }
  if (ratios.empty()) return 1.0;
  const auto q = std::size_t(std::floor(0.99 * double(ratios.size() - 1)));
  std::nth_element(ratios.begin(), ratios.begin() + std::ptrdiff_t(q), ratios.end());
  return std::clamp(ratios[q], 0.5, 4.0);
}

namespace {

// Keeps the k best (count, fine cell) pairs; ties prefer the smaller cell.
struct TopK {
  std::size_t k;
  std::vector<std::pair<std::uint32_t, std::int64_t>> items;

  static bool better(const std::pair<std::uint32_t, std::int64_t>& a,
                     const std::pair<std::uint32_t, std::int64_t>& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  }
  void offer(std::uint32_t count, std::int64_t cell) {
    if (count == 0) return;
    std::pair<std::uint32_t, std::int64_t> p{count, cell};
    if (items.size() == k && !better(p, items.back())) return;
    items.insert(std::upper_bound(items.begin(), items.end(), p, better), p);
    if (items.size() > k) items.pop_back();
  }
  // Vertices with a count below this can no longer enter the list.
  std::uint32_t threshold() const { return items.size() < k ? 0 : items.back().first; }
};

IncidenceResult naive_delegate(std::span<const Correspondence> surfaces, double epsilon,
                               const AnalyticConstants& k, const PrimalDualOptions& opt,
                               PrimalDualRun& run) {
  NaiveOptions nopt;
  nopt.parallel = opt.parallel;
  nopt.keep_lists = opt.audit;
  NaiveIndex idx = naive_count(surfaces, epsilon, k, nopt);
  IncidenceResult r;
  r.candidates = top_cells(idx.hist, opt.top_k);
  if (opt.audit)
    for (std::size_t c = 0; c < idx.lists->cells.size(); ++c)
      for (std::uint32_t q = idx.lists->offsets[c]; q < idx.lists->offsets[c + 1]; ++q)
        run.counted.emplace_back(idx.lists->cells[c], idx.lists->ids[q]);
  r.diagnostics["column_pieces"] = double(idx.stats.pieces);
  r.diagnostics["condition_violations"] = double(idx.stats.skipped_conditions);
  if (opt.keep_vertex_counts) run.vertex_counts = std::move(idx.hist);
  return r;
}

}  // namespace

PrimalDualRun primal_dual_run(std::span<const Correspondence> surfaces, double epsilon,
                              const AnalyticConstants& k, const PrimalDualOptions& opt) {
  PrimalDualRun run;
  run.fine = build_grid(epsilon, k);
  const std::int64_t m = run.fine.size();
  run.params = choose_regime(surfaces.size(), epsilon, k.gamma > 0 ? k.gamma : 1.0, m);
  IncidenceResult& r = run.result;

  if (run.params.regime == Regime::PrimalOnly) {
    r = naive_delegate(surfaces, epsilon, k, opt, run);
    run.nested = nest_coarse_grid(run.fine, epsilon);
  } else {
    run.nested = nest_coarse_grid(run.fine, run.params.delta1);
    const GridSpec& coarse = run.nested.coarse;
    const double gamma = k.gamma > 0 ? k.gamma : estimate_gamma(surfaces, run.nested, k);
    run.params = choose_regime(surfaces.size(), epsilon, gamma, m);
    // Snap to the nested coarse size, keeping 2 gamma delta1 delta2 = eps.
    run.params.delta1 = coarse.cell[0];
    run.params.delta2 = std::clamp(epsilon / (2 * gamma * run.params.delta1), epsilon / (2 * gamma), 1.0);

    const auto geoms = geoms_of(surfaces);
    const ColumnTolerance tol = coarse_tolerance(coarse, k);
    const std::int32_t ni = coarse.counts[0], nj = coarse.counts[1];
    const std::size_t nzk = std::size_t(coarse.counts[2]) * coarse.counts[3];
    const std::int64_t ncols = std::int64_t(ni) * nj;

    // Pass 1: |S_tau| for every coarse cell.
    std::vector<std::uint32_t> ntau(std::size_t(coarse.size()), 0);
    ColumnStats pass1;
#pragma omp parallel if (opt.parallel)
    {
      ColumnStats st;
#pragma omp for schedule(dynamic, 1) nowait
      for (std::int64_t col = 0; col < ncols; ++col) {
        std::uint32_t* row = ntau.data() + std::size_t(col) * nzk;
        visit_column(geoms, coarse, tol, std::int32_t(col / nj), std::int32_t(col % nj), true, st,
                     [&](std::uint32_t, std::int32_t zk) { ++row[zk]; });
      }
#pragma omp critical(incpose_pd_stats)
      add(pass1, st);
    }
    const double sum_s = std::accumulate(ntau.begin(), ntau.end(), 0.0);

    // Columns by decreasing largest |S_tau| so early exit can prune the tail.
    std::vector<std::uint32_t> colmax(std::size_t(ncols), 0);
    for (std::int64_t col = 0; col < ncols; ++col)
      colmax[std::size_t(col)] = *std::max_element(ntau.begin() + col * std::int64_t(nzk),
                                                   ntau.begin() + (col + 1) * std::int64_t(nzk));
    std::vector<std::int64_t> order(static_cast<std::size_t>(ncols));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::int64_t a, std::int64_t b) { return colmax[std::size_t(a)] > colmax[std::size_t(b)]; });

    if (opt.keep_vertex_counts) run.vertex_counts = IncidenceHistogram(run.fine, true);
    TopK top{opt.top_k, {}};
    DualCountStats dstats;
    ColumnStats pass2;
    std::uint64_t processed = 0, pruned = 0;
    const auto& ratio = run.nested.ratio;

#pragma omp parallel if (opt.parallel)
    {
      std::vector<std::vector<std::uint32_t>> lists;
      std::vector<Pose> verts;
      std::vector<std::int64_t> vcells;
      std::vector<std::uint32_t> zk_order;
      DualCountStats ds;
      ColumnStats st;
      std::uint64_t local_processed = 0, local_pruned = 0;
#pragma omp for schedule(dynamic, 1) nowait
      for (std::int64_t oc = 0; oc < ncols; ++oc) {
        const std::int64_t col = order[std::size_t(oc)];
        const std::uint32_t* row = ntau.data() + std::size_t(col) * nzk;
        std::uint32_t thr;
#pragma omp critical(incpose_pd_top)
        thr = top.threshold();
        if (colmax[std::size_t(col)] == 0) continue;
        if (opt.early_exit && colmax[std::size_t(col)] < thr) {
          for (std::size_t zk = 0; zk < nzk; ++zk) local_pruned += row[zk] > 0;
          continue;
        }
        const auto ci = std::int32_t(col / nj), cj = std::int32_t(col % nj);
        assign_column(geoms, coarse, tol, ci, cj, lists, st);
        zk_order.resize(nzk);
        std::iota(zk_order.begin(), zk_order.end(), 0u);
        std::stable_sort(zk_order.begin(), zk_order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return row[a] > row[b]; });
        for (std::uint32_t zk : zk_order) {
          if (row[zk] == 0) break;
          if (opt.early_exit) {
#pragma omp critical(incpose_pd_top)
            thr = top.threshold();
            if (row[zk] < thr) {
              ++local_pruned;
              continue;
            }
          }
          ++local_processed;
          const CellIndex tau{ci, cj, std::int32_t(zk) / coarse.counts[3], std::int32_t(zk) % coarse.counts[3]};
          verts.clear();
          vcells.clear();
          CellIndex f{};
          const auto lim = [&](int a) { return std::min(run.fine.counts[a], (tau[a] + 1) * ratio[a]); };
          for (f[0] = tau[0] * ratio[0]; f[0] < lim(0); ++f[0])
            for (f[1] = tau[1] * ratio[1]; f[1] < lim(1); ++f[1])
              for (f[2] = tau[2] * ratio[2]; f[2] < lim(2); ++f[2])
                for (f[3] = tau[3] * ratio[3]; f[3] < lim(3); ++f[3]) {
                  verts.push_back(run.fine.center(f));
                  vcells.push_back(run.fine.linear(f));
                }
          const DualCellResult res =
              dual_count(coarse.center(tau), surfaces, lists[zk], verts, run.params, opt.audit, ds);
#pragma omp critical(incpose_pd_top)
          {
            for (std::size_t a = 0; a < verts.size(); ++a) {
              top.offer(res.counts[a], vcells[a]);
              if (run.vertex_counts && res.counts[a]) run.vertex_counts->add(vcells[a], res.counts[a]);
            }
            for (const auto& [a, id] : res.counted) run.counted.emplace_back(vcells[a], id);
          }
        }
      }
#pragma omp critical(incpose_pd_stats)
      {
        add(dstats, ds);
        add(pass2, st);
        processed += local_processed;
        pruned += local_pruned;
      }
    }
    if (opt.audit) std::sort(run.counted.begin(), run.counted.end());

    for (const auto& [count, cell] : top.items) {
      const CellIndex c = run.fine.unlinear(cell);
      r.candidates.push_back({run.fine.center(c), count, c});
    }
    r.diagnostics["coarse_cells"] = double(coarse.size());
    r.diagnostics["sum_s_tau"] = sum_s;
    r.diagnostics["tau_processed"] = double(processed);
    r.diagnostics["tau_pruned"] = double(pruned);
    r.diagnostics["column_pieces"] = double(pass1.pieces + pass2.pieces);
    r.diagnostics["condition_violations"] = double(pass1.skipped_conditions);
    r.diagnostics["dual_points"] = double(dstats.dual_points);
    r.diagnostics["dual_dropped_degenerate"] = double(dstats.dropped_degenerate);
    r.diagnostics["dual_residual_overflow"] = double(dstats.residual_overflow);
    r.diagnostics["dual_buckets"] = double(dstats.buckets);
    r.diagnostics["dual_bucket_visits"] = double(dstats.bucket_visits);
    r.diagnostics["dual_enclosures"] = double(dstats.enclosures);
    r.diagnostics["dual_point_evaluations"] = double(dstats.point_evaluations);
    r.diagnostics["ratio_xy"] = double(run.nested.ratio[0]);
    r.diagnostics["ratio_zk"] = double(run.nested.ratio[2]);
  }

  r.method = "primal-dual";
  r.epsilon_requested = r.epsilon_effective = epsilon;
  if (r.candidates.empty()) throw EmptyHistogram("no vertex received a count");
  r.diagnostics["regime"] = double(static_cast<int>(run.params.regime));
  r.diagnostics["delta1"] = run.params.delta1;
  r.diagnostics["delta2"] = run.params.delta2;
  r.diagnostics["gamma"] = run.params.gamma;
  r.diagnostics["fine_vertices"] = double(m);
  return run;
}

IncidenceResult primal_dual_solve(std::span<const Correspondence> surfaces, double epsilon,
                                  const AnalyticConstants& k, const PrimalDualOptions& opt) {
  return primal_dual_run(surfaces, epsilon, k, opt).result;
}

}  // namespace incpose
