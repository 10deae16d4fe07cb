#include "incpose/naive.hpp"

#include <omp.h>

#include <algorithm>

namespace incpose {

std::span<const std::uint32_t> CellLists::at(std::int64_t cell) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), cell);
  if (it == cells.end() || *it != cell) return {};
  const auto i = std::size_t(it - cells.begin());
  return {ids.data() + offsets[i], offsets[i + 1] - offsets[i]};
}

ColumnTolerance column_tolerance(const GridSpec& g, const AnalyticConstants& k) {
  ColumnTolerance tol;
  tol.z = g.cell[2];
  tol.kappa = g.cell[3];
  tol.a = k.a;
  tol.max_depth = std::max(2, column_depth_for(std::max(g.cell[0], g.cell[1]), k.a, k.image_bound));
  return tol;
}

namespace {

// Calls f(linear cell) for every cell met by the surface, each once, ascending.
template <class F>
void visit_crossed(const SurfaceGeom& s, const GridSpec& g, const ColumnTolerance& tol,
                   ColumnStats& st, std::vector<std::int64_t>& scratch, F&& f) {
  const std::int64_t nk = g.counts[3];
  for (std::int32_t i = 0; i < g.counts[0]; ++i) {
    const double x0 = g.origin[0] + i * g.cell[0];
    for (std::int32_t j = 0; j < g.counts[1]; ++j) {
      const double y0 = g.origin[1] + j * g.cell[1];
      scratch.clear();
      column_boxes(
          s, Rect{x0, x0 + g.cell[0], y0, y0 + g.cell[1]}, tol,
          [&](const ColumnBox& b) {
            const auto [z0, z1] = g.span(2, b.z);
            const auto [k0, k1] = g.span(3, b.kappa);
            for (std::int32_t z = z0; z <= z1; ++z)
              for (std::int32_t q = k0; q <= k1; ++q) scratch.push_back(z * nk + q);
          },
          st);
      if (scratch.empty()) continue;
      std::sort(scratch.begin(), scratch.end());
      scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
      const std::int64_t base = (std::int64_t(i) * g.counts[1] + j) * g.counts[2] * nk;
      for (std::int64_t zk : scratch) f(base + zk);
    }
  }
}

void add_stats(ColumnStats& a, const ColumnStats& b) {
  a.pieces += b.pieces;
  a.skipped_conditions += b.skipped_conditions;
  a.singular += b.singular;
}

CellLists build_lists(std::vector<std::pair<std::int64_t, std::uint32_t>>& pairs) {
  std::sort(pairs.begin(), pairs.end());
  CellLists out;
  out.ids.reserve(pairs.size());
  for (const auto& [cell, id] : pairs) {
    if (out.cells.empty() || out.cells.back() != cell) {
      out.cells.push_back(cell);
      out.offsets.push_back(std::uint32_t(out.ids.size()));
    }
    out.ids.push_back(id);
  }
  out.offsets.push_back(std::uint32_t(out.ids.size()));
  return out;
}

}  // namespace

std::vector<std::int64_t> cells_crossed(const Correspondence& c, const GridSpec& g,
                                        const AnalyticConstants& k, ColumnStats* stats) {
  ColumnStats st;
  std::vector<std::int64_t> scratch, out;
  visit_crossed(SurfaceGeom(c), g, column_tolerance(g, k), st, scratch,
                [&](std::int64_t cell) { out.push_back(cell); });
  if (stats) add_stats(*stats, st);
  return out;
}

NaiveIndex naive_count_serial(std::span<const Correspondence> surfaces, double epsilon,
                              const AnalyticConstants& k, bool keep_lists) {
  NaiveIndex idx;
  idx.grid = build_grid(epsilon, k);
  idx.hist = IncidenceHistogram(idx.grid, IncidenceHistogram::prefer_dense(idx.grid, surfaces.size()));
  const ColumnTolerance tol = column_tolerance(idx.grid, k);
  std::vector<std::int64_t> scratch;
  std::vector<std::pair<std::int64_t, std::uint32_t>> pairs;
  for (std::size_t id = 0; id < surfaces.size(); ++id) {
    visit_crossed(SurfaceGeom(surfaces[id]), idx.grid, tol, idx.stats, scratch,
                  [&](std::int64_t cell) {
                    idx.hist.add(cell);
                    if (keep_lists) pairs.emplace_back(cell, std::uint32_t(id));
                  });
  }
  if (keep_lists) idx.lists = build_lists(pairs);
  return idx;
}

NaiveIndex naive_count(std::span<const Correspondence> surfaces, double epsilon,
                       const AnalyticConstants& k, const NaiveOptions& opt) {
  if (!opt.parallel) return naive_count_serial(surfaces, epsilon, k, opt.keep_lists);
  NaiveIndex idx;
  idx.grid = build_grid(epsilon, k);
  const bool dense = IncidenceHistogram::prefer_dense(idx.grid, surfaces.size());
  idx.hist = IncidenceHistogram(idx.grid, dense);
  const ColumnTolerance tol = column_tolerance(idx.grid, k);
  const auto n = std::int64_t(surfaces.size());
  std::vector<std::pair<std::int64_t, std::uint32_t>> pairs;

#pragma omp parallel
  {
    IncidenceHistogram local(idx.grid, dense);
    ColumnStats st;
    std::vector<std::int64_t> scratch;
    std::vector<std::pair<std::int64_t, std::uint32_t>> local_pairs;
#pragma omp for schedule(dynamic, 16) nowait
    for (std::int64_t id = 0; id < n; ++id) {
      visit_crossed(SurfaceGeom(surfaces[std::size_t(id)]), idx.grid, tol, st, scratch,
                    [&](std::int64_t cell) {
                      local.add(cell);
                      if (opt.keep_lists) local_pairs.emplace_back(cell, std::uint32_t(id));
                    });
    }
#pragma omp critical(incpose_naive_merge)
    {
      idx.hist.merge(local);
      add_stats(idx.stats, st);
      pairs.insert(pairs.end(), local_pairs.begin(), local_pairs.end());
    }
  }
  if (opt.keep_lists) idx.lists = build_lists(pairs);
  return idx;
}

std::uint64_t exact_count_at(const Pose& v, std::span<const Correspondence> surfaces,
                             double epsilon, const NaiveIndex& index) {
  if (!index.lists) throw InvalidConfig("exact counting needs an index built with keep_lists");
  const auto cell = index.grid.locate(v);
  if (!cell) return 0;
  std::uint64_t n = 0;
  for (std::uint32_t id : index.lists->at(index.grid.linear(*cell))) {
    const auto d = try_frame_distance(v, surfaces[id]);
    if (d && *d <= epsilon) ++n;
  }
  return n;
}

OracleCount oracle_count(const Pose& v, std::span<const Correspondence> surfaces, double epsilon,
                         const AnalyticConstants* conditions) {
  OracleCount out;
  for (const auto& c : surfaces) {
    const auto d = try_frame_distance(v, c);
    if (!d) {
      ++out.degenerate;
      continue;
    }
    if (*d <= epsilon && (!conditions || check_conditions(v, c, *conditions))) ++out.count;
  }
  return out;
}

IncidenceResult naive_solve(std::span<const Correspondence> surfaces, double epsilon,
                            const AnalyticConstants& k, std::size_t top_k,
                            const NaiveOptions& opt) {
  const NaiveIndex idx = naive_count(surfaces, epsilon, k, opt);
  IncidenceResult r;
  r.method = "naive";
  r.epsilon_requested = r.epsilon_effective = epsilon;
  r.candidates = top_cells(idx.hist, top_k);
  if (r.candidates.empty()) throw EmptyHistogram("no surface crosses the grid");
  r.diagnostics["cells_total"] = double(idx.grid.size());
  r.diagnostics["cells_nonzero"] = double(idx.hist.nonzero());
  r.diagnostics["incidences_marked"] = double(idx.hist.total());
  r.diagnostics["column_pieces"] = double(idx.stats.pieces);
  r.diagnostics["condition_violations"] = double(idx.stats.skipped_conditions);
  r.diagnostics["singular_pieces"] = double(idx.stats.singular);
  r.diagnostics["histogram_dense"] = idx.hist.dense() ? 1 : 0;
  return r;
}

IncidenceResult oracle_solve(std::span<const Correspondence> surfaces, double epsilon,
                             const AnalyticConstants& k, std::size_t top_k) {
  const GridSpec g = build_grid(epsilon, k);
  IncidenceHistogram h(g, true);
  std::uint64_t degenerate = 0;
#pragma omp parallel for schedule(static) reduction(+ : degenerate)
  for (std::int64_t l = 0; l < g.size(); ++l) {
    const OracleCount c = oracle_count(g.center(g.unlinear(l)), surfaces, epsilon);
    degenerate += c.degenerate;
    // Each thread writes distinct cells of the dense array.
    if (c.count) h.add(l, std::uint32_t(c.count));
  }
  IncidenceResult r;
  r.method = "oracle";
  r.epsilon_requested = r.epsilon_effective = epsilon;
  r.candidates = top_cells(h, top_k);
  if (r.candidates.empty()) throw EmptyHistogram("no vertex has an incident surface");
  r.diagnostics["cells_total"] = double(g.size());
  r.diagnostics["degenerate_pairs"] = double(degenerate);
  return r;
}

}  // namespace incpose
