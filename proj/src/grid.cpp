#include "incpose/grid.hpp"

#include <algorithm>
#include <cmath>

namespace incpose {

CellIndex GridSpec::unlinear(std::int64_t l) const {
  CellIndex c{};
  for (int a = 3; a >= 0; --a) {
    c[a] = std::int32_t(l % counts[a]);
    l /= counts[a];
  }
  return c;
}

Pose GridSpec::center(const CellIndex& c) const {
  double v[4];
  for (int a = 0; a < 4; ++a) v[a] = origin[a] + (c[a] + 0.5) * cell[a];
  return {v[0], v[1], v[2], v[3]};
}

std::optional<CellIndex> GridSpec::locate(const Pose& p) const {
  CellIndex c{};
  for (int a = 0; a < 4; ++a) {
    const double f = std::floor((p[a] - origin[a]) / cell[a]);
    if (f < 0 || f >= counts[a]) return std::nullopt;
    c[a] = std::int32_t(f);
  }
  return c;
}

std::pair<std::int32_t, std::int32_t> GridSpec::span(int axis, Interval v) const {
  const double lo = (v.lo - origin[axis]) / cell[axis];
  const double hi = (v.hi - origin[axis]) / cell[axis];
  if (!(hi >= 0) || !(lo < counts[axis])) return {1, 0};
  const auto first = std::int32_t(std::max(0.0, std::floor(lo)));
  const auto last = std::int32_t(std::min(double(counts[axis] - 1), std::floor(hi)));
  return {first, last};
}

GridSpec build_grid(double epsilon, const AnalyticConstants& k) {
  if (!(epsilon > 0) || !(epsilon < 1)) throw InvalidEpsilon("epsilon must lie in (0, 1)");
  GridSpec g;
  g.origin = {0.0, 0.0, 0.0, -1.0};
  g.cell = {epsilon, epsilon, 2 * std::sqrt(2.0) * epsilon, 2 * k.c_grid * epsilon};
  const double extent[4] = {1.0, 1.0, 1.0, 2.0};
  for (int a = 0; a < 4; ++a) {
    // Shave float noise so exact multiples do not gain an extra cell.
    const double q = extent[a] / g.cell[a];
    g.counts[a] = std::max<std::int32_t>(1, std::int32_t(std::ceil(q * (1 - 1e-12))));
  }
  return g;
}

IncidenceHistogram::IncidenceHistogram(const GridSpec& g, bool dense) : grid_(g), dense_(dense) {
  if (dense_) dense_counts_.assign(std::size_t(g.size()), 0);
}

bool IncidenceHistogram::prefer_dense(const GridSpec& g, std::size_t n_surfaces) {
  // A surface meets roughly a few (z, kappa) cells in each of the xy columns.
  const double per_surface = 3.0 * double(g.counts[0]) * g.counts[1];
  const double expected = std::min(double(g.size()), per_surface * double(n_surfaces));
  return expected >= 0.1 * double(g.size());
}

void IncidenceHistogram::add(std::int64_t cell, std::uint32_t by) {
  if (dense_)
    dense_counts_[std::size_t(cell)] += by;
  else
    sparse_counts_[cell] += by;
}

std::uint32_t IncidenceHistogram::at(std::int64_t cell) const {
  if (dense_) return dense_counts_[std::size_t(cell)];
  auto it = sparse_counts_.find(cell);
  return it == sparse_counts_.end() ? 0 : it->second;
}

void IncidenceHistogram::merge(const IncidenceHistogram& other) {
  other.for_each_nonzero([&](std::int64_t c, std::uint32_t n) { add(c, n); });
}

std::uint64_t IncidenceHistogram::total() const {
  std::uint64_t t = 0;
  for_each_nonzero([&](std::int64_t, std::uint32_t n) { t += n; });
  return t;
}

std::uint64_t IncidenceHistogram::nonzero() const {
  std::uint64_t t = 0;
  for_each_nonzero([&](std::int64_t, std::uint32_t) { ++t; });
  return t;
}

bool IncidenceHistogram::operator==(const IncidenceHistogram& o) const {
  if (!(grid_ == o.grid_)) return false;
  std::vector<std::pair<std::int64_t, std::uint32_t>> a, b;
  for_each_nonzero([&](std::int64_t c, std::uint32_t n) { a.emplace_back(c, n); });
  o.for_each_nonzero([&](std::int64_t c, std::uint32_t n) { b.emplace_back(c, n); });
  return a == b;
}

std::vector<Candidate> top_cells(const IncidenceHistogram& h, std::size_t k) {
  std::vector<std::pair<std::uint32_t, std::int64_t>> all;
  h.for_each_nonzero([&](std::int64_t c, std::uint32_t n) { all.emplace_back(n, c); });
  // Linear order is lexicographic order of CellIndex.
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + std::ptrdiff_t(k), all.end(), better);
  std::vector<Candidate> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const CellIndex c = h.grid().unlinear(all[i].second);
    out.push_back({h.grid().center(c), all[i].first, c});
  }
  return out;
}

Candidate best_vertex(const IncidenceHistogram& h) {
  auto top = top_cells(h, 1);
  if (top.empty()) throw EmptyHistogram("no cell has a positive count");
  return top.front();
}

}  // namespace incpose
