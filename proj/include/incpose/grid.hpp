#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "incpose/geometry.hpp"
#include "incpose/interval.hpp"

namespace incpose {

using CellIndex = std::array<std::int32_t, 4>;

// Half-open axis-aligned grid: cell i on axis a covers
// [origin[a] + i*cell[a], origin[a] + (i+1)*cell[a]).
struct GridSpec {
  std::array<double, 4> origin{};
  std::array<double, 4> cell{};
  std::array<std::int32_t, 4> counts{};

  std::int64_t size() const {
    return std::int64_t(counts[0]) * counts[1] * counts[2] * counts[3];
  }
  std::int64_t linear(const CellIndex& c) const {
    return ((std::int64_t(c[0]) * counts[1] + c[1]) * counts[2] + c[2]) * counts[3] + c[3];
  }
  CellIndex unlinear(std::int64_t l) const;
  Pose center(const CellIndex& c) const;
  // Cell holding p, or empty when p lies outside the grid.
  std::optional<CellIndex> locate(const Pose& p) const;
  // Range of cell indices on `axis` whose cells meet the closed interval; lo > hi when none.
  std::pair<std::int32_t, std::int32_t> span(int axis, Interval v) const;
  bool operator==(const GridSpec&) const = default;
};

// Grid over [0,1]^3 x [-1,1] with cells eps x eps x 2 sqrt(2) eps x 2 c_grid eps.
GridSpec build_grid(double epsilon, const AnalyticConstants& k);

// Per-cell counts, dense or hashed depending on expected occupancy.
class IncidenceHistogram {
 public:
  IncidenceHistogram() = default;
  IncidenceHistogram(const GridSpec& g, bool dense);

  // Picks sparse storage when the expected share of occupied cells is under 10%.
  static bool prefer_dense(const GridSpec& g, std::size_t n_surfaces);

  const GridSpec& grid() const { return grid_; }
  bool dense() const { return dense_; }

  void add(std::int64_t cell, std::uint32_t by = 1);
  std::uint32_t at(std::int64_t cell) const;
  std::uint32_t at(const CellIndex& c) const { return at(grid_.linear(c)); }
  void merge(const IncidenceHistogram& other);

  std::uint64_t total() const;
  std::uint64_t nonzero() const;
  // Visits (linear index, count) for nonzero cells in increasing linear order.
  template <class F>
  void for_each_nonzero(F&& f) const;

  bool operator==(const IncidenceHistogram& o) const;

 private:
  GridSpec grid_;
  bool dense_ = true;
  std::vector<std::uint32_t> dense_counts_;
  std::unordered_map<std::int64_t, std::uint32_t> sparse_counts_;
};

struct Candidate {
  Pose pose;
  std::uint64_t count = 0;
  CellIndex cell{};
};

// Highest counts first; ties go to the lexicographically smaller cell.
std::vector<Candidate> top_cells(const IncidenceHistogram& h, std::size_t k);
// Throws EmptyHistogram when every count is zero.
Candidate best_vertex(const IncidenceHistogram& h);

template <class F>
void IncidenceHistogram::for_each_nonzero(F&& f) const {
  if (dense_) {
    for (std::size_t i = 0; i < dense_counts_.size(); ++i)
      if (dense_counts_[i]) f(std::int64_t(i), dense_counts_[i]);
    return;
  }
  std::vector<std::pair<std::int64_t, std::uint32_t>> items(sparse_counts_.begin(),
                                                            sparse_counts_.end());
  std::sort(items.begin(), items.end());
  for (const auto& [cell, n] : items)
    if (n) f(cell, n);
}

}  // namespace incpose
