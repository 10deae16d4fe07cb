#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "incpose/grid.hpp"
#include "incpose/result.hpp"
#include "incpose/surface_ranges.hpp"

namespace incpose {

// Surface ids per cell in compressed rows, cells sorted by linear index.
struct CellLists {
  std::vector<std::int64_t> cells;
  std::vector<std::uint32_t> offsets;  // cells.size() + 1 entries
  std::vector<std::uint32_t> ids;

  std::span<const std::uint32_t> at(std::int64_t cell) const;
};

struct NaiveOptions {
  bool keep_lists = false;  // retain per-cell surface lists for exact counting
  bool parallel = true;
};

struct NaiveIndex {
  GridSpec grid;
  IncidenceHistogram hist;
  std::optional<CellLists> lists;
  ColumnStats stats;
};

// Column tolerance used for grid g: split to one cell, deep enough that dropped
// singular pieces provably violate the separation conditions.
ColumnTolerance column_tolerance(const GridSpec& g, const AnalyticConstants& k);

// Linear indices of the cells of g met by the surface of c, sorted ascending.
std::vector<std::int64_t> cells_crossed(const Correspondence& c, const GridSpec& g,
                                        const AnalyticConstants& k, ColumnStats* stats = nullptr);

NaiveIndex naive_count(std::span<const Correspondence> surfaces, double epsilon,
                       const AnalyticConstants& k, const NaiveOptions& opt = {});

// Single-threaded reference of naive_count; results must match exactly.
NaiveIndex naive_count_serial(std::span<const Correspondence> surfaces, double epsilon,
                              const AnalyticConstants& k, bool keep_lists = false);

// Surfaces in v's cell list whose frame distance to v is at most epsilon.
std::uint64_t exact_count_at(const Pose& v, std::span<const Correspondence> surfaces,
                             double epsilon, const NaiveIndex& index);

struct OracleCount {
  std::uint64_t count = 0;
  std::uint64_t degenerate = 0;
};

// Linear scan. With `conditions` set, pairs failing them at v are not counted.
OracleCount oracle_count(const Pose& v, std::span<const Correspondence> surfaces, double epsilon,
                         const AnalyticConstants* conditions = nullptr);

IncidenceResult naive_solve(std::span<const Correspondence> surfaces, double epsilon,
                            const AnalyticConstants& k, std::size_t top_k,
                            const NaiveOptions& opt = {});

// Brute force over every vertex of the naive grid; for small inputs.
IncidenceResult oracle_solve(std::span<const Correspondence> surfaces, double epsilon,
                             const AnalyticConstants& k, std::size_t top_k);

}  // namespace incpose
