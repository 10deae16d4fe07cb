#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "incpose/grid.hpp"
#include "incpose/result.hpp"
#include "incpose/surface_ranges.hpp"

namespace incpose {

enum class Regime { PrimalOnly, Balanced, DualOnly };

const char* regime_name(Regime r);

struct RegimeParams {
  double delta1 = 0;  // coarse primal scale
  double delta2 = 0;  // scene-coordinate cell size of the dual grid
  Regime regime = Regime::Balanced;
  double gamma = 1;
  double epsilon = 0;
  std::int64_t m = 0;  // fine vertices
};

// delta1 = (eps^3 n / m)^(1/5) and delta2 = eps / (2 gamma delta1) in the balanced band
// eps^2 m <= n <= m / eps^3. Below it only the primal grid is used; above it one coarse
// cell covers the domain.
RegimeParams choose_regime(std::size_t n, double epsilon, double gamma, std::int64_t m);

// Coarse grid whose cells are exact blocks of `ratio` fine cells.
struct NestedGrid {
  GridSpec coarse;
  std::array<std::int32_t, 4> ratio{};
};

// Per-axis ratios round delta1 / eps, delta1 / (2 eps), delta1 / (2 eps) to integers >= 1.
NestedGrid nest_coarse_grid(const GridSpec& fine, double delta1);

// Coarse grid with cells delta1 x delta1 x sqrt(2) delta1 x c_grid delta1, not nested.
GridSpec coarse_grid(double delta1, const AnalyticConstants& k);

// Coarse (z, kappa) cells of column (i, j) met by each surface, dilated by the 3x3
// (z, kappa) neighbourhood. lists[zi * nk + ki] receives surface ids in ascending order.
void assign_column(std::span<const SurfaceGeom> surfaces, const GridSpec& coarse,
                   const ColumnTolerance& tol, std::int32_t i, std::int32_t j,
                   std::vector<std::vector<std::uint32_t>>& lists, ColumnStats& stats);

// S_tau for every nonempty coarse cell, keyed by linear index. Memory grows with
// n / delta1^2; meant for inspection and tests.
std::map<std::int64_t, std::vector<std::uint32_t>> assign_primal(
    std::span<const Correspondence> surfaces, const GridSpec& coarse, const AnalyticConstants& k);

struct DualPoint {
  double w1 = 0, w2 = 0, w3 = 0;
  double xi_tau = 0, eta_tau = 0;
};

// Empty when F or G is undefined at the cell center.
std::optional<DualPoint> dualize(const Correspondence& c, const Pose& tau_center);

// Enclosure of F(v;w) - F(c;w) and G(v;w) - G(c;w) over a box of scene points.
struct ResidualEnclosure {
  bool bounded = false;
  Interval xi, eta;
};

ResidualEnclosure enclose_dual_surface(const Pose& v, const Pose& c, const Interval w[3]);

struct DualCountStats {
  std::uint64_t dual_points = 0;
  std::uint64_t dropped_degenerate = 0;
  std::uint64_t residual_overflow = 0;  // |residual| > gamma * delta1
  std::uint64_t buckets = 0;
  std::uint64_t bucket_visits = 0;
  std::uint64_t enclosures = 0;
  std::uint64_t point_evaluations = 0;
};

struct DualCellResult {
  std::vector<std::uint32_t> counts;                              // parallel to V_tau
  std::vector<std::pair<std::uint32_t, std::uint32_t>> counted;  // (index into V_tau, surface id)
};

// Counts, for every fine vertex of V_tau, the dual points of S_tau that land in dual
// cells met by the vertex's dual surface or their 3x3 residual neighbours.
DualCellResult dual_count(const Pose& tau_center, std::span<const Correspondence> surfaces,
                          std::span<const std::uint32_t> s_tau, std::span<const Pose> v_tau,
                          const RegimeParams& params, bool audit, DualCountStats& stats);

// Pilot estimate of gamma: 99th percentile of max(|xi_tau|, |eta_tau|) / delta1 over
// about 1% of the (surface, crossed cell) pairs, clamped to [0.5, 4].
double estimate_gamma(std::span<const Correspondence> surfaces, const NestedGrid& grid,
                      const AnalyticConstants& k);

struct PrimalDualOptions {
  bool early_exit = false;
  bool parallel = true;
  std::size_t top_k = 1;
  bool keep_vertex_counts = false;  // dense per-fine-vertex counts
  bool audit = false;               // record every counted (vertex, surface) pair
};

struct PrimalDualRun {
  IncidenceResult result;
  RegimeParams params;
  GridSpec fine;
  NestedGrid nested;
  std::optional<IncidenceHistogram> vertex_counts;
  std::vector<std::pair<std::int64_t, std::uint32_t>> counted;  // (fine cell, surface id)
};

PrimalDualRun primal_dual_run(std::span<const Correspondence> surfaces, double epsilon,
                              const AnalyticConstants& k, const PrimalDualOptions& opt = {});

IncidenceResult primal_dual_solve(std::span<const Correspondence> surfaces, double epsilon,
                                  const AnalyticConstants& k, const PrimalDualOptions& opt = {});

}  // namespace incpose
