#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "incpose/interval.hpp"

namespace incpose {

inline constexpr int kMaxDim = 6;
inline constexpr int kMaxEll = 6;
inline constexpr int kMaxDep = 3;

// One surface x_dep_j = F_j(x_indep; t) + f_j in local coordinates. The orientation
// selects how local coordinates map onto ambient axes.
struct SurfaceParams {
  std::uint8_t orientation = 0;
  std::array<double, kMaxEll> t{};
  std::array<double, kMaxDep> f{};
};

struct DepBox {
  std::array<Interval, kMaxDep> r{};
};

// A family of k-dimensional graphs in [0,1]^d with ell essential parameters.
class SurfaceFamily {
 public:
  virtual ~SurfaceFamily() = default;
  virtual int d() const = 0;
  virtual int k() const = 0;
  virtual int ell() const = 0;
  int dependent() const { return d() - k(); }
  virtual int orientations() const { return 1; }
  // Ambient axis of local coordinate `local` (independent ones first).
  virtual int axis(int orientation, int local) const {
    (void)orientation;
    return local;
  }
  // False for free parameters introduced only to complete the form (kept at 0 at the root).
  virtual bool genuine_free(int j) const = 0;
  virtual double c1() const = 0;
  virtual double c2() const = 0;
  virtual Interval t_bounds(int i) const = 0;
  virtual Interval f_bounds(int j) const = 0;
  // F_j(x; t) for j < dependent(); NaN where undefined.
  virtual void eval(const double* x, const double* t, double* out) const = 0;
  // Boxes whose union encloses {F(x; t) : x in xbox}. Unbounded entries are allowed.
  virtual void cover(const Interval* xbox, const double* t, std::vector<DepBox>& out) const = 0;
  // eps / (c2 log2(1/eps)).
  virtual double eps_prime(double epsilon) const;
};

// Canonical surface at some octree node. s and g are lattice indices; h is the
// offset with x_dep = F(x; s) + h, derived from (s, g) and the node corner.
struct RoundedSurface {
  std::uint8_t orientation = 0;
  std::array<std::int64_t, kMaxEll> s{};
  std::array<std::int64_t, kMaxDep> g{};
  std::array<double, kMaxDep> h{};
  std::uint32_t weight = 1;
  std::vector<std::uint32_t> members;  // original ids, when tracked
};

struct LeafRecord {
  std::array<std::int32_t, kMaxDim> index{};
  std::array<double, kMaxDim> center{};
  std::uint64_t weight = 0;
  std::vector<std::uint32_t> members;  // sorted, when tracked
};

struct LevelStats {
  std::uint64_t nodes = 0;
  std::uint64_t population = 0;
  std::uint64_t max_population = 0;
};

struct OctreeOptions {
  bool early_exit = false;
  bool parallel = true;
  std::size_t top_k = 1;
  bool track_members = false;
  bool collect_leaves = false;
};

struct OctreeResult {
  double epsilon_requested = 0;
  double epsilon_effective = 0;
  double eps_prime = 0;
  int depth = 0;
  std::uint64_t root_weight = 0;
  std::vector<LeafRecord> top;     // best leaves first, ties by index
  std::vector<LeafRecord> leaves;  // every nonempty leaf by index, when collected
  std::vector<LevelStats> levels;  // one entry per level 0..depth
  std::uint64_t nodes_pruned = 0;
  std::uint64_t dropped_after_rounding = 0;
};

// Largest value <= eps whose quadruple is a power of two, capped at 1/4.
double snap_epsilon(double epsilon);

class CanonicalOctree {
 public:
  CanonicalOctree(const SurfaceFamily& family, double epsilon);

  const SurfaceFamily& family() const { return fam_; }
  double epsilon_effective() const { return eps_; }
  double eps_prime() const { return eps_prime_; }
  int depth() const { return depth_; }
  double step_s(int level) const;
  double step_g() const;

  // Rounds t and the genuine free parameters onto the root lattice.
  // Throws ParameterOutOfRange.
  RoundedSurface canonize_one(const SurfaceParams& p) const;
  // Canonizes and merges equal lattice surfaces, summing weights.
  std::vector<RoundedSurface> canonize(std::span<const SurfaceParams> params, bool track_members) const;

  // Steps 1-3 for the child at `child_level` whose minimal ambient corner is `corner`.
  // Returns false when the surface cannot be re-anchored there.
  bool reround(const RoundedSurface& parent, int parent_level, const double* corner, int child_level,
               RoundedSurface& out) const;
  bool crosses(const RoundedSurface& s, int level, const double* corner) const;
  // Local dependent values of s at local independent point x.
  void value(const RoundedSurface& s, int level, const double* x, double* out) const;
  std::array<double, kMaxEll> essential(const RoundedSurface& s, int level) const;

  OctreeResult build(std::span<const SurfaceParams> params, const OctreeOptions& opt = {}) const;

 private:
  const SurfaceFamily& fam_;
  double eps_requested_, eps_, eps_prime_;
  int depth_;
  int ell_;
};

}  // namespace incpose
