#pragma once

#include <span>
#include <vector>

#include "incpose/geometry.hpp"
#include "incpose/octree.hpp"
#include "incpose/result.hpp"

namespace incpose {

// x_dep = sum_i a_i x_i + b over the other d-1 axes, |a_i| <= 1, |b| <= d.
// Orientation o means axis o is the dependent one.
class HyperplaneFamily final : public SurfaceFamily {
 public:
  explicit HyperplaneFamily(int d);
  int d() const override { return d_; }
  int k() const override { return d_ - 1; }
  int ell() const override { return d_ - 1; }
  int orientations() const override { return d_; }
  int axis(int orientation, int local) const override;
  bool genuine_free(int) const override { return true; }
  double c1() const override;
  double c2() const override { return 1.0; }
  Interval t_bounds(int) const override { return {-1.0, 1.0}; }
  Interval f_bounds(int) const override { return {-double(d_), double(d_)}; }
  void eval(const double* x, const double* t, double* out) const override;
  void cover(const Interval* xbox, const double* t, std::vector<DepBox>& out) const override;

 private:
  int d_;
};

// normal . x = offset
struct Hyperplane {
  std::vector<double> normal;
  double offset = 0;
};

// Solves for the axis with the largest normal component. Throws CoefficientOutOfRange
// for a zero normal or an intercept beyond d.
SurfaceParams hyperplane_params(const Hyperplane& h);
// Direct form on a given dependent axis; throws CoefficientOutOfRange.
SurfaceParams hyperplane_params(int dependent_axis, std::span<const double> a, double b, int d);
double hyperplane_distance(const Hyperplane& h, std::span<const double> p);

// Camera surfaces in normalized pose space (x, y, z, u) with u = (kappa + 1) / 2.
// Essential parameters (w1, w2, xi, eta); free parameters (w3, artificial 0).
class CameraFamily final : public SurfaceFamily {
 public:
  explicit CameraFamily(const AnalyticConstants& k) : k_(k) {}
  int d() const override { return 4; }
  int k() const override { return 2; }
  int ell() const override { return 4; }
  bool genuine_free(int j) const override { return j == 0; }
  double c1() const override { return k_.c1; }
  double c2() const override { return k_.c2; }
  Interval t_bounds(int i) const override;
  Interval f_bounds(int) const override { return {0.0, 1.0}; }
  void eval(const double* x, const double* t, double* out) const override;
  void cover(const Interval* xbox, const double* t, std::vector<DepBox>& out) const override;

 private:
  AnalyticConstants k_;
};

SurfaceParams camera_params(const Correspondence& c);
Pose pose_from_normalized(const double* p);

struct CanonicalOptions {
  bool early_exit = false;
  bool parallel = true;
  std::size_t top_k = 1;
};

IncidenceResult canonical_solve(std::span<const Correspondence> surfaces, double epsilon,
                                const AnalyticConstants& k, const CanonicalOptions& opt = {});

}  // namespace incpose
