#include "incpose/geometry.hpp"

#include <string>

namespace incpose {

void AnalyticConstants::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v))
      throw InvalidConfig(std::string("constant ") + name + " must be positive and finite");
  };
  positive(a, "a");
  positive(c1, "c1");
  positive(c2, "c2");
  positive(c_kappa, "c_kappa");
  positive(c_grid, "c_grid");
  positive(beta, "beta");
  positive(image_bound, "image_bound");
  if (!(alpha > 1)) throw InvalidConfig("constant alpha must exceed 1");
  if (gamma < 0 || !std::isfinite(gamma)) throw InvalidConfig("constant gamma must be >= 0");
}

bool in_primal_domain(const Pose& v) {
  return v.x >= 0 && v.x <= 1 && v.y >= 0 && v.y <= 1 && v.z >= 0 && v.z <= 1 &&
         v.kappa >= -1 && v.kappa <= 1;
}

std::optional<ImagePoint> try_project(const Pose& v, double w1, double w2, double w3) {
  const double dx = w1 - v.x, dy = w2 - v.y;
  const double den = dx + v.kappa * dy;
  const double r2 = dx * dx + dy * dy;
  if (std::abs(den) < kDegeneracyThreshold || r2 < kDegeneracyThreshold) return std::nullopt;
  return ImagePoint{(dy - v.kappa * dx) / den, (w3 - v.z) / std::sqrt(r2)};
}

ImagePoint project(const Pose& v, double w1, double w2, double w3) {
  auto p = try_project(v, w1, w2, w3);
  if (!p) throw DegenerateGeometry("projection denominator vanishes");
  return *p;
}

std::optional<ZKappa> try_surface_parametric(const Correspondence& c, double x, double y) {
  const double dx = c.w1 - x, dy = c.w2 - y;
  const double den = dx + c.xi * dy;
  if (std::abs(den) < kDegeneracyThreshold) return std::nullopt;
  return ZKappa{c.w3 - c.eta * std::sqrt(dx * dx + dy * dy), (dy - c.xi * dx) / den};
}

ZKappa surface_parametric(const Correspondence& c, double x, double y) {
  auto p = try_surface_parametric(c, x, y);
  if (!p) throw DegenerateGeometry("surface denominator vanishes");
  return *p;
}

std::optional<double> try_frame_distance(const Pose& v, const Correspondence& c) {
  auto p = try_project(v, c.w1, c.w2, c.w3);
  if (!p) return std::nullopt;
  return std::max(std::abs(p->xi - c.xi), std::abs(p->eta - c.eta));
}

double frame_distance(const Pose& v, const Correspondence& c) {
  auto d = try_frame_distance(v, c);
  if (!d) throw DegenerateGeometry("frame distance undefined at this pose");
  return *d;
}

std::array<double, 3> condition_values(const Pose& v, const Correspondence& c) {
  const double dx = c.w1 - v.x, dy = c.w2 - v.y;
  return {std::abs(dx + v.kappa * dy), dx * dx + dy * dy, std::abs(dx + c.xi * dy)};
}

bool check_conditions(const Pose& v, const Correspondence& c, const AnalyticConstants& k) {
  const auto q = condition_values(v, c);
  return q[0] >= k.a && q[1] >= k.a && q[2] >= k.a;
}

Correspondence correspondence_through(const Pose& v, double w1, double w2, double w3) {
  const ImagePoint p = project(v, w1, w2, w3);
  return {w1, w2, w3, p.xi, p.eta};
}

}  // namespace incpose
