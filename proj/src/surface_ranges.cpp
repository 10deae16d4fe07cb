#include "incpose/surface_ranges.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace incpose {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2;

double wrap_pi(double a) {
  // into (-pi, pi]
  a = std::remainder(a, 2 * kPi);
  return a <= -kPi ? a + 2 * kPi : a;
}

Interval pad(Interval v) {
  const double p = 1e-12 * (1 + v.mag());
  return v.padded(p);
}

}  // namespace

std::optional<Interval> bearing_range(const Rect& r, double tx, double ty) {
  if (r.contains(tx, ty)) return std::nullopt;
  const double ref = std::atan2(ty - 0.5 * (r.y0 + r.y1), tx - 0.5 * (r.x0 + r.x1));
  const double xs[2] = {r.x0, r.x1}, ys[2] = {r.y0, r.y1};
  double lo = 0, hi = 0;
  for (double x : xs)
    for (double y : ys) {
      const double d = wrap_pi(std::atan2(ty - y, tx - x) - ref);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  return Interval{ref + lo, ref + hi};
}

Interval distance_range(const Rect& r, double tx, double ty) {
  const double nx = std::clamp(tx, r.x0, r.x1), ny = std::clamp(ty, r.y0, r.y1);
  const double fx = std::max(std::abs(tx - r.x0), std::abs(tx - r.x1));
  const double fy = std::max(std::abs(ty - r.y0), std::abs(ty - r.y1));
  const double ax = tx - nx, ay = ty - ny;
  return {std::sqrt(ax * ax + ay * ay), std::sqrt(fx * fx + fy * fy)};
}

std::optional<Interval> vector_angle_range(Interval dx, Interval dy) {
  // Vectors (u, v) in the box point from -box toward the origin.
  return bearing_range(Rect{-dx.hi, -dx.lo, -dy.hi, -dy.lo}, 0.0, 0.0);
}

std::optional<Interval> tan_range(Interval angle, Interval* shifted) {
  const double k = std::floor((angle.lo + kHalfPi) / kPi);
  const Interval s{angle.lo - k * kPi, angle.hi - k * kPi};
  if (shifted) *shifted = s;
  if (s.hi >= kHalfPi) return std::nullopt;
  return Interval{std::tan(s.lo), std::tan(s.hi)};
}

PieceEval evaluate_piece(const SurfaceGeom& s, const Rect& r, double a) {
  const Correspondence& c = s.c;
  const Interval d = distance_range(r, c.w1, c.w2);
  if (a > 0 && d.hi * d.hi < a) return {PieceKind::Violates, {}};
  if (r.contains(c.w1, c.w2)) return {PieceKind::Singular, {}};

  // The denominator dx + xi dy is affine in (x, y), so its range over the rect is
  // spanned by the corners. While it keeps one sign the bearing stays inside a
  // half-turn where kappa is monotone, so the corners span kappa as well.
  const double xs[2] = {r.x0, r.x1}, ys[2] = {r.y0, r.y1};
  double den_lo = std::numeric_limits<double>::infinity(), den_hi = -den_lo;
  double k_lo = den_lo, k_hi = den_hi;
  double den[4], num[4];
  int q = 0;
  for (double x : xs)
    for (double y : ys) {
      const double dx = c.w1 - x, dy = c.w2 - y;
      den[q] = dx + c.xi * dy;
      num[q] = dy - c.xi * dx;
      den_lo = std::min(den_lo, den[q]);
      den_hi = std::max(den_hi, den[q]);
      ++q;
    }
  if (a > 0 && std::max(-den_lo, den_hi) < a) return {PieceKind::Violates, {}};
  if (den_lo <= 0 && den_hi >= 0) return {PieceKind::Singular, {}};
  for (int i = 0; i < 4; ++i) {
    const double k = num[i] / den[i];
    k_lo = std::min(k_lo, k);
    k_hi = std::max(k_hi, k);
  }
  const Interval z = Interval::hull(c.w3 - c.eta * d.lo, c.w3 - c.eta * d.hi);
  return {PieceKind::Box, ColumnBox{pad(z), pad(Interval{k_lo, k_hi})}};
}

int column_depth_for(double side, double a, double image_bound, int cap) {
  if (a <= 0) return cap;
  // |grad (w1-x + xi (w2-y))| <= sqrt(1 + B^2); a vanishing piece of diagonal h has |.| <= that * h.
  const double slope = std::sqrt(1 + image_bound * image_bound) * std::sqrt(2.0);
  int depth = 0;
  while (depth < cap && slope * side / std::ldexp(1.0, depth) >= a) ++depth;
  return depth;
}

}  // namespace incpose
