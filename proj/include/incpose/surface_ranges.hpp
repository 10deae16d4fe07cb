#pragma once

#include <cstdint>
#include <numbers>
#include <optional>

#include "incpose/geometry.hpp"
#include "incpose/interval.hpp"

namespace incpose {

struct Rect {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool contains(double x, double y) const { return x0 <= x && x <= x1 && y0 <= y && y <= y1; }
};

// Directions (atan2 angles) of the vectors from points of `r` to (tx, ty).
// Empty when the target lies in the closed rectangle.
std::optional<Interval> bearing_range(const Rect& r, double tx, double ty);

// Distances from points of `r` to (tx, ty).
Interval distance_range(const Rect& r, double tx, double ty);

// Angle span of the vectors in the box dx x dy; empty when the box holds the origin.
std::optional<Interval> vector_angle_range(Interval dx, Interval dy);

// tan over an angle interval, after shifting it by a multiple of pi so it starts
// in [-pi/2, pi/2). Empty when the shifted interval reaches pi/2.
std::optional<Interval> tan_range(Interval angle, Interval* shifted = nullptr);

// Per-correspondence quantities reused across every column.
struct SurfaceGeom {
  Correspondence c;
  double alpha = 0;    // atan(xi)
  double sec_xi = 1;   // sqrt(1 + xi^2)

  SurfaceGeom() = default;
  explicit SurfaceGeom(const Correspondence& corr)
      : c(corr), alpha(std::atan(corr.xi)), sec_xi(std::sqrt(1 + corr.xi * corr.xi)) {}
};

struct ColumnBox {
  Interval z, kappa;
};

struct ColumnTolerance {
  double z = 0;      // split while the z range is wider than this
  double kappa = 0;  // split while the kappa range is wider than this
  int max_depth = 3;
  // Separation threshold: pieces where condition (ii) or (iii) fails everywhere are
  // dropped. Zero keeps every piece and reports unbounded kappa for singular ones.
  double a = 0;
};

struct ColumnStats {
  std::uint64_t pieces = 0;
  std::uint64_t skipped_conditions = 0;
  std::uint64_t singular = 0;
};

// Enclosure of (z, kappa) over one column piece, or the reason there is none.
enum class PieceKind { Box, Violates, Singular };

struct PieceEval {
  PieceKind kind = PieceKind::Box;
  ColumnBox box;
};

PieceEval evaluate_piece(const SurfaceGeom& s, const Rect& r, double a);

// Smallest depth for which a singular piece of a column of side `side` must violate
// condition (iii) at separation a, capped at `cap`.
int column_depth_for(double side, double a, double image_bound, int cap = 6);

// Covers the surface over rect r with (z, kappa) boxes, splitting r into quadrants
// while a box is wider than the tolerance.
template <class Emit>
void column_boxes(const SurfaceGeom& s, const Rect& r, const ColumnTolerance& tol, Emit&& emit,
                  ColumnStats& st, int depth = 0) {
  ++st.pieces;
  const PieceEval e = evaluate_piece(s, r, tol.a);
  const bool can_split = depth < tol.max_depth;
  if (e.kind == PieceKind::Violates) {
    ++st.skipped_conditions;
    return;
  }
  if (e.kind == PieceKind::Box &&
      (!can_split || (e.box.z.width() <= tol.z && e.box.kappa.width() <= tol.kappa))) {
    emit(e.box);
    return;
  }
  if (e.kind == PieceKind::Singular && !can_split) {
    ++st.singular;
    if (tol.a <= 0) {
      // No separation to lean on: keep the whole kappa axis for this piece.
      const Interval d = distance_range(r, s.c.w1, s.c.w2);
      const Interval z = Interval::hull(s.c.w3 - s.c.eta * d.lo, s.c.w3 - s.c.eta * d.hi);
      emit(ColumnBox{z, Interval::entire()});
    }
    return;
  }
  const double xm = 0.5 * (r.x0 + r.x1), ym = 0.5 * (r.y0 + r.y1);
  column_boxes(s, Rect{r.x0, xm, r.y0, ym}, tol, emit, st, depth + 1);
  column_boxes(s, Rect{xm, r.x1, r.y0, ym}, tol, emit, st, depth + 1);
  column_boxes(s, Rect{r.x0, xm, ym, r.y1}, tol, emit, st, depth + 1);
  column_boxes(s, Rect{xm, r.x1, ym, r.y1}, tol, emit, st, depth + 1);
}

}  // namespace incpose
