#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "incpose/errors.hpp"

namespace incpose {

// A matched scene point (w1,w2,w3) and its image coordinates (xi, eta).
struct Correspondence {
  double w1 = 0, w2 = 0, w3 = 0;
  double xi = 0, eta = 0;
  bool operator==(const Correspondence&) const = default;
};

// Camera position and yaw slope kappa = tan(theta); lives in [0,1]^3 x [-1,1].
struct Pose {
  double x = 0, y = 0, z = 0, kappa = 0;
  bool operator==(const Pose&) const = default;
  double operator[](int i) const { return i == 0 ? x : i == 1 ? y : i == 2 ? z : kappa; }
};

struct ImagePoint {
  double xi = 0, eta = 0;
};

struct ZKappa {
  double z = 0, kappa = 0;
};

// Denominators with magnitude below this make F, G or the inverse undefined.
inline constexpr double kDegeneracyThreshold = 1e-12;

struct AnalyticConstants {
  double a = 0.2;            // separation required by conditions (i)-(iii)
  double c1 = 12.0;          // gradient envelope
  double c2 = 12.0;          // Lipschitz envelope of gradients
  double c_kappa = 50.0;     // 2 / a^2, kappa drift for one unit of frame distance
  double c_grid = 2.0;       // kappa stretch used for grid cells
  double gamma = 0.0;        // residual scale of the dual stage; 0 selects the pilot estimate
  double alpha = 6.0;        // admissible inflation of counted pairs
  double beta = 12.0;        // Lipschitz constant of the frame distance
  double image_bound = 3.0;  // |xi|, |eta| cap

  // Throws InvalidConfig when a field is out of its domain.
  void validate() const;
};

bool in_primal_domain(const Pose& v);

inline double kappa_from_yaw(double theta) { return std::tan(theta); }
inline double yaw_from_kappa(double kappa) { return std::atan(kappa); }

// F and G evaluated at pose v for scene point w. Empty when a denominator degenerates.
std::optional<ImagePoint> try_project(const Pose& v, double w1, double w2, double w3);
ImagePoint project(const Pose& v, double w1, double w2, double w3);

// Inverse system: the (z, kappa) of the unique pose over (x, y) that sees corr exactly.
std::optional<ZKappa> try_surface_parametric(const Correspondence& c, double x, double y);
ZKappa surface_parametric(const Correspondence& c, double x, double y);

std::optional<double> try_frame_distance(const Pose& v, const Correspondence& c);
double frame_distance(const Pose& v, const Correspondence& c);

// The three separation quantities at v, in order (i), (ii), (iii).
std::array<double, 3> condition_values(const Pose& v, const Correspondence& c);
bool check_conditions(const Pose& v, const Correspondence& c, const AnalyticConstants& k);

// Correspondence whose surface passes through v with scene point w.
Correspondence correspondence_through(const Pose& v, double w1, double w2, double w3);

}  // namespace incpose
