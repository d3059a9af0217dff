#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "swarmgoal/rng.hpp"

namespace swarmgoal {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double angle() const { return std::atan2(y, x); }
};

// Positions and displacements share a representation.
using Point2 = Vec2;

inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Reduce an angle into (-pi, pi].
double wrap_angle(double a);

/// Minimal signed difference a - b, in (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

struct Pose {
  Point2 position;
  double heading = 0.0;
};

/// Forward sensing sector: radius r and full opening angle gamma.
struct ConeSpec {
  double radius = 1.0;
  double angle = 2.0 * kPi / 3.0;

  double half_angle() const { return 0.5 * angle; }
};

/// One homing-walk step: direction, drawn duration, time left on the clock.
struct StepPlan {
  double travel_angle = 0.0;
  double duration = 0.0;
  double remaining = 0.0;
};

/// Minimal-image displacement b - a. Periodic components land in [-L/2, L/2).
/// Throws std::invalid_argument on non-finite input.
Vec2 torus_delta(Point2 a, Point2 b, double L, bool periodic);

double torus_distance(Point2 a, Point2 b, double L, bool periodic);

/// Canonical representative of p in [0, L)^2.
Point2 wrap_point(Point2 p, double L);

/// Closed-sector membership test. A target coincident with the observer counts
/// as inside (the apex belongs to the sector).
bool cone_contains(const Pose& observer, Point2 target, const ConeSpec& cone,
                   double L, bool periodic);

void validate_cone(const ConeSpec& cone);

/// Gaussian heading noise around `goal_angle` (wrapped), duration uniform on
/// [b/(2v), 3b/(2v)].
StepPlan sample_step(Rng& rng, double goal_angle, double sigma, double b,
                     double v);

/// Smallest t in [0,1] at which p0 + t (p1 - p0) is within rho of center, or
/// nullopt if the segment never gets that close. In periodic mode the disk is
/// taken at the image of center nearest to p0.
std::optional<double> segment_disk_hit_fraction(Point2 p0, Point2 p1,
                                                Point2 center, double rho,
                                                double L, bool periodic);

}  // namespace swarmgoal
