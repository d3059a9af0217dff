#include "swarmgoal/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace swarmgoal {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 1));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                          std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  double r = std::fmod(a + kPi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - kPi;
}

namespace {

void require_finite(Point2 p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y))
    throw std::invalid_argument("non-finite coordinate");
}

double wrap_component(double d, double L) {
  d -= L * std::floor(d / L + 0.5);
  // floor rounding can leave d == L/2 exactly; keep the half-open range.
  if (d >= 0.5 * L) d -= L;
  return d;
}

}  // namespace

Vec2 torus_delta(Point2 a, Point2 b, double L, bool periodic) {
  require_finite(a);
  require_finite(b);
  Vec2 d = b - a;
  if (!periodic) return d;
  if (!(L > 0.0) || !std::isfinite(L))
    throw std::invalid_argument("arena side must be positive");
  return {wrap_component(d.x, L), wrap_component(d.y, L)};
}

double torus_distance(Point2 a, Point2 b, double L, bool periodic) {
  return torus_delta(a, b, L, periodic).norm();
}

Point2 wrap_point(Point2 p, double L) {
  auto w = [L](double c) {
    c -= L * std::floor(c / L);
    return c >= L ? 0.0 : c;
  };
  return {w(p.x), w(p.y)};
}

void validate_cone(const ConeSpec& cone) {
  if (!(cone.radius > 0.0) || !std::isfinite(cone.radius))
    throw std::invalid_argument("cone radius must be positive");
  if (!(cone.angle > 0.0) || cone.angle > kTwoPi)
    throw std::invalid_argument("cone angle must lie in (0, 2pi]");
}

bool cone_contains(const Pose& observer, Point2 target, const ConeSpec& cone,
                   double L, bool periodic) {
  const Vec2 d = torus_delta(observer.position, target, L, periodic);
  const double r2 = d.dot(d);
  if (r2 > cone.radius * cone.radius) return false;
  if (r2 == 0.0) return true;
  if (cone.angle >= kTwoPi) return true;
  const double off = std::abs(angle_diff(d.angle(), observer.heading));
  return off <= cone.half_angle();
}

StepPlan sample_step(Rng& rng, double goal_angle, double sigma, double b,
                     double v) {
  StepPlan s;
  s.travel_angle = wrap_angle(rng.normal(goal_angle, sigma));
  const double mean = b / v;
  s.duration = rng.uniform(0.5 * mean, 1.5 * mean);
  s.remaining = s.duration;
  return s;
}

std::optional<double> segment_disk_hit_fraction(Point2 p0, Point2 p1,
                                                Point2 center, double rho,
                                                double L, bool periodic) {
  if (rho < 0.0) throw std::invalid_argument("negative disk radius");
  // Work relative to p0 so the periodic image choice is explicit.
  const Vec2 c = torus_delta(p0, center, L, periodic);
  const Vec2 d = p1 - p0;
  const double rho2 = rho * rho;
  if (c.dot(c) <= rho2) return 0.0;
  const double a = d.dot(d);
  if (a == 0.0) return std::nullopt;
  // |t d - c|^2 = rho^2  ->  a t^2 - 2 (d.c) t + (c.c - rho^2) = 0
  const double bh = d.dot(c);
  const double k = c.dot(c) - rho2;
  const double disc = bh * bh - a * k;
  if (disc < 0.0) return std::nullopt;
  const double t = (bh - std::sqrt(disc)) / a;
  if (t < 0.0 || t > 1.0) return std::nullopt;
  return t;
}

}  // namespace swarmgoal
