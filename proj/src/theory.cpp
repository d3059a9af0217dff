#include "swarmgoal/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "swarmgoal/special.hpp"

namespace swarmgoal::theory {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

double exit_turn_angle(double gamma) { return kPi / 4.0 + 0.5 * gamma; }
double far_turn_angle(double gamma) { return 3.0 * kPi / 4.0 + 0.5 * gamma; }

// pi^2 r^3 n^{3/2} / (K L^3): the density group that balances jam entry
// against jam exit once the walk extension cancels.
double crowding(double n, const TheoryParams& p) {
  return kPi * kPi * p.r * p.r * p.r * std::pow(n, 1.5) /
         (goal_distance_constant() * p.L * p.L * p.L);
}

}  // namespace

double goal_distance_constant() {
  static const double k =
      (std::log(3.0 + 2.0 * kSqrt2) + std::pow(2.0, 1.5)) / 12.0;
  return k;
}

void TheoryParams::validate() const {
  if (!(n >= 1.0)) throw std::invalid_argument("n must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (!(L > 0.0)) throw std::invalid_argument("L must be positive");
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  if (!(gamma > 0.0) || gamma > 2.0 * kPi)
    throw std::invalid_argument("gamma must lie in (0, 2pi]");
  if (!(b > 0.0)) throw std::invalid_argument("b must be positive");
  if (!(v > 0.0)) throw std::invalid_argument("v must be positive");
}

double expected_goal_distance(double L) {
  if (!(L >= 0.0)) throw std::invalid_argument("L must be >= 0");
  return goal_distance_constant() * L;
}

double torus_distance_cdf(double x, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("L must be positive");
  if (x <= 0.0) return 0.0;
  const double half = 0.5 * L;
  if (x <= half) return kPi * x * x / (L * L);
  if (x > kSqrt2 * half) return 1.0;
  const double area = kPi * x * x - 4.0 * x * x * std::acos(half / x) +
                      2.0 * L * std::sqrt(x * x - half * half);
  return std::min(1.0, area / (L * L));
}

double torus_distance_pdf(double x, double L) {
  if (!(L > 0.0)) throw std::invalid_argument("L must be positive");
  if (x < 0.0) return 0.0;
  const double half = 0.5 * L;
  if (x <= half) return 2.0 * kPi * x / (L * L);
  if (x > kSqrt2 * half) return 0.0;
  return (2.0 * kPi * x - 8.0 * x * std::acos(half / x)) / (L * L);
}

double walk_extension(double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  return std::exp(0.5 * sigma * sigma);
}

double expected_travel_time(double sigma, double L, double v) {
  if (!(v > 0.0)) throw std::invalid_argument("v must be positive");
  return expected_goal_distance(L) * walk_extension(sigma) / v;
}

double expected_collisions_per_goal(const TheoryParams& p) {
  p.validate();
  const double density = (p.n - 1.0) / (p.L * p.L);
  const double steps = expected_goal_distance(p.L) * walk_extension(p.sigma) / p.b;
  const double coverage = p.gamma / (2.0 * kPi) * kPi * p.r * p.r +
                          2.0 * kSqrt2 * p.b * p.r * std::sin(0.5 * p.gamma);
  return density * steps * coverage;
}

double expected_jam_time(double sigma, double gamma, double b, double v) {
  if (!(v > 0.0) || !(b > 0.0))
    throw std::invalid_argument("b and v must be positive");
  if (!(sigma > 0.0))
    throw Divergence("head-on jam never clears without noise");
  // 1 - erf^2 written through erfc to keep the small-noise tail.
  const double z = gamma / (2.0 * kSqrt2 * sigma);
  const double freed = std::erfc(z) * (1.0 + std::erf(z));
  if (freed <= 0.0) throw Divergence("head-on jam never clears");
  return (b / v) / freed;
}

double goal_attainment_rate(const TheoryParams& p) {
  p.validate();
  const double travel = expected_travel_time(p.sigma, p.L, p.v);
  const double collisions = expected_collisions_per_goal(p);
  double jammed = 0.0;
  if (collisions > 0.0)
    jammed = collisions * expected_jam_time(p.sigma, p.gamma, p.b, p.v);
  return p.n / (travel + jammed);
}

double jam_entry_time(const TheoryParams& p) {
  p.validate();
  return 4.0 * goal_distance_constant() * p.L * p.L * p.L *
         walk_extension(p.sigma) / (p.n * kPi * p.r * p.r) / p.v;
}

double jam_unblock_probability(double sigma, double gamma) {
  if (!(sigma > 0.0)) return 0.0;
  return 0.5 * std::erfc(exit_turn_angle(gamma) / (kSqrt2 * sigma));
}

double jam_unblock_probability_corrected(double sigma, double gamma) {
  if (!(sigma > 0.0)) return 0.0;
  return jam_unblock_probability(sigma, gamma) +
         0.5 * std::erfc(far_turn_angle(gamma) / (kSqrt2 * sigma));
}

double jam_exit_time(const TheoryParams& p) {
  p.validate();
  if (!(p.sigma > 0.0)) throw Divergence("large jam never clears without noise");
  const double freed =
      std::erfc(exit_turn_angle(p.gamma) / (kSqrt2 * p.sigma));
  if (freed <= 0.0) throw Divergence("large jam never clears");
  return 0.5 * kPi * p.r * std::sqrt(p.n) * walk_extension(p.sigma) /
         (p.v * freed);
}

double jam_exit_time_corrected(const TheoryParams& p) {
  p.validate();
  const double freed = jam_unblock_probability_corrected(p.sigma, p.gamma);
  if (!(freed > 0.0)) throw Divergence("large jam never clears");
  // quarter perimeter in steps, scaled by steps per successful unblock
  return 0.25 * kPi * p.r * std::sqrt(p.n) * walk_extension(p.sigma) /
         (p.v * freed);
}

std::optional<double> sigma_star(double n, const TheoryParams& p) {
  p.validate();
  if (!(n >= 1.0)) throw std::invalid_argument("n must be >= 1");
  const double arg = 1.0 - crowding(n, p) / 8.0;
  if (!(arg > 0.0)) return std::nullopt;
  return exit_turn_angle(p.gamma) / kSqrt2 / erf_inv(arg);
}

double sigma_star_corrected(double n, const TheoryParams& p) {
  p.validate();
  if (!(n >= 1.0)) throw std::invalid_argument("n must be >= 1");
  // entry = corrected exit  <=>  P_corr(sigma) = crowding / 16 (the walk
  // extension appears on both sides and cancels).
  const double target = crowding(n, p) / 16.0;
  auto residual = [&](double s) {
    return jam_unblock_probability_corrected(s, p.gamma) - target;
  };
  double lo = 1e-6;
  double hi = 1e3;
  if (!(residual(lo) < 0.0) || !(residual(hi) > 0.0))
    throw SolverFailure("no sign change for corrected critical noise");
  // P_corr increases monotonically in sigma; bisect in log space.
  while (hi - lo > 1e-7 * hi) {
    const double mid = std::sqrt(lo * hi);
    if (residual(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::optional<double> evaluate(const char* quantity, const TheoryParams& p,
                               double x) {
  const std::string_view q = quantity ? quantity : "";
  if (q == "goal_distance") return expected_goal_distance(p.L);
  if (q == "cdf") return torus_distance_cdf(x, p.L);
  if (q == "pdf") return torus_distance_pdf(x, p.L);
  if (q == "extension") return walk_extension(p.sigma);
  if (q == "travel_time") return expected_travel_time(p.sigma, p.L, p.v);
  if (q == "collisions") return expected_collisions_per_goal(p);
  if (q == "jam_time") return expected_jam_time(p.sigma, p.gamma, p.b, p.v);
  if (q == "attainment") return goal_attainment_rate(p);
  if (q == "entry_time") return jam_entry_time(p);
  if (q == "exit_time") return jam_exit_time(p);
  if (q == "exit_time_corrected") return jam_exit_time_corrected(p);
  if (q == "sigma_star") return sigma_star(p.n, p);
  if (q == "sigma_star_corrected") return sigma_star_corrected(p.n, p);
  throw std::invalid_argument("unknown theory quantity: " + std::string(q));
}

}  // namespace swarmgoal::theory
