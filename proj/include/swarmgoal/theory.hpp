#pragma once

#include <optional>
#include <stdexcept>

namespace swarmgoal::theory {

/// Mean minimal-image distance between two uniform points on the unit torus,
/// (ln(3 + 2 sqrt 2) + 2^{3/2}) / 12.
double goal_distance_constant();

/// Symbol set shared by the closed-form approximations. Lengths in arena
/// units, angles in radians, v in length per second.
struct TheoryParams {
  double n = 1.0;
  double sigma = 0.0;
  double L = 40.0;
  double r = 2.0;
  double gamma = 2.0943951023931957;
  double b = 0.5;
  double v = 0.5;

  void validate() const;
};

/// Thrown where a formula has no finite value (zero noise in an escape time).
class Divergence : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when the corrected critical-noise equation has no root in range.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double expected_goal_distance(double L);

/// P(X <= x) for the torus distance X on an L x L periodic square.
double torus_distance_cdf(double x, double L);
double torus_distance_pdf(double x, double L);

/// Mean path length over straight-line length for a homing walk, e^{sigma^2/2}.
double walk_extension(double sigma);

double expected_travel_time(double sigma, double L, double v);

double expected_collisions_per_goal(const TheoryParams& p);

/// Mean duration of a two-body head-on jam. Throws Divergence at sigma = 0.
double expected_jam_time(double sigma, double gamma, double b, double v);

/// Team goal attainment rate n / (E t0 + E C * E t_jam).
double goal_attainment_rate(const TheoryParams& p);

double jam_entry_time(const TheoryParams& p);
double jam_exit_time(const TheoryParams& p);

/// Per-step probability of freeing the cone from the large-jam position,
/// 1/2 (1 - erf((pi/4 + gamma/2) / (sqrt2 sigma))).
double jam_unblock_probability(double sigma, double gamma);

/// Same, plus the large clockwise turn past -(3pi/4 + gamma/2).
double jam_unblock_probability_corrected(double sigma, double gamma);

/// Exit time with the corrected unblock probability.
double jam_exit_time_corrected(const TheoryParams& p);

/// Critical noise where entry and exit times balance; nullopt when the
/// inverse-erf argument is not positive (no dilute phase predicted).
std::optional<double> sigma_star(double n, const TheoryParams& p);

/// Corrected critical noise, solved numerically to 1e-6 relative tolerance.
/// Throws SolverFailure when no root exists.
double sigma_star_corrected(double n, const TheoryParams& p);

/// Named evaluation used by the CLI and the C API: "goal_distance",
/// "cdf", "pdf", "extension", "travel_time", "collisions", "jam_time",
/// "attainment", "entry_time", "exit_time", "exit_time_corrected",
/// "sigma_star", "sigma_star_corrected". `x` is the distance argument of
/// cdf/pdf. Returns nullopt for sigma_star with no finite value.
std::optional<double> evaluate(const char* quantity, const TheoryParams& p,
                               double x = 0.0);

}  // namespace swarmgoal::theory
