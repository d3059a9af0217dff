#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "swarmgoal/dynamics.hpp"

namespace swarmgoal::harness {

struct Axis {
  std::string name;
  std::vector<double> values;
};

/// "name=v1,v2,..." or "name=lo:hi:step" (inclusive of hi within 1e-9 steps).
Axis parse_axis(const std::string& text);

struct SweepSpec {
  WorldConfig base;
  // Cartesian product; the first axis varies slowest.
  std::vector<Axis> axes;
  // 0 picks the default per point: 50 when n <= 128 and sigma <= 2, else 20.
  int trials = 0;
  int workers = 1;
  // Off: wall-clock columns are written as 0 so output is byte-stable.
  bool record_timing = true;
  bool validate_plans = false;

  void validate() const;
};

int default_trials(const WorldConfig& cfg);

/// Seed of trial `trial` at grid point `point`: derive_seed(base, point, trial).
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t point,
                         std::uint64_t trial);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double G = 0.0;
  std::int64_t window_goals = 0;
  std::int64_t total_goals = 0;
  double blocked_fraction = 0.0;
  double wall_clock_seconds = 0.0;
  double simulated_seconds = 0.0;
  std::int64_t plan_violations = -1;
  double max_goal_latency = 0.0;
};

/// One aggregated grid point.
struct RunRecord {
  WorldConfig config;
  int point = 0;
  int trials = 0;
  int failures = 0;
  // Mean window goals per trial.
  double goals = 0.0;
  double G = 0.0;
  double G_stderr = 0.0;
  double blocked_frac = 0.0;
  // Mean per trial.
  double t_wc = 0.0;
  double t_sim = 0.0;
  double twc_over_tsim = 0.0;
  double total_goals = 0.0;  // mean over trials, whole trial
  std::vector<TrialRecord> per_trial;
};

/// Aggregates successful trials: mean G and stddev / sqrt(trials).
void aggregate(RunRecord& rec);

using ProgressFn = std::function<void(int done, int total)>;

std::vector<RunRecord> run_sweep(const SweepSpec& spec, const ProgressFn& progress = {});

inline constexpr const char* kCsvHeader =
    "preset,n,sigma,controller,seed,goals,G,G_stderr,blocked_frac,t_wc,t_sim,"
    "twc_over_tsim";

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

void write_csv(std::ostream& os, const std::vector<RunRecord>& records);
/// Throws std::runtime_error when the path cannot be written.
void emit_csv(const std::vector<RunRecord>& records, const std::string& path);

struct CsvRow {
  std::string preset;
  int n = 0;
  double sigma = 0.0;
  std::string controller;
  std::uint64_t seed = 0;
  double goals = 0.0;
  double G = 0.0;
  double G_stderr = 0.0;
  double blocked_frac = 0.0;
  double t_wc = 0.0;
  double t_sim = 0.0;
  double twc_over_tsim = 0.0;
};

std::vector<CsvRow> read_csv(std::istream& is);

struct CompareSpec {
  std::vector<int> n_values{1, 16, 64};
  std::vector<double> sigmas{0.5, 0.75, 1.0, 1.25, 1.5};
  WorldConfig constant_base;     // fig2 (b = 0.5), constant noise
  WorldConfig conditional_base;  // fig4-local
  WorldConfig planner_base;      // fig4-planner
  int trials = 20;
  int workers = 1;
  bool record_timing = true;
  bool validate_plans = false;

  static CompareSpec fig4();
};

struct ControllerScore {
  double G = 0.0;
  double G_stderr = 0.0;
  double sigma = 0.0;  // constant noise: best sigma on the grid
  // Goals over whole trials divided by wall-clock seconds; 0 without timing.
  double goals_per_wc = 0.0;
  double twc_over_tsim = 0.0;
};

struct ComparisonRow {
  int n = 0;
  ControllerScore constant;
  ControllerScore conditional;
  ControllerScore planner;
  std::string winner_G;
  std::string winner_wc;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  // Every simulated point (constant rows per sigma, then conditional, planner).
  std::vector<RunRecord> records;
  std::int64_t plan_violations = 0;
};

Comparison compare_controllers(const CompareSpec& spec, const ProgressFn& progress = {});

inline constexpr const char* kCompareHeader =
    "n,G_constant,sigma_constant,G_conditional,G_planner,gpwc_constant,"
    "gpwc_conditional,gpwc_planner,winner_G,winner_wc";

// First line of the comparison table.
inline constexpr const char* kCompareNote =
    "# wall-clock caveat: local controllers step at a finer timestep than the "
    "planner, so their runtimes are overestimates";

void write_comparison_csv(std::ostream& os, const Comparison& cmp);

/// Snapshot of agent positions, blocked agents in red and free ones in blue.
std::string render_svg(const World& world);

}  // namespace swarmgoal::harness
