// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit code
// is nonzero when any selected criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swarmgoal/config.hpp"
#include "swarmgoal/dynamics.hpp"
#include "swarmgoal/planner.hpp"
#include "swarmgoal/sweep.hpp"
#include "swarmgoal/theory.hpp"

using namespace swarmgoal;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr int kC1Pairs = 50000;
constexpr double kC1GoalMean = 0.3826;
constexpr double kC1MeanTol = 0.01;
constexpr double kC1SupTol = 0.01;
constexpr double kC1Seconds = 1.0;

constexpr double kC2Distance = 8.0;
constexpr double kC2Epsilon = 0.5;
constexpr double kC2B = 0.5;
constexpr int kC2Trials = 500;
constexpr double kC2Tol = 0.05;
constexpr double kC2Seconds = 60.0;

// The dilute datasets use 100 trials of 10000 s; the run fits the budget.
constexpr int kC3Trials = 100;
constexpr double kC3TrialTime = 10000.0;
constexpr double kC3Tol = 0.15;
constexpr double kC4Tol = 0.20;

constexpr double kC5Theory = 0.0327;
constexpr double kC5TheoryTol = 5e-5;  // four significant figures
constexpr double kC5Local = 0.034;
constexpr double kC5Planner = 0.0296;
constexpr double kC5Tol = 0.10;
constexpr int kC5Trials = 20;
constexpr double kC5TrialTime = 8000.0;
constexpr double kC5Seconds = 120.0;

constexpr int kC6N = 64;
constexpr int kC6Trials = 20;
constexpr double kC6TrialTime = 2000.0;
constexpr double kC6LowFraction = 0.10;
constexpr double kC6ArgmaxTol = 0.5;

constexpr int kC7Trials = 20;
constexpr double kC7TrialTime = 2000.0;
constexpr double kC7Tol = 0.25;
constexpr int kC7Points = 3;

constexpr int kC8N = 64;
constexpr int kC8Trials = 20;

constexpr int kC9Instances = 1000;
constexpr int kC9MaxAgents = 16;
constexpr int kC9Cells = 10;
constexpr int kC9Steps = 200;  // cardinal moves, two ticks each
constexpr int kC9SingleAgentPairs = 1000;
constexpr double kC9CostTol = 0.10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WorldConfig fig2(int n, double sigma, double trial_time) {
  WorldConfig c = harness::preset("fig2");
  c.n = n;
  c.sigma = sigma;
  c.trial_time = trial_time;
  return c;
}

theory::TheoryParams params_of(const WorldConfig& c) {
  theory::TheoryParams p;
  p.n = c.n;
  p.sigma = c.sigma;
  p.L = c.L;
  p.r = c.r;
  p.gamma = c.gamma;
  p.b = c.b;
  p.v = c.v;
  return p;
}

// --- 1: torus distance law ---------------------------------------------------

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(derive_seed(1, 1));
  std::vector<double> d(kC1Pairs);
  double sum = 0.0;
  for (double& x : d) {
    const Point2 a{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    const Point2 b{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    x = torus_distance(a, b, 1.0, true);
    sum += x;
  }
  std::sort(d.begin(), d.end());
  double sup = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double f = theory::torus_distance_cdf(d[i], 1.0);
    sup = std::max({sup, std::abs(f - static_cast<double>(i) / kC1Pairs),
                    std::abs(f - static_cast<double>(i + 1) / kC1Pairs)});
  }
  const double mean = sum / kC1Pairs;
  const double secs = seconds_since(t0);
  const double err = rel_err(mean, kC1GoalMean);
  return {err <= kC1MeanTol && sup < kC1SupTol && secs < kC1Seconds,
          "mean " + fmt(mean, 6) + " (err " + fmt(100 * err, 3) + "%), CDF sup " + fmt(sup, 3) +
              ", " + fmt(secs, 3) + " s"};
}

// --- 2: walk extension -------------------------------------------------------

Outcome c2() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (double sigma : {0.25, 0.5, 0.75, 1.0}) {
    WorldConfig cfg = fig2(1, sigma, 1e9);
    cfg.epsilon = kC2Epsilon;
    cfg.b = kC2B;
    double ratio_sum = 0.0;
    double contact_sum = 0.0;
    for (int k = 0; k < kC2Trials; ++k) {
      cfg.seed = derive_seed(derive_seed(2, static_cast<std::uint64_t>(sigma * 100)), k);
      Rng placement(cfg.seed ^ 0x5bd1e995ULL);
      const double phi = placement.uniform(-kPi, kPi);
      const Point2 start{cfg.L / 2, cfg.L / 2};
      const Point2 goal{start.x + kC2Distance * std::cos(phi), start.y + kC2Distance * std::sin(phi)};
      const InitialAgent a{start, goal, phi};
      World w(cfg, std::span(&a, 1));
      while (w.agents()[0].goals_reached == 0) w.step();
      // Extension is walk length over the start-to-goal line. The ratio to
      // the start-to-contact distance is reported alongside.
      ratio_sum += w.agents()[0].odometer / kC2Distance;
      contact_sum += w.agents()[0].odometer / (kC2Distance - kC2Epsilon);
    }
    const double got = ratio_sum / kC2Trials;
    const double want = theory::walk_extension(sigma);
    const double err = rel_err(got, want);
    pass = pass && err <= kC2Tol;
    detail += "s=" + fmt(sigma, 3) + ": " + fmt(got) + " vs " + fmt(want) + " (" +
              fmt(100 * err, 3) + "%, to contact " + fmt(contact_sum / kC2Trials) + "); ";
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < kC2Seconds;
  return {pass, detail + fmt(secs, 3) + " s"};
}

// --- 3 and 4: dilute collisions ---------------------------------------------

struct DiluteStats {
  double collisions_per_goal = 0.0;
  double headon_duration = 0.0;
  std::int64_t headon_events = 0;
};

DiluteStats dilute_run(double sigma) {
  DiluteStats s;
  std::int64_t collisions = 0;
  std::int64_t goals = 0;
  double dur = 0.0;
  for (int k = 0; k < kC3Trials; ++k) {
    WorldConfig cfg = fig2(2, sigma, kC3TrialTime);
    cfg.seed = harness::trial_seed(3, static_cast<std::uint64_t>(sigma * 100), k);
    const TrialMetrics m = run_trial(cfg, {true, false});
    collisions += m.collision_count;
    goals += m.total_goals;
    for (const CollisionEvent& e : m.collisions) {
      if (!e.closed() || e.h >= kHeadOnThreshold) continue;
      dur += e.duration();
      ++s.headon_events;
    }
  }
  s.collisions_per_goal = static_cast<double>(collisions) / static_cast<double>(goals);
  s.headon_duration = s.headon_events ? dur / static_cast<double>(s.headon_events) : 0.0;
  return s;
}

Outcome c3() {
  bool pass = true;
  std::string detail;
  for (double sigma : {0.5, 0.75, 1.0}) {
    const DiluteStats s = dilute_run(sigma);
    const double want = theory::expected_collisions_per_goal(params_of(fig2(2, sigma, 1.0)));
    const double err = rel_err(s.collisions_per_goal, want);
    pass = pass && err <= kC3Tol;
    detail += "s=" + fmt(sigma, 3) + ": " + fmt(s.collisions_per_goal) + " vs " + fmt(want) + " (" +
              fmt(100 * err, 3) + "%); ";
  }
  return {pass, detail};
}

Outcome c4() {
  bool pass = true;
  std::string detail;
  for (double sigma : {0.75, 1.0, 1.25}) {
    const DiluteStats s = dilute_run(sigma);
    const WorldConfig c = fig2(2, sigma, 1.0);
    const double want = theory::expected_jam_time(sigma, c.gamma, c.b, c.v);
    const double err = rel_err(s.headon_duration, want);
    pass = pass && s.headon_events > 0 && err <= kC4Tol;
    detail += "s=" + fmt(sigma, 3) + ": " + fmt(s.headon_duration) + " s vs " + fmt(want) +
              " s over " + std::to_string(s.headon_events) + " events (" + fmt(100 * err, 3) +
              "%); ";
  }
  return {pass, detail};
}

// --- 5: single-agent attainment trio ----------------------------------------

double mean_G(WorldConfig cfg, std::uint64_t tag) {
  double sum = 0.0;
  for (int k = 0; k < kC5Trials; ++k) {
    cfg.seed = harness::trial_seed(5, tag, k);
    sum += run_trial(cfg).G;
  }
  return sum / kC5Trials;
}

Outcome c5() {
  const auto t0 = std::chrono::steady_clock::now();
  const double th = theory::goal_attainment_rate(params_of(fig2(1, 0.0, 1.0)));
  const double local = mean_G(fig2(1, 0.0, kC5TrialTime), 0);
  WorldConfig pc = harness::preset("fig4-planner");
  pc.n = 1;
  pc.trial_time = kC5TrialTime;
  const double plan = mean_G(pc, 1);
  const double secs = seconds_since(t0);
  const bool pass = std::abs(th - kC5Theory) <= kC5TheoryTol && rel_err(local, kC5Local) <= kC5Tol &&
                    rel_err(plan, kC5Planner) <= kC5Tol && secs < kC5Seconds;
  return {pass, "theory " + fmt(th, 6) + ", local " + fmt(local) + " (" +
                    fmt(100 * rel_err(local, kC5Local), 3) + "%), planner " + fmt(plan) + " (" +
                    fmt(100 * rel_err(plan, kC5Planner), 3) + "%), " + fmt(secs, 3) + " s"};
}

// --- 6: phase structure ------------------------------------------------------

Outcome c6() {
  harness::SweepSpec s;
  s.base = fig2(kC6N, 1.0, kC6TrialTime);
  s.axes.push_back(harness::parse_axis("sigma=0:3:0.25"));
  s.trials = kC6Trials;
  s.record_timing = false;
  const auto recs = harness::run_sweep(s);
  std::size_t top = 0;
  for (std::size_t i = 0; i < recs.size(); ++i)
    if (recs[i].G > recs[top].G) top = i;
  const double peak = recs[top].G;
  const double g025 = recs[1].G;
  // Nonmonotonic: the peak is interior and stands above both ends by more
  // than two standard errors.
  auto below = [&](const harness::RunRecord& r) {
    return peak - r.G > 2.0 * std::hypot(r.G_stderr, recs[top].G_stderr);
  };
  const bool nonmono = top > 0 && top + 1 < recs.size() && below(recs.front()) && below(recs.back());
  const double target = *theory::sigma_star(kC6N, params_of(s.base));
  const double argmax = recs[top].config.sigma;
  std::string curve;
  for (const auto& r : recs) curve += fmt(r.G, 3) + " ";
  const bool pass = g025 < kC6LowFraction * peak && nonmono &&
                    std::abs(argmax - target) <= kC6ArgmaxTol;
  return {pass, "G(0.25)/peak " + fmt(g025 / peak, 3) + ", argmax " + fmt(argmax, 3) +
                    " vs sigma* " + fmt(target, 4) + (nonmono ? ", nonmonotonic" : ", monotonic") +
                    "; G = [" + curve + "]"};
}

// --- 7: dilute theory vs simulation -----------------------------------------

Outcome c7() {
  bool pass = true;
  std::string detail;
  for (int n : {16, 32}) {
    const WorldConfig base = fig2(n, 1.0, kC7TrialTime);
    const double star = *theory::sigma_star(n, params_of(base));
    // First points of the 0.25 grid at or above the critical noise.
    const double first = std::ceil(star / 0.25) * 0.25;
    harness::SweepSpec s;
    s.base = base;
    harness::Axis ax{"sigma", {}};
    for (int k = 0; k < kC7Points; ++k) ax.values.push_back(first + 0.25 * k);
    s.axes.push_back(ax);
    s.trials = kC7Trials;
    s.record_timing = false;
    for (const auto& r : harness::run_sweep(s)) {
      const double want = theory::goal_attainment_rate(params_of(r.config));
      const double err = rel_err(want, r.G);
      pass = pass && err <= kC7Tol;
      detail += "n=" + std::to_string(n) + " s=" + fmt(r.config.sigma, 3) + ": sim " + fmt(r.G) +
                " theory " + fmt(want) + " (" + fmt(100 * err, 3) + "%); ";
    }
  }
  return {pass, detail};
}

// --- 8: controller ordering --------------------------------------------------

Outcome c8() {
  harness::CompareSpec s = harness::CompareSpec::fig4();
  s.n_values = {kC8N};
  s.trials = kC8Trials;
  const harness::Comparison cmp = harness::compare_controllers(s);
  const harness::ComparisonRow& row = cmp.rows.at(0);
  const bool g_order = row.planner.G > row.conditional.G && row.conditional.G > row.constant.G;
  const bool wc_order = row.conditional.goals_per_wc > row.constant.goals_per_wc &&
                        row.conditional.goals_per_wc > row.planner.goals_per_wc;
  return {g_order && wc_order,
          "G planner " + fmt(row.planner.G) + ", conditional " + fmt(row.conditional.G) +
              ", constant " + fmt(row.constant.G) + " (s=" + fmt(row.constant.sigma, 3) +
              "); goals/wall-clock s planner " + fmt(row.planner.goals_per_wc) + ", conditional " +
              fmt(row.conditional.goals_per_wc) + ", constant " + fmt(row.constant.goals_per_wc) +
              (g_order ? "; G order holds" : "; G order fails") +
              (wc_order ? ", wall-clock order holds" : ", wall-clock order fails")};
}

// --- 9: planner validity -----------------------------------------------------

Outcome c9() {
  using namespace swarmgoal::planner;
  std::int64_t violations = 0;
  std::int64_t goals = 0;
  for (int k = 0; k < kC9Instances; ++k) {
    PlannerConfig cfg;
    cfg.grid = GridSpec{40.0 / 3.0, kC9Cells, k % 2 == 0, {}};
    cfg.n = 1 + k % kC9MaxAgents;
    cfg.seed = derive_seed(9, static_cast<std::uint64_t>(k));
    PlannerWorld w(cfg);
    for (int t = 0; t < kC9Steps * kCardinalTicks; ++t) w.step();
    violations += static_cast<std::int64_t>(validate_plans(w.history(), cfg.grid, cfg.cone).size());
    for (int i = 0; i < cfg.n; ++i) goals += w.goals_reached(i);
  }
  // Single-agent cost against the true-length 8-connected path and against
  // the straight line between cell centers.
  const GridSpec grid = fig4_grid();
  ReservationTable table(grid, ConeSpec{2.0, 2.0 * kPi / 3.0}, 512);
  Rng rng(derive_seed(9, 1u << 20));
  double worst_grid = 0.0;
  double worst_line = 0.0;
  double line_sum = 0.0;
  int counted = 0;
  bool all_ok = true;
  for (int k = 0; k < kC9SingleAgentPairs; ++k) {
    const Cell s{static_cast<int>(rng.index(30)), static_cast<int>(rng.index(30))};
    const Cell e{static_cast<int>(rng.index(30)), static_cast<int>(rng.index(30))};
    if (s == e) continue;
    const PlanResult r = plan_path(0, s, e, 0, table, 400);
    if (!r.ok()) {
      all_ok = false;
      continue;
    }
    int dx = 0;
    int dy = 0;
    grid.delta(s, e, dx, dy);
    const int ax = std::abs(dx);
    const int ay = std::abs(dy);
    const double grid_best = (std::max(ax, ay) - std::min(ax, ay)) + std::sqrt(2.0) * std::min(ax, ay);
    const double line = std::hypot(dx, dy);
    const double cost = r.path->duration_units();
    worst_grid = std::max(worst_grid, cost / grid_best);
    worst_line = std::max(worst_line, cost / line);
    line_sum += cost / line;
    ++counted;
  }
  const double mean_line = line_sum / counted;
  const bool pass = violations == 0 && all_ok && worst_grid <= 1.0 + kC9CostTol &&
                    mean_line <= 1.0 + kC9CostTol;
  return {pass, std::to_string(kC9Instances) + " instances, " + std::to_string(violations) +
                    " violations, " + std::to_string(goals) + " goals; single-agent cost ratio max " +
                    fmt(worst_grid) + " vs grid optimum, mean " + fmt(mean_line) + " (max " +
                    fmt(worst_line) + ") vs straight line"};
}

// --- 10: CLI determinism -----------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c10(const std::string& cli, const fs::path& dir) {
  if (cli.empty()) return {false, "no --cli given"};
  fs::create_directories(dir);
  struct Cmd {
    std::string name;
    std::string args;  // {OUT} and {AUX} are substituted per run
  };
  const std::vector<Cmd> cmds = {
      {"simulate", "simulate --set n=8 --set trial_time=300 --no-timing --out {OUT}"},
      {"sweep", "sweep --set trial_time=100 --axis n=2,6 --axis sigma=0.5,1 --trials 2 --no-timing --out {OUT}"},
      {"theory", "theory --set n=64 --set sigma=1.2 --x 0.3 --out {OUT}"},
      {"optimize", "optimize --n-max 200 --out {OUT}"},
      {"plan", "plan --cells 10 --L 13.333333333333334 --n 10 --ticks 400 --out {OUT} --dump {AUX}"},
      {"plan-validate", "plan --cells 10 --L 13.333333333333334 --validate {AUX} --out {OUT}"},
      {"compare", "compare --n 1,8 --sigma 0.5,1 --trials 2 --trial-time 400 --no-timing --out {OUT} --summary {AUX}"},
  };
  bool pass = true;
  std::string detail;
  for (const Cmd& c : cmds) {
    std::string outs[2];
    std::string auxs[2];
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      // plan-validate reads the dump written by the plan run.
      const std::string aux_name = c.name == "plan-validate" ? "plan" : c.name;
      const fs::path out = dir / (c.name + "_" + std::to_string(rep) + ".out");
      const fs::path aux = dir / (aux_name + "_" + std::to_string(rep) + ".aux");
      std::string args = c.args;
      for (auto [key, val] : {std::pair<std::string, std::string>{"{OUT}", out.string()},
                              {"{AUX}", aux.string()}}) {
        for (auto p = args.find(key); p != std::string::npos; p = args.find(key))
          args.replace(p, key.size(), val);
      }
      const std::string line = "\"" + cli + "\" " + args + " 2>/dev/null";
      if (std::system(line.c_str()) != 0) ran = false;
      outs[rep] = slurp(out);
      if (c.name != "plan-validate") auxs[rep] = slurp(aux);
    }
    const bool same = ran && !outs[0].empty() && outs[0] == outs[1] && auxs[0] == auxs[1];
    pass = pass && same;
    detail += c.name + (same ? " ok; " : (ran ? " DIFFERS; " : " FAILED TO RUN; "));
  }
  return {pass, detail};
}

// --- 11: property suites -----------------------------------------------------

Outcome c11(const fs::path& unit_dir) {
  const char* units[] = {"test_geometry", "test_special",   "test_theory",  "test_dynamics",
                         "test_planner",  "test_optimizer", "test_harness", "test_capi"};
  bool pass = true;
  std::string detail;
  for (const char* u : units) {
    const fs::path exe = unit_dir / u;
    if (!fs::exists(exe)) {
      pass = false;
      detail += std::string(u) + " missing; ";
      continue;
    }
    // Suites without a properties section pass trivially.
    const std::string line = "\"" + exe.string() + "\" -ts=properties -nv > /dev/null 2>&1";
    const bool ok = std::system(line.c_str()) == 0;
    pass = pass && ok;
    detail += std::string(u) + (ok ? " ok; " : " FAILED; ");
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  std::string cli;
  std::string unit_dir = ".";
  app.add_option("--only", only, "Criteria to run (default: all)");
  app.add_option("--cli", cli, "Path to the command-line tool");
  app.add_option("--unit-dir", unit_dir, "Directory holding the unit-test binaries");
  CLI11_PARSE(app, argc, argv);

  const fs::path scratch = fs::path(unit_dir) / "acceptance_scratch";
  const std::vector<std::function<Outcome()>> checks = {
      c1, c2, c3, c4, c5, c6, c7, c8, c9,
      [&] { return c10(cli, scratch); },
      [&] { return c11(unit_dir); },
  };
  if (only.empty())
    for (int k = 1; k <= static_cast<int>(checks.size()); ++k) only.push_back(k);

  int failures = 0;
  for (int k : only) {
    if (k < 1 || k > static_cast<int>(checks.size())) {
      std::cerr << "no criterion " << k << '\n';
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k << ": " << o.detail << " ["
              << fmt(seconds_since(t0), 3) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
