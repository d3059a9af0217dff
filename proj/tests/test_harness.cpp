#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "swarmgoal/config.hpp"
#include "swarmgoal/sweep.hpp"

using namespace swarmgoal;
using namespace swarmgoal::harness;

namespace {

SweepSpec quick(int n, std::initializer_list<double> sigmas, int trials) {
  SweepSpec s;
  s.base = preset("fig2");
  s.base.n = n;
  s.base.trial_time = 100.0;
  s.axes.push_back({"sigma", sigmas});
  s.trials = trials;
  s.record_timing = false;
  return s;
}

std::string csv_of(const std::vector<RunRecord>& recs) {
  std::ostringstream os;
  write_csv(os, recs);
  return os.str();
}

}  // namespace

TEST_CASE("presets carry the table values") {
  const WorldConfig f2 = preset("fig2");
  CHECK(f2.L == 40.0);
  CHECK(f2.r == 2.0);
  CHECK(f2.b == 0.5);
  CHECK(f2.epsilon == 0.6);
  CHECK(f2.dt == 0.1);
  CHECK(f2.trial_time == 8000.0);
  CHECK(f2.periodic());
  const WorldConfig f3 = preset("fig3-match");
  CHECK(f3.L == 1.2);
  CHECK(f3.r == 0.1564);
  CHECK(f3.v == 0.1);
  CHECK(f3.b == 0.15);
  CHECK(f3.turn_speed == 1.039);
  CHECK(f3.epsilon == 0.08);
  CHECK(f3.trial_time == 300.0);
  CHECK_FALSE(f3.periodic());
  CHECK(f3.measure_window_fraction == 0.75);
  const WorldConfig f4 = preset("fig4-local");
  CHECK(f4.b == 2.5);
  CHECK(f4.controller == Controller::conditional_noise);
  const WorldConfig fp = preset("fig4-planner");
  CHECK(fp.controller == Controller::planner);
  CHECK(fp.grid_cells == 30);
  CHECK(fp.dt == doctest::Approx(2.667).epsilon(1e-3));
  CHECK(fp.b == doctest::Approx(1.333).epsilon(1e-3));
  CHECK(preset_names().size() == 4);
  CHECK_THROWS_AS(preset("fig9"), std::invalid_argument);
}

TEST_CASE("config parsing") {
  const WorldConfig c = parse_config(R"({"preset": "fig2", "n": 16, "sigma": 0.75, "boundary": "free"})");
  CHECK(c.n == 16);
  CHECK(c.sigma == 0.75);
  CHECK_FALSE(c.periodic());
  CHECK_THROWS_WITH_AS(parse_config(R"({"sigmaa": 1})"), doctest::Contains("sigmaa"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"n": "many"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"n": 1.5})"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(R"({"epsilon": 41})"), doctest::Contains("epsilon"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[1, 2]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("{nope"), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), std::exception);
  // Round trip through JSON.
  const WorldConfig back = parse_config(to_json(c));
  CHECK(back.n == c.n);
  CHECK(back.sigma == c.sigma);
  CHECK(back.boundary == c.boundary);
  WorldConfig d = c;
  set_field(d, "controller", "planner");
  CHECK(d.controller == Controller::planner);
  CHECK_THROWS_AS(set_field(d, "bogus", "1"), std::invalid_argument);
}

TEST_CASE("axis parsing") {
  const Axis a = parse_axis("sigma=0:1:0.25");
  CHECK(a.name == "sigma");
  CHECK(a.values == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const Axis b = parse_axis("n=1,16,64");
  CHECK(b.values == std::vector<double>{1, 16, 64});
  const Axis c = parse_axis("sigma=0:3:0.1");
  CHECK(c.values.size() == 31);
  CHECK(c.values.back() == 3.0);
  CHECK(c.values[3] == 0.3);
  CHECK_THROWS_AS(parse_axis("sigma"), std::invalid_argument);
  CHECK_THROWS_AS(parse_axis("speed=1,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_axis("sigma=1:0:0.1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_axis("sigma=a,b"), std::invalid_argument);
}

TEST_CASE("default trial counts follow the variance split") {
  WorldConfig c = preset("fig2");
  c.n = 128;
  c.sigma = 2.0;
  CHECK(default_trials(c) == 50);
  c.n = 129;
  CHECK(default_trials(c) == 20);
  c.n = 64;
  c.sigma = 2.25;
  CHECK(default_trials(c) == 20);
}

TEST_CASE("csv format and round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2000.0) == "2000");
  CHECK(format_double(std::nan("")) == "nan");
  const auto recs = run_sweep(quick(3, {0.5, 1.0}, 2));
  const std::string text = csv_of(recs);
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  std::istringstream is(text);
  const auto rows = read_csv(is);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].preset == "fig2");
  CHECK(rows[1].sigma == 1.0);
  CHECK(rows[1].G == recs[1].G);
  CHECK(rows[1].G_stderr == recs[1].G_stderr);
  CHECK(rows[0].t_wc == 0.0);
  std::istringstream bad("n,G\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad), std::invalid_argument);
  CHECK_THROWS_AS(emit_csv(recs, "/nonexistent/dir/out.csv"), std::runtime_error);
  const auto path = std::filesystem::temp_directory_path() / "swarmgoal_harness.csv";
  emit_csv(recs, path.string());
  std::ifstream in(path);
  std::stringstream all;
  all << in.rdbuf();
  CHECK(all.str() == text);
  std::filesystem::remove(path);
}

TEST_CASE("invalid sweep points are rejected before running") {
  SweepSpec s = quick(3, {0.5}, 1);
  s.axes.push_back({"epsilon", {100.0}});
  CHECK_THROWS_AS(run_sweep(s), std::invalid_argument);
  SweepSpec w = quick(3, {0.5}, 1);
  w.workers = 0;
  CHECK_THROWS_AS(run_sweep(w), std::invalid_argument);
}

TEST_CASE("svg snapshot colors blocked agents") {
  WorldConfig c = preset("fig2");
  c.n = 30;
  c.L = 10.0;
  World w(c);
  for (int i = 0; i < 50; ++i) w.step();
  const std::string svg = render_svg(w);
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t circles = 0;
  for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1))
    ++circles;
  CHECK(circles == 30);
  int blocked = 0;
  for (const AgentState& a : w.agents()) blocked += a.blocked;
  std::size_t red = 0;
  for (std::size_t p = svg.find("#d62728"); p != std::string::npos; p = svg.find("#d62728", p + 1))
    ++red;
  CHECK(red == static_cast<std::size_t>(blocked));
}

TEST_CASE("small controller comparison") {
  CompareSpec s = CompareSpec::fig4();
  s.n_values = {1, 4};
  s.sigmas = {0.5, 1.0};
  s.trials = 1;
  s.record_timing = false;
  s.validate_plans = true;
  for (WorldConfig* c : {&s.constant_base, &s.conditional_base, &s.planner_base}) c->trial_time = 300.0;
  const Comparison cmp = compare_controllers(s);
  REQUIRE(cmp.rows.size() == 2);
  CHECK(cmp.records.size() == 8);
  CHECK(cmp.plan_violations == 0);
  CHECK(cmp.rows[0].winner_wc == "n/a");
  CHECK(cmp.records[0].config.controller == Controller::constant_noise);
  CHECK(cmp.records[0].config.b == 0.5);
  CHECK(cmp.records[2].config.controller == Controller::conditional_noise);
  CHECK(cmp.records[3].config.controller == Controller::planner);
  std::ostringstream os;
  write_comparison_csv(os, cmp);
  CHECK(os.str().find(kCompareHeader) != std::string::npos);
}

TEST_SUITE("properties") {
  TEST_CASE("trial seeds derive from base, point and trial") {
    CHECK(trial_seed(1, 0, 0) == derive_seed(1, 0, 0));
    const auto recs = run_sweep(quick(2, {0.5, 1.0}, 3));
    for (const RunRecord& r : recs)
      for (const TrialRecord& t : r.per_trial)
        CHECK(t.seed == trial_seed(1, static_cast<std::uint64_t>(r.point),
                                   static_cast<std::uint64_t>(t.trial)));
    CHECK(trial_seed(1, 0, 1) != trial_seed(1, 1, 0));
  }

  TEST_CASE("standard error is stddev / sqrt(trials)") {
    const auto recs = run_sweep(quick(6, {1.0}, 7));
    const RunRecord& r = recs[0];
    double mean = 0.0;
    for (const TrialRecord& t : r.per_trial) mean += t.G;
    mean /= 7.0;
    double ss = 0.0;
    for (const TrialRecord& t : r.per_trial) ss += (t.G - mean) * (t.G - mean);
    CHECK(r.G == doctest::Approx(mean).epsilon(1e-14));
    CHECK(r.G_stderr == doctest::Approx(std::sqrt(ss / 6.0) / std::sqrt(7.0)).epsilon(1e-12));
    CHECK(r.G_stderr > 0.0);
  }

  TEST_CASE("results do not depend on the worker count") {
    SweepSpec one = quick(8, {0.5, 1.0, 1.5}, 3);
    SweepSpec four = one;
    four.workers = 4;
    CHECK(csv_of(run_sweep(one)) == csv_of(run_sweep(four)));
  }

  TEST_CASE("timing covers the stepping loop") {
    SweepSpec s = quick(4, {1.0}, 2);
    s.record_timing = true;
    const auto recs = run_sweep(s);
    for (const TrialRecord& t : recs[0].per_trial) {
      CHECK(t.wall_clock_seconds > 0.0);
      CHECK(t.simulated_seconds == doctest::Approx(100.0));
    }
    CHECK(recs[0].twc_over_tsim == doctest::Approx(recs[0].t_wc / recs[0].t_sim));
  }
}
