#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swarmgoal/swarmgoal.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Failure {
  sg_status status;
  std::string message;
};

void check(sg_status s) {
  if (s != SG_OK) throw Failure{s, sg_last_error()};
}

struct ConfigDeleter {
  void operator()(sg_config* c) const { sg_config_free(c); }
};
using ConfigPtr = std::unique_ptr<sg_config, ConfigDeleter>;

struct StringDeleter {
  void operator()(char* s) const { sg_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct CommonOptions {
  std::string preset = "fig2";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& default_preset) {
  o.preset = default_preset;
  cmd->add_option("--preset", o.preset, "Base preset (fig2, fig3-match, fig4-local, fig4-planner)")
      ->capture_default_str();
  cmd->add_option("--config", o.config, "JSON config file (overrides --preset)");
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--set", o.sets, "Override a field, key=value (repeatable)");
  cmd->add_option("--out", o.out, "Output file (default: stdout)");
}

ConfigPtr build_config(const CommonOptions& o) {
  sg_config* raw = nullptr;
  if (!o.config.empty())
    check(sg_config_load(o.config.c_str(), &raw));
  else
    check(sg_config_new_preset(o.preset.c_str(), &raw));
  ConfigPtr cfg(raw);
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Failure{SG_ERR_INVALID_ARGUMENT, "--set expects key=value, got '" + kv + "'"};
    check(sg_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (o.seed) check(sg_config_set(cfg.get(), "seed", std::to_string(*o.seed).c_str()));
  check(sg_config_validate(cfg.get()));
  return cfg;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{SG_ERR_IO, "cannot write '" + path + "'"};
  out << text;
  out.flush();
  if (!out) throw Failure{SG_ERR_IO, "write failed for '" + path + "'"};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{SG_ERR_IO, "cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-seeking swarm simulator, theory evaluator and planner"};
  app.require_subcommand(1);

  // simulate
  CommonOptions sim;
  int svg_count = 0;
  std::string svg_prefix = "snapshot";
  bool sim_no_timing = false;
  auto* simulate = app.add_subcommand("simulate", "Run one trial and print its CSV row");
  add_common(simulate, sim, "fig2");
  simulate->add_option("--svg-snapshots", svg_count, "Write N SVG snapshots over the trial");
  simulate->add_option("--svg-prefix", svg_prefix, "Path prefix for SVG snapshots")
      ->capture_default_str();
  simulate->add_flag("--no-timing", sim_no_timing, "Write wall-clock columns as 0");

  // sweep
  CommonOptions sw;
  std::vector<std::string> axes;
  int trials = 0;
  int workers = 1;
  bool sw_no_timing = false;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid and write aggregated CSV");
  add_common(sweep, sw, "fig2");
  sweep->add_option("--axis", axes, "name=v1,v2 or name=lo:hi:step (repeatable)");
  sweep->add_option("--trials", trials, "Trials per point (0: 50/20 default)");
  sweep->add_option("--workers", workers, "Worker threads")->capture_default_str();
  sweep->add_flag("--no-timing", sw_no_timing, "Write wall-clock columns as 0");

  // theory
  CommonOptions th;
  std::vector<std::string> quantities;
  double x = 0.0;
  auto* theory = app.add_subcommand("theory", "Evaluate closed-form approximations");
  add_common(theory, th, "fig2");
  theory->add_option("--quantity", quantities, "Quantity name (repeatable; default: all)");
  theory->add_option("--x", x, "Distance argument for cdf/pdf");

  // optimize
  CommonOptions op;
  int n_min = 1;
  int n_max = 256;
  bool corrected = false;
  auto* optimize = app.add_subcommand("optimize", "Scan G(n, sigma*(n)) and report the optimum");
  add_common(optimize, op, "fig2");
  optimize->add_option("--n-min", n_min)->capture_default_str();
  optimize->add_option("--n-max", n_max)->capture_default_str();
  optimize->add_flag("--corrected", corrected, "Use the corrected critical noise");

  // plan
  sg_plan_spec plan_spec;
  sg_plan_spec_default(&plan_spec);
  std::string plan_out;
  std::string dump_path;
  std::string validate_path;
  std::optional<std::uint64_t> plan_seed;
  bool bounded = false;
  auto* plan = app.add_subcommand("plan", "Run a planner instance and validate it");
  plan->add_option("--cells", plan_spec.cells, "Cells per side")->capture_default_str();
  plan->add_option("--L", plan_spec.L, "Arena side length")->capture_default_str();
  plan->add_option("--n", plan_spec.n, "Agents")->capture_default_str();
  plan->add_option("--r", plan_spec.r, "Sensing radius")->capture_default_str();
  plan->add_option("--ticks", plan_spec.ticks,
                   "Lifelong half-unit ticks (0: one planning cycle)")
      ->capture_default_str();
  plan->add_option("--horizon", plan_spec.horizon, "A* horizon in ticks")->capture_default_str();
  plan->add_option("--seed", plan_seed, "Seed");
  plan->add_flag("--bounded", bounded, "Non-periodic grid");
  plan->add_option("--out", plan_out, "Per-agent CSV (default: stdout)");
  plan->add_option("--dump", dump_path, "Write the path dump here");
  plan->add_option("--validate", validate_path, "Validate an existing path dump instead");

  // compare
  CommonOptions cp;
  std::vector<int> n_values{1, 16, 64};
  std::vector<double> sigmas{0.5, 0.75, 1.0, 1.25, 1.5};
  int cmp_trials = 20;
  int cmp_workers = 1;
  std::optional<double> trial_time;
  std::string summary_path;
  bool cmp_no_timing = false;
  bool cmp_validate = false;
  auto* compare = app.add_subcommand("compare", "Constant noise vs conditional noise vs planner");
  add_common(compare, cp, "fig4-local");
  compare->add_option("--n", n_values, "Team sizes")->delimiter(',');
  compare->add_option("--sigma", sigmas, "Constant-noise sigma grid")->delimiter(',');
  compare->add_option("--trials", cmp_trials)->capture_default_str();
  compare->add_option("--workers", cmp_workers)->capture_default_str();
  compare->add_option("--trial-time", trial_time, "Override every controller's trial time");
  compare->add_option("--summary", summary_path, "Comparison table CSV (default: stderr)");
  compare->add_flag("--no-timing", cmp_no_timing, "Write wall-clock columns as 0");
  compare->add_flag("--validate-plans", cmp_validate, "Re-check planner histories");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*simulate) {
      ConfigPtr cfg = build_config(sim);
      char* csv = nullptr;
      check(sg_simulate_csv(cfg.get(), sim_no_timing ? 0 : 1, &csv));
      OwnedString owned(csv);
      write_output(sim.out, csv);
      if (svg_count > 0) check(sg_write_svg_snapshots(cfg.get(), svg_count, svg_prefix.c_str()));
    } else if (*sweep) {
      ConfigPtr cfg = build_config(sw);
      sg_sweep* raw = nullptr;
      check(sg_sweep_new(cfg.get(), &raw));
      std::unique_ptr<sg_sweep, void (*)(sg_sweep*)> s(raw, sg_sweep_free);
      for (const auto& a : axes) check(sg_sweep_add_axis(s.get(), a.c_str()));
      check(sg_sweep_set_trials(s.get(), trials));
      check(sg_sweep_set_workers(s.get(), workers));
      check(sg_sweep_set_timing(s.get(), sw_no_timing ? 0 : 1));
      char* csv = nullptr;
      check(sg_sweep_run(s.get(), &csv));
      OwnedString owned(csv);
      write_output(sw.out, csv);
    } else if (*theory) {
      ConfigPtr cfg = build_config(th);
      sg_theory_params p;
      check(sg_theory_params_from_config(cfg.get(), &p));
      if (quantities.empty())
        quantities = {"goal_distance", "cdf",        "pdf",        "extension",
                      "travel_time",   "collisions", "jam_time",   "attainment",
                      "entry_time",    "exit_time",  "exit_time_corrected",
                      "sigma_star",    "sigma_star_corrected"};
      std::ostringstream os;
      os << "quantity,n,sigma,x,value\n";
      for (const auto& q : quantities) {
        double v = 0.0;
        int defined = 0;
        const sg_status st = sg_theory_eval(q.c_str(), &p, x, &v, &defined);
        if (st == SG_ERR_DIVERGENCE) {
          os << q << ',' << fmt(p.n) << ',' << fmt(p.sigma) << ',' << fmt(x) << ",inf\n";
          continue;
        }
        check(st);
        os << q << ',' << fmt(p.n) << ',' << fmt(p.sigma) << ',' << fmt(x) << ','
           << (defined ? fmt(v) : std::string("none")) << '\n';
      }
      write_output(th.out, os.str());
    } else if (*optimize) {
      ConfigPtr cfg = build_config(op);
      sg_theory_params p;
      check(sg_theory_params_from_config(cfg.get(), &p));
      sg_optimum best;
      char* csv = nullptr;
      check(sg_optimize(&p, n_min, n_max, corrected ? 1 : 0, &best, &csv));
      OwnedString owned(csv);
      write_output(op.out, csv);
      std::cerr << "optimum n=" << best.n_opt << " sigma=" << fmt(best.sigma_opt)
                << " G=" << fmt(best.G_opt) << '\n';
    } else if (*plan) {
      if (plan_seed) plan_spec.seed = *plan_seed;
      plan_spec.periodic = bounded ? 0 : 1;
      if (!validate_path.empty()) {
        const std::string text = read_file(validate_path);
        std::int64_t violations = 0;
        char* report = nullptr;
        check(sg_plan_validate(text.c_str(), &plan_spec, &violations, &report));
        OwnedString owned(report);
        write_output(plan_out, report);
        std::cerr << "violations=" << violations << '\n';
        return violations == 0 ? kExitOk : kExitRuntime;
      }
      sg_plan_result res;
      char* dump = nullptr;
      char* csv = nullptr;
      check(sg_plan_run(&plan_spec, &res, &dump, &csv));
      OwnedString d(dump);
      OwnedString c(csv);
      if (!dump_path.empty()) write_output(dump_path, dump);
      write_output(plan_out, csv);
      std::cerr << "violations=" << res.violations << " goals=" << res.goals
                << " plan_failures=" << res.plan_failures
                << " max_goal_latency_ticks=" << res.max_goal_latency_ticks << '\n';
      if (res.violations != 0) return kExitRuntime;
    } else if (*compare) {
      ConfigPtr conditional = build_config(cp);
      CommonOptions base_opts = cp;
      base_opts.config.clear();
      base_opts.sets.clear();
      base_opts.preset = "fig2";
      ConfigPtr constant = build_config(base_opts);
      base_opts.preset = "fig4-planner";
      ConfigPtr planner = build_config(base_opts);
      if (trial_time) {
        const std::string t = fmt(*trial_time);
        for (sg_config* c : {constant.get(), conditional.get(), planner.get()})
          check(sg_config_set(c, "trial_time", t.c_str()));
      }
      sg_compare_spec spec{};
      spec.constant_base = constant.get();
      spec.conditional_base = conditional.get();
      spec.planner_base = planner.get();
      spec.n_values = n_values.data();
      spec.n_count = n_values.size();
      spec.sigmas = sigmas.data();
      spec.sigma_count = sigmas.size();
      spec.trials = cmp_trials;
      spec.workers = cmp_workers;
      spec.record_timing = cmp_no_timing ? 0 : 1;
      spec.validate_plans = cmp_validate ? 1 : 0;
      char* records = nullptr;
      char* summary = nullptr;
      std::int64_t violations = 0;
      check(sg_compare(&spec, &records, &summary, &violations));
      OwnedString r(records);
      OwnedString s(summary);
      write_output(cp.out, records);
      if (summary_path.empty())
        std::cerr << summary;
      else
        write_output(summary_path, summary);
      if (cmp_validate) std::cerr << "plan_violations=" << violations << '\n';
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.status == SG_ERR_INVALID_ARGUMENT ? kExitValidation : kExitRuntime;
  }
  return kExitOk;
}
