#include "swarmgoal/swarmgoal.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "swarmgoal/config.hpp"
#include "swarmgoal/dynamics.hpp"
#include "swarmgoal/optimizer.hpp"
#include "swarmgoal/planner.hpp"
#include "swarmgoal/sweep.hpp"
#include "swarmgoal/theory.hpp"

struct sg_config {
  swarmgoal::WorldConfig cfg;
};

struct sg_sweep {
  swarmgoal::harness::SweepSpec spec;
};

namespace {

thread_local std::string g_last_error;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

sg_status fail(sg_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <class F>
sg_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SG_OK;
  } catch (const swarmgoal::optimizer::NoOptimum& e) {
    return fail(SG_ERR_NO_OPTIMUM, e.what());
  } catch (const swarmgoal::theory::SolverFailure& e) {
    return fail(SG_ERR_SOLVER, e.what());
  } catch (const swarmgoal::theory::Divergence& e) {
    return fail(SG_ERR_DIVERGENCE, e.what());
  } catch (const IoError& e) {
    return fail(SG_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(SG_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(SG_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(SG_ERR_RUNTIME, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(const void* p, const char* name) {
  if (!p) throw std::invalid_argument(std::string(name) + " must not be null");
}

swarmgoal::theory::TheoryParams to_params(const sg_theory_params& p) {
  return {p.n, p.sigma, p.L, p.r, p.gamma, p.b, p.v};
}

swarmgoal::planner::PlannerConfig planner_config(const sg_plan_spec& s) {
  swarmgoal::planner::PlannerConfig pc;
  pc.grid = swarmgoal::planner::GridSpec{s.L, s.cells, s.periodic != 0, {}};
  pc.cone = swarmgoal::ConeSpec{s.r, s.gamma};
  pc.v = s.v;
  pc.n = s.n;
  pc.seed = s.seed;
  pc.horizon_ticks = s.horizon;
  return pc;
}

}  // namespace

extern "C" {

const char* sg_last_error(void) { return g_last_error.c_str(); }

const char* sg_version(void) { return "1.0.0"; }

void sg_string_free(char* s) { std::free(s); }

sg_status sg_config_new_preset(const char* name, sg_config** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = new sg_config{swarmgoal::harness::preset(name)};
  });
}

sg_status sg_config_load(const char* path, sg_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    std::ifstream probe(path);
    if (!probe) throw IoError(std::string("cannot read config file '") + path + "'");
    *out = new sg_config{swarmgoal::harness::load_config(path)};
  });
}

sg_status sg_config_parse(const char* json_text, sg_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = new sg_config{swarmgoal::harness::parse_config(json_text)};
  });
}

sg_status sg_config_clone(const sg_config* cfg, sg_config** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = new sg_config{cfg->cfg};
  });
}

void sg_config_free(sg_config* cfg) { delete cfg; }

sg_status sg_config_set(sg_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    swarmgoal::harness::set_field(cfg->cfg, key, value);
  });
}

sg_status sg_config_get(const sg_config* cfg, const char* key, double* out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(out, "out");
    const auto& c = cfg->cfg;
    const std::string k = key;
    if (k == "L") *out = c.L;
    else if (k == "n") *out = c.n;
    else if (k == "sigma") *out = c.sigma;
    else if (k == "r") *out = c.r;
    else if (k == "gamma") *out = c.gamma;
    else if (k == "b") *out = c.b;
    else if (k == "v") *out = c.v;
    else if (k == "epsilon") *out = c.epsilon;
    else if (k == "dt") *out = c.dt;
    else if (k == "trial_time") *out = c.trial_time;
    else if (k == "turn_speed") *out = c.turn_speed;
    else if (k == "seed") *out = static_cast<double>(c.seed);
    else if (k == "measure_window_fraction") *out = c.measure_window_fraction;
    else if (k == "grid_cells") *out = c.grid_cells;
    else if (k == "boundary") *out = c.periodic() ? 0.0 : 1.0;
    else if (k == "controller") *out = static_cast<double>(c.controller);
    else throw std::invalid_argument("unknown key '" + k + "'");
  });
}

sg_status sg_config_validate(const sg_config* cfg) {
  return guarded([&] {
    require(cfg, "cfg");
    cfg->cfg.validate();
  });
}

sg_status sg_config_to_json(const sg_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup_string(swarmgoal::harness::to_json(cfg->cfg));
  });
}

const char* sg_preset_names(void) { return "fig2,fig3-match,fig4-local,fig4-planner"; }

sg_status sg_run_trial(const sg_config* cfg, int validate_plans, sg_trial_metrics* out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    swarmgoal::TrialOptions opts;
    opts.validate_plans = validate_plans != 0;
    const auto m = swarmgoal::run_trial(cfg->cfg, opts);
    out->total_goals = m.total_goals;
    out->window_goals = m.window_goals;
    out->window_duration = m.window_duration;
    out->G = m.G;
    out->blocked_fraction = m.blocked_fraction;
    out->collision_count = m.collision_count;
    out->wall_clock_seconds = m.wall_clock_seconds;
    out->simulated_seconds = m.simulated_seconds;
    out->max_goal_latency = m.max_goal_latency;
    out->plan_violations = m.plan_violations;
  });
}

sg_status sg_simulate_csv(const sg_config* cfg, int record_timing, char** csv_out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(csv_out, "csv_out");
    using namespace swarmgoal::harness;
    const auto m = swarmgoal::run_trial(cfg->cfg);
    RunRecord rec;
    rec.config = cfg->cfg;
    rec.trials = 1;
    TrialRecord t;
    t.ok = true;
    t.seed = cfg->cfg.seed;
    t.G = m.G;
    t.window_goals = m.window_goals;
    t.total_goals = m.total_goals;
    t.blocked_fraction = m.blocked_fraction;
    t.wall_clock_seconds = record_timing ? m.wall_clock_seconds : 0.0;
    t.simulated_seconds = m.simulated_seconds;
    rec.per_trial.push_back(t);
    aggregate(rec);
    std::ostringstream os;
    write_csv(os, {rec});
    *csv_out = dup_string(os.str());
  });
}

sg_status sg_write_svg_snapshots(const sg_config* cfg, int count, const char* prefix) {
  return guarded([&] {
    require(cfg, "cfg");
    require(prefix, "prefix");
    if (count < 1) throw std::invalid_argument("snapshot count must be >= 1");
    if (cfg->cfg.controller == swarmgoal::Controller::planner)
      throw std::invalid_argument("SVG snapshots are available for local controllers only");
    swarmgoal::World world(cfg->cfg);
    const std::int64_t total = cfg->cfg.total_ticks();
    for (int w = 0; w < count; ++w) {
      const std::int64_t due = count == 1 ? total : (total * w) / (count - 1);
      while (world.tick() < due) world.step();
      const std::string path = std::string(prefix) + "_" + std::to_string(w) + ".svg";
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write '" + path + "'");
      out << swarmgoal::harness::render_svg(world);
    }
  });
}

sg_status sg_sweep_new(const sg_config* base, sg_sweep** out) {
  return guarded([&] {
    require(base, "base");
    require(out, "out");
    auto* s = new sg_sweep;
    s->spec.base = base->cfg;
    *out = s;
  });
}

void sg_sweep_free(sg_sweep* sweep) { delete sweep; }

sg_status sg_sweep_add_axis(sg_sweep* sweep, const char* axis) {
  return guarded([&] {
    require(sweep, "sweep");
    require(axis, "axis");
    sweep->spec.axes.push_back(swarmgoal::harness::parse_axis(axis));
  });
}

sg_status sg_sweep_set_trials(sg_sweep* sweep, int trials) {
  return guarded([&] {
    require(sweep, "sweep");
    if (trials < 0) throw std::invalid_argument("trials must be >= 0");
    sweep->spec.trials = trials;
  });
}

sg_status sg_sweep_set_workers(sg_sweep* sweep, int workers) {
  return guarded([&] {
    require(sweep, "sweep");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    sweep->spec.workers = workers;
  });
}

sg_status sg_sweep_set_timing(sg_sweep* sweep, int record_timing) {
  return guarded([&] {
    require(sweep, "sweep");
    sweep->spec.record_timing = record_timing != 0;
  });
}

sg_status sg_sweep_run(sg_sweep* sweep, char** csv_out) {
  return guarded([&] {
    require(sweep, "sweep");
    require(csv_out, "csv_out");
    const auto recs = swarmgoal::harness::run_sweep(sweep->spec);
    std::ostringstream os;
    swarmgoal::harness::write_csv(os, recs);
    *csv_out = dup_string(os.str());
  });
}

sg_status sg_theory_params_from_config(const sg_config* cfg, sg_theory_params* out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    const auto& c = cfg->cfg;
    *out = {static_cast<double>(c.n), c.sigma, c.L, c.r, c.gamma, c.b, c.v};
  });
}

sg_status sg_theory_eval(const char* quantity, const sg_theory_params* p, double x,
                         double* out, int* defined) {
  return guarded([&] {
    require(quantity, "quantity");
    require(p, "params");
    require(out, "out");
    const auto v = swarmgoal::theory::evaluate(quantity, to_params(*p), x);
    if (defined) *defined = v.has_value() ? 1 : 0;
    *out = v.value_or(std::nan(""));
  });
}

sg_status sg_optimize(const sg_theory_params* p, int n_lo, int n_hi, int corrected,
                      sg_optimum* out, char** csv_out) {
  return guarded([&] {
    require(p, "params");
    require(out, "out");
    const auto params = to_params(*p);
    const auto rep =
        corrected ? swarmgoal::optimizer::optimize_team_corrected(params, n_lo, n_hi)
                  : swarmgoal::optimizer::optimize_team(params, n_lo, n_hi);
    out->n_opt = rep.n_opt;
    out->sigma_opt = rep.sigma_opt;
    out->G_opt = rep.G_opt;
    if (csv_out) {
      std::ostringstream os;
      os << "n,sigma_star,G\n";
      for (const auto& row : rep.table)
        os << row.n << ',' << swarmgoal::harness::format_double(row.sigma) << ','
           << swarmgoal::harness::format_double(row.G) << '\n';
      *csv_out = dup_string(os.str());
    }
  });
}

void sg_plan_spec_default(sg_plan_spec* spec) {
  if (!spec) return;
  spec->cells = 30;
  spec->L = 40.0;
  spec->periodic = 1;
  spec->r = 2.0;
  spec->gamma = 2.0 * swarmgoal::kPi / 3.0;
  spec->v = 0.5;
  spec->n = 16;
  spec->seed = 1;
  spec->ticks = 200;
  spec->horizon = 256;
}

sg_status sg_plan_run(const sg_plan_spec* spec, sg_plan_result* out, char** dump_out,
                      char** csv_out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    if (spec->ticks < 0) throw std::invalid_argument("ticks must be >= 0");
    using namespace swarmgoal::planner;
    const PlannerConfig pc = planner_config(*spec);
    PlannerWorld world(pc);
    std::vector<Cell> starts;
    for (int i = 0; i < world.n(); ++i) starts.push_back(world.position(i));
    std::int64_t failures = 0;
    std::vector<Path> paths;
    if (spec->ticks == 0) {
      failures += static_cast<std::int64_t>(world.step().plan_failures.size());
      for (int i = 0; i < world.n(); ++i) {
        Path p = world.reservations().plans()[i];
        p.start = starts[i];
        p.agent = i;
        paths.push_back(p);
      }
    } else {
      for (int k = 0; k < spec->ticks; ++k)
        failures += static_cast<std::int64_t>(world.step().plan_failures.size());
      paths = world.history();
    }
    out->violations =
        static_cast<std::int64_t>(validate_plans(paths, pc.grid, pc.cone).size());
    out->goals = 0;
    for (int i = 0; i < world.n(); ++i) out->goals += world.goals_reached(i);
    out->plan_failures = failures;
    out->max_goal_latency_ticks = world.max_goal_latency_ticks();
    if (dump_out) {
      std::ostringstream os;
      write_paths(os, paths);
      *dump_out = dup_string(os.str());
    }
    if (csv_out) {
      std::ostringstream os;
      os << "agent,start_x,start_y,end_x,end_y,steps,end_tick,goals\n";
      for (const Path& p : paths)
        os << p.agent << ',' << p.start.x << ',' << p.start.y << ',' << p.end_cell().x
           << ',' << p.end_cell().y << ',' << p.steps.size() << ',' << p.end_tick()
           << ',' << world.goals_reached(p.agent) << '\n';
      *csv_out = dup_string(os.str());
    }
  });
}

sg_status sg_plan_validate(const char* dump_text, const sg_plan_spec* grid,
                           int64_t* violations, char** report_out) {
  return guarded([&] {
    require(dump_text, "dump_text");
    require(grid, "grid");
    require(violations, "violations");
    using namespace swarmgoal::planner;
    std::istringstream is(dump_text);
    const auto paths = read_paths(is);
    const PlannerConfig pc = planner_config(*grid);
    const auto v = validate_plans(paths, pc.grid, pc.cone);
    *violations = static_cast<std::int64_t>(v.size());
    if (report_out) {
      std::ostringstream os;
      os << "kind,tick,agent,other,x,y\n";
      for (const auto& e : v)
        os << e.kind << ',' << e.tick << ',' << e.agent << ',' << e.other << ','
           << e.cell.x << ',' << e.cell.y << '\n';
      *report_out = dup_string(os.str());
    }
  });
}

sg_status sg_compare(const sg_compare_spec* spec, char** records_out, char** summary_out,
                     int64_t* plan_violations) {
  return guarded([&] {
    require(spec, "spec");
    using namespace swarmgoal::harness;
    CompareSpec cs = CompareSpec::fig4();
    if (spec->constant_base) cs.constant_base = spec->constant_base->cfg;
    if (spec->conditional_base) cs.conditional_base = spec->conditional_base->cfg;
    if (spec->planner_base) cs.planner_base = spec->planner_base->cfg;
    if (spec->n_values && spec->n_count)
      cs.n_values.assign(spec->n_values, spec->n_values + spec->n_count);
    if (spec->sigmas && spec->sigma_count)
      cs.sigmas.assign(spec->sigmas, spec->sigmas + spec->sigma_count);
    cs.trials = spec->trials;
    cs.workers = spec->workers < 1 ? 1 : spec->workers;
    cs.record_timing = spec->record_timing != 0;
    cs.validate_plans = spec->validate_plans != 0;
    const Comparison cmp = compare_controllers(cs);
    if (records_out) {
      std::ostringstream os;
      write_csv(os, cmp.records);
      *records_out = dup_string(os.str());
    }
    if (summary_out) {
      std::ostringstream os;
      write_comparison_csv(os, cmp);
      *summary_out = dup_string(os.str());
    }
    if (plan_violations) *plan_violations = cmp.plan_violations;
  });
}

}  // extern "C"
