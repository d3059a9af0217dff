#include "swarmgoal/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "swarmgoal/config.hpp"

namespace swarmgoal::harness {

namespace {

double parse_number(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

struct Job {
  int point;
  int trial;
};

// Runs every (point, trial) pair on a pool; each result lands in a fixed
// slot, so the output does not depend on the worker count.
std::vector<RunRecord> run_points(const std::vector<WorldConfig>& configs,
                                  const std::vector<int>& trials, int workers,
                                  bool record_timing, bool validate_plans,
                                  const ProgressFn& progress) {
  std::vector<RunRecord> recs(configs.size());
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < configs.size(); ++p) {
    recs[p].config = configs[p];
    recs[p].point = static_cast<int>(p);
    recs[p].trials = trials[p];
    recs[p].per_trial.resize(trials[p]);
    for (int t = 0; t < trials[p]; ++t) jobs.push_back({static_cast<int>(p), t});
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mu;
  const int total = static_cast<int>(jobs.size());
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const Job job = jobs[k];
      RunRecord& rec = recs[job.point];
      TrialRecord& tr = rec.per_trial[job.trial];
      tr.trial = job.trial;
      tr.seed = trial_seed(rec.config.seed, static_cast<std::uint64_t>(job.point),
                           static_cast<std::uint64_t>(job.trial));
      WorldConfig cfg = rec.config;
      cfg.seed = tr.seed;
      try {
        TrialOptions opts;
        opts.validate_plans = validate_plans;
        const TrialMetrics m = run_trial(cfg, opts);
        tr.ok = true;
        tr.G = m.G;
        tr.window_goals = m.window_goals;
        tr.total_goals = m.total_goals;
        tr.blocked_fraction = m.blocked_fraction;
        tr.wall_clock_seconds = record_timing ? m.wall_clock_seconds : 0.0;
        tr.simulated_seconds = m.simulated_seconds;
        tr.plan_violations = m.plan_violations;
        tr.max_goal_latency = m.max_goal_latency;
      } catch (const std::exception& e) {
        tr.ok = false;
        tr.error = e.what();
      }
      const int d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mu);
        progress(d, total);
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& r : recs) aggregate(r);
  return recs;
}

}  // namespace

Axis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("axis must look like name=values: '" + text + "'");
  Axis a;
  a.name = text.substr(0, eq);
  const std::string rest = text.substr(eq + 1);
  const auto& names = field_names();
  if (std::find(names.begin(), names.end(), a.name) == names.end() ||
      a.name == "boundary" || a.name == "controller")
    throw std::invalid_argument("axis '" + a.name + "' is not a numeric config field");
  if (rest.find(':') != std::string::npos) {
    const auto parts = split(rest, ':');
    if (parts.size() != 3) throw std::invalid_argument("range axis needs lo:hi:step");
    const double lo = parse_number(parts[0]);
    const double hi = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad axis range");
    const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    if (count > 100000) throw std::invalid_argument("axis range too long");
    for (long long i = 0; i <= count; ++i) {
      // Round away representation noise from lo + i * step.
      const double v = std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12;
      a.values.push_back(v);
    }
  } else {
    for (const auto& p : split(rest, ',')) a.values.push_back(parse_number(p));
  }
  if (a.values.empty()) throw std::invalid_argument("axis '" + a.name + "' has no values");
  return a;
}

void SweepSpec::validate() const {
  base.validate();
  if (trials < 0) throw std::invalid_argument("trials must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  for (const Axis& a : axes) {
    if (a.values.empty()) throw std::invalid_argument("axis '" + a.name + "' is empty");
    WorldConfig probe = base;
    set_numeric_field(probe, a.name, a.values.front());
  }
}

int default_trials(const WorldConfig& cfg) {
  return (cfg.n <= 128 && cfg.sigma <= 2.0) ? 50 : 20;
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t point,
                         std::uint64_t trial) {
  return derive_seed(base, point, trial);
}

void aggregate(RunRecord& rec) {
  int ok = 0;
  double sum_g = 0.0;
  double sum_goals = 0.0;
  double sum_total = 0.0;
  double sum_blocked = 0.0;
  double sum_wc = 0.0;
  double sum_sim = 0.0;
  for (const TrialRecord& t : rec.per_trial) {
    if (!t.ok) continue;
    ++ok;
    sum_g += t.G;
    sum_goals += static_cast<double>(t.window_goals);
    sum_total += static_cast<double>(t.total_goals);
    sum_blocked += t.blocked_fraction;
    sum_wc += t.wall_clock_seconds;
    sum_sim += t.simulated_seconds;
  }
  rec.failures = static_cast<int>(rec.per_trial.size()) - ok;
  if (ok == 0) {
    const double nan = std::nan("");
    rec.goals = rec.G = rec.G_stderr = rec.blocked_frac = nan;
    rec.t_wc = rec.t_sim = rec.twc_over_tsim = rec.total_goals = nan;
    return;
  }
  const double k = ok;
  rec.G = sum_g / k;
  rec.goals = sum_goals / k;
  rec.total_goals = sum_total / k;
  rec.blocked_frac = sum_blocked / k;
  rec.t_wc = sum_wc / k;
  rec.t_sim = sum_sim / k;
  rec.twc_over_tsim = rec.t_sim > 0.0 ? rec.t_wc / rec.t_sim : 0.0;
  double ss = 0.0;
  for (const TrialRecord& t : rec.per_trial)
    if (t.ok) ss += (t.G - rec.G) * (t.G - rec.G);
  rec.G_stderr = ok > 1 ? std::sqrt(ss / (k - 1.0)) / std::sqrt(k) : 0.0;
}

std::vector<RunRecord> run_sweep(const SweepSpec& spec, const ProgressFn& progress) {
  spec.validate();
  std::vector<WorldConfig> configs{spec.base};
  for (const Axis& a : spec.axes) {
    std::vector<WorldConfig> next;
    next.reserve(configs.size() * a.values.size());
    for (const WorldConfig& c : configs)
      for (double v : a.values) {
        WorldConfig d = c;
        set_numeric_field(d, a.name, v);
        next.push_back(d);
      }
    configs = std::move(next);
  }
  std::vector<int> trials;
  for (const WorldConfig& c : configs) {
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("sweep point invalid: ") + e.what());
    }
    trials.push_back(spec.trials > 0 ? spec.trials : default_trials(c));
  }
  return run_points(configs, trials, spec.workers, spec.record_timing,
                    spec.validate_plans, progress);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << kCsvHeader << '\n';
  for (const RunRecord& r : records) {
    const WorldConfig& c = r.config;
    os << c.preset << ',' << c.n << ',' << format_double(c.sigma) << ','
       << to_string(c.controller) << ',' << c.seed << ',' << format_double(r.goals)
       << ',' << format_double(r.G) << ',' << format_double(r.G_stderr) << ','
       << format_double(r.blocked_frac) << ',' << format_double(r.t_wc) << ','
       << format_double(r.t_sim) << ',' << format_double(r.twc_over_tsim) << '\n';
  }
}

void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, records);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<CsvRow> read_csv(std::istream& is) {
  std::vector<CsvRow> rows;
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw std::invalid_argument("missing or unexpected CSV header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 12) throw std::invalid_argument("CSV row has wrong field count");
    CsvRow r;
    r.preset = f[0];
    r.n = static_cast<int>(parse_number(f[1]));
    r.sigma = parse_number(f[2]);
    r.controller = f[3];
    {
      const auto res = std::from_chars(f[4].data(), f[4].data() + f[4].size(), r.seed);
      if (res.ec != std::errc()) throw std::invalid_argument("bad seed field");
    }
    auto num = [](const std::string& s) {
      if (s == "nan") return std::nan("");
      return parse_number(s);
    };
    r.goals = num(f[5]);
    r.G = num(f[6]);
    r.G_stderr = num(f[7]);
    r.blocked_frac = num(f[8]);
    r.t_wc = num(f[9]);
    r.t_sim = num(f[10]);
    r.twc_over_tsim = num(f[11]);
    rows.push_back(r);
  }
  return rows;
}

CompareSpec CompareSpec::fig4() {
  CompareSpec s;
  // Constant noise keeps the short fig2 steps its approximations assume.
  s.constant_base = preset("fig2");
  s.constant_base.controller = Controller::constant_noise;
  s.conditional_base = preset("fig4-local");
  s.planner_base = preset("fig4-planner");
  return s;
}

namespace {

ControllerScore score_of(const RunRecord& r) {
  ControllerScore s;
  s.G = r.G;
  s.G_stderr = r.G_stderr;
  s.sigma = r.config.sigma;
  s.goals_per_wc = r.t_wc > 0.0 ? r.total_goals / r.t_wc : 0.0;
  s.twc_over_tsim = r.twc_over_tsim;
  return s;
}

std::string winner(double constant, double conditional, double planner) {
  if (!(constant > 0.0) && !(conditional > 0.0) && !(planner > 0.0)) return "none";
  if (planner >= conditional && planner >= constant) return "planner";
  if (conditional >= constant) return "conditional_noise";
  return "constant_noise";
}

}  // namespace

Comparison compare_controllers(const CompareSpec& spec, const ProgressFn& progress) {
  if (spec.n_values.empty()) throw std::invalid_argument("compare needs at least one n");
  if (spec.sigmas.empty()) throw std::invalid_argument("compare needs at least one sigma");
  if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
  WorldConfig cst = spec.constant_base;
  cst.controller = Controller::constant_noise;
  WorldConfig cnd = spec.conditional_base;
  cnd.controller = Controller::conditional_noise;
  WorldConfig pln = spec.planner_base;
  pln.controller = Controller::planner;

  std::vector<WorldConfig> configs;
  for (int n : spec.n_values) {
    for (double s : spec.sigmas) {
      WorldConfig c = cst;
      c.n = n;
      c.sigma = s;
      configs.push_back(c);
    }
    WorldConfig c = cnd;
    c.n = n;
    configs.push_back(c);
    WorldConfig p = pln;
    p.n = n;
    configs.push_back(p);
  }
  for (const WorldConfig& c : configs) c.validate();
  const std::vector<int> trials(configs.size(), spec.trials);

  Comparison cmp;
  cmp.records = run_points(configs, trials, spec.workers, spec.record_timing,
                           spec.validate_plans, progress);
  const std::size_t per_n = spec.sigmas.size() + 2;
  for (std::size_t k = 0; k < spec.n_values.size(); ++k) {
    ComparisonRow row;
    row.n = spec.n_values[k];
    const std::size_t base = k * per_n;
    double best_gpwc = 0.0;
    for (std::size_t i = 0; i < spec.sigmas.size(); ++i) {
      const RunRecord& r = cmp.records[base + i];
      const ControllerScore s = score_of(r);
      if (i == 0 || s.G > row.constant.G) row.constant = s;
      best_gpwc = std::max(best_gpwc, s.goals_per_wc);
    }
    row.constant.goals_per_wc = best_gpwc;
    row.conditional = score_of(cmp.records[base + spec.sigmas.size()]);
    const RunRecord& pr = cmp.records[base + spec.sigmas.size() + 1];
    row.planner = score_of(pr);
    for (const TrialRecord& t : pr.per_trial)
      if (t.plan_violations > 0) cmp.plan_violations += t.plan_violations;
    row.winner_G = winner(row.constant.G, row.conditional.G, row.planner.G);
    row.winner_wc = spec.record_timing
                        ? winner(row.constant.goals_per_wc, row.conditional.goals_per_wc,
                                 row.planner.goals_per_wc)
                        : "n/a";
    cmp.rows.push_back(row);
  }
  return cmp;
}

void write_comparison_csv(std::ostream& os, const Comparison& cmp) {
  os << kCompareNote << '\n' << kCompareHeader << '\n';
  for (const ComparisonRow& r : cmp.rows) {
    os << r.n << ',' << format_double(r.constant.G) << ','
       << format_double(r.constant.sigma) << ',' << format_double(r.conditional.G)
       << ',' << format_double(r.planner.G) << ','
       << format_double(r.constant.goals_per_wc) << ','
       << format_double(r.conditional.goals_per_wc) << ','
       << format_double(r.planner.goals_per_wc) << ',' << r.winner_G << ','
       << r.winner_wc << '\n';
  }
}

std::string render_svg(const World& world) {
  const WorldConfig& cfg = world.config();
  const double size = 600.0;
  const double scale = size / cfg.L;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
      << "\" height=\"" << size << "\" viewBox=\"0 0 " << size << ' ' << size
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  const double dot = std::max(1.5, 0.25 * cfg.r * scale);
  for (const AgentState& a : world.agents()) {
    Point2 p = a.pose.position;
    if (cfg.periodic()) p = wrap_point(p, cfg.L);
    const double x = p.x * scale;
    const double y = size - p.y * scale;
    const Vec2 h = unit(a.pose.heading) * (2.0 * dot);
    svg << "<circle cx=\"" << format_double(x) << "\" cy=\"" << format_double(y)
        << "\" r=\"" << format_double(dot) << "\" fill=\""
        << (a.blocked ? "#d62728" : "#1f77b4") << "\"/>"
        << "<line x1=\"" << format_double(x) << "\" y1=\"" << format_double(y)
        << "\" x2=\"" << format_double(x + h.x) << "\" y2=\"" << format_double(y - h.y)
        << "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace swarmgoal::harness
