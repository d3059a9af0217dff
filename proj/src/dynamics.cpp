#include "swarmgoal/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "swarmgoal/planner.hpp"

namespace swarmgoal {

const char* to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "free";
}

const char* to_string(Controller c) {
  switch (c) {
    case Controller::constant_noise: return "constant_noise";
    case Controller::conditional_noise: return "conditional_noise";
    case Controller::planner: return "planner";
  }
  return "unknown";
}

std::int64_t WorldConfig::total_ticks() const {
  return std::llround(trial_time / dt);
}

std::int64_t WorldConfig::window_start_tick() const {
  const std::int64_t total = total_ticks();
  const auto window = std::llround(static_cast<double>(total) *
                                   measure_window_fraction);
  return total - std::max<std::int64_t>(1, window);
}

void WorldConfig::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(L, "L");
  positive(r, "r");
  positive(b, "b");
  positive(v, "v");
  positive(epsilon, "epsilon");
  positive(dt, "dt");
  positive(trial_time, "trial_time");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("sigma must be >= 0");
  if (!(gamma > 0.0) || gamma > kTwoPi)
    throw std::invalid_argument("gamma must lie in (0, 2pi]");
  if (!(epsilon < L)) throw std::invalid_argument("epsilon must be < L");
  if (!(turn_speed >= 0.0) || !std::isfinite(turn_speed))
    throw std::invalid_argument("turn_speed must be >= 0");
  if (!(measure_window_fraction > 0.0) || measure_window_fraction > 1.0)
    throw std::invalid_argument("measure_window_fraction must lie in (0, 1]");
  if (total_ticks() < 1)
    throw std::invalid_argument("trial_time must cover at least one dt");
  if (controller == Controller::planner) {
    if (grid_cells < 1) throw std::invalid_argument("grid_cells must be >= 1");
    if (n > grid_cells * grid_cells)
      throw std::invalid_argument("n exceeds the number of grid cells");
  }
}

double headon_metric(double goal_angle_i, double goal_angle_j,
                     double bearing_ij, double bearing_ji) {
  return std::hypot(angle_diff(goal_angle_i, bearing_ij),
                    angle_diff(goal_angle_j, bearing_ji));
}

// --- NeighborView ---------------------------------------------------------

NeighborView::NeighborView(double L, bool periodic, double r)
    : L_(L), periodic_(periodic), r_(r) {}

int NeighborView::bin_of(Point2 p, int& bx, int& by) const {
  bx = static_cast<int>(std::floor((p.x - origin_x_) / bin_size_));
  by = static_cast<int>(std::floor((p.y - origin_y_) / bin_size_));
  bx = std::clamp(bx, 0, nbx_ - 1);
  by = std::clamp(by, 0, nby_ - 1);
  return by * nbx_ + bx;
}

void NeighborView::rebuild(std::span<const AgentState> agents) {
  positions_.resize(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i)
    positions_[i] = agents[i].pose.position;

  if (periodic_) {
    const int nb = std::max(1, static_cast<int>(std::floor(L_ / r_)));
    nbx_ = nby_ = nb;
    bin_size_ = L_ / nb;
    origin_x_ = origin_y_ = 0.0;
  } else {
    double lo_x = 0.0, lo_y = 0.0, hi_x = L_, hi_y = L_;
    for (const auto& p : positions_) {
      lo_x = std::min(lo_x, p.x);
      lo_y = std::min(lo_y, p.y);
      hi_x = std::max(hi_x, p.x);
      hi_y = std::max(hi_y, p.y);
    }
    bin_size_ = r_;
    // Keep the table bounded when agents wander far outside the arena.
    const double cap = 4.0 * static_cast<double>(positions_.size()) + 64.0;
    while (std::ceil((hi_x - lo_x) / bin_size_ + 1.0) *
               std::ceil((hi_y - lo_y) / bin_size_ + 1.0) > cap)
      bin_size_ *= 2.0;
    origin_x_ = lo_x;
    origin_y_ = lo_y;
    nbx_ = static_cast<int>(std::ceil((hi_x - lo_x) / bin_size_)) + 1;
    nby_ = static_cast<int>(std::ceil((hi_y - lo_y) / bin_size_)) + 1;
  }

  head_.assign(static_cast<std::size_t>(nbx_) * nby_, -1);
  next_.assign(positions_.size(), -1);
  // Insert in reverse so each bin lists agents in ascending id order.
  for (int i = static_cast<int>(positions_.size()) - 1; i >= 0; --i) {
    int bx, by;
    const int bin = bin_of(positions_[i], bx, by);
    next_[i] = head_[bin];
    head_[bin] = i;
  }
}

int NeighborView::blocker(const Pose& observer, int self,
                          const ConeSpec& cone) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  const double r2 = cone.radius * cone.radius;

  auto consider = [&](int j) {
    if (j == self) return;
    const Vec2 d = torus_delta(observer.position, positions_[j], L_, periodic_);
    const double d2 = d.dot(d);
    if (d2 > r2) return;
    if (d2 > best_d2 || (d2 == best_d2 && j > best)) return;
    if (d2 > 0.0 && cone.angle < kTwoPi &&
        std::abs(angle_diff(d.angle(), observer.heading)) > cone.half_angle())
      return;
    best = j;
    best_d2 = d2;
  };

  // Fall back to a full scan when the bins cannot separate 3x3 neighborhoods
  // or the cone reaches past one bin.
  if ((periodic_ && nbx_ < 3) || cone.radius > bin_size_) {
    for (int j = 0; j < static_cast<int>(positions_.size()); ++j) consider(j);
    return best;
  }

  int bx, by;
  bin_of(observer.position, bx, by);
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      int x = bx + dx, y = by + dy;
      if (periodic_) {
        x = (x + nbx_) % nbx_;
        y = (y + nby_) % nby_;
      } else if (x < 0 || y < 0 || x >= nbx_ || y >= nby_) {
        continue;
      }
      for (int j = head_[y * nbx_ + x]; j >= 0; j = next_[j]) consider(j);
    }
  }
  return best;
}

// --- controllers ----------------------------------------------------------

double goal_angle(const AgentState& a, const WorldConfig& cfg) {
  return torus_delta(a.pose.position, a.goal, cfg.L, cfg.periodic()).angle();
}

Point2 draw_goal(Rng& goal_rng, double L) {
  return {goal_rng.uniform(0.0, L), goal_rng.uniform(0.0, L)};
}

namespace {

enum class Policy { constant, conditional };

void begin_turn(AgentState& a, double travel_angle, const WorldConfig& cfg) {
  if (!cfg.finite_turn()) {
    a.pose.heading = travel_angle;
    return;
  }
  a.turn_target = travel_angle;
  const double gap = std::abs(angle_diff(travel_angle, a.pose.heading));
  a.turning_remaining = gap / cfg.turn_speed;
  if (a.turning_remaining <= 0.0) a.pose.heading = travel_angle;
}

UpdateResult update(Policy policy, AgentState& a, int self,
                    const NeighborView& view, const WorldConfig& cfg,
                    Rng& goal_rng, double now) {
  UpdateResult out;
  const ConeSpec cone = cfg.cone();

  if (torus_distance(a.pose.position, a.goal, cfg.L, cfg.periodic()) <=
      cfg.epsilon) {
    ++a.goals_reached;
    a.goal = draw_goal(goal_rng, cfg.L);
    a.goal_assigned_at = now;
    a.step.remaining = 0.0;
    a.turning_remaining = 0.0;
    out.reached_goal = true;
  }

  if (a.turning_remaining <= 0.0 && a.step.remaining <= 0.0) {
    const double toward = goal_angle(a, cfg);
    if (policy == Policy::constant) {
      a.step = sample_step(a.rng, toward, cfg.sigma, cfg.b, cfg.v);
    } else {
      const double mean = cfg.b / cfg.v;
      a.step.duration = a.rng.uniform(0.5 * mean, 1.5 * mean);
      a.step.remaining = a.step.duration;
      const bool blocked_now = view.blocker(a.pose, self, cone) >= 0;
      a.step.travel_angle =
          blocked_now ? wrap_angle(a.rng.uniform(-kPi, kPi)) : toward;
    }
    begin_turn(a, a.step.travel_angle, cfg);
  }

  if (a.turning_remaining > 0.0) {
    // Rotating in place; the step clock waits until the turn is done.
    const double max_turn = cfg.turn_speed * cfg.dt;
    const double gap = angle_diff(a.turn_target, a.pose.heading);
    if (std::abs(gap) <= max_turn) {
      a.pose.heading = a.turn_target;
      a.turning_remaining = 0.0;
    } else {
      a.pose.heading = wrap_angle(a.pose.heading + std::copysign(max_turn, gap));
      a.turning_remaining =
          std::abs(angle_diff(a.turn_target, a.pose.heading)) / cfg.turn_speed;
    }
    a.blocker = view.blocker(a.pose, self, cone);
    a.blocked = a.blocker >= 0;
    out.speed = 0.0;
    return out;
  }

  a.blocker = view.blocker(a.pose, self, cone);
  a.blocked = a.blocker >= 0;
  out.speed = a.blocked ? 0.0 : cfg.v;
  a.step.remaining -= cfg.dt;
  return out;
}

}  // namespace

UpdateResult agent_update_constant(AgentState& a, int self,
                                   const NeighborView& view,
                                   const WorldConfig& cfg, Rng& goal_rng,
                                   double now) {
  return update(Policy::constant, a, self, view, cfg, goal_rng, now);
}

UpdateResult agent_update_conditional(AgentState& a, int self,
                                      const NeighborView& view,
                                      const WorldConfig& cfg, Rng& goal_rng,
                                      double now) {
  return update(Policy::conditional, a, self, view, cfg, goal_rng, now);
}

// --- World ----------------------------------------------------------------

World::World(const WorldConfig& cfg) : World(cfg, {}) {}

World::World(const WorldConfig& cfg, std::span<const InitialAgent> initial)
    : cfg_(cfg),
      view_(cfg.L, cfg.periodic(), cfg.r),
      goal_rng_(cfg.seed, kGoalStream) {
  cfg_.validate();
  if (cfg_.controller == Controller::planner)
    throw std::invalid_argument("World runs local controllers only");
  if (!initial.empty() && static_cast<int>(initial.size()) != cfg_.n)
    throw std::invalid_argument("initial agent list must have n entries");

  agents_.resize(cfg_.n);
  for (int i = 0; i < cfg_.n; ++i) {
    AgentState& a = agents_[i];
    a.rng = Rng(cfg_.seed, static_cast<std::uint64_t>(i) + 1);
    if (initial.empty()) {
      a.pose.position = draw_goal(goal_rng_, cfg_.L);
      a.goal = draw_goal(goal_rng_, cfg_.L);
      a.pose.heading = wrap_angle(a.rng.uniform(-kPi, kPi));
    } else {
      a.pose.position = initial[i].position;
      a.goal = initial[i].goal;
      a.pose.heading = wrap_angle(initial[i].heading);
    }
    a.turn_target = a.pose.heading;
  }
  speed_.assign(cfg_.n, 0.0);
  was_blocked_.assign(cfg_.n, 0);
  open_.assign(cfg_.n, CollisionEvent{});
}

void World::open_collision(int i, double now) {
  const AgentState& a = agents_[i];
  const int j = a.blocker;
  CollisionEvent& e = open_[i];
  e = CollisionEvent{};
  e.agent = i;
  e.other = j;
  e.start = now;
  e.goal_angle_self = goal_angle(a, cfg_);
  e.goal_angle_other = goal_angle(agents_[j], cfg_);
  const Point2 pi = view_.position(i);
  const Point2 pj = view_.position(j);
  e.bearing_self_other = torus_delta(pi, pj, cfg_.L, cfg_.periodic()).angle();
  e.bearing_other_self = torus_delta(pj, pi, cfg_.L, cfg_.periodic()).angle();
  e.h = headon_metric(e.goal_angle_self, e.goal_angle_other,
                      e.bearing_self_other, e.bearing_other_self);
  ++collision_count_;
  events_.collisions_started.push_back(i);
}

void World::close_collision(int i, double now) {
  CollisionEvent& e = open_[i];
  e.end = now;
  if (record_collisions_) collisions_.push_back(e);
  events_.collisions_ended.push_back(i);
}

const StepEvents& World::step() {
  const double now = time();
  events_.clear();
  view_.rebuild(agents_);

  const bool conditional = cfg_.controller == Controller::conditional_noise;
  for (int i = 0; i < cfg_.n; ++i) {
    AgentState& a = agents_[i];
    const UpdateResult res =
        conditional
            ? agent_update_conditional(a, i, view_, cfg_, goal_rng_, now)
            : agent_update_constant(a, i, view_, cfg_, goal_rng_, now);
    speed_[i] = res.speed;
    if (res.reached_goal) events_.goals.push_back({i, now});
  }

  for (int i = 0; i < cfg_.n; ++i) {
    const bool blocked = agents_[i].blocked;
    if (blocked && !was_blocked_[i])
      open_collision(i, now);
    else if (!blocked && was_blocked_[i])
      close_collision(i, now);
    was_blocked_[i] = blocked ? 1 : 0;
  }

  for (int i = 0; i < cfg_.n; ++i) {
    if (speed_[i] <= 0.0) continue;
    AgentState& a = agents_[i];
    const double travel = speed_[i] * cfg_.dt;
    const Point2 p0 = a.pose.position;
    const Point2 p1 = p0 + unit(a.pose.heading) * travel;
    const auto hit = segment_disk_hit_fraction(p0, p1, a.goal, cfg_.epsilon,
                                               cfg_.L, cfg_.periodic());
    if (hit) {
      a.pose.position = p0 + (p1 - p0) * *hit;
      a.odometer += travel * *hit;
      ++a.goals_reached;
      const double t_hit = now + cfg_.dt * *hit;
      events_.goals.push_back({i, t_hit});
      a.goal = draw_goal(goal_rng_, cfg_.L);
      a.goal_assigned_at = t_hit;
      a.step.remaining = 0.0;
      a.turning_remaining = 0.0;
    } else {
      a.pose.position = p1;
      a.odometer += travel;
    }
    if (cfg_.periodic()) a.pose.position = wrap_point(a.pose.position, cfg_.L);
  }

  ++tick_;
  return events_;
}

// --- trials ---------------------------------------------------------------

namespace {

TrialMetrics run_local_trial(const WorldConfig& cfg, const TrialOptions& opts) {
  World world(cfg);
  world.set_record_collisions(opts.record_collisions);
  const std::int64_t total = cfg.total_ticks();
  const std::int64_t window_start = cfg.window_start_tick();

  TrialMetrics m;
  std::vector<double> assigned(cfg.n, 0.0);
  std::int64_t blocked_ticks = 0;

  const auto t0 = std::chrono::steady_clock::now();
  for (std::int64_t k = 0; k < total; ++k) {
    const StepEvents& ev = world.step();
    for (const GoalEvent& g : ev.goals) {
      m.max_goal_latency = std::max(m.max_goal_latency, g.time - assigned[g.agent]);
      assigned[g.agent] = g.time;
    }
    m.total_goals += static_cast<std::int64_t>(ev.goals.size());
    if (k >= window_start) {
      m.window_goals += static_cast<std::int64_t>(ev.goals.size());
      for (const AgentState& a : world.agents()) blocked_ticks += a.blocked;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();

  m.simulated_seconds = static_cast<double>(total) * cfg.dt;
  m.wall_clock_seconds = std::chrono::duration<double>(t1 - t0).count();
  const std::int64_t window_ticks = total - window_start;
  m.window_duration = static_cast<double>(window_ticks) * cfg.dt;
  m.G = static_cast<double>(m.window_goals) / m.window_duration;
  m.blocked_fraction = static_cast<double>(blocked_ticks) /
                       (static_cast<double>(window_ticks) * cfg.n);
  m.collision_count = world.collision_count();
  m.collisions = world.collisions();
  for (const AgentState& a : world.agents()) {
    m.goals_per_agent.push_back(a.goals_reached);
  }
  for (int i = 0; i < cfg.n; ++i)
    m.max_goal_latency =
        std::max(m.max_goal_latency, m.simulated_seconds - assigned[i]);
  return m;
}

}  // namespace

TrialMetrics run_trial(const WorldConfig& cfg, const TrialOptions& opts) {
  cfg.validate();
  if (cfg.controller == Controller::planner) return run_planner_trial(cfg, opts.validate_plans);
  return run_local_trial(cfg, opts);
}

}  // namespace swarmgoal
