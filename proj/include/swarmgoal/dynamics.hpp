#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmgoal/geometry.hpp"
#include "swarmgoal/rng.hpp"

namespace swarmgoal {

enum class Boundary { periodic, free };
enum class Controller { constant_noise, conditional_noise, planner };

const char* to_string(Boundary b);
const char* to_string(Controller c);

/// Every knob of a trial. Defaults reproduce the fig2 preset.
struct WorldConfig {
  std::string preset = "custom";
  double L = 40.0;
  int n = 64;
  double sigma = 1.0;
  double r = 2.0;
  double gamma = 2.0 * kPi / 3.0;
  double b = 0.5;
  double v = 0.5;
  double epsilon = 0.6;
  double dt = 0.1;
  double trial_time = 8000.0;
  Boundary boundary = Boundary::periodic;
  // 0 means turns are instantaneous; otherwise rad/s.
  double turn_speed = 0.0;
  Controller controller = Controller::constant_noise;
  std::uint64_t seed = 1;
  double measure_window_fraction = 0.25;
  // Planner discretization: cells per side of the square grid.
  int grid_cells = 30;

  bool periodic() const { return boundary == Boundary::periodic; }
  bool finite_turn() const { return turn_speed > 0.0; }
  ConeSpec cone() const { return {r, gamma}; }
  std::int64_t total_ticks() const;
  std::int64_t window_start_tick() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct AgentState {
  Pose pose;
  Point2 goal;
  StepPlan step;
  bool blocked = false;
  int blocker = -1;
  // Heading target and time left while rotating in finite-turn mode.
  double turn_target = 0.0;
  double turning_remaining = 0.0;
  std::int64_t goals_reached = 0;
  double goal_assigned_at = 0.0;
  double odometer = 0.0;
  Rng rng;
};

struct CollisionEvent {
  int agent = -1;
  int other = -1;
  double start = 0.0;
  double end = -1.0;  // < start while still open
  double goal_angle_self = 0.0;
  double goal_angle_other = 0.0;
  double bearing_self_other = 0.0;
  double bearing_other_self = 0.0;
  double h = 0.0;

  bool closed() const { return end >= start; }
  double duration() const { return end - start; }
};

inline constexpr double kHeadOnThreshold = 0.2;

/// Distance from a perfectly head-on encounter: root-sum-square of the
/// minimal signed gaps between each agent's goal direction and its bearing to
/// the other.
double headon_metric(double goal_angle_i, double goal_angle_j,
                     double bearing_ij, double bearing_ji);

struct TrialMetrics {
  std::int64_t total_goals = 0;
  std::int64_t window_goals = 0;
  double window_duration = 0.0;
  double G = 0.0;
  double blocked_fraction = 0.0;
  std::vector<std::int64_t> goals_per_agent;
  std::int64_t collision_count = 0;
  std::vector<CollisionEvent> collisions;
  double wall_clock_seconds = 0.0;
  double simulated_seconds = 0.0;
  // Longest time any agent held one goal, counting the goal held at the end.
  double max_goal_latency = 0.0;
  // Planner trials only: constraint violations in the executed history, or
  // -1 when not checked.
  std::int64_t plan_violations = -1;
};

struct GoalEvent {
  int agent = -1;
  double time = 0.0;
};

struct StepEvents {
  std::vector<GoalEvent> goals;
  std::vector<int> collisions_started;
  std::vector<int> collisions_ended;

  void clear() {
    goals.clear();
    collisions_started.clear();
    collisions_ended.clear();
  }
};

/// Read-only snapshot of agent positions with a uniform binning for cone
/// queries. Built once per tick before any heading changes.
class NeighborView {
 public:
  NeighborView(double L, bool periodic, double r);

  void rebuild(std::span<const AgentState> agents);

  /// Nearest other agent whose center lies in `observer`'s cone (ties broken
  /// toward the lower id), or -1.
  int blocker(const Pose& observer, int self, const ConeSpec& cone) const;

  Point2 position(int i) const { return positions_[i]; }
  std::size_t size() const { return positions_.size(); }

 private:
  int bin_of(Point2 p, int& bx, int& by) const;

  double L_;
  bool periodic_;
  double r_;
  double bin_size_ = 1.0;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  int nbx_ = 1;
  int nby_ = 1;
  std::vector<Point2> positions_;
  std::vector<int> head_;
  std::vector<int> next_;
};

/// Direction from the agent to its current goal, minimal image.
double goal_angle(const AgentState& a, const WorldConfig& cfg);

/// Uniform goal in [0, L)^2.
Point2 draw_goal(Rng& goal_rng, double L);

struct UpdateResult {
  double speed = 0.0;
  bool reached_goal = false;
};

/// Constant-noise update: goal check, step redraw around the goal direction,
/// then forward speed v iff the cone is free.
UpdateResult agent_update_constant(AgentState& a, int self,
                                   const NeighborView& view,
                                   const WorldConfig& cfg, Rng& goal_rng,
                                   double now);

/// Conditional-noise update: straight at the goal unless blocked at the start
/// of a step, in which case the new direction is uniform.
UpdateResult agent_update_conditional(AgentState& a, int self,
                                      const NeighborView& view,
                                      const WorldConfig& cfg, Rng& goal_rng,
                                      double now);

struct InitialAgent {
  Point2 position;
  Point2 goal;
  double heading = 0.0;
};

/// Synchronous stepper for the local controllers.
class World {
 public:
  explicit World(const WorldConfig& cfg);
  World(const WorldConfig& cfg, std::span<const InitialAgent> initial);

  /// Advance one tick of length cfg.dt.
  const StepEvents& step();

  double time() const { return static_cast<double>(tick_) * cfg_.dt; }
  std::int64_t tick() const { return tick_; }
  const WorldConfig& config() const { return cfg_; }
  std::span<const AgentState> agents() const { return agents_; }
  std::span<AgentState> mutable_agents() { return agents_; }
  const std::vector<CollisionEvent>& collisions() const { return collisions_; }
  /// Event in progress for agent i (valid only while it is blocked).
  const CollisionEvent& open_collision_of(int i) const { return open_[i]; }
  std::int64_t collision_count() const { return collision_count_; }

  /// Keep closed events in collisions(); off by default for long sweeps.
  void set_record_collisions(bool on) { record_collisions_ = on; }

 private:
  void open_collision(int i, double now);
  void close_collision(int i, double now);

  WorldConfig cfg_;
  std::vector<AgentState> agents_;
  NeighborView view_;
  Rng goal_rng_;
  std::int64_t tick_ = 0;
  StepEvents events_;
  std::vector<double> speed_;
  std::vector<char> was_blocked_;
  std::vector<CollisionEvent> open_;
  std::vector<CollisionEvent> collisions_;
  std::int64_t collision_count_ = 0;
  bool record_collisions_ = false;
};

struct TrialOptions {
  bool record_collisions = false;
  // Planner only: re-check the executed history with validate_plans.
  bool validate_plans = false;
};

/// Runs a full trial and measures attainment over the final window. Dispatches
/// to the grid planner when cfg.controller is Controller::planner.
TrialMetrics run_trial(const WorldConfig& cfg, const TrialOptions& opts = {});

}  // namespace swarmgoal
