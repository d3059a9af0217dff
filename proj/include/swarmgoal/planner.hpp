#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmgoal/dynamics.hpp"
#include "swarmgoal/geometry.hpp"
#include "swarmgoal/rng.hpp"

namespace swarmgoal::planner {

// Time is counted in half-unit ticks so a diagonal (1.5 units) is integral.
inline constexpr int kTicksPerUnit = 2;
inline constexpr int kCardinalTicks = 2;
inline constexpr int kDiagonalTicks = 3;
inline constexpr int kWaitTicks = 1;

struct Cell {
  int x = 0;
  int y = 0;
  constexpr bool operator==(const Cell&) const = default;
};

enum class MoveKind { cardinal, diagonal, wait };

const char* to_string(MoveKind k);
int ticks_of(MoveKind k);

struct GridSpec {
  double L = 40.0;
  int cells = 30;
  bool periodic = true;
  // Row-major static obstacle mask; empty means no obstacles.
  std::vector<char> obstacles;

  double cell_width() const { return L / cells; }
  int size() const { return cells * cells; }
  int index(Cell c) const { return c.y * cells + c.x; }
  Cell cell(int idx) const { return {idx % cells, idx / cells}; }
  bool blocked(int idx) const {
    return !obstacles.empty() && obstacles[idx] != 0;
  }
  /// Neighbor at offset (dx, dy), wrapping on a periodic grid. nullopt when
  /// it falls off a bounded grid.
  std::optional<Cell> offset(Cell c, int dx, int dy) const;
  Point2 center(Cell c) const;
  Cell cell_of(Point2 p) const;
  /// Minimal-image cell offset from a to b.
  void delta(Cell a, Cell b, int& dx, int& dy) const;

  void validate() const;
};

/// fig4-planner grid: 40 x 40 arena cut into 30 x 30 cells of width 4/3.
GridSpec fig4_grid();

/// Cardinal-move duration in seconds that makes grid agents cover ground at
/// the continuous cruising speed: cell_width / v.
double speed_calibration(double v, const GridSpec& grid);

/// One plan entry: at tick t the agent starts moving to `cell` (or waits in
/// it for one tick).
struct PlanStep {
  std::int64_t t = 0;
  Cell cell;
  MoveKind kind = MoveKind::wait;
  constexpr bool operator==(const PlanStep&) const = default;
};

struct Path {
  int agent = -1;
  std::int64_t start_tick = 0;
  Cell start;
  std::vector<PlanStep> steps;

  std::int64_t end_tick() const;
  Cell end_cell() const { return steps.empty() ? start : steps.back().cell; }
  /// Arrival time in planner units (cardinal moves), relative to start.
  double duration_units() const {
    return static_cast<double>(end_tick() - start_tick) / kTicksPerUnit;
  }
};

/// Cells covered by a moving agent's sensing cone, per move direction, as
/// offsets from the cell it is leaving. Derived from the continuous cone with
/// the agent at its cell center and heading along the move.
class ConeStencil {
 public:
  ConeStencil() = default;
  ConeStencil(const GridSpec& grid, const ConeSpec& cone);

  /// Direction index for a unit move (dx, dy) in {-1,0,1}^2 \ {0}.
  static int direction(int dx, int dy);
  std::span<const Cell> offsets(int direction) const { return dirs_[direction]; }

 private:
  std::vector<Cell> dirs_[8];
};

/// Shared space-time ledger. Occupancy and cone coverage live in a ring of
/// `window` ticks; an agent whose plan has ended is parked at its last cell
/// until it commits a new plan.
class ReservationTable {
 public:
  ReservationTable(GridSpec grid, const ConeSpec& cone, int window = 512);

  const GridSpec& grid() const { return grid_; }
  const ConeStencil& stencil() const { return stencil_; }
  int window() const { return window_; }
  std::int64_t base_tick() const { return base_; }

  /// Agent holding `cell` at `tick`, or -1.
  int occupant(std::int64_t tick, int cell) const;
  /// Number of moving agents whose cone covers `cell` at `tick`.
  int cone_coverage(std::int64_t tick, int cell) const;
  /// True when nobody uses `cell` (occupancy, cone, or parking) at any tick
  /// >= `tick`.
  bool free_from(int cell, std::int64_t tick) const;
  int parked_agent(int cell) const { return parked_[cell]; }

  /// Records a plan and parks the agent at its final cell. Throws
  /// std::logic_error if the plan leaves the ring window.
  void commit(const Path& path);
  void park(int agent, Cell cell, std::int64_t from);
  /// Drops the agent's reservations at ticks >= from, and its parking.
  void release(int agent, std::int64_t from);

  /// Moves the ring forward; reservations before `tick` are forgotten.
  void advance_to(std::int64_t tick);

  /// Current plans as committed (for dumps and validation).
  const std::vector<Path>& plans() const { return plans_; }

 private:
  struct Entry {
    std::int64_t tick;
    int cell;
    bool cone;
  };

  std::size_t slot(std::int64_t tick, int cell) const {
    return static_cast<std::size_t>(tick & (window_ - 1)) * grid_.size() + cell;
  }
  bool in_window(std::int64_t tick) const {
    return tick >= base_ && tick < base_ + window_;
  }
  void add(int agent, std::int64_t tick, int cell, bool cone);
  void refresh_last_use(int cell);
  void ensure_agent(int agent);

  GridSpec grid_;
  ConeStencil stencil_;
  int window_;
  std::int64_t base_ = 0;
  std::vector<std::int16_t> occ_;
  std::vector<std::uint16_t> cone_;
  std::vector<std::int64_t> last_use_;
  std::vector<int> parked_;
  std::vector<std::int64_t> parked_from_;
  std::vector<std::vector<Entry>> entries_;
  std::vector<Path> plans_;
};

struct PlanFailure {
  enum class Kind { unreachable, start_conflict };
  Kind kind = Kind::unreachable;
  // For start_conflict: the agent scheduled into the start cell.
  int conflicting_agent = -1;
};

struct PlanResult {
  std::optional<Path> path;
  PlanFailure failure;
  std::int64_t expansions = 0;

  bool ok() const { return path.has_value(); }
};

/// Space-time A* against the ledger. The agent's own reservations must
/// already be released. Heuristic is the unobstructed grid travel time
/// (2 max(|dx|,|dy|) + min(|dx|,|dy|) ticks), which is exact on an empty
/// grid and therefore admissible. The goal is accepted only where the agent
/// can then stay indefinitely. Does not commit.
PlanResult plan_path(int agent, Cell start, Cell goal, std::int64_t start_tick,
                     const ReservationTable& reservations, int horizon_ticks);

struct Violation {
  int kind = 0;  // 1: shared cell, 2: moved with an occupied cone, 3: entered a moving neighbor's cone
  std::int64_t tick = 0;
  int agent = -1;
  int other = -1;
  Cell cell;
};

/// Independent re-check of a set of space-time paths (one per agent, agent
/// fields distinct). Before its first step an agent sits at its start cell;
/// after its last step it stays at its final cell until the latest tick any
/// path covers. One report per (kind, agent, other, cell).
std::vector<Violation> validate_plans(std::span<const Path> paths,
                                      const GridSpec& grid,
                                      const ConeSpec& cone);

struct PlannerConfig {
  GridSpec grid;
  ConeSpec cone{2.0, 2.0 * kPi / 3.0};
  double v = 0.5;
  int n = 1;
  std::uint64_t seed = 1;
  int horizon_ticks = 256;
};

struct PlannerStepEvents {
  std::vector<int> goals;
  std::vector<int> plan_failures;
  std::vector<int> forced_replans;
};

/// Lifelong Cooperative A*: each tick, arrived agents draw new goals, agents
/// without a plan replan in ascending id order against the ledger, then every
/// agent advances one tick along its plan.
class PlannerWorld {
 public:
  explicit PlannerWorld(const PlannerConfig& cfg);
  /// Explicit start and first goal cells; later goals are random.
  PlannerWorld(const PlannerConfig& cfg, std::span<const Cell> starts,
               std::span<const Cell> goals);

  const PlannerStepEvents& step();

  std::int64_t tick() const { return tick_; }
  double tick_seconds() const { return tick_seconds_; }
  double time() const { return static_cast<double>(tick_) * tick_seconds_; }
  int n() const { return static_cast<int>(agents_.size()); }
  Cell position(int i) const { return agents_[i].cell; }
  Cell goal(int i) const { return agents_[i].goal; }
  bool moving(int i) const;
  std::int64_t goals_reached(int i) const { return agents_[i].goals_reached; }
  const ReservationTable& reservations() const { return table_; }

  /// Everything each agent has done so far, one Path per agent, waits
  /// included, covering ticks [0, tick()).
  std::vector<Path> history() const;

  /// Debug/test hook: commit a plan for an agent that replaces its own.
  void inject_plan(const Path& path);

 private:
  struct Agent {
    Cell cell;
    Cell goal;
    bool has_goal = false;
    std::optional<Path> plan;
    std::size_t next = 0;  // next plan step to start
    std::int64_t step_end = 0;
    bool in_step = false;
    bool needs_plan = true;
    std::int64_t goals_reached = 0;
    std::int64_t goal_assigned_tick = 0;
    Path history;
  };

  void init(std::span<const Cell> starts, std::span<const Cell> goals);
  Cell draw_goal_cell(int agent);
  void plan_for(int agent);

  PlannerConfig cfg_;
  ReservationTable table_;
  Rng goal_rng_;
  double tick_seconds_;
  std::int64_t tick_ = 0;
  std::vector<Agent> agents_;
  PlannerStepEvents events_;
  std::int64_t max_goal_latency_ticks_ = 0;

 public:
  std::int64_t max_goal_latency_ticks() const;
};

/// Line-oriented dump: "path <agent> <start_tick> <x> <y>" then one
/// "<t> <x> <y> <kind>" line per step.
void write_paths(std::ostream& os, std::span<const Path> paths);
std::vector<Path> read_paths(std::istream& is);

}  // namespace swarmgoal::planner

namespace swarmgoal {

/// Lifelong planner trial configured from a WorldConfig (grid of
/// cfg.grid_cells per side, timestep from speed_calibration). With `validate`
/// the executed history is re-checked and the count stored in
/// TrialMetrics::plan_violations.
TrialMetrics run_planner_trial(const WorldConfig& cfg, bool validate = false);

}  // namespace swarmgoal
