#include "swarmgoal/planner.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace swarmgoal::planner {

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::min();

constexpr int kDirs[8][2] = {{1, 0},  {1, 1},   {0, 1},  {-1, 1},
                             {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

int wrap_index(int v, int n) { return ((v % n) + n) % n; }

int octile_ticks(int dx, int dy) {
  const int ax = std::abs(dx);
  const int ay = std::abs(dy);
  return kCardinalTicks * std::max(ax, ay) +
         (kDiagonalTicks - kCardinalTicks) * std::min(ax, ay);
}

}  // namespace

const char* to_string(MoveKind k) {
  switch (k) {
    case MoveKind::cardinal: return "cardinal";
    case MoveKind::diagonal: return "diagonal";
    case MoveKind::wait: return "wait";
  }
  return "?";
}

int ticks_of(MoveKind k) {
  switch (k) {
    case MoveKind::cardinal: return kCardinalTicks;
    case MoveKind::diagonal: return kDiagonalTicks;
    case MoveKind::wait: return kWaitTicks;
  }
  return 0;
}

std::optional<Cell> GridSpec::offset(Cell c, int dx, int dy) const {
  int x = c.x + dx;
  int y = c.y + dy;
  if (periodic) {
    x = wrap_index(x, cells);
    y = wrap_index(y, cells);
  } else if (x < 0 || y < 0 || x >= cells || y >= cells) {
    return std::nullopt;
  }
  return Cell{x, y};
}

Point2 GridSpec::center(Cell c) const {
  const double w = cell_width();
  return {(c.x + 0.5) * w, (c.y + 0.5) * w};
}

Cell GridSpec::cell_of(Point2 p) const {
  const double w = cell_width();
  auto axis = [&](double v) {
    int i = static_cast<int>(std::floor(v / w));
    if (periodic) return wrap_index(i, cells);
    return std::clamp(i, 0, cells - 1);
  };
  return {axis(p.x), axis(p.y)};
}

void GridSpec::delta(Cell a, Cell b, int& dx, int& dy) const {
  dx = b.x - a.x;
  dy = b.y - a.y;
  if (periodic) {
    if (dx > cells / 2) dx -= cells;
    if (dx < -(cells - 1) / 2) dx += cells;
    if (dy > cells / 2) dy -= cells;
    if (dy < -(cells - 1) / 2) dy += cells;
  }
}

void GridSpec::validate() const {
  if (!(L > 0.0) || !std::isfinite(L))
    throw std::invalid_argument("grid L must be positive");
  if (cells < 1) throw std::invalid_argument("grid cells must be >= 1");
  if (cells > 4096) throw std::invalid_argument("grid cells must be <= 4096");
  if (!obstacles.empty() && static_cast<int>(obstacles.size()) != size())
    throw std::invalid_argument("grid obstacles must have cells^2 entries");
}

GridSpec fig4_grid() { return GridSpec{40.0, 30, true, {}}; }

double speed_calibration(double v, const GridSpec& grid) {
  if (!(v > 0.0)) throw std::invalid_argument("v must be positive");
  grid.validate();
  return grid.cell_width() / v;
}

std::int64_t Path::end_tick() const {
  if (steps.empty()) return start_tick;
  return steps.back().t + ticks_of(steps.back().kind);
}

ConeStencil::ConeStencil(const GridSpec& grid, const ConeSpec& cone) {
  validate_cone(cone);
  const double w = grid.cell_width();
  const int reach = static_cast<int>(std::ceil(cone.radius / w)) + 1;
  for (int d = 0; d < 8; ++d) {
    const Pose observer{{0.0, 0.0}, std::atan2(kDirs[d][1], kDirs[d][0])};
    for (int oy = -reach; oy <= reach; ++oy) {
      for (int ox = -reach; ox <= reach; ++ox) {
        if (ox == 0 && oy == 0) continue;
        const Point2 target{ox * w, oy * w};
        if (cone_contains(observer, target, cone, grid.L, false))
          dirs_[d].push_back({ox, oy});
      }
    }
  }
}

int ConeStencil::direction(int dx, int dy) {
  for (int d = 0; d < 8; ++d)
    if (kDirs[d][0] == dx && kDirs[d][1] == dy) return d;
  throw std::invalid_argument("not a unit grid move");
}

ReservationTable::ReservationTable(GridSpec grid, const ConeSpec& cone,
                                   int window)
    : grid_(std::move(grid)) {
  grid_.validate();
  validate_cone(cone);
  if (std::sqrt(2.0) * grid_.cell_width() > cone.radius * (1.0 + 1e-9))
    throw std::invalid_argument(
        "cell width too large: diagonal neighbors fall outside the sensing "
        "radius");
  if (window < 8) throw std::invalid_argument("window must be >= 8");
  stencil_ = ConeStencil(grid_, cone);
  window_ = static_cast<int>(std::bit_ceil(static_cast<unsigned>(window)));
  const std::size_t cells = static_cast<std::size_t>(grid_.size());
  occ_.assign(cells * window_, -1);
  cone_.assign(cells * window_, 0);
  last_use_.assign(cells, kNever);
  parked_.assign(cells, -1);
  parked_from_.assign(cells, 0);
}

void ReservationTable::ensure_agent(int agent) {
  if (agent < 0 || agent > std::numeric_limits<std::int16_t>::max())
    throw std::invalid_argument("agent id out of range");
  if (static_cast<std::size_t>(agent) >= entries_.size()) {
    entries_.resize(agent + 1);
    plans_.resize(agent + 1);
    for (std::size_t i = 0; i < plans_.size(); ++i) plans_[i].agent = static_cast<int>(i);
  }
}

int ReservationTable::occupant(std::int64_t tick, int cell) const {
  if (in_window(tick)) {
    const int a = occ_[slot(tick, cell)];
    if (a >= 0) return a;
  }
  if (parked_[cell] >= 0 && tick >= parked_from_[cell]) return parked_[cell];
  return -1;
}

int ReservationTable::cone_coverage(std::int64_t tick, int cell) const {
  if (!in_window(tick)) return 0;
  return cone_[slot(tick, cell)];
}

bool ReservationTable::free_from(int cell, std::int64_t tick) const {
  return parked_[cell] < 0 && last_use_[cell] < tick;
}

void ReservationTable::add(int agent, std::int64_t tick, int cell, bool cone) {
  if (!in_window(tick))
    throw std::logic_error("reservation outside the ledger window");
  const std::size_t s = slot(tick, cell);
  if (cone) {
    ++cone_[s];
  } else {
    if (occ_[s] >= 0 && occ_[s] != agent)
      throw std::logic_error("cell already reserved at this tick");
    occ_[s] = static_cast<std::int16_t>(agent);
  }
  entries_[agent].push_back({tick, cell, cone});
  last_use_[cell] = std::max(last_use_[cell], tick);
}

void ReservationTable::refresh_last_use(int cell) {
  last_use_[cell] = kNever;
  for (std::int64_t t = base_ + window_ - 1; t >= base_; --t) {
    const std::size_t s = slot(t, cell);
    if (occ_[s] >= 0 || cone_[s] > 0) {
      last_use_[cell] = t;
      return;
    }
  }
}

void ReservationTable::commit(const Path& path) {
  ensure_agent(path.agent);
  const int agent = path.agent;
  auto& mine = entries_[agent];
  std::erase_if(mine, [&](const Entry& e) { return e.tick < base_; });

  Cell at = path.start;
  std::int64_t t = path.start_tick;
  for (const PlanStep& s : path.steps) {
    if (s.t != t) throw std::logic_error("plan steps are not contiguous");
    const int from = grid_.index(at);
    const int k = ticks_of(s.kind);
    if (s.kind == MoveKind::wait) {
      if (!(s.cell == at)) throw std::logic_error("wait step changes cell");
      for (int i = 0; i < k; ++i) add(agent, t + i, from, false);
    } else {
      int dx = 0;
      int dy = 0;
      grid_.delta(at, s.cell, dx, dy);
      const bool diagonal = dx != 0 && dy != 0;
      if (std::abs(dx) > 1 || std::abs(dy) > 1 || (dx == 0 && dy == 0) ||
          diagonal != (s.kind == MoveKind::diagonal))
        throw std::logic_error("plan step is not a matching unit move");
      const int to = grid_.index(s.cell);
      const int d = ConeStencil::direction(dx, dy);
      for (int i = 0; i < k; ++i) {
        add(agent, t + i, from, false);
        add(agent, t + i, to, false);
        for (const Cell& o : stencil_.offsets(d)) {
          const auto c = grid_.offset(at, o.x, o.y);
          if (!c) continue;
          const int ci = grid_.index(*c);
          if (ci == from) continue;
          add(agent, t + i, ci, true);
        }
      }
    }
    t += k;
    at = s.cell;
  }
  park(agent, at, t);
  plans_[agent] = path;
}

void ReservationTable::park(int agent, Cell cell, std::int64_t from) {
  ensure_agent(agent);
  const int c = grid_.index(cell);
  if (parked_[c] >= 0 && parked_[c] != agent)
    throw std::logic_error("cell already holds a parked agent");
  for (std::size_t i = 0; i < parked_.size(); ++i)
    if (parked_[i] == agent) parked_[i] = -1;
  parked_[c] = agent;
  parked_from_[c] = from;
}

void ReservationTable::release(int agent, std::int64_t from) {
  ensure_agent(agent);
  for (std::size_t i = 0; i < parked_.size(); ++i)
    if (parked_[i] == agent) parked_[i] = -1;
  std::vector<int> touched;
  auto& mine = entries_[agent];
  std::vector<Entry> kept;
  kept.reserve(mine.size());
  for (const Entry& e : mine) {
    if (e.tick < base_) continue;
    if (e.tick < from) {
      kept.push_back(e);
      continue;
    }
    const std::size_t s = slot(e.tick, e.cell);
    if (e.cone) {
      if (cone_[s] > 0) --cone_[s];
    } else if (occ_[s] == agent) {
      occ_[s] = -1;
    }
    touched.push_back(e.cell);
  }
  mine = std::move(kept);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (int c : touched) refresh_last_use(c);

  Path& p = plans_[agent];
  std::erase_if(p.steps, [&](const PlanStep& s) { return s.t >= from; });
}

void ReservationTable::advance_to(std::int64_t tick) {
  if (tick <= base_) return;
  const std::int64_t stop = std::min(tick, base_ + window_);
  const std::size_t cells = static_cast<std::size_t>(grid_.size());
  for (std::int64_t t = base_; t < stop; ++t) {
    const std::size_t row = static_cast<std::size_t>(t & (window_ - 1)) * cells;
    std::fill_n(occ_.begin() + static_cast<std::ptrdiff_t>(row), cells, -1);
    std::fill_n(cone_.begin() + static_cast<std::ptrdiff_t>(row), cells, 0);
  }
  base_ = tick;
}

namespace {

struct SearchNode {
  int cell;
  std::int64_t tick;
  int parent;
  MoveKind kind;
};

struct OpenEntry {
  std::int64_t f;
  std::int64_t g;
  int node;
};

struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.node > b.node;
  }
};

struct SearchScratch {
  std::vector<std::uint32_t> stamp;
  std::uint32_t generation = 0;
  std::vector<SearchNode> nodes;
};

SearchScratch& scratch() {
  thread_local SearchScratch s;
  return s;
}

bool cell_clear(const ReservationTable& table, std::int64_t tick, int cell) {
  return table.occupant(tick, cell) < 0 && table.cone_coverage(tick, cell) == 0;
}

}  // namespace

PlanResult plan_path(int agent, Cell start, Cell goal, std::int64_t start_tick,
                     const ReservationTable& table, int horizon_ticks) {
  const GridSpec& grid = table.grid();
  if (start.x < 0 || start.y < 0 || start.x >= grid.cells || start.y >= grid.cells ||
      goal.x < 0 || goal.y < 0 || goal.x >= grid.cells || goal.y >= grid.cells)
    throw std::invalid_argument("start or goal outside the grid");
  if (horizon_ticks < 1) throw std::invalid_argument("horizon must be >= 1");
  if (start_tick < table.base_tick())
    throw std::invalid_argument("start tick precedes the ledger window");
  const std::int64_t horizon =
      std::min<std::int64_t>(horizon_ticks, table.window() - kDiagonalTicks - 1);

  PlanResult result;
  const int s = grid.index(start);
  const int g = grid.index(goal);
  if (grid.blocked(s) || grid.blocked(g))
    throw std::invalid_argument("start or goal is an obstacle");

  const int holder = table.occupant(start_tick, s);
  if (holder >= 0 && holder != agent) {
    result.failure = {PlanFailure::Kind::start_conflict, holder};
    return result;
  }

  SearchScratch& sc = scratch();
  const std::size_t layers = static_cast<std::size_t>(horizon) + 1;
  const std::size_t states = layers * static_cast<std::size_t>(grid.size());
  if (sc.stamp.size() < states) sc.stamp.assign(states, 0);
  if (++sc.generation == 0) {
    std::fill(sc.stamp.begin(), sc.stamp.end(), 0);
    sc.generation = 1;
  }
  const std::uint32_t gen = sc.generation;
  sc.nodes.clear();
  auto visit = [&](int cell, std::int64_t tick) {
    std::uint32_t& st =
        sc.stamp[static_cast<std::size_t>(tick - start_tick) * grid.size() + cell];
    if (st == gen) return false;
    st = gen;
    return true;
  };
  auto h = [&](int cell) {
    int dx = 0;
    int dy = 0;
    grid.delta(grid.cell(cell), goal, dx, dy);
    return static_cast<std::int64_t>(octile_ticks(dx, dy));
  };

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  visit(s, start_tick);
  sc.nodes.push_back({s, start_tick, -1, MoveKind::wait});
  open.push({h(s), 0, 0});
  const ConeStencil& stencil = table.stencil();
  // Searches that succeed stay far below this; failures would otherwise
  // sweep the whole space-time window.
  const std::int64_t max_expansions = 20000;

  // A goal parked on by someone else is never free, so skip the search.
  const int parker = table.parked_agent(g);
  const bool goal_parked = parker >= 0 && parker != agent;

  int found = -1;
  while (!goal_parked && !open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const SearchNode node = sc.nodes[top.node];
    ++result.expansions;
    if (node.cell == g && table.free_from(g, node.tick)) {
      found = top.node;
      break;
    }
    if (result.expansions > max_expansions) break;
    const std::int64_t t = node.tick;
    const Cell here = grid.cell(node.cell);

    for (int d = 0; d < 8; ++d) {
      const bool diagonal = kDirs[d][0] != 0 && kDirs[d][1] != 0;
      const int k = diagonal ? kDiagonalTicks : kCardinalTicks;
      if (t + k - start_tick > horizon) continue;
      const auto next = grid.offset(here, kDirs[d][0], kDirs[d][1]);
      if (!next) continue;
      const int nc = grid.index(*next);
      if (nc == node.cell || grid.blocked(nc)) continue;
      if (sc.stamp[static_cast<std::size_t>(t + k - start_tick) * grid.size() + nc] == gen)
        continue;
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) {
        if (!cell_clear(table, t + i, node.cell) || !cell_clear(table, t + i, nc)) {
          ok = false;
          break;
        }
        for (const Cell& o : stencil.offsets(d)) {
          const auto c = grid.offset(here, o.x, o.y);
          if (!c) continue;
          const int ci = grid.index(*c);
          if (ci == node.cell) continue;
          const int who = table.occupant(t + i, ci);
          if (who >= 0 && who != agent) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;
      visit(nc, t + k);
      const int id = static_cast<int>(sc.nodes.size());
      sc.nodes.push_back({nc, t + k, top.node,
                          diagonal ? MoveKind::diagonal : MoveKind::cardinal});
      const std::int64_t gk = t + k - start_tick;
      open.push({gk + h(nc), gk, id});
    }

    if (t + kWaitTicks - start_tick <= horizon && cell_clear(table, t, node.cell) &&
        visit(node.cell, t + kWaitTicks)) {
      const int id = static_cast<int>(sc.nodes.size());
      sc.nodes.push_back({node.cell, t + kWaitTicks, top.node, MoveKind::wait});
      const std::int64_t gk = t + kWaitTicks - start_tick;
      open.push({gk + h(node.cell), gk, id});
    }
  }

  if (found < 0) {
    for (std::int64_t t = start_tick; t <= start_tick + horizon; ++t) {
      const int who = table.occupant(t, s);
      if (who >= 0 && who != agent) {
        result.failure = {PlanFailure::Kind::start_conflict, who};
        return result;
      }
    }
    result.failure = {PlanFailure::Kind::unreachable, -1};
    return result;
  }

  Path path;
  path.agent = agent;
  path.start_tick = start_tick;
  path.start = start;
  for (int i = found; sc.nodes[i].parent >= 0; i = sc.nodes[i].parent) {
    const SearchNode& n = sc.nodes[i];
    path.steps.push_back({sc.nodes[n.parent].tick, grid.cell(n.cell), n.kind});
  }
  std::reverse(path.steps.begin(), path.steps.end());
  result.path = std::move(path);
  return result;
}

std::vector<Violation> validate_plans(std::span<const Path> paths,
                                      const GridSpec& grid,
                                      const ConeSpec& cone) {
  grid.validate();
  validate_cone(cone);
  std::vector<Violation> out;
  if (paths.empty()) return out;

  std::int64_t t_lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t t_hi = std::numeric_limits<std::int64_t>::min();
  for (const Path& p : paths) {
    t_lo = std::min(t_lo, p.start_tick);
    t_hi = std::max(t_hi, p.end_tick());
  }
  t_hi = std::max(t_hi, t_lo + 1);

  // Per agent and tick: cells held, and the move in progress if any.
  struct State {
    int a = -1;
    int b = -1;
    double heading = 0.0;
    std::int64_t move_start = 0;
    std::int64_t held_a_since = 0;
    std::int64_t held_b_since = 0;
  };
  const std::size_t span_ticks = static_cast<std::size_t>(t_hi - t_lo);
  std::vector<std::vector<State>> timeline(paths.size(),
                                           std::vector<State>(span_ticks));
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const Path& p = paths[k];
    Cell at = p.start;
    std::int64_t since = t_lo;
    std::size_t next = 0;
    std::int64_t t = t_lo;
    while (t < t_hi) {
      if (next < p.steps.size() && p.steps[next].t <= t) {
        const PlanStep& s = p.steps[next];
        const std::int64_t dur = ticks_of(s.kind);
        if (s.kind == MoveKind::wait || s.cell == at) {
          for (std::int64_t u = t; u < std::min(s.t + dur, t_hi); ++u) {
            State& st = timeline[k][u - t_lo];
            st.a = grid.index(at);
            st.held_a_since = since;
          }
          t = std::max(t + 1, s.t + dur);
        } else {
          const Vec2 d = torus_delta(grid.center(at), grid.center(s.cell),
                                     grid.L, grid.periodic);
          const std::int64_t move_start = t;
          for (std::int64_t u = t; u < std::min(s.t + dur, t_hi); ++u) {
            State& st = timeline[k][u - t_lo];
            st.a = grid.index(at);
            st.b = grid.index(s.cell);
            st.heading = d.angle();
            st.move_start = move_start;
            st.held_a_since = since;
            st.held_b_since = move_start;
          }
          t = std::max(t + 1, s.t + dur);
          at = s.cell;
          since = move_start;
        }
        ++next;
      } else {
        State& st = timeline[k][t - t_lo];
        st.a = grid.index(at);
        st.held_a_since = since;
        ++t;
      }
    }
  }

  std::set<std::tuple<int, int, int, int>> seen;
  auto report = [&](int kind, std::int64_t tick, int a, int b, int cell) {
    if (seen.emplace(kind, a, b, cell).second)
      out.push_back({kind, tick, a, b, grid.cell(cell)});
  };

  std::vector<std::vector<int>> holders(grid.size());
  for (std::int64_t t = t_lo; t < t_hi; ++t) {
    const std::size_t i = static_cast<std::size_t>(t - t_lo);
    std::vector<int> used;
    for (std::size_t k = 0; k < paths.size(); ++k) {
      const State& st = timeline[k][i];
      for (int c : {st.a, st.b}) {
        if (c < 0) continue;
        if (holders[c].empty()) used.push_back(c);
        holders[c].push_back(static_cast<int>(k));
      }
    }
    for (int c : used) {
      auto& list = holders[c];
      for (std::size_t x = 0; x < list.size(); ++x)
        for (std::size_t y = x + 1; y < list.size(); ++y) {
          const int a = paths[list[x]].agent;
          const int b = paths[list[y]].agent;
          report(1, t, std::min(a, b), std::max(a, b), c);
        }
    }
    for (std::size_t k = 0; k < paths.size(); ++k) {
      const State& mover = timeline[k][i];
      if (mover.b < 0) continue;
      const Pose observer{grid.center(grid.cell(mover.a)), mover.heading};
      for (std::size_t j = 0; j < paths.size(); ++j) {
        if (j == k) continue;
        const State& other = timeline[j][i];
        const std::pair<int, std::int64_t> cells[] = {
            {other.a, other.held_a_since}, {other.b, other.held_b_since}};
        for (const auto& [c, since] : cells) {
          if (c < 0 || c == mover.a) continue;
          if (!cone_contains(observer, grid.center(grid.cell(c)), cone, grid.L,
                             grid.periodic))
            continue;
          if (since <= mover.move_start)
            report(2, t, paths[k].agent, paths[j].agent, c);
          else
            report(3, t, paths[j].agent, paths[k].agent, c);
        }
      }
    }
    for (int c : used) holders[c].clear();
  }
  return out;
}

PlannerWorld::PlannerWorld(const PlannerConfig& cfg)
    : cfg_(cfg),
      table_(cfg.grid, cfg.cone, cfg.horizon_ticks + 2 * kDiagonalTicks + 2),
      goal_rng_(cfg.seed, kGoalStream),
      tick_seconds_(speed_calibration(cfg.v, cfg.grid) / kTicksPerUnit) {
  init({}, {});
}

PlannerWorld::PlannerWorld(const PlannerConfig& cfg, std::span<const Cell> starts,
                           std::span<const Cell> goals)
    : cfg_(cfg),
      table_(cfg.grid, cfg.cone, cfg.horizon_ticks + 2 * kDiagonalTicks + 2),
      goal_rng_(cfg.seed, kGoalStream),
      tick_seconds_(speed_calibration(cfg.v, cfg.grid) / kTicksPerUnit) {
  if (starts.size() != goals.size() || starts.empty())
    throw std::invalid_argument("starts and goals must be nonempty and equal length");
  cfg_.n = static_cast<int>(starts.size());
  init(starts, goals);
}

void PlannerWorld::init(std::span<const Cell> starts, std::span<const Cell> goals) {
  const GridSpec& grid = cfg_.grid;
  if (cfg_.n < 1) throw std::invalid_argument("n must be >= 1");
  if (cfg_.horizon_ticks < 1) throw std::invalid_argument("horizon must be >= 1");
  std::vector<int> free_cells;
  for (int c = 0; c < grid.size(); ++c)
    if (!grid.blocked(c)) free_cells.push_back(c);
  if (static_cast<int>(free_cells.size()) < cfg_.n)
    throw std::invalid_argument("more agents than free grid cells");

  agents_.resize(cfg_.n);
  if (starts.empty()) {
    for (int i = 0; i < cfg_.n; ++i) {
      const auto pick = i + static_cast<int>(goal_rng_.index(free_cells.size() - i));
      std::swap(free_cells[i], free_cells[pick]);
      agents_[i].cell = grid.cell(free_cells[i]);
    }
  } else {
    std::vector<char> used(grid.size(), 0);
    for (int i = 0; i < cfg_.n; ++i) {
      for (Cell c : {starts[i], goals[i]})
        if (c.x < 0 || c.y < 0 || c.x >= grid.cells || c.y >= grid.cells ||
            grid.blocked(grid.index(c)))
          throw std::invalid_argument("start or goal outside the free grid");
      if (used[grid.index(starts[i])]++)
        throw std::invalid_argument("two agents share a start cell");
      agents_[i].cell = starts[i];
    }
  }
  for (int i = 0; i < cfg_.n; ++i) {
    table_.park(i, agents_[i].cell, 0);
    agents_[i].history.agent = i;
    agents_[i].history.start = agents_[i].cell;
  }
  for (int i = 0; i < cfg_.n; ++i) {
    agents_[i].goal = starts.empty() ? draw_goal_cell(i) : goals[i];
    agents_[i].has_goal = true;
  }
}

Cell PlannerWorld::draw_goal_cell(int agent) {
  const GridSpec& grid = cfg_.grid;
  int c = 0;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    c = static_cast<int>(goal_rng_.index(static_cast<std::uint64_t>(grid.size())));
    if (grid.blocked(c)) continue;
    const int parked = table_.parked_agent(c);
    if (parked >= 0 && parked != agent) continue;
    bool taken = false;
    for (int j = 0; j < n() && !taken; ++j)
      taken = j != agent && agents_[j].has_goal && grid.index(agents_[j].goal) == c;
    if (!taken) break;
  }
  return grid.cell(c);
}

bool PlannerWorld::moving(int i) const {
  const Agent& a = agents_[i];
  return a.in_step && a.plan && a.next > 0 &&
         a.plan->steps[a.next - 1].kind != MoveKind::wait;
}

void PlannerWorld::plan_for(int i) {
  Agent& a = agents_[i];
  table_.release(i, tick_);
  PlanResult res = plan_path(i, a.cell, a.goal, tick_, table_, cfg_.horizon_ticks);
  if (!res.ok() && res.failure.kind == PlanFailure::Kind::start_conflict) {
    const int j = res.failure.conflicting_agent;
    Agent& other = agents_[j];
    // Keep the step j is executing; drop everything after it.
    const std::int64_t cut = other.in_step ? other.step_end : tick_;
    Cell hold = other.cell;
    if (other.in_step && other.plan && other.next > 0)
      hold = other.plan->steps[other.next - 1].cell;
    table_.release(j, cut);
    if (other.plan) {
      other.plan->steps.resize(std::min(other.plan->steps.size(), other.next));
    }
    try {
      table_.park(j, hold, cut);
    } catch (const std::logic_error&) {
    }
    other.needs_plan = true;
    events_.forced_replans.push_back(j);
    res = plan_path(i, a.cell, a.goal, tick_, table_, cfg_.horizon_ticks);
  }
  if (res.ok()) {
    table_.commit(*res.path);
    a.plan = std::move(res.path);
    a.next = 0;
    a.needs_plan = false;
    return;
  }
  a.plan.reset();
  a.next = 0;
  try {
    table_.park(i, a.cell, tick_);
  } catch (const std::logic_error&) {
  }
  events_.plan_failures.push_back(i);
}

const PlannerStepEvents& PlannerWorld::step() {
  events_.goals.clear();
  events_.plan_failures.clear();
  events_.forced_replans.clear();
  table_.advance_to(tick_);

  for (int i = 0; i < n(); ++i) {
    Agent& a = agents_[i];
    if (a.in_step && a.step_end == tick_) {
      a.in_step = false;
      a.cell = a.plan->steps[a.next - 1].cell;
    }
    if (a.in_step) continue;
    if (a.plan && a.next >= a.plan->steps.size()) {
      a.plan.reset();
      a.next = 0;
      a.needs_plan = true;
    }
    if (!a.plan && a.cell == a.goal) {
      ++a.goals_reached;
      events_.goals.push_back(i);
      max_goal_latency_ticks_ =
          std::max(max_goal_latency_ticks_, tick_ - a.goal_assigned_tick);
      a.goal = draw_goal_cell(i);
      a.goal_assigned_tick = tick_;
      a.needs_plan = true;
    }
  }

  for (int i = 0; i < n(); ++i) {
    Agent& a = agents_[i];
    if (a.needs_plan && !a.in_step) plan_for(i);
  }

  for (int i = 0; i < n(); ++i) {
    Agent& a = agents_[i];
    if (a.in_step) continue;
    if (a.plan && a.next < a.plan->steps.size()) {
      const PlanStep& s = a.plan->steps[a.next];
      if (s.t != tick_) throw std::logic_error("plan step out of sync with the clock");
      a.in_step = true;
      a.step_end = tick_ + ticks_of(s.kind);
      a.history.steps.push_back(s);
      ++a.next;
    } else {
      a.history.steps.push_back({tick_, a.cell, MoveKind::wait});
    }
  }
  ++tick_;
  return events_;
}

std::vector<Path> PlannerWorld::history() const {
  std::vector<Path> out;
  out.reserve(agents_.size());
  for (const Agent& a : agents_) out.push_back(a.history);
  return out;
}

void PlannerWorld::inject_plan(const Path& path) {
  if (path.agent < 0 || path.agent >= n())
    throw std::invalid_argument("agent id out of range");
  Agent& a = agents_[path.agent];
  if (a.in_step) throw std::logic_error("agent is mid-step");
  if (!(path.start == a.cell) || path.start_tick != tick_)
    throw std::invalid_argument("plan must start at the agent's cell and the current tick");
  table_.release(path.agent, tick_);
  table_.commit(path);
  a.plan = path;
  a.next = 0;
  a.needs_plan = false;
}

std::int64_t PlannerWorld::max_goal_latency_ticks() const {
  std::int64_t worst = max_goal_latency_ticks_;
  for (const Agent& a : agents_) worst = std::max(worst, tick_ - a.goal_assigned_tick);
  return worst;
}

void write_paths(std::ostream& os, std::span<const Path> paths) {
  for (const Path& p : paths) {
    os << "path " << p.agent << ' ' << p.start_tick << ' ' << p.start.x << ' '
       << p.start.y << '\n';
    for (const PlanStep& s : p.steps)
      os << s.t << ' ' << s.cell.x << ' ' << s.cell.y << ' ' << to_string(s.kind)
         << '\n';
  }
}

std::vector<Path> read_paths(std::istream& is) {
  std::vector<Path> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (line.rfind("path ", 0) == 0) {
      std::string tag;
      Path p;
      if (!(ls >> tag >> p.agent >> p.start_tick >> p.start.x >> p.start.y))
        throw std::invalid_argument("bad path header on line " + std::to_string(lineno));
      out.push_back(std::move(p));
      continue;
    }
    if (out.empty())
      throw std::invalid_argument("step before any path header on line " +
                                  std::to_string(lineno));
    PlanStep s;
    std::string kind;
    if (!(ls >> s.t >> s.cell.x >> s.cell.y >> kind))
      throw std::invalid_argument("bad step on line " + std::to_string(lineno));
    if (kind == "cardinal")
      s.kind = MoveKind::cardinal;
    else if (kind == "diagonal")
      s.kind = MoveKind::diagonal;
    else if (kind == "wait")
      s.kind = MoveKind::wait;
    else
      throw std::invalid_argument("unknown move kind '" + kind + "' on line " +
                                  std::to_string(lineno));
    out.back().steps.push_back(s);
  }
  return out;
}

}  // namespace swarmgoal::planner

namespace swarmgoal {

TrialMetrics run_planner_trial(const WorldConfig& cfg, bool validate) {
  cfg.validate();
  planner::PlannerConfig pc;
  pc.grid = planner::GridSpec{cfg.L, cfg.grid_cells, cfg.periodic(), {}};
  pc.cone = cfg.cone();
  pc.v = cfg.v;
  pc.n = cfg.n;
  pc.seed = cfg.seed;
  pc.horizon_ticks = std::max(256, 12 * cfg.grid_cells);
  planner::PlannerWorld world(pc);

  const double tick_s = world.tick_seconds();
  const auto total = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(cfg.trial_time / tick_s - 1e-9)));
  const auto window = std::max<std::int64_t>(
      1, std::llround(static_cast<double>(total) * cfg.measure_window_fraction));
  const std::int64_t window_start = total - window;

  TrialMetrics m;
  m.goals_per_agent.assign(cfg.n, 0);
  std::int64_t blocked_ticks = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::int64_t k = 0; k < total; ++k) {
    const auto& ev = world.step();
    m.total_goals += static_cast<std::int64_t>(ev.goals.size());
    // Goals are counted at the tick boundary where the arrival is observed.
    if (k >= window_start) {
      m.window_goals += static_cast<std::int64_t>(ev.goals.size());
      for (int i = 0; i < cfg.n; ++i)
        if (!world.moving(i)) ++blocked_ticks;
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  for (int i = 0; i < cfg.n; ++i) m.goals_per_agent[i] = world.goals_reached(i);
  m.wall_clock_seconds = std::chrono::duration<double>(t1 - t0).count();
  m.simulated_seconds = static_cast<double>(total) * tick_s;
  m.window_duration = static_cast<double>(window) * tick_s;
  m.G = static_cast<double>(m.window_goals) / m.window_duration;
  m.blocked_fraction =
      static_cast<double>(blocked_ticks) / (static_cast<double>(window) * cfg.n);
  m.max_goal_latency = static_cast<double>(world.max_goal_latency_ticks()) * tick_s;
  if (validate) {
    const auto hist = world.history();
    m.plan_violations = static_cast<std::int64_t>(
        planner::validate_plans(hist, pc.grid, pc.cone).size());
  }
  return m;
}

}  // namespace swarmgoal
