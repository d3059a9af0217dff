#include "swarmgoal/optimizer.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace swarmgoal::optimizer {

namespace {

std::optional<double> critical_noise(int n, const theory::TheoryParams& p,
                                     bool corrected) {
  if (!corrected) return theory::sigma_star(n, p);
  try {
    return theory::sigma_star_corrected(n, p);
  } catch (const theory::SolverFailure&) {
    return std::nullopt;
  }
}

}  // namespace

OptimumReport optimize_over(const theory::TheoryParams& p,
                            std::span<const int> team_sizes, bool corrected) {
  if (team_sizes.empty()) throw std::invalid_argument("team size range is empty");
  p.validate();
  std::vector<int> ns(team_sizes.begin(), team_sizes.end());
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.front() < 1) throw std::invalid_argument("team sizes must be >= 1");

  OptimumReport rep;
  rep.corrected = corrected;
  for (int n : ns) {
    const auto s = critical_noise(n, p, corrected);
    if (!s) continue;
    theory::TheoryParams q = p;
    q.n = n;
    q.sigma = *s;
    rep.table.push_back({n, *s, theory::goal_attainment_rate(q)});
  }
  if (rep.table.empty())
    throw NoOptimum("critical noise is undefined for every team size in range");

  // Rows are ascending in n, so a strict comparison keeps the smaller n on ties.
  const ScanRow* best = &rep.table.front();
  for (const ScanRow& row : rep.table)
    if (row.G > best->G) best = &row;
  rep.n_opt = best->n;
  rep.sigma_opt = best->sigma;
  rep.G_opt = best->G;
  return rep;
}

OptimumReport optimize_team(const theory::TheoryParams& p, int n_lo, int n_hi) {
  if (n_hi < n_lo) throw std::invalid_argument("team size range is empty");
  std::vector<int> ns(static_cast<std::size_t>(n_hi - n_lo + 1));
  std::iota(ns.begin(), ns.end(), n_lo);
  return optimize_over(p, ns, false);
}

OptimumReport optimize_team_corrected(const theory::TheoryParams& p, int n_lo,
                                      int n_hi) {
  if (n_hi < n_lo) throw std::invalid_argument("team size range is empty");
  std::vector<int> ns(static_cast<std::size_t>(n_hi - n_lo + 1));
  std::iota(ns.begin(), ns.end(), n_lo);
  return optimize_over(p, ns, true);
}

}  // namespace swarmgoal::optimizer
