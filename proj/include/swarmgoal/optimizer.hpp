#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "swarmgoal/theory.hpp"

namespace swarmgoal::optimizer {

struct ScanRow {
  int n = 0;
  double sigma = 0.0;
  double G = 0.0;
};

struct OptimumReport {
  int n_opt = 0;
  double sigma_opt = 0.0;
  double G_opt = 0.0;
  bool corrected = false;
  // Feasible rows only, ascending n.
  std::vector<ScanRow> table;
};

/// No team size in range has a finite critical noise.
class NoOptimum : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive scan of G(n, sigma*(n)) over n in [n_lo, n_hi]. Rows where
/// sigma* is undefined are skipped; ties go to the smaller n.
OptimumReport optimize_team(const theory::TheoryParams& p, int n_lo, int n_hi);

/// Same scan with the corrected critical noise.
OptimumReport optimize_team_corrected(const theory::TheoryParams& p, int n_lo,
                                      int n_hi);

/// Scan over an explicit list of team sizes in any order.
OptimumReport optimize_over(const theory::TheoryParams& p,
                            std::span<const int> team_sizes, bool corrected);

}  // namespace swarmgoal::optimizer
