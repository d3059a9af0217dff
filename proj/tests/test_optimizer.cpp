#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "frozen_theory.hpp"
#include "swarmgoal/optimizer.hpp"

using namespace swarmgoal;
using namespace swarmgoal::optimizer;

TEST_CASE("fig2 team optimum matches the oracle scan") {
  const theory::TheoryParams p;
  const OptimumReport r = optimize_team(p, 1, 300);
  CHECK(r.n_opt == frozen::kOptimumN);
  CHECK(r.sigma_opt == doctest::Approx(frozen::kOptimumSigma).epsilon(1e-10));
  CHECK(r.G_opt == doctest::Approx(frozen::kOptimumG).epsilon(1e-10));
  CHECK_FALSE(r.corrected);
  // Rows stop at the last finite critical noise.
  CHECK(r.table.size() == 183);
  CHECK(r.table.back().n == 183);
  for (std::size_t i = 1; i < r.table.size(); ++i) CHECK(r.table[i].sigma > r.table[i - 1].sigma);
}

TEST_CASE("corrected scan keeps every row") {
  const theory::TheoryParams p;
  const OptimumReport r = optimize_team_corrected(p, 1, 256);
  CHECK(r.corrected);
  CHECK(r.table.size() == 256);
  CHECK(r.G_opt >= optimize_team(p, 1, 256).G_opt * 0.9);
}

TEST_CASE("errors") {
  const theory::TheoryParams p;
  CHECK_THROWS_AS(optimize_team(p, 10, 5), std::invalid_argument);
  CHECK_THROWS_AS(optimize_team(p, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(optimize_team(p, 200, 300), NoOptimum);
  const std::vector<int> none;
  CHECK_THROWS_AS(optimize_over(p, none, false), std::invalid_argument);
}

TEST_SUITE("properties") {
  TEST_CASE("optimum equals brute force over the theory") {
    for (double L : {20.0, 40.0, 60.0}) {
      theory::TheoryParams p;
      p.L = L;
      const OptimumReport r = optimize_team(p, 1, 400);
      double best = -1.0;
      int best_n = 0;
      for (int n = 1; n <= 400; ++n) {
        const auto s = theory::sigma_star(n, p);
        if (!s) continue;
        theory::TheoryParams q = p;
        q.n = n;
        q.sigma = *s;
        const double g = theory::goal_attainment_rate(q);
        if (g > best) {
          best = g;
          best_n = n;
        }
      }
      CHECK(r.n_opt == best_n);
      CHECK(r.G_opt == best);
      CHECK(r.sigma_opt == *theory::sigma_star(best_n, p));
      const auto top = std::max_element(r.table.begin(), r.table.end(),
                                        [](const ScanRow& a, const ScanRow& b) { return a.G < b.G; });
      CHECK(top->G == r.G_opt);
    }
  }

  TEST_CASE("output does not depend on scan order") {
    const theory::TheoryParams p;
    std::vector<int> ns(150);
    for (int i = 0; i < 150; ++i) ns[i] = i + 1;
    const OptimumReport ref = optimize_over(p, ns, false);
    std::mt19937 rng(3);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(ns.begin(), ns.end(), rng);
      const OptimumReport r = optimize_over(p, ns, false);
      CHECK(r.n_opt == ref.n_opt);
      CHECK(r.G_opt == ref.G_opt);
      REQUIRE(r.table.size() == ref.table.size());
      for (std::size_t i = 0; i < r.table.size(); ++i) CHECK(r.table[i].G == ref.table[i].G);
    }
  }

  TEST_CASE("dropping the argmax row yields the second-best row") {
    const theory::TheoryParams p;
    const OptimumReport r = optimize_team(p, 1, 183);
    std::vector<ScanRow> rows = r.table;
    std::sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) { return a.G > b.G; });
    std::vector<int> rest;
    for (const ScanRow& row : r.table)
      if (row.n != r.n_opt) rest.push_back(row.n);
    const OptimumReport again = optimize_over(p, rest, false);
    CHECK(again.n_opt == rows[1].n);
    CHECK(again.G_opt == rows[1].G);
  }
}
