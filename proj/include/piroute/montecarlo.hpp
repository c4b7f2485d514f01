#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "piroute/sampling.hpp"
#include "piroute/solver.hpp"

namespace piroute {

struct SampleRow {
  std::int64_t sample_index = 0;
  SolveStatus status = SolveStatus::Optimal;
  KpiVector kpis;  // meaningful only when status == Optimal
};

struct MonteCarloResult {
  Objective objective = Objective::J2;
  std::vector<SampleRow> rows;  // ascending sample_index, one per sample
  int infeasible_count() const;
};

// Draws `samples` scenario realizations, solves each under `objective`, and
// records all four KPIs of the optimal assignment. Row i depends only on
// (scenario, plan, seed, i): results are identical for any `jobs` and any
// sample count that includes i.
MonteCarloResult run_monte_carlo(const Scenario& sc, Objective objective,
                                 const SamplingPlan& plan, int samples,
                                 std::uint64_t seed, int jobs = 1,
                                 const SolverOptions& options = {});

struct KpiStats {
  double mean = 0.0;
  double variance = 0.0;                // unbiased sample variance
  std::optional<double> rel_std;       // std/|mean|; empty when mean == 0
};

struct VariabilityReport {
  int total_samples = 0;
  int feasible_samples = 0;
  std::array<KpiStats, 4> kpis;  // J1..J4 in natural units
};

// Statistics over the feasible rows. Throws when fewer than two rows are
// feasible or when more than `max_infeasible_share` of all rows are
// infeasible (the sampling ranges are then inconsistent with the network).
VariabilityReport variability_report(const MonteCarloResult& result,
                                     double max_infeasible_share = 0.05);

}  // namespace piroute
