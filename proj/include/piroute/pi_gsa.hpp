#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "piroute/scenario.hpp"
#include "piroute/solver.hpp"

namespace piroute {

// One uncertain input of the routing model, as seen by the sensitivity
// analysis.
enum class FactorKind {
  HubTime,        // one hub's processing time
  GroupedCounts,  // a single factor driving every shipment's module count
  ShipmentCount,  // one shipment's module count
};

std::string to_string(FactorKind k);

struct GsaFactor {
  FactorKind kind = FactorKind::HubTime;
  std::string entity_id;  // hub or shipment id; empty for the grouped factor
  std::string name;       // "tau:<hub>", "n_s", or "count:<shipment>"
};

struct GsaOptions {
  int harmonics = 6;
  // Default: all module counts move together as one factor. When true,
  // every shipment's count becomes its own factor instead.
  bool separate_count_factors = false;
  int jobs = 1;
  // Sample sizes at which intermediate indices are recorded (ascending).
  // Empty selects a 100-200-500-1000-... ladder. The full sample count is
  // always appended as the final checkpoint.
  std::vector<int> checkpoints;
  // Abort when more than this share of realizations has no feasible
  // assignment; below it, infeasible outputs are replaced by the feasible
  // mean so they carry no variance.
  double max_infeasible_share = 0.05;
};

struct GsaCheckpoint {
  int samples = 0;
  std::vector<std::array<double, 4>> clipped;  // factor x KPI (J1..J4)
};

struct SensitivityRun {
  Objective objective = Objective::J2;
  std::vector<GsaFactor> factors;              // row order of the matrices
  std::vector<std::array<double, 4>> raw;      // factor x KPI
  std::vector<std::array<double, 4>> clipped;  // factor x KPI, in [0, 1]
  std::array<double, 4> total_variance{};
  std::array<double, 4> output_mean{};
  std::array<bool, 4> low_variance{};   // per KPI: outputs were constant
  std::array<bool, 4> sum_above_one{};  // per KPI: clipped indices sum > 1.1
  int sample_count = 0;
  int harmonics = 0;
  std::int64_t model_runs = 0;  // exactly one solve per sample
  int imputed_samples = 0;      // infeasible realizations replaced by the mean
  std::vector<GsaCheckpoint> trace;  // ascending; last == the full run
};

// The factor layout used by pi_sensitivity_run: hub-time factors sorted by
// hub id, then the module-count factor(s).
std::vector<GsaFactor> gsa_factors(const Scenario& sc,
                                   bool separate_count_factors);

// First-order sensitivity of all four KPIs to the uncertain inputs, under
// the optimal assignment for `objective`. Each sample draws hub times and
// module counts from the scenario's experiment ranges, solves once, and
// feeds all four KPIs from that single solve. Deterministic for fixed
// (scenario, objective, samples, seed, options), independent of jobs.
SensitivityRun pi_sensitivity_run(const Scenario& sc, Objective objective,
                                  int samples, std::uint64_t seed,
                                  const GsaOptions& options = {});

}  // namespace piroute
