#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "piroute/itinerary.hpp"
#include "piroute/model.hpp"

namespace piroute {

struct SolverOptions {
  // Default: all modules of a shipment must share one destination terminal
  // (the shipment is reassembled there). When true, every module may pick
  // its own destination independently.
  bool per_module_destinations = false;
  // solve_exhaustive refuses instances whose per-module candidate counts
  // multiply beyond this.
  std::uint64_t exhaustive_ceiling = 10'000'000;
};

enum class SolveStatus { Optimal, Infeasible };
std::string to_string(SolveStatus s);

struct ModuleRef {
  std::string shipment;
  int module = 0;
};

// The fixed global module order every assignment vector aligns with:
// shipments sorted by id, modules by index. Also the tie-breaking order.
std::vector<ModuleRef> module_order(const Network& net);

// KPI values on the scaled-integer grid: j1 in modules, j2 in
// milliweight-minutes, j3 in micro-currency, j4 in minutes. The value()
// accessors convert to natural units (count, weight-hours, currency, hours).
struct KpiVector {
  std::int64_t j1 = 0;
  std::int64_t j2 = 0;
  MicroCost j3 = 0;
  Minutes j4 = 0;

  std::int64_t scaled(Objective o) const;
  double value(Objective o) const;
  std::array<double, 4> values() const;
};

struct AssignmentSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<Itinerary> choices;  // aligned with module_order(net)
  std::map<std::string, Liters> service_loads;
  KpiVector kpis;
  std::int64_t objective_value_scaled = 0;
  double objective_value = 0.0;
  // Shipment completion: latest module delivery plus the onward leg from
  // the destination terminal to its distribution center.
  std::map<std::string, Minutes> completion_times;
};

// All four KPIs of a complete assignment (choices aligned with
// module_order). Pure; usable on any assignment, not just optimal ones.
KpiVector compute_kpis(const Network& net, const std::vector<Itinerary>& choices);

std::map<std::string, Minutes> shipment_completion_times(
    const Network& net, const std::vector<Itinerary>& choices);

// Exact minimization of one objective by two-phase branch and bound:
// phase one finds the optimal value with best-first candidate ordering,
// phase two re-walks the tree in canonical candidate order and returns the
// first assignment attaining the optimum, i.e. the lexicographically
// smallest optimal assignment. Deterministic and single-threaded.
AssignmentSolution solve_exact(const Network& net, Objective objective,
                               const HubTimes& hub_times = {},
                               const SolverOptions& options = {});

// Independent oracle: full enumeration of capacity-feasible assignments in
// canonical order, keeping the first strictly-best solution (the same
// tie-break as solve_exact). Throws when the candidate product exceeds
// options.exhaustive_ceiling.
AssignmentSolution solve_exhaustive(const Network& net, Objective objective,
                                    const HubTimes& hub_times = {},
                                    const SolverOptions& options = {});

// Mode shares in percent, counted over modules. Origin categories cover
// every module and sum to 100. Hub categories are percentages of via-hub
// modules: arrivals (in) and departures (out) each sum to 100.
struct ModalSplit {
  int total_modules = 0;
  int via_hub_modules = 0;
  double direct_pct = 0.0;
  double truck_to_hub_pct = 0.0;
  double train_to_hub_pct = 0.0;
  double hub_truck_in_pct = 0.0;
  double hub_train_in_pct = 0.0;
  double hub_truck_out_pct = 0.0;
  double hub_train_out_pct = 0.0;
};

ModalSplit modal_split(const AssignmentSolution& solution, const Network& net);

}  // namespace piroute
