#pragma once

#include <string>

#include "piroute/itinerary.hpp"
#include "piroute/model.hpp"
#include "piroute/solver.hpp"

namespace piroute {

// Emits the routing problem as a mixed-integer program in LP text format
// (UTF-8, LF line endings): binary variables z (direct truck), x (first
// leg), y (second leg) per module and service, big-M timing constraints,
// capacity rows, and the selected objective. An external MILP solver run on
// the document must reproduce solve_exact's optimum.
//
// Times are in hours, volumes in m^3, costs in currency. The big-M constant
// is sized to dominate every departure, travel, arrival, and processing
// time in the instance.
std::string export_lp(const Network& net, Objective objective,
                      const HubTimes& hub_times = {},
                      const SolverOptions& options = {});

}  // namespace piroute
