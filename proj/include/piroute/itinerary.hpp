#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "piroute/model.hpp"

namespace piroute {

enum class RouteKind { Direct, ViaHub };

std::string to_string(RouteKind k);

// A complete, time-feasible route for one module: either a single direct
// truck, or a first-leg vehicle to one PI-hub followed by a second-leg
// vehicle to a destination terminal.
struct Itinerary {
  RouteKind kind = RouteKind::Direct;
  std::string origin;
  std::string destination;
  std::string hub;   // ViaHub only, empty for Direct
  std::string leg1;  // service id (for Direct: the direct truck itself)
  std::string leg2;  // service id, ViaHub only
  Minutes delivery_time = 0;  // arrival at the destination terminal
  MicroCost cost = 0;         // this module's transport cost contribution
  bool uses_direct_truck = false;

  double delivery_hours() const { return hours_of(delivery_time); }
  double cost_currency() const { return currency_of(cost); }
};

// Canonical ordering: (origin, hub with Direct first, destination, legs).
// Itinerary ordinals used for tie-breaking follow this order.
bool itinerary_less(const Itinerary& a, const Itinerary& b);
bool itinerary_equal(const Itinerary& a, const Itinerary& b);

// Effective hub processing times: scenario defaults overridden per hub.
// Keys must name PIHub nodes of the network.
using HubTimes = std::map<std::string, Minutes>;

// Transport cost of volume v over the given legs, rounded once so that for
// fixed legs the cost is monotone in v and proportional across rate scaling.
MicroCost leg_cost(double unit_cost1, double distance1, Liters v);
MicroCost leg_cost(double unit_cost1, double distance1, double unit_cost2,
                   double distance2, Liters v);

// Pre-bucketed service lookups over an immutable network; build once per
// solve, then enumerate many modules against it.
struct NetworkIndex {
  explicit NetworkIndex(const Network& net);
  const Network* net;
  std::map<std::string, const Node*> node_by_id;
  std::map<std::string, std::vector<const VehicleService*>> services_from;
};

// Every time-feasible itinerary for one module, canonically ordered.
// Feasibility: a leg may depart exactly when its module becomes available
// (inequalities are non-strict); via-hub routes wait at least the hub's
// processing time between arrival and the second leg's departure.
std::vector<Itinerary> enumerate_itineraries(const Network& net,
                                             const Shipment& shipment,
                                             int module_index,
                                             const HubTimes& hub_times = {});
std::vector<Itinerary> enumerate_itineraries(const NetworkIndex& index,
                                             const Shipment& shipment,
                                             int module_index,
                                             const HubTimes& hub_times = {});

// (first delivery, last delivery) over one shipment's chosen itineraries.
std::pair<Minutes, Minutes> delivery_gap_bounds(
    const std::vector<Itinerary>& chosen);

}  // namespace piroute
