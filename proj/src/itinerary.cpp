#include "piroute/itinerary.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <fmt/format.h>

namespace piroute {

std::string to_string(RouteKind k) {
  return k == RouteKind::Direct ? "Direct" : "ViaHub";
}

bool itinerary_less(const Itinerary& a, const Itinerary& b) {
  return std::tie(a.origin, a.hub, a.destination, a.leg1, a.leg2) <
         std::tie(b.origin, b.hub, b.destination, b.leg1, b.leg2);
}

bool itinerary_equal(const Itinerary& a, const Itinerary& b) {
  return a.origin == b.origin && a.hub == b.hub &&
         a.destination == b.destination && a.leg1 == b.leg1 && a.leg2 == b.leg2;
}

MicroCost leg_cost(double unit_cost1, double distance1, Liters v) {
  return static_cast<MicroCost>(
      std::llround(unit_cost1 * distance1 * m3_of(v) * 1e6));
}

MicroCost leg_cost(double unit_cost1, double distance1, double unit_cost2,
                   double distance2, Liters v) {
  return static_cast<MicroCost>(std::llround(
      (unit_cost1 * distance1 + unit_cost2 * distance2) * m3_of(v) * 1e6));
}

NetworkIndex::NetworkIndex(const Network& network) : net(&network) {
  for (const auto& n : network.nodes) node_by_id.emplace(n.id, &n);
  for (const auto& s : network.services) services_from[s.from].push_back(&s);
}

std::vector<Itinerary> enumerate_itineraries(const Network& net,
                                             const Shipment& shipment,
                                             int module_index,
                                             const HubTimes& hub_times) {
  return enumerate_itineraries(NetworkIndex(net), shipment, module_index,
                               hub_times);
}

std::vector<Itinerary> enumerate_itineraries(const NetworkIndex& index,
                                             const Shipment& shipment,
                                             int module_index,
                                             const HubTimes& hub_times) {
  if (module_index < 0 || module_index >= shipment.module_count) {
    throw ParseError(fmt::format("module index {} out of range for '{}' ({})",
                                 module_index, shipment.id,
                                 shipment.module_count));
  }
  for (const auto& [hub_id, tau] : hub_times) {
    auto it = index.node_by_id.find(hub_id);
    if (it == index.node_by_id.end() || it->second->kind != NodeKind::PIHub) {
      throw ParseError(fmt::format("'{}' is not a PI-hub", hub_id));
    }
    (void)tau;
  }

  auto tau_of = [&](const Node& hub) -> Minutes {
    auto it = hub_times.find(hub.id);
    if (it != hub_times.end()) return it->second;
    return hub.processing_time.value_or(0);
  };
  auto allowed_destination = [&](const std::string& id) {
    return std::find(shipment.allowed_destinations.begin(),
                     shipment.allowed_destinations.end(),
                     id) != shipment.allowed_destinations.end();
  };
  static const std::vector<const VehicleService*> kNone;
  auto leaving = [&](const std::string& node) -> const auto& {
    auto it = index.services_from.find(node);
    return it == index.services_from.end() ? kNone : it->second;
  };

  const Liters volume = shipment.module_volumes.at(module_index);
  std::vector<Itinerary> out;

  for (const auto& [origin, arrivals] : shipment.origin_arrivals) {
    const Minutes available = arrivals.at(module_index);

    for (const VehicleService* leg1 : leaving(origin)) {
      if (leg1->departure_time < available) continue;

      if (leg1->mode == Mode::DirectTruck) {
        if (!allowed_destination(leg1->to)) continue;
        Itinerary it;
        it.kind = RouteKind::Direct;
        it.origin = origin;
        it.destination = leg1->to;
        it.leg1 = leg1->id;
        it.delivery_time = leg1->departure_time + leg1->travel_time;
        it.cost = leg_cost(leg1->unit_cost, leg1->distance_km, volume);
        it.uses_direct_truck = true;
        out.push_back(std::move(it));
        continue;
      }

      auto hub_it = index.node_by_id.find(leg1->to);
      if (hub_it == index.node_by_id.end() ||
          hub_it->second->kind != NodeKind::PIHub)
        continue;
      const Node& hub = *hub_it->second;
      const Minutes hub_ready =
          leg1->departure_time + leg1->travel_time + tau_of(hub);

      for (const VehicleService* leg2 : leaving(hub.id)) {
        if (leg2->mode == Mode::DirectTruck) continue;
        if (!allowed_destination(leg2->to)) continue;
        if (leg2->departure_time < hub_ready) continue;
        Itinerary it;
        it.kind = RouteKind::ViaHub;
        it.origin = origin;
        it.destination = leg2->to;
        it.hub = hub.id;
        it.leg1 = leg1->id;
        it.leg2 = leg2->id;
        it.delivery_time = leg2->departure_time + leg2->travel_time;
        it.cost = leg_cost(leg1->unit_cost, leg1->distance_km, leg2->unit_cost,
                           leg2->distance_km, volume);
        out.push_back(std::move(it));
      }
    }
  }

  std::sort(out.begin(), out.end(), itinerary_less);
  return out;
}

std::pair<Minutes, Minutes> delivery_gap_bounds(
    const std::vector<Itinerary>& chosen) {
  if (chosen.empty()) {
    throw ParseError("delivery_gap_bounds needs at least one itinerary");
  }
  Minutes first = chosen.front().delivery_time;
  Minutes last = first;
  for (const auto& it : chosen) {
    first = std::min(first, it.delivery_time);
    last = std::max(last, it.delivery_time);
  }
  return {first, last};
}

}  // namespace piroute
