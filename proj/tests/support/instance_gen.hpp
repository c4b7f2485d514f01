#pragma once

// Seeded random generator for small solver instances: a handful of origin
// terminals, up to a few PI-hubs, one or two destination terminals, sparse
// random timetables. Sized so the exhaustive oracle stays cheap.

#include <random>
#include <string>
#include <vector>

#include "piroute/model.hpp"

namespace testsupport {

struct InstanceParams {
  int max_shipments = 4;
  int max_modules = 3;
  int max_hubs = 3;
  int max_services_per_link = 3;
  int max_origins = 2;
  int max_destinations = 2;
};

inline piroute::Network random_instance(std::uint64_t seed,
                                        const InstanceParams& p = {}) {
  using namespace piroute;
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto chance = [&](double prob) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < prob;
  };

  Network net;
  const int n_origins = pick(1, p.max_origins);
  const int n_hubs = pick(1, p.max_hubs);
  const int n_dests = pick(1, p.max_destinations);

  std::vector<std::string> origins, hubs, dests;
  for (int i = 0; i < n_origins; ++i) {
    origins.push_back("O" + std::to_string(i + 1));
    net.nodes.push_back({origins.back(), NodeKind::OriginTerminal, {}, {}});
  }
  for (int i = 0; i < n_hubs; ++i) {
    hubs.push_back("P" + std::to_string(i + 1));
    net.nodes.push_back(
        {hubs.back(), NodeKind::PIHub, Minutes{pick(0, 8) * 30}, {}});
  }
  for (int i = 0; i < n_dests; ++i) {
    dests.push_back("D" + std::to_string(i + 1));
    net.nodes.push_back({dests.back(), NodeKind::DestinationTerminal, {},
                         Minutes{pick(1, 6) * 30}});
  }

  int next_service = 1;
  auto add_service = [&](const std::string& from, const std::string& to,
                         Mode mode) {
    VehicleService s;
    s.id = "v" + std::to_string(next_service++);
    s.from = from;
    s.to = to;
    s.mode = mode;
    s.departure_time = pick(2 * 4, 22 * 4) * 15;  // 2:00..22:00, 15-min grid
    s.travel_time = pick(1, 8 * 4) * 15;
    s.capacity = pick(6, 24) * 1000;  // 6..24 m^3
    s.unit_cost = pick(1, 20) / 100.0;
    s.distance_km = pick(30, 900) + pick(0, 9) / 10.0;
    net.services.push_back(std::move(s));
  };

  for (const auto& o : origins) {
    for (const auto& h : hubs) {
      if (chance(0.2)) continue;  // some links simply do not exist
      int count = pick(1, p.max_services_per_link);
      for (int i = 0; i < count; ++i)
        add_service(o, h, chance(0.5) ? Mode::Train : Mode::Truck);
    }
    for (const auto& d : dests) {
      if (chance(0.3)) continue;
      int count = pick(1, p.max_services_per_link);
      for (int i = 0; i < count; ++i) add_service(o, d, Mode::DirectTruck);
    }
  }
  for (const auto& h : hubs) {
    for (const auto& d : dests) {
      if (chance(0.2)) continue;
      int count = pick(1, p.max_services_per_link);
      for (int i = 0; i < count; ++i)
        add_service(h, d, chance(0.5) ? Mode::Train : Mode::Truck);
    }
  }

  const int n_shipments = pick(1, p.max_shipments);
  for (int i = 0; i < n_shipments; ++i) {
    Shipment s;
    s.id = "s" + std::to_string(i + 1);
    s.priority = pick(1, 30) * 100;  // 0.1 .. 3.0
    s.module_count = pick(1, p.max_modules);
    for (int m = 0; m < s.module_count; ++m)
      s.module_volumes.push_back(pick(1, 6) * 1000);
    const std::string& origin = origins[pick(0, n_origins - 1)];
    std::vector<Minutes> arrivals;
    for (int m = 0; m < s.module_count; ++m)
      arrivals.push_back(pick(0, 8 * 4) * 15);
    s.origin_arrivals[origin] = std::move(arrivals);
    // Non-empty random subset of destinations.
    for (const auto& d : dests)
      if (chance(0.7)) s.allowed_destinations.push_back(d);
    if (s.allowed_destinations.empty())
      s.allowed_destinations.push_back(dests[pick(0, n_dests - 1)]);
    net.shipments.push_back(std::move(s));
  }
  return net;
}

}  // namespace testsupport
