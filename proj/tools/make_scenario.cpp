// Deterministically regenerates the bundled European network scenario.
// Usage: make_scenario [output-path]   (default: data/european_network.json)
//
// The network is a west-to-east Physical Internet corridor: five origin
// terminals in Western Europe, thirteen PI-hubs in Central Europe, and two
// destination terminals in the east. Timetables and capacities follow fixed
// tables (three trains and fifteen trucks on every hub-adjacent link, twenty
// direct trucks per origin-destination pair). Everything not fixed by those
// tables — distances, travel times, arrival times, shipment volumes, direct
// truck departures, onward times — is synthetic and derived here from city
// coordinates, so the file regenerates byte-identically.
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "piroute/sampling.hpp"
#include "piroute/scenario.hpp"

using namespace piroute;

namespace {

struct City {
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
};

const std::vector<City> kOrigins = {
    {"Rotterdam", 51.92, 4.48}, {"Paris", 48.86, 2.35},
    {"Lyon", 45.76, 4.84},      {"Brussels", 50.85, 4.35},
    {"Bern", 46.95, 7.45},
};

// Hub processing times in hours, per the fixed operation-time table.
const std::vector<std::pair<City, int>> kHubs = {
    {{"Hamburg", 53.55, 10.00}, 2}, {{"Mannheim", 49.49, 8.47}, 1},
    {{"Milan", 45.46, 9.19}, 1},    {{"Berlin", 52.52, 13.40}, 2},
    {{"Prague", 50.08, 14.44}, 2},  {{"Munich", 48.14, 11.58}, 1},
    {{"Zurich", 47.37, 8.54}, 2},   {{"Stuttgart", 48.78, 9.18}, 2},
    {{"Turin", 45.07, 7.69}, 3},    {{"Genoa", 44.41, 8.93}, 1},
    {{"Naples", 40.85, 14.27}, 1},  {{"Vienna", 48.21, 16.37}, 2},
    {{"Warsaw", 52.23, 21.01}, 1},
};

const std::vector<City> kDestinations = {
    {"Budapest", 47.50, 19.04},
    {"Kyiv", 50.45, 30.52},
};

// Destination distribution center; only its onward travel time matters.
const City kMoscow{"Moscow", 55.76, 37.62};

// Origin-to-hub adjacency. Links are chosen so every first leg stays within
// one timetable day: the last second-leg departure is 23:30, so a first leg
// must arrive and clear hub processing before then. Naples and Warsaw lie
// beyond that reach from every origin and therefore have no services; they
// remain nodes (and sensitivity factors) with structurally zero influence.
// Each origin's cheapest hub toward each destination is kept effectively
// private: the evening connecting train is the one scarce cheap resource
// (one departure, fixed capacity), and if two origins' cost-optimal flows
// share it the spill-over premium blows up branch-and-bound proof times.
const std::map<std::string, std::vector<std::string>> kFirstLegLinks = {
    {"Rotterdam", {"Hamburg", "Berlin", "Prague"}},
    {"Paris", {"Mannheim", "Stuttgart", "Zurich"}},
    {"Lyon", {"Milan", "Turin", "Genoa"}},
    {"Brussels", {"Hamburg", "Mannheim", "Prague"}},
    {"Bern", {"Zurich", "Munich", "Vienna"}},
};

constexpr double kTrainKmH = 65.0;
constexpr double kTruckKmH = 80.0;
// Quoted per-container rates divided by the nominal 33 m^3 container volume.
constexpr double kTrainCost = 0.62 / 33.0;
constexpr double kTruckCost = 1.2 / 33.0;
constexpr double kDirectCost = 3.78 / 33.0;

// Fixed timetable tables (capacities in m^3, departures as minutes).
const std::vector<double> kTrainCapsLeg1 = {21, 18, 26};
const std::vector<double> kTrainCapsLeg2 = {25, 21, 27};
const std::vector<Minutes> kTrainDeps = {9 * 60, 13 * 60, 20 * 60};
const std::vector<double> kTruckCapsLeg1 = {8, 9,  6,  8, 7, 8,  11, 10,
                                            12, 10, 9, 10, 6, 15, 11};
const std::vector<double> kTruckCapsLeg2 = {8, 7, 5,  9,  6,  8,  8, 7,
                                            9, 7, 8, 10, 11, 12, 10};
const std::vector<Minutes> kTruckDeps = {
    6 * 60 + 30,  7 * 60 + 30,  8 * 60 + 30,  9 * 60 + 30,  11 * 60 + 30,
    12 * 60 + 30, 13 * 60 + 30, 14 * 60 + 30, 16 * 60,      17 * 60 + 30,
    18 * 60 + 30, 19 * 60 + 30, 20 * 60 + 30, 21 * 60 + 30, 23 * 60 + 30};
const std::vector<double> kDirectCaps = {10, 9, 6, 12, 7, 8, 6, 8, 4, 5,
                                         10, 9, 6, 12, 7, 8, 6, 2, 4, 5};

double haversine_km(const City& a, const City& b) {
  constexpr double kEarthRadiusKm = 6371.0;
  constexpr double kDeg = M_PI / 180.0;
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  const double d = 2 * kEarthRadiusKm * std::asin(std::sqrt(h));
  return std::round(d * 10.0) / 10.0;  // 0.1 km grid keeps the file stable
}

Minutes travel_minutes(double km, double speed_kmh) {
  return static_cast<Minutes>(std::llround(km / speed_kmh * 60.0));
}

Liters liters_of(double m3) {
  return static_cast<Liters>(std::llround(m3 * 1000.0));
}

// One shipment row: origin, destination, module count (fixed table),
// total container volume in liters, and arrival time at the origin.
struct ShipmentSpec {
  std::string origin;
  std::string dest;
  int modules = 0;
  Liters total = 0;
  Minutes arrival = 0;
};

// Module counts follow the fixed per-container table; volumes and arrival
// times are synthetic. Early arrivals (before the 09:00 train) form roughly
// a third of all modules so that cost-optimal routing lands a realistic
// train share at the hubs; the three largest containers arrive early so a
// resampled single-module split can still ride train/train.
const std::vector<ShipmentSpec> kShipments = {
    {"Rotterdam", "Budapest", 3, 9000, 5 * 60},        // s1 early
    {"Rotterdam", "Kyiv", 5, 14000, 6 * 60 + 30},      // s2 early, large
    {"Rotterdam", "Budapest", 2, 6000, 14 * 60},       // s3
    {"Rotterdam", "Kyiv", 6, 10000, 13 * 60 + 30},     // s4
    {"Paris", "Budapest", 7, 8000, 14 * 60 + 30},      // s5
    {"Paris", "Kyiv", 8, 9000, 13 * 60},               // s6
    {"Paris", "Budapest", 8, 10000, 4 * 60 + 30},      // s7 early
    {"Paris", "Kyiv", 9, 9000, 15 * 60},               // s8
    {"Lyon", "Budapest", 10, 15000, 7 * 60},           // s9 early, large
    {"Lyon", "Kyiv", 5, 7000, 14 * 60},                // s10
    {"Lyon", "Budapest", 6, 8000, 15 * 60 + 30},       // s11
    {"Lyon", "Kyiv", 4, 6000, 5 * 60 + 30},            // s12 early
    {"Brussels", "Budapest", 3, 8000, 6 * 60},         // s13 early
    {"Brussels", "Kyiv", 7, 10000, 13 * 60},           // s14
    {"Brussels", "Budapest", 5, 13000, 7 * 60 + 30},   // s15 early, large
    {"Brussels", "Kyiv", 4, 7000, 14 * 60 + 30},       // s16
    {"Bern", "Budapest", 6, 9000, 8 * 60},             // s17 early
    {"Bern", "Kyiv", 9, 9000, 15 * 60},                // s18
    {"Bern", "Budapest", 10, 10000, 13 * 60 + 30},     // s19
    {"Bern", "Kyiv", 8, 8000, 14 * 60},                // s20
};

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path =
      argc > 1 ? argv[1] : "data/european_network.json";

  std::map<std::string, City> cities;
  Scenario sc;

  for (const City& c : kOrigins) {
    cities[c.name] = c;
    sc.network.nodes.push_back({c.name, NodeKind::OriginTerminal, {}, {}});
  }
  for (const auto& [c, hours] : kHubs) {
    cities[c.name] = c;
    sc.network.nodes.push_back(
        {c.name, NodeKind::PIHub, Minutes{hours * 60}, {}});
  }
  for (const City& c : kDestinations) {
    cities[c.name] = c;
    sc.network.nodes.push_back(
        {c.name, NodeKind::DestinationTerminal, {},
         travel_minutes(haversine_km(c, kMoscow), kTruckKmH)});
  }

  auto add_distance = [&](const std::string& from, const std::string& to) {
    const double km = haversine_km(cities.at(from), cities.at(to));
    sc.distances[from][to] = km;
    return km;
  };

  auto add_link = [&](const std::string& from, const std::string& to,
                      const std::vector<double>& train_caps,
                      const std::vector<double>& truck_caps) {
    const double km = add_distance(from, to);
    for (std::size_t i = 0; i < train_caps.size(); ++i) {
      sc.network.services.push_back(
          {fmt::format("train-{}-{}-{}", from, to, i + 1), from, to,
           Mode::Train, kTrainDeps[i], travel_minutes(km, kTrainKmH),
           liters_of(train_caps[i]), kTrainCost, km});
    }
    for (std::size_t i = 0; i < truck_caps.size(); ++i) {
      sc.network.services.push_back(
          {fmt::format("truck-{}-{}-{:02}", from, to, i + 1), from, to,
           Mode::Truck, kTruckDeps[i], travel_minutes(km, kTruckKmH),
           liters_of(truck_caps[i]), kTruckCost, km});
    }
  };

  // Hubs that appear in the first-leg adjacency get second legs to both
  // destination terminals; the other hubs stay unserved.
  std::vector<std::string> live_hubs;
  for (const auto& [c, hours] : kHubs) {
    for (const auto& [origin, hubs] : kFirstLegLinks) {
      if (std::find(hubs.begin(), hubs.end(), c.name) != hubs.end()) {
        live_hubs.push_back(c.name);
        break;
      }
    }
  }

  for (const auto& [origin, hubs] : kFirstLegLinks) {
    for (const std::string& hub : hubs) {
      add_link(origin, hub, kTrainCapsLeg1, kTruckCapsLeg1);
    }
  }
  for (const std::string& hub : live_hubs) {
    for (const City& dest : kDestinations) {
      add_link(hub, dest.name, kTrainCapsLeg2, kTruckCapsLeg2);
    }
  }
  for (const City& origin : kOrigins) {
    for (const City& dest : kDestinations) {
      const double km = add_distance(origin.name, dest.name);
      for (std::size_t i = 0; i < kDirectCaps.size(); ++i) {
        sc.network.services.push_back(
            {fmt::format("direct-{}-{}-{:02}", origin.name, dest.name, i + 1),
             origin.name, dest.name, Mode::DirectTruck,
             Minutes{(6 + static_cast<Minutes>(i)) * 60},
             travel_minutes(km, kTruckKmH), liters_of(kDirectCaps[i]),
             kDirectCost, km});
      }
    }
  }

  for (std::size_t i = 0; i < kShipments.size(); ++i) {
    const ShipmentSpec& spec = kShipments[i];
    Shipment sh;
    sh.id = fmt::format("s{}", i + 1);
    sh.priority = 1000;
    sh.module_count = spec.modules;
    sh.module_volumes = split_volumes(spec.total, spec.modules);
    sh.origin_arrivals[spec.origin] =
        std::vector<Minutes>(static_cast<std::size_t>(spec.modules),
                             spec.arrival);
    sh.allowed_destinations = {spec.dest};
    sc.network.shipments.push_back(std::move(sh));
  }

  sc.experiment.objective = Objective::J2;
  sc.experiment.sample_count = 1000;
  sc.experiment.seed = 20260816;
  sc.experiment.harmonics = 6;
  sc.experiment.hub_time_lo = 1.0;
  sc.experiment.hub_time_hi = 3.0;
  sc.experiment.module_count_lo = 1;
  sc.experiment.module_count_hi = 10;
  sc.experiment.volume_rule = VolumeRule::EqualSplit;

  const auto violations = validate(sc.network);
  for (const Violation& v : violations) {
    fmt::print(stderr, "violation: {}\n", v.message);
  }
  if (!violations.empty()) return 1;

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fmt::print(stderr, "cannot write '{}'\n", out_path);
    return 1;
  }
  out << save_scenario(sc);
  fmt::print("wrote {} ({} nodes, {} services, {} shipments)\n", out_path,
             sc.network.nodes.size(), sc.network.services.size(),
             sc.network.shipments.size());
  return 0;
}
