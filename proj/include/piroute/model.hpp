#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace piroute {

// Scaled integer units. All timing, volume and priority arithmetic is done
// on these so that objective comparisons are exact and platform independent.
using Minutes = std::int64_t;      // time since horizon start, 1/60 h
using Liters = std::int64_t;       // volume, 1/1000 m^3
using MicroCost = std::int64_t;    // currency, 1e-6 units
using MilliWeight = std::int64_t;  // priority weight, 1/1000 units

inline double hours_of(Minutes m) { return static_cast<double>(m) / 60.0; }
inline double m3_of(Liters v) { return static_cast<double>(v) / 1000.0; }
inline double currency_of(MicroCost c) { return static_cast<double>(c) / 1e6; }

// Thrown on malformed scenario documents and bad operation arguments.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses "HH:MM" (HH may exceed 24 for multi-day horizons) or a decimal
// number of hours that is representable in whole minutes.
Minutes parse_time(const std::string& text);
Minutes minutes_from_hours(double h);  // throws ParseError if not whole minutes
Liters liters_from_m3(double v);       // throws ParseError if not whole liters
MilliWeight milliweight_from(double w);
std::string format_time(Minutes m);    // "HH:MM"

// KPIs a run can optimize. J1 counts modules on direct trucks, J2 is the
// priority-weighted sum of per-terminal completion times, J3 is transport
// cost, J4 is the spread between each shipment's first and last delivery.
enum class Objective { J1, J2, J3, J4 };

std::string to_string(Objective o);        // "J1".."J4"
std::string config_name(Objective o);      // "C1".."C4"
Objective objective_from(const std::string& s);  // accepts J* and C* forms

enum class NodeKind { OriginTerminal, DestinationTerminal, PIHub };

std::string to_string(NodeKind k);
NodeKind node_kind_from(const std::string& s);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::OriginTerminal;
  // PIHub only: per-module transfer time through the hub.
  std::optional<Minutes> processing_time;
  // DestinationTerminal only: onward travel to the distribution center.
  std::optional<Minutes> onward_time;
};

enum class Mode { Train, Truck, DirectTruck };

std::string to_string(Mode m);
Mode mode_from(const std::string& s);

struct VehicleService {
  std::string id;
  std::string from;
  std::string to;
  Mode mode = Mode::Truck;
  Minutes departure_time = 0;
  Minutes travel_time = 0;
  Liters capacity = 0;
  double unit_cost = 0.0;  // currency per (km * m^3)
  double distance_km = 0.0;
};

struct Shipment {
  std::string id;
  MilliWeight priority = 1000;  // 1.0 by default
  int module_count = 1;
  std::vector<Liters> module_volumes;  // length == module_count
  // origin terminal id -> per-module arrival times (length == module_count)
  std::map<std::string, std::vector<Minutes>> origin_arrivals;
  std::vector<std::string> allowed_destinations;

  Liters total_volume() const;
};

struct Network {
  std::vector<Node> nodes;
  std::vector<VehicleService> services;
  std::vector<Shipment> shipments;

  const Node* find_node(const std::string& id) const;
  const VehicleService* find_service(const std::string& id) const;
  const Shipment* find_shipment(const std::string& id) const;
};

// A structural invariant violation. Violations are data, not failures:
// validate() reports all of them instead of stopping at the first.
struct Violation {
  std::string code;     // machine readable, e.g. "service.hub_touch"
  std::string message;  // human readable
};

std::vector<Violation> validate(const Network& net);

bool semantically_equal(const Network& a, const Network& b);

}  // namespace piroute
