#include "piroute/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace piroute {

Minutes parse_time(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ParseError(fmt::format("time '{}' is not HH:MM", text));
  }
  if (colon == 0 || colon + 3 != text.size()) {
    throw ParseError(fmt::format("time '{}' is not HH:MM", text));
  }
  for (size_t i = 0; i < text.size(); ++i) {
    if (i == colon) continue;
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      throw ParseError(fmt::format("time '{}' is not HH:MM", text));
    }
  }
  long hh = std::stol(text.substr(0, colon));
  long mm = std::stol(text.substr(colon + 1));
  if (mm > 59) throw ParseError(fmt::format("time '{}' has minutes > 59", text));
  return static_cast<Minutes>(hh) * 60 + mm;
}

Minutes minutes_from_hours(double h) {
  double scaled = h * 60.0;
  double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-6) {
    throw ParseError(
        fmt::format("time {} h is not representable in whole minutes", h));
  }
  return static_cast<Minutes>(rounded);
}

Liters liters_from_m3(double v) {
  double scaled = v * 1000.0;
  double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-6) {
    throw ParseError(
        fmt::format("volume {} m3 is not representable in whole liters", v));
  }
  return static_cast<Liters>(rounded);
}

MilliWeight milliweight_from(double w) {
  double scaled = w * 1000.0;
  double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-6) {
    throw ParseError(fmt::format(
        "priority {} needs more than 3 decimal places", w));
  }
  return static_cast<MilliWeight>(rounded);
}

std::string format_time(Minutes m) {
  return fmt::format("{}:{:02}", m / 60, m % 60);
}

std::string to_string(Objective o) {
  switch (o) {
    case Objective::J1: return "J1";
    case Objective::J2: return "J2";
    case Objective::J3: return "J3";
    case Objective::J4: return "J4";
  }
  return "?";
}

std::string config_name(Objective o) {
  switch (o) {
    case Objective::J1: return "C1";
    case Objective::J2: return "C2";
    case Objective::J3: return "C3";
    case Objective::J4: return "C4";
  }
  return "?";
}

Objective objective_from(const std::string& s) {
  if (s == "J1" || s == "C1") return Objective::J1;
  if (s == "J2" || s == "C2") return Objective::J2;
  if (s == "J3" || s == "C3") return Objective::J3;
  if (s == "J4" || s == "C4") return Objective::J4;
  throw ParseError(fmt::format("unknown objective '{}'", s));
}

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::OriginTerminal: return "OriginTerminal";
    case NodeKind::DestinationTerminal: return "DestinationTerminal";
    case NodeKind::PIHub: return "PIHub";
  }
  return "?";
}

NodeKind node_kind_from(const std::string& s) {
  if (s == "OriginTerminal") return NodeKind::OriginTerminal;
  if (s == "DestinationTerminal") return NodeKind::DestinationTerminal;
  if (s == "PIHub") return NodeKind::PIHub;
  throw ParseError(fmt::format("unknown node kind '{}'", s));
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Train: return "Train";
    case Mode::Truck: return "Truck";
    case Mode::DirectTruck: return "DirectTruck";
  }
  return "?";
}

Mode mode_from(const std::string& s) {
  if (s == "Train") return Mode::Train;
  if (s == "Truck") return Mode::Truck;
  if (s == "DirectTruck") return Mode::DirectTruck;
  throw ParseError(fmt::format("unknown mode '{}'", s));
}

Liters Shipment::total_volume() const {
  Liters t = 0;
  for (Liters v : module_volumes) t += v;
  return t;
}

const Node* Network::find_node(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const VehicleService* Network::find_service(const std::string& id) const {
  for (const auto& s : services)
    if (s.id == id) return &s;
  return nullptr;
}

const Shipment* Network::find_shipment(const std::string& id) const {
  for (const auto& s : shipments)
    if (s.id == id) return &s;
  return nullptr;
}

namespace {

void add(std::vector<Violation>& out, std::string code, std::string msg) {
  out.push_back({std::move(code), std::move(msg)});
}

}  // namespace

std::vector<Violation> validate(const Network& net) {
  std::vector<Violation> out;

  std::unordered_map<std::string, const Node*> by_id;
  for (const auto& n : net.nodes) {
    if (!by_id.emplace(n.id, &n).second) {
      add(out, "node.id.duplicate", fmt::format("duplicate node id '{}'", n.id));
    }
    if (n.kind == NodeKind::PIHub) {
      if (!n.processing_time) {
        add(out, "node.processing_time.missing",
            fmt::format("PI-hub '{}' has no processing_time", n.id));
      } else if (*n.processing_time < 0) {
        add(out, "node.processing_time.negative",
            fmt::format("PI-hub '{}' has negative processing_time", n.id));
      }
    } else if (n.processing_time) {
      add(out, "node.processing_time.forbidden",
          fmt::format("node '{}' is not a PI-hub but has processing_time", n.id));
    }
    if (n.kind == NodeKind::DestinationTerminal) {
      if (!n.onward_time) {
        add(out, "node.onward_time.missing",
            fmt::format("destination terminal '{}' has no onward_time", n.id));
      } else if (*n.onward_time < 0) {
        add(out, "node.onward_time.negative",
            fmt::format("destination terminal '{}' has negative onward_time", n.id));
      }
    } else if (n.onward_time) {
      add(out, "node.onward_time.forbidden",
          fmt::format("node '{}' is not a destination terminal but has onward_time",
                      n.id));
    }
  }

  auto kind_of = [&](const std::string& id) -> std::optional<NodeKind> {
    auto it = by_id.find(id);
    if (it == by_id.end()) return std::nullopt;
    return it->second->kind;
  };

  std::unordered_set<std::string> service_ids;
  for (const auto& s : net.services) {
    if (!service_ids.insert(s.id).second) {
      add(out, "service.id.duplicate",
          fmt::format("duplicate service id '{}'", s.id));
    }
    auto fk = kind_of(s.from);
    auto tk = kind_of(s.to);
    if (!fk) {
      add(out, "service.endpoint.unknown",
          fmt::format("service '{}' departs from unknown node '{}'", s.id, s.from));
    }
    if (!tk) {
      add(out, "service.endpoint.unknown",
          fmt::format("service '{}' arrives at unknown node '{}'", s.id, s.to));
    }
    if (fk && tk) {
      if (s.mode == Mode::DirectTruck) {
        if (*fk != NodeKind::OriginTerminal || *tk != NodeKind::DestinationTerminal) {
          add(out, "service.direct_endpoints",
              fmt::format("direct truck '{}' must connect an origin terminal to a "
                          "destination terminal",
                          s.id));
        }
      } else {
        bool first_leg = *fk == NodeKind::OriginTerminal && *tk == NodeKind::PIHub;
        bool second_leg =
            *fk == NodeKind::PIHub && *tk == NodeKind::DestinationTerminal;
        if (!first_leg && !second_leg) {
          add(out, "service.hub_touch",
              fmt::format("service '{}' must touch exactly one PI-hub "
                          "(terminal to hub, or hub to terminal)",
                          s.id));
        }
      }
    }
    if (s.departure_time < 0)
      add(out, "service.departure.negative",
          fmt::format("service '{}' has negative departure_time", s.id));
    if (s.travel_time <= 0)
      add(out, "service.travel_time.nonpositive",
          fmt::format("service '{}' has non-positive travel_time", s.id));
    if (s.capacity <= 0)
      add(out, "service.capacity.nonpositive",
          fmt::format("service '{}' has non-positive capacity", s.id));
    if (s.unit_cost < 0)
      add(out, "service.unit_cost.negative",
          fmt::format("service '{}' has negative unit_cost", s.id));
    if (s.distance_km <= 0)
      add(out, "service.distance.nonpositive",
          fmt::format("service '{}' has non-positive distance", s.id));
  }

  std::unordered_set<std::string> shipment_ids;
  for (const auto& sh : net.shipments) {
    if (!shipment_ids.insert(sh.id).second) {
      add(out, "shipment.id.duplicate",
          fmt::format("duplicate shipment id '{}'", sh.id));
    }
    if (sh.module_count < 1) {
      add(out, "shipment.module_count.nonpositive",
          fmt::format("shipment '{}' has module_count < 1", sh.id));
    }
    if (static_cast<int>(sh.module_volumes.size()) != sh.module_count) {
      add(out, "shipment.volumes.length",
          fmt::format("shipment '{}' volume list length {} != module_count {}",
                      sh.id, sh.module_volumes.size(), sh.module_count));
    }
    for (Liters v : sh.module_volumes) {
      if (v <= 0) {
        add(out, "shipment.volume.nonpositive",
            fmt::format("shipment '{}' has a non-positive module volume", sh.id));
        break;
      }
    }
    if (sh.priority < 0) {
      add(out, "shipment.priority.negative",
          fmt::format("shipment '{}' has negative priority", sh.id));
    }
    if (sh.origin_arrivals.empty()) {
      add(out, "shipment.origins.empty",
          fmt::format("shipment '{}' has no origin arrivals", sh.id));
    }
    for (const auto& [origin, arrivals] : sh.origin_arrivals) {
      auto k = kind_of(origin);
      if (!k || *k != NodeKind::OriginTerminal) {
        add(out, "shipment.origin.kind",
            fmt::format("shipment '{}' origin '{}' is not an origin terminal",
                        sh.id, origin));
      }
      if (static_cast<int>(arrivals.size()) != sh.module_count) {
        add(out, "shipment.arrivals.length",
            fmt::format("shipment '{}' arrival list at '{}' has length {} != "
                        "module_count {}",
                        sh.id, origin, arrivals.size(), sh.module_count));
      }
      for (Minutes a : arrivals) {
        if (a < 0) {
          add(out, "shipment.arrival.negative",
              fmt::format("shipment '{}' has a negative arrival time", sh.id));
          break;
        }
      }
    }
    if (sh.allowed_destinations.empty()) {
      add(out, "shipment.destinations.empty",
          fmt::format("shipment '{}' has no allowed destinations", sh.id));
    }
    for (const auto& d : sh.allowed_destinations) {
      auto k = kind_of(d);
      if (!k || *k != NodeKind::DestinationTerminal) {
        add(out, "shipment.destination.kind",
            fmt::format("shipment '{}' destination '{}' is not a destination "
                        "terminal",
                        sh.id, d));
      }
    }
  }

  return out;
}

namespace {

bool node_equal(const Node& a, const Node& b) {
  return a.id == b.id && a.kind == b.kind &&
         a.processing_time == b.processing_time && a.onward_time == b.onward_time;
}

bool service_equal(const VehicleService& a, const VehicleService& b) {
  return a.id == b.id && a.from == b.from && a.to == b.to && a.mode == b.mode &&
         a.departure_time == b.departure_time && a.travel_time == b.travel_time &&
         a.capacity == b.capacity && a.unit_cost == b.unit_cost &&
         a.distance_km == b.distance_km;
}

bool shipment_equal(const Shipment& a, const Shipment& b) {
  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  return a.id == b.id && a.priority == b.priority &&
         a.module_count == b.module_count && a.module_volumes == b.module_volumes &&
         a.origin_arrivals == b.origin_arrivals &&
         sorted(a.allowed_destinations) == sorted(b.allowed_destinations);
}

template <typename T, typename Eq>
bool sets_equal(std::vector<T> a, std::vector<T> b, Eq eq) {
  if (a.size() != b.size()) return false;
  auto by_id = [](const T& x, const T& y) { return x.id < y.id; };
  std::sort(a.begin(), a.end(), by_id);
  std::sort(b.begin(), b.end(), by_id);
  for (size_t i = 0; i < a.size(); ++i)
    if (!eq(a[i], b[i])) return false;
  return true;
}

}  // namespace

bool semantically_equal(const Network& a, const Network& b) {
  return sets_equal(a.nodes, b.nodes, node_equal) &&
         sets_equal(a.services, b.services, service_equal) &&
         sets_equal(a.shipments, b.shipments, shipment_equal);
}

}  // namespace piroute
