#include "piroute/scenario.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace piroute {

using ojson = nlohmann::ordered_json;

std::string to_string(VolumeRule r) {
  switch (r) {
    case VolumeRule::EqualSplit: return "EqualSplit";
    case VolumeRule::IidVolumes: return "IidVolumes";
  }
  return "?";
}

VolumeRule volume_rule_from(const std::string& s) {
  if (s == "EqualSplit") return VolumeRule::EqualSplit;
  if (s == "IidVolumes") return VolumeRule::IidVolumes;
  throw ParseError(fmt::format("unknown volume rule '{}'", s));
}

ValidationError::ValidationError(std::string message,
                                 std::vector<Violation> violations)
    : ParseError(std::move(message)), violations_(std::move(violations)) {}

namespace {

const ojson& require(const ojson& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(fmt::format("{}: missing field '{}'", ctx, key));
  }
  return *it;
}

std::string read_string(const ojson& v, const std::string& ctx) {
  if (!v.is_string()) throw ParseError(fmt::format("{}: expected string", ctx));
  return v.get<std::string>();
}

double read_number(const ojson& v, const std::string& ctx) {
  if (!v.is_number()) throw ParseError(fmt::format("{}: expected number", ctx));
  return v.get<double>();
}

Minutes read_time(const ojson& v, const std::string& ctx) {
  try {
    if (v.is_string()) return parse_time(v.get<std::string>());
    if (v.is_number()) return minutes_from_hours(v.get<double>());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", ctx, e.what()));
  }
  throw ParseError(
      fmt::format("{}: expected \"HH:MM\" or decimal hours", ctx));
}

Liters read_volume(const ojson& v, const std::string& ctx) {
  try {
    return liters_from_m3(read_number(v, ctx));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", ctx, e.what()));
  }
}

Node parse_node(const ojson& j, const std::string& ctx) {
  Node n;
  n.id = read_string(require(j, "id", ctx), ctx + ".id");
  n.kind = node_kind_from(read_string(require(j, "kind", ctx), ctx + ".kind"));
  if (j.contains("processing_time"))
    n.processing_time = read_time(j["processing_time"], ctx + ".processing_time");
  if (j.contains("onward_time"))
    n.onward_time = read_time(j["onward_time"], ctx + ".onward_time");
  return n;
}

VehicleService parse_service(const ojson& j, const std::string& ctx) {
  VehicleService s;
  s.id = read_string(require(j, "id", ctx), ctx + ".id");
  s.from = read_string(require(j, "from", ctx), ctx + ".from");
  s.to = read_string(require(j, "to", ctx), ctx + ".to");
  s.mode = mode_from(read_string(require(j, "mode", ctx), ctx + ".mode"));
  s.departure_time = read_time(require(j, "departure_time", ctx), ctx + ".departure_time");
  s.travel_time = read_time(require(j, "travel_time", ctx), ctx + ".travel_time");
  s.capacity = read_volume(require(j, "capacity", ctx), ctx + ".capacity");
  s.unit_cost = read_number(require(j, "unit_cost", ctx), ctx + ".unit_cost");
  if (j.contains("distance"))
    s.distance_km = read_number(j["distance"], ctx + ".distance");
  return s;
}

Shipment parse_shipment(const ojson& j, const std::string& ctx) {
  Shipment s;
  s.id = read_string(require(j, "id", ctx), ctx + ".id");
  if (j.contains("priority")) {
    try {
      s.priority = milliweight_from(read_number(j["priority"], ctx + ".priority"));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}.priority: {}", ctx, e.what()));
    }
  }
  const auto& count = require(j, "module_count", ctx);
  if (!count.is_number_integer())
    throw ParseError(fmt::format("{}.module_count: expected integer", ctx));
  s.module_count = count.get<int>();
  const auto& vols = require(j, "module_volumes", ctx);
  if (!vols.is_array())
    throw ParseError(fmt::format("{}.module_volumes: expected array", ctx));
  for (size_t i = 0; i < vols.size(); ++i) {
    s.module_volumes.push_back(
        read_volume(vols[i], fmt::format("{}.module_volumes[{}]", ctx, i)));
  }
  const auto& arr = require(j, "origin_arrivals", ctx);
  if (!arr.is_object())
    throw ParseError(fmt::format("{}.origin_arrivals: expected object", ctx));
  for (const auto& [origin, times] : arr.items()) {
    if (!times.is_array())
      throw ParseError(
          fmt::format("{}.origin_arrivals.{}: expected array", ctx, origin));
    std::vector<Minutes> list;
    for (size_t i = 0; i < times.size(); ++i) {
      list.push_back(read_time(
          times[i], fmt::format("{}.origin_arrivals.{}[{}]", ctx, origin, i)));
    }
    s.origin_arrivals[origin] = std::move(list);
  }
  const auto& dests = require(j, "allowed_destinations", ctx);
  if (!dests.is_array())
    throw ParseError(fmt::format("{}.allowed_destinations: expected array", ctx));
  for (size_t i = 0; i < dests.size(); ++i) {
    s.allowed_destinations.push_back(read_string(
        dests[i], fmt::format("{}.allowed_destinations[{}]", ctx, i)));
  }
  return s;
}

void parse_range(const ojson& j, const std::string& ctx, double& lo, double& hi) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError(fmt::format("{}: expected [lo, hi]", ctx));
  lo = read_number(j[0], ctx + "[0]");
  hi = read_number(j[1], ctx + "[1]");
  if (lo > hi) throw ParseError(fmt::format("{}: lo > hi", ctx));
  if (lo <= 0) throw ParseError(fmt::format("{}: bounds must be positive", ctx));
}

ExperimentConfig parse_experiment(const ojson& j) {
  ExperimentConfig cfg;
  const std::string ctx = "experiment";
  if (j.contains("configuration"))
    cfg.objective = objective_from(read_string(j["configuration"], ctx + ".configuration"));
  if (j.contains("objective"))
    cfg.objective = objective_from(read_string(j["objective"], ctx + ".objective"));
  if (j.contains("samples")) {
    cfg.sample_count = static_cast<int>(read_number(j["samples"], ctx + ".samples"));
    if (cfg.sample_count < 1)
      throw ParseError("experiment.samples: must be >= 1");
  }
  if (j.contains("seed"))
    cfg.seed = static_cast<std::uint64_t>(read_number(j["seed"], ctx + ".seed"));
  if (j.contains("harmonics")) {
    cfg.harmonics = static_cast<int>(read_number(j["harmonics"], ctx + ".harmonics"));
    if (cfg.harmonics < 1)
      throw ParseError("experiment.harmonics: must be >= 1");
  }
  if (j.contains("hub_time_hours"))
    parse_range(j["hub_time_hours"], ctx + ".hub_time_hours", cfg.hub_time_lo,
                cfg.hub_time_hi);
  if (j.contains("module_count_range")) {
    double lo = 0, hi = 0;
    parse_range(j["module_count_range"], ctx + ".module_count_range", lo, hi);
    if (lo != static_cast<int>(lo) || hi != static_cast<int>(hi))
      throw ParseError("experiment.module_count_range: bounds must be integers");
    cfg.module_count_lo = static_cast<int>(lo);
    cfg.module_count_hi = static_cast<int>(hi);
  }
  if (j.contains("volume_rule"))
    cfg.volume_rule =
        volume_rule_from(read_string(j["volume_rule"], ctx + ".volume_rule"));
  if (j.contains("module_volume_m3"))
    parse_range(j["module_volume_m3"], ctx + ".module_volume_m3",
                cfg.module_volume_lo, cfg.module_volume_hi);
  return cfg;
}

}  // namespace

Scenario load_scenario(const std::string& json_text) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("scenario document is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object())
    throw ParseError("scenario document must be a JSON object");

  Scenario sc;
  if (doc.contains("nodes")) {
    const auto& nodes = doc["nodes"];
    if (!nodes.is_array()) throw ParseError("nodes: expected array");
    for (size_t i = 0; i < nodes.size(); ++i)
      sc.network.nodes.push_back(
          parse_node(nodes[i], fmt::format("nodes[{}]", i)));
  }
  if (doc.contains("services")) {
    const auto& services = doc["services"];
    if (!services.is_array()) throw ParseError("services: expected array");
    for (size_t i = 0; i < services.size(); ++i)
      sc.network.services.push_back(
          parse_service(services[i], fmt::format("services[{}]", i)));
  }
  if (doc.contains("shipments")) {
    const auto& shipments = doc["shipments"];
    if (!shipments.is_array()) throw ParseError("shipments: expected array");
    for (size_t i = 0; i < shipments.size(); ++i)
      sc.network.shipments.push_back(
          parse_shipment(shipments[i], fmt::format("shipments[{}]", i)));
  }
  if (doc.contains("distances")) {
    const auto& dist = doc["distances"];
    if (!dist.is_object()) throw ParseError("distances: expected object");
    for (const auto& [from, row] : dist.items()) {
      if (!row.is_object())
        throw ParseError(fmt::format("distances.{}: expected object", from));
      for (const auto& [to, km] : row.items()) {
        sc.distances[from][to] =
            read_number(km, fmt::format("distances.{}.{}", from, to));
      }
    }
  }
  if (doc.contains("experiment")) sc.experiment = parse_experiment(doc["experiment"]);

  // Services may omit their distance when the matrix has the link.
  for (auto& s : sc.network.services) {
    if (s.distance_km > 0) continue;
    auto from = sc.distances.find(s.from);
    if (from != sc.distances.end()) {
      auto to = from->second.find(s.to);
      if (to != from->second.end()) {
        s.distance_km = to->second;
        continue;
      }
    }
    throw ParseError(fmt::format(
        "services: '{}' has no distance and the matrix lacks {} -> {}", s.id,
        s.from, s.to));
  }

  auto violations = validate(sc.network);
  if (!violations.empty()) {
    std::string msg =
        fmt::format("scenario failed validation ({} violations):", violations.size());
    for (const auto& v : violations)
      msg += fmt::format("\n  [{}] {}", v.code, v.message);
    throw ValidationError(msg, std::move(violations));
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open scenario file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

std::string save_scenario(const Scenario& sc) {
  ojson doc;
  doc["nodes"] = ojson::array();
  for (const auto& n : sc.network.nodes) {
    ojson j;
    j["id"] = n.id;
    j["kind"] = to_string(n.kind);
    if (n.processing_time) j["processing_time"] = format_time(*n.processing_time);
    if (n.onward_time) j["onward_time"] = format_time(*n.onward_time);
    doc["nodes"].push_back(std::move(j));
  }
  doc["services"] = ojson::array();
  for (const auto& s : sc.network.services) {
    ojson j;
    j["id"] = s.id;
    j["from"] = s.from;
    j["to"] = s.to;
    j["mode"] = to_string(s.mode);
    j["departure_time"] = format_time(s.departure_time);
    j["travel_time"] = format_time(s.travel_time);
    j["capacity"] = m3_of(s.capacity);
    j["unit_cost"] = s.unit_cost;
    j["distance"] = s.distance_km;
    doc["services"].push_back(std::move(j));
  }
  doc["shipments"] = ojson::array();
  for (const auto& sh : sc.network.shipments) {
    ojson j;
    j["id"] = sh.id;
    j["priority"] = static_cast<double>(sh.priority) / 1000.0;
    j["module_count"] = sh.module_count;
    j["module_volumes"] = ojson::array();
    for (Liters v : sh.module_volumes) j["module_volumes"].push_back(m3_of(v));
    j["origin_arrivals"] = ojson::object();
    for (const auto& [origin, times] : sh.origin_arrivals) {
      ojson list = ojson::array();
      for (Minutes t : times) list.push_back(format_time(t));
      j["origin_arrivals"][origin] = std::move(list);
    }
    j["allowed_destinations"] = sh.allowed_destinations;
    doc["shipments"].push_back(std::move(j));
  }
  if (!sc.distances.empty()) {
    ojson dist = ojson::object();
    for (const auto& [from, row] : sc.distances) {
      ojson jrow = ojson::object();
      for (const auto& [to, km] : row) jrow[to] = km;
      dist[from] = std::move(jrow);
    }
    doc["distances"] = std::move(dist);
  }
  {
    const auto& e = sc.experiment;
    ojson j;
    j["configuration"] = config_name(e.objective);
    j["samples"] = e.sample_count;
    j["seed"] = e.seed;
    j["harmonics"] = e.harmonics;
    j["hub_time_hours"] = {e.hub_time_lo, e.hub_time_hi};
    j["module_count_range"] = {e.module_count_lo, e.module_count_hi};
    j["volume_rule"] = to_string(e.volume_rule);
    if (e.volume_rule == VolumeRule::IidVolumes)
      j["module_volume_m3"] = {e.module_volume_lo, e.module_volume_hi};
    doc["experiment"] = std::move(j);
  }
  return doc.dump(2) + "\n";
}

}  // namespace piroute
