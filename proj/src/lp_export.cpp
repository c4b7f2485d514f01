#include "piroute/lp_export.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

namespace piroute {

namespace {

std::string sanitize(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) {
    out.insert(out.begin(), 'n');
  }
  return out;
}

std::string num(double v) {
  // Shortest round-trip decimal so the external solver sees the same value.
  return fmt::format("{}", v);
}

double hours(Minutes m) { return static_cast<double>(m) / 60.0; }

// One binary routing variable: a (module, service) pair on a given leg.
struct RouteVar {
  char leg;  // 'z' direct, 'x' first leg, 'y' second leg
  const VehicleService* svc;
  Minutes arrival;  // module arrival at the service's origin (z/x only)
  std::string name;
  double delivery_h() const {
    return hours(svc->departure_time + svc->travel_time);
  }
};

// Accumulates one linear expression as LP text.
class Expr {
 public:
  Expr& term(double coef, const std::string& var) {
    if (coef == 0.0) return *this;
    if (body_.empty()) {
      body_ = coef < 0 ? fmt::format("- {} {}", num(-coef), var)
                       : fmt::format("{} {}", num(coef), var);
    } else {
      body_ += coef < 0 ? fmt::format(" - {} {}", num(-coef), var)
                        : fmt::format(" + {} {}", num(coef), var);
    }
    return *this;
  }
  bool empty() const { return body_.empty(); }
  const std::string& body() const { return body_; }

 private:
  std::string body_;
};

std::string row(const std::string& name, const Expr& lhs, const char* rel,
                double rhs) {
  return fmt::format(" {}: {} {} {}\n", name, lhs.body(), rel, num(rhs));
}

}  // namespace

std::string export_lp(const Network& net, Objective objective,
                      const HubTimes& hub_times, const SolverOptions& options) {
  for (const auto& [hub_id, tau] : hub_times) {
    const Node* node = net.find_node(hub_id);
    if (node == nullptr || node->kind != NodeKind::PIHub) {
      throw ParseError(
          fmt::format("hub time override '{}' does not name a PI-hub", hub_id));
    }
    if (tau < 0) {
      throw ParseError(
          fmt::format("hub time override '{}' is negative", hub_id));
    }
  }

  const std::vector<ModuleRef> order = module_order(net);

  // Big-M in hours. It must exceed every departure+travel sum, every module
  // arrival, and every arrival+processing sum so that relaxed rows stay slack.
  Minutes horizon = 0;
  Minutes max_tau = 0;
  Minutes max_onward = 0;
  for (const auto& svc : net.services) {
    horizon = std::max(horizon, svc.departure_time + svc.travel_time);
  }
  for (const auto& node : net.nodes) {
    if (node.kind == NodeKind::PIHub) {
      Minutes tau = node.processing_time.value_or(0);
      if (auto it = hub_times.find(node.id); it != hub_times.end()) {
        tau = it->second;
      }
      max_tau = std::max(max_tau, tau);
    }
    if (node.kind == NodeKind::DestinationTerminal) {
      max_onward = std::max(max_onward, node.onward_time.value_or(0));
    }
  }
  for (const auto& sh : net.shipments) {
    for (const auto& [origin, arrivals] : sh.origin_arrivals) {
      for (Minutes a : arrivals) horizon = std::max(horizon, a);
    }
  }
  const double big_m = 2.0 * hours(horizon + max_tau);
  const double var_ub = big_m + hours(max_onward);

  auto tau_hours = [&](const Node& hub) {
    Minutes tau = hub.processing_time.value_or(0);
    if (auto it = hub_times.find(hub.id); it != hub_times.end()) {
      tau = it->second;
    }
    return hours(tau);
  };

  // ---- Variables -----------------------------------------------------------
  std::vector<std::vector<RouteVar>> vars(order.size());
  std::vector<const Node*> hubs;
  for (const auto& node : net.nodes) {
    if (node.kind == NodeKind::PIHub) hubs.push_back(&node);
  }

  for (std::size_t m = 0; m < order.size(); ++m) {
    const Shipment& sh = *net.find_shipment(order[m].shipment);
    const int idx = order[m].module;
    auto allowed = [&](const std::string& dest) {
      return std::find(sh.allowed_destinations.begin(),
                       sh.allowed_destinations.end(),
                       dest) != sh.allowed_destinations.end();
    };
    for (const auto& svc : net.services) {
      const Node* from = net.find_node(svc.from);
      const Node* to = net.find_node(svc.to);
      if (svc.mode == Mode::DirectTruck) {
        auto at = sh.origin_arrivals.find(svc.from);
        if (at == sh.origin_arrivals.end() || !allowed(svc.to)) continue;
        vars[m].push_back(
            {'z', &svc, at->second[static_cast<std::size_t>(idx)], {}});
      } else if (to->kind == NodeKind::PIHub) {
        auto at = sh.origin_arrivals.find(svc.from);
        if (at == sh.origin_arrivals.end()) continue;
        vars[m].push_back(
            {'x', &svc, at->second[static_cast<std::size_t>(idx)], {}});
      } else if (from->kind == NodeKind::PIHub) {
        if (!allowed(svc.to)) continue;
        vars[m].push_back({'y', &svc, 0, {}});
      }
    }
    for (auto& v : vars[m]) {
      v.name = fmt::format("{}_{}_{}_{}_{}_{}", v.leg, sanitize(sh.id), idx,
                           sanitize(v.svc->from), sanitize(v.svc->to),
                           sanitize(v.svc->id));
    }
  }

  auto dt_name = [&](const Shipment& sh, const std::string& dest) {
    return fmt::format("DT_{}_{}", sanitize(sh.id), sanitize(dest));
  };
  auto rho_name = [&](const Shipment& sh, int idx, const std::string& hub) {
    return fmt::format("rho_{}_{}_{}", sanitize(sh.id), idx, sanitize(hub));
  };
  auto w_name = [&](const Shipment& sh, const std::string& dest) {
    return fmt::format("w_{}_{}", sanitize(sh.id), sanitize(dest));
  };

  // ---- Objective -------------------------------------------------------
  Expr obj;
  for (std::size_t m = 0; m < order.size(); ++m) {
    const Shipment& sh = *net.find_shipment(order[m].shipment);
    const double vol =
        m3_of(sh.module_volumes[static_cast<std::size_t>(order[m].module)]);
    for (const auto& v : vars[m]) {
      switch (objective) {
        case Objective::J1:
          if (v.leg == 'z') obj.term(1.0, v.name);
          break;
        case Objective::J3:
          obj.term(v.svc->unit_cost * vol * v.svc->distance_km, v.name);
          break;
        default:
          break;
      }
    }
  }
  if (objective == Objective::J2) {
    for (const auto& sh : net.shipments) {
      for (const auto& dest : sh.allowed_destinations) {
        obj.term(static_cast<double>(sh.priority) / 1000.0,
                 dt_name(sh, dest));
      }
    }
  }
  if (objective == Objective::J4) {
    for (const auto& sh : net.shipments) {
      obj.term(1.0, fmt::format("omega_{}", sanitize(sh.id)));
      obj.term(-1.0, fmt::format("alpha_{}", sanitize(sh.id)));
    }
  }

  // ---- Constraints -----------------------------------------------------
  std::string body;
  std::vector<std::string> binaries;
  std::vector<std::string> continuous;  // bounded [0, var_ub]

  for (std::size_t m = 0; m < order.size(); ++m) {
    const Shipment& sh = *net.find_shipment(order[m].shipment);
    const int idx = order[m].module;
    const std::string tag = fmt::format("{}_{}", sanitize(sh.id), idx);

    // Each module leaves an origin exactly once and reaches a destination
    // exactly once; per hub, first-leg inflow equals second-leg outflow.
    Expr out_once;
    Expr in_once;
    for (const auto& v : vars[m]) {
      binaries.push_back(v.name);
      if (v.leg == 'z' || v.leg == 'x') out_once.term(1.0, v.name);
      if (v.leg == 'z' || v.leg == 'y') in_once.term(1.0, v.name);
    }
    if (out_once.empty() || in_once.empty()) {
      // No service can move this module, so the program must be infeasible.
      // An empty sum cannot be written in LP format; pin a slack to 0 = 1.
      const std::string slack = "stuck_" + tag;
      Expr stuck;
      stuck.term(1.0, slack);
      body += row(fmt::format("depart_{}", tag), stuck, "=", 1.0);
      body += row(fmt::format("departzero_{}", tag), stuck, "=", 0.0);
      continuous.push_back(slack);
      continue;
    }
    body += row(fmt::format("depart_{}", tag), out_once, "=", 1.0);
    body += row(fmt::format("arrive_{}", tag), in_once, "=", 1.0);

    for (const Node* hub : hubs) {
      Expr bal;
      for (const auto& v : vars[m]) {
        if (v.leg == 'x' && v.svc->to == hub->id) bal.term(1.0, v.name);
        if (v.leg == 'y' && v.svc->from == hub->id) bal.term(-1.0, v.name);
      }
      if (!bal.empty()) {
        body += row(fmt::format("hubflow_{}_{}", tag, sanitize(hub->id)), bal,
                    "=", 0.0);
      }
    }

    // A vehicle can only take a module that has already arrived:
    // (M - dp) var <= M - a. Services departing before the module's arrival
    // are thereby excluded.
    for (const auto& v : vars[m]) {
      if (v.leg == 'y') continue;
      Expr dep;
      dep.term(big_m - hours(v.svc->departure_time), v.name);
      body += row(fmt::format("ready_{}_{}", tag, sanitize(v.svc->id)), dep,
                  "<=", big_m - hours(v.arrival));
    }

    // Arrival time at each hub the module might pass through, and the rule
    // that processing must finish before the outgoing leg departs:
    // rho >= dp1 + t1 - M (1 - x);  rho + (M + tau - dp2) y <= M.
    for (const Node* hub : hubs) {
      bool reachable = false;
      for (const auto& v : vars[m]) {
        if (v.leg != 'x' || v.svc->to != hub->id) continue;
        Expr arr;
        arr.term(1.0, rho_name(sh, idx, hub->id));
        arr.term(-big_m, v.name);
        body += row(fmt::format("hubarr_{}_{}_{}", tag, sanitize(hub->id),
                                sanitize(v.svc->id)),
                    arr, ">=", v.delivery_h() - big_m);
        reachable = true;
      }
      if (!reachable) continue;
      continuous.push_back(rho_name(sh, idx, hub->id));
      for (const auto& v : vars[m]) {
        if (v.leg != 'y' || v.svc->from != hub->id) continue;
        Expr prc;
        prc.term(1.0, rho_name(sh, idx, hub->id));
        prc.term(big_m + tau_hours(*hub) - hours(v.svc->departure_time),
                 v.name);
        body += row(fmt::format("hubproc_{}_{}_{}", tag, sanitize(hub->id),
                                sanitize(v.svc->id)),
                    prc, "<=", big_m);
      }
    }
  }

  // Per-terminal delivery time: DT bounds every module delivered there.
  for (const auto& sh : net.shipments) {
    for (const auto& dest : sh.allowed_destinations) {
      continuous.push_back(dt_name(sh, dest));
    }
  }
  for (std::size_t m = 0; m < order.size(); ++m) {
    const Shipment& sh = *net.find_shipment(order[m].shipment);
    const std::string tag =
        fmt::format("{}_{}", sanitize(sh.id), order[m].module);
    for (const auto& v : vars[m]) {
      if (v.leg == 'x') continue;
      Expr del;
      del.term(1.0, dt_name(sh, v.svc->to));
      del.term(-big_m, v.name);
      body += row(fmt::format("deliver_{}_{}", tag, sanitize(v.svc->id)), del,
                  ">=", v.delivery_h() - big_m);
    }
  }

  // Earliest and latest module delivery per shipment (the delivery gap).
  for (const auto& sh : net.shipments) {
    continuous.push_back(fmt::format("alpha_{}", sanitize(sh.id)));
    continuous.push_back(fmt::format("omega_{}", sanitize(sh.id)));
  }
  for (std::size_t m = 0; m < order.size(); ++m) {
    const Shipment& sh = *net.find_shipment(order[m].shipment);
    const std::string tag =
        fmt::format("{}_{}", sanitize(sh.id), order[m].module);
    for (const auto& v : vars[m]) {
      if (v.leg == 'x') continue;
      Expr first;
      first.term(1.0, fmt::format("alpha_{}", sanitize(sh.id)));
      first.term(big_m, v.name);
      body += row(fmt::format("first_{}_{}", tag, sanitize(v.svc->id)), first,
                  "<=", v.delivery_h() + big_m);
      Expr last;
      last.term(1.0, fmt::format("omega_{}", sanitize(sh.id)));
      last.term(-big_m, v.name);
      body += row(fmt::format("last_{}_{}", tag, sanitize(v.svc->id)), last,
                  ">=", v.delivery_h() - big_m);
    }
  }

  // Shipment completion: delivery at the chosen terminal plus onward travel.
  if (!options.per_module_destinations) {
    for (const auto& sh : net.shipments) {
      continuous.push_back(fmt::format("DTs_{}", sanitize(sh.id)));
      Expr one;
      for (const auto& dest : sh.allowed_destinations) {
        binaries.push_back(w_name(sh, dest));
        one.term(1.0, w_name(sh, dest));
      }
      body += row(fmt::format("dest_{}", sanitize(sh.id)), one, "=", 1.0);
      for (const auto& dest : sh.allowed_destinations) {
        const Node* terminal = net.find_node(dest);
        Expr done;
        done.term(1.0, fmt::format("DTs_{}", sanitize(sh.id)));
        done.term(-1.0, dt_name(sh, dest));
        done.term(-big_m, w_name(sh, dest));
        body += row(
            fmt::format("complete_{}_{}", sanitize(sh.id), sanitize(dest)),
            done, ">=", hours(terminal->onward_time.value_or(0)) - big_m);
      }
    }
    // All modules of a shipment go to the one selected terminal.
    for (std::size_t m = 0; m < order.size(); ++m) {
      const Shipment& sh = *net.find_shipment(order[m].shipment);
      const std::string tag =
          fmt::format("{}_{}", sanitize(sh.id), order[m].module);
      for (const auto& v : vars[m]) {
        if (v.leg == 'x') continue;
        Expr pick;
        pick.term(1.0, v.name);
        pick.term(-1.0, w_name(sh, v.svc->to));
        body += row(fmt::format("samedest_{}_{}", tag, sanitize(v.svc->id)),
                    pick, "<=", 0.0);
      }
    }
  }

  // Vehicle capacities.
  for (const auto& svc : net.services) {
    Expr cap;
    for (std::size_t m = 0; m < order.size(); ++m) {
      const Shipment& sh = *net.find_shipment(order[m].shipment);
      const double vol = m3_of(
          sh.module_volumes[static_cast<std::size_t>(order[m].module)]);
      for (const auto& v : vars[m]) {
        if (v.svc == &svc) cap.term(vol, v.name);
      }
    }
    if (!cap.empty()) {
      body += row(fmt::format("cap_{}", sanitize(svc.id)), cap, "<=",
                  m3_of(svc.capacity));
    }
  }

  // ---- Assemble --------------------------------------------------------
  std::string out;
  out += "\\ Physical Internet module routing MILP\n";
  out += fmt::format("\\ objective: {}\n", to_string(objective));
  out += fmt::format("\\ big-M: {} hours\n", num(big_m));
  out += "Minimize\n";
  out += obj.empty() ? " obj:\n" : fmt::format(" obj: {}\n", obj.body());
  out += "Subject To\n";
  out += body;
  out += "Bounds\n";
  std::sort(continuous.begin(), continuous.end());
  continuous.erase(std::unique(continuous.begin(), continuous.end()),
                   continuous.end());
  for (const auto& v : continuous) {
    out += fmt::format(" 0 <= {} <= {}\n", v, num(var_ub));
  }
  if (!binaries.empty()) {
    out += "Binary\n";
    for (const auto& v : binaries) {
      out += fmt::format(" {}\n", v);
    }
  }
  out += "End\n";
  return out;
}

}  // namespace piroute
