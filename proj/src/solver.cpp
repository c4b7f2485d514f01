#include "piroute/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

namespace piroute {

namespace {

// Saturation value for partial bounds; far above any reachable objective
// on the scaled-integer grid, far below the int64 overflow line even when
// summed across shipments.
constexpr std::int64_t kInf = 1'000'000'000'000'000;
constexpr Minutes kNoTime = std::numeric_limits<Minutes>::max() / 4;
constexpr std::int64_t kUnsolved = std::numeric_limits<std::int64_t>::max() / 2;

// Positions of each shipment's block inside the canonical module order,
// resolved once so leaf evaluations need no lookups.
struct OrderIndex {
  std::vector<ModuleRef> order;
  std::vector<const Shipment*> shipments;  // one per block
  std::vector<int> block_begin;            // size = shipments.size() + 1

  explicit OrderIndex(const Network& net) {
    order = module_order(net);
    size_t i = 0;
    while (i < order.size()) {
      const Shipment* sh = net.find_shipment(order[i].shipment);
      shipments.push_back(sh);
      block_begin.push_back(static_cast<int>(i));
      while (i < order.size() && order[i].shipment == sh->id) ++i;
    }
    block_begin.push_back(static_cast<int>(order.size()));
  }
};

KpiVector kpis_for(const OrderIndex& ord,
                   const std::vector<Itinerary>& choices) {
  if (choices.size() != ord.order.size()) {
    throw ParseError(fmt::format("assignment has {} itineraries for {} modules",
                                 choices.size(), ord.order.size()));
  }
  KpiVector k;
  for (size_t b = 0; b < ord.shipments.size(); ++b) {
    const Shipment* sh = ord.shipments[b];
    std::vector<std::pair<const std::string*, Minutes>> terminal_max;
    Minutes lo = kNoTime, hi = -1;
    for (int i = ord.block_begin[b]; i < ord.block_begin[b + 1]; ++i) {
      const Itinerary& it = choices[i];
      if (it.leg1.empty()) {
        throw ParseError(fmt::format("module {} of '{}' has no itinerary",
                                     ord.order[i].module, sh->id));
      }
      if (it.uses_direct_truck) k.j1 += 1;
      k.j3 += it.cost;
      lo = std::min(lo, it.delivery_time);
      hi = std::max(hi, it.delivery_time);
      bool found = false;
      for (auto& [dest, t] : terminal_max) {
        if (*dest == it.destination) {
          t = std::max(t, it.delivery_time);
          found = true;
        }
      }
      if (!found) terminal_max.emplace_back(&it.destination, it.delivery_time);
    }
    Minutes sum_dt = 0;
    for (const auto& [dest, t] : terminal_max) sum_dt += t;
    k.j2 += sh->priority * sum_dt;
    k.j4 += hi - lo;
  }
  return k;
}

}  // namespace

std::string to_string(SolveStatus s) {
  return s == SolveStatus::Optimal ? "Optimal" : "Infeasible";
}

std::vector<ModuleRef> module_order(const Network& net) {
  std::vector<const Shipment*> ships;
  ships.reserve(net.shipments.size());
  for (const auto& s : net.shipments) ships.push_back(&s);
  std::sort(ships.begin(), ships.end(),
            [](const Shipment* a, const Shipment* b) { return a->id < b->id; });
  std::vector<ModuleRef> order;
  for (const Shipment* s : ships)
    for (int m = 0; m < s->module_count; ++m) order.push_back({s->id, m});
  return order;
}

std::int64_t KpiVector::scaled(Objective o) const {
  switch (o) {
    case Objective::J1: return j1;
    case Objective::J2: return j2;
    case Objective::J3: return j3;
    case Objective::J4: return j4;
  }
  std::abort();
}

double KpiVector::value(Objective o) const {
  switch (o) {
    case Objective::J1: return static_cast<double>(j1);
    case Objective::J2: return static_cast<double>(j2) / (1000.0 * 60.0);
    case Objective::J3: return static_cast<double>(j3) / 1e6;
    case Objective::J4: return static_cast<double>(j4) / 60.0;
  }
  std::abort();
}

std::array<double, 4> KpiVector::values() const {
  return {value(Objective::J1), value(Objective::J2), value(Objective::J3),
          value(Objective::J4)};
}

KpiVector compute_kpis(const Network& net,
                       const std::vector<Itinerary>& choices) {
  return kpis_for(OrderIndex(net), choices);
}

std::map<std::string, Minutes> shipment_completion_times(
    const Network& net, const std::vector<Itinerary>& choices) {
  OrderIndex ord(net);
  if (choices.size() != ord.order.size())
    throw ParseError("assignment is incomplete");
  std::map<std::string, Minutes> out;
  for (size_t b = 0; b < ord.shipments.size(); ++b) {
    const Shipment* sh = ord.shipments[b];
    std::map<std::string, Minutes> terminal_max;
    for (int i = ord.block_begin[b]; i < ord.block_begin[b + 1]; ++i) {
      const Itinerary& it = choices[i];
      auto [pos, inserted] =
          terminal_max.try_emplace(it.destination, it.delivery_time);
      if (!inserted) pos->second = std::max(pos->second, it.delivery_time);
    }
    Minutes done = 0;
    for (const auto& [terminal, t] : terminal_max) {
      const Node* n = net.find_node(terminal);
      done = std::max(done, t + (n ? n->onward_time.value_or(0) : 0));
    }
    out[sh->id] = done;
  }
  return out;
}

namespace {

struct Cand {
  Itinerary it;
  Liters volume = 0;
  int svc1 = -1;
  int svc2 = -1;
  int dest = -1;
  std::int64_t contrib = 0;
  Minutes delivery = 0;
};

struct DestStats {
  std::int64_t min_contrib = kInf;
  Minutes min_delivery = kNoTime;
  std::vector<Minutes> deliveries;  // sorted unique
};

const DestStats kEmptyStats{};

struct ModuleData {
  int ship = 0;
  bool same_as_prev = false;  // identical twin of the previous module
  std::vector<Cand> cands;    // canonical order; index == ordinal
  std::vector<int> heur;      // phase-one visiting order
  std::vector<std::pair<int, DestStats>> by_dest;
  DestStats all;

  const DestStats& stats(int dest) const {
    if (dest < 0) return all;
    for (const auto& [d, s] : by_dest)
      if (d == dest) return s;
    return kEmptyStats;
  }
};

// One leg position of a route family, flattened to a capacitated arc of the
// fractional relaxation. For final-leg arcs the delivery time is exact: a
// timetabled departure fixes it. The rate is a per-liter lower bound over
// every itinerary of the shipment that rides this service on this side.
struct RelaxArc {
  int svc = -1;
  Minutes delivery = 0;
  double rate = 0.0;  // micro-cost per liter
};

struct RelaxPool {
  std::vector<RelaxArc> final_by_delivery;  // leg2/direct side, delivery asc
  std::vector<RelaxArc> final_by_rate;      // leg2/direct side, rate asc
  std::vector<RelaxArc> first_by_rate;      // leg1/direct side, rate asc
};

struct ShipData {
  const Shipment* sh = nullptr;
  std::vector<int> mods;
  std::vector<std::pair<int, RelaxPool>> pools;  // keyed by destination; -1 = any
  Liters total_volume = 0;
  Liters min_volume = 0;  // smallest module; quantizes arc capacities
  std::int64_t unfixed_bound = 0;
  bool feasible = true;

  const RelaxPool* pool(int dest) const {
    for (const auto& [d, p] : pools)
      if (d == dest) return &p;
    return nullptr;
  }
};

struct ShipState {
  int assigned = 0;
  int dest = -1;
  Minutes lo = kNoTime;
  Minutes hi = -1;
  Liters unassigned_volume = 0;
  std::int64_t contrib = 0;
  std::int64_t bound = 0;
};

Minutes forced_growth(const DestStats& stats, Minutes lo, Minutes hi) {
  const auto& v = stats.deliveries;
  if (v.empty()) return kNoTime;
  auto it = std::lower_bound(v.begin(), v.end(), lo);
  if (it != v.end() && *it <= hi) return 0;
  Minutes best = kNoTime;
  if (it != v.end()) best = std::min(best, *it - hi);
  if (it != v.begin()) best = std::min(best, lo - *std::prev(it));
  return best;
}

class Engine {
 public:
  Engine(const Network& net, Objective objective, const HubTimes& hub_times,
         const SolverOptions& options)
      : net_(net), ord_(net), obj_(objective), opt_(options),
        hub_times_(hub_times) {
    exact_leaf_ = !(obj_ == Objective::J2 && opt_.per_module_destinations);

    services_.reserve(net.services.size());
    for (const auto& s : net.services) {
      svc_index_.emplace(s.id, static_cast<int>(services_.size()));
      services_.push_back(&s);
      capacity_.push_back(s.capacity);
    }
    load_.assign(services_.size(), 0);

    NetworkIndex index(net);
    ships_.resize(ord_.shipments.size());
    mods_.resize(ord_.order.size());
    for (size_t b = 0; b < ord_.shipments.size(); ++b) {
      ships_[b].sh = ord_.shipments[b];
      for (int g = ord_.block_begin[b]; g < ord_.block_begin[b + 1]; ++g)
        ships_[b].mods.push_back(g);
    }

    for (size_t b = 0; b < ships_.size(); ++b) {
      const Shipment& sh = *ships_[b].sh;
      for (size_t j = 0; j < ships_[b].mods.size(); ++j) {
        const int g = ships_[b].mods[j];
        const int m = ord_.order[g].module;
        ModuleData& md = mods_[g];
        md.ship = static_cast<int>(b);
        if (j > 0 && identical_modules(sh, m - 1, m)) {
          md.same_as_prev = true;
          md.cands = mods_[g - 1].cands;
          md.by_dest = mods_[g - 1].by_dest;
          md.all = mods_[g - 1].all;
          md.heur = mods_[g - 1].heur;
          continue;
        }
        auto routes = enumerate_itineraries(index, sh, m, hub_times_);
        md.cands.reserve(routes.size());
        for (auto& r : routes) {
          Cand c;
          c.volume = sh.module_volumes[m];
          c.svc1 = svc_index_.at(r.leg1);
          c.svc2 = r.leg2.empty() ? -1 : svc_index_.at(r.leg2);
          c.dest = dest_id(r.destination);
          c.delivery = r.delivery_time;
          switch (obj_) {
            case Objective::J1: c.contrib = r.uses_direct_truck ? 1 : 0; break;
            case Objective::J3: c.contrib = r.cost; break;
            default: c.contrib = 0;
          }
          c.it = std::move(r);
          md.cands.push_back(std::move(c));
        }
        build_stats(md);
        build_heuristic_order(md);
      }
    }

    affected_.assign(services_.size(), {});
    for (size_t b = 0; b < ships_.size(); ++b) {
      ShipData& sd = ships_[b];
      sd.min_volume = std::numeric_limits<Liters>::max();
      for (int g : sd.mods) {
        const Liters v = sd.sh->module_volumes[ord_.order[g].module];
        sd.total_volume += v;
        sd.min_volume = std::min(sd.min_volume, v);
      }
      sd.min_volume = std::max<Liters>(sd.min_volume, 1);
      build_pools(sd);
      for (const auto& [d, p] : sd.pools) {
        (void)d;
        for (const RelaxArc& a : p.final_by_delivery) mark_affected(a.svc, b);
        for (const RelaxArc& a : p.first_by_rate) mark_affected(a.svc, b);
      }
      sd.unfixed_bound = zero_assigned_bound(b);  // loads are all zero here
      sd.feasible = sd.unfixed_bound < kInf;
    }

    // The value search may visit shipments in any order as long as each
    // block stays contiguous and in-order (the twin symmetry break needs
    // that). Large shipments go first: they strain shared capacity most, so
    // resolving them early replaces the loosest bounds with exact costs.
    std::vector<size_t> blocks(ships_.size());
    for (size_t b = 0; b < blocks.size(); ++b) blocks[b] = b;
    std::sort(blocks.begin(), blocks.end(), [&](size_t a, size_t b) {
      if (ships_[a].total_volume != ships_[b].total_volume)
        return ships_[a].total_volume > ships_[b].total_volume;
      return ships_[a].sh->id < ships_[b].sh->id;
    });
    p1_seq_.reserve(mods_.size());
    for (size_t b : blocks)
      for (int g : ships_[b].mods) p1_seq_.push_back(g);
  }

  AssignmentSolution run() {
    AssignmentSolution sol;
    for (const auto& md : mods_) {
      if (md.cands.empty()) return sol;  // Infeasible
    }
    for (const auto& sd : ships_) {
      if (!sd.feasible) return sol;
    }

    chosen_.assign(mods_.size(), -1);
    state_.assign(ships_.size(), ShipState{});
    undo_.clear();
    total_bound_ = 0;
    for (const auto& sd : ships_) total_bound_ += sd.unfixed_bound;
    for (size_t b = 0; b < ships_.size(); ++b) {
      state_[b].bound = ships_[b].unfixed_bound;
      state_[b].unassigned_volume = ships_[b].total_volume;
    }

    dbg_ = std::getenv("PIROUTE_SOLVER_DEBUG") != nullptr;
    const bool dbg = dbg_;
    auto t0 = std::chrono::steady_clock::now();
    if (dbg) {
      size_t total = 0, mx = 0;
      for (const auto& md : mods_) {
        total += md.cands.size();
        mx = std::max(mx, md.cands.size());
      }
      std::fprintf(stderr,
                   "[solver] modules=%zu cands total=%zu max=%zu root=%lld\n",
                   mods_.size(), total, mx,
                   static_cast<long long>(total_bound_));
    }

    best_ = kUnsolved;
    search_value(0);
    if (dbg) {
      auto t1 = std::chrono::steady_clock::now();
      std::fprintf(
          stderr, "[solver] phase1 nodes=%llu best=%lld  %.3fs\n",
          static_cast<unsigned long long>(nodes_v_),
          static_cast<long long>(best_),
          std::chrono::duration<double>(t1 - t0).count());
      t0 = t1;
    }
    if (best_ == kUnsolved) return sol;

    found_ = false;
    search_lexicographic(0);
    if (dbg) {
      auto t1 = std::chrono::steady_clock::now();
      std::fprintf(stderr, "[solver] phase2 nodes=%llu  %.3fs\n",
                   static_cast<unsigned long long>(nodes_l_),
                   std::chrono::duration<double>(t1 - t0).count());
    }
    if (!found_) {
      throw std::logic_error(
          "solver invariant broken: optimum found but not reconstructible");
    }

    sol.status = SolveStatus::Optimal;
    sol.choices.reserve(mods_.size());
    for (size_t g = 0; g < mods_.size(); ++g)
      sol.choices.push_back(mods_[g].cands[best_choice_[g]].it);
    std::vector<Liters> used(services_.size(), 0);
    for (size_t g = 0; g < mods_.size(); ++g) {
      const Cand& c = mods_[g].cands[best_choice_[g]];
      used[c.svc1] += c.volume;
      if (c.svc2 >= 0) used[c.svc2] += c.volume;
    }
    for (size_t i = 0; i < services_.size(); ++i)
      if (used[i] > 0) sol.service_loads[services_[i]->id] = used[i];
    sol.kpis = kpis_for(ord_, sol.choices);
    sol.objective_value_scaled = sol.kpis.scaled(obj_);
    sol.objective_value = sol.kpis.value(obj_);
    if (sol.objective_value_scaled != best_) {
      throw std::logic_error(
          "solver invariant broken: reported KPIs disagree with the search");
    }
    sol.completion_times = shipment_completion_times(net_, sol.choices);
    return sol;
  }

 private:
  bool identical_modules(const Shipment& sh, int a, int b) const {
    if (sh.module_volumes[a] != sh.module_volumes[b]) return false;
    for (const auto& [origin, arrivals] : sh.origin_arrivals) {
      if (arrivals[a] != arrivals[b]) return false;
    }
    return true;
  }

  int dest_id(const std::string& name) {
    auto it = dest_index_.find(name);
    if (it != dest_index_.end()) return it->second;
    int id = static_cast<int>(dest_index_.size());
    dest_index_.emplace(name, id);
    return id;
  }

  void build_stats(ModuleData& md) {
    for (size_t ci = 0; ci < md.cands.size(); ++ci) {
      const Cand& c = md.cands[ci];
      DestStats* per = nullptr;
      for (auto& [d, s] : md.by_dest)
        if (d == c.dest) per = &s;
      if (!per) {
        md.by_dest.emplace_back(c.dest, DestStats{});
        per = &md.by_dest.back().second;
      }
      for (DestStats* s : {per, &md.all}) {
        s->min_contrib = std::min(s->min_contrib, c.contrib);
        s->min_delivery = std::min(s->min_delivery, c.delivery);
        s->deliveries.push_back(c.delivery);
      }
    }
    auto finish = [](DestStats& s) {
      std::sort(s.deliveries.begin(), s.deliveries.end());
      s.deliveries.erase(std::unique(s.deliveries.begin(), s.deliveries.end()),
                         s.deliveries.end());
    };
    finish(md.all);
    for (auto& [d, s] : md.by_dest) finish(s);
  }

  void build_heuristic_order(ModuleData& md) {
    md.heur.resize(md.cands.size());
    for (size_t i = 0; i < md.heur.size(); ++i) md.heur[i] = static_cast<int>(i);
    const bool by_delivery = obj_ == Objective::J2 || obj_ == Objective::J4;
    std::sort(md.heur.begin(), md.heur.end(), [&](int a, int b) {
      const Cand& ca = md.cands[a];
      const Cand& cb = md.cands[b];
      if (by_delivery) {
        if (ca.delivery != cb.delivery) return ca.delivery < cb.delivery;
      } else if (ca.contrib != cb.contrib) {
        return ca.contrib < cb.contrib;
      }
      return a < b;
    });
  }

  double pair_rate(const Cand& c) const {
    const VehicleService* a = services_[c.svc1];
    double rate = a->unit_cost * a->distance_km;
    if (c.svc2 >= 0) {
      const VehicleService* b = services_[c.svc2];
      rate += b->unit_cost * b->distance_km;
    }
    return rate * 1000.0;  // unit costs are per m³; arcs meter liters
  }

  void mark_affected(int svc, size_t ship) {
    auto& list = affected_[svc];
    if (list.empty() || list.back() != static_cast<int>(ship))
      list.push_back(static_cast<int>(ship));
  }

  void build_pools(ShipData& sd) {
    struct Acc {
      std::map<int, std::pair<Minutes, double>> fin;  // svc -> delivery, rate
      std::map<int, double> first;                    // svc -> rate
    };
    std::map<int, Acc> grouped;
    for (int g : sd.mods) {
      if (mods_[g].same_as_prev) continue;  // identical candidate list
      for (const Cand& c : mods_[g].cands) {
        const double rate = pair_rate(c);
        const int key = opt_.per_module_destinations ? -1 : c.dest;
        Acc& acc = grouped[key];
        const int fin_svc = c.svc2 >= 0 ? c.svc2 : c.svc1;
        auto [fit, fnew] = acc.fin.try_emplace(fin_svc, c.delivery, rate);
        if (!fnew) {
          fit->second.first = std::min(fit->second.first, c.delivery);
          fit->second.second = std::min(fit->second.second, rate);
        }
        auto [sit, snew] = acc.first.try_emplace(c.svc1, rate);
        if (!snew) sit->second = std::min(sit->second, rate);
      }
    }
    for (auto& [dest, acc] : grouped) {
      RelaxPool p;
      p.final_by_delivery.reserve(acc.fin.size());
      for (const auto& [svc, dr] : acc.fin)
        p.final_by_delivery.push_back({svc, dr.first, dr.second});
      p.final_by_rate = p.final_by_delivery;
      std::sort(p.final_by_delivery.begin(), p.final_by_delivery.end(),
                [](const RelaxArc& a, const RelaxArc& b) {
                  return std::tie(a.delivery, a.svc) < std::tie(b.delivery, b.svc);
                });
      std::sort(p.final_by_rate.begin(), p.final_by_rate.end(),
                [](const RelaxArc& a, const RelaxArc& b) {
                  return std::tie(a.rate, a.svc) < std::tie(b.rate, b.svc);
                });
      p.first_by_rate.reserve(acc.first.size());
      for (const auto& [svc, rate] : acc.first)
        p.first_by_rate.push_back({svc, 0, rate});
      std::sort(p.first_by_rate.begin(), p.first_by_rate.end(),
                [](const RelaxArc& a, const RelaxArc& b) {
                  return std::tie(a.rate, a.svc) < std::tie(b.rate, b.svc);
                });
      sd.pools.emplace_back(dest, std::move(p));
    }
  }

  // Cheapest routing of q liters spread over n modules (each at least vmin
  // liters) across the arcs' residual capacities. Relaxes in two dual ways —
  // liters split fractionally, and whole modules of vmin liters — and keeps
  // the larger cost; each is a valid lower bound. Negative when the arcs
  // cannot carry the load.
  double fill_cost(const std::vector<RelaxArc>& arcs, Liters q, int n,
                   Liters vmin) const {
    double liter_cost = 0.0, count_cost = 0.0;
    Liters left = q;
    int slots = n;
    for (const RelaxArc& a : arcs) {
      const Liters res = capacity_[a.svc] - load_[a.svc];
      if (res <= 0) continue;
      if (left > 0) {
        const Liters take = std::min(res, left);
        liter_cost += a.rate * static_cast<double>(take);
        left -= take;
      }
      if (slots > 0) {
        const int fit = static_cast<int>(
            std::min<Liters>(res / vmin, static_cast<Liters>(slots)));
        count_cost +=
            a.rate * static_cast<double>(vmin) * static_cast<double>(fit);
        slots -= fit;
      }
      if (left == 0 && slots == 0) return std::max(liter_cost, count_cost);
    }
    return -1.0;
  }

  // Earliest delivery level at which the arcs' cumulative residual capacity
  // can have absorbed q liters in n modules: some module must deliver no
  // earlier than this.
  Minutes fill_latest(const std::vector<RelaxArc>& arcs, Liters q, int n,
                      Liters vmin) const {
    Liters left = q;
    int slots = n;
    for (const RelaxArc& a : arcs) {
      const Liters res = capacity_[a.svc] - load_[a.svc];
      if (res <= 0) continue;
      left -= std::min(res, left);
      slots -= static_cast<int>(
          std::min<Liters>(res / vmin, static_cast<Liters>(slots)));
      if (left == 0 && slots == 0) return a.delivery;
    }
    return kNoTime;
  }

  // Minimal width of a delivery window covering [lo, hi] (pass lo > hi for
  // an unconstrained window) whose arcs can carry q liters. Every module of
  // the shipment delivers inside the final window, so its width bounds the
  // delivery gap from below.
  Minutes window_span(const std::vector<RelaxArc>& arcs, Liters q, int n,
                      Liters vmin, Minutes lo, Minutes hi) const {
    win_scratch_.clear();
    for (const RelaxArc& a : arcs) {
      const Liters res = capacity_[a.svc] - load_[a.svc];
      if (res <= 0) continue;
      const Liters slots = res / vmin;
      if (!win_scratch_.empty() &&
          std::get<0>(win_scratch_.back()) == a.delivery) {
        std::get<1>(win_scratch_.back()) += res;
        std::get<2>(win_scratch_.back()) += slots;
      } else {
        win_scratch_.emplace_back(a.delivery, res, slots);
      }
    }
    const int m = static_cast<int>(win_scratch_.size());
    if (m == 0) return kNoTime;
    int first_geq_lo = m;  // groups before this lie strictly left of lo
    int last_leq_hi = -1;  // groups up to this are mandatory right coverage
    for (int i = 0; i < m; ++i) {
      if (first_geq_lo == m && std::get<0>(win_scratch_[i]) >= lo)
        first_geq_lo = i;
      if (std::get<0>(win_scratch_[i]) <= hi) last_leq_hi = i;
    }
    Minutes best = kNoTime;
    Liters sum = 0, slots = 0;
    int ib = -1;
    const int ia_hi = std::min(first_geq_lo, m - 1);
    for (int ia = 0; ia <= ia_hi; ++ia) {
      while (ib + 1 < m &&
             (ib < last_leq_hi || ib < ia || sum < q || slots < n)) {
        ++ib;
        sum += std::get<1>(win_scratch_[ib]);
        slots += std::get<2>(win_scratch_[ib]);
      }
      if (sum < q || slots < n || ib < last_leq_hi || ib < ia) break;
      const Minutes a = std::min(lo, std::get<0>(win_scratch_[ia]));
      const Minutes b = std::max(hi, std::get<0>(win_scratch_[ib]));
      best = std::min(best, b - a);
      sum -= std::get<1>(win_scratch_[ia]);
      slots -= std::get<2>(win_scratch_[ia]);
    }
    return best;
  }

  // Lower bound for a shipment that has no assigned module yet, against the
  // current residual capacities: the best destination it could commit to.
  std::int64_t zero_assigned_bound(size_t b) const {
    if (opt_.per_module_destinations) return dest_bound_zero(b, -1);
    std::int64_t best = kInf;
    for (const auto& [d, p] : ships_[b].pools) {
      (void)p;
      best = std::min(best, dest_bound_zero(b, d));
    }
    return best;
  }

  std::int64_t dest_bound_zero(size_t b, int d) const {
    const ShipData& sd = ships_[b];
    std::int64_t sum = 0;
    Minutes worst = 0;
    for (int g : sd.mods) {
      const DestStats& s = mods_[g].stats(d);
      if (s.min_contrib >= kInf) return kInf;
      sum += s.min_contrib;
      worst = std::max(worst, s.min_delivery);
    }
    const RelaxPool* pool = sd.pool(d);
    if (!pool) return kInf;
    const Liters q = sd.total_volume;
    const int n = static_cast<int>(sd.mods.size());
    const Liters vmin = sd.min_volume;
    switch (obj_) {
      case Objective::J1: return sum;
      case Objective::J3: {
        const double f1 = fill_cost(pool->first_by_rate, q, n, vmin);
        const double f2 = fill_cost(pool->final_by_rate, q, n, vmin);
        if (f1 < 0 || f2 < 0) return kInf;
        const std::int64_t relax =
            static_cast<std::int64_t>(std::ceil(std::max(f1, f2))) - n;
        return std::min(std::max(sum, relax), kInf);
      }
      case Objective::J2: {
        const Minutes dq = fill_latest(pool->final_by_delivery, q, n, vmin);
        if (dq >= kNoTime) return kInf;
        return std::min<std::int64_t>(sd.sh->priority * std::max(worst, dq),
                                      kInf);
      }
      case Objective::J4: {
        const Minutes w =
            window_span(pool->final_by_delivery, q, n, vmin, kNoTime, -1);
        if (w >= kNoTime) return kInf;
        return w;
      }
    }
    std::abort();
  }

  std::int64_t ship_bound(size_t b) const {
    const ShipData& sd = ships_[b];
    const ShipState& st = state_[b];
    if (st.assigned == 0) return zero_assigned_bound(b);
    const int d = opt_.per_module_destinations ? -1 : st.dest;
    const RelaxPool* pool = sd.pool(d);
    const Liters q = st.unassigned_volume;
    const int n = static_cast<int>(sd.mods.size()) - st.assigned;
    const Liters vmin = sd.min_volume;
    switch (obj_) {
      case Objective::J1:
      case Objective::J3: {
        std::int64_t v = st.contrib;
        for (int g : sd.mods) {
          if (chosen_[g] >= 0) continue;
          const DestStats& s = mods_[g].stats(d);
          if (s.min_contrib >= kInf) return kInf;
          v += s.min_contrib;
        }
        if (obj_ == Objective::J3 && q > 0) {
          if (!pool) return kInf;
          const double f1 = fill_cost(pool->first_by_rate, q, n, vmin);
          const double f2 = fill_cost(pool->final_by_rate, q, n, vmin);
          if (f1 < 0 || f2 < 0) return kInf;
          const std::int64_t relax =
              st.contrib +
              static_cast<std::int64_t>(std::ceil(std::max(f1, f2))) - n;
          v = std::max(v, relax);
        }
        return std::min(v, kInf);
      }
      case Objective::J2: {
        Minutes worst = st.hi;
        for (int g : sd.mods) {
          if (chosen_[g] >= 0) continue;
          const DestStats& s = mods_[g].stats(d);
          if (s.min_delivery >= kNoTime) return kInf;
          worst = std::max(worst, s.min_delivery);
        }
        if (q > 0) {
          if (!pool) return kInf;
          const Minutes dq = fill_latest(pool->final_by_delivery, q, n, vmin);
          if (dq >= kNoTime) return kInf;
          worst = std::max(worst, dq);
        }
        return std::min<std::int64_t>(sd.sh->priority * worst, kInf);
      }
      case Objective::J4: {
        const Minutes span = st.hi - st.lo;
        Minutes required = 0;
        for (int g : sd.mods) {
          if (chosen_[g] >= 0) continue;
          Minutes ext = forced_growth(mods_[g].stats(d), st.lo, st.hi);
          if (ext >= kNoTime) return kInf;
          required = std::max(required, ext);
        }
        std::int64_t v = span + required;
        if (q > 0) {
          if (!pool) return kInf;
          const Minutes w =
              window_span(pool->final_by_delivery, q, n, vmin, st.lo, st.hi);
          if (w >= kNoTime) return kInf;
          v = std::max<std::int64_t>(v, w);
        }
        return std::min(v, kInf);
      }
    }
    std::abort();
  }

  bool admissible(int g, int ci) const {
    const ModuleData& md = mods_[g];
    if (md.same_as_prev && ci < chosen_[g - 1]) return false;
    const Cand& c = md.cands[ci];
    const ShipState& st = state_[md.ship];
    if (!opt_.per_module_destinations && st.assigned > 0 && c.dest != st.dest)
      return false;
    if (load_[c.svc1] + c.volume > capacity_[c.svc1]) return false;
    if (c.svc2 >= 0 && load_[c.svc2] + c.volume > capacity_[c.svc2])
      return false;
    return true;
  }

  struct Frame {
    ShipState before;
    std::uint32_t undo_mark = 0;
  };

  Frame apply(int g, int ci) {
    ++applies_;
    if (dbg_ && (applies_ & ((1u << 24) - 1)) == 0)
      std::fprintf(stderr,
                   "[solver] ... applies=%llu nodes=%llu best=%lld depth=%d\n",
                   static_cast<unsigned long long>(applies_),
                   static_cast<unsigned long long>(nodes_v_ + nodes_l_),
                   static_cast<long long>(best_), g);
    const ModuleData& md = mods_[g];
    const Cand& c = md.cands[ci];
    load_[c.svc1] += c.volume;
    if (c.svc2 >= 0) load_[c.svc2] += c.volume;
    chosen_[g] = ci;
    ShipState& st = state_[md.ship];
    Frame f{st, static_cast<std::uint32_t>(undo_.size())};
    st.assigned += 1;
    if (!opt_.per_module_destinations) st.dest = c.dest;
    st.lo = std::min(st.lo, c.delivery);
    st.hi = std::max(st.hi, c.delivery);
    st.unassigned_volume -= c.volume;
    st.contrib += c.contrib;
    st.bound = ship_bound(md.ship);
    total_bound_ += st.bound - f.before.bound;
    // Other shipments sharing either service now face smaller residuals.
    // Their stored bounds stay valid (loads only grow down a path), so the
    // refresh is opportunistic: skip it once this node is pruned anyway.
    refresh_bounds(c.svc1, md.ship);
    if (c.svc2 >= 0 && c.svc2 != c.svc1) refresh_bounds(c.svc2, md.ship);
    return f;
  }

  void refresh_bounds(int svc, int own_ship) {
    if (total_bound_ > best_) return;
    for (int b : affected_[svc]) {
      if (b == own_ship) continue;
      ShipState& st = state_[b];
      if (st.unassigned_volume == 0) continue;
      const std::int64_t nb = ship_bound(static_cast<size_t>(b));
      if (nb != st.bound) {
        undo_.emplace_back(b, st.bound);
        total_bound_ += nb - st.bound;
        st.bound = nb;
        if (total_bound_ > best_) return;
      }
    }
  }

  void revert(int g, int ci, const Frame& f) {
    while (undo_.size() > f.undo_mark) {
      const auto [b, old] = undo_.back();
      undo_.pop_back();
      total_bound_ += old - state_[b].bound;
      state_[b].bound = old;
    }
    const ModuleData& md = mods_[g];
    const Cand& c = md.cands[ci];
    load_[c.svc1] -= c.volume;
    if (c.svc2 >= 0) load_[c.svc2] -= c.volume;
    chosen_[g] = -1;
    total_bound_ += f.before.bound - state_[md.ship].bound;
    state_[md.ship] = f.before;
  }

  std::int64_t leaf_value() const {
    if (exact_leaf_) return total_bound_;
    // J2 with per-module destinations: sum each used terminal's latest
    // delivery instead of the single shipment-wide maximum.
    std::int64_t v = 0;
    for (size_t b = 0; b < ships_.size(); ++b) {
      std::vector<std::pair<int, Minutes>> dt;
      for (int g : ships_[b].mods) {
        const Cand& c = mods_[g].cands[chosen_[g]];
        bool seen = false;
        for (auto& [d, t] : dt) {
          if (d == c.dest) {
            t = std::max(t, c.delivery);
            seen = true;
          }
        }
        if (!seen) dt.emplace_back(c.dest, c.delivery);
      }
      std::int64_t sum = 0;
      for (const auto& [d, t] : dt) sum += t;
      v += ships_[b].sh->priority * sum;
    }
    return v;
  }

  void search_value(size_t g) {
    ++nodes_v_;
    if (dbg_ && (nodes_v_ & ((1u << 24) - 1)) == 0)
      std::fprintf(stderr, "[solver] ... phase1 nodes=%llu best=%lld depth=%zu\n",
                   static_cast<unsigned long long>(nodes_v_),
                   static_cast<long long>(best_), g);
    if (g == mods_.size()) {
      const std::int64_t v = leaf_value();
      if (v < best_) {
        best_ = v;
        if (dbg_) {
          std::fprintf(stderr, "[solver] ... incumbent=%lld applies=%llu\n",
                       static_cast<long long>(v),
                       static_cast<unsigned long long>(applies_));
          for (size_t b = 0; b < ships_.size(); ++b)
            std::fprintf(stderr, "[solver]     %s exact=%lld root=%lld d=%lld\n",
                         ships_[b].sh->id.c_str(),
                         static_cast<long long>(state_[b].bound),
                         static_cast<long long>(ships_[b].unfixed_bound),
                         static_cast<long long>(state_[b].bound -
                                                ships_[b].unfixed_bound));
        }
      }
      return;
    }
    const int m = p1_seq_[g];
    const ModuleData& md = mods_[m];
    for (int ci : md.heur) {
      if (!admissible(m, ci)) continue;
      Frame f = apply(m, ci);
      if (total_bound_ < best_) search_value(g + 1);
      revert(m, ci, f);
    }
  }

  bool search_lexicographic(size_t g) {
    ++nodes_l_;
    if (g == mods_.size()) {
      if (leaf_value() != best_) return false;
      best_choice_ = chosen_;
      found_ = true;
      return true;
    }
    const ModuleData& md = mods_[g];
    for (int ci = 0; ci < static_cast<int>(md.cands.size()); ++ci) {
      if (!admissible(static_cast<int>(g), ci)) continue;
      Frame f = apply(static_cast<int>(g), ci);
      bool done = false;
      if (total_bound_ <= best_) done = search_lexicographic(g + 1);
      revert(static_cast<int>(g), ci, f);
      if (done) return true;
    }
    return false;
  }

  const Network& net_;
  OrderIndex ord_;
  Objective obj_;
  SolverOptions opt_;
  HubTimes hub_times_;
  bool exact_leaf_ = true;

  std::vector<const VehicleService*> services_;
  std::unordered_map<std::string, int> svc_index_;
  std::vector<Liters> capacity_;
  std::vector<Liters> load_;
  std::unordered_map<std::string, int> dest_index_;

  std::vector<ShipData> ships_;
  std::vector<ModuleData> mods_;

  std::vector<std::vector<int>> affected_;  // service -> shipments using it
  std::vector<int> p1_seq_;                 // value-search module order

  std::vector<int> chosen_;
  std::vector<ShipState> state_;
  std::vector<std::pair<int, std::int64_t>> undo_;  // refreshed ship bounds
  mutable std::vector<std::tuple<Minutes, Liters, Liters>> win_scratch_;
  std::uint64_t nodes_v_ = 0;
  std::uint64_t nodes_l_ = 0;
  std::uint64_t applies_ = 0;
  bool dbg_ = false;
  std::int64_t total_bound_ = 0;
  std::int64_t best_ = kUnsolved;
  std::vector<int> best_choice_;
  bool found_ = false;
};

}  // namespace

AssignmentSolution solve_exact(const Network& net, Objective objective,
                               const HubTimes& hub_times,
                               const SolverOptions& options) {
  Engine engine(net, objective, hub_times, options);
  return engine.run();
}

AssignmentSolution solve_exhaustive(const Network& net, Objective objective,
                                    const HubTimes& hub_times,
                                    const SolverOptions& options) {
  OrderIndex ord(net);
  NetworkIndex index(net);

  std::vector<std::vector<Itinerary>> cands;
  cands.reserve(ord.order.size());
  long double product = 1.0L;
  bool feasible = true;
  for (size_t b = 0; b < ord.shipments.size(); ++b) {
    for (int i = ord.block_begin[b]; i < ord.block_begin[b + 1]; ++i) {
      auto list = enumerate_itineraries(index, *ord.shipments[b],
                                        ord.order[i].module, hub_times);
      if (list.empty()) feasible = false;
      product *= static_cast<long double>(std::max<size_t>(list.size(), 1));
      cands.push_back(std::move(list));
    }
  }
  if (product > static_cast<long double>(options.exhaustive_ceiling)) {
    throw ParseError(fmt::format(
        "exhaustive search space ({:.3g} assignments) exceeds the ceiling {}",
        static_cast<double>(product), options.exhaustive_ceiling));
  }

  AssignmentSolution sol;
  if (!feasible) return sol;

  std::unordered_map<std::string, int> svc_index;
  std::vector<Liters> capacity, load;
  for (const auto& s : net.services) {
    svc_index.emplace(s.id, static_cast<int>(capacity.size()));
    capacity.push_back(s.capacity);
    load.push_back(0);
  }
  std::vector<int> ship_of(ord.order.size());
  for (size_t b = 0; b < ord.shipments.size(); ++b)
    for (int i = ord.block_begin[b]; i < ord.block_begin[b + 1]; ++i)
      ship_of[i] = static_cast<int>(b);
  std::vector<std::string> fixed_dest(ord.shipments.size());
  std::vector<int> assigned(ord.shipments.size(), 0);

  std::vector<Itinerary> current(ord.order.size());
  std::vector<Itinerary> best_choices;
  std::int64_t best = kUnsolved;

  auto recurse = [&](auto&& self, size_t g) -> void {
    if (g == ord.order.size()) {
      std::int64_t value = kpis_for(ord, current).scaled(objective);
      if (value < best) {
        best = value;
        best_choices = current;
      }
      return;
    }
    const int b = ship_of[g];
    for (const Itinerary& it : cands[g]) {
      if (!options.per_module_destinations && assigned[b] > 0 &&
          it.destination != fixed_dest[b])
        continue;
      const Liters volume =
          ord.shipments[b]->module_volumes[ord.order[g].module];
      const int s1 = svc_index.at(it.leg1);
      const int s2 = it.leg2.empty() ? -1 : svc_index.at(it.leg2);
      if (load[s1] + volume > capacity[s1]) continue;
      if (s2 >= 0 && load[s2] + volume > capacity[s2]) continue;
      load[s1] += volume;
      if (s2 >= 0) load[s2] += volume;
      std::string prev_dest = fixed_dest[b];
      fixed_dest[b] = it.destination;
      assigned[b] += 1;
      current[g] = it;
      self(self, g + 1);
      assigned[b] -= 1;
      fixed_dest[b] = prev_dest;
      load[s1] -= volume;
      if (s2 >= 0) load[s2] -= volume;
    }
  };
  recurse(recurse, 0);

  if (best == kUnsolved) return sol;
  sol.status = SolveStatus::Optimal;
  sol.choices = std::move(best_choices);
  for (size_t g = 0; g < sol.choices.size(); ++g) {
    const Itinerary& it = sol.choices[g];
    const Liters volume =
        ord.shipments[ship_of[g]]->module_volumes[ord.order[g].module];
    sol.service_loads[it.leg1] += volume;
    if (!it.leg2.empty()) sol.service_loads[it.leg2] += volume;
  }
  sol.kpis = kpis_for(ord, sol.choices);
  sol.objective_value_scaled = sol.kpis.scaled(objective);
  sol.objective_value = sol.kpis.value(objective);
  sol.completion_times = shipment_completion_times(net, sol.choices);
  return sol;
}

ModalSplit modal_split(const AssignmentSolution& solution, const Network& net) {
  ModalSplit ms;
  if (solution.status != SolveStatus::Optimal) return ms;
  int direct = 0, truck_in = 0, train_in = 0, truck_out = 0, train_out = 0;
  for (const auto& it : solution.choices) {
    ms.total_modules += 1;
    if (it.kind == RouteKind::Direct) {
      direct += 1;
      continue;
    }
    ms.via_hub_modules += 1;
    const VehicleService* leg1 = net.find_service(it.leg1);
    const VehicleService* leg2 = net.find_service(it.leg2);
    if (!leg1 || !leg2) throw ParseError("solution references unknown services");
    (leg1->mode == Mode::Train ? train_in : truck_in) += 1;
    (leg2->mode == Mode::Train ? train_out : truck_out) += 1;
  }
  if (ms.total_modules > 0) {
    const double all = ms.total_modules;
    ms.direct_pct = 100.0 * direct / all;
    ms.truck_to_hub_pct = 100.0 * truck_in / all;
    ms.train_to_hub_pct = 100.0 * train_in / all;
  }
  if (ms.via_hub_modules > 0) {
    const double via = ms.via_hub_modules;
    ms.hub_truck_in_pct = 100.0 * truck_in / via;
    ms.hub_train_in_pct = 100.0 * train_in / via;
    ms.hub_truck_out_pct = 100.0 * truck_out / via;
    ms.hub_train_out_pct = 100.0 * train_out / via;
  }
  return ms;
}

}  // namespace piroute
