#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "piroute/pi_gsa.hpp"

using namespace piroute;

namespace {

// Two alternative hubs plus a direct truck. The cheap route through P needs
// tau_P <= 2h (leg two departs 16:00, leg one arrives 14:00); above that the
// optimum flips to the dearer route through Q. Module counts never matter:
// volumes are equal-split, so every route's cost rides on total volume only.
Scenario threshold_scenario() {
  Scenario sc;
  sc.network.nodes = {
      {"O", NodeKind::OriginTerminal, {}, {}},
      {"P", NodeKind::PIHub, Minutes{120}, {}},
      {"Q", NodeKind::PIHub, Minutes{60}, {}},
      {"D", NodeKind::DestinationTerminal, {}, Minutes{60}},
  };
  sc.network.services = {
      {"r1", "O", "P", Mode::Train, 9 * 60, 5 * 60, 40000, 0.02, 500.0},
      {"t2", "P", "D", Mode::Truck, 16 * 60, 4 * 60, 40000, 0.02, 500.0},
      {"r3", "O", "Q", Mode::Train, 8 * 60, 4 * 60, 40000, 0.02, 400.0},
      {"t4", "Q", "D", Mode::Truck, 17 * 60, 5 * 60, 40000, 0.03, 600.0},
      {"d1", "O", "D", Mode::DirectTruck, 12 * 60, 9 * 60, 40000, 0.05,
       600.0},
  };
  Shipment sh;
  sh.id = "s1";
  sh.priority = 2000;
  sh.module_count = 2;
  sh.module_volumes = {5000, 5000};
  sh.origin_arrivals["O"] = {8 * 60, 8 * 60};
  sh.allowed_destinations = {"D"};
  sc.network.shipments = {sh};
  return sc;
}

// One cheap hub lane with tight capacity (6 m^3 of a 10 m^3 shipment) and a
// dear direct fallback. Finer module splits pack the cheap lane better, so
// the module count drives cost and direct-truck usage; the hub's processing
// time has four hours of slack and never matters.
Scenario capacity_scenario() {
  Scenario sc;
  sc.network.nodes = {
      {"O", NodeKind::OriginTerminal, {}, {}},
      {"P", NodeKind::PIHub, Minutes{120}, {}},
      {"D", NodeKind::DestinationTerminal, {}, Minutes{60}},
  };
  sc.network.services = {
      {"r1", "O", "P", Mode::Train, 9 * 60, 2 * 60, 6000, 0.01, 100.0},
      {"t2", "P", "D", Mode::Truck, 15 * 60, 2 * 60, 6000, 0.01, 100.0},
      {"d1", "O", "D", Mode::DirectTruck, 10 * 60, 6 * 60, 40000, 0.10,
       300.0},
  };
  Shipment sh;
  sh.id = "s1";
  sh.priority = 1000;
  sh.module_count = 2;
  sh.module_volumes = {5000, 5000};
  sh.origin_arrivals["O"] = {8 * 60, 8 * 60};
  sh.allowed_destinations = {"D"};
  sc.network.shipments = {sh};
  return sc;
}

// A single hub lane and no fallback: leg two departs 176 minutes after leg
// one arrives, so sampled processing times above 2h56m kill feasibility
// (about 3% of the uniform 1..3h range).
Scenario narrow_window_scenario(Minutes leg2_departure) {
  Scenario sc;
  sc.network.nodes = {
      {"O", NodeKind::OriginTerminal, {}, {}},
      {"P", NodeKind::PIHub, Minutes{120}, {}},
      {"D", NodeKind::DestinationTerminal, {}, Minutes{60}},
  };
  sc.network.services = {
      {"r1", "O", "P", Mode::Train, 9 * 60, 3 * 60, 40000, 0.02, 500.0},
      {"t2", "P", "D", Mode::Truck, leg2_departure, 3 * 60, 40000, 0.02,
       500.0},
  };
  Shipment sh;
  sh.id = "s1";
  sh.priority = 1000;
  sh.module_count = 2;
  sh.module_volumes = {5000, 5000};
  sh.origin_arrivals["O"] = {8 * 60, 8 * 60};
  sh.allowed_destinations = {"D"};
  sc.network.shipments = {sh};
  return sc;
}

int factor_row(const SensitivityRun& run, const std::string& name) {
  for (std::size_t f = 0; f < run.factors.size(); ++f) {
    if (run.factors[f].name == name) return static_cast<int>(f);
  }
  REQUIRE(false);
  return -1;
}

double index_of(const SensitivityRun& run, const std::string& factor,
                int kpi) {
  return run.raw[static_cast<std::size_t>(factor_row(run, factor))]
                [static_cast<std::size_t>(kpi)];
}

}  // namespace

TEST_CASE("factor layout: hub times sorted by id, then module counts") {
  const Scenario sc = threshold_scenario();

  const auto grouped = gsa_factors(sc, false);
  REQUIRE(grouped.size() == 3);
  CHECK(grouped[0].kind == FactorKind::HubTime);
  CHECK(grouped[0].entity_id == "P");
  CHECK(grouped[0].name == "tau:P");
  CHECK(grouped[1].entity_id == "Q");
  CHECK(grouped[2].kind == FactorKind::GroupedCounts);
  CHECK(grouped[2].name == "n_s");

  const auto separate = gsa_factors(sc, true);
  REQUIRE(separate.size() == 3);
  CHECK(separate[2].kind == FactorKind::ShipmentCount);
  CHECK(separate[2].entity_id == "s1");
  CHECK(separate[2].name == "count:s1");

  Scenario empty;
  CHECK_THROWS_AS(gsa_factors(empty, false), std::invalid_argument);
}

TEST_CASE("hub processing time dominates when it flips the optimum") {
  const SensitivityRun run =
      pi_sensitivity_run(threshold_scenario(), Objective::J3, 1000, 11);

  REQUIRE(run.factors.size() == 3);
  CHECK(run.sample_count == 1000);
  CHECK(run.model_runs == 1000);
  CHECK(run.imputed_samples == 0);

  // J3 and J2 both hinge on whether the cheap hub is usable.
  CHECK(index_of(run, "tau:P", 2) > 0.8);
  CHECK(index_of(run, "tau:Q", 2) < 0.1);
  CHECK(index_of(run, "n_s", 2) < 0.1);
  CHECK(index_of(run, "tau:P", 1) > 0.8);

  // Direct trucks are never cost-optimal here and the single shipment's
  // modules always travel together: J1 and J4 are identically zero.
  CHECK(run.low_variance[0]);
  CHECK(run.low_variance[3]);
  CHECK(!run.low_variance[2]);
  CHECK(run.raw[0][0] == 0.0);

  for (std::size_t f = 0; f < run.factors.size(); ++f) {
    for (int k = 0; k < 4; ++k) {
      CHECK(run.clipped[f][static_cast<std::size_t>(k)] >= 0.0);
      CHECK(run.clipped[f][static_cast<std::size_t>(k)] <= 1.0);
    }
  }
}

TEST_CASE("module counts dominate when packing drives the cost") {
  const SensitivityRun run =
      pi_sensitivity_run(capacity_scenario(), Objective::J3, 1000, 11);

  // Finer splits pack the cheap lane better: the grouped count factor
  // carries the cost (J3) and direct-usage (J1) variance; the hub's
  // processing time never binds.
  CHECK(index_of(run, "n_s", 2) > 0.5);
  CHECK(index_of(run, "tau:P", 2) < 0.1);
  CHECK(index_of(run, "n_s", 0) > 0.5);
  CHECK(index_of(run, "tau:P", 0) < 0.1);
}

TEST_CASE("separate count factors isolate the driving shipment") {
  Scenario sc = capacity_scenario();
  Shipment tiny;
  tiny.id = "s2";
  tiny.priority = 1000;
  tiny.module_count = 1;
  tiny.module_volumes = {500};
  tiny.origin_arrivals["O"] = {8 * 60};
  tiny.allowed_destinations = {"D"};
  sc.network.shipments.push_back(tiny);

  GsaOptions options;
  options.separate_count_factors = true;
  const SensitivityRun run =
      pi_sensitivity_run(sc, Objective::J3, 600, 4, options);

  REQUIRE(run.factors.size() == 3);  // tau:P, count:s1, count:s2
  CHECK(index_of(run, "count:s1", 2) > 0.3);
  CHECK(index_of(run, "count:s2", 2) < 0.1);
  CHECK(index_of(run, "tau:P", 2) < 0.1);
}

TEST_CASE("results are deterministic and independent of worker count") {
  const Scenario sc = threshold_scenario();
  GsaOptions serial;
  serial.jobs = 1;
  GsaOptions pooled;
  pooled.jobs = 3;
  const SensitivityRun a = pi_sensitivity_run(sc, Objective::J3, 150, 7, serial);
  const SensitivityRun b = pi_sensitivity_run(sc, Objective::J3, 150, 7, pooled);
  CHECK(a.raw == b.raw);
  CHECK(a.clipped == b.clipped);
  CHECK(a.total_variance == b.total_variance);
  CHECK(a.imputed_samples == b.imputed_samples);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t c = 0; c < a.trace.size(); ++c) {
    CHECK(a.trace[c].samples == b.trace[c].samples);
    CHECK(a.trace[c].clipped == b.trace[c].clipped);
  }

  const SensitivityRun c = pi_sensitivity_run(sc, Objective::J3, 150, 8, serial);
  CHECK(a.raw != c.raw);
}

TEST_CASE("convergence trace reuses prefixes and ends at the full run") {
  const SensitivityRun run =
      pi_sensitivity_run(threshold_scenario(), Objective::J3, 1000, 3);

  REQUIRE(run.trace.size() == 4);
  CHECK(run.trace[0].samples == 100);
  CHECK(run.trace[1].samples == 200);
  CHECK(run.trace[2].samples == 500);
  CHECK(run.trace[3].samples == 1000);
  CHECK(run.trace.back().clipped == run.clipped);

  // The dominant factor is already visible early in the trace.
  const int taup = factor_row(run, "tau:P");
  for (const GsaCheckpoint& cp : run.trace) {
    CHECK(cp.clipped[static_cast<std::size_t>(taup)][2] > 0.5);
  }
}

TEST_CASE("checkpoint ladders and validation") {
  const Scenario sc = threshold_scenario();

  const SensitivityRun short_run =
      pi_sensitivity_run(sc, Objective::J3, 120, 3);
  REQUIRE(short_run.trace.size() == 2);
  CHECK(short_run.trace[0].samples == 100);
  CHECK(short_run.trace[1].samples == 120);

  GsaOptions custom;
  custom.checkpoints = {128, 640};
  const SensitivityRun r = pi_sensitivity_run(sc, Objective::J3, 1000, 3, custom);
  REQUIRE(r.trace.size() == 3);
  CHECK(r.trace[0].samples == 128);
  CHECK(r.trace[1].samples == 640);
  CHECK(r.trace[2].samples == 1000);

  GsaOptions too_small;
  too_small.checkpoints = {25};
  CHECK_THROWS_AS(pi_sensitivity_run(sc, Objective::J3, 1000, 3, too_small),
                  std::invalid_argument);
  GsaOptions unsorted;
  unsorted.checkpoints = {200, 100};
  CHECK_THROWS_AS(pi_sensitivity_run(sc, Objective::J3, 1000, 3, unsorted),
                  std::invalid_argument);
  GsaOptions beyond;
  beyond.checkpoints = {2000};
  CHECK_THROWS_AS(pi_sensitivity_run(sc, Objective::J3, 1000, 3, beyond),
                  std::invalid_argument);
  CHECK_THROWS_AS(pi_sensitivity_run(sc, Objective::J3, 20, 3),
                  std::invalid_argument);  // below 4*harmonics + 2
}

TEST_CASE("a small infeasible share is imputed, a large one aborts") {
  // Feasible iff tau <= 176 min: roughly 3% of draws fail and are imputed.
  const SensitivityRun run = pi_sensitivity_run(
      narrow_window_scenario(/*leg2_departure=*/896), Objective::J3, 400, 5);
  CHECK(run.imputed_samples > 0);
  CHECK(run.imputed_samples <= 20);
  CHECK(run.model_runs == 400);
  // Whenever the network solves at all, the KPIs are the same: the analysis
  // flags every output as carrying no variance.
  for (int k = 0; k < 4; ++k) {
    CHECK(run.low_variance[static_cast<std::size_t>(k)]);
  }

  // Feasible iff tau <= 120 min: about half the draws fail.
  CHECK_THROWS_AS(
      pi_sensitivity_run(narrow_window_scenario(/*leg2_departure=*/840),
                         Objective::J3, 200, 5),
      std::runtime_error);
}

TEST_CASE("indices are stable between one and four thousand samples") {
  const Scenario sc = capacity_scenario();
  const SensitivityRun small = pi_sensitivity_run(sc, Objective::J3, 1000, 9);
  const SensitivityRun large = pi_sensitivity_run(sc, Objective::J3, 4000, 9);
  REQUIRE(small.factors.size() == large.factors.size());
  for (std::size_t f = 0; f < small.factors.size(); ++f) {
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(small.raw[f][static_cast<std::size_t>(k)] -
                     large.raw[f][static_cast<std::size_t>(k)]) < 0.05);
    }
  }
}
