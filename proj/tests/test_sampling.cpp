#include <cmath>
#include <set>

#include "doctest.h"
#include "piroute/montecarlo.hpp"
#include "piroute/sampling.hpp"

using namespace piroute;

namespace {

Scenario two_hub_scenario() {
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

}  // namespace

TEST_CASE("counter randomness is pure and well distributed") {
  CHECK(mix64(1, 2, 3) == mix64(1, 2, 3));
  CHECK(mix64(1, 2, 3) != mix64(1, 2, 4));
  CHECK(mix64(1, 2, 3) != mix64(1, 3, 3));
  CHECK(mix64(1, 2, 3) != mix64(2, 2, 3));
  double lo = 1.0;
  double hi = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = uniform01(7, stream_id("x"), i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.05);
  CHECK(hi > 0.95);
  CHECK(stream_id("tau:P") != stream_id("tau:Q"));
}

TEST_CASE("unit-interval mappings cover their supports") {
  ExperimentConfig cfg;
  CHECK(hub_time_from_unit(cfg, 0.0) == 60);
  CHECK(hub_time_from_unit(cfg, 0.5) == 120);
  CHECK(hub_time_from_unit(cfg, 0.999999) == 180);
  CHECK(module_count_from_unit(cfg, 0.0) == 1);
  CHECK(module_count_from_unit(cfg, 0.09) == 1);
  CHECK(module_count_from_unit(cfg, 0.11) == 2);
  CHECK(module_count_from_unit(cfg, 0.9999) == 10);

  std::set<int> seen;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    seen.insert(module_count_from_unit(cfg, uniform01(1, 2, i)));
  }
  CHECK(seen.size() == 10);  // every count value occurs
}

TEST_CASE("volume split preserves totals in whole liters") {
  CHECK(split_volumes(10000, 3) == std::vector<Liters>{3334, 3333, 3333});
  CHECK(split_volumes(10000, 1) == std::vector<Liters>{10000});
  CHECK(split_volumes(10, 3) == std::vector<Liters>{4, 3, 3});
  CHECK_THROWS_AS(split_volumes(2, 3), std::invalid_argument);
}

TEST_CASE("sampling modes vary exactly the inputs they claim") {
  const Scenario sc = two_hub_scenario();

  SUBCASE("all inputs vary") {
    SamplingPlan plan;
    std::set<Minutes> taus;
    std::set<int> counts;
    for (std::uint64_t i = 0; i < 40; ++i) {
      const SampledInputs in = sample_inputs(sc, plan, 3, i);
      taus.insert(in.hub_times.at("P"));
      counts.insert(in.module_counts.at("s1"));
      CHECK(in.hub_times.at("P") >= 60);
      CHECK(in.hub_times.at("P") <= 180);
    }
    CHECK(taus.size() > 5);
    CHECK(counts.size() > 3);
  }

  SUBCASE("only module counts vary") {
    SamplingPlan plan;
    plan.mode = SamplingMode::OnlyModuleCounts;
    std::set<int> counts;
    for (std::uint64_t i = 0; i < 40; ++i) {
      const SampledInputs in = sample_inputs(sc, plan, 3, i);
      CHECK(in.hub_times.at("P") == 120);  // base value from the node
      CHECK(in.hub_times.at("Q") == 60);
      counts.insert(in.module_counts.at("s1"));
    }
    CHECK(counts.size() > 3);
  }

  SUBCASE("only one hub varies") {
    SamplingPlan plan;
    plan.mode = SamplingMode::OnlyOneHub;
    plan.hub_id = "P";
    std::set<Minutes> p_taus;
    for (std::uint64_t i = 0; i < 40; ++i) {
      const SampledInputs in = sample_inputs(sc, plan, 3, i);
      CHECK(in.hub_times.at("Q") == 60);
      CHECK(in.module_counts.at("s1") == 2);
      p_taus.insert(in.hub_times.at("P"));
    }
    CHECK(p_taus.size() > 5);
  }

  SUBCASE("unknown hub is rejected") {
    SamplingPlan plan;
    plan.mode = SamplingMode::OnlyOneHub;
    plan.hub_id = "O";
    CHECK_THROWS_AS(sample_inputs(sc, plan, 3, 0), ParseError);
  }
}

TEST_CASE("materialize rewrites shipments consistently") {
  const Scenario sc = two_hub_scenario();
  SampledInputs in = sample_inputs(sc, {}, 3, 11);
  in.module_counts["s1"] = 7;
  const Network net = materialize(sc, in, 3, 11);
  const Shipment& sh = net.shipments[0];
  CHECK(sh.module_count == 7);
  CHECK(sh.module_volumes.size() == 7);
  CHECK(sh.total_volume() == 10000);  // equal split preserves the total
  CHECK(sh.origin_arrivals.at("O").size() == 7);
  CHECK(sh.origin_arrivals.at("O")[6] == 8 * 60);
  CHECK(validate(net).empty());

  // Base count under the equal-split rule leaves the shipment untouched.
  in.module_counts["s1"] = 2;
  const Network same = materialize(sc, in, 3, 11);
  CHECK(same.shipments[0].module_volumes == sc.network.shipments[0].module_volumes);
}

TEST_CASE("materialize draws iid volumes when configured") {
  Scenario sc = two_hub_scenario();
  sc.experiment.volume_rule = VolumeRule::IidVolumes;
  sc.experiment.module_volume_lo = 2.0;
  sc.experiment.module_volume_hi = 4.0;
  SampledInputs in = sample_inputs(sc, {}, 3, 5);
  in.module_counts["s1"] = 4;
  const Network net = materialize(sc, in, 3, 5);
  const Shipment& sh = net.shipments[0];
  REQUIRE(sh.module_volumes.size() == 4);
  std::set<Liters> distinct;
  for (Liters v : sh.module_volumes) {
    CHECK(v >= 2000);
    CHECK(v <= 4000);
    distinct.insert(v);
  }
  CHECK(distinct.size() > 1);
  // Same (seed, index) reproduces the same draw.
  const Network again = materialize(sc, in, 3, 5);
  CHECK(again.shipments[0].module_volumes == sh.module_volumes);
}

TEST_CASE("monte carlo rows are deterministic and order-stable") {
  const Scenario sc = two_hub_scenario();
  const SamplingPlan plan;
  const MonteCarloResult serial =
      run_monte_carlo(sc, Objective::J3, plan, 25, 42, 1);
  const MonteCarloResult threaded =
      run_monte_carlo(sc, Objective::J3, plan, 25, 42, 4);
  REQUIRE(serial.rows.size() == 25);
  REQUIRE(threaded.rows.size() == 25);
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(serial.rows[i].sample_index == static_cast<std::int64_t>(i));
    CHECK(serial.rows[i].status == threaded.rows[i].status);
    CHECK(serial.rows[i].kpis.j1 == threaded.rows[i].kpis.j1);
    CHECK(serial.rows[i].kpis.j2 == threaded.rows[i].kpis.j2);
    CHECK(serial.rows[i].kpis.j3 == threaded.rows[i].kpis.j3);
    CHECK(serial.rows[i].kpis.j4 == threaded.rows[i].kpis.j4);
  }

  // A shorter run is a prefix of a longer run with the same seed.
  const MonteCarloResult prefix =
      run_monte_carlo(sc, Objective::J3, plan, 10, 42, 2);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(prefix.rows[i].kpis.j3 == serial.rows[i].kpis.j3);
  }

  // A different seed changes at least one row.
  const MonteCarloResult other =
      run_monte_carlo(sc, Objective::J3, plan, 25, 43, 2);
  bool differs = false;
  for (std::size_t i = 0; i < 25; ++i) {
    differs = differs || other.rows[i].kpis.j3 != serial.rows[i].kpis.j3;
  }
  CHECK(differs);

  // The sampled corridor always has the direct truck as a fallback.
  CHECK(serial.infeasible_count() == 0);
}

TEST_CASE("variability statistics match hand values") {
  MonteCarloResult mc;
  mc.objective = Objective::J1;
  SampleRow a;
  a.sample_index = 0;
  a.kpis.j1 = 10;
  SampleRow b;
  b.sample_index = 1;
  b.kpis.j1 = 14;
  mc.rows = {a, b};

  const VariabilityReport rep = variability_report(mc);
  CHECK(rep.total_samples == 2);
  CHECK(rep.feasible_samples == 2);
  CHECK(rep.kpis[0].mean == doctest::Approx(12.0));
  CHECK(rep.kpis[0].variance == doctest::Approx(8.0));
  REQUIRE(rep.kpis[0].rel_std.has_value());
  CHECK(*rep.kpis[0].rel_std == doctest::Approx(std::sqrt(8.0) / 12.0));
  // Zero-mean KPIs have no relative spread.
  CHECK(rep.kpis[3].mean == 0.0);
  CHECK(!rep.kpis[3].rel_std.has_value());
}

TEST_CASE("variability guards against unusable runs") {
  MonteCarloResult mc;
  SampleRow good;
  good.kpis.j1 = 5;
  SampleRow bad;
  bad.status = SolveStatus::Infeasible;

  SUBCASE("too few feasible rows") {
    mc.rows = {good};
    CHECK_THROWS_AS(variability_report(mc), std::runtime_error);
  }
  SUBCASE("small infeasible share is tolerated and excluded") {
    mc.rows.assign(20, good);
    mc.rows.push_back(bad);
    const VariabilityReport rep = variability_report(mc);
    CHECK(rep.total_samples == 21);
    CHECK(rep.feasible_samples == 20);
    CHECK(rep.kpis[0].mean == doctest::Approx(5.0));
  }
  SUBCASE("large infeasible share fails loudly") {
    mc.rows.assign(18, good);
    mc.rows.push_back(bad);
    mc.rows.push_back(bad);
    CHECK_THROWS_AS(variability_report(mc), std::runtime_error);
  }
}
