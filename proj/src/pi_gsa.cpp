#include "piroute/pi_gsa.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "piroute/rbd_fast.hpp"
#include "piroute/sampling.hpp"

namespace piroute {

namespace {

// Resolution of the grouped module-count factor: its quantile is cut into
// this many rank cells, and every shipment reads its own jitter stream at
// the cell index. Counts therefore rise and fall together with the group
// quantile while still differing between shipments.
constexpr int kRankCells = 64;

std::vector<int> ladder_checkpoints(int samples, int harmonics) {
  const int min_n = 4 * harmonics + 2;
  std::vector<int> pts;
  for (long long decade = 100; decade <= samples; decade *= 10) {
    for (int mult : {1, 2, 5}) {
      const long long v = decade * mult;
      if (v >= min_n && v < samples) pts.push_back(static_cast<int>(v));
    }
  }
  pts.push_back(samples);
  return pts;
}

std::vector<int> resolve_checkpoints(const GsaOptions& options, int samples) {
  if (options.checkpoints.empty()) {
    return ladder_checkpoints(samples, options.harmonics);
  }
  std::vector<int> pts = options.checkpoints;
  const int min_n = 4 * options.harmonics + 2;
  int prev = 0;
  for (int c : pts) {
    if (c < min_n || c > samples) {
      throw std::invalid_argument(fmt::format(
          "checkpoint {} outside the usable range [{}, {}]", c, min_n,
          samples));
    }
    if (c <= prev) {
      throw std::invalid_argument("checkpoints must be strictly ascending");
    }
    prev = c;
  }
  if (pts.back() != samples) pts.push_back(samples);
  return pts;
}

SampledInputs inputs_for_row(const Scenario& sc,
                             const std::vector<GsaFactor>& factors,
                             const RbdDesign& design, int row,
                             std::uint64_t seed) {
  SampledInputs inputs;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const double u = design.u(static_cast<int>(f), row);
    const GsaFactor& factor = factors[f];
    switch (factor.kind) {
      case FactorKind::HubTime:
        inputs.hub_times[factor.entity_id] =
            hub_time_from_unit(sc.experiment, u);
        break;
      case FactorKind::ShipmentCount:
        inputs.module_counts[factor.entity_id] =
            module_count_from_unit(sc.experiment, u);
        break;
      case FactorKind::GroupedCounts: {
        const int rank = std::min(kRankCells - 1,
                                  static_cast<int>(u * kRankCells));
        for (const Shipment& s : sc.network.shipments) {
          const double jitter =
              uniform01(seed, stream_id("count-sub:" + s.id),
                        static_cast<std::uint64_t>(rank));
          const double v = (rank + jitter) / kRankCells;
          inputs.module_counts[s.id] =
              module_count_from_unit(sc.experiment, v);
        }
        break;
      }
    }
  }
  return inputs;
}

}  // namespace

std::string to_string(FactorKind k) {
  switch (k) {
    case FactorKind::HubTime:
      return "HubTime";
    case FactorKind::GroupedCounts:
      return "GroupedCounts";
    case FactorKind::ShipmentCount:
      return "ShipmentCount";
  }
  return "?";
}

std::vector<GsaFactor> gsa_factors(const Scenario& sc,
                                   bool separate_count_factors) {
  std::vector<GsaFactor> factors;
  std::vector<std::string> hubs;
  for (const Node& n : sc.network.nodes) {
    if (n.kind == NodeKind::PIHub) hubs.push_back(n.id);
  }
  std::sort(hubs.begin(), hubs.end());
  for (const std::string& h : hubs) {
    factors.push_back({FactorKind::HubTime, h, "tau:" + h});
  }
  if (!sc.network.shipments.empty()) {
    if (separate_count_factors) {
      for (const Shipment& s : sc.network.shipments) {
        factors.push_back({FactorKind::ShipmentCount, s.id, "count:" + s.id});
      }
    } else {
      factors.push_back({FactorKind::GroupedCounts, "", "n_s"});
    }
  }
  if (factors.empty()) {
    throw std::invalid_argument(
        "the scenario has no hubs and no shipments; nothing to vary");
  }
  return factors;
}

SensitivityRun pi_sensitivity_run(const Scenario& sc, Objective objective,
                                  int samples, std::uint64_t seed,
                                  const GsaOptions& options) {
  if (options.harmonics < 1) {
    throw std::invalid_argument("harmonics must be at least 1");
  }
  if (samples < 4 * options.harmonics + 2) {
    throw std::invalid_argument(fmt::format(
        "{} samples cannot resolve {} harmonics; need at least {}", samples,
        options.harmonics, 4 * options.harmonics + 2));
  }

  SensitivityRun run;
  run.objective = objective;
  run.factors = gsa_factors(sc, options.separate_count_factors);
  run.sample_count = samples;
  run.harmonics = options.harmonics;

  const RbdDesign design(static_cast<int>(run.factors.size()), samples, seed);
  const std::vector<int> checkpoints = resolve_checkpoints(options, samples);

  std::vector<std::array<double, 4>> outputs(
      static_cast<std::size_t>(samples));
  std::vector<char> feasible(static_cast<std::size_t>(samples), 0);
  std::atomic<std::int64_t> runs{0};

  auto solve_one = [&](int i) {
    const SampledInputs inputs =
        inputs_for_row(sc, run.factors, design, i, seed);
    const Network net =
        materialize(sc, inputs, seed, static_cast<std::uint64_t>(i));
    const AssignmentSolution sol =
        solve_exact(net, objective, inputs.hub_times);
    runs.fetch_add(1);
    if (sol.status == SolveStatus::Optimal) {
      outputs[static_cast<std::size_t>(i)] = sol.kpis.values();
      feasible[static_cast<std::size_t>(i)] = 1;
    }
  };

  const int workers = std::min(options.jobs, samples);
  if (workers <= 1) {
    for (int i = 0; i < samples; ++i) solve_one(i);
  } else {
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= samples) return;
        try {
          solve_one(static_cast<int>(i));
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  run.model_runs = runs.load();
  if (run.model_runs != samples) {
    throw std::logic_error(fmt::format(
        "internal: expected {} model runs, performed {}", samples,
        run.model_runs));
  }

  int feasible_count = 0;
  for (char ok : feasible) feasible_count += ok;
  const int bad = samples - feasible_count;
  run.imputed_samples = bad;
  if (static_cast<double>(bad) >
      options.max_infeasible_share * static_cast<double>(samples)) {
    throw std::runtime_error(fmt::format(
        "{} of {} samples were infeasible, above the {:.0f}% limit; the "
        "sampling ranges do not fit this network",
        bad, samples, options.max_infeasible_share * 100.0));
  }
  if (feasible_count == 0) {
    throw std::runtime_error("no feasible samples; nothing to analyze");
  }

  // Infeasible realizations are replaced by the feasible mean so they add
  // no variance of their own and the design stays complete.
  if (bad > 0) {
    std::array<double, 4> mean{};
    for (int i = 0; i < samples; ++i) {
      if (!feasible[static_cast<std::size_t>(i)]) continue;
      for (int k = 0; k < 4; ++k) {
        mean[static_cast<std::size_t>(k)] +=
            outputs[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      }
    }
    for (double& m : mean) m /= feasible_count;
    for (int i = 0; i < samples; ++i) {
      if (!feasible[static_cast<std::size_t>(i)]) {
        outputs[static_cast<std::size_t>(i)] = mean;
      }
    }
  }

  const std::size_t nf = run.factors.size();
  run.raw.assign(nf, {});
  run.clipped.assign(nf, {});

  std::vector<double> column;
  for (int c : checkpoints) {
    GsaCheckpoint cp;
    cp.samples = c;
    cp.clipped.assign(nf, {});
    for (int k = 0; k < 4; ++k) {
      column.resize(static_cast<std::size_t>(c));
      for (int i = 0; i < c; ++i) {
        column[static_cast<std::size_t>(i)] =
            outputs[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      }
      const SensitivityIndices si =
          rbd_fast_prefix_indices(design, column, options.harmonics, c);
      for (std::size_t f = 0; f < nf; ++f) {
        cp.clipped[f][static_cast<std::size_t>(k)] = si.clipped[f];
      }
      if (c == samples) {
        for (std::size_t f = 0; f < nf; ++f) {
          run.raw[f][static_cast<std::size_t>(k)] = si.raw[f];
          run.clipped[f][static_cast<std::size_t>(k)] = si.clipped[f];
        }
        run.total_variance[static_cast<std::size_t>(k)] = si.total_variance;
        run.output_mean[static_cast<std::size_t>(k)] = si.mean;
        run.low_variance[static_cast<std::size_t>(k)] = si.low_variance;
        run.sum_above_one[static_cast<std::size_t>(k)] = si.sum_above_one;
      }
    }
    run.trace.push_back(std::move(cp));
  }
  return run;
}

}  // namespace piroute
