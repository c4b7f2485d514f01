#include "piroute/montecarlo.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace piroute {

int MonteCarloResult::infeasible_count() const {
  int n = 0;
  for (const auto& row : rows) {
    if (row.status != SolveStatus::Optimal) ++n;
  }
  return n;
}

MonteCarloResult run_monte_carlo(const Scenario& sc, Objective objective,
                                 const SamplingPlan& plan, int samples,
                                 std::uint64_t seed, int jobs,
                                 const SolverOptions& options) {
  if (samples < 0) {
    throw std::invalid_argument("sample count must be nonnegative");
  }
  MonteCarloResult result;
  result.objective = objective;
  result.rows.resize(static_cast<std::size_t>(samples));

  auto solve_one = [&](std::int64_t i) {
    const SampledInputs inputs =
        sample_inputs(sc, plan, seed, static_cast<std::uint64_t>(i));
    const Network net =
        materialize(sc, inputs, seed, static_cast<std::uint64_t>(i));
    const AssignmentSolution sol =
        solve_exact(net, objective, inputs.hub_times, options);
    SampleRow& row = result.rows[static_cast<std::size_t>(i)];
    row.sample_index = i;
    row.status = sol.status;
    if (sol.status == SolveStatus::Optimal) row.kpis = sol.kpis;
  };

  const int workers = std::min(jobs, samples);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < samples; ++i) solve_one(i);
    return result;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= samples) return;
      try {
        solve_one(i);
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
  return result;
}

VariabilityReport variability_report(const MonteCarloResult& result,
                                     double max_infeasible_share) {
  VariabilityReport report;
  report.total_samples = static_cast<int>(result.rows.size());
  report.feasible_samples = report.total_samples - result.infeasible_count();

  const int bad = report.total_samples - report.feasible_samples;
  if (report.total_samples > 0 &&
      static_cast<double>(bad) >
          max_infeasible_share * static_cast<double>(report.total_samples)) {
    throw std::runtime_error(fmt::format(
        "{} of {} samples were infeasible, above the {:.0f}% limit; the "
        "sampling ranges do not fit this network",
        bad, report.total_samples, max_infeasible_share * 100.0));
  }
  if (report.feasible_samples < 2) {
    throw std::runtime_error(fmt::format(
        "only {} feasible samples; at least 2 are needed for variability "
        "statistics",
        report.feasible_samples));
  }

  for (int k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (const auto& row : result.rows) {
      if (row.status != SolveStatus::Optimal) continue;
      sum += row.kpis.values()[static_cast<std::size_t>(k)];
    }
    const double mean = sum / report.feasible_samples;
    double ss = 0.0;
    for (const auto& row : result.rows) {
      if (row.status != SolveStatus::Optimal) continue;
      const double d =
          row.kpis.values()[static_cast<std::size_t>(k)] - mean;
      ss += d * d;
    }
    KpiStats& stats = report.kpis[static_cast<std::size_t>(k)];
    stats.mean = mean;
    stats.variance = ss / (report.feasible_samples - 1);
    if (mean != 0.0) {
      stats.rel_std = std::sqrt(stats.variance) / std::abs(mean);
    }
  }
  return report;
}

}  // namespace piroute
