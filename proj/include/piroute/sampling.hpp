#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "piroute/itinerary.hpp"
#include "piroute/model.hpp"
#include "piroute/scenario.hpp"

namespace piroute {

// Counter-based pseudo-randomness: every draw is a pure function of
// (seed, stream, counter), so results never depend on evaluation order,
// thread count, or how many other draws happened. Streams are derived from
// entity id strings.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix64(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t counter);
double uniform01(std::uint64_t seed, std::uint64_t stream,
                 std::uint64_t counter);  // in [0, 1)
std::uint64_t stream_id(const std::string& name);

// Which uncertain inputs vary between samples. The rest stay at the values
// written in the scenario.
enum class SamplingMode { AllVary, OnlyModuleCounts, OnlyOneHub };

struct SamplingPlan {
  SamplingMode mode = SamplingMode::AllVary;
  std::string hub_id;  // OnlyOneHub: the single hub whose time varies
};

// One sampled scenario realization: an effective processing time for every
// hub (sampled or base) and a module count for every shipment.
struct SampledInputs {
  HubTimes hub_times;
  std::map<std::string, int> module_counts;
};

// Unit-interval to input-value mappings, shared by plain Monte Carlo and
// the sensitivity design so both sample identical marginal distributions.
Minutes hub_time_from_unit(const ExperimentConfig& cfg, double u);
int module_count_from_unit(const ExperimentConfig& cfg, double u);

// Splits a shipment's total volume over n modules as evenly as whole liters
// allow; the first (total mod n) modules carry one extra liter.
std::vector<Liters> split_volumes(Liters total, int n);

SampledInputs sample_inputs(const Scenario& sc, const SamplingPlan& plan,
                            std::uint64_t seed, std::uint64_t sample_index);

// Applies sampled module counts to the network: volumes follow the
// scenario's volume rule, and every module of a shipment inherits the
// first module's arrival time at each origin. Hub times are NOT baked in;
// pass SampledInputs::hub_times to the solver instead.
Network materialize(const Scenario& sc, const SampledInputs& inputs,
                    std::uint64_t seed, std::uint64_t sample_index);

}  // namespace piroute
