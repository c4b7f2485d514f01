#include "piroute/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace piroute {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t mix64(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

double uniform01(std::uint64_t seed, std::uint64_t stream,
                 std::uint64_t counter) {
  return static_cast<double>(mix64(seed, stream, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t stream_id(const std::string& name) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Minutes hub_time_from_unit(const ExperimentConfig& cfg, double u) {
  const double h = cfg.hub_time_lo + u * (cfg.hub_time_hi - cfg.hub_time_lo);
  return static_cast<Minutes>(std::llround(h * 60.0));
}

int module_count_from_unit(const ExperimentConfig& cfg, double u) {
  const int lo = cfg.module_count_lo;
  const int hi = cfg.module_count_hi;
  const int n = lo + static_cast<int>(u * static_cast<double>(hi - lo + 1));
  return std::clamp(n, lo, hi);
}

std::vector<Liters> split_volumes(Liters total, int n) {
  if (n <= 0 || total < n) {
    throw std::invalid_argument(fmt::format(
        "cannot split {} liters into {} whole-liter modules", total, n));
  }
  std::vector<Liters> vols(static_cast<std::size_t>(n), total / n);
  for (std::int64_t i = 0; i < total % n; ++i) vols[static_cast<std::size_t>(i)] += 1;
  return vols;
}

SampledInputs sample_inputs(const Scenario& sc, const SamplingPlan& plan,
                            std::uint64_t seed, std::uint64_t sample_index) {
  if (plan.mode == SamplingMode::OnlyOneHub) {
    const Node* hub = sc.network.find_node(plan.hub_id);
    if (hub == nullptr || hub->kind != NodeKind::PIHub) {
      throw ParseError(fmt::format(
          "sampling plan names '{}' which is not a PI-hub", plan.hub_id));
    }
  }
  SampledInputs out;
  for (const auto& node : sc.network.nodes) {
    if (node.kind != NodeKind::PIHub) continue;
    const bool vary =
        plan.mode == SamplingMode::AllVary ||
        (plan.mode == SamplingMode::OnlyOneHub && node.id == plan.hub_id);
    if (vary) {
      const double u =
          uniform01(seed, stream_id("tau:" + node.id), sample_index);
      out.hub_times[node.id] = hub_time_from_unit(sc.experiment, u);
    } else {
      out.hub_times[node.id] = node.processing_time.value_or(0);
    }
  }
  for (const auto& sh : sc.network.shipments) {
    const bool vary = plan.mode == SamplingMode::AllVary ||
                      plan.mode == SamplingMode::OnlyModuleCounts;
    if (vary) {
      const double u =
          uniform01(seed, stream_id("count:" + sh.id), sample_index);
      out.module_counts[sh.id] = module_count_from_unit(sc.experiment, u);
    } else {
      out.module_counts[sh.id] = sh.module_count;
    }
  }
  return out;
}

Network materialize(const Scenario& sc, const SampledInputs& inputs,
                    std::uint64_t seed, std::uint64_t sample_index) {
  Network net = sc.network;
  for (auto& sh : net.shipments) {
    const auto it = inputs.module_counts.find(sh.id);
    if (it == inputs.module_counts.end()) {
      throw std::logic_error(
          fmt::format("sampled inputs lack a module count for '{}'", sh.id));
    }
    const int n = it->second;
    if (n == sh.module_count &&
        sc.experiment.volume_rule == VolumeRule::EqualSplit) {
      continue;  // keep the scenario's own volumes and arrivals
    }
    switch (sc.experiment.volume_rule) {
      case VolumeRule::EqualSplit:
        sh.module_volumes = split_volumes(sh.total_volume(), n);
        break;
      case VolumeRule::IidVolumes: {
        sh.module_volumes.clear();
        for (int j = 0; j < n; ++j) {
          const double u = uniform01(
              seed, stream_id(fmt::format("volume:{}:{}", sh.id, j)),
              sample_index);
          const double m3 =
              sc.experiment.module_volume_lo +
              u * (sc.experiment.module_volume_hi - sc.experiment.module_volume_lo);
          sh.module_volumes.push_back(
              std::max<Liters>(1, std::llround(m3 * 1000.0)));
        }
        break;
      }
    }
    for (auto& [origin, arrivals] : sh.origin_arrivals) {
      arrivals.assign(static_cast<std::size_t>(n), arrivals.front());
    }
    sh.module_count = n;
  }
  return net;
}

}  // namespace piroute
