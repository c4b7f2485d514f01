#include "piroute/rbd_fast.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "piroute/sampling.hpp"

namespace piroute {

RbdDesign::RbdDesign(int factors, int samples, std::uint64_t seed)
    : samples_(samples) {
  if (factors <= 0) {
    throw std::invalid_argument("sensitivity design needs at least 1 factor");
  }
  if (samples < 2) {
    throw std::invalid_argument("sensitivity design needs at least 2 samples");
  }
  const std::size_t n = static_cast<std::size_t>(samples);
  u_.assign(static_cast<std::size_t>(factors), std::vector<double>(n));
  order_.assign(static_cast<std::size_t>(factors), std::vector<int>(n));

  // Sweep angles equally spaced over (-pi, pi].
  std::vector<double> angle(n);
  for (std::size_t k = 0; k < n; ++k) {
    angle[k] = -std::numbers::pi +
               2.0 * std::numbers::pi * static_cast<double>(k + 1) /
                   static_cast<double>(samples);
  }

  std::vector<int> perm(n);
  for (int i = 0; i < factors; ++i) {
    const std::uint64_t stream = stream_id(fmt::format("rbd-perm:{}", i));
    for (std::size_t j = 0; j < n; ++j) perm[j] = static_cast<int>(j);
    for (std::size_t k = n - 1; k > 0; --k) {
      const std::uint64_t r = mix64(seed, stream, k);
      std::swap(perm[k], perm[r % (k + 1)]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double s = angle[static_cast<std::size_t>(perm[j])];
      u_[static_cast<std::size_t>(i)][j] =
          0.5 + std::asin(std::sin(s)) / std::numbers::pi;
      // Ascending angle order is the inverse permutation: the row using the
      // k-th smallest angle is the row j with perm[j] == k.
      order_[static_cast<std::size_t>(i)][static_cast<std::size_t>(perm[j])] =
          static_cast<int>(j);
    }
  }
}

namespace {

// Shared core: orders[i] lists positions into `outputs` in ascending sweep
// angle for factor i; all orders have outputs.size() entries.
SensitivityIndices estimate(const std::vector<std::vector<int>>& orders,
                            const std::vector<double>& outputs,
                            int harmonics) {
  const int n = static_cast<int>(outputs.size());

  SensitivityIndices result;
  result.raw.assign(orders.size(), 0.0);
  result.clipped = result.raw;

  double mean = 0.0;
  for (double y : outputs) mean += y;
  mean /= n;
  double var = 0.0;
  for (double y : outputs) var += (y - mean) * (y - mean);
  var /= n;
  result.mean = mean;
  result.total_variance = var;

  if (var == 0.0 || var < 1e-12 * mean * mean) {
    result.low_variance = true;
    return result;
  }

  const double tau = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const std::vector<int>& order = orders[i];
    double vi = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      double re = 0.0;
      double im = 0.0;
      for (int k = 0; k < n; ++k) {
        const double y =
            outputs[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] -
            mean;
        re += y * std::cos(tau * h * k);
        im -= y * std::sin(tau * h * k);
      }
      vi += 2.0 * (re * re + im * im) / (static_cast<double>(n) *
                                         static_cast<double>(n));
    }
    const double ratio = vi / var;
    // Small-sample bias correction: spurious harmonic power of size ~2M/N
    // leaks in from the unexplained part of the variance.
    const double corrected =
        ratio - (2.0 * harmonics / static_cast<double>(n)) * (1.0 - ratio);
    result.raw[i] = corrected;
    result.clipped[i] = std::clamp(corrected, 0.0, 1.0);
  }

  double sum = 0.0;
  for (double s : result.clipped) sum += s;
  result.sum_above_one = sum > 1.1;
  return result;
}

void check_resolution(int n, int harmonics) {
  if (harmonics < 1) {
    throw std::invalid_argument("harmonics must be at least 1");
  }
  if (n < 4 * harmonics + 2) {
    throw std::invalid_argument(fmt::format(
        "{} samples cannot resolve {} harmonics; need at least {}", n,
        harmonics, 4 * harmonics + 2));
  }
}

}  // namespace

SensitivityIndices rbd_fast_indices(const RbdDesign& design,
                                    const std::vector<double>& outputs,
                                    int harmonics) {
  const int n = design.samples();
  if (static_cast<int>(outputs.size()) != n) {
    throw std::invalid_argument(
        fmt::format("got {} outputs for a design of {} samples",
                    outputs.size(), n));
  }
  check_resolution(n, harmonics);

  std::vector<std::vector<int>> orders;
  orders.reserve(static_cast<std::size_t>(design.factors()));
  for (int i = 0; i < design.factors(); ++i) orders.push_back(design.order(i));
  return estimate(orders, outputs, harmonics);
}

SensitivityIndices rbd_fast_prefix_indices(const RbdDesign& design,
                                           const std::vector<double>& outputs,
                                           int harmonics, int prefix) {
  if (prefix < 2 || prefix > design.samples()) {
    throw std::invalid_argument(
        fmt::format("prefix {} outside the design's {} samples", prefix,
                    design.samples()));
  }
  if (static_cast<int>(outputs.size()) != prefix) {
    throw std::invalid_argument(fmt::format(
        "got {} outputs for a prefix of {} samples", outputs.size(), prefix));
  }
  check_resolution(prefix, harmonics);

  std::vector<std::vector<int>> orders(
      static_cast<std::size_t>(design.factors()));
  for (int i = 0; i < design.factors(); ++i) {
    std::vector<int>& filtered = orders[static_cast<std::size_t>(i)];
    filtered.reserve(static_cast<std::size_t>(prefix));
    for (int row : design.order(i)) {
      if (row < prefix) filtered.push_back(row);
    }
  }
  return estimate(orders, outputs, harmonics);
}

SensitivityIndices rbd_fast(
    int factors, int samples, int harmonics, std::uint64_t seed,
    const std::function<double(const std::vector<double>&)>& f) {
  const RbdDesign design(factors, samples, seed);
  std::vector<double> outputs(static_cast<std::size_t>(samples));
  std::vector<double> row(static_cast<std::size_t>(factors));
  for (int j = 0; j < samples; ++j) {
    for (int i = 0; i < factors; ++i) {
      row[static_cast<std::size_t>(i)] = design.u(i, j);
    }
    outputs[static_cast<std::size_t>(j)] = f(row);
  }
  return rbd_fast_indices(design, outputs, harmonics);
}

}  // namespace piroute
