#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace piroute {

// Random-balance-design FAST: all factors ride one periodic curve through
// the unit hypercube, each seeing the curve through its own random
// permutation. First-order sensitivity of a factor is read from the low
// harmonics of the outputs re-sorted into that factor's sweep order.
class RbdDesign {
 public:
  RbdDesign(int factors, int samples, std::uint64_t seed);

  int factors() const { return static_cast<int>(u_.size()); }
  int samples() const { return samples_; }
  // Input value for one factor on one sample row, in [0, 1].
  double u(int factor, int sample) const {
    return u_[static_cast<std::size_t>(factor)]
             [static_cast<std::size_t>(sample)];
  }
  // Sample indices arranged so this factor's sweep angle ascends.
  const std::vector<int>& order(int factor) const {
    return order_[static_cast<std::size_t>(factor)];
  }

 private:
  int samples_ = 0;
  std::vector<std::vector<double>> u_;
  std::vector<std::vector<int>> order_;
};

struct SensitivityIndices {
  std::vector<double> raw;      // bias-corrected first-order estimates
  std::vector<double> clipped;  // raw clipped into [0, 1]
  double mean = 0.0;
  double total_variance = 0.0;  // population variance of the outputs
  // Outputs are (numerically) constant; indices are forced to zero and
  // carry no information.
  bool low_variance = false;
  // Clipped indices sum above 1.1: more than estimator noise alone should
  // produce, so the estimate deserves suspicion.
  bool sum_above_one = false;
};

// Estimates first-order indices from one output per design row. Requires
// outputs.size() == design.samples() and samples >= 4*harmonics + 2.
SensitivityIndices rbd_fast_indices(const RbdDesign& design,
                                    const std::vector<double>& outputs,
                                    int harmonics);

// Estimates from only the first `prefix` design rows (outputs holds exactly
// those). Within the prefix each factor's rows are re-sorted by sweep angle
// and treated as an even sweep, so the estimate sharpens toward the full-
// design value as the prefix grows; prefix == design.samples() reproduces
// rbd_fast_indices exactly. Used for convergence traces that reuse one set
// of model runs.
SensitivityIndices rbd_fast_prefix_indices(const RbdDesign& design,
                                           const std::vector<double>& outputs,
                                           int harmonics, int prefix);

// Convenience wrapper: builds the design and evaluates f row by row.
SensitivityIndices rbd_fast(
    int factors, int samples, int harmonics, std::uint64_t seed,
    const std::function<double(const std::vector<double>&)>& f);

}  // namespace piroute
