#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "piroute/model.hpp"

namespace piroute {

// How module volumes are regenerated when a sampled module count differs
// from the deterministic scenario.
enum class VolumeRule {
  EqualSplit,  // fixed shipment total split evenly (remainder liters lead)
  IidVolumes,  // each module volume drawn uniformly from a configured range
};

std::string to_string(VolumeRule r);
VolumeRule volume_rule_from(const std::string& s);

struct ExperimentConfig {
  Objective objective = Objective::J2;
  int sample_count = 1000;
  std::uint64_t seed = 0;
  int harmonics = 6;
  double hub_time_lo = 1.0;  // hours, uniform support for every tau_p
  double hub_time_hi = 3.0;
  int module_count_lo = 1;  // discrete uniform support for every n_s
  int module_count_hi = 10;
  VolumeRule volume_rule = VolumeRule::EqualSplit;
  double module_volume_lo = 1.0;  // m^3, used by IidVolumes only
  double module_volume_hi = 10.0;
};

struct Scenario {
  Network network;
  ExperimentConfig experiment;
  // from id -> to id -> km; fills services that omit an explicit distance.
  std::map<std::string, std::map<std::string, double>> distances;
};

// Thrown when a structurally well-formed document fails network validation.
class ValidationError : public ParseError {
 public:
  ValidationError(std::string message, std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

Scenario load_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

// Canonical serialization: times as "HH:MM", every service with an explicit
// distance, stable field order. load(save(sc)) is semantically identical.
std::string save_scenario(const Scenario& sc);

}  // namespace piroute
