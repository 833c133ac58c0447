#pragma once
#include <tandem/field.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tandem::network {

/// One unbalanced Mach-Zehnder interferometer. Delays are group delays in
/// seconds; the piezo offset is an optical path change on the short arm,
/// signed so that a positive offset increases the imbalance.
struct UmziConfig {
  double short_delay{0.0};
  double long_delay{0.0};
  double piezo_offset{0.0}; ///< m
  double long_path_amplitude_transmission{0.95};

  void validate() const;
  /// long_delay - short_delay, seconds.
  double imbalance_delay() const { return long_delay - short_delay; }
};

enum class SpoolNoiseMode { Shared, Independent, Off };

/// Ornstein-Uhlenbeck carrier-phase noise on the long (spool) arms.
struct SpoolNoiseModel {
  SpoolNoiseMode mode{SpoolNoiseMode::Shared};
  double rms_phase{kPi};          ///< rad
  double correlation_time{11.44e-6}; ///< s

  void validate() const;
};

struct TandemNetwork {
  field::SpectralProfile profile;
  UmziConfig umzi1;
  UmziConfig umzi2;
  SpoolNoiseModel spool_noise;

  void validate() const;
};

struct ConditionThresholds {
  double min_imbalance_ratio{3.0};  ///< Delta_j / (c tau_c) should exceed this
  double max_mismatch_ratio{0.1};   ///< |L1-L2|, |S1-S2| over c tau_c should stay below this
};

/// Dimensionless ratios checking the regime in which the 3 + cos fringe is
/// expected. Violations are reported, never thrown.
struct ConditionReport {
  double imbalance1_ratio{0.0};
  double imbalance2_ratio{0.0};
  double long_mismatch_ratio{0.0};
  double short_mismatch_ratio{0.0};
  bool imbalance1_ok{false};
  bool imbalance2_ok{false};
  bool long_match_ok{false};
  bool short_match_ok{false};
  std::vector<std::string> warnings;

  bool all_ok() const { return imbalance1_ok && imbalance2_ok && long_match_ok && short_match_ok; }
};

ConditionReport condition_report(const TandemNetwork &network, const ConditionThresholds &thresholds = {});

/// Detector-port fields plus the two unused UMZI output ports.
struct PortFields {
  field::FieldTrace detector1;
  field::FieldTrace detector2;
  field::FieldTrace discard1;
  field::FieldTrace discard2;
};

/// Full propagation: source -> splitting coupler -> two UMZIs. Validity masks
/// of all four ports are intersected.
PortFields propagate_ports(const TandemNetwork &network, const field::FieldTrace &input, std::uint64_t noise_seed);

/// Detector-port fields (E1, E2) only.
std::pair<field::FieldTrace, field::FieldTrace> propagate(const TandemNetwork &network, const field::FieldTrace &input,
                                                          std::uint64_t noise_seed);

/// Stationary OU process sampled exactly on a grid of spacing dt.
std::vector<double> ou_phase(std::size_t n, double dt, double rms, double correlation_time, std::uint64_t seed);

/// Group delay of a fiber of given length and group index.
inline double fiber_group_delay(double length_m, double group_index) {
  return length_m * group_index / kSpeedOfLight;
}

} // namespace tandem::network
