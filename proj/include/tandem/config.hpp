#pragma once
#include <tandem/analytic.hpp>
#include <tandem/correlator.hpp>
#include <tandem/network.hpp>
#include <tandem/photodetection.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tandem::experiment {

enum class ScanMode { ScanD1, ScanD2, Opposite, Same, Static };
enum class SourceKind { Thermal, Coherent };

/// Per-point (Delta1, Delta2) schedule. Offsets and rate are optical path
/// changes applied through the piezo of each UMZI.
struct ScanPlan {
  ScanMode mode{ScanMode::ScanD2};
  double rate{63e-9}; ///< m/s per actuator
  double dwell{1.0};  ///< s
  std::size_t n_points{60};
  double start_delta1{0.0}; ///< m
  double start_delta2{0.0}; ///< m

  void validate() const;
  /// Piezo offsets at the start of point `index`.
  std::pair<double, double> offsets_at(std::size_t index) const;
  double wall_time(std::size_t index) const { return static_cast<double>(index) * dwell; }
  /// d(Delta1 - Delta2)/dt for this mode.
  double difference_rate() const;
};

struct SimulationSettings {
  double dt{572e-9 / 64.0};
  std::size_t samples_per_realization{65536};
  /// 0 selects the count-statistics default (see default_realizations).
  std::size_t realizations_per_point{0};
  field::SynthesisGuards guards;
  detect::DetectionOptions detection;
  double target_relative_error{0.03};
};

struct SweepPlan {
  std::vector<double> spool_lengths{200.0, 400.0, 600.0, 800.0}; ///< m
  double group_index{1.43};
  bool loss{true};
  double amplitude_transmission_per_200m{0.95};
};

struct AnalyticGrid {
  std::size_t points{721};
  double difference_span{2.0 * 780e-9}; ///< m, scan of Delta1 - Delta2 from 0
  std::vector<double> mean_imbalances{0.0, 10.0, 25.0, 50.0, 100.0, 200.0, 500.0, 1000.0}; ///< m, Franson grid
};

struct ExperimentConfig {
  network::TandemNetwork network;
  network::ConditionThresholds thresholds;
  SourceKind source_kind{SourceKind::Thermal};
  detect::DetectorModel detector1;
  detect::DetectorModel detector2;
  corr::CoincidenceConfig coincidence;
  ScanPlan plan;
  SweepPlan sweep;
  SimulationSettings sim;
  analytic::FransonConfig franson;
  AnalyticGrid analytic;
  std::uint64_t master_seed{1};
  std::string output_directory{"."};

  void validate() const;
};

/// Flat "dotted.key -> value" view of a configuration.
using KeyValues = std::map<std::string, std::string>;

/// Parse `key = value` lines; '#' starts a comment; blank lines ignored.
KeyValues parse_key_values(const std::string &text);

/// Accepts either key/value text or a JSON object of dotted keys. A JSON
/// document with a top-level "config" object (a run summary) is unwrapped.
KeyValues parse_config_text(const std::string &text);

/// Unknown keys and malformed values raise ConfigError.
ExperimentConfig config_from_key_values(const KeyValues &kv);
KeyValues config_to_key_values(const ExperimentConfig &cfg);

ExperimentConfig load_config(const std::filesystem::path &path);
ExperimentConfig parse_config(const std::string &text);
std::string to_config_text(const ExperimentConfig &cfg);

/// Shortest decimal text c with c / per == x exactly (per = 1e9 prints
/// seconds as ns, metres as nm).
std::string format_scaled(double x, double per);

std::string to_string(ScanMode mode);
std::string to_string(network::SpoolNoiseMode mode);

} // namespace tandem::experiment
