#pragma once
#include <tandem/config.hpp>
#include <tandem/correlator.hpp>
#include <tandem/network.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace tandem::experiment {

/// Plain HBT run: source -> one 50:50 coupler -> two detectors.
struct SourceCharacterization {
  corr::LagHistogram histogram;
  corr::G2Summary summary;
  std::size_t realizations{0};
};

/// One scan: per-point counts and moments, plus fits.
struct ScanResult {
  corr::FringeSeries points;
  std::vector<corr::MomentRecord> moments;
  corr::FringeFit fit_free;
  corr::FringeFit fit_fixed;
  /// Sinusoid fits of N1 and N2 at the coincidence fringe period; their
  /// visibility is the first-order (singles) flatness statistic.
  corr::FringeFit singles1;
  corr::FringeFit singles2;
  /// Fits of <I1 I2>/(<I1><I2>) and of <dI1 dI2> across the scan.
  corr::FringeFit moment_g2_fit;
  corr::FringeFit covariance_fit;
  network::ConditionReport conditions;
  double period_hint{0.0};  ///< s
  double piezo_rate{0.0};   ///< m/s, travel rate of one actuator
  std::size_t realizations_per_point{0};

  /// Fringe period per unit travel of one actuator, m.
  double period_per_travel(const corr::FringeFit &fit) const { return fit.period * piezo_rate; }
  double singles_visibility() const;
};

struct SweepRow {
  double spool_length{0.0}; ///< m
  double long_delay{0.0};   ///< s
  double long_path_amplitude_transmission{1.0};
  ScanResult scan;
};

/// Realizations per point giving the configured relative coincidence error,
/// counting only Poisson noise on the accidental baseline:
///   n = ceil(1 / (target^2 * r1 r2 w T_valid)).
std::size_t default_realizations(const ExperimentConfig &cfg, bool tandem);

/// Mean click rates (1/s) at the two detectors of the tandem network.
std::pair<double, double> expected_tandem_rates(const ExperimentConfig &cfg);

SourceCharacterization run_source_characterization(const ExperimentConfig &cfg);
ScanResult run_scan(const ExperimentConfig &cfg);
std::vector<SweepRow> run_delay_sweep(const ExperimentConfig &cfg, std::span<const double> spool_lengths);

struct AnalyticCurvePoint {
  double difference{0.0}; ///< Delta1 - Delta2, m
  double thermal_g2{0.0};
  double fluctuation{0.0};
};

/// Thermal and fluctuation fringes over analytic.points samples of
/// Delta1 - Delta2 in [0, analytic.difference_span].
std::vector<AnalyticCurvePoint> analytic_curves(const ExperimentConfig &cfg);

struct FransonScanPoint {
  double sum_offset{0.0}; ///< change of Delta1 + Delta2, m (difference held fixed)
  double franson{0.0};
  double thermal_g2{0.0};
};

struct FransonVisibilityRow {
  double mean_imbalance{0.0}; ///< m
  double franson_visibility{0.0};
  double thermal_visibility{0.0};
};

/// Same-direction scan around franson.delta1/delta2: the sum moves, the difference does not.
std::vector<FransonScanPoint> franson_scan(const ExperimentConfig &cfg);
/// Visibility of both models over analytic.mean_imbalances with Delta1 = Delta2.
std::vector<FransonVisibilityRow> franson_visibility_table(const ExperimentConfig &cfg);

/// Configuration for one sweep entry (long-path delay and loss set from length).
ExperimentConfig sweep_entry_config(const ExperimentConfig &cfg, double spool_length, std::size_t index);

} // namespace tandem::experiment
