#pragma once

namespace tandem::analytic {

/// Imbalances Delta_1, Delta_2 as optical path lengths (m), piezo offsets included.
struct TandemPhaseConfig {
  double delta1{0.0};
  double delta2{0.0};
  double wavelength{780e-9};

  void validate() const;
};

struct FransonConfig {
  double delta1{0.0};
  double delta2{0.0};
  double photon_coherence_length{1e-4};
  double pump_coherence_length{100.0};
  double pump_wavelength{390e-9};

  void validate() const;
};

/// Thermal tandem intensity correlation normalized to the uncorrelated
/// baseline: (3 + cos(2 pi (Delta1 - Delta2) / lambda)) / 2. Peak 2 (HBT),
/// minimum 1, visibility 1/3, no dependence on coherence length.
double thermal_tandem_g2(const TandemPhaseConfig &cfg);

/// Intensity-fluctuation correlation normalized to peak 1:
/// (1 + cos(2 pi (Delta1 - Delta2) / lambda)) / 2.
double fluctuation_correlation_analytic(const TandemPhaseConfig &cfg);

/// Franson visibility envelope. Gaussian envelopes with coherence lengths as
/// 1/e half-widths: exp(-(mean imbalance / l_pump)^2) * exp(-(|Delta1 - Delta2| / l_photon)^2).
double franson_visibility(const FransonConfig &cfg);

/// Entangled-pair coincidence 1 + V cos(2 pi (Delta1 + Delta2) / (2 lambda_pump)).
double franson_coincidence(const FransonConfig &cfg);

/// (max - min) / (max + min) of thermal_tandem_g2 over a full period of the
/// phase difference, evaluated on a grid around the given imbalances.
double thermal_tandem_visibility(double delta1, double delta2, double wavelength, int grid_points = 720);

} // namespace tandem::analytic
