#include <tandem/analytic.hpp>
#include <tandem/errors.hpp>
#include <tandem/field.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tandem::analytic {

namespace {

double difference_phase(const TandemPhaseConfig &cfg) {
  return 2.0 * kPi * (cfg.delta1 - cfg.delta2) / cfg.wavelength;
}

double gaussian_envelope(double x, double width) { return std::exp(-(x / width) * (x / width)); }

} // namespace

void TandemPhaseConfig::validate() const {
  if (!(std::isfinite(wavelength) && wavelength > 0.0))
    throw ConfigError(fmt::format("wavelength must be > 0 (got {})", wavelength));
  if (!std::isfinite(delta1) || !std::isfinite(delta2))
    throw ConfigError("imbalances must be finite");
}

void FransonConfig::validate() const {
  for (double v : {delta1, delta2, photon_coherence_length, pump_coherence_length, pump_wavelength})
    if (!(std::isfinite(v) && v >= 0.0))
      throw ConfigError("Franson lengths must be finite and non-negative");
  if (photon_coherence_length <= 0.0 || pump_coherence_length <= 0.0 || pump_wavelength <= 0.0)
    throw ConfigError("Franson coherence lengths and pump wavelength must be > 0");
}

double thermal_tandem_g2(const TandemPhaseConfig &cfg) {
  cfg.validate();
  return 0.5 * (3.0 + std::cos(difference_phase(cfg)));
}

double fluctuation_correlation_analytic(const TandemPhaseConfig &cfg) {
  cfg.validate();
  return 0.5 * (1.0 + std::cos(difference_phase(cfg)));
}

double franson_visibility(const FransonConfig &cfg) {
  cfg.validate();
  const double mean_imbalance = 0.5 * (cfg.delta1 + cfg.delta2);
  return gaussian_envelope(mean_imbalance, cfg.pump_coherence_length) *
         gaussian_envelope(std::abs(cfg.delta1 - cfg.delta2), cfg.photon_coherence_length);
}

double franson_coincidence(const FransonConfig &cfg) {
  const double signal_wavelength = 2.0 * cfg.pump_wavelength;
  return 1.0 + franson_visibility(cfg) * std::cos(2.0 * kPi * (cfg.delta1 + cfg.delta2) / signal_wavelength);
}

double thermal_tandem_visibility(double delta1, double delta2, double wavelength, int grid_points) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int k = 0; k < grid_points; ++k) {
    const double shift = wavelength * static_cast<double>(k) / grid_points;
    const double g = thermal_tandem_g2({delta1 + shift, delta2, wavelength});
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  return (hi - lo) / (hi + lo);
}

} // namespace tandem::analytic
