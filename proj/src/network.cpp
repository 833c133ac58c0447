#include <tandem/errors.hpp>
#include <tandem/network.hpp>
#include <tandem/seeding.hpp>

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace tandem::network {

using field::FieldTrace;
using field::OpticalPath;

void UmziConfig::validate() const {
  if (!std::isfinite(short_delay) || short_delay < 0.0)
    throw ConfigError(fmt::format("short_delay must be >= 0 (got {})", short_delay));
  if (!std::isfinite(long_delay) || long_delay < short_delay)
    throw ConfigError(fmt::format("long_delay ({}) must be >= short_delay ({})", long_delay, short_delay));
  if (!std::isfinite(piezo_offset))
    throw ConfigError("piezo_offset must be finite");
  if (!(long_path_amplitude_transmission >= 0.0 && long_path_amplitude_transmission <= 1.0))
    throw ConfigError(fmt::format("long_path_amplitude_transmission must lie in [0,1] (got {})",
                                  long_path_amplitude_transmission));
}

void SpoolNoiseModel::validate() const {
  if (!std::isfinite(rms_phase) || rms_phase < 0.0)
    throw ConfigError(fmt::format("spool rms_phase must be >= 0 (got {})", rms_phase));
  if (mode != SpoolNoiseMode::Off && !(std::isfinite(correlation_time) && correlation_time > 0.0))
    throw ConfigError(fmt::format("spool correlation_time must be > 0 (got {})", correlation_time));
}

void TandemNetwork::validate() const {
  profile.validate();
  umzi1.validate();
  umzi2.validate();
  spool_noise.validate();
}

ConditionReport condition_report(const TandemNetwork &network, const ConditionThresholds &thresholds) {
  ConditionReport r;
  const double tc = network.profile.coherence_time;
  r.imbalance1_ratio = network.umzi1.imbalance_delay() / tc;
  r.imbalance2_ratio = network.umzi2.imbalance_delay() / tc;
  r.long_mismatch_ratio = std::abs(network.umzi1.long_delay - network.umzi2.long_delay) / tc;
  r.short_mismatch_ratio = std::abs(network.umzi1.short_delay - network.umzi2.short_delay) / tc;
  r.imbalance1_ok = r.imbalance1_ratio > thresholds.min_imbalance_ratio;
  r.imbalance2_ok = r.imbalance2_ratio > thresholds.min_imbalance_ratio;
  r.long_match_ok = r.long_mismatch_ratio < thresholds.max_mismatch_ratio;
  r.short_match_ok = r.short_mismatch_ratio < thresholds.max_mismatch_ratio;
  auto imbalance_warning = [&](int j, double ratio) {
    r.warnings.push_back(fmt::format("UMZI{} imbalance/c*tau_c = {:.4g} <= {:.4g}: first-order interference at the "
                                     "detector is not fully suppressed",
                                     j, ratio, thresholds.min_imbalance_ratio));
  };
  if (!r.imbalance1_ok)
    imbalance_warning(1, r.imbalance1_ratio);
  if (!r.imbalance2_ok)
    imbalance_warning(2, r.imbalance2_ratio);
  if (!r.long_match_ok)
    r.warnings.push_back(fmt::format("|L1-L2|/c*tau_c = {:.4g} >= {:.4g}: long-long amplitudes lose overlap",
                                     r.long_mismatch_ratio, thresholds.max_mismatch_ratio));
  if (!r.short_match_ok)
    r.warnings.push_back(fmt::format("|S1-S2|/c*tau_c = {:.4g} >= {:.4g}: short-short amplitudes lose overlap",
                                     r.short_mismatch_ratio, thresholds.max_mismatch_ratio));
  return r;
}

std::vector<double> ou_phase(std::size_t n, double dt, double rms, double correlation_time, std::uint64_t seed) {
  std::vector<double> phase(n, 0.0);
  if (n == 0 || rms == 0.0)
    return phase;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double decay = std::exp(-dt / correlation_time);
  const double kick = rms * std::sqrt(1.0 - decay * decay);
  phase[0] = rms * normal(rng);
  for (std::size_t k = 1; k < n; ++k)
    phase[k] = decay * phase[k - 1] + kick * normal(rng);
  return phase;
}

namespace {

struct UmziPorts {
  FieldTrace out_detector;
  FieldTrace out_discard;
};

UmziPorts propagate_umzi(const UmziConfig &cfg, double wavelength, const FieldTrace &input,
                         const std::vector<cplx> *spool_phase) {
  auto [to_short, to_long] = field::beamsplit_5050(input, field::vacuum_like(input));
  const OpticalPath short_path{cfg.short_delay, -2.0 * kPi * cfg.piezo_offset / wavelength, 1.0};
  const OpticalPath long_path{cfg.long_delay, 0.0, cfg.long_path_amplitude_transmission};
  FieldTrace s = field::apply_path(to_short, short_path);
  FieldTrace l = field::apply_path(to_long, long_path);
  if (spool_phase)
    field::apply_phase_factors(l, *spool_phase);
  auto [det, discard] = field::beamsplit_5050(s, l);
  return {std::move(det), std::move(discard)};
}

} // namespace

PortFields propagate_ports(const TandemNetwork &network, const FieldTrace &input, std::uint64_t noise_seed) {
  network.validate();
  const double max_delay = std::max(network.umzi1.long_delay, network.umzi2.long_delay);
  if (max_delay >= input.duration())
    throw ConfigError(fmt::format("long delay {:.6g} s exceeds trace duration {:.6g} s", max_delay, input.duration()));

  const auto &noise = network.spool_noise;
  std::vector<cplx> phase1;
  std::vector<cplx> phase2;
  const std::vector<cplx> *p1 = nullptr;
  const std::vector<cplx> *p2 = nullptr;
  if (noise.mode == SpoolNoiseMode::Shared) {
    phase1 = field::phase_factors(ou_phase(input.size(), input.dt, noise.rms_phase, noise.correlation_time, noise_seed));
    p1 = p2 = &phase1;
  } else if (noise.mode == SpoolNoiseMode::Independent) {
    phase1 = field::phase_factors(
        ou_phase(input.size(), input.dt, noise.rms_phase, noise.correlation_time, derive_seed(noise_seed, {1})));
    phase2 = field::phase_factors(
        ou_phase(input.size(), input.dt, noise.rms_phase, noise.correlation_time, derive_seed(noise_seed, {2})));
    p1 = &phase1;
    p2 = &phase2;
  }

  auto [beam1, beam2] = field::beamsplit_5050(input, field::vacuum_like(input));
  const double wavelength = network.profile.center_wavelength;
  UmziPorts u1 = propagate_umzi(network.umzi1, wavelength, beam1, p1);
  UmziPorts u2 = propagate_umzi(network.umzi2, wavelength, beam2, p2);

  const ValidRange valid = u1.out_detector.valid.intersect(u2.out_detector.valid);
  PortFields out{std::move(u1.out_detector), std::move(u2.out_detector), std::move(u1.out_discard),
                 std::move(u2.out_discard)};
  out.detector1.valid = out.detector2.valid = out.discard1.valid = out.discard2.valid = valid;
  return out;
}

std::pair<FieldTrace, FieldTrace> propagate(const TandemNetwork &network, const FieldTrace &input,
                                            std::uint64_t noise_seed) {
  PortFields ports = propagate_ports(network, input, noise_seed);
  return {std::move(ports.detector1), std::move(ports.detector2)};
}

} // namespace tandem::network
