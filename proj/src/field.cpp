#include <tandem/errors.hpp>
#include <tandem/field.hpp>

#include <fftw3.h>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>

namespace tandem {

ValidRange ValidRange::intersect(const ValidRange &other) const {
  ValidRange r{std::max(begin, other.begin), std::min(end, other.end)};
  if (r.end < r.begin)
    r.end = r.begin;
  return r;
}

} // namespace tandem

namespace tandem::field {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// g1 = exp(-a tau^2) with |g1|^2 = 1/2 at tau = tc/2  =>  a = 2 ln2 / tc^2
double gaussian_rate(double tc) { return 2.0 * std::log(2.0) / (tc * tc); }
// g1 = exp(-b |tau|) with |g1|^2 = 1/2 at tau = tc/2  =>  b = ln2 / tc
double lorentzian_rate(double tc) { return std::log(2.0) / tc; }

} // namespace

void SpectralProfile::validate() const {
  if (!finite_positive(center_wavelength))
    throw ConfigError(fmt::format("center_wavelength must be finite and > 0 (got {})", center_wavelength));
  if (!finite_positive(coherence_time))
    throw ConfigError(fmt::format("coherence_time must be finite and > 0 (got {})", coherence_time));
  if (!finite_positive(mean_intensity))
    throw ConfigError(fmt::format("mean_intensity must be finite and > 0 (got {})", mean_intensity));
}

void OpticalPath::validate() const {
  if (!std::isfinite(group_delay) || group_delay < 0.0)
    throw ConfigError(fmt::format("group_delay must be finite and >= 0 (got {})", group_delay));
  if (!std::isfinite(extra_carrier_phase))
    throw ConfigError("extra_carrier_phase must be finite");
  if (!(amplitude_transmission >= 0.0 && amplitude_transmission <= 1.0))
    throw ConfigError(fmt::format("amplitude_transmission must lie in [0,1] (got {})", amplitude_transmission));
}

cplx g1_analytic(const SpectralProfile &profile, double tau) {
  profile.validate();
  const double tc = profile.coherence_time;
  switch (profile.lineshape) {
  case Lineshape::Gaussian:
    return {std::exp(-gaussian_rate(tc) * tau * tau), 0.0};
  case Lineshape::Lorentzian:
    return {std::exp(-lorentzian_rate(tc) * std::abs(tau)), 0.0};
  }
  return {0.0, 0.0};
}

double g2_analytic(const SpectralProfile &profile, double tau) {
  return 1.0 + std::norm(g1_analytic(profile, tau));
}

struct ThermalSynthesizer::Plan {
  fftw_plan plan{nullptr};
  ~Plan() {
    if (plan) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

namespace {

struct FftwBuffer {
  fftw_complex *data;
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
    if (!data)
      throw RuntimeError("fftw_alloc_complex failed");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer &) = delete;
  FftwBuffer &operator=(const FftwBuffer &) = delete;
};

} // namespace

ThermalSynthesizer::ThermalSynthesizer(const SpectralProfile &profile, double dt, std::size_t n_samples,
                                       const SynthesisGuards &guards)
    : profile_(profile), dt_(dt), n_(n_samples), plan_(std::make_unique<Plan>()) {
  profile_.validate();
  if (!finite_positive(dt))
    throw ConfigError(fmt::format("dt must be finite and > 0 (got {})", dt));
  if (n_samples < 2)
    throw ConfigError(fmt::format("n_samples must be >= 2 (got {})", n_samples));
  const double tc = profile_.coherence_time;
  const double resolution_ratio = tc / dt;
  if (resolution_ratio < guards.resolution_factor)
    throw ConfigError(fmt::format("resolution guard violated: coherence_time/dt = {:.6g} < {:.6g}",
                                  resolution_ratio, guards.resolution_factor));
  const double stationarity_ratio = dt * static_cast<double>(n_samples) / tc;
  if (stationarity_ratio < guards.stationarity_factor)
    throw ConfigError(fmt::format("stationarity guard violated: dt*n_samples/coherence_time = {:.6g} < {:.6g}",
                                  stationarity_ratio, guards.stationarity_factor));

  // Discrete spectrum = DFT of the circularly wrapped, sampled g1. This makes
  // the grid-lag autocorrelation of generated traces equal g1 exactly.
  FftwBuffer buf(n_);
  for (std::size_t m = 0; m < n_; ++m) {
    const double lag = (m <= n_ / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n_)) * dt_;
    const cplx g = g1_analytic(profile_, lag);
    buf.data[m][0] = g.real();
    buf.data[m][1] = g.imag();
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_plan fwd = fftw_plan_dft_1d(static_cast<int>(n_), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);
  }
  amplitude_.resize(n_);
  const double scale = profile_.mean_intensity / static_cast<double>(n_);
  double peak = 0.0;
  for (std::size_t k = 0; k < n_; ++k)
    peak = std::max(peak, buf.data[k][0]);
  // Bins at FFT round-off level are zeroed; generate() draws nothing for them.
  const double floor = 1e-15 * peak;
  for (std::size_t k = 0; k < n_; ++k)
    amplitude_[k] = buf.data[k][0] > floor ? std::sqrt(buf.data[k][0] * scale) : 0.0;

  std::lock_guard lock(fftw_planner_mutex());
  plan_->plan = fftw_plan_dft_1d(static_cast<int>(n_), buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE);
}

ThermalSynthesizer::~ThermalSynthesizer() = default;
ThermalSynthesizer::ThermalSynthesizer(ThermalSynthesizer &&) noexcept = default;
ThermalSynthesizer &ThermalSynthesizer::operator=(ThermalSynthesizer &&) noexcept = default;

FieldTrace ThermalSynthesizer::generate(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  FftwBuffer buf(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    if (amplitude_[k] == 0.0) {
      buf.data[k][0] = buf.data[k][1] = 0.0;
      continue;
    }
    const double re = normal(rng);
    const double im = normal(rng);
    buf.data[k][0] = amplitude_[k] * re;
    buf.data[k][1] = amplitude_[k] * im;
  }
  fftw_execute_dft(plan_->plan, buf.data, buf.data);

  FieldTrace out;
  out.dt = dt_;
  out.t0 = 0.0;
  out.carrier_angular_frequency = profile_.carrier_angular_frequency();
  out.samples.resize(n_);
  for (std::size_t j = 0; j < n_; ++j)
    out.samples[j] = {buf.data[j][0], buf.data[j][1]};
  out.valid = {0, n_};
  return out;
}

FieldTrace synthesize_thermal(const SpectralProfile &profile, double dt, std::size_t n_samples,
                              std::uint64_t seed, const SynthesisGuards &guards) {
  return ThermalSynthesizer(profile, dt, n_samples, guards).generate(seed);
}

FieldTrace coherent_trace(const SpectralProfile &profile, double dt, std::size_t n_samples) {
  profile.validate();
  if (!finite_positive(dt) || n_samples < 2)
    throw ConfigError("coherent_trace needs dt > 0 and n_samples >= 2");
  FieldTrace out;
  out.dt = dt;
  out.carrier_angular_frequency = profile.carrier_angular_frequency();
  out.samples.assign(n_samples, cplx{std::sqrt(profile.mean_intensity), 0.0});
  out.valid = {0, n_samples};
  return out;
}

FieldTrace vacuum_like(const FieldTrace &like) {
  FieldTrace out;
  out.dt = like.dt;
  out.t0 = like.t0;
  out.carrier_angular_frequency = like.carrier_angular_frequency;
  out.samples.assign(like.size(), cplx{0.0, 0.0});
  out.valid = {0, like.size()};
  return out;
}

double carrier_phase(double carrier_angular_frequency, double delay) {
  // Work in cycles so the integer part can be discarded before scaling by 2pi.
  const double cycles = carrier_angular_frequency / (2.0 * kPi) * delay;
  double frac = cycles - std::floor(cycles);
  if (frac >= 1.0)
    frac = 0.0;
  return 2.0 * kPi * frac;
}

FieldTrace apply_path(const FieldTrace &trace, const OpticalPath &path) {
  path.validate();
  const std::size_t n = trace.size();
  const double shift_f = std::nearbyint(path.group_delay / trace.dt);
  if (!(shift_f < static_cast<double>(n)))
    throw ConfigError(fmt::format("group delay {:.6g} s exceeds trace duration {:.6g} s", path.group_delay,
                                  trace.duration()));
  const auto shift = static_cast<std::size_t>(shift_f);
  const double phase = carrier_phase(trace.carrier_angular_frequency, path.group_delay) + path.extra_carrier_phase;
  const cplx factor = path.amplitude_transmission * std::polar(1.0, -phase);

  FieldTrace out;
  out.dt = trace.dt;
  out.t0 = trace.t0;
  out.carrier_angular_frequency = trace.carrier_angular_frequency;
  out.samples.assign(n, cplx{0.0, 0.0});
  for (std::size_t j = shift; j < n; ++j)
    out.samples[j] = factor * trace.samples[j - shift];
  out.valid = {std::min(trace.valid.begin + shift, n), std::min(trace.valid.end + shift, n)};
  if (out.valid.end < out.valid.begin)
    out.valid.end = out.valid.begin;
  return out;
}

std::pair<FieldTrace, FieldTrace> beamsplit_5050(const FieldTrace &in_a, const FieldTrace &in_b) {
  if (in_a.size() != in_b.size() || in_a.dt != in_b.dt || in_a.t0 != in_b.t0 ||
      in_a.carrier_angular_frequency != in_b.carrier_angular_frequency)
    throw ConfigError("beamsplit_5050: input traces are on different grids");
  const double r = 1.0 / std::sqrt(2.0);
  FieldTrace out1 = vacuum_like(in_a);
  FieldTrace out2 = vacuum_like(in_a);
  for (std::size_t j = 0; j < in_a.size(); ++j) {
    const cplx a = in_a.samples[j];
    const cplx b = in_b.samples[j];
    // i*z written out as (-im, re)
    out1.samples[j] = {r * (a.real() - b.imag()), r * (a.imag() + b.real())};
    out2.samples[j] = {r * (b.real() - a.imag()), r * (b.imag() + a.real())};
  }
  out1.valid = out2.valid = in_a.valid.intersect(in_b.valid);
  return {std::move(out1), std::move(out2)};
}

IntensitySeries intensity(const FieldTrace &trace) {
  IntensitySeries out;
  out.dt = trace.dt;
  out.t0 = trace.t0;
  out.valid = trace.valid;
  out.values.resize(trace.size());
  std::transform(trace.samples.begin(), trace.samples.end(), out.values.begin(),
                 [](const cplx &e) { return std::norm(e); });
  return out;
}

void apply_phase_noise(FieldTrace &trace, const std::vector<double> &phase) {
  if (phase.size() != trace.size())
    throw ConfigError("apply_phase_noise: phase series length does not match trace");
  apply_phase_factors(trace, phase_factors(phase));
}

std::vector<cplx> phase_factors(const std::vector<double> &phase) {
  std::vector<cplx> out(phase.size());
  std::transform(phase.begin(), phase.end(), out.begin(), [](double p) { return std::polar(1.0, -p); });
  return out;
}

void apply_phase_factors(FieldTrace &trace, const std::vector<cplx> &factors) {
  if (factors.size() != trace.size())
    throw ConfigError("apply_phase_factors: factor series length does not match trace");
  for (std::size_t j = 0; j < trace.size(); ++j)
    trace.samples[j] *= factors[j];
}

} // namespace tandem::field
