#pragma once
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace tandem {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = 3.14159265358979323846;

/// Half-open index range [begin, end) of samples that carry physical data.
/// Delays only ever shift data later in time, so the invalid region of any
/// trace produced by this library is a prefix.
struct ValidRange {
  std::size_t begin{0};
  std::size_t end{0};

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return size() == 0; }
  ValidRange intersect(const ValidRange &other) const;
};

} // namespace tandem

namespace tandem::field {

enum class Lineshape { Gaussian, Lorentzian };

/// Source lineshape and coherence bookkeeping.
///
/// coherence_time is the FWHM of |g1(tau)|^2, which is also the FWHM of the
/// bunching peak g2(tau) - 1 for chaotic light.
struct SpectralProfile {
  Lineshape lineshape{Lineshape::Gaussian};
  double center_wavelength{780e-9}; ///< m
  double coherence_time{572e-9};    ///< s
  double mean_intensity{1.0};       ///< photon flux, 1/s

  /// Throws ConfigError on non-finite or non-positive fields.
  void validate() const;
  double carrier_angular_frequency() const { return 2.0 * kPi * kSpeedOfLight / center_wavelength; }
};

/// Uniformly sampled slowly-varying envelope. The optical carrier at
/// carrier_angular_frequency is never sampled; it only enters through
/// phase factors applied by apply_path.
struct FieldTrace {
  std::vector<cplx> samples;
  double dt{0.0};
  double t0{0.0};
  double carrier_angular_frequency{0.0};
  ValidRange valid;

  std::size_t size() const { return samples.size(); }
  double duration() const { return dt * static_cast<double>(samples.size()); }
};

/// Pointwise |E|^2 on the grid of the trace it came from.
struct IntensitySeries {
  std::vector<double> values;
  double dt{0.0};
  double t0{0.0};
  ValidRange valid;

  std::size_t size() const { return values.size(); }
};

struct OpticalPath {
  double group_delay{0.0};            ///< s
  double extra_carrier_phase{0.0};    ///< rad
  double amplitude_transmission{1.0}; ///< [0, 1]

  void validate() const;
};

struct SynthesisGuards {
  double resolution_factor{10.0};   ///< require dt <= coherence_time / resolution_factor
  double stationarity_factor{20.0}; ///< require dt * n >= stationarity_factor * coherence_time
};

/// Normalized envelope autocorrelation. Gaussian: exp(-2 ln2 tau^2 / tc^2);
/// Lorentzian: exp(-ln2 |tau| / tc). Both put |g1|^2 = 1/2 at |tau| = tc/2.
cplx g1_analytic(const SpectralProfile &profile, double tau);

/// Siegert relation, 1 + |g1(tau)|^2.
double g2_analytic(const SpectralProfile &profile, double tau);

/// Precomputes the spectral weights for one (profile, dt, n) grid and then
/// draws independent circular complex Gaussian traces from it. Each call to
/// generate is a pure function of the seed. Safe to share across threads.
class ThermalSynthesizer {
public:
  ThermalSynthesizer(const SpectralProfile &profile, double dt, std::size_t n_samples,
                     const SynthesisGuards &guards = {});
  ~ThermalSynthesizer();
  ThermalSynthesizer(ThermalSynthesizer &&) noexcept;
  ThermalSynthesizer &operator=(ThermalSynthesizer &&) noexcept;

  FieldTrace generate(std::uint64_t seed) const;

  const SpectralProfile &profile() const { return profile_; }
  double dt() const { return dt_; }
  std::size_t n_samples() const { return n_; }

private:
  struct Plan;

  SpectralProfile profile_;
  double dt_;
  std::size_t n_;
  std::vector<double> amplitude_; // sqrt of the discrete power spectrum, scaled
  std::unique_ptr<Plan> plan_;
};

/// One-shot thermal synthesis; see ThermalSynthesizer.
FieldTrace synthesize_thermal(const SpectralProfile &profile, double dt, std::size_t n_samples,
                              std::uint64_t seed, const SynthesisGuards &guards = {});

/// Constant-amplitude (Poissonian) light with the profile's mean intensity.
FieldTrace coherent_trace(const SpectralProfile &profile, double dt, std::size_t n_samples);

/// All-zero trace on the grid of `like` (an unused beam-splitter port).
FieldTrace vacuum_like(const FieldTrace &like);

/// Carrier phase omega0 * delay reduced to [0, 2pi) without losing the
/// fractional cycle for long delays.
double carrier_phase(double carrier_angular_frequency, double delay);

/// Delay, phase and attenuate a trace. The envelope moves by the nearest
/// whole number of samples; the carrier phase uses the exact delay. The
/// shifted-in prefix is marked invalid.
FieldTrace apply_path(const FieldTrace &trace, const OpticalPath &path);

/// 50:50 coupler, out1 = (a + i b)/sqrt2, out2 = (i a + b)/sqrt2.
std::pair<FieldTrace, FieldTrace> beamsplit_5050(const FieldTrace &in_a, const FieldTrace &in_b);

IntensitySeries intensity(const FieldTrace &trace);

/// Multiply every sample by e^{-i phase[k]}.
void apply_phase_noise(FieldTrace &trace, const std::vector<double> &phase);

/// e^{-i phase[k]} for each k, for reuse across several traces.
std::vector<cplx> phase_factors(const std::vector<double> &phase);
void apply_phase_factors(FieldTrace &trace, const std::vector<cplx> &factors);

} // namespace tandem::field
