#pragma once
#include <tandem/field.hpp>
#include <tandem/photodetection.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tandem::corr {

using detect::TimeTagSeries;

/// Half-open time interval [begin, end), seconds.
struct TimeRange {
  double begin{0.0};
  double end{0.0};

  bool contains(double t) const { return t >= begin && t < end; }
  double length() const { return end - begin; }
};

inline TimeRange full_span(const TimeTagSeries &s) { return {s.t0, s.end()}; }

struct CoincidenceConfig {
  double window{15e-9};             ///< full width: |t2 - t1| <= window / 2
  double histogram_bin{11.44e-9};
  double histogram_max_lag{2.0e-6};

  void validate() const;
};

std::size_t count_singles(const TimeTagSeries &tags, TimeRange interval);

/// Greedy single-use pairing in one pass over both sorted streams: the two
/// earliest unpaired tags are paired when |t2 - t1| <= half_window, otherwise
/// the earlier one is discarded (it cannot pair with anything later). This
/// attains the maximum number of disjoint pairs. Returns index pairs (i1, i2).
std::vector<std::pair<std::size_t, std::size_t>> pair_coincidences(std::span<const double> tags1,
                                                                   std::span<const double> tags2, double half_window);

/// Pairs are formed on the full series; a pair is counted in the interval
/// that contains its channel-1 tag, so counts over disjoint intervals add up.
std::size_t count_coincidences(const TimeTagSeries &tags1, const TimeTagSeries &tags2, const CoincidenceConfig &cfg,
                               TimeRange interval);

/// Nc / sqrt(N1 N2), or 0 when either singles count is zero.
double normalized_coincidence(std::uint64_t nc, std::uint64_t n1, std::uint64_t n2);

/// Additive singles/coincidence counts over an observation time.
struct CountAccumulator {
  std::uint64_t n1{0};
  std::uint64_t n2{0};
  std::uint64_t nc{0};
  double observation_time{0.0};

  void add(const TimeTagSeries &tags1, const TimeTagSeries &tags2, const CoincidenceConfig &cfg, TimeRange interval);
  CountAccumulator &merge(const CountAccumulator &other);
  double normalized() const { return normalized_coincidence(nc, n1, n2); }
};

/// Cross-correlation histogram of t2 - t1 normalized by the accidental
/// baseline N1 N2 bin (T - |lag|) / T^2, so uncorrelated lags read 1.
struct LagHistogram {
  double bin{0.0};
  std::vector<double> lag;             ///< bin centers, s
  std::vector<std::uint64_t> counts;   ///< raw pair counts
  std::vector<double> g2;              ///< normalized
  double overlap{0.0};                 ///< common observation span, s
  std::uint64_t n1{0};
  std::uint64_t n2{0};
};

struct HistogramOptions {
  double min_span_ratio{10.0}; ///< require overlap >= ratio * max_lag
};

LagHistogram g2_histogram(const TimeTagSeries &tags1, const TimeTagSeries &tags2, const CoincidenceConfig &cfg,
                          const HistogramOptions &options = {});

/// Raw-count accumulator for histograms built from several independent
/// realizations sharing one binning.
class LagHistogramAccumulator {
public:
  explicit LagHistogramAccumulator(const CoincidenceConfig &cfg);
  void add(const TimeTagSeries &tags1, const TimeTagSeries &tags2, const HistogramOptions &options = {});
  /// Normalize the summed counts by the summed accidental expectation.
  LagHistogram result() const;

private:
  CoincidenceConfig cfg_;
  std::vector<double> lag_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> expected_;
  double overlap_{0.0};
  std::uint64_t n1_{0};
  std::uint64_t n2_{0};
};

/// Peak value at zero lag and half-maximum full width of g2 - 1.
struct G2Summary {
  double g2_zero{0.0};
  double fwhm{0.0};
  bool fwhm_found{false};
};

G2Summary summarize_g2(const LagHistogram &histogram);

struct MomentRecord {
  double mean_i1{0.0};
  double mean_i2{0.0};
  double mean_i1i2{0.0};
  double covariance{0.0}; ///< <I1 I2> - <I1><I2>
  cplx cross{0.0, 0.0};   ///< <E1* E2>, when fields were supplied
  bool has_cross{false};
  std::uint64_t n_samples{0};

  /// <I1 I2> / (<I1><I2>)
  double g2() const { return mean_i1i2 / (mean_i1 * mean_i2); }
};

/// Running sums for intensity moments; merge is exact addition of sums.
class MomentAccumulator {
public:
  void add(const field::IntensitySeries &i1, const field::IntensitySeries &i2);
  void add(const field::FieldTrace &e1, const field::FieldTrace &e2);
  MomentAccumulator &merge(const MomentAccumulator &other);
  MomentRecord record() const;
  std::uint64_t n_samples() const { return n_; }

private:
  std::uint64_t n_{0};
  double s1_{0.0};
  double s2_{0.0};
  double s12_{0.0};
  cplx sx_{0.0, 0.0};
  bool has_cross_{false};
};

MomentRecord intensity_moments(const field::IntensitySeries &i1, const field::IntensitySeries &i2);
MomentRecord intensity_moments(const field::FieldTrace &e1, const field::FieldTrace &e2);

// ---------------------------------------------------------------------------
// Fringes

struct FringePoint {
  double wall_time{0.0}; ///< s
  double delta1{0.0};    ///< m, scan coordinate of UMZI 1
  double delta2{0.0};    ///< m
  std::uint64_t n1{0};
  std::uint64_t n2{0};
  std::uint64_t nc{0};
  double normalized{0.0};
};

using FringeSeries = std::vector<FringePoint>;

FringePoint make_fringe_point(double wall_time, double delta1, double delta2, const CountAccumulator &counts);

enum class FitMode { FixedVisibility, Free };

/// baseline * (1 + visibility * cos(2 pi x / period + phase)), x in the
/// units of the scanned coordinate (wall time for scans).
struct FringeFit {
  FitMode mode{FitMode::Free};
  double visibility{0.0};
  double visibility_stderr{0.0};
  double period{0.0};
  double period_stderr{0.0};
  double phase{0.0};
  double phase_stderr{0.0};
  double baseline{0.0};
  double baseline_stderr{0.0};
  double residual_rms{0.0}; ///< rms residual relative to baseline
  std::size_t n_points{0};
  std::vector<std::string> notes;
};

inline constexpr double kThermalVisibility = 1.0 / 3.0;

/// Nonlinear least squares (Levenberg-Marquardt after a coarse period scan).
/// FixedVisibility pins visibility to fixed_visibility; Free keeps it in [0,1].
/// Degenerate input yields a fit with explanatory notes, never an exception.
FringeFit fit_fringe(std::span<const double> x, std::span<const double> y, FitMode mode, double period_hint,
                     double fixed_visibility = kThermalVisibility);

/// Fit of normalized coincidence against wall time.
FringeFit fit_fringe(const FringeSeries &points, FitMode mode, double period_hint,
                     double fixed_visibility = kThermalVisibility);

/// Linear least squares at a known period: baseline, visibility and phase only.
FringeFit fit_fringe_fixed_period(std::span<const double> x, std::span<const double> y, double period);

} // namespace tandem::corr
