#include <tandem/correlator.hpp>
#include <tandem/errors.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace tandem::corr {

void CoincidenceConfig::validate() const {
  if (!(std::isfinite(window) && window > 0.0))
    throw ConfigError(fmt::format("coincidence window must be > 0 (got {})", window));
  if (!(std::isfinite(histogram_bin) && histogram_bin > 0.0))
    throw ConfigError(fmt::format("histogram_bin must be > 0 (got {})", histogram_bin));
  if (!(std::isfinite(histogram_max_lag) && histogram_max_lag >= histogram_bin))
    throw ConfigError(fmt::format("histogram_max_lag ({}) must be >= histogram_bin ({})", histogram_max_lag,
                                  histogram_bin));
}

std::size_t count_singles(const TimeTagSeries &tags, TimeRange interval) {
  const auto lo = std::lower_bound(tags.tags.begin(), tags.tags.end(), interval.begin);
  const auto hi = std::lower_bound(lo, tags.tags.end(), interval.end);
  return static_cast<std::size_t>(hi - lo);
}

std::vector<std::pair<std::size_t, std::size_t>> pair_coincidences(std::span<const double> tags1,
                                                                   std::span<const double> tags2, double half_window) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < tags1.size() && j < tags2.size()) {
    const double a = tags1[i];
    const double b = tags2[j];
    if (std::abs(b - a) <= half_window) {
      pairs.emplace_back(i, j);
      ++i;
      ++j;
    } else if (a < b) {
      ++i;
    } else {
      ++j;
    }
  }
  return pairs;
}

std::size_t count_coincidences(const TimeTagSeries &tags1, const TimeTagSeries &tags2, const CoincidenceConfig &cfg,
                               TimeRange interval) {
  cfg.validate();
  std::size_t n = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  const double half = 0.5 * cfg.window;
  const auto &a = tags1.tags;
  const auto &b = tags2.tags;
  // Same walk as pair_coincidences without materializing the pairs.
  while (i < a.size() && j < b.size()) {
    if (std::abs(b[j] - a[i]) <= half) {
      if (interval.contains(a[i]))
        ++n;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return n;
}

double normalized_coincidence(std::uint64_t nc, std::uint64_t n1, std::uint64_t n2) {
  if (n1 == 0 || n2 == 0)
    return 0.0;
  return static_cast<double>(nc) / std::sqrt(static_cast<double>(n1) * static_cast<double>(n2));
}

void CountAccumulator::add(const TimeTagSeries &tags1, const TimeTagSeries &tags2, const CoincidenceConfig &cfg,
                           TimeRange interval) {
  n1 += count_singles(tags1, interval);
  n2 += count_singles(tags2, interval);
  nc += count_coincidences(tags1, tags2, cfg, interval);
  observation_time += interval.length();
}

CountAccumulator &CountAccumulator::merge(const CountAccumulator &other) {
  n1 += other.n1;
  n2 += other.n2;
  nc += other.nc;
  observation_time += other.observation_time;
  return *this;
}

// ---------------------------------------------------------------------------

namespace {

struct Overlap {
  double begin;
  double end;
  std::span<const double> a;
  std::span<const double> b;
};

Overlap restrict_to_overlap(const TimeTagSeries &s1, const TimeTagSeries &s2) {
  Overlap o{std::max(s1.t0, s2.t0), std::min(s1.end(), s2.end()), {}, {}};
  auto clip = [&](const std::vector<double> &v) {
    const auto lo = std::lower_bound(v.begin(), v.end(), o.begin);
    const auto hi = std::lower_bound(lo, v.end(), o.end);
    return std::span<const double>(v.data() + (lo - v.begin()), static_cast<std::size_t>(hi - lo));
  };
  if (o.end > o.begin) {
    o.a = clip(s1.tags);
    o.b = clip(s2.tags);
  }
  return o;
}

std::size_t half_bins(const CoincidenceConfig &cfg) {
  return static_cast<std::size_t>(std::floor(cfg.histogram_max_lag / cfg.histogram_bin + 1e-9));
}

} // namespace

LagHistogramAccumulator::LagHistogramAccumulator(const CoincidenceConfig &cfg) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t k = half_bins(cfg_);
  const std::size_t n = 2 * k + 1;
  lag_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    lag_[i] = (static_cast<double>(i) - static_cast<double>(k)) * cfg_.histogram_bin;
  counts_.assign(n, 0);
  expected_.assign(n, 0.0);
}

void LagHistogramAccumulator::add(const TimeTagSeries &tags1, const TimeTagSeries &tags2,
                                  const HistogramOptions &options) {
  const Overlap o = restrict_to_overlap(tags1, tags2);
  const double span = o.end - o.begin;
  if (!(span > 0.0) || span < options.min_span_ratio * cfg_.histogram_max_lag)
    throw ConfigError(fmt::format("histogram statistics guard violated: max lag {:.4g} s exceeds span {:.4g} s / {:.4g}",
                                  cfg_.histogram_max_lag, span, options.min_span_ratio));
  const std::size_t k = half_bins(cfg_);
  const double bin = cfg_.histogram_bin;
  const double reach = (static_cast<double>(k) + 0.5) * bin;

  std::size_t lo = 0;
  for (double t1 : o.a) {
    while (lo < o.b.size() && o.b[lo] < t1 - reach)
      ++lo;
    for (std::size_t j = lo; j < o.b.size(); ++j) {
      const double lag = o.b[j] - t1;
      if (lag >= reach)
        break;
      const double idx = std::nearbyint(lag / bin) + static_cast<double>(k);
      if (idx >= 0.0 && idx < static_cast<double>(counts_.size()))
        ++counts_[static_cast<std::size_t>(idx)];
    }
  }

  const double rate_product = static_cast<double>(o.a.size()) * static_cast<double>(o.b.size()) / (span * span);
  for (std::size_t i = 0; i < lag_.size(); ++i)
    expected_[i] += rate_product * bin * std::max(span - std::abs(lag_[i]), 0.0);
  overlap_ += span;
  n1_ += o.a.size();
  n2_ += o.b.size();
}

LagHistogram LagHistogramAccumulator::result() const {
  LagHistogram h;
  h.bin = cfg_.histogram_bin;
  h.lag = lag_;
  h.counts = counts_;
  h.g2.resize(lag_.size());
  for (std::size_t i = 0; i < lag_.size(); ++i)
    h.g2[i] = expected_[i] > 0.0 ? static_cast<double>(counts_[i]) / expected_[i] : 0.0;
  h.overlap = overlap_;
  h.n1 = n1_;
  h.n2 = n2_;
  return h;
}

LagHistogram g2_histogram(const TimeTagSeries &tags1, const TimeTagSeries &tags2, const CoincidenceConfig &cfg,
                          const HistogramOptions &options) {
  LagHistogramAccumulator acc(cfg);
  acc.add(tags1, tags2, options);
  return acc.result();
}

G2Summary summarize_g2(const LagHistogram &h) {
  G2Summary s;
  if (h.g2.empty())
    return s;
  const std::size_t centre = h.g2.size() / 2;
  s.g2_zero = h.g2[centre];
  const double half = 1.0 + 0.5 * (s.g2_zero - 1.0);

  auto crossing = [&](int step) -> std::pair<bool, double> {
    for (std::size_t i = centre;;) {
      const std::size_t next = step > 0 ? i + 1 : i - 1;
      if (step > 0 ? next >= h.g2.size() : i == 0)
        return {false, 0.0};
      if (h.g2[next] < half) {
        const double f = (h.g2[i] - half) / (h.g2[i] - h.g2[next]);
        return {true, h.lag[i] + f * (h.lag[next] - h.lag[i])};
      }
      i = next;
    }
  };
  const auto [right_ok, right] = crossing(+1);
  const auto [left_ok, left] = crossing(-1);
  s.fwhm_found = right_ok && left_ok && s.g2_zero > 1.0;
  if (s.fwhm_found)
    s.fwhm = right - left;
  return s;
}

// ---------------------------------------------------------------------------

namespace {

ValidRange common_region(std::size_t n1, std::size_t n2, const ValidRange &v1, const ValidRange &v2) {
  if (n1 != n2)
    throw RuntimeError("intensity_moments: series lengths differ");
  const ValidRange r = v1.intersect(v2);
  if (r.empty())
    throw RuntimeError("intensity_moments: no common valid region");
  return r;
}

} // namespace

void MomentAccumulator::add(const field::IntensitySeries &i1, const field::IntensitySeries &i2) {
  const ValidRange r = common_region(i1.size(), i2.size(), i1.valid, i2.valid);
  for (std::size_t k = r.begin; k < r.end; ++k) {
    const double a = i1.values[k];
    const double b = i2.values[k];
    s1_ += a;
    s2_ += b;
    s12_ += a * b;
  }
  n_ += r.size();
}

void MomentAccumulator::add(const field::FieldTrace &e1, const field::FieldTrace &e2) {
  const ValidRange r = common_region(e1.size(), e2.size(), e1.valid, e2.valid);
  for (std::size_t k = r.begin; k < r.end; ++k) {
    const cplx a = e1.samples[k];
    const cplx b = e2.samples[k];
    const double ia = std::norm(a);
    const double ib = std::norm(b);
    s1_ += ia;
    s2_ += ib;
    s12_ += ia * ib;
    sx_ += std::conj(a) * b;
  }
  n_ += r.size();
  has_cross_ = true;
}

MomentAccumulator &MomentAccumulator::merge(const MomentAccumulator &other) {
  if (other.n_ == 0)
    return *this;
  has_cross_ = (n_ == 0 || has_cross_) && other.has_cross_;
  n_ += other.n_;
  s1_ += other.s1_;
  s2_ += other.s2_;
  s12_ += other.s12_;
  sx_ += other.sx_;
  return *this;
}

MomentRecord MomentAccumulator::record() const {
  if (n_ == 0)
    throw RuntimeError("intensity_moments: no samples accumulated");
  const double n = static_cast<double>(n_);
  MomentRecord m;
  m.n_samples = n_;
  m.mean_i1 = s1_ / n;
  m.mean_i2 = s2_ / n;
  m.mean_i1i2 = s12_ / n;
  m.covariance = m.mean_i1i2 - m.mean_i1 * m.mean_i2;
  m.has_cross = has_cross_;
  if (has_cross_)
    m.cross = sx_ / n;
  return m;
}

MomentRecord intensity_moments(const field::IntensitySeries &i1, const field::IntensitySeries &i2) {
  MomentAccumulator acc;
  acc.add(i1, i2);
  return acc.record();
}

MomentRecord intensity_moments(const field::FieldTrace &e1, const field::FieldTrace &e2) {
  MomentAccumulator acc;
  acc.add(e1, e2);
  return acc.record();
}

FringePoint make_fringe_point(double wall_time, double delta1, double delta2, const CountAccumulator &counts) {
  return {wall_time, delta1, delta2, counts.n1, counts.n2, counts.nc, counts.normalized()};
}

} // namespace tandem::corr
