#pragma once
#include <tandem/field.hpp>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace tandem::detect {

struct DetectorModel {
  double efficiency{1.0};   ///< (0, 1]
  double jitter_sigma{0.0}; ///< s, Gaussian timing spread
  double dead_time{0.0};    ///< s, non-paralyzable
  double dark_rate{0.0};    ///< 1/s

  void validate() const;
};

/// Click timestamps of one channel, in seconds, strictly increasing and
/// contained in [t0, t0 + duration).
struct TimeTagSeries {
  std::vector<double> tags;
  double t0{0.0};
  double duration{0.0};
  int channel_id{0};

  std::size_t size() const { return tags.size(); }
  double end() const { return t0 + duration; }
};

struct DetectionOptions {
  /// Upper bound on mean click probability per sample, (eta <I> + dark) * dt.
  double max_rate_dt{0.1};
};

/// Semiclassical photodetection of a sampled intensity.
///
/// Clicks form an inhomogeneous Poisson process with piecewise-constant rate
/// eta * I[k] + dark_rate; event times are drawn exactly by time rescaling
/// (exponential increments of the integrated rate). Gaussian jitter is then
/// added, tags are re-sorted, and dead time is applied earliest-tag-wins.
TimeTagSeries detect_timetags(const field::IntensitySeries &intensity, const DetectorModel &det, std::uint64_t seed,
                              int channel_id = 0, const DetectionOptions &options = {});

/// Drop every tag closer than dead_time to the previously kept tag.
void prune_dead_time(std::vector<double> &sorted_tags, double dead_time);

/// Text dump: '#'-prefixed header (format tag, channel, t0_ns, duration_ns),
/// then one timestamp per line in ns with three decimals (1 ps resolution).
void write_timetags(std::ostream &os, const TimeTagSeries &series);
TimeTagSeries read_timetags(std::istream &is);

} // namespace tandem::detect
