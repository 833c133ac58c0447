#include <tandem/errors.hpp>
#include <tandem/photodetection.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace tandem::detect {

void DetectorModel::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0))
    throw ConfigError(fmt::format("detector efficiency must lie in (0,1] (got {})", efficiency));
  if (!(std::isfinite(jitter_sigma) && jitter_sigma >= 0.0))
    throw ConfigError(fmt::format("detector jitter_sigma must be >= 0 (got {})", jitter_sigma));
  if (!(std::isfinite(dead_time) && dead_time >= 0.0))
    throw ConfigError(fmt::format("detector dead_time must be >= 0 (got {})", dead_time));
  if (!(std::isfinite(dark_rate) && dark_rate >= 0.0))
    throw ConfigError(fmt::format("detector dark_rate must be >= 0 (got {})", dark_rate));
}

void prune_dead_time(std::vector<double> &sorted_tags, double dead_time) {
  if (sorted_tags.empty())
    return;
  std::size_t kept = 1;
  double last = sorted_tags[0];
  for (std::size_t i = 1; i < sorted_tags.size(); ++i) {
    const double t = sorted_tags[i];
    // strict increase is required even with no dead time
    if (t > last && t - last >= dead_time) {
      sorted_tags[kept++] = t;
      last = t;
    }
  }
  sorted_tags.resize(kept);
}

TimeTagSeries detect_timetags(const field::IntensitySeries &intensity, const DetectorModel &det, std::uint64_t seed,
                              int channel_id, const DetectionOptions &options) {
  det.validate();
  const ValidRange valid = intensity.valid;
  const double dt = intensity.dt;

  TimeTagSeries out;
  out.channel_id = channel_id;
  out.t0 = intensity.t0 + static_cast<double>(valid.begin) * dt;
  out.duration = static_cast<double>(valid.size()) * dt;
  if (valid.empty())
    return out;

  double sum = 0.0;
  for (std::size_t k = valid.begin; k < valid.end; ++k) {
    const double v = intensity.values[k];
    if (!(std::isfinite(v) && v >= 0.0))
      throw ConfigError(fmt::format("intensity sample {} is negative or non-finite ({})", k, v));
    sum += v;
  }
  const double mean_rate_dt = (det.efficiency * sum / static_cast<double>(valid.size()) + det.dark_rate) * dt;
  if (mean_rate_dt >= options.max_rate_dt)
    throw ConfigError(fmt::format("detection rate guard violated: mean rate*dt = {:.4g} >= {:.4g}; lower the source "
                                  "intensity or efficiency, or use a finer dt",
                                  mean_rate_dt, options.max_rate_dt));

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> next_event(1.0);
  double remaining = next_event(rng);
  for (std::size_t k = valid.begin; k < valid.end; ++k) {
    const double lambda = (det.efficiency * intensity.values[k] + det.dark_rate) * dt;
    if (lambda <= 0.0)
      continue;
    double used = 0.0;
    while (remaining <= lambda - used) {
      used += remaining;
      out.tags.push_back(intensity.t0 + (static_cast<double>(k) + used / lambda) * dt);
      remaining = next_event(rng);
    }
    remaining -= lambda - used;
  }

  if (det.jitter_sigma > 0.0) {
    std::normal_distribution<double> jitter(0.0, det.jitter_sigma);
    for (double &t : out.tags)
      t += jitter(rng);
    std::sort(out.tags.begin(), out.tags.end());
  }
  const double lo = out.t0;
  const double hi = out.end();
  std::erase_if(out.tags, [&](double t) { return t < lo || t >= hi; });
  prune_dead_time(out.tags, det.dead_time);
  return out;
}

void write_timetags(std::ostream &os, const TimeTagSeries &series) {
  os << "# tandemsim-timetags v1\n";
  os << fmt::format("# channel {}\n", series.channel_id);
  os << fmt::format("# t0_ns {:.3f}\n", series.t0 * 1e9);
  os << fmt::format("# duration_ns {:.3f}\n", series.duration * 1e9);
  for (double t : series.tags)
    os << fmt::format("{:.3f}\n", t * 1e9);
}

TimeTagSeries read_timetags(std::istream &is) {
  TimeTagSeries out;
  std::string line;
  bool have_duration = false;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "channel")
        hs >> out.channel_id;
      else if (key == "t0_ns") {
        double v = 0.0;
        hs >> v;
        out.t0 = v * 1e-9;
      } else if (key == "duration_ns") {
        double v = 0.0;
        hs >> v;
        out.duration = v * 1e-9;
        have_duration = true;
      }
      continue;
    }
    std::size_t pos = 0;
    double ns = 0.0;
    try {
      ns = std::stod(line, &pos);
    } catch (const std::exception &) {
      throw ConfigError(fmt::format("malformed timetag line '{}'", line));
    }
    const double t = ns * 1e-9;
    if (!out.tags.empty() && !(t > out.tags.back()))
      throw ConfigError("timetags are not strictly increasing");
    out.tags.push_back(t);
  }
  if (!have_duration)
    throw ConfigError("timetag file lacks a duration_ns header");
  return out;
}

} // namespace tandem::detect
