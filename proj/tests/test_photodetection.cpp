#include "oracles.hpp"

#include <doctest.h>

#include <tandem/correlator.hpp>
#include <tandem/errors.hpp>
#include <tandem/photodetection.hpp>

#include <cmath>
#include <sstream>

using namespace tandem;
using namespace tandem::detect;

namespace {

field::IntensitySeries constant_intensity(double value, std::size_t n, double dt) {
  field::IntensitySeries s;
  s.values.assign(n, value);
  s.dt = dt;
  s.valid = {0, n};
  return s;
}

bool strictly_increasing_within(const TimeTagSeries &s) {
  for (std::size_t k = 0; k < s.tags.size(); ++k) {
    if (s.tags[k] < s.t0 || s.tags[k] >= s.end())
      return false;
    if (k > 0 && !(s.tags[k] > s.tags[k - 1]))
      return false;
  }
  return true;
}

/// All (i, j) with |b_j - a_i| <= half, by a sliding window over sorted tags.
std::size_t windowed_pairs(const std::vector<double> &a, const std::vector<double> &b, double half) {
  std::size_t n = 0, lo = 0;
  for (double x : a) {
    while (lo < b.size() && b[lo] < x - half)
      ++lo;
    for (std::size_t j = lo; j < b.size() && b[j] <= x + half; ++j)
      ++n;
  }
  return n;
}

} // namespace

TEST_SUITE("photodetection") {

TEST_CASE("zero intensity and no dark counts gives no tags") {
  const auto tags = detect_timetags(constant_intensity(0.0, 1000, 1e-9), DetectorModel{}, 1);
  CHECK(tags.tags.empty());
  CHECK(tags.duration == doctest::Approx(1e-6));
}

TEST_CASE("Poisson count for constant intensity") {
  // eta * I * T = 0.5 * 2e6 * 1e-2 = 1e4
  DetectorModel det;
  det.efficiency = 0.5;
  const auto tags = detect_timetags(constant_intensity(2e6, 1000000, 1e-8), det, 7);
  CHECK(std::abs(static_cast<double>(tags.size()) - 1e4) < 5 * std::sqrt(1e4));
  CHECK(strictly_increasing_within(tags));
}

TEST_CASE("dark counts alone") {
  DetectorModel det;
  det.dark_rate = 1e6;
  const auto tags = detect_timetags(constant_intensity(0.0, 100000, 1e-8), det, 8);
  CHECK(std::abs(static_cast<double>(tags.size()) - 1e3) < 5 * std::sqrt(1e3));
}

TEST_CASE("dead time pruning keeps the earliest tag") {
  std::vector<double> t{0.0, 1e-9, 60e-9, 100e-9, 200e-9};
  prune_dead_time(t, 50e-9);
  CHECK(t == std::vector<double>{0.0, 60e-9, 200e-9});
  std::vector<double> dup{1e-9, 1e-9, 2e-9};
  prune_dead_time(dup, 0.0);
  CHECK(dup == std::vector<double>{1e-9, 2e-9});
}

TEST_CASE("generated tags respect dead time, span and ordering") {
  DetectorModel det;
  det.jitter_sigma = 2e-9;
  det.dead_time = 20e-9;
  const auto tags = detect_timetags(constant_intensity(5e6, 200000, 5e-9), det, 3, 2);
  CHECK(tags.channel_id == 2);
  CHECK(strictly_increasing_within(tags));
  for (std::size_t k = 1; k < tags.size(); ++k)
    CHECK(tags.tags[k] - tags.tags[k - 1] >= 20e-9 * (1 - 1e-12));
}

TEST_CASE("rate guard") {
  try {
    detect_timetags(constant_intensity(2e8, 100, 1e-9), DetectorModel{}, 1);
    FAIL("expected rate guard");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("rate guard") != std::string::npos);
  }
  DetectionOptions loose;
  loose.max_rate_dt = 0.5;
  CHECK_NOTHROW(detect_timetags(constant_intensity(2e8, 100, 1e-9), DetectorModel{}, 1, 0, loose));
  auto bad = constant_intensity(1.0, 10, 1e-9);
  bad.values[3] = -1.0;
  CHECK_THROWS_AS(detect_timetags(bad, DetectorModel{}, 1), ConfigError);
  DetectorModel zero_eff;
  zero_eff.efficiency = 0.0;
  CHECK_THROWS_AS(zero_eff.validate(), ConfigError);
}

TEST_CASE("only the valid region is observed") {
  auto s = constant_intensity(1e6, 1000, 1e-8);
  s.valid = {400, 1000};
  const auto tags = detect_timetags(s, DetectorModel{}, 4);
  CHECK(tags.t0 == doctest::Approx(4e-6));
  CHECK(tags.duration == doctest::Approx(6e-6));
  CHECK(strictly_increasing_within(tags));
}

TEST_CASE("empirical rate follows the intensity profile") {
  // step profile: rate r on the first half, 3r on the second
  const std::size_t n = 2000;
  field::IntensitySeries s = constant_intensity(1e6, n, 1e-8);
  for (std::size_t k = n / 2; k < n; ++k)
    s.values[k] = 3e6;
  double first = 0.0, second = 0.0;
  const int reals = 400;
  for (int r = 0; r < reals; ++r) {
    const auto tags = detect_timetags(s, DetectorModel{}, 1000 + r);
    for (double t : tags.tags)
      (t < 1e-5 ? first : second) += 1.0;
  }
  // expected 10 and 30 per realization
  CHECK(first / reals == doctest::Approx(10.0).epsilon(0.03));
  CHECK(second / reals == doctest::Approx(30.0).epsilon(0.03));
}

TEST_CASE("deterministic per seed") {
  DetectorModel det;
  det.jitter_sigma = 1e-9;
  const auto s = constant_intensity(1e6, 10000, 1e-8);
  CHECK(detect_timetags(s, det, 5).tags == detect_timetags(s, det, 5).tags);
  CHECK(detect_timetags(s, det, 5).tags != detect_timetags(s, det, 6).tags);
}

TEST_CASE("HBT bunching survives small jitter and degrades monotonically with larger jitter") {
  const double tc = 572e-9;
  const double dt = tc / 32;
  field::SpectralProfile p;
  p.mean_intensity = 8e6;
  field::ThermalSynthesizer synth(p, dt, 1u << 16);
  std::vector<double> jitters{0.0, tc / 20, tc / 2, tc, 2 * tc};
  std::vector<double> g2(jitters.size(), 0.0);
  const double half = 7.5e-9;
  for (std::size_t j = 0; j < jitters.size(); ++j) {
    DetectorModel det;
    det.jitter_sigma = jitters[j];
    double pairs = 0.0, acc = 0.0;
    for (int r = 0; r < 100; ++r) {
      const auto e = synth.generate(50 + r);
      const auto [o1, o2] = field::beamsplit_5050(e, field::vacuum_like(e));
      const auto a = detect_timetags(field::intensity(o1), det, 2 * r);
      const auto b = detect_timetags(field::intensity(o2), det, 2 * r + 1);
      pairs += static_cast<double>(windowed_pairs(a.tags, b.tags, half));
      acc += static_cast<double>(a.size()) * static_cast<double>(b.size()) * 2 * half / a.duration;
    }
    g2[j] = pairs / acc;
  }
  CHECK(g2[0] >= 1.95);
  CHECK(g2[1] >= 1.95);
  for (std::size_t j = 1; j < g2.size(); ++j)
    CHECK(g2[j] < g2[j - 1] + 0.02);
  CHECK(g2.back() < 1.6);
  CHECK(g2[3] < g2[1] - 0.1);
}

TEST_CASE("tag file round trip at 1 ps resolution") {
  TimeTagSeries s;
  s.channel_id = 2;
  s.t0 = 1e-6;
  s.duration = 5e-3;
  s.tags = {1.000001e-6, 2.5e-5, 4.123456789e-3};
  std::stringstream buf;
  write_timetags(buf, s);
  const std::string text = buf.str();
  CHECK(text.rfind("# tandemsim-timetags v1\n", 0) == 0);
  const auto back = read_timetags(buf);
  CHECK(back.channel_id == 2);
  CHECK(back.t0 == doctest::Approx(1e-6));
  CHECK(back.duration == doctest::Approx(5e-3));
  REQUIRE(back.tags.size() == 3);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::abs(back.tags[k] - s.tags[k]) <= 0.5e-12 + 1e-18);

  std::stringstream bad("# tandemsim-timetags v1\n# channel 1\nnot-a-number\n");
  CHECK_THROWS(read_timetags(bad));
}

} // TEST_SUITE
