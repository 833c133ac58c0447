#include "oracles.hpp"

#include <doctest.h>

#include <tandem/correlator.hpp>
#include <tandem/errors.hpp>
#include <tandem/network.hpp>

#include <cmath>

using namespace tandem;
using namespace tandem::network;

namespace {

constexpr double kTc = 572e-9;
constexpr double kDt = kTc / 16;

TandemNetwork imbalanced(double ratio, SpoolNoiseMode mode = SpoolNoiseMode::Off, double transmission = 1.0) {
  TandemNetwork net;
  net.umzi1.long_delay = net.umzi2.long_delay = ratio * kTc;
  net.umzi1.long_path_amplitude_transmission = net.umzi2.long_path_amplitude_transmission = transmission;
  net.spool_noise.mode = mode;
  return net;
}

double mean_over_valid(const field::FieldTrace &e) {
  double s = 0.0;
  for (std::size_t j = e.valid.begin; j < e.valid.end; ++j)
    s += std::norm(e.samples[j]);
  return s / static_cast<double>(e.valid.size());
}

/// <I1 I2>/(<I1><I2>) at each difference phase, pooled over realizations.
std::vector<double> moment_fringe(TandemNetwork net, int n_phase, int reals, std::uint64_t seed0) {
  field::ThermalSynthesizer synth(net.profile, kDt, 1u << 15);
  std::vector<double> g2;
  for (int k = 0; k < n_phase; ++k) {
    net.umzi2.piezo_offset = net.profile.center_wavelength * k / n_phase;
    corr::MomentAccumulator acc;
    for (int r = 0; r < reals; ++r) {
      const auto src = synth.generate(seed0 + r);
      const auto [e1, e2] = propagate(net, src, seed0 + 1000 + r);
      acc.add(e1, e2);
    }
    g2.push_back(acc.record().g2());
  }
  return g2;
}

} // namespace

TEST_SUITE("network") {

TEST_CASE("balanced UMZIs show full first-order interference") {
  auto net = imbalanced(0.0);
  const auto src = field::synthesize_thermal(net.profile, kDt, 1u << 14, 1);
  std::vector<double> singles;
  for (int k = 0; k < 12; ++k) {
    net.umzi1.piezo_offset = net.profile.center_wavelength * k / 12;
    singles.push_back(mean_over_valid(propagate(net, src, 2).first));
  }
  CHECK(oracle::contrast(singles) > 0.99);
}

TEST_CASE("imbalance of 5 c tau_c leaves the singles flat") {
  auto net = imbalanced(5.0);
  const auto src = field::synthesize_thermal(net.profile, kDt, 1u << 18, 3);
  std::vector<double> s1, s2;
  for (int k = 0; k < 12; ++k) {
    net.umzi1.piezo_offset = net.umzi2.piezo_offset = net.profile.center_wavelength * k / 12;
    const auto [e1, e2] = propagate(net, src, 4);
    s1.push_back(mean_over_valid(e1));
    s2.push_back(mean_over_valid(e2));
  }
  // (max - min) / mean < 2%
  CHECK(2 * oracle::contrast(s1) < 0.02);
  CHECK(2 * oracle::contrast(s2) < 0.02);
}

TEST_CASE("shared spool noise keeps the difference fringe, independent noise washes it out") {
  const auto shared = moment_fringe(imbalanced(5.0, SpoolNoiseMode::Shared), 8, 4, 10);
  const auto indep = moment_fringe(imbalanced(5.0, SpoolNoiseMode::Independent), 8, 4, 10);
  const auto off = moment_fringe(imbalanced(5.0, SpoolNoiseMode::Off), 8, 4, 10);
  CHECK(oracle::contrast(shared) == doctest::Approx(1.0 / 3.0).epsilon(0.09));
  CHECK(oracle::contrast(off) == doctest::Approx(1.0 / 3.0).epsilon(0.09));
  CHECK(oracle::contrast(indep) < 0.05);
  // peak at zero difference, 2 in the lossless case
  CHECK(shared[0] == doctest::Approx(2.0).epsilon(0.03));
  CHECK(shared[4] == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("shared noise: cross-correlation phase does not depend on the noise seed") {
  auto net = imbalanced(5.0, SpoolNoiseMode::Shared);
  net.umzi2.piezo_offset = 100e-9;
  const auto src = field::synthesize_thermal(net.profile, kDt, 1u << 16, 7);
  const auto a = corr::intensity_moments(propagate(net, src, 11).first, propagate(net, src, 11).second);
  const auto [b1, b2] = propagate(net, src, 12);
  const auto b = corr::intensity_moments(b1, b2);
  const double diff = std::remainder(std::arg(a.cross) - std::arg(b.cross), 2 * kPi);
  CHECK(std::abs(diff) < 0.05);
}

TEST_CASE("energy accounting with unit transmission and no noise") {
  auto net = imbalanced(5.0);
  net.profile.mean_intensity = 2.0;
  const auto src = field::synthesize_thermal(net.profile, kDt, 1u << 18, 21);
  const auto ports = propagate_ports(net, src, 0);
  const double d1 = mean_over_valid(ports.detector1);
  const double d2 = mean_over_valid(ports.detector2);
  const double x1 = mean_over_valid(ports.discard1);
  const double x2 = mean_over_valid(ports.discard2);
  field::FieldTrace in = src;
  in.valid = ports.detector1.valid;
  const double total_in = mean_over_valid(in);
  CHECK(d1 + d2 + x1 + x2 == doctest::Approx(total_in).epsilon(0.01));
  CHECK(d1 == doctest::Approx(total_in / 4).epsilon(0.03));
  CHECK(d2 == doctest::Approx(total_in / 4).epsilon(0.03));
}

TEST_CASE("swapping the two UMZIs swaps the detector intensities") {
  auto net = imbalanced(3.5, SpoolNoiseMode::Shared, 0.9);
  net.umzi1.piezo_offset = 123e-9;
  net.umzi2.short_delay = 0.1 * kTc;
  net.umzi2.long_delay = 4.0 * kTc;
  auto swapped = net;
  std::swap(swapped.umzi1, swapped.umzi2);
  const auto src = field::synthesize_thermal(net.profile, kDt, 1u << 12, 5);
  const auto [a1, a2] = propagate(net, src, 8);
  const auto [b1, b2] = propagate(swapped, src, 8);
  REQUIRE(a1.size() == b2.size());
  for (std::size_t j = 0; j < a1.size(); ++j) {
    CHECK(std::norm(a1.samples[j]) == doctest::Approx(std::norm(b2.samples[j])).epsilon(1e-12));
    CHECK(std::norm(a2.samples[j]) == doctest::Approx(std::norm(b1.samples[j])).epsilon(1e-12));
  }
}

TEST_CASE("propagation is deterministic and validates delays") {
  auto net = imbalanced(2.0, SpoolNoiseMode::Independent);
  const auto src = field::synthesize_thermal(net.profile, kDt, 1u << 10, 5);
  CHECK(propagate(net, src, 3).first.samples == propagate(net, src, 3).first.samples);
  CHECK(propagate(net, src, 3).first.samples != propagate(net, src, 4).first.samples);
  const auto [e1, e2] = propagate(net, src, 3);
  CHECK(e1.valid.begin == 32);
  CHECK(e2.valid.begin == 32);

  net.umzi1.long_delay = 2e-3;
  CHECK_THROWS_AS(propagate(net, src, 3), ConfigError);
  net = imbalanced(2.0);
  net.umzi1.long_delay = -1.0;
  CHECK_THROWS_AS(net.validate(), ConfigError);
  net = imbalanced(2.0, SpoolNoiseMode::Shared);
  net.spool_noise.correlation_time = 0.0;
  CHECK_THROWS_AS(net.validate(), ConfigError);
}

TEST_CASE("OU phase has the requested rms and correlation time") {
  const double rms = 1.3, tcorr = 50 * kDt;
  const auto p = ou_phase(1u << 20, kDt, rms, tcorr, 99);
  double s2 = 0.0, c = 0.0;
  for (std::size_t j = 0; j + 50 < p.size(); ++j) {
    s2 += p[j] * p[j];
    c += p[j] * p[j + 50];
  }
  const double n = static_cast<double>(p.size() - 50);
  CHECK(std::sqrt(s2 / n) == doctest::Approx(rms).epsilon(0.05));
  CHECK(c / s2 == doctest::Approx(std::exp(-1.0)).epsilon(0.1));
  CHECK(ou_phase(16, kDt, 0.0, tcorr, 1) == std::vector<double>(16, 0.0));
}

TEST_CASE("condition report") {
  TandemNetwork net;
  net.umzi1.long_delay = net.umzi2.long_delay = fiber_group_delay(200.0, 1.43);
  auto r = condition_report(net);
  CHECK(r.imbalance1_ratio == doctest::Approx(954.0 / 572.0).epsilon(1e-3));
  CHECK(r.imbalance2_ratio == doctest::Approx(954.0 / 572.0).epsilon(1e-3));
  CHECK_FALSE(r.imbalance1_ok);
  CHECK(r.long_mismatch_ratio == 0.0);
  CHECK(r.short_mismatch_ratio == 0.0);
  CHECK(r.long_match_ok);
  CHECK(r.short_match_ok);

  TandemNetwork zero;
  r = condition_report(zero);
  CHECK(r.imbalance1_ratio == 0.0);
  CHECK_FALSE(r.imbalance1_ok);
  CHECK(r.warnings.size() == 2);

  net.umzi1.long_delay = net.umzi2.long_delay = 5 * 572e-9;
  r = condition_report(net);
  CHECK(r.all_ok());
  CHECK(r.warnings.empty());

  net.umzi2.long_delay += 0.2 * 572e-9;
  r = condition_report(net);
  CHECK_FALSE(r.long_match_ok);
  CHECK(r.warnings.size() == 1);
  CHECK(condition_report(net, {3.0, 0.5}).long_match_ok);
}

} // TEST_SUITE
