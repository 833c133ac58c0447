#include "oracles.hpp"

#include <doctest.h>

#include <tandem/errors.hpp>
#include <tandem/field.hpp>
#include <tandem/network.hpp>

#include <cmath>
#include <string>

using namespace tandem;
using namespace tandem::field;

namespace {

SpectralProfile gaussian(double tc = 572e-9) {
  SpectralProfile p;
  p.coherence_time = tc;
  return p;
}

FieldTrace ramp_trace(std::size_t n, double dt) {
  FieldTrace t;
  t.dt = dt;
  t.carrier_angular_frequency = gaussian().carrier_angular_frequency();
  for (std::size_t j = 0; j < n; ++j)
    t.samples.emplace_back(std::cos(0.1 * j) + 0.5, std::sin(0.37 * j));
  t.valid = {0, n};
  return t;
}

} // namespace

TEST_SUITE("field") {

TEST_CASE("g1 and g2 closed forms") {
  const auto g = gaussian();
  CHECK(std::abs(g1_analytic(g, 0.0)) == doctest::Approx(1.0));
  CHECK(std::abs(g1_analytic(g, 286e-9)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(g1_analytic(g, 5 * 572e-9)) < 1e-7);
  CHECK(g2_analytic(g, 0.0) == doctest::Approx(2.0));
  CHECK(g2_analytic(g, 286e-9) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(g2_analytic(g, 1e-3) == doctest::Approx(1.0));

  auto l = g;
  l.lineshape = Lineshape::Lorentzian;
  CHECK(std::abs(g1_analytic(l, 286e-9)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(g2_analytic(l, -286e-9) == doctest::Approx(1.5).epsilon(1e-12));

  for (const auto &p : {g, l}) {
    double prev = 1.0;
    for (int k = 1; k < 200; ++k) {
      const double v = std::abs(g1_analytic(p, k * 20e-9));
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("profile validation rejects non-physical values") {
  auto p = gaussian();
  p.coherence_time = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = gaussian();
  p.center_wavelength = std::nan("");
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = gaussian();
  p.mean_intensity = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("thermal trace: g2(0) = 2 at dt = 10 ns, n = 2^20") {
  const auto e = synthesize_thermal(gaussian(), 10e-9, 1u << 20, 1);
  CHECK(oracle::intensity_autocorrelation(e, 0) == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("thermal trace: g2(286 ns) = 1.5") {
  // 286 ns is exactly 26 samples at dt = 11 ns
  const auto e = synthesize_thermal(gaussian(), 11e-9, 1u << 20, 2);
  CHECK(oracle::intensity_autocorrelation(e, 26) == doctest::Approx(1.5).epsilon(0.033));
}

TEST_CASE("thermal trace: mean intensity and circular Gaussianity") {
  auto p = gaussian();
  p.mean_intensity = 3.5;
  const auto e = synthesize_thermal(p, 572e-9 / 16, 1u << 20, 3);
  double mi = 0.0, re2 = 0.0, im2 = 0.0;
  cplx e2{0.0, 0.0};
  for (const auto &z : e.samples) {
    mi += std::norm(z);
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    e2 += z * z;
  }
  const double n = static_cast<double>(e.size());
  // 2^20 samples span ~2.9e4 coherence times; relative error of the mean ~ 1%
  CHECK(mi / n == doctest::Approx(3.5).epsilon(0.04));
  CHECK(re2 / im2 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(e2 / n) / (mi / n) < 0.04);
  CHECK(e.valid.begin == 0);
  CHECK(e.valid.end == e.size());
}

TEST_CASE("Siegert relation holds over [0, 3 tau_c]") {
  const double tc = 572e-9;
  const double dt = tc / 16;
  ThermalSynthesizer synth(gaussian(tc), dt, 1u << 18);
  std::vector<double> est(49, 0.0);
  const int reals = 6;
  for (int r = 0; r < reals; ++r) {
    const auto e = synth.generate(100 + r);
    for (std::size_t k = 0; k < est.size(); ++k)
      est[k] += oracle::intensity_autocorrelation(e, k) / reals;
  }
  for (std::size_t k = 0; k < est.size(); ++k)
    CHECK(est[k] == doctest::Approx(g2_analytic(gaussian(tc), k * dt)).epsilon(0.03));
}

TEST_CASE("Lorentzian synthesis follows its own g1") {
  auto p = gaussian();
  p.lineshape = Lineshape::Lorentzian;
  const double dt = p.coherence_time / 32;
  const auto e = synthesize_thermal(p, dt, 1u << 20, 5);
  CHECK(oracle::intensity_autocorrelation(e, 16) == doctest::Approx(1.5).epsilon(0.04));
  CHECK(oracle::intensity_autocorrelation(e, 64) == doctest::Approx(g2_analytic(p, 64 * dt)).epsilon(0.04));
}

TEST_CASE("synthesis is a pure function of the seed") {
  ThermalSynthesizer synth(gaussian(), 572e-9 / 16, 4096);
  const auto a = synth.generate(42);
  const auto b = synth.generate(42);
  const auto c = synth.generate(43);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  CHECK(synthesize_thermal(gaussian(), 572e-9 / 16, 4096, 42).samples == a.samples);
}

TEST_CASE("synthesis guards name the failing ratio") {
  try {
    synthesize_thermal(gaussian(), 100e-9, 1u << 12, 1);
    FAIL("expected resolution guard");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("coherence_time/dt") != std::string::npos);
  }
  try {
    synthesize_thermal(gaussian(), 10e-9, 64, 1);
    FAIL("expected stationarity guard");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("dt*n_samples/coherence_time") != std::string::npos);
  }
  SynthesisGuards relaxed{1.0, 1.0};
  CHECK_NOTHROW(synthesize_thermal(gaussian(), 100e-9, 64, 1, relaxed));
  CHECK_THROWS_AS(synthesize_thermal(gaussian(), -1.0, 64, 1), ConfigError);
}

TEST_CASE("apply_path: identity") {
  const auto t = ramp_trace(64, 1e-9);
  const auto out = apply_path(t, OpticalPath{0.0, 0.0, 1.0});
  CHECK(out.samples == t.samples);
  CHECK(out.valid.begin == 0);
  CHECK(out.valid.end == 64);
}

TEST_CASE("apply_path: whole-sample delay shifts and multiplies by the carrier phase") {
  const auto t = ramp_trace(64, 1e-9);
  const std::size_t k = 5;
  const double delay = k * t.dt;
  const auto out = apply_path(t, OpticalPath{delay, 0.0, 1.0});
  const long double omega = t.carrier_angular_frequency;
  const long double cycles = omega / (2 * std::acos(-1.0L)) * delay;
  const cplx f = std::exp(cplx(0.0, -2 * kPi * static_cast<double>(cycles - std::floor(cycles))));
  for (std::size_t j = k; j < 64; ++j) {
    CHECK(std::abs(out.samples[j] - f * t.samples[j - k]) <= 1e-8 * std::abs(t.samples[j - k]));
  }
  CHECK(out.valid.begin == k);
  CHECK(out.valid.end == 64);
}

TEST_CASE("apply_path: sub-sample residue is rounded for the envelope, kept in the phase") {
  const auto t = ramp_trace(32, 1e-9);
  const double delay = 3.4e-9;
  const auto out = apply_path(t, OpticalPath{delay, 0.25, 0.5});
  const double phase = carrier_phase(t.carrier_angular_frequency, delay) + 0.25;
  const cplx f = 0.5 * std::polar(1.0, -phase);
  CHECK(out.valid.begin == 3);
  CHECK(std::abs(out.samples[10] - f * t.samples[7]) < 1e-12);
}

TEST_CASE("apply_path: carrier phase for long delays keeps the fractional cycle") {
  const double w = gaussian().carrier_angular_frequency();
  const double delay = 954e-9;
  // cycles = c * delay / lambda computed in long double as a reference
  const long double cycles = static_cast<long double>(kSpeedOfLight) * delay / 780e-9L;
  const long double frac = cycles - std::floor(cycles);
  CHECK(carrier_phase(w, delay) == doctest::Approx(static_cast<double>(2 * frac * kPi)).epsilon(1e-6));
  CHECK(carrier_phase(w, delay) >= 0.0);
  CHECK(carrier_phase(w, delay) < 2 * kPi);
}

TEST_CASE("apply_path: errors and single-time statistics") {
  const auto t = ramp_trace(16, 1e-9);
  CHECK_THROWS_AS(apply_path(t, OpticalPath{20e-9, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(apply_path(t, OpticalPath{-1e-9, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(apply_path(t, OpticalPath{0.0, 0.0, 1.5}), ConfigError);

  const auto e = synthesize_thermal(gaussian(), 572e-9 / 16, 1u << 16, 9);
  const auto out = apply_path(e, OpticalPath{0.0, 1.0, 0.8});
  // pure phase/attenuation with zero delay: intensity scales by t^2 sample-wise
  for (std::size_t j = 0; j < e.size(); j += 97)
    CHECK(std::norm(out.samples[j]) == doctest::Approx(0.64 * std::norm(e.samples[j])).epsilon(1e-12));
}

TEST_CASE("fiber group delay of a 200 m spool") {
  CHECK(network::fiber_group_delay(200.0, 1.43) * 1e9 == doctest::Approx(954.0).epsilon(5e-4));
}

TEST_CASE("beamsplit_5050: single-port split") {
  const auto e = ramp_trace(32, 1e-9);
  const auto [o1, o2] = beamsplit_5050(e, vacuum_like(e));
  for (std::size_t j = 0; j < e.size(); ++j) {
    CHECK(std::abs(o1.samples[j] - e.samples[j] / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(o2.samples[j] - cplx(0, 1) * e.samples[j] / std::sqrt(2.0)) < 1e-15);
    CHECK(std::norm(o1.samples[j]) == doctest::Approx(std::norm(e.samples[j]) / 2));
  }
}

TEST_CASE("beamsplit_5050: unitarity and port routing") {
  const auto a = synthesize_thermal(gaussian(), 572e-9 / 16, 1u << 12, 1, {1, 1});
  const auto b = synthesize_thermal(gaussian(), 572e-9 / 16, 1u << 12, 2, {1, 1});
  const auto [o1, o2] = beamsplit_5050(a, b);
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double in = std::norm(a.samples[j]) + std::norm(b.samples[j]);
    const double out = std::norm(o1.samples[j]) + std::norm(o2.samples[j]);
    CHECK(std::abs(out - in) <= 1e-13 * in);
  }

  // (E, -iE) leaves everything in port 1
  FieldTrace minus_i = a;
  for (auto &z : minus_i.samples)
    z *= cplx(0, -1);
  const auto [p1, p2] = beamsplit_5050(a, minus_i);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(std::norm(p2.samples[j]) <= 1e-28 + 1e-15 * std::norm(a.samples[j]));
    CHECK(std::abs(p1.samples[j] - std::sqrt(2.0) * a.samples[j]) <= 1e-12 * (1 + std::abs(a.samples[j])));
  }
}

TEST_CASE("beamsplit_5050: mismatched grids and validity") {
  auto a = ramp_trace(16, 1e-9);
  auto b = ramp_trace(16, 2e-9);
  CHECK_THROWS_AS(beamsplit_5050(a, b), ConfigError);
  CHECK_THROWS_AS(beamsplit_5050(a, ramp_trace(8, 1e-9)), ConfigError);
  b = a;
  a.valid = {3, 16};
  b.valid = {5, 16};
  const auto [o1, o2] = beamsplit_5050(a, b);
  CHECK(o1.valid.begin == 5);
  CHECK(o2.valid.begin == 5);
}

TEST_CASE("intensity") {
  auto t = ramp_trace(8, 1e-9);
  const auto zero = intensity(vacuum_like(t));
  for (double v : zero.values)
    CHECK(v == 0.0);
  auto doubled = t;
  for (auto &z : doubled.samples)
    z *= 2.0;
  const auto i1 = intensity(t);
  const auto i2 = intensity(doubled);
  for (std::size_t j = 0; j < t.size(); ++j)
    CHECK(i2.values[j] == doctest::Approx(4 * i1.values[j]));
  CHECK(i1.dt == t.dt);
}

TEST_CASE("Gaussian moment theorem for delayed combinations") {
  const double dt = 572e-9 / 16;
  ThermalSynthesizer synth(gaussian(), dt, 1u << 20);
  double s1 = 0, s2 = 0, s12 = 0;
  cplx sx{0, 0};
  std::size_t n = 0;
  const cplx a{0.7, 0.1}, b{0.2, -0.5}, c{-0.3, 0.4}, d{0.6, 0.6};
  for (int r = 0; r < 10; ++r) {
    const auto e = synth.generate(700 + r);
    for (std::size_t j = 40; j < e.size(); ++j) {
      const cplx e1 = a * e.samples[j] + b * e.samples[j - 27];
      const cplx e2 = c * e.samples[j - 1] + d * e.samples[j - 40];
      const double i1 = std::norm(e1), i2 = std::norm(e2);
      s1 += i1;
      s2 += i2;
      s12 += i1 * i2;
      sx += std::conj(e1) * e2;
      ++n;
    }
  }
  REQUIRE(n >= 10000000);
  const double N = static_cast<double>(n);
  const double lhs = s12 / N;
  const double rhs = (s1 / N) * (s2 / N) + std::norm(sx / N);
  CHECK(std::abs(lhs - rhs) / lhs < 0.01);
}

} // TEST_SUITE
