#include <tandem/errors.hpp>
#include <tandem/experiment.hpp>
#include <tandem/photodetection.hpp>
#include <tandem/seeding.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>

namespace tandem::experiment {

namespace {

field::FieldTrace make_source(const ExperimentConfig &cfg, const std::optional<field::ThermalSynthesizer> &synth,
                              std::uint64_t seed) {
  if (cfg.source_kind == SourceKind::Coherent)
    return field::coherent_trace(cfg.network.profile, cfg.sim.dt, cfg.sim.samples_per_realization);
  return synth->generate(seed);
}

std::optional<field::ThermalSynthesizer> make_synthesizer(const ExperimentConfig &cfg) {
  if (cfg.source_kind == SourceKind::Coherent)
    return std::nullopt;
  return field::ThermalSynthesizer(cfg.network.profile, cfg.sim.dt, cfg.sim.samples_per_realization, cfg.sim.guards);
}

double rate_of(const detect::DetectorModel &d, double mean_intensity) {
  return d.efficiency * mean_intensity + d.dark_rate;
}

struct RealizationResult {
  corr::CountAccumulator counts;
  corr::MomentAccumulator moments;
};

} // namespace

std::pair<double, double> expected_tandem_rates(const ExperimentConfig &cfg) {
  const double f = cfg.network.profile.mean_intensity;
  const double t1 = cfg.network.umzi1.long_path_amplitude_transmission;
  const double t2 = cfg.network.umzi2.long_path_amplitude_transmission;
  // each detector port carries F/8 * (1 + t^2) away from first-order fringes
  return {rate_of(cfg.detector1, f * (1.0 + t1 * t1) / 8.0), rate_of(cfg.detector2, f * (1.0 + t2 * t2) / 8.0)};
}

std::size_t default_realizations(const ExperimentConfig &cfg, bool tandem) {
  double r1 = 0.0;
  double r2 = 0.0;
  std::size_t masked = 0;
  if (tandem) {
    std::tie(r1, r2) = expected_tandem_rates(cfg);
    const double max_delay = std::max(cfg.network.umzi1.long_delay, cfg.network.umzi2.long_delay);
    masked = static_cast<std::size_t>(std::nearbyint(max_delay / cfg.sim.dt));
  } else {
    const double half = 0.5 * cfg.network.profile.mean_intensity;
    r1 = rate_of(cfg.detector1, half);
    r2 = rate_of(cfg.detector2, half);
  }
  const std::size_t n = cfg.sim.samples_per_realization;
  const double t_valid = static_cast<double>(n > masked ? n - masked : 0) * cfg.sim.dt;
  const double accidentals = r1 * r2 * cfg.coincidence.window * t_valid;
  if (!(accidentals > 0.0))
    throw ConfigError("expected coincidence count per realization is zero; cannot size the run");
  const double target = cfg.sim.target_relative_error;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1.0 / (target * target * accidentals))));
}

SourceCharacterization run_source_characterization(const ExperimentConfig &cfg) {
  cfg.validate();
  const std::size_t reals =
      cfg.sim.realizations_per_point > 0 ? cfg.sim.realizations_per_point : default_realizations(cfg, false);
  const auto synth = make_synthesizer(cfg);

  std::vector<detect::TimeTagSeries> tags1(reals);
  std::vector<detect::TimeTagSeries> tags2(reals);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reals); ++r) {
    try {
      const std::uint64_t rs = derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(r)});
      const field::FieldTrace src = make_source(cfg, synth, derive_seed(rs, SeedStream::Field));
      const auto [out1, out2] = field::beamsplit_5050(src, field::vacuum_like(src));
      tags1[r] = detect::detect_timetags(field::intensity(out1), cfg.detector1, derive_seed(rs, SeedStream::Detector1),
                                         1, cfg.sim.detection);
      tags2[r] = detect::detect_timetags(field::intensity(out2), cfg.detector2, derive_seed(rs, SeedStream::Detector2),
                                         2, cfg.sim.detection);
    } catch (...) {
#pragma omp critical
      if (!failure)
        failure = std::current_exception();
    }
  }
  if (failure)
    std::rethrow_exception(failure);

  corr::LagHistogramAccumulator acc(cfg.coincidence);
  for (std::size_t r = 0; r < reals; ++r)
    acc.add(tags1[r], tags2[r]);
  SourceCharacterization out;
  out.histogram = acc.result();
  out.summary = corr::summarize_g2(out.histogram);
  out.realizations = reals;
  return out;
}

double ScanResult::singles_visibility() const { return std::max(singles1.visibility, singles2.visibility); }

ScanResult run_scan(const ExperimentConfig &cfg) {
  cfg.validate();
  ScanResult out;
  out.conditions = network::condition_report(cfg.network, cfg.thresholds);
  out.piezo_rate = cfg.plan.rate;
  const std::size_t reals =
      cfg.sim.realizations_per_point > 0 ? cfg.sim.realizations_per_point : default_realizations(cfg, true);
  out.realizations_per_point = reals;
  const std::size_t n_points = cfg.plan.n_points;
  const double lambda = cfg.network.profile.center_wavelength;

  const double diff_rate = std::abs(cfg.plan.difference_rate());
  if (diff_rate > 0.0)
    out.period_hint = lambda / diff_rate;
  else if (cfg.plan.rate > 0.0)
    out.period_hint = lambda / cfg.plan.rate;
  else
    out.period_hint = static_cast<double>(n_points) * cfg.plan.dwell;

  const auto synth = make_synthesizer(cfg);
  const std::size_t n_tasks = n_points * reals;
  std::vector<RealizationResult> results(n_tasks);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t task = 0; task < static_cast<std::ptrdiff_t>(n_tasks); ++task) {
    try {
      const std::size_t point = static_cast<std::size_t>(task) / reals;
      const std::size_t real = static_cast<std::size_t>(task) % reals;
      network::TandemNetwork net = cfg.network;
      std::tie(net.umzi1.piezo_offset, net.umzi2.piezo_offset) = cfg.plan.offsets_at(point);
      const std::uint64_t rs = derive_seed(cfg.master_seed, {point, real});

      const field::FieldTrace src = make_source(cfg, synth, derive_seed(rs, SeedStream::Field));
      const auto [e1, e2] = network::propagate(net, src, derive_seed(rs, SeedStream::SpoolNoise));
      const auto tags1 = detect::detect_timetags(field::intensity(e1), cfg.detector1,
                                                 derive_seed(rs, SeedStream::Detector1), 1, cfg.sim.detection);
      const auto tags2 = detect::detect_timetags(field::intensity(e2), cfg.detector2,
                                                 derive_seed(rs, SeedStream::Detector2), 2, cfg.sim.detection);
      RealizationResult &res = results[static_cast<std::size_t>(task)];
      res.counts.add(tags1, tags2, cfg.coincidence, corr::full_span(tags1));
      res.moments.add(e1, e2);
    } catch (...) {
#pragma omp critical
      if (!failure)
        failure = std::current_exception();
    }
  }
  if (failure)
    std::rethrow_exception(failure);

  out.points.reserve(n_points);
  out.moments.reserve(n_points);
  for (std::size_t p = 0; p < n_points; ++p) {
    corr::CountAccumulator counts;
    corr::MomentAccumulator moments;
    for (std::size_t r = 0; r < reals; ++r) {
      counts.merge(results[p * reals + r].counts);
      moments.merge(results[p * reals + r].moments);
    }
    const auto [d1, d2] = cfg.plan.offsets_at(p);
    out.points.push_back(corr::make_fringe_point(cfg.plan.wall_time(p), d1, d2, counts));
    out.moments.push_back(moments.record());
  }

  out.fit_free = corr::fit_fringe(out.points, corr::FitMode::Free, out.period_hint);
  out.fit_fixed = corr::fit_fringe(out.points, corr::FitMode::FixedVisibility, out.period_hint);

  std::vector<double> x;
  std::vector<double> n1;
  std::vector<double> n2;
  std::vector<double> g2m;
  std::vector<double> cov;
  for (std::size_t p = 0; p < n_points; ++p) {
    x.push_back(out.points[p].wall_time);
    n1.push_back(static_cast<double>(out.points[p].n1));
    n2.push_back(static_cast<double>(out.points[p].n2));
    g2m.push_back(out.moments[p].g2());
    cov.push_back(out.moments[p].covariance);
  }
  // Singles are fitted at the period the coincidences actually show; when
  // there is no coincidence fringe the scan's nominal period is used.
  const bool fringe_seen = out.fit_free.visibility > 3.0 * out.fit_free.visibility_stderr;
  const double singles_period = fringe_seen ? out.fit_free.period : out.period_hint;
  out.singles1 = corr::fit_fringe_fixed_period(x, n1, singles_period);
  out.singles2 = corr::fit_fringe_fixed_period(x, n2, singles_period);
  out.moment_g2_fit = corr::fit_fringe(x, g2m, corr::FitMode::Free, out.period_hint);
  out.covariance_fit = corr::fit_fringe(x, cov, corr::FitMode::Free, out.period_hint);
  return out;
}

ExperimentConfig sweep_entry_config(const ExperimentConfig &cfg, double spool_length, std::size_t index) {
  ExperimentConfig c = cfg;
  const double delay = network::fiber_group_delay(spool_length, cfg.sweep.group_index);
  const double t = cfg.sweep.loss ? std::pow(cfg.sweep.amplitude_transmission_per_200m, spool_length / 200.0) : 1.0;
  for (network::UmziConfig *u : {&c.network.umzi1, &c.network.umzi2}) {
    u->long_delay = delay;
    u->long_path_amplitude_transmission = t;
  }
  c.master_seed = derive_seed(cfg.master_seed, {0x5357454550ULL, static_cast<std::uint64_t>(index)});
  return c;
}

std::vector<SweepRow> run_delay_sweep(const ExperimentConfig &cfg, std::span<const double> spool_lengths) {
  std::vector<SweepRow> rows;
  rows.reserve(spool_lengths.size());
  for (std::size_t i = 0; i < spool_lengths.size(); ++i) {
    const ExperimentConfig c = sweep_entry_config(cfg, spool_lengths[i], i);
    SweepRow row;
    row.spool_length = spool_lengths[i];
    row.long_delay = c.network.umzi1.long_delay;
    row.long_path_amplitude_transmission = c.network.umzi1.long_path_amplitude_transmission;
    row.scan = run_scan(c);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AnalyticCurvePoint> analytic_curves(const ExperimentConfig &cfg) {
  cfg.validate();
  const double lambda = cfg.network.profile.center_wavelength;
  const std::size_t n = cfg.analytic.points;
  std::vector<AnalyticCurvePoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = cfg.analytic.difference_span * static_cast<double>(i) / static_cast<double>(n - 1);
    const analytic::TandemPhaseConfig pc{d, 0.0, lambda};
    out[i] = {d, analytic::thermal_tandem_g2(pc), analytic::fluctuation_correlation_analytic(pc)};
  }
  return out;
}

std::vector<FransonScanPoint> franson_scan(const ExperimentConfig &cfg) {
  cfg.validate();
  const double lambda = cfg.network.profile.center_wavelength;
  const std::size_t n = cfg.analytic.points;
  std::vector<FransonScanPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = cfg.analytic.difference_span * static_cast<double>(i) / static_cast<double>(n - 1);
    analytic::FransonConfig fc = cfg.franson;
    fc.delta1 += 0.5 * s;
    fc.delta2 += 0.5 * s;
    out[i] = {s, analytic::franson_coincidence(fc), analytic::thermal_tandem_g2({fc.delta1, fc.delta2, lambda})};
  }
  return out;
}

std::vector<FransonVisibilityRow> franson_visibility_table(const ExperimentConfig &cfg) {
  cfg.validate();
  const double lambda = cfg.network.profile.center_wavelength;
  std::vector<FransonVisibilityRow> out;
  for (double m : cfg.analytic.mean_imbalances) {
    analytic::FransonConfig fc = cfg.franson;
    fc.delta1 = fc.delta2 = m;
    out.push_back({m, analytic::franson_visibility(fc), analytic::thermal_tandem_visibility(m, m, lambda)});
  }
  return out;
}

} // namespace tandem::experiment
