#include <tandem/errors.hpp>
#include <tandem/output.hpp>

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>

namespace tandem::output {

using experiment::format_scaled;

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr double kNm = 1e9;
constexpr double kNs = 1e9;

// JSON has no inf/nan; null marks an undefined value.
ordered_json number(double v) {
  if (!std::isfinite(v))
    return nullptr;
  return v;
}

ordered_json scalar_from_text(const std::string &s) {
  std::uint64_t u = 0;
  const char *end = s.data() + s.size();
  if (auto [p, ec] = std::from_chars(s.data(), end, u); ec == std::errc() && p == end)
    return u;
  double d = 0.0;
  if (auto [p, ec] = std::from_chars(s.data(), end, d); ec == std::errc() && p == end && std::isfinite(d))
    return d;
  return s;
}

std::string join_path(const fs::path &p) { return p.string(); }

} // namespace

Format parse_format(const std::string &name) {
  if (name == "csv")
    return Format::Csv;
  if (name == "json")
    return Format::Json;
  if (name == "both")
    return Format::Both;
  throw ConfigError(fmt::format("unknown output format '{}' (expected csv, json or both)", name));
}

std::string fringe_csv(const corr::FringeSeries &points) {
  std::string out = kFringeHeader;
  out += '\n';
  for (const auto &p : points)
    out += fmt::format("{},{},{},{},{},{},{}\n", p.wall_time, format_scaled(p.delta1, kNm), format_scaled(p.delta2, kNm), p.n1, p.n2, p.nc,
                       p.normalized);
  return out;
}

std::string moments_csv(const experiment::ScanResult &scan) {
  std::string out = "wall_time_s,mean_I1,mean_I2,mean_I1I2,covariance,cross_abs2,g2_moment,n_samples\n";
  for (std::size_t i = 0; i < scan.moments.size(); ++i) {
    const auto &m = scan.moments[i];
    const double t = i < scan.points.size() ? scan.points[i].wall_time : 0.0;
    out += fmt::format("{},{},{},{},{},{},{},{}\n", t, m.mean_i1, m.mean_i2, m.mean_i1i2, m.covariance,
                       std::norm(m.cross), m.g2(), m.n_samples);
  }
  return out;
}

std::string histogram_csv(const corr::LagHistogram &histogram) {
  std::string out = "lag_ns,g2\n";
  for (std::size_t i = 0; i < histogram.lag.size(); ++i)
    out += fmt::format("{},{}\n", format_scaled(histogram.lag[i], kNs), histogram.g2[i]);
  return out;
}

std::string sweep_csv(const std::vector<experiment::SweepRow> &rows) {
  std::string out = "spool_length_m,long_delay_ns,amplitude_transmission,visibility,visibility_stderr,"
                    "baseline,baseline_stderr,period_s,singles_visibility\n";
  for (const auto &r : rows) {
    const auto &f = r.scan.fit_free;
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.spool_length, format_scaled(r.long_delay, kNs),
                       r.long_path_amplitude_transmission, f.visibility, f.visibility_stderr, f.baseline,
                       f.baseline_stderr, f.period, r.scan.singles_visibility());
  }
  return out;
}

std::string analytic_csv(const std::vector<experiment::AnalyticCurvePoint> &curve) {
  std::string out = "delta_difference_nm,thermal_g2,fluctuation_correlation\n";
  for (const auto &p : curve)
    out += fmt::format("{},{},{}\n", format_scaled(p.difference, kNm), p.thermal_g2, p.fluctuation);
  return out;
}

std::string franson_scan_csv(const std::vector<experiment::FransonScanPoint> &scan) {
  std::string out = "sum_offset_nm,franson_coincidence,thermal_g2\n";
  for (const auto &p : scan)
    out += fmt::format("{},{},{}\n", format_scaled(p.sum_offset, kNm), p.franson, p.thermal_g2);
  return out;
}

std::string franson_visibility_csv(const std::vector<experiment::FransonVisibilityRow> &rows) {
  std::string out = "mean_imbalance_m,franson_visibility,thermal_visibility\n";
  for (const auto &r : rows)
    out += fmt::format("{},{},{}\n", r.mean_imbalance, r.franson_visibility, r.thermal_visibility);
  return out;
}

ordered_json to_json(const corr::FringeFit &fit) {
  ordered_json j;
  j["mode"] = fit.mode == corr::FitMode::Free ? "free" : "fixed_visibility";
  j["visibility"] = number(fit.visibility);
  j["visibility_stderr"] = number(fit.visibility_stderr);
  j["period_s"] = number(fit.period);
  j["period_stderr_s"] = number(fit.period_stderr);
  j["phase_rad"] = number(fit.phase);
  j["phase_stderr_rad"] = number(fit.phase_stderr);
  j["baseline"] = number(fit.baseline);
  j["baseline_stderr"] = number(fit.baseline_stderr);
  j["residual_rms"] = number(fit.residual_rms);
  j["n_points"] = fit.n_points;
  j["notes"] = fit.notes;
  return j;
}

ordered_json to_json(const network::ConditionReport &report) {
  ordered_json j;
  j["imbalance1_ratio"] = number(report.imbalance1_ratio);
  j["imbalance2_ratio"] = number(report.imbalance2_ratio);
  j["long_mismatch_ratio"] = number(report.long_mismatch_ratio);
  j["short_mismatch_ratio"] = number(report.short_mismatch_ratio);
  j["imbalance1_ok"] = report.imbalance1_ok;
  j["imbalance2_ok"] = report.imbalance2_ok;
  j["long_match_ok"] = report.long_match_ok;
  j["short_match_ok"] = report.short_match_ok;
  j["all_ok"] = report.all_ok();
  j["warnings"] = report.warnings;
  return j;
}

ordered_json config_json(const experiment::ExperimentConfig &cfg) {
  ordered_json j = ordered_json::object();
  for (const auto &[k, v] : experiment::config_to_key_values(cfg))
    j[k] = scalar_from_text(v);
  return j;
}

ordered_json scan_summary(const experiment::ExperimentConfig &cfg, const experiment::ScanResult &scan) {
  ordered_json j;
  j["fit"] = to_json(scan.fit_free);
  j["fit_fixed_visibility"] = to_json(scan.fit_fixed);
  j["singles"] = {{"detector1", to_json(scan.singles1)},
                  {"detector2", to_json(scan.singles2)},
                  {"visibility", number(scan.singles_visibility())}};
  j["moments"] = {{"g2_fit", to_json(scan.moment_g2_fit)}, {"covariance_fit", to_json(scan.covariance_fit)}};
  j["period_hint_s"] = number(scan.period_hint);
  j["period_per_travel_nm"] = number(scan.period_per_travel(scan.fit_free) * kNm);
  j["realizations_per_point"] = scan.realizations_per_point;
  j["condition_report"] = to_json(scan.conditions);
  j["config"] = config_json(cfg);
  j["seed"] = cfg.master_seed;
  return j;
}

ordered_json source_summary(const experiment::ExperimentConfig &cfg,
                            const experiment::SourceCharacterization &result) {
  ordered_json j;
  j["g2_zero"] = number(result.summary.g2_zero);
  j["fwhm_ns"] = result.summary.fwhm_found ? number(result.summary.fwhm * kNs) : ordered_json(nullptr);
  j["fwhm_found"] = result.summary.fwhm_found;
  j["n1"] = result.histogram.n1;
  j["n2"] = result.histogram.n2;
  j["realizations"] = result.realizations;
  j["config"] = config_json(cfg);
  j["seed"] = cfg.master_seed;
  return j;
}

ordered_json sweep_summary(const experiment::ExperimentConfig &cfg, const std::vector<experiment::SweepRow> &rows) {
  ordered_json entries = ordered_json::array();
  for (const auto &r : rows) {
    ordered_json e;
    e["spool_length_m"] = number(r.spool_length);
    e["long_delay_ns"] = number(r.long_delay * kNs);
    e["amplitude_transmission"] = number(r.long_path_amplitude_transmission);
    e["fit"] = to_json(r.scan.fit_free);
    e["singles_visibility"] = number(r.scan.singles_visibility());
    e["condition_report"] = to_json(r.scan.conditions);
    entries.push_back(std::move(e));
  }
  ordered_json j;
  j["sweep"] = std::move(entries);
  j["config"] = config_json(cfg);
  j["seed"] = cfg.master_seed;
  return j;
}

ordered_json analytic_summary(const experiment::ExperimentConfig &cfg,
                              const std::vector<experiment::AnalyticCurvePoint> &curve) {
  double gmin = INFINITY, gmax = -INFINITY, fmin = INFINITY, fmax = -INFINITY;
  for (const auto &p : curve) {
    gmin = std::min(gmin, p.thermal_g2);
    gmax = std::max(gmax, p.thermal_g2);
    fmin = std::min(fmin, p.fluctuation);
    fmax = std::max(fmax, p.fluctuation);
  }
  ordered_json j;
  j["thermal_visibility"] = number((gmax - gmin) / (gmax + gmin));
  j["fluctuation_visibility"] = number((fmax - fmin) / (fmax + fmin));
  j["points"] = curve.size();
  j["config"] = config_json(cfg);
  j["seed"] = cfg.master_seed;
  return j;
}

ordered_json franson_summary(const experiment::ExperimentConfig &cfg,
                             const std::vector<experiment::FransonVisibilityRow> &rows) {
  ordered_json table = ordered_json::array();
  for (const auto &r : rows)
    table.push_back({{"mean_imbalance_m", number(r.mean_imbalance)},
                     {"franson_visibility", number(r.franson_visibility)},
                     {"thermal_visibility", number(r.thermal_visibility)}});
  ordered_json j;
  j["visibility_table"] = std::move(table);
  j["config"] = config_json(cfg);
  j["seed"] = cfg.master_seed;
  return j;
}

std::string dump(const ordered_json &doc) { return doc.dump(2) + "\n"; }

void write_file(const fs::path &path, const std::string &content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec)
      throw RuntimeError(fmt::format("cannot create directory '{}': {}", join_path(path.parent_path()), ec.message()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw RuntimeError(fmt::format("cannot open '{}' for writing", join_path(path)));
  out << content;
  out.flush();
  if (!out)
    throw RuntimeError(fmt::format("write to '{}' failed", join_path(path)));
}

namespace {

bool want_csv(Format f) { return f != Format::Json; }
bool want_json(Format f) { return f != Format::Csv; }

void put(std::vector<fs::path> &written, const fs::path &path, const std::string &content) {
  write_file(path, content);
  written.push_back(path);
}

} // namespace

std::vector<fs::path> emit_scan(const fs::path &dir, Format format, const experiment::ExperimentConfig &cfg,
                                const experiment::ScanResult &scan) {
  std::vector<fs::path> written;
  if (want_csv(format)) {
    put(written, dir / "fringe.csv", fringe_csv(scan.points));
    put(written, dir / "moments.csv", moments_csv(scan));
  }
  if (want_json(format))
    put(written, dir / "summary.json", dump(scan_summary(cfg, scan)));
  return written;
}

std::vector<fs::path> emit_source(const fs::path &dir, Format format, const experiment::ExperimentConfig &cfg,
                                  const experiment::SourceCharacterization &result) {
  std::vector<fs::path> written;
  if (want_csv(format))
    put(written, dir / "g2_histogram.csv", histogram_csv(result.histogram));
  if (want_json(format))
    put(written, dir / "summary.json", dump(source_summary(cfg, result)));
  return written;
}

std::vector<fs::path> emit_sweep(const fs::path &dir, Format format, const experiment::ExperimentConfig &cfg,
                                 const std::vector<experiment::SweepRow> &rows) {
  std::vector<fs::path> written;
  if (want_csv(format)) {
    put(written, dir / "sweep.csv", sweep_csv(rows));
    for (const auto &r : rows)
      put(written, dir / fmt::format("fringe_{}m.csv", r.spool_length), fringe_csv(r.scan.points));
  }
  if (want_json(format))
    put(written, dir / "summary.json", dump(sweep_summary(cfg, rows)));
  return written;
}

std::vector<fs::path> emit_analytic(const fs::path &dir, Format format, const experiment::ExperimentConfig &cfg) {
  const auto curve = experiment::analytic_curves(cfg);
  std::vector<fs::path> written;
  if (want_csv(format))
    put(written, dir / "analytic.csv", analytic_csv(curve));
  if (want_json(format))
    put(written, dir / "summary.json", dump(analytic_summary(cfg, curve)));
  return written;
}

std::vector<fs::path> emit_franson(const fs::path &dir, Format format, const experiment::ExperimentConfig &cfg) {
  const auto rows = experiment::franson_visibility_table(cfg);
  std::vector<fs::path> written;
  if (want_csv(format)) {
    put(written, dir / "franson_scan.csv", franson_scan_csv(experiment::franson_scan(cfg)));
    put(written, dir / "franson_visibility.csv", franson_visibility_csv(rows));
  }
  if (want_json(format))
    put(written, dir / "summary.json", dump(franson_summary(cfg, rows)));
  return written;
}

} // namespace tandem::output
