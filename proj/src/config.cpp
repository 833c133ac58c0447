#include <tandem/config.hpp>
#include <tandem/errors.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace tandem::experiment {

using network::SpoolNoiseMode;

// ---------------------------------------------------------------------------
// ScanPlan

void ScanPlan::validate() const {
  if (!(std::isfinite(rate) && rate >= 0.0))
    throw ConfigError(fmt::format("scan rate must be >= 0 (got {})", rate));
  if (!(std::isfinite(dwell) && dwell > 0.0))
    throw ConfigError(fmt::format("scan dwell must be > 0 (got {})", dwell));
  if (n_points < 1)
    throw ConfigError("scan n_points must be >= 1");
  if (!std::isfinite(start_delta1) || !std::isfinite(start_delta2))
    throw ConfigError("scan start offsets must be finite");
}

std::pair<double, double> ScanPlan::offsets_at(std::size_t index) const {
  const double travel = rate * wall_time(index);
  switch (mode) {
  case ScanMode::ScanD1:
    return {start_delta1 + travel, start_delta2};
  case ScanMode::ScanD2:
    return {start_delta1, start_delta2 + travel};
  case ScanMode::Opposite:
    return {start_delta1 + travel, start_delta2 - travel};
  case ScanMode::Same:
    return {start_delta1 + travel, start_delta2 + travel};
  case ScanMode::Static:
    break;
  }
  return {start_delta1, start_delta2};
}

double ScanPlan::difference_rate() const {
  switch (mode) {
  case ScanMode::ScanD1:
    return rate;
  case ScanMode::ScanD2:
    return -rate;
  case ScanMode::Opposite:
    return 2.0 * rate;
  case ScanMode::Same:
  case ScanMode::Static:
    break;
  }
  return 0.0;
}

void ExperimentConfig::validate() const {
  network.validate();
  detector1.validate();
  detector2.validate();
  coincidence.validate();
  plan.validate();
  franson.validate();
  if (!(std::isfinite(sim.dt) && sim.dt > 0.0))
    throw ConfigError(fmt::format("sim.dt must be > 0 (got {})", sim.dt));
  if (sim.samples_per_realization < 2)
    throw ConfigError("sim.samples_per_realization must be >= 2");
  if (!(sim.target_relative_error > 0.0))
    throw ConfigError("sim.target_relative_error must be > 0");
  if (!(sim.detection.max_rate_dt > 0.0 && sim.detection.max_rate_dt <= 1.0))
    throw ConfigError("sim.max_rate_dt must lie in (0, 1]");
  if (!(sweep.group_index >= 1.0))
    throw ConfigError(fmt::format("sweep.group_index must be >= 1 (got {})", sweep.group_index));
  if (!(sweep.amplitude_transmission_per_200m > 0.0 && sweep.amplitude_transmission_per_200m <= 1.0))
    throw ConfigError("sweep.amplitude_transmission_per_200m must lie in (0, 1]");
  for (double l : sweep.spool_lengths)
    if (!(std::isfinite(l) && l > 0.0))
      throw ConfigError(fmt::format("sweep spool length must be > 0 (got {})", l));
  if (analytic.points < 2)
    throw ConfigError("analytic.points must be >= 2");
}

std::string to_string(ScanMode mode) {
  switch (mode) {
  case ScanMode::ScanD1:
    return "scan_d1";
  case ScanMode::ScanD2:
    return "scan_d2";
  case ScanMode::Opposite:
    return "opposite";
  case ScanMode::Same:
    return "same";
  case ScanMode::Static:
    return "static";
  }
  return "static";
}

std::string to_string(SpoolNoiseMode mode) {
  switch (mode) {
  case SpoolNoiseMode::Shared:
    return "shared";
  case SpoolNoiseMode::Independent:
    return "independent";
  case SpoolNoiseMode::Off:
    return "off";
  }
  return "off";
}

// ---------------------------------------------------------------------------
// Text parsing

/// Shortest decimal string s with parse(s) / per == x, so values stored in
/// SI survive a round trip through unit-suffixed keys bit-exactly.
std::string format_scaled(double x, double per) {
  const double y = x * per;
  for (int digits = 1; digits <= 17; ++digits) {
    const double c = std::stod(fmt::format("{:.{}g}", y, digits));
    if (c / per == x)
      return fmt::format("{}", c);
  }
  for (int k = 1; k <= 8; ++k) {
    for (double dir : {1.0, -1.0}) {
      double c = y;
      for (int s = 0; s < k; ++s)
        c = std::nextafter(c, dir * INFINITY);
      if (c / per == x)
        return fmt::format("{}", c);
    }
  }
  return fmt::format("{}", y);
}

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_double(const std::string &key, const std::string &v) {
  double out = 0.0;
  const auto *end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError(fmt::format("config key '{}': '{}' is not a finite number", key, v));
  return out;
}

std::uint64_t parse_u64(const std::string &key, const std::string &v) {
  std::uint64_t out = 0;
  const auto *end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(fmt::format("config key '{}': '{}' is not a non-negative integer", key, v));
  return out;
}

bool parse_bool(const std::string &key, const std::string &v) {
  const std::string l = lower(v);
  if (l == "true" || l == "on" || l == "yes" || l == "1")
    return true;
  if (l == "false" || l == "off" || l == "no" || l == "0")
    return false;
  throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

std::vector<double> parse_list(const std::string &key, const std::string &v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty())
      out.push_back(parse_double(key, trim(item)));
  return out;
}

std::string format_list(const std::vector<double> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i)
      out += ",";
    out += fmt::format("{}", v[i]);
  }
  return out;
}

struct Binding {
  std::string key;
  std::function<std::string(const ExperimentConfig &)> get;
  std::function<void(ExperimentConfig &, const std::string &)> set;
};

// Dividing by the exact integer 1e9 (rather than multiplying by the inexact
// 1e-9) maps decimal inputs such as 15 ns to the nearest double of 15e-9.
Binding scaled(std::string key, double scale, std::function<double &(ExperimentConfig &)> ref) {
  const double per = std::nearbyint(1.0 / scale);
  return {key,
          [ref, per](const ExperimentConfig &c) {
            return format_scaled(ref(const_cast<ExperimentConfig &>(c)), per);
          },
          [ref, per, key](ExperimentConfig &c, const std::string &v) { ref(c) = parse_double(key, v) / per; }};
}

Binding plain(std::string key, std::function<double &(ExperimentConfig &)> ref) { return scaled(key, 1.0, ref); }

Binding count(std::string key, std::function<std::size_t &(ExperimentConfig &)> ref) {
  return {key, [ref](const ExperimentConfig &c) { return fmt::format("{}", ref(const_cast<ExperimentConfig &>(c))); },
          [ref, key](ExperimentConfig &c, const std::string &v) {
            ref(c) = static_cast<std::size_t>(parse_u64(key, v));
          }};
}

template <typename E>
Binding choice(std::string key, std::vector<std::pair<std::string, E>> names, std::function<E &(ExperimentConfig &)> ref) {
  return {key,
          [ref, names](const ExperimentConfig &c) {
            const E v = ref(const_cast<ExperimentConfig &>(c));
            for (const auto &[n, e] : names)
              if (e == v)
                return n;
            return std::string{};
          },
          [ref, names, key](ExperimentConfig &c, const std::string &v) {
            const std::string l = lower(v);
            for (const auto &[n, e] : names)
              if (n == l) {
                ref(c) = e;
                return;
              }
            std::string allowed;
            for (const auto &[n, e] : names)
              allowed += (allowed.empty() ? "" : "|") + n;
            throw ConfigError(fmt::format("config key '{}': '{}' is not one of {}", key, v, allowed));
          }};
}

void add_umzi(std::vector<Binding> &b, const std::string &prefix,
              std::function<network::UmziConfig &(ExperimentConfig &)> u) {
  b.push_back(scaled(prefix + ".short_delay_ns", 1e-9, [u](ExperimentConfig &c) -> double & { return u(c).short_delay; }));
  b.push_back(scaled(prefix + ".long_delay_ns", 1e-9, [u](ExperimentConfig &c) -> double & { return u(c).long_delay; }));
  b.push_back(scaled(prefix + ".piezo_offset_nm", 1e-9, [u](ExperimentConfig &c) -> double & { return u(c).piezo_offset; }));
  b.push_back(plain(prefix + ".long_path_amplitude_transmission",
                    [u](ExperimentConfig &c) -> double & { return u(c).long_path_amplitude_transmission; }));
}

void add_detector(std::vector<Binding> &b, const std::string &prefix,
                  std::function<detect::DetectorModel &(ExperimentConfig &)> d) {
  b.push_back(plain(prefix + ".efficiency", [d](ExperimentConfig &c) -> double & { return d(c).efficiency; }));
  b.push_back(scaled(prefix + ".jitter_sigma_ns", 1e-9, [d](ExperimentConfig &c) -> double & { return d(c).jitter_sigma; }));
  b.push_back(scaled(prefix + ".dead_time_ns", 1e-9, [d](ExperimentConfig &c) -> double & { return d(c).dead_time; }));
  b.push_back(plain(prefix + ".dark_rate_per_s", [d](ExperimentConfig &c) -> double & { return d(c).dark_rate; }));
}

const std::vector<Binding> &bindings() {
  static const std::vector<Binding> table = [] {
    using C = ExperimentConfig;
    std::vector<Binding> b;
    b.push_back(choice<SourceKind>("source.kind", {{"thermal", SourceKind::Thermal}, {"coherent", SourceKind::Coherent}},
                                   [](C &c) -> SourceKind & { return c.source_kind; }));
    b.push_back(choice<field::Lineshape>(
        "source.lineshape", {{"gaussian", field::Lineshape::Gaussian}, {"lorentzian", field::Lineshape::Lorentzian}},
        [](C &c) -> field::Lineshape & { return c.network.profile.lineshape; }));
    b.push_back(scaled("source.center_wavelength_nm", 1e-9,
                       [](C &c) -> double & { return c.network.profile.center_wavelength; }));
    b.push_back(scaled("source.coherence_time_ns", 1e-9, [](C &c) -> double & { return c.network.profile.coherence_time; }));
    b.push_back(plain("source.mean_intensity_per_s", [](C &c) -> double & { return c.network.profile.mean_intensity; }));

    add_umzi(b, "umzi1", [](C &c) -> network::UmziConfig & { return c.network.umzi1; });
    add_umzi(b, "umzi2", [](C &c) -> network::UmziConfig & { return c.network.umzi2; });

    b.push_back(choice<SpoolNoiseMode>(
        "spool.mode",
        {{"shared", SpoolNoiseMode::Shared}, {"independent", SpoolNoiseMode::Independent}, {"off", SpoolNoiseMode::Off}},
        [](C &c) -> SpoolNoiseMode & { return c.network.spool_noise.mode; }));
    b.push_back(plain("spool.rms_phase_rad", [](C &c) -> double & { return c.network.spool_noise.rms_phase; }));
    b.push_back(scaled("spool.correlation_time_ns", 1e-9,
                       [](C &c) -> double & { return c.network.spool_noise.correlation_time; }));

    b.push_back(plain("conditions.min_imbalance_ratio", [](C &c) -> double & { return c.thresholds.min_imbalance_ratio; }));
    b.push_back(plain("conditions.max_mismatch_ratio", [](C &c) -> double & { return c.thresholds.max_mismatch_ratio; }));

    add_detector(b, "detector1", [](C &c) -> detect::DetectorModel & { return c.detector1; });
    add_detector(b, "detector2", [](C &c) -> detect::DetectorModel & { return c.detector2; });

    b.push_back(scaled("coincidence.window_ns", 1e-9, [](C &c) -> double & { return c.coincidence.window; }));
    b.push_back(scaled("coincidence.histogram_bin_ns", 1e-9, [](C &c) -> double & { return c.coincidence.histogram_bin; }));
    b.push_back(scaled("coincidence.histogram_max_lag_ns", 1e-9,
                       [](C &c) -> double & { return c.coincidence.histogram_max_lag; }));

    b.push_back(choice<ScanMode>("scan.mode",
                                 {{"scan_d1", ScanMode::ScanD1},
                                  {"scan_d2", ScanMode::ScanD2},
                                  {"opposite", ScanMode::Opposite},
                                  {"same", ScanMode::Same},
                                  {"static", ScanMode::Static}},
                                 [](C &c) -> ScanMode & { return c.plan.mode; }));
    b.push_back(scaled("scan.rate_nm_per_s", 1e-9, [](C &c) -> double & { return c.plan.rate; }));
    b.push_back(plain("scan.dwell_s", [](C &c) -> double & { return c.plan.dwell; }));
    b.push_back(count("scan.n_points", [](C &c) -> std::size_t & { return c.plan.n_points; }));
    b.push_back(scaled("scan.start_delta1_nm", 1e-9, [](C &c) -> double & { return c.plan.start_delta1; }));
    b.push_back(scaled("scan.start_delta2_nm", 1e-9, [](C &c) -> double & { return c.plan.start_delta2; }));

    b.push_back({"sweep.spool_lengths_m", [](const C &c) { return format_list(c.sweep.spool_lengths); },
                 [](C &c, const std::string &v) { c.sweep.spool_lengths = parse_list("sweep.spool_lengths_m", v); }});
    b.push_back(plain("sweep.group_index", [](C &c) -> double & { return c.sweep.group_index; }));
    b.push_back({"sweep.loss", [](const C &c) { return std::string(c.sweep.loss ? "on" : "off"); },
                 [](C &c, const std::string &v) { c.sweep.loss = parse_bool("sweep.loss", v); }});
    b.push_back(plain("sweep.amplitude_transmission_per_200m",
                      [](C &c) -> double & { return c.sweep.amplitude_transmission_per_200m; }));

    b.push_back(scaled("sim.dt_ns", 1e-9, [](C &c) -> double & { return c.sim.dt; }));
    b.push_back(count("sim.samples_per_realization", [](C &c) -> std::size_t & { return c.sim.samples_per_realization; }));
    b.push_back(count("sim.realizations_per_point", [](C &c) -> std::size_t & { return c.sim.realizations_per_point; }));
    b.push_back(plain("sim.resolution_factor", [](C &c) -> double & { return c.sim.guards.resolution_factor; }));
    b.push_back(plain("sim.stationarity_factor", [](C &c) -> double & { return c.sim.guards.stationarity_factor; }));
    b.push_back(plain("sim.max_rate_dt", [](C &c) -> double & { return c.sim.detection.max_rate_dt; }));
    b.push_back(plain("sim.target_relative_error", [](C &c) -> double & { return c.sim.target_relative_error; }));

    b.push_back(plain("franson.delta1_m", [](C &c) -> double & { return c.franson.delta1; }));
    b.push_back(plain("franson.delta2_m", [](C &c) -> double & { return c.franson.delta2; }));
    b.push_back(plain("franson.photon_coherence_length_m", [](C &c) -> double & { return c.franson.photon_coherence_length; }));
    b.push_back(plain("franson.pump_coherence_length_m", [](C &c) -> double & { return c.franson.pump_coherence_length; }));
    b.push_back(scaled("franson.pump_wavelength_nm", 1e-9, [](C &c) -> double & { return c.franson.pump_wavelength; }));

    b.push_back(count("analytic.points", [](C &c) -> std::size_t & { return c.analytic.points; }));
    b.push_back(scaled("analytic.difference_span_nm", 1e-9, [](C &c) -> double & { return c.analytic.difference_span; }));
    b.push_back({"analytic.mean_imbalances_m", [](const C &c) { return format_list(c.analytic.mean_imbalances); },
                 [](C &c, const std::string &v) {
                   c.analytic.mean_imbalances = parse_list("analytic.mean_imbalances_m", v);
                 }});

    b.push_back({"run.master_seed", [](const C &c) { return fmt::format("{}", c.master_seed); },
                 [](C &c, const std::string &v) { c.master_seed = parse_u64("run.master_seed", v); }});
    b.push_back({"output.directory", [](const C &c) { return c.output_directory; },
                 [](C &c, const std::string &v) { c.output_directory = v; }});
    return b;
  }();
  return table;
}

} // namespace

KeyValues parse_key_values(const std::string &text) {
  KeyValues kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("config line {}: expected 'key = value'", lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(fmt::format("config line {}: empty key", lineno));
    if (kv.count(key))
      throw ConfigError(fmt::format("config line {}: duplicate key '{}'", lineno, key));
    kv[key] = value;
  }
  return kv;
}

KeyValues parse_config_text(const std::string &text) {
  const std::string t = trim(text);
  if (t.empty() || t.front() != '{')
    return parse_key_values(text);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(t);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(fmt::format("config JSON parse error: {}", e.what()));
  }
  if (j.contains("config") && j["config"].is_object())
    j = j["config"];
  if (!j.is_object())
    throw ConfigError("config JSON must be an object of dotted keys");
  KeyValues kv;
  for (const auto &[key, value] : j.items()) {
    if (value.is_string())
      kv[key] = value.get<std::string>();
    else if (value.is_number_unsigned())
      kv[key] = fmt::format("{}", value.get<std::uint64_t>());
    else if (value.is_number_integer())
      kv[key] = fmt::format("{}", value.get<std::int64_t>());
    else if (value.is_number_float())
      kv[key] = fmt::format("{}", value.get<double>());
    else if (value.is_boolean())
      kv[key] = value.get<bool>() ? "true" : "false";
    else
      throw ConfigError(fmt::format("config key '{}': unsupported JSON value", key));
  }
  return kv;
}

ExperimentConfig config_from_key_values(const KeyValues &kv) {
  ExperimentConfig cfg;
  const auto &table = bindings();
  for (const auto &[key, value] : kv) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const Binding &b) { return b.key == key; });
    if (it == table.end())
      throw ConfigError(fmt::format("unknown config key '{}'", key));
    it->set(cfg, value);
  }
  cfg.validate();
  return cfg;
}

KeyValues config_to_key_values(const ExperimentConfig &cfg) {
  KeyValues kv;
  for (const auto &b : bindings())
    kv[b.key] = b.get(cfg);
  return kv;
}

ExperimentConfig parse_config(const std::string &text) { return config_from_key_values(parse_config_text(text)); }

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const ExperimentConfig &cfg) {
  std::string out;
  for (const auto &[k, v] : config_to_key_values(cfg))
    out += k + " = " + v + "\n";
  return out;
}

} // namespace tandem::experiment
