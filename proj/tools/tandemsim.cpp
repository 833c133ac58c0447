#include <tandem/errors.hpp>
#include <tandem/experiment.hpp>
#include <tandem/output.hpp>
#include <tandem/runtime.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>

using namespace tandem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string format{"both"};
  std::vector<std::string> overrides;
  bool check{false};
};

void add_common(CLI::App *cmd, CommonArgs &args) {
  cmd->add_option("--config", args.config_path, "configuration file (key = value, or JSON)");
  cmd->add_option("--seed", args.seed, "master seed (overrides run.master_seed)");
  cmd->add_option("--out", args.out, "output directory (overrides output.directory)");
  cmd->add_option("--format", args.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--set", args.overrides, "extra key=value, applied after the file")->take_all();
  cmd->add_flag("--check", args.check, "validate the config, print the condition report and exit");
}

experiment::ExperimentConfig resolve(const CommonArgs &args) {
  experiment::KeyValues kv;
  if (!args.config_path.empty()) {
    kv = experiment::config_to_key_values(experiment::load_config(args.config_path));
  } else {
    kv = experiment::config_to_key_values(experiment::ExperimentConfig{});
  }
  for (const auto &o : args.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("--set expects key=value, got '{}'", o));
    kv[o.substr(0, eq)] = o.substr(eq + 1);
  }
  auto cfg = experiment::config_from_key_values(kv);
  if (args.seed)
    cfg.master_seed = *args.seed;
  if (args.out)
    cfg.output_directory = *args.out;
  cfg.validate();
  return cfg;
}

void print_conditions(const experiment::ExperimentConfig &cfg) {
  const auto r = network::condition_report(cfg.network, cfg.thresholds);
  const auto mark = [](bool ok) { return ok ? "ok" : "VIOLATED"; };
  fmt::print("config valid\n");
  fmt::print("imbalance UMZI1 / c tau_c : {:.4g}  {}\n", r.imbalance1_ratio, mark(r.imbalance1_ok));
  fmt::print("imbalance UMZI2 / c tau_c : {:.4g}  {}\n", r.imbalance2_ratio, mark(r.imbalance2_ok));
  fmt::print("long-arm mismatch / c tau_c : {:.4g}  {}\n", r.long_mismatch_ratio, mark(r.long_match_ok));
  fmt::print("short-arm mismatch / c tau_c: {:.4g}  {}\n", r.short_mismatch_ratio, mark(r.short_match_ok));
  for (const auto &w : r.warnings)
    fmt::print("warning: {}\n", w);
}

void report_written(const std::vector<std::filesystem::path> &files) {
  for (const auto &f : files)
    fmt::print("wrote {}\n", f.string());
}

} // namespace

int main(int argc, char **argv) {
  tune_allocator();
  CLI::App app{"Tandem interferometer simulator for thermal light"};
  app.require_subcommand(1);

  CommonArgs source_args, fringe_args, sweep_args, franson_args, analytic_args;
  auto *source = app.add_subcommand("source-g2", "plain HBT measurement of the source g2(tau)");
  auto *fringe = app.add_subcommand("fringe", "scan one tandem configuration");
  auto *sweep = app.add_subcommand("sweep", "repeat the scan over fiber spool lengths");
  auto *franson = app.add_subcommand("franson", "analytic Franson vs thermal comparison");
  auto *analytic = app.add_subcommand("analytic", "analytic thermal tandem curves");
  add_common(source, source_args);
  add_common(fringe, fringe_args);
  add_common(sweep, sweep_args);
  add_common(franson, franson_args);
  add_common(analytic, analytic_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App *cmd = app.get_subcommands().front();
    const CommonArgs &args = cmd == source     ? source_args
                             : cmd == fringe   ? fringe_args
                             : cmd == sweep    ? sweep_args
                             : cmd == franson  ? franson_args
                                               : analytic_args;
    const auto cfg = resolve(args);
    if (args.check) {
      print_conditions(cfg);
      return 0;
    }
    const auto format = output::parse_format(args.format);
    const std::filesystem::path dir = cfg.output_directory;

    if (cmd == source) {
      const auto result = experiment::run_source_characterization(cfg);
      report_written(output::emit_source(dir, format, cfg, result));
      fmt::print("g2(0) = {:.4f}, FWHM = {:.1f} ns\n", result.summary.g2_zero, result.summary.fwhm * 1e9);
    } else if (cmd == fringe) {
      const auto scan = experiment::run_scan(cfg);
      for (const auto &w : scan.conditions.warnings)
        fmt::print(stderr, "warning: {}\n", w);
      report_written(output::emit_scan(dir, format, cfg, scan));
      fmt::print("visibility = {:.4f} +- {:.4f}, period = {:.4g} s, singles visibility = {:.4f}\n",
                 scan.fit_free.visibility, scan.fit_free.visibility_stderr, scan.fit_free.period,
                 scan.singles_visibility());
    } else if (cmd == sweep) {
      const auto rows = experiment::run_delay_sweep(cfg, cfg.sweep.spool_lengths);
      report_written(output::emit_sweep(dir, format, cfg, rows));
      for (const auto &r : rows)
        fmt::print("{:6.0f} m: visibility = {:.4f} +- {:.4f}, baseline = {:.4f}\n", r.spool_length,
                   r.scan.fit_free.visibility, r.scan.fit_free.visibility_stderr, r.scan.fit_free.baseline);
    } else if (cmd == franson) {
      report_written(output::emit_franson(dir, format, cfg));
    } else {
      report_written(output::emit_analytic(dir, format, cfg));
    }
    return 0;
  } catch (const ConfigError &e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
}
