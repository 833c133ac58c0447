#include <doctest.h>

#include <tandem/config.hpp>
#include <tandem/errors.hpp>
#include <tandem/output.hpp>

#include <cmath>
#include <filesystem>

using namespace tandem;
using namespace tandem::experiment;

namespace {

const std::string kText = R"(# example
source.coherence_time_ns = 572
source.mean_intensity_per_s = 2e6
umzi1.long_delay_ns = 972.4
umzi2.long_delay_ns = 972.4
spool.mode = independent
coincidence.window_ns = 15
scan.mode = opposite
scan.rate_nm_per_s = 32
run.master_seed = 42
)";

} // namespace

TEST_SUITE("config") {

TEST_CASE("key/value parsing with units") {
  const auto cfg = parse_config(kText);
  CHECK(cfg.network.profile.coherence_time == doctest::Approx(572e-9));
  CHECK(cfg.network.umzi1.long_delay == doctest::Approx(972.4e-9));
  CHECK(cfg.coincidence.window == doctest::Approx(15e-9));
  CHECK(cfg.plan.mode == ScanMode::Opposite);
  CHECK(cfg.plan.rate == doctest::Approx(32e-9));
  CHECK(cfg.network.spool_noise.mode == network::SpoolNoiseMode::Independent);
  CHECK(cfg.master_seed == 42);
}

TEST_CASE("text round trip is exact") {
  const auto cfg = parse_config(kText);
  const auto text = to_config_text(cfg);
  const auto again = parse_config(text);
  CHECK(config_to_key_values(again) == config_to_key_values(cfg));
  CHECK(to_config_text(again) == text);
  CHECK(again.network.umzi1.long_delay == cfg.network.umzi1.long_delay);
  CHECK(again.coincidence.window == cfg.coincidence.window);
}

TEST_CASE("echoed values print in shortest form") {
  const auto kv = config_to_key_values(parse_config(kText));
  CHECK(kv.at("coincidence.window_ns") == "15");
  CHECK(kv.at("umzi1.long_delay_ns") == "972.4");
  CHECK(kv.at("source.coherence_time_ns") == "572");
}

TEST_CASE("JSON summary echo parses back to the same configuration") {
  const auto cfg = parse_config(kText);
  nlohmann::ordered_json doc;
  doc["config"] = output::config_json(cfg);
  const auto back = config_from_key_values(parse_config_text(doc.dump()));
  CHECK(config_to_key_values(back) == config_to_key_values(cfg));
  CHECK(config_to_key_values(parse_config(output::config_json(cfg).dump())) == config_to_key_values(cfg));
}

TEST_CASE("every shipped config loads and validates") {
  std::size_t n = 0;
  for (const auto &entry : std::filesystem::directory_iterator(TANDEM_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg")
      continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()).validate());
    ++n;
  }
  CHECK(n >= 6);
}

TEST_CASE("bad input raises ConfigError") {
  CHECK_THROWS_AS(parse_config("no.such.key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("coincidence.window_ns = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("coincidence.window_ns = nan\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("scan.mode = sideways\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("sim.samples_per_realization = -4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("missing equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("run.master_seed = 1\nrun.master_seed = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"config\": 3}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
  // parses but fails validation
  CHECK_THROWS_AS(parse_config("coincidence.window_ns = 0\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("umzi1.long_delay_ns = -5\n").validate(), ConfigError);
}

TEST_CASE("enum names") {
  CHECK(to_string(ScanMode::ScanD2) == "scan_d2");
  CHECK(to_string(ScanMode::Same) == "same");
  CHECK(to_string(network::SpoolNoiseMode::Shared) == "shared");
}

} // TEST_SUITE
