#pragma once
#include <tandem/config.hpp>
#include <tandem/experiment.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace tandem::output {

enum class Format { Csv, Json, Both };

Format parse_format(const std::string &name);

inline constexpr const char *kFringeHeader = "wall_time_s,delta1_nm,delta2_nm,N1,N2,Nc,norm_coinc";

std::string fringe_csv(const corr::FringeSeries &points);
std::string moments_csv(const experiment::ScanResult &scan);
std::string histogram_csv(const corr::LagHistogram &histogram);
std::string sweep_csv(const std::vector<experiment::SweepRow> &rows);
std::string analytic_csv(const std::vector<experiment::AnalyticCurvePoint> &curve);
std::string franson_scan_csv(const std::vector<experiment::FransonScanPoint> &scan);
std::string franson_visibility_csv(const std::vector<experiment::FransonVisibilityRow> &rows);

nlohmann::ordered_json to_json(const corr::FringeFit &fit);
nlohmann::ordered_json to_json(const network::ConditionReport &report);
/// Dotted-key echo; numeric values are emitted as JSON numbers.
nlohmann::ordered_json config_json(const experiment::ExperimentConfig &cfg);

nlohmann::ordered_json scan_summary(const experiment::ExperimentConfig &cfg, const experiment::ScanResult &scan);
nlohmann::ordered_json source_summary(const experiment::ExperimentConfig &cfg,
                                      const experiment::SourceCharacterization &result);
nlohmann::ordered_json sweep_summary(const experiment::ExperimentConfig &cfg,
                                     const std::vector<experiment::SweepRow> &rows);
nlohmann::ordered_json analytic_summary(const experiment::ExperimentConfig &cfg,
                                        const std::vector<experiment::AnalyticCurvePoint> &curve);
nlohmann::ordered_json franson_summary(const experiment::ExperimentConfig &cfg,
                                       const std::vector<experiment::FransonVisibilityRow> &rows);

std::string dump(const nlohmann::ordered_json &doc);

/// Creates parent directories; I/O failures raise RuntimeError.
void write_file(const std::filesystem::path &path, const std::string &content);

/// Writes the CSV and/or JSON files of one run into `dir`; returns the paths written.
std::vector<std::filesystem::path> emit_scan(const std::filesystem::path &dir, Format format,
                                             const experiment::ExperimentConfig &cfg,
                                             const experiment::ScanResult &scan);
std::vector<std::filesystem::path> emit_source(const std::filesystem::path &dir, Format format,
                                               const experiment::ExperimentConfig &cfg,
                                               const experiment::SourceCharacterization &result);
std::vector<std::filesystem::path> emit_sweep(const std::filesystem::path &dir, Format format,
                                              const experiment::ExperimentConfig &cfg,
                                              const std::vector<experiment::SweepRow> &rows);
std::vector<std::filesystem::path> emit_analytic(const std::filesystem::path &dir, Format format,
                                                 const experiment::ExperimentConfig &cfg);
std::vector<std::filesystem::path> emit_franson(const std::filesystem::path &dir, Format format,
                                                const experiment::ExperimentConfig &cfg);

} // namespace tandem::output
