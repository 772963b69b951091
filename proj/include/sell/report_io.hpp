#pragma once

// File formats: per-epoch CSV, JSON summaries and config echo, and strict
// JSON config parsing (unknown keys are rejected by name).

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sell/experiments.hpp"
#include "sell/gradcheck.hpp"
#include "sell/perfmodel.hpp"

namespace sell {

/// "%.17g": enough digits to round-trip any double.
std::string format_double(double v);

nlohmann::json to_json(const SgdConfig& c);
nlohmann::json to_json(const InitScheme& s);
nlohmann::json to_json(const RecoveryConfig& c);
nlohmann::json to_json(const InitContrastConfig& c);
nlohmann::json to_json(const AfdfTrendConfig& c);
nlohmann::json to_json(const ToyConfig& c);

// Parsers start from the defaults and override the keys present. They throw
// ConfigError naming the offending key path.
SgdConfig parse_sgd_config(const nlohmann::json& j, SgdConfig defaults = {},
                           const std::string& path = "sgd");
InitScheme parse_init_scheme(const nlohmann::json& j, const std::string& path = "init");
RecoveryConfig parse_recovery_config(const nlohmann::json& j, const std::string& path = "");
InitContrastConfig parse_init_contrast_config(const nlohmann::json& j);
AfdfTrendConfig parse_afdf_trend_config(const nlohmann::json& j);
ToyConfig parse_toy_config(const nlohmann::json& j);
GradCheckSuiteOptions parse_gradcheck_options(const nlohmann::json& j);
BenchOptions parse_bench_options(const nlohmann::json& j);

nlohmann::json to_json(const GradCheckSuiteOptions& o);
nlohmann::json to_json(const BenchOptions& o);

/// `experiment,K,seed,epoch,loss[,accuracy]`, one row per completed epoch,
/// epochs numbered from 1, LF line endings.
void write_csv(const ExperimentReport& report, std::ostream& out);

/// Final-loss table, per-(experiment, K) medians, config echo and wall clock.
nlohmann::json summary_json(const ExperimentReport& report);

/// Fixed-width table for the terminal.
void print_summary(const ExperimentReport& report, std::ostream& out);

}  // namespace sell
