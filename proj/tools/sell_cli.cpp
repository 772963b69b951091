// Command-line driver: recover, init-contrast, afdf-trend, toy, gradcheck,
// bench and report.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sell/errors.hpp"
#include "sell/experiments.hpp"
#include "sell/gradcheck.hpp"
#include "sell/perfmodel.hpp"
#include "sell/report_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::string config_path;
  std::string out_dir = "runs";
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw sell::ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw sell::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

/// --seed S turns a seed list of length m into S, S+1, ..., S+m-1.
void override_seeds(std::vector<std::uint64_t>& seeds, const std::optional<std::uint64_t>& seed) {
  if (!seed) return;
  const std::size_t m = std::max<std::size_t>(seeds.size(), 1);
  seeds.clear();
  for (std::size_t i = 0; i < m; ++i) seeds.push_back(*seed + i);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void emit_report(const sell::ExperimentReport& report, const Common& common) {
  const fs::path dir(common.out_dir);
  fs::create_directories(dir);
  std::ostringstream csv;
  sell::write_csv(report, csv);
  write_text(dir / (report.name + ".csv"), csv.str());
  write_text(dir / (report.name + "_summary.json"), sell::summary_json(report).dump(2) + "\n");
  write_text(dir / (report.name + "_config.json"), report.config_json + "\n");
  sell::print_summary(report, std::cout);
  std::cout << "artifacts: " << (dir / report.name).string() << "{.csv,_summary.json,_config.json}\n";
}

void verbose_note(const Common& common, const std::string& msg) {
  if (common.verbose) std::cerr << msg << '\n';
}

int run_gradcheck(const Common& common) {
  auto options = sell::parse_gradcheck_options(load_config(common.config_path));
  if (common.seed) options.seed = *common.seed;
  const auto cases = sell::run_gradcheck_suite(options);
  std::map<std::string, double> worst;
  for (const auto& c : cases) {
    worst[c.layer] = std::max(worst[c.layer], c.report.max_rel_error);
    if (common.verbose) {
      std::fprintf(stderr, "%-12s n=%-3zu batch=%zu config=%zu rel=%.3e (%s)\n", c.layer.c_str(),
                   c.n, c.batch, c.config, c.report.max_rel_error, c.report.worst_tensor.c_str());
    }
  }
  bool ok = true;
  std::printf("%-12s %14s %s\n", "layer", "max_rel_error", "status");
  for (const auto& [layer, err] : worst) {
    const bool pass = err < 1e-5;
    ok = ok && pass;
    std::printf("%-12s %14.3e %s\n", layer.c_str(), err, pass ? "ok" : "FAIL");
  }
  return ok ? 0 : kExitRuntime;
}

int run_bench(const Common& common) {
  const json cfg = load_config(common.config_path);
  auto options = sell::parse_bench_options(cfg);
  if (common.seed) options.seed = *common.seed;
  const auto rows = sell::bench(options);
  fs::create_directories(common.out_dir);
  std::ostringstream csv;
  sell::write_bench_csv(rows, csv);
  write_text(fs::path(common.out_dir) / "bench.csv", csv.str());
  write_text(fs::path(common.out_dir) / "bench_config.json", sell::to_json(options).dump(2) + "\n");
  std::printf("%-15s %-9s %6s %14s %10s %8s\n", "variant", "direction", "N", "median_ns",
              "GFLOP/s", "AI");
  for (const auto& r : rows) {
    std::printf("%-15s %-9s %6zu %14.0f %10.3f %8.3f\n", r.variant.c_str(), r.direction.c_str(),
                r.n, r.median_ns, r.gflops(), r.model.arithmetic_intensity);
  }
  std::cout << "artifacts: " << (fs::path(common.out_dir) / "bench.csv").string() << '\n';
  return 0;
}

int run_report(const std::string& run_summary) {
  if (!run_summary.empty()) {
    std::ifstream in(run_summary);
    if (!in) throw sell::ConfigError("cannot open summary file '" + run_summary + "'");
    const json s = json::parse(in);
    std::printf("%-16s %4s %14s %14s\n", "experiment", "K", "median_final", "median_best");
    for (const auto& m : s.at("medians")) {
      const auto num = [](const json& v) { return v.is_number() ? v.get<double>() : INFINITY; };
      std::printf("%-16s %4zu %14.6g %14.6g\n", m.at("experiment").get<std::string>().c_str(),
                  m.at("K").get<std::size_t>(), num(m.at("median_final_loss")),
                  num(m.at("median_best_loss")));
    }
    return 0;
  }
  std::printf("ACDC cost model (per example)\n%8s %12s %12s %12s %8s\n", "N", "flops",
              "bytes_min", "bytes_8N", "AI");
  for (std::int64_t n = 128; n <= 16384; n *= 2) {
    const auto c = sell::cost_model(n);
    std::printf("%8lld %12.0f %12.0f %12.0f %8.4g\n", static_cast<long long>(n), c.flops,
                c.bytes_uncached, c.bytes_cached, c.arithmetic_intensity);
  }
  std::printf("reference GPU: %.1f GB/s, %.0f GFLOP/s, ridge point %.1f flop/byte (context only)\n",
              sell::kReferenceGpuBandwidthGBs, sell::kReferenceGpuPeakGflops,
              sell::kReferenceGpuPeakGflops / sell::kReferenceGpuBandwidthGBs);
  const std::vector<sell::DenseShape> fc{{4096, 4096, true}};
  const auto cascade_params = sell::compression_report(12 * 3 * 4096, fc, "acdc_x12_n4096");
  std::printf("\nCompression\n%-20s %12s %10s\n", "layer", "params", "reduction");
  for (const auto& row : cascade_params) {
    std::printf("%-20s %12zu %10.2f\n", row.name.c_str(), row.params, row.reduction);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured efficient linear layers: experiments and benchmarks"};
  app.require_subcommand(1);
  Common common;
  std::string run_summary;

  auto add_common = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--config", common.config_path, "JSON config file");
    if (with_out) sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--seed", common.seed, "Seed override");
    sub->add_flag("-v,--verbose", common.verbose, "Verbose progress on stderr");
  };
  auto* recover = app.add_subcommand("recover", "Dense-operator recovery sweep over K");
  auto* contrast = app.add_subcommand("init-contrast", "Identity vs zero-mean initialization");
  auto* afdf = app.add_subcommand("afdf-trend", "Complex AFDF depth trend on a random target");
  auto* toy = app.add_subcommand("toy", "Nonlinear ACDC stack vs dense MLP classification");
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  auto* benchc = app.add_subcommand("bench", "Microbenchmark ACDC vs dense");
  auto* report = app.add_subcommand("report", "Cost model and compression tables, or a run summary");
  for (auto* sub : {recover, contrast, afdf, toy, benchc}) add_common(sub);
  add_common(grad, false);
  report->add_option("--summary", run_summary, "Summary JSON written by an experiment run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (recover->parsed()) {
      auto cfg = sell::parse_recovery_config(load_config(common.config_path));
      override_seeds(cfg.seeds, common.seed);
      verbose_note(common, "recover: " + std::to_string(cfg.seeds.size()) + " seeds");
      emit_report(sell::run_recovery(cfg), common);
    } else if (contrast->parsed()) {
      auto cfg = sell::parse_init_contrast_config(load_config(common.config_path));
      override_seeds(cfg.base.seeds, common.seed);
      emit_report(sell::run_init_contrast(cfg), common);
    } else if (afdf->parsed()) {
      auto cfg = sell::parse_afdf_trend_config(load_config(common.config_path));
      override_seeds(cfg.seeds, common.seed);
      emit_report(sell::run_afdf_trend(cfg), common);
    } else if (toy->parsed()) {
      auto cfg = sell::parse_toy_config(load_config(common.config_path));
      override_seeds(cfg.seeds, common.seed);
      emit_report(sell::run_nonlinear_toy(cfg), common);
    } else if (grad->parsed()) {
      return run_gradcheck(common);
    } else if (benchc->parsed()) {
      return run_bench(common);
    } else if (report->parsed()) {
      return run_report(run_summary);
    }
  } catch (const sell::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
