#pragma once

// Analytic cost model for one ACDC layer and a wall-clock microbenchmark.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sell {

// Reference GPU figures quoted for context in reports; never asserted against.
inline constexpr double kReferenceGpuBandwidthGBs = 336.5;
inline constexpr double kReferenceGpuPeakGflops = 6605.0;

struct LayerCostModel {
  std::int64_t n = 0;
  std::int64_t batch = 1;
  /// Per example: 4N elementwise + 5 N log2 N for the two transforms.
  double flops = 0.0;
  /// Per example, every intermediate spilled (24N bytes) or kept on chip (8N).
  double bytes_uncached = 0.0;
  double bytes_cached = 0.0;
  /// flops / bytes_cached
  double arithmetic_intensity = 0.0;
  /// False when N is not a power of two (log2 N is then fractional).
  bool log2_integral = true;
};

/// One ACDC layer. Throws std::invalid_argument when n <= 0 or batch <= 0.
/// Exact integer arithmetic is used whenever n is a power of two.
LayerCostModel cost_model(std::int64_t n, std::int64_t batch = 1);

/// Dense N x N product for a batch: 2N^2 flops per example and
/// 4(N^2 + 2 N batch) bytes for weight, input and output in float32.
LayerCostModel dense_cost_model(std::int64_t n, std::int64_t batch);

struct BenchOptions {
  std::vector<std::size_t> sizes{128, 256, 512, 1024, 2048, 4096};
  std::size_t batch = 128;
  std::size_t warmup = 3;
  std::size_t reps = 20;
  std::size_t threads = 1;
  /// Skip the dense variant above this N (its cost grows as N^2).
  std::size_t dense_max_n = 2048;
  /// Skip the naive-DCT variant above this N.
  std::size_t naive_max_n = 2048;
  /// Forward passes are always timed; backward only when set.
  bool backward = true;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::string variant;    // acdc_naive_dct, acdc_fast_dct, dense
  std::string direction;  // forward, backward
  std::size_t n = 0;
  std::size_t batch = 0;
  double median_ns = 0.0;
  std::size_t iterations = 0;
  LayerCostModel model;
  std::size_t threads = 1;

  /// Model FLOPs for the whole batch over the measured median time.
  double gflops() const;
};

std::vector<BenchRow> bench(const BenchOptions& options);

/// `variant,direction,N,batch,median_ns,model_flops,model_bytes_cached,model_AI,threads`
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace sell
