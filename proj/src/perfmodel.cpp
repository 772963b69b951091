#include "sell/perfmodel.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>

#include "sell/layers.hpp"
#include "sell/report_io.hpp"
#include "sell/rng.hpp"
#include "sell/training.hpp"

namespace sell {

LayerCostModel cost_model(std::int64_t n, std::int64_t batch) {
  if (n <= 0 || batch <= 0) throw std::invalid_argument("cost_model: N and batch must be positive");
  LayerCostModel c;
  c.n = n;
  c.batch = batch;
  const auto un = static_cast<std::uint64_t>(n);
  c.log2_integral = std::has_single_bit(un);
  if (c.log2_integral) {
    const std::int64_t lg = std::countr_zero(un);
    c.flops = static_cast<double>(4 * n + 5 * n * lg);
  } else {
    c.flops = 4.0 * n + 5.0 * n * std::log2(static_cast<double>(n));
  }
  c.bytes_uncached = static_cast<double>(24 * n);
  c.bytes_cached = static_cast<double>(8 * n);
  c.arithmetic_intensity = c.flops / c.bytes_cached;
  return c;
}

LayerCostModel dense_cost_model(std::int64_t n, std::int64_t batch) {
  if (n <= 0 || batch <= 0) {
    throw std::invalid_argument("dense_cost_model: N and batch must be positive");
  }
  LayerCostModel c;
  c.n = n;
  c.batch = batch;
  c.log2_integral = std::has_single_bit(static_cast<std::uint64_t>(n));
  c.flops = 2.0 * static_cast<double>(n) * static_cast<double>(n);
  const double bytes = 4.0 * (static_cast<double>(n) * n + 2.0 * static_cast<double>(n) * batch);
  c.bytes_uncached = bytes;
  c.bytes_cached = bytes;
  c.arithmetic_intensity = c.flops * static_cast<double>(batch) / bytes;
  return c;
}

double BenchRow::gflops() const {
  if (median_ns <= 0.0) return 0.0;
  return model.flops * static_cast<double>(batch) / median_ns;
}

namespace {

double median_ns(const std::function<void()>& fn, std::size_t warmup, std::size_t reps) {
  for (std::size_t i = 0; i < warmup; ++i) fn();
  std::vector<double> times;
  times.reserve(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t m = times.size() / 2;
  return times.size() % 2 ? times[m] : 0.5 * (times[m - 1] + times[m]);
}

}  // namespace

std::vector<BenchRow> bench(const BenchOptions& options) {
  if (options.reps == 0) throw std::invalid_argument("bench: reps must be positive");
  if (options.batch == 0) throw std::invalid_argument("bench: batch must be positive");
  std::vector<BenchRow> rows;
  Rng rng(options.seed);
  for (const std::size_t n : options.sizes) {
    const Matrix x = rand_gaussian(rng, options.batch, n, 0.0, 1.0);
    const Matrix gy = rand_gaussian(rng, options.batch, n, 0.0, 1.0);
    auto record = [&](const std::string& variant, const std::string& direction, double ns,
                      LayerCostModel model) {
      rows.push_back({variant, direction, n, options.batch, ns, options.reps, model, options.threads});
    };

    auto run_acdc = [&](const std::string& variant, DctMode mode) {
      AcdcLayer layer(n, mode);
      const LayerCostModel model =
          cost_model(static_cast<std::int64_t>(n), static_cast<std::int64_t>(options.batch));
      Matrix sink;
      record(variant, "forward",
             median_ns([&] { sink = layer.apply(x, true, options.threads); }, options.warmup,
                       options.reps),
             model);
      if (!options.backward) return;
      record(variant, "backward",
             median_ns(
                 [&] {
                   layer.forward(x);
                   sink = layer.backward(gy);
                 },
                 options.warmup, options.reps),
             model);
    };
    if (n <= options.naive_max_n) run_acdc("acdc_naive_dct", DctMode::naive);
    if (is_power_of_two(n)) run_acdc("acdc_fast_dct", DctMode::fast);

    if (n <= options.dense_max_n) {
      DenseLayer layer(n, n);
      Rng wrng = rng.split(n);
      for (auto& w : layer.weight().values()) w = wrng.gaussian(0.0, 1.0 / std::sqrt(double(n)));
      const LayerCostModel model =
          dense_cost_model(static_cast<std::int64_t>(n), static_cast<std::int64_t>(options.batch));
      Matrix sink;
      record("dense", "forward",
             median_ns([&] { sink = layer.apply(x, true, options.threads); }, options.warmup,
                       options.reps),
             model);
      if (!options.backward) continue;
      record("dense", "backward",
             median_ns(
                 [&] {
                   layer.forward(x);
                   sink = layer.backward(gy);
                 },
                 options.warmup, options.reps),
             model);
    }
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "variant,direction,N,batch,median_ns,model_flops,model_bytes_cached,model_AI,threads\n";
  for (const auto& r : rows) {
    out << r.variant << ',' << r.direction << ',' << r.n << ',' << r.batch << ','
        << format_double(r.median_ns) << ',' << format_double(r.model.flops) << ','
        << format_double(r.model.bytes_cached) << ',' << format_double(r.model.arithmetic_intensity)
        << ',' << r.threads << '\n';
  }
}

}  // namespace sell
