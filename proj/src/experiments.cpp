#include "sell/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "sell/errors.hpp"
#include "sell/report_io.hpp"

namespace sell {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Runs tasks on up to `threads` workers; result i always comes from task i.
std::vector<RunResult> run_tasks(const std::vector<std::function<RunResult()>>& tasks,
                                 std::size_t threads) {
  std::vector<RunResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) results[i] = tasks[i]();
  };
  threads = std::max<std::size_t>(1, std::min(threads, tasks.size()));
  if (threads == 1) {
    worker();
    return results;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

template <class TrainFn>
RunResult guarded_run(RunResult run, TrainFn&& fn) {
  try {
    run.losses = fn(run);
  } catch (const DivergenceError& e) {
    run.diverged = true;
    run.divergence_step = e.step();
  }
  return run;
}

// Per-run initialization stream, independent of scheduling order.
Rng init_rng(std::uint64_t seed, std::uint64_t tag, std::size_t k) {
  return Rng(seed).split(tag * 1000003 + k);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::function<RunResult()>> regression_tasks(
    const RecoveryConfig& cfg, const std::string& acdc_name, const InitScheme& init,
    std::uint64_t init_tag, const std::vector<std::shared_ptr<const RegressionDataset>>& data) {
  std::vector<std::function<RunResult()>> tasks;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    const std::uint64_t seed = cfg.seeds[s];
    const auto dataset = data[s];
    for (std::size_t k : cfg.k_values) {
      tasks.push_back([&cfg, acdc_name, init, init_tag, seed, dataset, k] {
        RunResult run;
        run.experiment = acdc_name;
        run.k = k;
        run.seed = seed;
        run.learning_rate = cfg.lr_for(k);
        return guarded_run(run, [&](RunResult& r) {
          Cascade c = make_acdc_cascade(cfg.n, k, seed);
          Rng rng = init_rng(seed, init_tag, k);
          initialize(c, init, rng);
          r.params = count_params(c);
          SgdConfig sgd = cfg.sgd;
          sgd.learning_rate = r.learning_rate;
          return train(c, *dataset, sgd, {cfg.epochs, cfg.batch_size, seed, {}});
        });
      });
    }
  }
  return tasks;
}

std::vector<std::function<RunResult()>> dense_tasks(
    const RecoveryConfig& cfg, const std::string& name,
    const std::vector<std::shared_ptr<const RegressionDataset>>& data) {
  std::vector<std::function<RunResult()>> tasks;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    const std::uint64_t seed = cfg.seeds[s];
    const auto dataset = data[s];
    tasks.push_back([&cfg, name, seed, dataset] {
      RunResult run;
      run.experiment = name;
      run.k = 0;
      run.seed = seed;
      run.learning_rate = cfg.dense_learning_rate();
      return guarded_run(run, [&](RunResult& r) {
        Cascade c(seed);
        c.add(DenseLayer(cfg.n, cfg.n));
        Rng rng = init_rng(seed, 0, 0);
        initialize(c, InitScheme::glorot(), rng);
        r.params = count_params(c);
        SgdConfig sgd = cfg.sgd;
        sgd.learning_rate = cfg.dense_learning_rate();
        return train(c, *dataset, sgd, {cfg.epochs, cfg.batch_size, seed, {}});
      });
    });
  }
  return tasks;
}

std::vector<std::shared_ptr<const RegressionDataset>> make_datasets(const RecoveryConfig& cfg) {
  std::vector<std::shared_ptr<const RegressionDataset>> out;
  for (std::uint64_t seed : cfg.seeds) {
    out.push_back(std::make_shared<const RegressionDataset>(
        make_regression(seed, cfg.n_samples, cfg.n, cfg.n, cfg.noise_std)));
  }
  return out;
}

void append(std::vector<std::function<RunResult()>>& dst,
            std::vector<std::function<RunResult()>> src) {
  for (auto& t : src) dst.push_back(std::move(t));
}

}  // namespace

// ---------------------------------------------------------------------------

double RunResult::final_loss() const {
  return diverged || losses.empty() ? kInf : losses.back();
}

double RunResult::best_loss() const {
  if (losses.empty()) return kInf;
  return *std::min_element(losses.begin(), losses.end());
}

double RunResult::final_accuracy() const { return accuracies.empty() ? 0.0 : accuracies.back(); }

const RunResult* ExperimentReport::find(const std::string& experiment, std::size_t k,
                                        std::uint64_t seed) const {
  for (const auto& r : runs) {
    if (r.experiment == experiment && r.k == k && r.seed == seed) return &r;
  }
  return nullptr;
}

std::vector<const RunResult*> ExperimentReport::select(const std::string& experiment,
                                                       std::size_t k) const {
  std::vector<const RunResult*> out;
  for (const auto& r : runs) {
    if (r.experiment == experiment && r.k == k) out.push_back(&r);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double ExperimentReport::median_final_loss(const std::string& experiment, std::size_t k) const {
  std::vector<double> v;
  for (const auto* r : select(experiment, k)) v.push_back(r->final_loss());
  return median(std::move(v));
}

double ExperimentReport::median_best_loss(const std::string& experiment, std::size_t k) const {
  std::vector<double> v;
  for (const auto* r : select(experiment, k)) v.push_back(r->best_loss());
  return median(std::move(v));
}

double ExperimentReport::median_final_accuracy(const std::string& experiment,
                                               std::size_t k) const {
  std::vector<double> v;
  for (const auto* r : select(experiment, k)) v.push_back(r->final_accuracy());
  return median(std::move(v));
}

// ---------------------------------------------------------------------------
// Recovery

SgdConfig RecoveryConfig::default_sgd() {
  SgdConfig s;
  s.learning_rate = 3e-4;
  s.momentum = 0.9;
  return s;
}

double RecoveryConfig::lr_for(std::size_t k) const {
  const auto it = lr_by_k.find(k);
  return it == lr_by_k.end() ? sgd.learning_rate : it->second;
}

void RecoveryConfig::validate() const {
  if (k_values.empty()) throw ConfigError("k_values must not be empty");
  if (!std::is_sorted(k_values.begin(), k_values.end())) {
    throw ConfigError("k_values must be sorted ascending");
  }
  if (k_values.front() == 0) throw ConfigError("k_values entries must be positive");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (n == 0 || n_samples == 0 || batch_size == 0) {
    throw ConfigError("n, n_samples and batch_size must be positive");
  }
  if (noise_std < 0.0) throw ConfigError("noise_std must be non-negative");
  if (!(sgd.momentum >= 0.0 && sgd.momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(sgd.learning_rate > 0.0) || !(dense_learning_rate() > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  for (const auto& [k, lr] : lr_by_k) {
    if (!(lr > 0.0)) throw ConfigError("lr_by_k[" + std::to_string(k) + "] must be positive");
  }
}

ExperimentReport run_recovery(const RecoveryConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto data = make_datasets(config);
  std::vector<std::function<RunResult()>> tasks;
  append(tasks, regression_tasks(config, "recover", config.init, 1, data));
  append(tasks, dense_tasks(config, "recover_dense", data));
  ExperimentReport report;
  report.name = "recover";
  report.runs = run_tasks(tasks, config.threads);
  report.config_json = to_json(config).dump(2);
  report.wall_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_init_contrast(const InitContrastConfig& config) {
  config.base.validate();
  const auto start = Clock::now();
  const auto data = make_datasets(config.base);
  std::vector<std::function<RunResult()>> tasks;
  append(tasks, regression_tasks(config.base, "init_identity", config.good, 1, data));
  append(tasks, regression_tasks(config.base, "init_zero_mean", config.bad, 2, data));
  append(tasks, dense_tasks(config.base, "init_dense", data));
  ExperimentReport report;
  report.name = "init-contrast";
  report.runs = run_tasks(tasks, config.base.threads);
  report.config_json = to_json(config).dump(2);
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// AFDF trend

SgdConfig AfdfTrendConfig::default_sgd() {
  SgdConfig s;
  s.learning_rate = 0.01;
  s.momentum = 0.9;
  return s;
}

void AfdfTrendConfig::validate() const {
  if (k_values.empty() || !std::is_sorted(k_values.begin(), k_values.end()) ||
      k_values.front() == 0) {
    throw ConfigError("k_values must be a non-empty ascending list of positive depths");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (!is_power_of_two(n)) throw ConfigError("n must be a power of two for the FFT");
  if (n_samples == 0 || batch_size == 0) throw ConfigError("n_samples and batch_size must be positive");
  if (!(sgd.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(sgd.momentum >= 0.0 && sgd.momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
}

ExperimentReport run_afdf_trend(const AfdfTrendConfig& config) {
  config.validate();
  const auto start = Clock::now();
  Rng target_rng = Rng(config.target_seed).split(0x74617267);  // "targ"
  const double w_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(config.n));
  const auto target = std::make_shared<const ComplexMatrix>(
      rand_gaussian(target_rng, config.n, config.n, 0.0, w_scale),
      rand_gaussian(target_rng, config.n, config.n, 0.0, w_scale));

  std::vector<std::function<RunResult()>> tasks;
  for (std::uint64_t seed : config.seeds) {
    for (std::size_t k : config.k_values) {
      tasks.push_back([&config, target, seed, k] {
        RunResult run;
        run.experiment = "afdf";
        run.k = k;
        run.seed = seed;
        run.learning_rate = config.sgd.learning_rate;
        return guarded_run(run, [&](RunResult& r) {
          Rng data_rng = Rng(seed).split(0x64617461);  // "data"
          const double x_scale = 1.0 / std::sqrt(2.0);
          const ComplexMatrix x(rand_gaussian(data_rng, config.n_samples, config.n, 0.0, x_scale),
                                rand_gaussian(data_rng, config.n_samples, config.n, 0.0, x_scale));
          const ComplexMatrix y = matmul(x, *target);
          Cascade c = make_afdf_cascade(config.n, k, seed);
          Rng rng = init_rng(seed, 3, k);
          initialize(c, InitScheme::identity_noise(config.init_sigma), rng);
          r.params = count_params(c);
          return train_complex(c, x, y, config.sgd, {config.epochs, config.batch_size, seed, {}});
        });
      });
    }
  }
  ExperimentReport report;
  report.name = "afdf-trend";
  report.runs = run_tasks(tasks, config.threads);
  report.config_json = to_json(config).dump(2);
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Nonlinear toy

ClassificationDataset make_blobs_dataset(std::uint64_t seed, std::size_t n_train,
                                         std::size_t n_test, std::size_t features,
                                         std::size_t latent, double separation) {
  Rng rng(seed);
  Rng map_rng = rng.split(1), sample_rng = rng.split(2);
  // Class means at +-separation along a random unit direction.
  Matrix dir = rand_gaussian(map_rng, 1, latent, 0.0, 1.0);
  const double norm = frobenius_norm(dir);
  for (double& v : dir.values()) v *= separation / norm;
  const Matrix proj =
      rand_gaussian(map_rng, latent, features, 0.0, 1.0 / std::sqrt(static_cast<double>(latent)));
  const Matrix offset = rand_gaussian(map_rng, 1, features, 0.0, 0.5);

  auto sample = [&](std::size_t count, Matrix& x, Matrix& y) {
    Matrix z(count, latent);
    y = Matrix(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t label = sample_rng.uniform() < 0.5 ? 0 : 1;
      const double sign = label == 0 ? -1.0 : 1.0;
      y(i, label) = 1.0;
      for (std::size_t j = 0; j < latent; ++j) z(i, j) = sign * dir(0, j) + sample_rng.gaussian();
    }
    x = matmul(z, proj);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < features; ++j) x(i, j) = std::tanh(x(i, j) + offset(0, j));
    }
  };
  ClassificationDataset d;
  sample(n_train, d.x_train, d.y_train);
  sample(n_test, d.x_test, d.y_test);
  return d;
}

SgdConfig ToyConfig::default_sgd() {
  SgdConfig s;
  s.learning_rate = 0.01;
  s.momentum = 0.9;
  return s;
}

void ToyConfig::validate() const {
  if (blocks.empty() || !std::is_sorted(blocks.begin(), blocks.end()) || blocks.front() == 0) {
    throw ConfigError("blocks must be a non-empty ascending list of positive depths");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (n == 0 || n_train == 0 || n_test == 0 || latent == 0 || batch_size == 0) {
    throw ConfigError("sizes must be positive");
  }
  if (!(sgd.learning_rate > 0.0) || !(dense_lr > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(sgd.momentum >= 0.0 && sgd.momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
}

Cascade make_dense_mlp(std::size_t n, std::size_t blocks, std::size_t classes) {
  Cascade c;
  for (std::size_t b = 0; b < blocks; ++b) {
    c.add(DenseLayer(n, n));
    if (b + 1 < blocks) c.add(ReluLayer(n));
  }
  c.add(DenseLayer(n, classes));
  return c;
}

ExperimentReport run_nonlinear_toy(const ToyConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto data = std::make_shared<const ClassificationDataset>(make_blobs_dataset(
      config.dataset_seed, config.n_train, config.n_test, config.n, config.latent,
      config.separation));

  auto make_task = [&config, data](bool acdc, std::size_t blocks, std::uint64_t seed) {
    return [&config, data, acdc, blocks, seed] {
      RunResult run;
      run.experiment = acdc ? "toy_acdc" : "toy_dense";
      run.k = blocks;
      run.seed = seed;
      run.learning_rate = acdc ? config.sgd.learning_rate : config.dense_lr;
      return guarded_run(run, [&](RunResult& r) {
        Cascade c;
        if (acdc) {
          c = make_acdc_relu_stack(config.n, blocks, seed);
          c.add(DenseLayer(config.n, 2));
        } else {
          c = make_dense_mlp(config.n, blocks, 2);
          c.set_seed(seed);
        }
        Rng rng = init_rng(seed, acdc ? 4 : 5, blocks);
        initialize(c, config.init, rng);
        r.params = count_params(c);
        SgdConfig sgd = config.sgd;
        sgd.learning_rate = r.learning_rate;
        TrainOptions options{config.epochs, config.batch_size, seed, {}};
        options.on_epoch_end = [&](std::size_t, double) {
          r.accuracies.push_back(accuracy(c.apply(data->x_test), data->y_test));
        };
        return train(c, data->x_train, data->y_train, softmax_cross_entropy, sgd, options);
      });
    };
  };

  std::vector<std::function<RunResult()>> tasks;
  for (std::uint64_t seed : config.seeds) {
    for (std::size_t blocks : config.blocks) {
      tasks.push_back(make_task(true, blocks, seed));
      tasks.push_back(make_task(false, blocks, seed));
    }
  }
  ExperimentReport report;
  report.name = "toy";
  report.runs = run_tasks(tasks, config.threads);
  report.config_json = to_json(config).dump(2);
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Compression

std::size_t dense_param_count(std::span<const DenseShape> shapes) {
  std::size_t total = 0;
  for (const auto& s : shapes) total += s.in * s.out + (s.bias ? s.out : 0);
  return total;
}

std::vector<CompressionRow> compression_report(std::size_t cascade_params,
                                               std::span<const DenseShape> replaced,
                                               const std::string& name) {
  const std::size_t dense = dense_param_count(replaced);
  std::vector<CompressionRow> rows;
  rows.push_back({"dense", dense, 1.0});
  rows.push_back({name, cascade_params,
                  cascade_params == 0 ? std::numeric_limits<double>::infinity()
                                      : static_cast<double>(dense) /
                                            static_cast<double>(cascade_params)});
  return rows;
}

std::vector<CompressionRow> compression_report(const Cascade& cascade,
                                               std::span<const DenseShape> replaced,
                                               const std::string& name) {
  return compression_report(count_params(cascade), replaced, name);
}

}  // namespace sell
