#pragma once

// Scripted training sweeps: dense-operator recovery with ACDC_K cascades,
// the initialization contrast, the complex AFDF depth trend, a small
// nonlinear classification analogue, and parameter-count reporting.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sell/cascade.hpp"
#include "sell/training.hpp"

namespace sell {

struct RunResult {
  std::string experiment;
  /// Cascade depth (K, or blocks L for the toy); 0 marks a dense baseline.
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  std::size_t params = 0;
  std::vector<double> losses;      // per-epoch mean training loss
  std::vector<double> accuracies;  // per-epoch held-out accuracy (toy only)
  bool diverged = false;
  std::size_t divergence_step = 0;

  /// Last epoch's loss, +inf when diverged.
  double final_loss() const;
  /// Smallest epoch loss, +inf when diverged before the first epoch.
  double best_loss() const;
  /// Last epoch's accuracy, 0 when absent.
  double final_accuracy() const;
};

struct ExperimentReport {
  std::string name;
  std::vector<RunResult> runs;
  /// Echo of the configuration as JSON text; enough to rerun bit-exactly.
  std::string config_json;
  double wall_seconds = 0.0;

  const RunResult* find(const std::string& experiment, std::size_t k, std::uint64_t seed) const;
  std::vector<const RunResult*> select(const std::string& experiment, std::size_t k) const;
  double median_final_loss(const std::string& experiment, std::size_t k) const;
  double median_best_loss(const std::string& experiment, std::size_t k) const;
  double median_final_accuracy(const std::string& experiment, std::size_t k) const;
};

double median(std::vector<double> values);

// -- Dense-operator recovery ---------------------------------------------------

struct RecoveryConfig {
  std::vector<std::size_t> k_values{1, 2, 4, 8, 16, 32};
  std::size_t n = 32;
  std::size_t n_samples = 10000;
  double noise_std = 1e-2;
  InitScheme init = InitScheme::identity_noise(0.1);
  /// Shared optimizer settings; learning_rate is the fallback for depths
  /// missing from lr_by_k.
  SgdConfig sgd = default_sgd();
  std::map<std::size_t, double> lr_by_k;
  /// Dense baseline learning rate, tuned so the baseline reaches the noise
  /// floor within the epoch budget. Unset means sgd.learning_rate.
  std::optional<double> dense_lr = 0.1;
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  /// Concurrent runs; results never depend on this.
  std::size_t threads = 1;

  static SgdConfig default_sgd();
  double lr_for(std::size_t k) const;
  double dense_learning_rate() const { return dense_lr.value_or(sgd.learning_rate); }
  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// ACDC_K cascades (pure linear) and a dense baseline on the same data per seed.
/// Experiments: "recover" and "recover_dense" (k = 0).
ExperimentReport run_recovery(const RecoveryConfig& config);

struct InitContrastConfig {
  RecoveryConfig base;
  InitScheme good = InitScheme::identity_noise(0.1);
  InitScheme bad = InitScheme::zero_mean(1e-3);
};

/// Same sweep under both initializations. Experiments: "init_identity",
/// "init_zero_mean" and "init_dense" (k = 0).
ExperimentReport run_init_contrast(const InitContrastConfig& config);

// -- Complex AFDF depth trend ---------------------------------------------------

struct AfdfTrendConfig {
  std::vector<std::size_t> k_values{1, 2, 4, 8};
  std::size_t n = 8;
  std::size_t n_samples = 256;
  double init_sigma = 0.1;
  SgdConfig sgd = default_sgd();
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  /// Seed of the fixed complex target operator.
  std::uint64_t target_seed = 7;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t threads = 1;

  static SgdConfig default_sgd();
  void validate() const;
};

/// AFDF_K cascades fit y = x W for one random complex W. Experiment "afdf".
ExperimentReport run_afdf_trend(const AfdfTrendConfig& config);

// -- Nonlinear toy classification ------------------------------------------------

struct ClassificationDataset {
  Matrix x_train, y_train;  // y one-hot
  Matrix x_test, y_test;
};

/// Two Gaussian blobs in a low-dimensional latent space pushed through a fixed
/// random tanh feature map to `features` dimensions.
ClassificationDataset make_blobs_dataset(std::uint64_t seed, std::size_t n_train,
                                         std::size_t n_test, std::size_t features = 64,
                                         std::size_t latent = 8, double separation = 1.0);

struct ToyConfig {
  std::vector<std::size_t> blocks{2, 4, 6};
  std::size_t n = 64;
  std::size_t n_train = 4000;
  std::size_t n_test = 2000;
  std::size_t latent = 8;
  double separation = 1.0;
  std::uint64_t dataset_seed = 2016;
  InitScheme init = InitScheme::identity_noise(0.061);
  SgdConfig sgd = default_sgd();
  double dense_lr = 0.01;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t threads = 1;

  static SgdConfig default_sgd();
  void validate() const;
};

/// [ACDC -> ReLU -> Perm] x L + softmax head vs an equal-width dense MLP.
/// Experiments "toy_acdc" and "toy_dense" with k = L.
ExperimentReport run_nonlinear_toy(const ToyConfig& config);

Cascade make_dense_mlp(std::size_t n, std::size_t blocks, std::size_t classes);

// -- Compression accounting -------------------------------------------------------

struct DenseShape {
  std::size_t in = 0;
  std::size_t out = 0;
  bool bias = true;
};

std::size_t dense_param_count(std::span<const DenseShape> shapes);

struct CompressionRow {
  std::string name;
  std::size_t params = 0;
  /// Dense parameter count divided by this row's count.
  double reduction = 1.0;
};

/// Rows: the replaced dense layers (reduction 1) and the cascade.
std::vector<CompressionRow> compression_report(const Cascade& cascade,
                                               std::span<const DenseShape> replaced,
                                               const std::string& name = "cascade");
std::vector<CompressionRow> compression_report(std::size_t cascade_params,
                                               std::span<const DenseShape> replaced,
                                               const std::string& name = "cascade");

}  // namespace sell
