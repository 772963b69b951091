#include "sell/report_io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "sell/errors.hpp"

namespace sell {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw ConfigError("config '" + (path.empty() ? std::string("<root>") : path) +
                      "' must be a JSON object");
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  require_object(j, path);
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown config key '" + join(path, item.key()) + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + join(path, key) + "' has the wrong type");
  }
}

constexpr std::array<ParamGroup, kParamGroupCount> kGroups{
    ParamGroup::diag_a, ParamGroup::diag_d, ParamGroup::bias, ParamGroup::weight};

ParamGroup parse_group(const std::string& name, const std::string& path) {
  for (auto g : kGroups) {
    if (to_string(g) == name) return g;
  }
  throw ConfigError("unknown parameter group '" + name + "' in '" + path + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config -> JSON

json to_json(const SgdConfig& c) {
  json mult = json::object();
  json no_decay = json::array();
  for (auto g : kGroups) {
    mult[std::string(to_string(g))] = c.lr_multiplier[static_cast<std::size_t>(g)];
    if (c.no_weight_decay[static_cast<std::size_t>(g)]) no_decay.push_back(std::string(to_string(g)));
  }
  return {{"learning_rate", c.learning_rate},   {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},     {"lr_decay_factor", c.lr_decay_factor},
          {"lr_decay_every", c.lr_decay_every}, {"lr_multiplier", mult},
          {"no_weight_decay", no_decay}};
}

json to_json(const InitScheme& s) {
  const char* kind = s.kind == InitScheme::Kind::diag_identity_noise ? "identity_noise"
                     : s.kind == InitScheme::Kind::diag_zero_mean    ? "zero_mean"
                                                                     : "glorot";
  return {{"kind", kind}, {"sigma", s.sigma}};
}

json to_json(const RecoveryConfig& c) {
  json lr = json::object();
  for (const auto& [k, v] : c.lr_by_k) lr[std::to_string(k)] = v;
  return {{"k_values", c.k_values},   {"n", c.n},
          {"n_samples", c.n_samples}, {"noise_std", c.noise_std},
          {"init", to_json(c.init)},  {"sgd", to_json(c.sgd)},
          {"lr_by_k", lr},
          {"dense_lr", c.dense_lr ? json(*c.dense_lr) : json(nullptr)},
          {"epochs", c.epochs},       {"batch_size", c.batch_size},
          {"seeds", c.seeds},         {"threads", c.threads}};
}

json to_json(const InitContrastConfig& c) {
  return {{"base", to_json(c.base)}, {"good", to_json(c.good)}, {"bad", to_json(c.bad)}};
}

json to_json(const AfdfTrendConfig& c) {
  return {{"k_values", c.k_values},       {"n", c.n},
          {"n_samples", c.n_samples},     {"init_sigma", c.init_sigma},
          {"sgd", to_json(c.sgd)},        {"epochs", c.epochs},
          {"batch_size", c.batch_size},   {"target_seed", c.target_seed},
          {"seeds", c.seeds},             {"threads", c.threads}};
}

json to_json(const ToyConfig& c) {
  return {{"blocks", c.blocks},         {"n", c.n},
          {"n_train", c.n_train},       {"n_test", c.n_test},
          {"latent", c.latent},         {"separation", c.separation},
          {"dataset_seed", c.dataset_seed}, {"init", to_json(c.init)},
          {"sgd", to_json(c.sgd)},      {"dense_lr", c.dense_lr},
          {"epochs", c.epochs},         {"batch_size", c.batch_size},
          {"seeds", c.seeds},           {"threads", c.threads}};
}

// ---------------------------------------------------------------------------
// JSON -> config

SgdConfig parse_sgd_config(const json& j, SgdConfig c, const std::string& path) {
  reject_unknown(j,
                 {"learning_rate", "momentum", "weight_decay", "lr_decay_factor", "lr_decay_every",
                  "lr_multiplier", "no_weight_decay"},
                 path);
  read(j, "learning_rate", c.learning_rate, path);
  read(j, "momentum", c.momentum, path);
  read(j, "weight_decay", c.weight_decay, path);
  read(j, "lr_decay_factor", c.lr_decay_factor, path);
  read(j, "lr_decay_every", c.lr_decay_every, path);
  if (j.contains("lr_multiplier")) {
    const std::string sub = join(path, "lr_multiplier");
    require_object(j["lr_multiplier"], sub);
    for (const auto& item : j["lr_multiplier"].items()) {
      const auto g = parse_group(item.key(), sub);
      if (!item.value().is_number()) throw ConfigError("config key '" + join(sub, item.key()) + "' must be a number");
      c.lr_multiplier[static_cast<std::size_t>(g)] = item.value().get<double>();
    }
  }
  if (j.contains("no_weight_decay")) {
    const std::string sub = join(path, "no_weight_decay");
    if (!j["no_weight_decay"].is_array()) throw ConfigError("config key '" + sub + "' must be a list");
    c.no_weight_decay.fill(false);
    for (const auto& name : j["no_weight_decay"]) {
      if (!name.is_string()) throw ConfigError("config key '" + sub + "' must list group names");
      c.no_weight_decay[static_cast<std::size_t>(parse_group(name.get<std::string>(), sub))] = true;
    }
  }
  if (c.weight_decay < 0.0) throw ConfigError("config key '" + join(path, "weight_decay") + "' must be >= 0");
  return c;
}

InitScheme parse_init_scheme(const json& j, const std::string& path) {
  reject_unknown(j, {"kind", "sigma"}, path);
  InitScheme s;
  std::string kind = "identity_noise";
  read(j, "kind", kind, path);
  read(j, "sigma", s.sigma, path);
  if (kind == "identity_noise") {
    s.kind = InitScheme::Kind::diag_identity_noise;
  } else if (kind == "zero_mean") {
    s.kind = InitScheme::Kind::diag_zero_mean;
  } else if (kind == "glorot") {
    s.kind = InitScheme::Kind::dense_glorot;
  } else {
    throw ConfigError("config key '" + join(path, "kind") + "' has unknown value '" + kind + "'");
  }
  if (s.sigma < 0.0) throw ConfigError("config key '" + join(path, "sigma") + "' must be >= 0");
  return s;
}

RecoveryConfig parse_recovery_config(const json& j, const std::string& path) {
  reject_unknown(j,
                 {"k_values", "n", "n_samples", "noise_std", "init", "sgd", "lr_by_k", "dense_lr",
                  "epochs", "batch_size", "seeds", "threads"},
                 path);
  RecoveryConfig c;
  read(j, "k_values", c.k_values, path);
  read(j, "n", c.n, path);
  read(j, "n_samples", c.n_samples, path);
  read(j, "noise_std", c.noise_std, path);
  if (j.contains("init")) c.init = parse_init_scheme(j["init"], join(path, "init"));
  if (j.contains("sgd")) c.sgd = parse_sgd_config(j["sgd"], c.sgd, join(path, "sgd"));
  if (j.contains("lr_by_k")) {
    const std::string sub = join(path, "lr_by_k");
    require_object(j["lr_by_k"], sub);
    c.lr_by_k.clear();
    for (const auto& item : j["lr_by_k"].items()) {
      std::size_t k = 0;
      try {
        k = std::stoul(item.key());
      } catch (const std::exception&) {
        throw ConfigError("config key '" + join(sub, item.key()) + "' is not a depth");
      }
      if (!item.value().is_number()) throw ConfigError("config key '" + join(sub, item.key()) + "' must be a number");
      c.lr_by_k[k] = item.value().get<double>();
    }
  }
  if (j.contains("dense_lr")) {
    const json& v = j["dense_lr"];
    if (v.is_null()) {
      c.dense_lr.reset();
    } else if (v.is_number()) {
      c.dense_lr = v.get<double>();
    } else {
      throw ConfigError("config key '" + join(path, "dense_lr") + "' must be a number or null");
    }
  }
  read(j, "epochs", c.epochs, path);
  read(j, "batch_size", c.batch_size, path);
  read(j, "seeds", c.seeds, path);
  read(j, "threads", c.threads, path);
  c.validate();
  return c;
}

InitContrastConfig parse_init_contrast_config(const json& j) {
  reject_unknown(j, {"base", "good", "bad"}, "");
  InitContrastConfig c;
  if (j.contains("base")) c.base = parse_recovery_config(j["base"], "base");
  if (j.contains("good")) c.good = parse_init_scheme(j["good"], "good");
  if (j.contains("bad")) c.bad = parse_init_scheme(j["bad"], "bad");
  return c;
}

AfdfTrendConfig parse_afdf_trend_config(const json& j) {
  reject_unknown(j,
                 {"k_values", "n", "n_samples", "init_sigma", "sgd", "epochs", "batch_size",
                  "target_seed", "seeds", "threads"},
                 "");
  AfdfTrendConfig c;
  read(j, "k_values", c.k_values, "");
  read(j, "n", c.n, "");
  read(j, "n_samples", c.n_samples, "");
  read(j, "init_sigma", c.init_sigma, "");
  if (j.contains("sgd")) c.sgd = parse_sgd_config(j["sgd"], c.sgd, "sgd");
  read(j, "epochs", c.epochs, "");
  read(j, "batch_size", c.batch_size, "");
  read(j, "target_seed", c.target_seed, "");
  read(j, "seeds", c.seeds, "");
  read(j, "threads", c.threads, "");
  c.validate();
  return c;
}

ToyConfig parse_toy_config(const json& j) {
  reject_unknown(j,
                 {"blocks", "n", "n_train", "n_test", "latent", "separation", "dataset_seed",
                  "init", "sgd", "dense_lr", "epochs", "batch_size", "seeds", "threads"},
                 "");
  ToyConfig c;
  read(j, "blocks", c.blocks, "");
  read(j, "n", c.n, "");
  read(j, "n_train", c.n_train, "");
  read(j, "n_test", c.n_test, "");
  read(j, "latent", c.latent, "");
  read(j, "separation", c.separation, "");
  read(j, "dataset_seed", c.dataset_seed, "");
  if (j.contains("init")) c.init = parse_init_scheme(j["init"], "init");
  if (j.contains("sgd")) c.sgd = parse_sgd_config(j["sgd"], c.sgd, "sgd");
  read(j, "dense_lr", c.dense_lr, "");
  read(j, "epochs", c.epochs, "");
  read(j, "batch_size", c.batch_size, "");
  read(j, "seeds", c.seeds, "");
  read(j, "threads", c.threads, "");
  c.validate();
  return c;
}

GradCheckSuiteOptions parse_gradcheck_options(const json& j) {
  reject_unknown(j, {"sizes", "batches", "configs", "eps", "seed"}, "");
  GradCheckSuiteOptions o;
  read(j, "sizes", o.sizes, "");
  read(j, "batches", o.batches, "");
  read(j, "configs", o.configs, "");
  read(j, "eps", o.eps, "");
  read(j, "seed", o.seed, "");
  if (!(o.eps > 0.0)) throw ConfigError("config key 'eps' must be positive");
  return o;
}

BenchOptions parse_bench_options(const json& j) {
  reject_unknown(j,
                 {"sizes", "batch", "warmup", "reps", "threads", "dense_max_n", "naive_max_n",
                  "backward", "seed"},
                 "");
  BenchOptions o;
  read(j, "sizes", o.sizes, "");
  read(j, "batch", o.batch, "");
  read(j, "warmup", o.warmup, "");
  read(j, "reps", o.reps, "");
  read(j, "threads", o.threads, "");
  read(j, "dense_max_n", o.dense_max_n, "");
  read(j, "naive_max_n", o.naive_max_n, "");
  read(j, "backward", o.backward, "");
  read(j, "seed", o.seed, "");
  if (o.warmup < 3) throw ConfigError("config key 'warmup' must be at least 3");
  if (o.reps < 20) throw ConfigError("config key 'reps' must be at least 20");
  if (o.batch == 0) throw ConfigError("config key 'batch' must be positive");
  if (o.threads == 0) throw ConfigError("config key 'threads' must be positive");
  return o;
}

json to_json(const GradCheckSuiteOptions& o) {
  return {{"sizes", o.sizes}, {"batches", o.batches}, {"configs", o.configs},
          {"eps", o.eps},     {"seed", o.seed}};
}

json to_json(const BenchOptions& o) {
  return {{"sizes", o.sizes},     {"batch", o.batch},
          {"warmup", o.warmup},   {"reps", o.reps},
          {"threads", o.threads}, {"dense_max_n", o.dense_max_n},
          {"naive_max_n", o.naive_max_n}, {"backward", o.backward},
          {"seed", o.seed}};
}

// ---------------------------------------------------------------------------
// Reports

void write_csv(const ExperimentReport& report, std::ostream& out) {
  bool with_accuracy = false;
  for (const auto& r : report.runs) with_accuracy = with_accuracy || !r.accuracies.empty();
  out << "experiment,K,seed,epoch,loss" << (with_accuracy ? ",accuracy" : "") << '\n';
  for (const auto& r : report.runs) {
    for (std::size_t e = 0; e < r.losses.size(); ++e) {
      out << r.experiment << ',' << r.k << ',' << r.seed << ',' << (e + 1) << ','
          << format_double(r.losses[e]);
      if (with_accuracy) {
        out << ',' << (e < r.accuracies.size() ? format_double(r.accuracies[e]) : "");
      }
      out << '\n';
    }
  }
}

json summary_json(const ExperimentReport& report) {
  json runs = json::array();
  std::map<std::pair<std::string, std::size_t>, bool> groups;
  for (const auto& r : report.runs) {
    json row = {{"experiment", r.experiment},
                {"K", r.k},
                {"seed", r.seed},
                {"learning_rate", r.learning_rate},
                {"params", r.params},
                {"epochs_completed", r.losses.size()},
                {"final_loss", r.final_loss()},
                {"best_loss", r.best_loss()},
                {"diverged", r.diverged}};
    if (r.diverged) row["divergence_step"] = r.divergence_step;
    if (!r.accuracies.empty()) row["final_accuracy"] = r.final_accuracy();
    runs.push_back(std::move(row));
    groups[{r.experiment, r.k}] = !r.accuracies.empty();
  }
  json medians = json::array();
  for (const auto& [key, has_acc] : groups) {
    json row = {{"experiment", key.first},
                {"K", key.second},
                {"median_final_loss", report.median_final_loss(key.first, key.second)},
                {"median_best_loss", report.median_best_loss(key.first, key.second)}};
    if (has_acc) row["median_final_accuracy"] = report.median_final_accuracy(key.first, key.second);
    medians.push_back(std::move(row));
  }
  json config = report.config_json.empty() ? json::object() : json::parse(report.config_json);
  return {{"name", report.name},
          {"config", config},
          {"runs", runs},
          {"medians", medians},
          {"wall_seconds", report.wall_seconds}};
}

void print_summary(const ExperimentReport& report, std::ostream& out) {
  std::map<std::pair<std::string, std::size_t>, bool> groups;
  for (const auto& r : report.runs) groups[{r.experiment, r.k}] = !r.accuracies.empty();
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %4s %8s %14s %14s %10s\n", "experiment", "K", "params",
                "median_final", "median_best", "accuracy");
  out << line;
  for (const auto& [key, has_acc] : groups) {
    const auto runs = report.select(key.first, key.second);
    const std::size_t params = runs.empty() ? 0 : runs.front()->params;
    std::size_t diverged = 0;
    for (const auto* r : runs) diverged += r->diverged ? 1 : 0;
    char acc[32] = "-";
    if (has_acc) std::snprintf(acc, sizeof acc, "%.4f", report.median_final_accuracy(key.first, key.second));
    std::snprintf(line, sizeof line, "%-16s %4zu %8zu %14.6g %14.6g %10s%s\n", key.first.c_str(),
                  key.second, params, report.median_final_loss(key.first, key.second),
                  report.median_best_loss(key.first, key.second), acc,
                  diverged ? "  (diverged runs present)" : "");
    out << line;
  }
  std::snprintf(line, sizeof line, "wall clock: %.1f s\n", report.wall_seconds);
  out << line;
}

}  // namespace sell
