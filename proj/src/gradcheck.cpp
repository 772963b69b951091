#include "sell/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "sell/rng.hpp"

namespace sell {

namespace {

double probe_loss(const Matrix& y, const Matrix& probe) {
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) s += y.values()[k] * probe.values()[k];
  return s;
}

double probe_loss(const ComplexMatrix& y, const ComplexMatrix& probe) {
  return probe_loss(y.re, probe.re) + probe_loss(y.im, probe.im);
}

void record(GradCheckReport& report, const std::string& name, std::span<const double> analytic,
            std::span<const double> numeric) {
  const double e = relative_error(analytic, numeric);
  if (e >= report.max_rel_error) {
    report.max_rel_error = e;
    report.worst_tensor = name;
  }
}

template <class Signal, class Eval>
void check_params(Cascade& cascade, GradCheckReport& report, double eps, Eval&& eval) {
  auto params = cascade.params();
  for (std::size_t p = 0; p < params.size(); ++p) {
    const ParamView& view = params[p];
    std::vector<double> numeric(view.value.size());
    for (std::size_t i = 0; i < view.value.size(); ++i) {
      const double saved = view.value[i];
      view.value[i] = saved + eps;
      const double up = eval();
      view.value[i] = saved - eps;
      const double down = eval();
      view.value[i] = saved;
      numeric[i] = (up - down) / (2.0 * eps);
    }
    const std::vector<double> analytic(view.grad.begin(), view.grad.end());
    record(report, "param#" + std::to_string(p) + ":" + std::string(view.name), analytic, numeric);
  }
}

void randomize_layer(Layer& layer, Rng& rng) {
  if (auto* l = std::get_if<AcdcLayer>(&layer)) {
    for (auto* v : {&l->a(), &l->d(), &l->bias()}) {
      for (double& x : *v) x = rng.gaussian();
    }
  } else if (auto* l = std::get_if<AfdfLayer>(&layer)) {
    for (auto* v : {&l->a_re(), &l->a_im(), &l->d_re(), &l->d_im()}) {
      for (double& x : *v) x = rng.gaussian();
    }
  } else if (auto* l = std::get_if<DenseLayer>(&layer)) {
    for (double& x : l->weight().values()) x = rng.gaussian();
    for (double& x : l->bias()) x = rng.gaussian();
  }
}

// Inputs bounded away from zero so ReLU kinks are never straddled by +-eps.
Matrix input_away_from_zero(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix x(rows, cols);
  for (double& v : x.values()) {
    const double mag = rng.uniform(0.1, 1.0);
    v = rng.uniform() < 0.5 ? -mag : mag;
  }
  return x;
}

}  // namespace

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0.0, scale = 1e-12;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  return diff / scale;
}

GradCheckReport gradcheck(Cascade& cascade, const Matrix& x, const Matrix& probe, double eps) {
  cascade.zero_grad();
  cascade.forward(x);
  const Matrix grad_x = cascade.backward(probe);
  GradCheckReport report;
  check_params<Matrix>(cascade, report, eps, [&] { return probe_loss(cascade.apply(x), probe); });
  Matrix xp = x;
  std::vector<double> numeric(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = xp.values()[i];
    xp.values()[i] = saved + eps;
    const double up = probe_loss(cascade.apply(xp), probe);
    xp.values()[i] = saved - eps;
    const double down = probe_loss(cascade.apply(xp), probe);
    xp.values()[i] = saved;
    numeric[i] = (up - down) / (2.0 * eps);
  }
  record(report, "input", grad_x.values(), numeric);
  cascade.zero_grad();
  cascade.clear_cache();
  return report;
}

GradCheckReport gradcheck(Cascade& cascade, const ComplexMatrix& x, const ComplexMatrix& probe,
                          double eps) {
  cascade.zero_grad();
  cascade.forward(x);
  const ComplexMatrix grad_x = cascade.backward(probe);
  GradCheckReport report;
  check_params<ComplexMatrix>(cascade, report, eps,
                              [&] { return probe_loss(cascade.apply(x), probe); });
  for (Matrix ComplexMatrix::*part : {&ComplexMatrix::re, &ComplexMatrix::im}) {
    ComplexMatrix xp = x;
    Matrix& plane = xp.*part;
    std::vector<double> numeric(plane.size());
    for (std::size_t i = 0; i < plane.size(); ++i) {
      const double saved = plane.values()[i];
      plane.values()[i] = saved + eps;
      const double up = probe_loss(cascade.apply(xp), probe);
      plane.values()[i] = saved - eps;
      const double down = probe_loss(cascade.apply(xp), probe);
      plane.values()[i] = saved;
      numeric[i] = (up - down) / (2.0 * eps);
    }
    record(report, part == &ComplexMatrix::re ? "input_re" : "input_im", (grad_x.*part).values(),
           numeric);
  }
  cascade.zero_grad();
  cascade.clear_cache();
  return report;
}

std::vector<GradCheckCase> run_gradcheck_suite(const GradCheckSuiteOptions& options) {
  std::vector<GradCheckCase> out;
  Rng root(options.seed);
  std::uint64_t stream = 0;
  for (const char* kind : {"acdc", "afdf", "dense", "relu", "permutation"}) {
    const std::string name = kind;
    for (std::size_t n : options.sizes) {
      for (std::size_t batch : options.batches) {
        for (std::size_t cfg = 0; cfg < options.configs; ++cfg) {
          Rng rng = root.split(stream++);
          Cascade c;
          if (name == "acdc") c.add(AcdcLayer(n));
          if (name == "afdf") c.add(AfdfLayer(n));
          if (name == "dense") c.add(DenseLayer(n, n));
          if (name == "relu") c.add(ReluLayer(n));
          if (name == "permutation") c.add(random_permutation(n, rng));
          for (auto& layer : c.layers()) randomize_layer(layer, rng);

          GradCheckCase result{name, n, batch, cfg, {}};
          if (name == "afdf") {
            const ComplexMatrix x(rand_gaussian(rng, batch, n, 0, 1),
                                  rand_gaussian(rng, batch, n, 0, 1));
            const ComplexMatrix probe(rand_gaussian(rng, batch, n, 0, 1),
                                      rand_gaussian(rng, batch, n, 0, 1));
            result.report = gradcheck(c, x, probe, options.eps);
          } else {
            const Matrix x = input_away_from_zero(rng, batch, n);
            const Matrix probe = rand_gaussian(rng, batch, c.out_size(), 0, 1);
            result.report = gradcheck(c, x, probe, options.eps);
          }
          out.push_back(std::move(result));
        }
      }
    }
  }
  return out;
}

}  // namespace sell
