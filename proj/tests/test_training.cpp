#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <limits>
#include <set>

#include "oracles.hpp"
#include "sell/errors.hpp"
#include "sell/gradcheck.hpp"
#include "sell/training.hpp"

using namespace sell;

TEST_CASE("mse loss and gradient") {
  const auto r = mse_loss(Matrix{{1, 2}}, Matrix{{0, 0}});
  CHECK(r.loss == doctest::Approx(2.5));
  CHECK(r.grad == Matrix{{1, 2}});
  CHECK_THROWS_AS(mse_loss(Matrix(1, 2), Matrix(2, 1)), DimensionError);
}

TEST_CASE("complex mse sums real and imaginary parts") {
  const ComplexMatrix p{Matrix{{1, 0}}, Matrix{{0, 2}}};
  const ComplexMatrix t{Matrix{{0, 0}}, Matrix{{0, 0}}};
  CHECK(complex_mse_loss(p, t).loss == doctest::Approx(0.5 + 2.0));
}

TEST_CASE("softmax cross entropy, its gradient and accuracy") {
  const Matrix logits{{0, 0}, {2, 0}};
  const Matrix target{{1, 0}, {0, 1}};
  const auto r = softmax_cross_entropy(logits, target);
  const double p = std::exp(2.0) / (std::exp(2.0) + 1.0);
  CHECK(r.loss == doctest::Approx((std::log(2.0) - std::log(1.0 - p)) / 2.0));
  CHECK(r.grad(0, 0) == doctest::Approx(-0.25));
  CHECK(r.grad(1, 1) == doctest::Approx((1.0 - p - 1.0) / 2.0));
  CHECK(accuracy(Matrix{{3, 1}, {0, 1}, {5, 0}}, Matrix{{1, 0}, {0, 1}, {0, 1}}) ==
        doctest::Approx(2.0 / 3.0));
}

TEST_CASE("cross entropy gradient by finite differences") {
  const Matrix logits{{0.3, -1.2, 0.8}, {2.0, 0.1, -0.4}};
  const Matrix target{{0, 0, 1}, {1, 0, 0}};
  const auto r = softmax_cross_entropy(logits, target);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    Matrix up = logits, dn = logits;
    up.values()[k] += 1e-6;
    dn.values()[k] -= 1e-6;
    const double fd = (softmax_cross_entropy(up, target).loss - softmax_cross_entropy(dn, target).loss) / 2e-6;
    CHECK(r.grad.values()[k] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("sgd step matches a hand-unrolled momentum update") {
  std::vector<double> w{1.0, -2.0}, gw{0.5, 0.25};
  std::vector<double> a{1.0}, ga{0.1};
  std::vector<ParamView> views{{"w", ParamGroup::weight, w, gw}, {"a", ParamGroup::diag_a, a, ga}};
  SgdConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.01;
  SgdState state;

  sgd_step(views, state, cfg, 0);
  // v1 = -0.1 (g + 0.01 w); diagonals carry no weight decay.
  double v0 = -0.1 * (0.5 + 0.01 * 1.0);
  double v1 = -0.1 * (0.25 + 0.01 * -2.0);
  double va = -0.1 * 0.1;
  CHECK(w[0] == doctest::Approx(1.0 + v0));
  CHECK(w[1] == doctest::Approx(-2.0 + v1));
  CHECK(a[0] == doctest::Approx(1.0 + va));
  CHECK(gw[0] == 0.0);
  CHECK(ga[0] == 0.0);

  const double w0 = w[0];
  gw[0] = 0.5;
  sgd_step(views, state, cfg, 1);
  const double v0b = 0.9 * v0 - 0.1 * (0.5 + 0.01 * w0);
  CHECK(w[0] == doctest::Approx(w0 + v0b));
  CHECK(a[0] == doctest::Approx(1.0 + va + 0.9 * va));
}

TEST_CASE("learning rate schedule and group multipliers") {
  SgdConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.lr_decay_factor = 0.1;
  cfg.lr_decay_every = 100;
  cfg.lr_multiplier[static_cast<std::size_t>(ParamGroup::diag_a)] = 24.0;
  CHECK(cfg.effective_lr(0, ParamGroup::weight) == doctest::Approx(0.1));
  CHECK(cfg.effective_lr(99, ParamGroup::weight) == doctest::Approx(0.1));
  CHECK(cfg.effective_lr(100, ParamGroup::weight) == doctest::Approx(0.01));
  CHECK(cfg.effective_lr(250, ParamGroup::diag_a) == doctest::Approx(24.0 * 0.001));
  cfg.weight_decay = 5e-4;
  CHECK(cfg.decay_for(ParamGroup::diag_d) == 0.0);
  CHECK(cfg.decay_for(ParamGroup::bias) == 5e-4);
}

TEST_CASE("initialization schemes") {
  Cascade c = make_acdc_cascade(64, 4);
  Rng rng(1);
  initialize(c, InitScheme::identity_noise(0.1), rng);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : c.params()) {
    if (p.group == ParamGroup::bias) {
      for (double v : p.value) CHECK(v == 0.0);
      continue;
    }
    for (double v : p.value) {
      sum += v;
      ++count;
    }
  }
  CHECK(sum / count == doctest::Approx(1.0).epsilon(0.02));

  initialize(c, InitScheme::zero_mean(1e-3), rng);
  for (const auto& p : c.params()) {
    for (double v : p.value) CHECK(std::abs(v) < 1e-2);
  }
}

TEST_CASE("regression data is deterministic and least squares recovers the operator") {
  const auto a = make_regression(5, 2000, 8, 8, 0.0);
  const auto b = make_regression(5, 2000, 8, 8, 0.0);
  CHECK(a.x == b.x);
  CHECK(a.w_true == b.w_true);
  CHECK(max_abs_diff(least_squares(a.x, a.y), a.w_true) < 1e-8);
  for (double v : a.x.values()) {
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("training a dense layer drives the loss down deterministically") {
  const auto data = make_regression(3, 512, 8, 8, 1e-2);
  auto run = [&] {
    Cascade c;
    c.add(DenseLayer(8, 8));
    Rng rng(1);
    initialize(c, InitScheme::glorot(), rng);
    SgdConfig sgd;
    sgd.learning_rate = 0.05;
    sgd.momentum = 0.9;
    return train(c, data, sgd, {20, 32, 9, {}});
  };
  const auto l1 = run();
  const auto l2 = run();
  REQUIRE(l1.size() == 20);
  CHECK(l1 == l2);
  CHECK(l1.back() < 0.05 * l1.front());
}

TEST_CASE("training edge cases") {
  const auto data = make_regression(1, 64, 4, 4, 0.0);
  Cascade c = make_acdc_cascade(4, 2);
  SgdConfig sgd;
  CHECK(train(c, data, sgd, {0, 16, 1, {}}).empty());
  CHECK_THROWS_AS(train(c, data, sgd, {1, 0, 1, {}}), std::invalid_argument);

  SgdConfig wild;
  wild.learning_rate = 1e6;
  Rng rng(1);
  initialize(c, InitScheme::identity_noise(0.1), rng);
  CHECK_THROWS_AS(train(c, data, wild, {50, 16, 1, {}}), DivergenceError);
}

TEST_CASE("epoch callback sees every epoch") {
  const auto data = make_regression(1, 64, 4, 4, 0.0);
  Cascade c = make_acdc_cascade(4, 1);
  std::vector<std::size_t> seen;
  TrainOptions opts{3, 16, 1, {}};
  opts.on_epoch_end = [&](std::size_t e, double) { seen.push_back(e); };
  train(c, data, SgdConfig{}, opts);
  CHECK(seen == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("shuffled indices form a permutation") {
  Rng rng(3);
  auto idx = shuffled_indices(100, rng);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(idx[i] == i);
}

TEST_CASE("relative error definition") {
  const std::vector<double> a{1.0, 2.0}, n{1.0, 2.0 + 1e-6};
  CHECK(relative_error(a, n) == doctest::Approx(1e-6 / (2.0 + 1e-6)));
  const std::vector<double> z{0.0};
  CHECK(relative_error(z, z) == 0.0);
}

TEST_CASE("gradient suite passes for every layer type") {
  const auto cases = run_gradcheck_suite();
  std::set<std::string> layers;
  for (const auto& c : cases) {
    layers.insert(c.layer);
    CHECK_MESSAGE(c.report.max_rel_error < 1e-5, c.layer << " n=" << c.n << " worst " << c.report.worst_tensor);
  }
  CHECK(layers == std::set<std::string>{"acdc", "afdf", "dense", "permutation", "relu"});
  CHECK(cases.size() == 5 * 3 * 2 * 5);
}
