#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"
#include "supbench/nn/backbone.hpp"
#include "supbench/nn/layers.hpp"
#include "supbench/nn/loss.hpp"
#include "supbench/nn/optim.hpp"

using namespace supbench;
using nn::Tensor;

namespace {

Tensor random_tensor(std::vector<int> shape, rng::Stream& s) {
  Tensor t(std::move(shape));
  for (double& v : t.data) v = s.normal();
  return t;
}

// Scalar objective: 0.5 * sum(y^2); gradient w.r.t. y is y itself.
double half_sq(const Tensor& y) {
  double acc = 0.0;
  for (double v : y.data) acc += 0.5 * v * v;
  return acc;
}

// Central finite differences on layer parameters and input against the
// analytic backward pass, for the objective half_sq(layer(x)).
void check_layer_gradients(nn::Layer& layer, Tensor x, double tol = 1e-6,
                           bool training = true) {
  Tensor y = layer.forward(x, training);
  layer.zero_grad();
  Tensor gx = layer.backward(y /* = d half_sq / d y */, nullptr);

  std::vector<nn::ParamRef> params;
  layer.collect_params(params);

  rng::Stream pick(7, "grad-check-pick");
  const double eps = 1e-5;

  // Relative check with a small absolute floor: finite differences on an
  // O(100) objective carry ~1e-8 absolute noise regardless of gradient size.
  auto close = [&](double analytic, double numeric) {
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    return std::abs(analytic - numeric) < tol * denom + 1e-7;
  };

  auto probe = [&](double* slot, double analytic, const char* what) {
    const double saved = *slot;
    *slot = saved + eps;
    const double up = half_sq(layer.forward(x, training));
    *slot = saved - eps;
    const double down = half_sq(layer.forward(x, training));
    *slot = saved;
    const double numeric = (up - down) / (2.0 * eps);
    INFO(what << " analytic=" << analytic << " numeric=" << numeric);
    CHECK(close(analytic, numeric));
  };

  for (auto& p : params) {
    for (int rep = 0; rep < 4; ++rep) {
      const auto i = static_cast<std::size_t>(pick.uniform_int(
          0, static_cast<std::int64_t>(p.value->size()) - 1));
      probe(&p.value->data[i], p.grad->data[i], p.name.c_str());
    }
  }
  for (int rep = 0; rep < 6; ++rep) {
    const auto i = static_cast<std::size_t>(
        pick.uniform_int(0, static_cast<std::int64_t>(x.size()) - 1));
    // Re-run forward after each probe mutation of x.
    const double saved = x.data[i];
    x.data[i] = saved + eps;
    const double up = half_sq(layer.forward(x, training));
    x.data[i] = saved - eps;
    const double down = half_sq(layer.forward(x, training));
    x.data[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double analytic = gx.data[i];
    INFO("input[" << i << "] analytic=" << analytic << " numeric=" << numeric);
    CHECK(close(analytic, numeric));
  }
}

}  // namespace

TEST_CASE("conv2d matches finite differences") {
  rng::Stream s(11, "conv-test");
  nn::Conv2d conv("conv", 2, 3, 3, 2, 1, true, s);
  check_layer_gradients(conv, random_tensor({2, 2, 7, 6}, s));
}

TEST_CASE("conv transpose matches finite differences and inverts shape") {
  rng::Stream s(12, "deconv-test");
  nn::ConvTranspose2d deconv("deconv", 3, 2, 4, 2, 1, s);
  Tensor x = random_tensor({2, 3, 5, 5}, s);
  Tensor y = deconv.forward(x, true);
  CHECK(y.dim(2) == (5 - 1) * 2 - 2 + 4);  // 10
  check_layer_gradients(deconv, x);
}

TEST_CASE("conv / conv-transpose are shape adjoints") {
  rng::Stream s(13, "adjoint");
  nn::Conv2d conv("c", 4, 6, 3, 2, 1, false, s);
  nn::ConvTranspose2d deconv("d", 6, 4, 3, 2, 1, s);
  Tensor x = random_tensor({1, 4, 16, 16}, s);
  Tensor y = conv.forward(x, false);
  Tensor back = deconv.forward(y, false);
  CHECK(back.dim(1) == 4);
  CHECK(back.dim(2) == 15);  // (8-1)*2 - 2 + 3; stride-2 conv is lossy by 1
}

TEST_CASE("batchnorm matches finite differences in training mode") {
  rng::Stream s(14, "bn-test");
  nn::BatchNorm2d bn("bn", 3);
  check_layer_gradients(bn, random_tensor({4, 3, 5, 5}, s), 1e-5);
}

TEST_CASE("batchnorm eval mode uses running statistics") {
  rng::Stream s(15, "bn-eval");
  nn::BatchNorm2d bn("bn", 2);
  Tensor x = random_tensor({8, 2, 4, 4}, s);
  bn.forward(x, true);
  Tensor a = bn.forward(x, false);
  Tensor b = bn.forward(x, false);
  CHECK(a.data == b.data);  // eval is pure
}

TEST_CASE("maxpool forwards the max and routes gradient to argmax") {
  rng::Stream s(16, "pool-test");
  nn::MaxPool2d pool("pool", 2, 2);
  Tensor x({1, 1, 2, 2});
  x.data = {1.0, 5.0, 3.0, 2.0};
  Tensor y = pool.forward(x, true);
  CHECK(y.size() == 1);
  CHECK(y.data[0] == 5.0);
  Tensor g({1, 1, 1, 1});
  g.data = {2.5};
  Tensor gx = pool.backward(g, nullptr);
  CHECK(gx.data == std::vector<double>{0.0, 2.5, 0.0, 0.0});
  check_layer_gradients(pool, random_tensor({2, 3, 6, 6}, s));
}

TEST_CASE("linear, relu, sigmoid, pools match finite differences") {
  rng::Stream s(17, "misc-test");
  nn::Linear lin("fc", 10, 4, s);
  check_layer_gradients(lin, random_tensor({3, 10}, s));
  nn::ReLU relu("relu");
  check_layer_gradients(relu, random_tensor({2, 2, 3, 3}, s));
  nn::Sigmoid sig("sig");
  check_layer_gradients(sig, random_tensor({2, 8}, s));
  nn::GlobalAvgPool gap("gap");
  check_layer_gradients(gap, random_tensor({2, 3, 4, 4}, s));
}

TEST_CASE("residual block with projection matches finite differences") {
  rng::Stream s(18, "res-test");
  auto main = std::make_unique<nn::Sequential>("main");
  main->add(std::make_unique<nn::Conv2d>("c1", 3, 5, 3, 2, 1, true, s));
  main->add(std::make_unique<nn::ReLU>("r"));
  main->add(std::make_unique<nn::Conv2d>("c2", 5, 5, 3, 1, 1, true, s));
  auto shortcut = std::make_unique<nn::Sequential>("short");
  shortcut->add(std::make_unique<nn::Conv2d>("cs", 3, 5, 1, 2, 0, true, s));
  nn::ResidualBlock block("block", std::move(main), std::move(shortcut));
  check_layer_gradients(block, random_tensor({2, 3, 6, 6}, s));
}

TEST_CASE("bce with logits: value and gradient") {
  Tensor logits({3, 1});
  logits.data = {0.0, 2.0, -1.0};
  const std::vector<double> targets = {1.0, 0.0, 1.0};
  auto res = nn::bce_with_logits(logits, targets, 1.0);
  // Manual: -log(sigmoid(0)) - log(1-sigmoid(2)) - log(sigmoid(-1)), / 3
  const double expected =
      (-std::log(0.5) - std::log(1.0 - 1.0 / (1.0 + std::exp(-2.0))) -
       std::log(1.0 / (1.0 + std::exp(1.0)))) /
      3.0;
  CHECK(res.value == doctest::Approx(expected).epsilon(1e-12));

  // Finite differences on the logits.
  for (int i = 0; i < 3; ++i) {
    const double eps = 1e-6;
    Tensor up = logits, dn = logits;
    up.data[i] += eps;
    dn.data[i] -= eps;
    const double numeric = (nn::bce_with_logits(up, targets, 3.0).value -
                            nn::bce_with_logits(dn, targets, 3.0).value) /
                           (2 * eps);
    auto weighted = nn::bce_with_logits(logits, targets, 3.0);
    CHECK(weighted.grad.data[i] == doctest::Approx(numeric).epsilon(1e-5));
  }
}

TEST_CASE("softmax cross entropy with class weights") {
  Tensor logits({2, 2});
  logits.data = {1.0, -1.0, 0.5, 0.5};
  const std::vector<int> targets = {0, 1};
  const std::vector<double> w = {1.0, 20.0};
  auto res = nn::softmax_cross_entropy(logits, targets, w);
  const double p00 = std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0));
  const double p11 = 0.5;
  const double expected = (1.0 * -std::log(p00) + 20.0 * -std::log(p11)) / 21.0;
  CHECK(res.value == doctest::Approx(expected).epsilon(1e-12));
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double eps = 1e-6;
    Tensor up = logits, dn = logits;
    up.data[i] += eps;
    dn.data[i] -= eps;
    const double numeric = (nn::softmax_cross_entropy(up, targets, w).value -
                            nn::softmax_cross_entropy(dn, targets, w).value) /
                           (2 * eps);
    CHECK(res.grad.data[i] == doctest::Approx(numeric).epsilon(1e-5));
  }
}

TEST_CASE("mse and smooth l1 values and gradients") {
  Tensor a({1, 4}), b({1, 4});
  a.data = {1.0, 2.0, 3.0, 4.0};
  b.data = {1.0, 2.5, 1.0, 4.0};
  auto mse = nn::mse_loss(a, b);
  CHECK(mse.value == doctest::Approx((0.25 + 4.0) / 4.0).epsilon(1e-12));
  CHECK(mse.grad.data[1] == doctest::Approx(2.0 * -0.5 / 4.0));

  auto sl1 = nn::smooth_l1_loss(a, b);
  // |d| = {0, 0.5, 2, 0}: 0 + 0.125 + (2-0.5) + 0 over 4 elements.
  CHECK(sl1.value == doctest::Approx((0.125 + 1.5) / 4.0).epsilon(1e-12));
  CHECK(sl1.grad.data[2] == doctest::Approx(1.0 / 4.0));
  auto ident = nn::mse_loss(a, a);
  CHECK(ident.value == 0.0);
}

TEST_CASE("kl divergence analytic zero and gradients") {
  Tensor mu({2, 3}), logvar({2, 3});
  auto zero = nn::kl_divergence(mu, logvar);
  CHECK(zero.value == 0.0);

  rng::Stream s(19, "kl");
  for (double& v : mu.data) v = s.normal();
  for (double& v : logvar.data) v = 0.5 * s.normal();
  auto res = nn::kl_divergence(mu, logvar);
  CHECK(res.value > 0.0);
  const double eps = 1e-6;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    Tensor up = mu, dn = mu;
    up.data[i] += eps;
    dn.data[i] -= eps;
    const double numeric = (nn::kl_divergence(up, logvar).value -
                            nn::kl_divergence(dn, logvar).value) /
                           (2 * eps);
    CHECK(res.grad_mu.data[i] == doctest::Approx(numeric).epsilon(1e-5));
    Tensor lup = logvar, ldn = logvar;
    lup.data[i] += eps;
    ldn.data[i] -= eps;
    const double lnum = (nn::kl_divergence(mu, lup).value -
                         nn::kl_divergence(mu, ldn).value) /
                        (2 * eps);
    CHECK(res.grad_logvar.data[i] == doctest::Approx(lnum).epsilon(1e-5));
  }
}

TEST_CASE("optimizers: zero learning rate leaves parameters bit-identical") {
  rng::Stream s(20, "opt-test");
  for (auto kind : {nn::OptimizerKind::Adam, nn::OptimizerKind::AdamW,
                    nn::OptimizerKind::Adagrad, nn::OptimizerKind::RmsProp,
                    nn::OptimizerKind::Asgd}) {
    nn::Linear lin("fc", 6, 2, s);
    const std::vector<double> before = lin.weight.data;
    std::vector<nn::ParamRef> params;
    lin.collect_params(params);
    for (auto& p : params) {
      for (double& g : p.grad->data) g = s.normal();
    }
    nn::Optimizer opt(kind, 0.0);
    opt.step(params);
    opt.step(params);
    opt.finalize(params);
    CHECK(lin.weight.data == before);
  }
}

TEST_CASE("optimizers: distinct kinds produce distinct updates") {
  rng::Stream s(21, "opt-diff");
  Tensor grad({4});
  for (double& g : grad.data) g = s.normal();
  std::vector<std::vector<double>> results;
  for (auto kind : {nn::OptimizerKind::Adam, nn::OptimizerKind::AdamW,
                    nn::OptimizerKind::Adagrad, nn::OptimizerKind::RmsProp,
                    nn::OptimizerKind::Asgd}) {
    Tensor value({4});
    value.data = {1.0, -2.0, 3.0, -4.0};
    Tensor g = grad;
    std::vector<nn::ParamRef> params{{"p", &value, &g}};
    nn::Optimizer opt(kind, 0.05);
    opt.step(params);
    opt.step(params);
    results.push_back(value.data);
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      CHECK(results[i] != results[j]);
    }
  }
}

TEST_CASE("optimizer names round-trip and unknown name throws") {
  for (const auto* n : {"adam", "adamw", "adagrad", "rmsprop", "asgd"}) {
    CHECK(nn::optimizer_name(nn::optimizer_from_name(n)) == n);
  }
  CHECK_THROWS_AS(nn::optimizer_from_name("sgdx"), ValidationError);
}

TEST_CASE("backbones: shapes, feature taps, pretrained rejection") {
  CHECK_THROWS_AS(
      nn::build_backbone(nn::BackboneArch::Reduced, true, 1, "bb"),
      ValidationError);

  auto reduced = nn::build_backbone(nn::BackboneArch::Reduced, false, 1, "bb");
  rng::Stream s(22, "bb-input");
  Tensor x = random_tensor({1, 3, 64, 64}, s);
  nn::CamTap tap;
  tap.feature_layer = reduced.feature_layer;
  Tensor y = reduced.body->forward_tapped(x, false, tap);
  CHECK(y.dim(1) == reduced.feature_channels);
  CHECK(y.dim(2) == 64 / reduced.feature_stride);
  CHECK(tap.feature_activations.shape == y.shape);

  auto big = nn::build_backbone(nn::BackboneArch::ResNet50, false, 1, "r50");
  Tensor x2 = random_tensor({1, 3, 64, 64}, s);
  Tensor y2 = big.body->forward(x2, false);
  CHECK(y2.dim(1) == 2048);
  CHECK(y2.dim(2) == 64 / big.feature_stride);
}

TEST_CASE("sequential tap collects feature grads, bias fields, input grad") {
  rng::Stream s(23, "tap-test");
  auto seq = std::make_unique<nn::Sequential>("net");
  seq->add(std::make_unique<nn::Conv2d>("c1", 1, 2, 3, 1, 1, true, s));
  seq->add(std::make_unique<nn::ReLU>("r1"));
  seq->add(std::make_unique<nn::Conv2d>("c2", 2, 2, 3, 1, 1, true, s));

  nn::CamTap tap;
  tap.feature_layer = 2;
  tap.want_bias_fields = true;
  tap.want_input_gradient = true;
  Tensor x = random_tensor({1, 1, 5, 5}, s);
  Tensor y = seq->forward_tapped(x, false, tap);
  Tensor g(y.shape);
  for (double& v : g.data) v = 1.0;
  seq->backward_tapped(g, tap);
  CHECK(tap.feature_activations.shape == y.shape);
  CHECK(tap.feature_gradients.shape == y.shape);
  CHECK(tap.bias_fields.size() == 2);  // both convs have biases
  CHECK(tap.input_gradient.shape == x.shape);
}
