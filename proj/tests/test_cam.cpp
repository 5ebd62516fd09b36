#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "supbench/cam/capture.hpp"
#include "supbench/cam/methods.hpp"
#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"
#include "supbench/nn/layers.hpp"
#include "supbench/nn/tensor.hpp"

using supbench::ExecutionError;
using supbench::ValidationError;
using namespace supbench::cam;
namespace nn = supbench::nn;
namespace rng = supbench::rng;

namespace {

// Small conv classifier head for capture tests: feature layer is the second
// ReLU output (index 3).
struct ToyNet {
  nn::Sequential net{"toy"};
  int feature_layer = 3;

  explicit ToyNet(std::uint64_t seed) {
    rng::Stream init(seed, "toy/init");
    net.add(std::make_unique<nn::Conv2d>("c1", 3, 4, 3, 2, 1, true, init));
    net.add(std::make_unique<nn::ReLU>("r1"));
    net.add(std::make_unique<nn::Conv2d>("c2", 4, 5, 3, 2, 1, true, init));
    net.add(std::make_unique<nn::ReLU>("r2"));
    net.add(std::make_unique<nn::GlobalAvgPool>("gap"));
    net.add(std::make_unique<nn::Flatten>("flat"));
    net.add(std::make_unique<nn::Linear>("fc", 5, 1, init));
  }
};

nn::Tensor random_input(rng::Stream& s, int c, int h, int w) {
  nn::Tensor x({1, c, h, w});
  for (double& v : x.data) v = s.uniform(-1.0, 1.0);
  return x;
}

ActivationCapture make_capture(int channels, int h, int w,
                               const std::vector<double>& acts,
                               const std::vector<double>& grads) {
  ActivationCapture cap;
  cap.activations = nn::Tensor({1, channels, h, w});
  cap.gradients = nn::Tensor({1, channels, h, w});
  cap.activations.data = acts;
  cap.gradients.data = grads;
  return cap;
}

// Power-iteration oracle for the first right singular vector projection.
std::vector<double> eigen_oracle(const std::vector<double>& m, int rows,
                                 int cols) {
  std::vector<double> v(cols, 1.0 / std::sqrt(static_cast<double>(cols)));
  std::vector<double> mv(rows), mtmv(cols);
  for (int it = 0; it < 200; ++it) {
    for (int r = 0; r < rows; ++r) {
      double s = 0.0;
      for (int c = 0; c < cols; ++c) s += m[r * cols + c] * v[c];
      mv[r] = s;
    }
    for (int c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int r = 0; r < rows; ++r) s += m[r * cols + c] * mv[r];
      mtmv[c] = s;
    }
    double norm = 0.0;
    for (double x : mtmv) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (int c = 0; c < cols; ++c) v[c] = mtmv[c] / norm;
  }
  std::vector<double> proj(rows);
  for (int r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < cols; ++c) s += m[r * cols + c] * v[c];
    proj[r] = s;
  }
  double mean = 0.0;
  for (double x : proj) mean += x;
  if (mean < 0.0) {
    for (double& x : proj) x = -x;
  }
  return proj;
}

}  // namespace

TEST_CASE("capture harvests feature shapes and aux fields") {
  ToyNet toy(11);
  rng::Stream data(12, "data");
  const nn::Tensor x = random_input(data, 3, 16, 16);

  const ActivationCapture cap =
      capture(toy.net, toy.feature_layer, x, Target::ClassLogit, true, "t1");
  CHECK(cap.tile_id == "t1");
  // 16 -> conv stride 2 -> 8 -> conv stride 2 -> 4.
  CHECK(cap.activations.shape == std::vector<int>{1, 5, 4, 4});
  CHECK(cap.gradients.shape == std::vector<int>{1, 5, 4, 4});
  CHECK(cap.input_gradient.shape == x.shape);
  CHECK(cap.bias_fields.size() == 2);  // both convs carry biases
  CHECK(cap.bias_fields[0].layer_name == "c2");
  CHECK(cap.bias_fields[1].layer_name == "c1");
  CHECK(nn::all_finite(cap.activations));
  CHECK(nn::all_finite(cap.gradients));

  // Without aux, the heavyweight fields stay empty.
  const ActivationCapture lean =
      capture(toy.net, toy.feature_layer, x, Target::ClassLogit, false);
  CHECK(lean.input.data.empty());
  CHECK(lean.input_gradient.data.empty());
  CHECK(lean.bias_fields.empty());
}

TEST_CASE("capture rejects bad layer index and bad shapes") {
  ToyNet toy(13);
  rng::Stream data(14, "data");
  const nn::Tensor x = random_input(data, 3, 8, 8);
  CHECK_THROWS_AS(capture(toy.net, -1, x, Target::ClassLogit, false),
                  ValidationError);
  CHECK_THROWS_AS(capture(toy.net, 99, x, Target::ClassLogit, false),
                  ValidationError);
  // Reconstruction target's output shape (logit) cannot match the input.
  CHECK_THROWS_AS(
      capture(toy.net, toy.feature_layer, x, Target::ReconstructionError, false),
      ValidationError);
}

TEST_CASE("capture gradient matches central differences on a frozen toy net") {
  ToyNet toy(21);
  rng::Stream data(22, "data");
  const nn::Tensor x = random_input(data, 3, 16, 16);

  ActivationCapture cap =
      capture(toy.net, toy.feature_layer, x, Target::ClassLogit, false);

  const int tail_begin = toy.feature_layer + 1;
  const int tail_end = toy.net.layer_count();
  const double delta = 1e-4;
  rng::Stream pick(23, "pick");
  for (int probe = 0; probe < 8; ++probe) {
    const std::size_t i =
        pick.uniform_int(0, static_cast<int>(cap.activations.size()) - 1);
    nn::Tensor bumped = cap.activations;
    bumped.data[i] += delta;
    const double up =
        toy.net.forward_range(bumped, tail_begin, tail_end).data[0];
    bumped.data[i] -= 2.0 * delta;
    const double down =
        toy.net.forward_range(bumped, tail_begin, tail_end).data[0];
    const double numeric = (up - down) / (2.0 * delta);
    const double analytic = cap.gradients.data[i];
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-10});
    INFO("probe " << i << " analytic=" << analytic << " numeric=" << numeric);
    CHECK(std::abs(analytic - numeric) / denom < 1e-3);
  }
}

TEST_CASE("perfect reconstruction captures zero target and zero gradients") {
  // ReLU on a positive input reproduces it exactly, so MSE target is zero.
  nn::Sequential net("identity");
  net.add(std::make_unique<nn::ReLU>("r1"));
  net.add(std::make_unique<nn::ReLU>("r2"));
  rng::Stream data(31, "data");
  nn::Tensor x({1, 3, 6, 6});
  for (double& v : x.data) v = data.uniform(0.5, 2.0);

  const ActivationCapture cap =
      capture(net, 0, x, Target::ReconstructionError, false);
  CHECK(cap.target_value == 0.0);
  for (double g : cap.gradients.data) CHECK(g == 0.0);
}

TEST_CASE("gradcam hand case: unit weight reproduces the activation") {
  const auto cap = make_capture(1, 2, 2, {1.0, 0.0, 0.0, 0.0},
                                {1.0, 1.0, 1.0, 1.0});
  const RawMap raw = compute_cam(cap, CamMethod::GradCam);
  REQUIRE(raw.values.size() == 4);
  CHECK(raw.values[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(raw.values[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(raw.values[2] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(raw.values[3] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("zero gradients blank the gradient-driven methods") {
  rng::Stream s(41, "acts");
  std::vector<double> acts(2 * 3 * 3);
  for (double& a : acts) a = s.uniform(-1.0, 1.0);
  const auto cap = make_capture(2, 3, 3, acts, std::vector<double>(acts.size()));
  for (CamMethod m : {CamMethod::GradCam, CamMethod::HiResCam,
                      CamMethod::EigenGradCam, CamMethod::GradCamPp}) {
    const RawMap raw = compute_cam(cap, m);
    for (double v : raw.values) CHECK(v == 0.0);
  }
}

TEST_CASE("hirescam equals gradcam under spatially constant gradients") {
  rng::Stream s(42, "fixtures");
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 1 + s.uniform_int(0, 3);
    const int h = 2 + s.uniform_int(0, 3);
    const int w = 2 + s.uniform_int(0, 3);
    std::vector<double> acts(static_cast<std::size_t>(c) * h * w);
    std::vector<double> grads(acts.size());
    for (double& a : acts) a = s.uniform(-2.0, 2.0);
    for (int k = 0; k < c; ++k) {
      const double g = s.uniform(-1.5, 1.5);
      for (int i = 0; i < h * w; ++i) grads[k * h * w + i] = g;
    }
    const auto cap = make_capture(c, h, w, acts, grads);
    const RawMap a = compute_cam(cap, CamMethod::GradCam);
    const RawMap b = compute_cam(cap, CamMethod::HiResCam);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("relu-backed methods never go negative pre-normalization") {
  rng::Stream s(43, "fixtures");
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> acts(4 * 5 * 5), grads(4 * 5 * 5);
    for (double& a : acts) a = s.uniform(-3.0, 3.0);
    for (double& g : grads) g = s.uniform(-3.0, 3.0);
    const auto cap = make_capture(4, 5, 5, acts, grads);
    for (CamMethod m :
         {CamMethod::GradCam, CamMethod::HiResCam, CamMethod::GradCamPp}) {
      const RawMap raw = compute_cam(cap, m);
      for (double v : raw.values) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("eigencam matches a power-iteration oracle") {
  rng::Stream s(44, "fixtures");
  const int c = 3, h = 4, w = 4;
  std::vector<double> acts(static_cast<std::size_t>(c) * h * w);
  for (double& a : acts) a = s.uniform(-1.0, 1.0);
  const auto cap = make_capture(c, h, w, acts, std::vector<double>(acts.size()));
  const RawMap raw = compute_cam(cap, CamMethod::EigenCam);

  // Oracle expects the (h*w) x C layout.
  std::vector<double> m(static_cast<std::size_t>(h) * w * c);
  for (int k = 0; k < c; ++k) {
    for (int i = 0; i < h * w; ++i) m[i * c + k] = acts[k * h * w + i];
  }
  const std::vector<double> oracle = eigen_oracle(m, h * w, c);
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    CHECK(raw.values[i] == doctest::Approx(oracle[i]).epsilon(1e-6));
  }
}

TEST_CASE("eigencam is invariant to sign flip and channel permutation") {
  rng::Stream s(45, "fixtures");
  const int c = 4, h = 3, w = 5;
  std::vector<double> acts(static_cast<std::size_t>(c) * h * w);
  for (double& a : acts) a = s.uniform(-1.0, 1.0);
  const std::vector<double> zeros(acts.size());

  const RawMap base =
      compute_cam(make_capture(c, h, w, acts, zeros), CamMethod::EigenCam);

  std::vector<double> flipped(acts.size());
  for (std::size_t i = 0; i < acts.size(); ++i) flipped[i] = -acts[i];
  const RawMap flip =
      compute_cam(make_capture(c, h, w, flipped, zeros), CamMethod::EigenCam);

  const int perm[4] = {2, 0, 3, 1};
  std::vector<double> permuted(acts.size());
  for (int k = 0; k < c; ++k) {
    std::copy_n(acts.begin() + perm[k] * h * w, h * w,
                permuted.begin() + k * static_cast<std::size_t>(h) * w);
  }
  const RawMap perm_map =
      compute_cam(make_capture(c, h, w, permuted, zeros), CamMethod::EigenCam);

  for (std::size_t i = 0; i < base.values.size(); ++i) {
    CHECK(flip.values[i] == doctest::Approx(base.values[i]).epsilon(1e-9));
    CHECK(perm_map.values[i] == doctest::Approx(base.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("all six methods yield finite [0,1] heatmaps on live captures") {
  ToyNet toy(51);
  rng::Stream data(52, "data");
  for (int trial = 0; trial < 10; ++trial) {
    const nn::Tensor x = random_input(data, 3, 16, 16);
    const ActivationCapture cap =
        capture(toy.net, toy.feature_layer, x, Target::ClassLogit, true);
    for (CamMethod m : all_cam_methods()) {
      const Heatmap hm = compute_heatmap(cap, m, 20, 20);
      CHECK(hm.width == 20);
      CHECK(hm.height == 20);
      double lo = 1e300, hi = -1e300;
      for (double v : hm.values) {
        CHECK(std::isfinite(v));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(lo >= 0.0);
      CHECK(hi <= 1.0);
    }
  }
}

TEST_CASE("heatmap normalization is scale invariant") {
  rng::Stream s(53, "fixtures");
  RawMap raw{6, 6, std::vector<double>(36)};
  for (double& v : raw.values) v = s.uniform(-2.0, 5.0);
  const Heatmap base = upsample_and_normalize(raw, 12, 12, "gradcam", "t");

  for (double scale : {2.0, 3.7}) {
    RawMap scaled = raw;
    for (double& v : scaled.values) v *= scale;
    const Heatmap hm = upsample_and_normalize(scaled, 12, 12, "gradcam", "t");
    for (std::size_t i = 0; i < hm.values.size(); ++i) {
      CHECK(hm.values[i] == doctest::Approx(base.values[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("upsample corners and degenerate maps behave per contract") {
  // Corner destination pixels clamp to the raw corners, so after min-max the
  // corners carry {0, 0.25, 0.5, 1}.
  RawMap raw{2, 2, {0.0, 2.0, 4.0, 8.0}};
  const Heatmap hm = upsample_and_normalize(raw, 8, 8, "gradcam", "t");
  CHECK(hm.at(0, 0) == doctest::Approx(0.0));
  CHECK(hm.at(7, 0) == doctest::Approx(0.25));
  CHECK(hm.at(0, 7) == doctest::Approx(0.5));
  CHECK(hm.at(7, 7) == doctest::Approx(1.0));

  RawMap flat{3, 3, std::vector<double>(9, 4.2)};
  const Heatmap zero = upsample_and_normalize(flat, 10, 10, "gradcam", "t");
  for (double v : zero.values) CHECK(v == 0.0);

  // A map already at target size spanning [0, 1] passes through unchanged.
  RawMap ident{2, 2, {0.0, 0.25, 0.75, 1.0}};
  const Heatmap same = upsample_and_normalize(ident, 2, 2, "gradcam", "t");
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(same.values[i] == ident.values[i]);
  }
}

TEST_CASE("fullgrad aggregates input and bias components") {
  ToyNet toy(61);
  rng::Stream data(62, "data");
  const nn::Tensor x = random_input(data, 3, 16, 16);
  const ActivationCapture cap =
      capture(toy.net, toy.feature_layer, x, Target::ClassLogit, true);
  const RawMap raw = compute_cam(cap, CamMethod::FullGrad);
  CHECK(raw.width == 16);
  CHECK(raw.height == 16);
  for (double v : raw.values) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    // Input term plus two per-layer terms, each normalized to [0, 1] and
    // summed over at most 5 channels.
    CHECK(v <= 3.0 + 5.0 + 5.0);
  }

  // A capture without aux fields cannot drive fullgrad.
  const ActivationCapture lean =
      capture(toy.net, toy.feature_layer, x, Target::ClassLogit, false);
  CHECK_THROWS_AS(compute_cam(lean, CamMethod::FullGrad), ValidationError);
}

TEST_CASE("batchnorm layers contribute effective-bias fields") {
  rng::Stream init(71, "init");
  nn::Sequential net("bn_net");
  net.add(std::make_unique<nn::Conv2d>("c1", 1, 2, 3, 1, 1, false, init));
  net.add(std::make_unique<nn::BatchNorm2d>("bn", 2));
  net.add(std::make_unique<nn::ReLU>("r"));
  net.add(std::make_unique<nn::GlobalAvgPool>("gap"));
  net.add(std::make_unique<nn::Flatten>("flat"));
  net.add(std::make_unique<nn::Linear>("fc", 2, 1, init));

  auto& bn = dynamic_cast<nn::BatchNorm2d&>(net.layer(1));
  bn.gamma.data = {2.0, 1.0};
  bn.beta.data = {3.0, 0.5};
  bn.running_mean.data = {1.0, -1.0};
  bn.running_var.data = {4.0, 1.0};

  rng::Stream data(72, "data");
  const nn::Tensor x = random_input(data, 1, 8, 8);
  const ActivationCapture cap = capture(net, 2, x, Target::ClassLogit, true);

  const auto it = std::find_if(
      cap.bias_fields.begin(), cap.bias_fields.end(),
      [](const nn::CamTap::BiasField& f) { return f.layer_name == "bn"; });
  REQUIRE(it != cap.bias_fields.end());
  // beta - gamma * mean / sqrt(var + eps)
  CHECK(it->bias[0] == doctest::Approx(3.0 - 2.0 * 1.0 / 2.0).epsilon(1e-5));
  CHECK(it->bias[1] == doctest::Approx(0.5 + 1.0 / 1.0).epsilon(1e-5));
}

TEST_CASE("method names round-trip and unknown names are rejected") {
  for (CamMethod m : all_cam_methods()) {
    CHECK(cam_method_from_name(cam_method_name(m)) == m);
  }
  CHECK(cam_method_name(CamMethod::GradCamPp) == "gradcam_pp");
  CHECK_THROWS_WITH_AS(cam_method_from_name("scorecam"),
                       doctest::Contains("scorecam"), ValidationError);
}

TEST_CASE("non-finite captures are rejected") {
  std::vector<double> acts(4, 1.0), grads(4, 1.0);
  grads[2] = std::nan("");
  const auto cap = make_capture(1, 2, 2, acts, grads);
  CHECK_THROWS_AS(compute_cam(cap, CamMethod::GradCam), ExecutionError);
}
