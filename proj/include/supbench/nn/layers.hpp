#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "supbench/core/rng.hpp"
#include "supbench/nn/tensor.hpp"

namespace supbench::nn {

struct ParamRef {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
};

// Harvest point for class-activation mapping. `feature_layer` indexes a layer
// inside the Sequential the tap is passed to; the tap collects that layer's
// output activations (forward) and the gradient of the target w.r.t. that
// output (backward). Conv layers additionally contribute bias receptive
// fields when `want_bias_fields` is set.
struct CamTap {
  int feature_layer = -1;
  bool want_bias_fields = false;
  bool want_input_gradient = false;

  Tensor feature_activations;
  Tensor feature_gradients;

  struct BiasField {
    std::string layer_name;
    std::vector<double> bias;
    Tensor grad;  // gradient at the conv output, same shape as that output
  };
  std::vector<BiasField> bias_fields;
  Tensor input_gradient;
};

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }

  virtual Tensor forward(const Tensor& x, bool training) = 0;
  virtual Tensor backward(const Tensor& grad_out, CamTap* tap) = 0;
  virtual void collect_params(std::vector<ParamRef>& out) { (void)out; }

  // Everything that must survive serialization: parameters plus buffers such
  // as batch-norm running statistics (which carry a null grad pointer).
  virtual void collect_state(std::vector<ParamRef>& out) { collect_params(out); }

  void zero_grad();

 private:
  std::string name_;
};

class Conv2d : public Layer {
 public:
  Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride,
         int pad, bool bias, rng::Stream& init);

  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;
  void collect_params(std::vector<ParamRef>& out) override;

  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }

  Tensor weight;  // (out_ch, in_ch, k, k)
  Tensor bias;    // (out_ch) or empty
  Tensor weight_grad;
  Tensor bias_grad;

 private:
  int in_ch_, out_ch_, kernel_, stride_, pad_;
  bool has_bias_;
  std::vector<int> in_shape_;
  Tensor col_;  // cached im2col of the last forward input
};

class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel,
                  int stride, int pad, rng::Stream& init);

  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;
  void collect_params(std::vector<ParamRef>& out) override;

  Tensor weight;  // (in_ch, out_ch, k, k)
  Tensor bias;    // (out_ch)
  Tensor weight_grad;
  Tensor bias_grad;

 private:
  int in_ch_, out_ch_, kernel_, stride_, pad_;
  Tensor input_;
};

class BatchNorm2d : public Layer {
 public:
  BatchNorm2d(std::string name, int channels, double momentum = 0.1,
              double eps = 1e-5);

  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;
  void collect_params(std::vector<ParamRef>& out) override;
  void collect_state(std::vector<ParamRef>& out) override;

  Tensor gamma, beta, gamma_grad, beta_grad;
  Tensor running_mean, running_var;

 private:
  int channels_;
  double momentum_, eps_;
  Tensor xhat_;
  std::vector<double> invstd_;
  std::vector<int> in_shape_;
  bool last_training_ = false;
};

class ReLU : public Layer {
 public:
  explicit ReLU(std::string name) : Layer(std::move(name)) {}
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;

 private:
  std::vector<unsigned char> mask_;
};

class Sigmoid : public Layer {
 public:
  explicit Sigmoid(std::string name) : Layer(std::move(name)) {}
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;

 private:
  Tensor out_;
};

class MaxPool2d : public Layer {
 public:
  MaxPool2d(std::string name, int kernel, int stride, int pad = 0);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;

 private:
  int kernel_, stride_, pad_;
  std::vector<int> in_shape_;
  std::vector<std::size_t> argmax_;
};

class GlobalAvgPool : public Layer {
 public:
  explicit GlobalAvgPool(std::string name) : Layer(std::move(name)) {}
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;

 private:
  std::vector<int> in_shape_;
};

class Flatten : public Layer {
 public:
  explicit Flatten(std::string name) : Layer(std::move(name)) {}
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;

 private:
  std::vector<int> in_shape_;
};

// (N, D) -> (N, C, H, W) with D == C*H*W.
class Reshape : public Layer {
 public:
  Reshape(std::string name, int c, int h, int w);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;

 private:
  int c_, h_, w_;
  std::vector<int> in_shape_;
};

class Linear : public Layer {
 public:
  Linear(std::string name, int in_features, int out_features,
         rng::Stream& init);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;
  void collect_params(std::vector<ParamRef>& out) override;

  Tensor weight;  // (out, in)
  Tensor bias;    // (out)
  Tensor weight_grad;
  Tensor bias_grad;

 private:
  int in_f_, out_f_;
  Tensor input_;
};

class Sequential : public Layer {
 public:
  explicit Sequential(std::string name) : Layer(std::move(name)) {}

  Sequential& add(std::unique_ptr<Layer> layer);
  int layer_count() const { return static_cast<int>(layers_.size()); }
  Layer& layer(int i) { return *layers_[i]; }

  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;
  void collect_params(std::vector<ParamRef>& out) override;
  void collect_state(std::vector<ParamRef>& out) override;

  // Same as forward/backward but harvesting the tap. `tap.feature_layer`
  // indexes this sequential's direct children.
  Tensor forward_tapped(const Tensor& x, bool training, CamTap& tap);
  Tensor backward_tapped(const Tensor& grad_out, CamTap& tap);

  // Re-run layers [begin, end) on `x` without touching training state.
  // Clobbers layer caches, so only use when no backward pass will follow.
  Tensor forward_range(const Tensor& x, int begin, int end);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Pre-activation input is (main path output + shortcut); ReLU applied after
// the sum, matching the standard residual formulation.
class ResidualBlock : public Layer {
 public:
  ResidualBlock(std::string name, std::unique_ptr<Sequential> main,
                std::unique_ptr<Sequential> shortcut /* may be null */);

  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out, CamTap* tap) override;
  void collect_params(std::vector<ParamRef>& out) override;
  void collect_state(std::vector<ParamRef>& out) override;

 private:
  std::unique_ptr<Sequential> main_;
  std::unique_ptr<Sequential> shortcut_;
  std::vector<unsigned char> mask_;
};

// Weight initialisation: He-normal fan-in scaling for conv/linear weights.
void init_he_normal(Tensor& w, int fan_in, rng::Stream& stream);

}  // namespace supbench::nn
