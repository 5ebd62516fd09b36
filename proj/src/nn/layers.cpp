#include "supbench/nn/layers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "supbench/core/errors.hpp"

namespace supbench::nn {

using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

namespace {

int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

void require_nchw(const Tensor& x, const char* who) {
  if (x.rank() != 4) {
    throw ValidationError(std::string(who) + ": expected (N,C,H,W), got " +
                                x.shape_str());
  }
}

// col is (C*K*K) x (Ho*Wo), row-major.
void im2col(const double* x, int c, int h, int w, int kernel, int stride,
            int pad, double* col) {
  const int ho = conv_out_dim(h, kernel, stride, pad);
  const int wo = conv_out_dim(w, kernel, stride, pad);
  const int span = ho * wo;
  for (int ch = 0; ch < c; ++ch) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        double* row = col + ((ch * kernel + ki) * kernel + kj) * span;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ki - pad;
          if (iy < 0 || iy >= h) {
            std::fill(row + oy * wo, row + (oy + 1) * wo, 0.0);
            continue;
          }
          const double* src = x + (ch * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kj - pad;
            row[oy * wo + ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates col back into the (C,H,W) image.
void col2im(const double* col, int c, int h, int w, int kernel, int stride,
            int pad, double* x) {
  const int ho = conv_out_dim(h, kernel, stride, pad);
  const int wo = conv_out_dim(w, kernel, stride, pad);
  const int span = ho * wo;
  std::fill(x, x + static_cast<std::size_t>(c) * h * w, 0.0);
  for (int ch = 0; ch < c; ++ch) {
    for (int ki = 0; ki < kernel; ++ki) {
      for (int kj = 0; kj < kernel; ++kj) {
        const double* row = col + ((ch * kernel + ki) * kernel + kj) * span;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ki - pad;
          if (iy < 0 || iy >= h) continue;
          double* dst = x + (ch * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kj - pad;
            if (ix >= 0 && ix < w) dst[ix] += row[oy * wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace

void Layer::zero_grad() {
  std::vector<ParamRef> params;
  collect_params(params);
  for (auto& p : params) {
    std::fill(p.grad->data.begin(), p.grad->data.end(), 0.0);
  }
}

void init_he_normal(Tensor& w, int fan_in, rng::Stream& stream) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : w.data) v = stream.normal() * stddev;
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride,
               int pad, bool bias, rng::Stream& init)
    : Layer(std::move(name)),
      in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      has_bias_(bias) {
  weight = Tensor({out_ch, in_ch, kernel, kernel});
  weight_grad = zeros_like(weight);
  init_he_normal(weight, in_ch * kernel * kernel, init);
  if (has_bias_) {
    this->bias = Tensor({out_ch});
    bias_grad = zeros_like(this->bias);
  }
}

Tensor Conv2d::forward(const Tensor& x, bool training) {
  (void)training;
  require_nchw(x, "Conv2d");
  if (x.dim(1) != in_ch_) {
    throw ValidationError(name() + ": channel mismatch " + x.shape_str());
  }
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int ho = conv_out_dim(h, kernel_, stride_, pad_);
  const int wo = conv_out_dim(w, kernel_, stride_, pad_);
  const int k2c = in_ch_ * kernel_ * kernel_;
  const int span = ho * wo;
  in_shape_ = x.shape;
  col_ = Tensor({n, k2c, span});

  Tensor out({n, out_ch_, ho, wo});
  ConstMapRM wm(weight.ptr(), out_ch_, k2c);
  for (int s = 0; s < n; ++s) {
    double* col = col_.ptr() + static_cast<std::size_t>(s) * k2c * span;
    im2col(x.ptr() + s * x.sample_stride(), in_ch_, h, w, kernel_, stride_,
           pad_, col);
    MapRM om(out.ptr() + s * out.sample_stride(), out_ch_, span);
    om.noalias() = wm * MapRM(col, k2c, span);
    if (has_bias_) {
      for (int c = 0; c < out_ch_; ++c) om.row(c).array() += bias.data[c];
    }
  }
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out, CamTap* tap) {
  if (tap && tap->want_bias_fields && has_bias_) {
    tap->bias_fields.push_back({name(), bias.data, grad_out});
  }
  const int n = in_shape_[0], h = in_shape_[2], w = in_shape_[3];
  const int ho = grad_out.dim(2), wo = grad_out.dim(3);
  const int k2c = in_ch_ * kernel_ * kernel_;
  const int span = ho * wo;

  Tensor gx(in_shape_);
  MapRM wgm(weight_grad.ptr(), out_ch_, k2c);
  ConstMapRM wm(weight.ptr(), out_ch_, k2c);
  Tensor gcol({k2c, span});
  for (int s = 0; s < n; ++s) {
    ConstMapRM gom(grad_out.ptr() + s * grad_out.sample_stride(), out_ch_,
                   span);
    const double* col = col_.ptr() + static_cast<std::size_t>(s) * k2c * span;
    wgm.noalias() += gom * ConstMapRM(col, k2c, span).transpose();
    if (has_bias_) {
      for (int c = 0; c < out_ch_; ++c) bias_grad.data[c] += gom.row(c).sum();
    }
    MapRM gcm(gcol.ptr(), k2c, span);
    gcm.noalias() = wm.transpose() * gom;
    col2im(gcol.ptr(), in_ch_, h, w, kernel_, stride_, pad_,
           gx.ptr() + s * gx.sample_stride());
  }
  return gx;
}

void Conv2d::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name() + ".weight", &weight, &weight_grad});
  if (has_bias_) out.push_back({name() + ".bias", &bias, &bias_grad});
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(std::string name, int in_ch, int out_ch,
                                 int kernel, int stride, int pad,
                                 rng::Stream& init)
    : Layer(std::move(name)),
      in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      stride_(stride),
      pad_(pad) {
  weight = Tensor({in_ch, out_ch, kernel, kernel});
  weight_grad = zeros_like(weight);
  init_he_normal(weight, in_ch * kernel * kernel, init);
  bias = Tensor({out_ch});
  bias_grad = zeros_like(bias);
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool training) {
  (void)training;
  require_nchw(x, "ConvTranspose2d");
  const int n = x.dim(0), hi = x.dim(2), wi = x.dim(3);
  const int ho = (hi - 1) * stride_ - 2 * pad_ + kernel_;
  const int wo = (wi - 1) * stride_ - 2 * pad_ + kernel_;
  const int k2c = out_ch_ * kernel_ * kernel_;
  const int span = hi * wi;
  input_ = x;

  Tensor out({n, out_ch_, ho, wo});
  // weight viewed as (in_ch, out_ch*k*k); transpose to scatter per input cell.
  ConstMapRM wm(weight.ptr(), in_ch_, k2c);
  Tensor col({k2c, span});
  for (int s = 0; s < n; ++s) {
    ConstMapRM xm(x.ptr() + s * x.sample_stride(), in_ch_, span);
    MapRM cm(col.ptr(), k2c, span);
    cm.noalias() = wm.transpose() * xm;
    double* od = out.ptr() + s * out.sample_stride();
    col2im(col.ptr(), out_ch_, ho, wo, kernel_, stride_, pad_, od);
    for (int c = 0; c < out_ch_; ++c) {
      double* chan = od + static_cast<std::size_t>(c) * ho * wo;
      for (int i = 0; i < ho * wo; ++i) chan[i] += bias.data[c];
    }
  }
  return out;
}

Tensor ConvTranspose2d::backward(const Tensor& grad_out, CamTap* tap) {
  if (tap && tap->want_bias_fields) {
    tap->bias_fields.push_back({name(), bias.data, grad_out});
  }
  const int n = input_.dim(0), hi = input_.dim(2), wi = input_.dim(3);
  const int k2c = out_ch_ * kernel_ * kernel_;
  const int span = hi * wi;
  const int ho = grad_out.dim(2), wo = grad_out.dim(3);

  Tensor gx(input_.shape);
  Tensor gcol({k2c, span});
  ConstMapRM wm(weight.ptr(), in_ch_, k2c);
  MapRM wgm(weight_grad.ptr(), in_ch_, k2c);
  for (int s = 0; s < n; ++s) {
    const double* god = grad_out.ptr() + s * grad_out.sample_stride();
    im2col(god, out_ch_, ho, wo, kernel_, stride_, pad_, gcol.ptr());
    ConstMapRM gcm(gcol.ptr(), k2c, span);
    ConstMapRM xm(input_.ptr() + s * input_.sample_stride(), in_ch_, span);
    wgm.noalias() += xm * gcm.transpose();
    MapRM gxm(gx.ptr() + s * gx.sample_stride(), in_ch_, span);
    gxm.noalias() = wm * gcm;
    for (int c = 0; c < out_ch_; ++c) {
      const double* chan = god + static_cast<std::size_t>(c) * ho * wo;
      double acc = 0.0;
      for (int i = 0; i < ho * wo; ++i) acc += chan[i];
      bias_grad.data[c] += acc;
    }
  }
  return gx;
}

void ConvTranspose2d::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name() + ".weight", &weight, &weight_grad});
  out.push_back({name() + ".bias", &bias, &bias_grad});
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(std::string name, int channels, double momentum,
                         double eps)
    : Layer(std::move(name)), channels_(channels), momentum_(momentum),
      eps_(eps) {
  gamma = Tensor({channels});
  beta = Tensor({channels});
  std::fill(gamma.data.begin(), gamma.data.end(), 1.0);
  gamma_grad = zeros_like(gamma);
  beta_grad = zeros_like(beta);
  running_mean = Tensor({channels});
  running_var = Tensor({channels});
  std::fill(running_var.data.begin(), running_var.data.end(), 1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool training) {
  require_nchw(x, "BatchNorm2d");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int plane = h * w;
  in_shape_ = x.shape;
  last_training_ = training;
  xhat_ = Tensor(x.shape);
  invstd_.assign(c, 0.0);

  Tensor out(x.shape);
  for (int ch = 0; ch < c; ++ch) {
    double mean, var;
    if (training) {
      double sum = 0.0, sq = 0.0;
      for (int s = 0; s < n; ++s) {
        const double* p = x.ptr() + (s * static_cast<std::size_t>(c) + ch) * plane;
        for (int i = 0; i < plane; ++i) {
          sum += p[i];
          sq += p[i] * p[i];
        }
      }
      const double count = static_cast<double>(n) * plane;
      mean = sum / count;
      var = sq / count - mean * mean;
      if (var < 0.0) var = 0.0;
      const double unbiased =
          count > 1.0 ? var * count / (count - 1.0) : var;
      running_mean.data[ch] =
          (1.0 - momentum_) * running_mean.data[ch] + momentum_ * mean;
      running_var.data[ch] =
          (1.0 - momentum_) * running_var.data[ch] + momentum_ * unbiased;
    } else {
      mean = running_mean.data[ch];
      var = running_var.data[ch];
    }
    const double inv = 1.0 / std::sqrt(var + eps_);
    invstd_[ch] = inv;
    const double g = gamma.data[ch], b = beta.data[ch];
    for (int s = 0; s < n; ++s) {
      const std::size_t off = (s * static_cast<std::size_t>(c) + ch) * plane;
      const double* p = x.ptr() + off;
      double* xh = xhat_.ptr() + off;
      double* o = out.ptr() + off;
      for (int i = 0; i < plane; ++i) {
        xh[i] = (p[i] - mean) * inv;
        o[i] = g * xh[i] + b;
      }
    }
  }
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out, CamTap* tap) {
  if (tap && tap->want_bias_fields) {
    // The affine normalization's implicit bias: beta - gamma * mean * invstd.
    CamTap::BiasField field;
    field.layer_name = name();
    field.bias.resize(channels_);
    for (int ch = 0; ch < channels_; ++ch) {
      field.bias[ch] = beta.data[ch] -
                       gamma.data[ch] * running_mean.data[ch] * invstd_[ch];
    }
    field.grad = grad_out;
    tap->bias_fields.push_back(std::move(field));
  }
  const int n = in_shape_[0], c = in_shape_[1], h = in_shape_[2],
            w = in_shape_[3];
  const int plane = h * w;
  const double count = static_cast<double>(n) * plane;
  Tensor gx(in_shape_);
  for (int ch = 0; ch < c; ++ch) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (int s = 0; s < n; ++s) {
      const std::size_t off = (s * static_cast<std::size_t>(c) + ch) * plane;
      const double* g = grad_out.ptr() + off;
      const double* xh = xhat_.ptr() + off;
      for (int i = 0; i < plane; ++i) {
        sum_g += g[i];
        sum_gx += g[i] * xh[i];
      }
    }
    gamma_grad.data[ch] += sum_gx;
    beta_grad.data[ch] += sum_g;
    const double gsc = gamma.data[ch] * invstd_[ch];
    for (int s = 0; s < n; ++s) {
      const std::size_t off = (s * static_cast<std::size_t>(c) + ch) * plane;
      const double* g = grad_out.ptr() + off;
      const double* xh = xhat_.ptr() + off;
      double* o = gx.ptr() + off;
      if (last_training_) {
        for (int i = 0; i < plane; ++i) {
          o[i] = gsc * (g[i] - sum_g / count - xh[i] * sum_gx / count);
        }
      } else {
        for (int i = 0; i < plane; ++i) o[i] = gsc * g[i];
      }
    }
  }
  return gx;
}

void BatchNorm2d::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name() + ".gamma", &gamma, &gamma_grad});
  out.push_back({name() + ".beta", &beta, &beta_grad});
}

void BatchNorm2d::collect_state(std::vector<ParamRef>& out) {
  collect_params(out);
  out.push_back({name() + ".running_mean", &running_mean, nullptr});
  out.push_back({name() + ".running_var", &running_var, nullptr});
}

// ---------------------------------------------------------------------------
// Pointwise layers

Tensor ReLU::forward(const Tensor& x, bool training) {
  (void)training;
  mask_.assign(x.size(), 0);
  Tensor out(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.data[i] > 0.0) {
      out.data[i] = x.data[i];
      mask_[i] = 1;
    }
  }
  return out;
}

Tensor ReLU::backward(const Tensor& grad_out, CamTap* tap) {
  (void)tap;
  Tensor gx(grad_out.shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    gx.data[i] = mask_[i] ? grad_out.data[i] : 0.0;
  }
  return gx;
}

Tensor Sigmoid::forward(const Tensor& x, bool training) {
  (void)training;
  out_ = Tensor(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out_.data[i] = 1.0 / (1.0 + std::exp(-x.data[i]));
  }
  return out_;
}

Tensor Sigmoid::backward(const Tensor& grad_out, CamTap* tap) {
  (void)tap;
  Tensor gx(grad_out.shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    gx.data[i] = grad_out.data[i] * out_.data[i] * (1.0 - out_.data[i]);
  }
  return gx;
}

// ---------------------------------------------------------------------------
// MaxPool2d

MaxPool2d::MaxPool2d(std::string name, int kernel, int stride, int pad)
    : Layer(std::move(name)), kernel_(kernel), stride_(stride), pad_(pad) {}

Tensor MaxPool2d::forward(const Tensor& x, bool training) {
  (void)training;
  require_nchw(x, "MaxPool2d");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int ho = conv_out_dim(h, kernel_, stride_, pad_);
  const int wo = conv_out_dim(w, kernel_, stride_, pad_);
  in_shape_ = x.shape;
  Tensor out({n, c, ho, wo});
  argmax_.assign(out.size(), 0);
  std::size_t oi = 0;
  for (int s = 0; s < n; ++s) {
    for (int ch = 0; ch < c; ++ch) {
      const double* plane =
          x.ptr() + (s * static_cast<std::size_t>(c) + ch) * h * w;
      const std::size_t base = (s * static_cast<std::size_t>(c) + ch) * h * w;
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox, ++oi) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_idx = 0;
          for (int ki = 0; ki < kernel_; ++ki) {
            const int iy = oy * stride_ + ki - pad_;
            if (iy < 0 || iy >= h) continue;
            for (int kj = 0; kj < kernel_; ++kj) {
              const int ix = ox * stride_ + kj - pad_;
              if (ix < 0 || ix >= w) continue;
              const double v = plane[iy * w + ix];
              if (v > best) {
                best = v;
                best_idx = base + static_cast<std::size_t>(iy) * w + ix;
              }
            }
          }
          out.data[oi] = best;
          argmax_[oi] = best_idx;
        }
      }
    }
  }
  return out;
}

Tensor MaxPool2d::backward(const Tensor& grad_out, CamTap* tap) {
  (void)tap;
  Tensor gx(in_shape_);
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    gx.data[argmax_[i]] += grad_out.data[i];
  }
  return gx;
}

// ---------------------------------------------------------------------------
// GlobalAvgPool / Flatten / Reshape

Tensor GlobalAvgPool::forward(const Tensor& x, bool training) {
  (void)training;
  require_nchw(x, "GlobalAvgPool");
  const int n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  in_shape_ = x.shape;
  Tensor out({n, c});
  for (int s = 0; s < n; ++s) {
    for (int ch = 0; ch < c; ++ch) {
      const double* p =
          x.ptr() + (s * static_cast<std::size_t>(c) + ch) * plane;
      double acc = 0.0;
      for (int i = 0; i < plane; ++i) acc += p[i];
      out.data[s * static_cast<std::size_t>(c) + ch] = acc / plane;
    }
  }
  return out;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out, CamTap* tap) {
  (void)tap;
  const int n = in_shape_[0], c = in_shape_[1],
            plane = in_shape_[2] * in_shape_[3];
  Tensor gx(in_shape_);
  for (int s = 0; s < n; ++s) {
    for (int ch = 0; ch < c; ++ch) {
      const double g =
          grad_out.data[s * static_cast<std::size_t>(c) + ch] / plane;
      double* p = gx.ptr() + (s * static_cast<std::size_t>(c) + ch) * plane;
      for (int i = 0; i < plane; ++i) p[i] = g;
    }
  }
  return gx;
}

Tensor Flatten::forward(const Tensor& x, bool training) {
  (void)training;
  in_shape_ = x.shape;
  const int n = x.dim(0);
  return x.reshaped({n, static_cast<int>(x.sample_stride())});
}

Tensor Flatten::backward(const Tensor& grad_out, CamTap* tap) {
  (void)tap;
  return grad_out.reshaped(in_shape_);
}

Reshape::Reshape(std::string name, int c, int h, int w)
    : Layer(std::move(name)), c_(c), h_(h), w_(w) {}

Tensor Reshape::forward(const Tensor& x, bool training) {
  (void)training;
  in_shape_ = x.shape;
  return x.reshaped({x.dim(0), c_, h_, w_});
}

Tensor Reshape::backward(const Tensor& grad_out, CamTap* tap) {
  (void)tap;
  return grad_out.reshaped(in_shape_);
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(std::string name, int in_features, int out_features,
               rng::Stream& init)
    : Layer(std::move(name)), in_f_(in_features), out_f_(out_features) {
  weight = Tensor({out_features, in_features});
  weight_grad = zeros_like(weight);
  init_he_normal(weight, in_features, init);
  bias = Tensor({out_features});
  bias_grad = zeros_like(bias);
}

Tensor Linear::forward(const Tensor& x, bool training) {
  (void)training;
  if (x.rank() != 2 || x.dim(1) != in_f_) {
    throw ValidationError(name() + ": expected (N," +
                                std::to_string(in_f_) + "), got " +
                                x.shape_str());
  }
  input_ = x;
  const int n = x.dim(0);
  Tensor out({n, out_f_});
  ConstMapRM xm(x.ptr(), n, in_f_);
  ConstMapRM wm(weight.ptr(), out_f_, in_f_);
  MapRM om(out.ptr(), n, out_f_);
  om.noalias() = xm * wm.transpose();
  for (int s = 0; s < n; ++s) {
    for (int o = 0; o < out_f_; ++o) out.data[s * out_f_ + o] += bias.data[o];
  }
  return out;
}

Tensor Linear::backward(const Tensor& grad_out, CamTap* tap) {
  (void)tap;
  const int n = input_.dim(0);
  ConstMapRM gm(grad_out.ptr(), n, out_f_);
  ConstMapRM xm(input_.ptr(), n, in_f_);
  MapRM wgm(weight_grad.ptr(), out_f_, in_f_);
  wgm.noalias() += gm.transpose() * xm;
  for (int s = 0; s < n; ++s) {
    for (int o = 0; o < out_f_; ++o) {
      bias_grad.data[o] += grad_out.data[s * out_f_ + o];
    }
  }
  Tensor gx({n, in_f_});
  MapRM gxm(gx.ptr(), n, in_f_);
  ConstMapRM wm(weight.ptr(), out_f_, in_f_);
  gxm.noalias() = gm * wm;
  return gx;
}

void Linear::collect_params(std::vector<ParamRef>& out) {
  out.push_back({name() + ".weight", &weight, &weight_grad});
  out.push_back({name() + ".bias", &bias, &bias_grad});
}

// ---------------------------------------------------------------------------
// Sequential / ResidualBlock

Sequential& Sequential::add(std::unique_ptr<Layer> layer) {
  layers_.push_back(std::move(layer));
  return *this;
}

Tensor Sequential::forward(const Tensor& x, bool training) {
  Tensor cur = x;
  for (auto& l : layers_) cur = l->forward(cur, training);
  return cur;
}

Tensor Sequential::backward(const Tensor& grad_out, CamTap* tap) {
  Tensor cur = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    cur = (*it)->backward(cur, tap);
  }
  return cur;
}

Tensor Sequential::forward_tapped(const Tensor& x, bool training, CamTap& tap) {
  Tensor cur = x;
  for (int i = 0; i < layer_count(); ++i) {
    cur = layers_[i]->forward(cur, training);
    if (i == tap.feature_layer) tap.feature_activations = cur;
  }
  return cur;
}

Tensor Sequential::backward_tapped(const Tensor& grad_out, CamTap& tap) {
  Tensor cur = grad_out;
  for (int i = layer_count() - 1; i >= 0; --i) {
    if (i == tap.feature_layer) tap.feature_gradients = cur;
    cur = layers_[i]->backward(cur, &tap);
  }
  if (tap.want_input_gradient) tap.input_gradient = cur;
  return cur;
}

Tensor Sequential::forward_range(const Tensor& x, int begin, int end) {
  Tensor cur = x;
  for (int i = begin; i < end && i < layer_count(); ++i) {
    cur = layers_[i]->forward(cur, false);
  }
  return cur;
}

void Sequential::collect_params(std::vector<ParamRef>& out) {
  for (auto& l : layers_) l->collect_params(out);
}

void Sequential::collect_state(std::vector<ParamRef>& out) {
  for (auto& l : layers_) l->collect_state(out);
}

ResidualBlock::ResidualBlock(std::string name, std::unique_ptr<Sequential> main,
                             std::unique_ptr<Sequential> shortcut)
    : Layer(std::move(name)), main_(std::move(main)),
      shortcut_(std::move(shortcut)) {}

Tensor ResidualBlock::forward(const Tensor& x, bool training) {
  Tensor m = main_->forward(x, training);
  if (shortcut_) {
    Tensor s = shortcut_->forward(x, training);
    for (std::size_t i = 0; i < m.size(); ++i) m.data[i] += s.data[i];
  } else {
    for (std::size_t i = 0; i < m.size(); ++i) m.data[i] += x.data[i];
  }
  mask_.assign(m.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.data[i] > 0.0) {
      mask_[i] = 1;
    } else {
      m.data[i] = 0.0;
    }
  }
  return m;
}

Tensor ResidualBlock::backward(const Tensor& grad_out, CamTap* tap) {
  Tensor g(grad_out.shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    g.data[i] = mask_[i] ? grad_out.data[i] : 0.0;
  }
  Tensor gx = main_->backward(g, tap);
  if (shortcut_) {
    Tensor gs = shortcut_->backward(g, tap);
    for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += gs.data[i];
  } else {
    for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += g.data[i];
  }
  return gx;
}

void ResidualBlock::collect_params(std::vector<ParamRef>& out) {
  main_->collect_params(out);
  if (shortcut_) shortcut_->collect_params(out);
}

void ResidualBlock::collect_state(std::vector<ParamRef>& out) {
  main_->collect_state(out);
  if (shortcut_) shortcut_->collect_state(out);
}

}  // namespace supbench::nn
