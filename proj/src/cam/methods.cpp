#include "supbench/cam/methods.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>

#include "supbench/core/errors.hpp"

namespace supbench::cam {

namespace {

constexpr double kGradCamPpEps = 1e-8;

struct FeatureView {
  const double* activations;
  const double* gradients;
  int channels;
  int height;
  int width;
  int plane;  // height * width
};

FeatureView feature_view(const ActivationCapture& cap) {
  const auto& a = cap.activations;
  const auto& g = cap.gradients;
  if (a.shape.size() != 4 || a.shape[0] != 1) {
    throw ValidationError("compute_cam: expected (1,C,h,w) activations, got " +
                          a.shape_str());
  }
  if (g.shape != a.shape) {
    throw ValidationError("compute_cam: gradient shape " + g.shape_str() +
                          " does not match activation shape " + a.shape_str());
  }
  FeatureView v;
  v.activations = a.data.data();
  v.gradients = g.data.data();
  v.channels = a.shape[1];
  v.height = a.shape[2];
  v.width = a.shape[3];
  v.plane = v.height * v.width;
  return v;
}

void require_finite(const nn::Tensor& t, const std::string& what) {
  if (!nn::all_finite(t)) {
    throw ExecutionError("compute_cam: non-finite values in captured " + what);
  }
}

// (v - min) / (max - min) in place; a constant vector maps to all zeros.
void minmax_normalize(std::vector<double>& v) {
  if (v.empty()) return;
  const auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx == mn) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  const double span = mx - mn;
  for (double& x : v) x = (x - mn) / span;
}

// Bilinear resampling, corner alignment off: destination pixel centers map to
// source coordinate (d + 0.5) * s / d - 0.5, clamped at the borders.
std::vector<double> bilinear_resize(const std::vector<double>& src, int sw,
                                    int sh, int dw, int dh) {
  if (sw == dw && sh == dh) return src;
  std::vector<double> dst(static_cast<std::size_t>(dw) * dh);
  const double sx_scale = static_cast<double>(sw) / dw;
  const double sy_scale = static_cast<double>(sh) / dh;
  std::vector<int> x_lo(dw), x_hi(dw);
  std::vector<double> x_t(dw);
  for (int dx = 0; dx < dw; ++dx) {
    double coord = (dx + 0.5) * sx_scale - 0.5;
    if (coord < 0.0) coord = 0.0;
    int lo = static_cast<int>(coord);
    if (lo > sw - 1) lo = sw - 1;
    x_lo[dx] = lo;
    x_hi[dx] = lo + 1 < sw ? lo + 1 : sw - 1;
    x_t[dx] = coord - lo;
  }
  for (int dy = 0; dy < dh; ++dy) {
    double coord = (dy + 0.5) * sy_scale - 0.5;
    if (coord < 0.0) coord = 0.0;
    int lo = static_cast<int>(coord);
    if (lo > sh - 1) lo = sh - 1;
    const int hi = lo + 1 < sh ? lo + 1 : sh - 1;
    const double t = coord - lo;
    const double* row_lo = src.data() + static_cast<std::size_t>(lo) * sw;
    const double* row_hi = src.data() + static_cast<std::size_t>(hi) * sw;
    double* out = dst.data() + static_cast<std::size_t>(dy) * dw;
    for (int dx = 0; dx < dw; ++dx) {
      const double top =
          (1.0 - x_t[dx]) * row_lo[x_lo[dx]] + x_t[dx] * row_lo[x_hi[dx]];
      const double bot =
          (1.0 - x_t[dx]) * row_hi[x_lo[dx]] + x_t[dx] * row_hi[x_hi[dx]];
      out[dx] = (1.0 - t) * top + t * bot;
    }
  }
  return dst;
}

RawMap grad_cam(const FeatureView& v) {
  RawMap map{v.width, v.height,
             std::vector<double>(static_cast<std::size_t>(v.plane))};
  for (int k = 0; k < v.channels; ++k) {
    const double* g = v.gradients + static_cast<std::size_t>(k) * v.plane;
    const double* a = v.activations + static_cast<std::size_t>(k) * v.plane;
    double w = 0.0;
    for (int i = 0; i < v.plane; ++i) w += g[i];
    w /= v.plane;
    for (int i = 0; i < v.plane; ++i) map.values[i] += w * a[i];
  }
  for (double& x : map.values) x = std::max(x, 0.0);
  return map;
}

RawMap hires_cam(const FeatureView& v) {
  RawMap map{v.width, v.height,
             std::vector<double>(static_cast<std::size_t>(v.plane))};
  for (int k = 0; k < v.channels; ++k) {
    const double* g = v.gradients + static_cast<std::size_t>(k) * v.plane;
    const double* a = v.activations + static_cast<std::size_t>(k) * v.plane;
    for (int i = 0; i < v.plane; ++i) map.values[i] += g[i] * a[i];
  }
  for (double& x : map.values) x = std::max(x, 0.0);
  return map;
}

RawMap grad_cam_pp(const FeatureView& v) {
  RawMap map{v.width, v.height,
             std::vector<double>(static_cast<std::size_t>(v.plane))};
  for (int k = 0; k < v.channels; ++k) {
    const double* g = v.gradients + static_cast<std::size_t>(k) * v.plane;
    const double* a = v.activations + static_cast<std::size_t>(k) * v.plane;
    double act_sum = 0.0;
    for (int i = 0; i < v.plane; ++i) act_sum += a[i];
    double w = 0.0;
    for (int i = 0; i < v.plane; ++i) {
      const double g2 = g[i] * g[i];
      const double alpha = g2 / (2.0 * g2 + act_sum * g2 * g[i] + kGradCamPpEps);
      w += alpha * std::max(g[i], 0.0);
    }
    for (int i = 0; i < v.plane; ++i) map.values[i] += w * a[i];
  }
  for (double& x : map.values) x = std::max(x, 0.0);
  return map;
}

// Projection of the (h*w) x C matrix onto its first right singular vector,
// computed from whichever Gram matrix is smaller; sign chosen so the spatial
// mean is non-negative.
RawMap eigen_projection(const Eigen::MatrixXd& m, int width, int height) {
  const Eigen::Index hw = m.rows(), c = m.cols();
  Eigen::VectorXd proj;
  if (c <= hw) {
    const Eigen::MatrixXd gram = m.transpose() * m;  // C x C
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    proj = m * es.eigenvectors().col(c - 1);
  } else {
    const Eigen::MatrixXd gram = m * m.transpose();  // hw x hw
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const double sigma = std::sqrt(std::max(es.eigenvalues()(hw - 1), 0.0));
    proj = sigma * es.eigenvectors().col(hw - 1);
  }
  if (proj.mean() < 0.0) proj = -proj;
  RawMap map{width, height, std::vector<double>(proj.data(), proj.data() + hw)};
  return map;
}

RawMap eigen_cam(const FeatureView& v) {
  Eigen::MatrixXd m(v.plane, v.channels);
  for (int k = 0; k < v.channels; ++k) {
    const double* a = v.activations + static_cast<std::size_t>(k) * v.plane;
    for (int i = 0; i < v.plane; ++i) m(i, k) = a[i];
  }
  return eigen_projection(m, v.width, v.height);
}

RawMap eigen_grad_cam(const FeatureView& v) {
  Eigen::MatrixXd m(v.plane, v.channels);
  for (int k = 0; k < v.channels; ++k) {
    const double* a = v.activations + static_cast<std::size_t>(k) * v.plane;
    const double* g = v.gradients + static_cast<std::size_t>(k) * v.plane;
    for (int i = 0; i < v.plane; ++i) m(i, k) = g[i] * a[i];
  }
  return eigen_projection(m, v.width, v.height);
}

RawMap full_grad(const ActivationCapture& cap) {
  if (cap.input.shape.size() != 4 || cap.input_gradient.shape != cap.input.shape) {
    throw ValidationError(
        "compute_cam: fullgrad requires a capture taken with auxiliary "
        "bias/input-gradient fields");
  }
  require_finite(cap.input_gradient, "input gradient");
  const int in_ch = cap.input.shape[1];
  const int height = cap.input.shape[2];
  const int width = cap.input.shape[3];
  const int plane = height * width;

  // |input * input-gradient|, min-max normalized over the whole block, then
  // summed over input channels.
  std::vector<double> block(cap.input.data.size());
  for (std::size_t i = 0; i < block.size(); ++i) {
    block[i] = std::abs(cap.input.data[i] * cap.input_gradient.data[i]);
  }
  minmax_normalize(block);
  RawMap map{width, height, std::vector<double>(static_cast<std::size_t>(plane))};
  for (int c = 0; c < in_ch; ++c) {
    const double* src = block.data() + static_cast<std::size_t>(c) * plane;
    for (int i = 0; i < plane; ++i) map.values[i] += src[i];
  }

  // Per biased layer: |bias_k * gradient_k(x, y)|, normalized over the layer's
  // whole C x h x w block, summed over channels, upsampled, accumulated.
  for (const auto& field : cap.bias_fields) {
    const auto& g = field.grad;
    if (g.shape.size() != 4 || g.shape[0] != 1 ||
        g.shape[1] != static_cast<int>(field.bias.size())) {
      throw ValidationError("compute_cam: malformed bias field for layer '" +
                            field.layer_name + "'");
    }
    require_finite(g, "bias gradient of layer '" + field.layer_name + "'");
    const int c = g.shape[1], lh = g.shape[2], lw = g.shape[3];
    const int lplane = lh * lw;
    std::vector<double> layer(g.data.size());
    for (int k = 0; k < c; ++k) {
      const double* gp = g.data.data() + static_cast<std::size_t>(k) * lplane;
      double* lp = layer.data() + static_cast<std::size_t>(k) * lplane;
      for (int i = 0; i < lplane; ++i) lp[i] = std::abs(field.bias[k] * gp[i]);
    }
    minmax_normalize(layer);
    std::vector<double> summed(static_cast<std::size_t>(lplane));
    for (int k = 0; k < c; ++k) {
      const double* lp = layer.data() + static_cast<std::size_t>(k) * lplane;
      for (int i = 0; i < lplane; ++i) summed[i] += lp[i];
    }
    const std::vector<double> up = bilinear_resize(summed, lw, lh, width, height);
    for (int i = 0; i < plane; ++i) map.values[i] += up[i];
  }
  return map;
}

}  // namespace

const std::vector<CamMethod>& all_cam_methods() {
  static const std::vector<CamMethod> methods = {
      CamMethod::GradCam,  CamMethod::GradCamPp, CamMethod::HiResCam,
      CamMethod::FullGrad, CamMethod::EigenCam,  CamMethod::EigenGradCam,
  };
  return methods;
}

std::string cam_method_name(CamMethod m) {
  switch (m) {
    case CamMethod::GradCam: return "gradcam";
    case CamMethod::GradCamPp: return "gradcam_pp";
    case CamMethod::HiResCam: return "hirescam";
    case CamMethod::FullGrad: return "fullgrad";
    case CamMethod::EigenCam: return "eigencam";
    case CamMethod::EigenGradCam: return "eigengradcam";
  }
  throw ValidationError("cam_method_name: invalid method enum value");
}

CamMethod cam_method_from_name(const std::string& name) {
  for (CamMethod m : all_cam_methods()) {
    if (cam_method_name(m) == name) return m;
  }
  std::string valid;
  for (CamMethod m : all_cam_methods()) {
    if (!valid.empty()) valid += ", ";
    valid += cam_method_name(m);
  }
  throw ValidationError("unknown CAM method '" + name + "' (expected one of " +
                        valid + ")");
}

RawMap compute_cam(const ActivationCapture& capture, CamMethod method) {
  require_finite(capture.activations, "activations");
  require_finite(capture.gradients, "gradients");
  const FeatureView v = feature_view(capture);
  switch (method) {
    case CamMethod::GradCam: return grad_cam(v);
    case CamMethod::GradCamPp: return grad_cam_pp(v);
    case CamMethod::HiResCam: return hires_cam(v);
    case CamMethod::FullGrad: return full_grad(capture);
    case CamMethod::EigenCam: return eigen_cam(v);
    case CamMethod::EigenGradCam: return eigen_grad_cam(v);
  }
  throw ValidationError("compute_cam: invalid method enum value");
}

Heatmap upsample_and_normalize(const RawMap& raw, int target_width,
                               int target_height,
                               const std::string& source_method,
                               const std::string& tile_id) {
  if (raw.width <= 0 || raw.height <= 0 ||
      raw.values.size() !=
          static_cast<std::size_t>(raw.width) * raw.height) {
    throw ValidationError("upsample_and_normalize: malformed raw map");
  }
  Heatmap hm;
  hm.width = target_width;
  hm.height = target_height;
  hm.source_method = source_method;
  hm.tile_id = tile_id;
  hm.values = bilinear_resize(raw.values, raw.width, raw.height, target_width,
                              target_height);
  minmax_normalize(hm.values);
  return hm;
}

Heatmap compute_heatmap(const ActivationCapture& capture, CamMethod method,
                        int target_width, int target_height) {
  const RawMap raw = compute_cam(capture, method);
  Heatmap hm = upsample_and_normalize(raw, target_width, target_height,
                                      cam_method_name(method), capture.tile_id);
  return hm;
}

}  // namespace supbench::cam
