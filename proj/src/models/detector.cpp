#include "supbench/models/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "supbench/core/errors.hpp"
#include "supbench/core/rng.hpp"
#include "supbench/core/version.hpp"
#include "supbench/models/artifact.hpp"
#include "supbench/nn/backbone.hpp"
#include "supbench/nn/loss.hpp"

namespace supbench::models {

namespace {

constexpr double kAnchorScales[] = {16.0, 32.0, 64.0};
constexpr double kAnchorRatios[] = {0.5, 1.0, 2.0};
constexpr int kAnchorsPerCell = 9;
constexpr double kNmsIou = 0.5;
constexpr int kPreNmsTopN = 200;
constexpr int kPostNmsTopN = 50;
constexpr double kRpnPositiveIou = 0.7;
constexpr double kRpnNegativeIou = 0.3;
constexpr double kRoiPositiveIou = 0.5;
constexpr int kRoiSamplePositives = 16;
constexpr int kRoiSampleTotal = 32;
constexpr int kHeadHidden = 128;
constexpr int kRoiPoolSize = 7;
constexpr int kMaxDetections = 20;
constexpr double kMaxDeltaExp = 4.0;

geom::BoxD clip_box(geom::BoxD b, double w, double h) {
  b.x1 = std::clamp(b.x1, 0.0, w);
  b.y1 = std::clamp(b.y1, 0.0, h);
  b.x2 = std::clamp(b.x2, 0.0, w);
  b.y2 = std::clamp(b.y2, 0.0, h);
  return b;
}

// Indices of `scores` sorted by descending score, index as tiebreak.
std::vector<int> order_by_score(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

struct Proposals {
  std::vector<geom::BoxD> boxes;
  std::vector<double> scores;
};

// Pools the feature region covered by `box` (tile pixels) into C x 7 x 7 max
// values, recording per-cell argmax indices into feat.data for backward.
std::vector<double> roi_pool(const nn::Tensor& feat, const geom::BoxD& box,
                             int stride, std::vector<std::int64_t>& argmax) {
  const int c = feat.shape[1], fh = feat.shape[2], fw = feat.shape[3];
  const double fx1 = box.x1 / stride, fy1 = box.y1 / stride;
  const double fx2 = box.x2 / stride, fy2 = box.y2 / stride;
  const double span_x = fx2 - fx1, span_y = fy2 - fy1;

  std::vector<double> out(static_cast<std::size_t>(c) * kRoiPoolSize *
                          kRoiPoolSize);
  argmax.assign(out.size(), -1);
  for (int j = 0; j < kRoiPoolSize; ++j) {
    int y0 = static_cast<int>(std::floor(fy1 + span_y * j / kRoiPoolSize));
    int y1 = static_cast<int>(std::ceil(fy1 + span_y * (j + 1) / kRoiPoolSize));
    y0 = std::clamp(y0, 0, fh - 1);
    y1 = std::clamp(y1, y0 + 1, fh);
    for (int i = 0; i < kRoiPoolSize; ++i) {
      int x0 = static_cast<int>(std::floor(fx1 + span_x * i / kRoiPoolSize));
      int x1 =
          static_cast<int>(std::ceil(fx1 + span_x * (i + 1) / kRoiPoolSize));
      x0 = std::clamp(x0, 0, fw - 1);
      x1 = std::clamp(x1, x0 + 1, fw);
      for (int ch = 0; ch < c; ++ch) {
        const double* plane =
            feat.data.data() + static_cast<std::size_t>(ch) * fh * fw;
        double best = -std::numeric_limits<double>::infinity();
        std::int64_t best_idx = -1;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) {
            const std::int64_t idx = static_cast<std::int64_t>(y) * fw + x;
            if (plane[idx] > best) {
              best = plane[idx];
              best_idx = static_cast<std::int64_t>(ch) * fh * fw + idx;
            }
          }
        }
        out[(static_cast<std::size_t>(ch) * kRoiPoolSize + j) * kRoiPoolSize +
            i] = best;
        argmax[(static_cast<std::size_t>(ch) * kRoiPoolSize + j) *
                   kRoiPoolSize +
               i] = best_idx;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<int> nms(const std::vector<geom::BoxD>& boxes,
                     const std::vector<double>& scores,
                     double iou_threshold) {
  if (boxes.size() != scores.size()) {
    throw ValidationError("nms: box and score counts differ");
  }
  const std::vector<int> order = order_by_score(scores);
  std::vector<int> kept;
  for (int candidate : order) {
    bool suppressed = false;
    for (int keeper : kept) {
      if (geom::box_iou(boxes[candidate], boxes[keeper]) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

std::array<double, 4> encode_box(const geom::BoxD& target,
                                 const geom::BoxD& reference) {
  const double rw = reference.width(), rh = reference.height();
  const double rcx = reference.x1 + 0.5 * rw, rcy = reference.y1 + 0.5 * rh;
  const double tw = target.width(), th = target.height();
  const double tcx = target.x1 + 0.5 * tw, tcy = target.y1 + 0.5 * th;
  return {(tcx - rcx) / rw, (tcy - rcy) / rh, std::log(tw / rw),
          std::log(th / rh)};
}

geom::BoxD decode_box(const geom::BoxD& reference,
                      const std::array<double, 4>& deltas) {
  const double rw = reference.width(), rh = reference.height();
  const double rcx = reference.x1 + 0.5 * rw, rcy = reference.y1 + 0.5 * rh;
  const double cx = rcx + deltas[0] * rw;
  const double cy = rcy + deltas[1] * rh;
  const double w = rw * std::exp(std::min(deltas[2], kMaxDeltaExp));
  const double h = rh * std::exp(std::min(deltas[3], kMaxDeltaExp));
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

struct Detector::ImagePass {
  nn::Tensor feat;    // (1, C, fh, fw)
  nn::Tensor obj;     // (1, A, fh, fw)
  nn::Tensor delta;   // (1, 4A, fh, fw)
  int fh = 0, fw = 0;
};

Detector::Detector(const BackboneConfig& backbone, const TrainConfig& config)
    : backbone_(backbone), config_(config) {
  validate_train_config(config_);
  nn::Backbone bb = nn::build_backbone(backbone.architecture,
                                       backbone.pretrained, config.rng_seed,
                                       "detector/backbone");
  feature_channels_ = bb.feature_channels;
  feature_stride_ = bb.feature_stride;
  features_.add(std::move(bb.body));

  rng::Stream rpn_init(config.rng_seed, "detector/rpn/init");
  rpn_shared_.add(std::make_unique<nn::Conv2d>(
      "rpn_conv", feature_channels_, feature_channels_, 3, 1, 1, true,
      rpn_init));
  rpn_shared_.add(std::make_unique<nn::ReLU>("rpn_relu"));
  rpn_obj_ = std::make_unique<nn::Conv2d>("rpn_obj", feature_channels_,
                                          kAnchorsPerCell, 1, 1, 0, true,
                                          rpn_init);
  rpn_delta_ = std::make_unique<nn::Conv2d>("rpn_delta", feature_channels_,
                                            4 * kAnchorsPerCell, 1, 1, 0, true,
                                            rpn_init);

  rng::Stream head_init(config.rng_seed, "detector/head/init");
  head_fc_ = std::make_unique<nn::Linear>(
      "head_fc", feature_channels_ * kRoiPoolSize * kRoiPoolSize, kHeadHidden,
      head_init);
  head_relu_ = std::make_unique<nn::ReLU>("head_relu");
  head_cls_ =
      std::make_unique<nn::Linear>("head_cls", kHeadHidden, 2, head_init);
  head_reg_ =
      std::make_unique<nn::Linear>("head_reg", kHeadHidden, 4, head_init);
}

std::vector<nn::ParamRef> Detector::collect_params() {
  std::vector<nn::ParamRef> params;
  features_.collect_params(params);
  rpn_shared_.collect_params(params);
  rpn_obj_->collect_params(params);
  rpn_delta_->collect_params(params);
  head_fc_->collect_params(params);
  head_cls_->collect_params(params);
  head_reg_->collect_params(params);
  return params;
}

std::vector<nn::ParamRef> Detector::collect_state() {
  std::vector<nn::ParamRef> state;
  features_.collect_state(state);
  rpn_shared_.collect_state(state);
  rpn_obj_->collect_state(state);
  rpn_delta_->collect_state(state);
  head_fc_->collect_state(state);
  head_cls_->collect_state(state);
  head_reg_->collect_state(state);
  return state;
}

Detector::ImagePass Detector::forward_image(const nn::Tensor& x,
                                            bool training) {
  ImagePass pass;
  pass.feat = features_.forward(x, training);
  const nn::Tensor hidden = rpn_shared_.forward(pass.feat, training);
  pass.obj = rpn_obj_->forward(hidden, training);
  pass.delta = rpn_delta_->forward(hidden, training);
  pass.fh = pass.feat.shape[2];
  pass.fw = pass.feat.shape[3];
  return pass;
}

std::vector<geom::BoxD> Detector::cell_anchors(int fh, int fw) const {
  std::vector<geom::BoxD> anchors;
  anchors.reserve(static_cast<std::size_t>(fh) * fw * kAnchorsPerCell);
  for (int cy = 0; cy < fh; ++cy) {
    for (int cx = 0; cx < fw; ++cx) {
      const double px = (cx + 0.5) * feature_stride_;
      const double py = (cy + 0.5) * feature_stride_;
      for (double scale : kAnchorScales) {
        for (double ratio : kAnchorRatios) {
          const double w = scale * std::sqrt(ratio);
          const double h = scale / std::sqrt(ratio);
          anchors.push_back(
              {px - 0.5 * w, py - 0.5 * h, px + 0.5 * w, py + 0.5 * h});
        }
      }
    }
  }
  return anchors;
}

namespace {

// Anchor tensors are laid out (1, A*k, fh, fw) with the per-cell anchor index
// in the channel dimension; flat anchor index a = (cy*fw + cx)*9 + cell_a.
inline std::size_t plane_index(int channel, int cy, int cx, int fh, int fw) {
  return (static_cast<std::size_t>(channel) * fh + cy) * fw + cx;
}

struct AnchorCoord {
  int cell_a, cy, cx;
};
inline AnchorCoord anchor_coord(int a, int fw) {
  const int cell = a / kAnchorsPerCell;
  return {a % kAnchorsPerCell, cell / fw, cell % fw};
}

Proposals make_proposals(const std::vector<geom::BoxD>& anchors,
                         const nn::Tensor& obj, const nn::Tensor& delta,
                         int fh, int fw, double tile_w, double tile_h) {
  std::vector<double> scores(anchors.size());
  std::vector<geom::BoxD> boxes(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    const auto [cell_a, cy, cx] = anchor_coord(static_cast<int>(a), fw);
    scores[a] = nn::sigmoid(obj.data[plane_index(cell_a, cy, cx, fh, fw)]);
    const std::array<double, 4> d = {
        delta.data[plane_index(4 * cell_a + 0, cy, cx, fh, fw)],
        delta.data[plane_index(4 * cell_a + 1, cy, cx, fh, fw)],
        delta.data[plane_index(4 * cell_a + 2, cy, cx, fh, fw)],
        delta.data[plane_index(4 * cell_a + 3, cy, cx, fh, fw)]};
    boxes[a] = clip_box(decode_box(anchors[a], d), tile_w, tile_h);
  }

  std::vector<int> order = order_by_score(scores);
  if (static_cast<int>(order.size()) > kPreNmsTopN) order.resize(kPreNmsTopN);
  std::vector<geom::BoxD> cand_boxes;
  std::vector<double> cand_scores;
  for (int idx : order) {
    if (boxes[idx].width() >= 1.0 && boxes[idx].height() >= 1.0) {
      cand_boxes.push_back(boxes[idx]);
      cand_scores.push_back(scores[idx]);
    }
  }
  std::vector<int> kept = nms(cand_boxes, cand_scores, kNmsIou);
  if (static_cast<int>(kept.size()) > kPostNmsTopN) kept.resize(kPostNmsTopN);

  Proposals out;
  for (int idx : kept) {
    out.boxes.push_back(cand_boxes[idx]);
    out.scores.push_back(cand_scores[idx]);
  }
  return out;
}

}  // namespace

TrainLog Detector::train(const dataset::SplitManifest& split,
                         const std::vector<dataset::TileRecord>& tiles) {
  const TileIndex index(tiles);
  const std::vector<std::string> ids = apply_data_fraction(
      split.train, config_.data_fraction, config_.rng_seed);
  const std::vector<const dataset::TileRecord*> data = index.gather(ids);

  const auto step = [this](const std::vector<const dataset::TileRecord*>& batch)
      -> std::vector<std::pair<std::string, double>> {
    features_.zero_grad();
    rpn_shared_.zero_grad();
    rpn_obj_->zero_grad();
    rpn_delta_->zero_grad();
    head_fc_->zero_grad();
    head_cls_->zero_grad();
    head_reg_->zero_grad();

    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double sum_rpn_obj = 0.0, sum_rpn_box = 0.0;
    double sum_cls = 0.0, sum_box = 0.0;

    for (const auto* tile : batch) {
      const nn::Tensor x = tile_to_tensor(*tile);
      const double tile_w = tile->image.width, tile_h = tile->image.height;
      ImagePass pass = forward_image(x, true);
      const std::vector<geom::BoxD> anchors = cell_anchors(pass.fh, pass.fw);
      const std::vector<geom::BoxD>& gts = tile->boxes;

      // --- RPN anchor labels: 1 positive / 0 negative / -1 ignored.
      std::vector<int> label(anchors.size(), 0);
      std::vector<int> best_gt(anchors.size(), -1);
      if (!gts.empty()) {
        std::vector<double> best_anchor_iou(gts.size(), -1.0);
        std::vector<int> best_anchor(gts.size(), -1);
        for (std::size_t a = 0; a < anchors.size(); ++a) {
          double max_iou = 0.0;
          for (std::size_t g = 0; g < gts.size(); ++g) {
            const double iou = geom::box_iou(anchors[a], gts[g]);
            if (iou > max_iou) {
              max_iou = iou;
              best_gt[a] = static_cast<int>(g);
            }
            if (iou > best_anchor_iou[g]) {
              best_anchor_iou[g] = iou;
              best_anchor[g] = static_cast<int>(a);
            }
          }
          if (max_iou >= kRpnPositiveIou) {
            label[a] = 1;
          } else if (max_iou >= kRpnNegativeIou) {
            label[a] = -1;
          }
        }
        for (std::size_t g = 0; g < gts.size(); ++g) {
          if (best_anchor[g] >= 0) {
            label[best_anchor[g]] = 1;
            best_gt[best_anchor[g]] = static_cast<int>(g);
          }
        }
      }

      // --- RPN objectness loss over labeled anchors.
      std::vector<int> labeled;
      int n_pos = 0;
      for (std::size_t a = 0; a < anchors.size(); ++a) {
        if (label[a] >= 0) {
          labeled.push_back(static_cast<int>(a));
          n_pos += label[a];
        }
      }
      nn::Tensor obj_grad = nn::zeros_like(pass.obj);
      if (!labeled.empty()) {
        nn::Tensor gathered({static_cast<int>(labeled.size()), 1});
        std::vector<double> targets(labeled.size());
        for (std::size_t i = 0; i < labeled.size(); ++i) {
          const auto [cell_a, cy, cx] = anchor_coord(labeled[i], pass.fw);
          gathered.data[i] =
              pass.obj.data[plane_index(cell_a, cy, cx, pass.fh, pass.fw)];
          targets[i] = label[labeled[i]];
        }
        const double balance =
            n_pos > 0 ? std::max(1.0, static_cast<double>(labeled.size() -
                                                          n_pos) /
                                          n_pos)
                      : 1.0;
        const nn::LossResult obj_loss =
            nn::bce_with_logits(gathered, targets, balance);
        sum_rpn_obj += obj_loss.value * inv_batch;
        for (std::size_t i = 0; i < labeled.size(); ++i) {
          const auto [cell_a, cy, cx] = anchor_coord(labeled[i], pass.fw);
          obj_grad.data[plane_index(cell_a, cy, cx, pass.fh, pass.fw)] =
              obj_loss.grad.data[i] * inv_batch;
        }
      }

      // --- RPN box regression on positive anchors.
      nn::Tensor delta_grad = nn::zeros_like(pass.delta);
      if (n_pos > 0) {
        std::vector<int> positives;
        for (int a : labeled) {
          if (label[a] == 1) positives.push_back(a);
        }
        nn::Tensor pred({static_cast<int>(positives.size()), 4});
        nn::Tensor target(pred.shape);
        for (std::size_t i = 0; i < positives.size(); ++i) {
          const auto [cell_a, cy, cx] = anchor_coord(positives[i], pass.fw);
          const std::array<double, 4> enc =
              encode_box(gts[best_gt[positives[i]]], anchors[positives[i]]);
          for (int k = 0; k < 4; ++k) {
            pred.data[i * 4 + k] = pass.delta.data[plane_index(
                4 * cell_a + k, cy, cx, pass.fh, pass.fw)];
            target.data[i * 4 + k] = enc[k];
          }
        }
        const nn::LossResult box_loss = nn::smooth_l1_loss(pred, target);
        sum_rpn_box += box_loss.value * inv_batch;
        for (std::size_t i = 0; i < positives.size(); ++i) {
          const auto [cell_a, cy, cx] = anchor_coord(positives[i], pass.fw);
          for (int k = 0; k < 4; ++k) {
            delta_grad.data[plane_index(4 * cell_a + k, cy, cx, pass.fh,
                                        pass.fw)] =
                box_loss.grad.data[i * 4 + k] * inv_batch;
          }
        }
      }

      // --- Stage 2: sample RoIs from proposals plus ground truth.
      Proposals props = make_proposals(anchors, pass.obj, pass.delta, pass.fh,
                                       pass.fw, tile_w, tile_h);
      for (const auto& gt : gts) {
        props.boxes.push_back(gt);
        props.scores.push_back(1.0);
      }

      std::vector<int> roi_pos, roi_neg;
      std::vector<int> roi_best_gt(props.boxes.size(), -1);
      for (std::size_t r = 0; r < props.boxes.size(); ++r) {
        double max_iou = 0.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
          const double iou = geom::box_iou(props.boxes[r], gts[g]);
          if (iou > max_iou) {
            max_iou = iou;
            roi_best_gt[r] = static_cast<int>(g);
          }
        }
        if (max_iou >= kRoiPositiveIou) {
          roi_pos.push_back(static_cast<int>(r));
        } else {
          roi_neg.push_back(static_cast<int>(r));
        }
      }
      if (static_cast<int>(roi_pos.size()) > kRoiSamplePositives) {
        roi_pos.resize(kRoiSamplePositives);
      }
      std::vector<int> rois = roi_pos;
      for (int r : roi_neg) {
        if (static_cast<int>(rois.size()) >= kRoiSampleTotal) break;
        rois.push_back(r);
      }

      nn::Tensor feat_grad = nn::zeros_like(pass.feat);
      if (!rois.empty()) {
        const int n_rois = static_cast<int>(rois.size());
        const int pooled_len =
            feature_channels_ * kRoiPoolSize * kRoiPoolSize;
        nn::Tensor pooled({n_rois, pooled_len});
        std::vector<std::vector<std::int64_t>> argmax(rois.size());
        std::vector<int> cls_target(rois.size());
        for (int i = 0; i < n_rois; ++i) {
          const int r = rois[i];
          const std::vector<double> cell = roi_pool(
              pass.feat, props.boxes[r], feature_stride_, argmax[i]);
          std::copy(cell.begin(), cell.end(),
                    pooled.data.begin() + static_cast<std::size_t>(i) *
                                              pooled_len);
          cls_target[i] =
              std::find(roi_pos.begin(), roi_pos.end(), r) != roi_pos.end()
                  ? 1
                  : 0;
        }

        const nn::Tensor hidden = head_relu_->forward(
            head_fc_->forward(pooled, true), true);
        const nn::Tensor cls_logits = head_cls_->forward(hidden, true);
        const nn::Tensor reg = head_reg_->forward(hidden, true);

        const nn::LossResult cls_loss = nn::softmax_cross_entropy(
            cls_logits, cls_target, {1.0, config_.positive_class_weight});
        sum_cls += cls_loss.value * inv_batch;
        nn::Tensor cls_grad = cls_loss.grad;
        for (double& v : cls_grad.data) v *= inv_batch;

        nn::Tensor reg_grad = nn::zeros_like(reg);
        if (!roi_pos.empty()) {
          nn::Tensor pred({static_cast<int>(roi_pos.size()), 4});
          nn::Tensor target(pred.shape);
          for (std::size_t i = 0; i < roi_pos.size(); ++i) {
            const int r = roi_pos[i];
            const std::array<double, 4> enc =
                encode_box(gts[roi_best_gt[r]], props.boxes[r]);
            for (int k = 0; k < 4; ++k) {
              pred.data[i * 4 + k] = reg.data[i * 4 + k];
              target.data[i * 4 + k] = enc[k];
            }
          }
          const nn::LossResult box_loss = nn::smooth_l1_loss(pred, target);
          sum_box += box_loss.value * inv_batch;
          for (std::size_t i = 0; i < roi_pos.size(); ++i) {
            for (int k = 0; k < 4; ++k) {
              reg_grad.data[i * 4 + k] =
                  box_loss.grad.data[i * 4 + k] * inv_batch;
            }
          }
        }

        nn::Tensor hidden_grad = head_cls_->backward(cls_grad, nullptr);
        const nn::Tensor hidden_grad2 = head_reg_->backward(reg_grad, nullptr);
        for (std::size_t i = 0; i < hidden_grad.data.size(); ++i) {
          hidden_grad.data[i] += hidden_grad2.data[i];
        }
        const nn::Tensor pooled_grad = head_fc_->backward(
            head_relu_->backward(hidden_grad, nullptr), nullptr);
        for (int i = 0; i < n_rois; ++i) {
          for (int k = 0; k < pooled_len; ++k) {
            const std::int64_t src = argmax[i][k];
            if (src >= 0) {
              feat_grad.data[src] +=
                  pooled_grad.data[static_cast<std::size_t>(i) * pooled_len +
                                   k];
            }
          }
        }
      }

      // --- Backward through RPN and backbone.
      nn::Tensor rpn_hidden_grad = rpn_obj_->backward(obj_grad, nullptr);
      const nn::Tensor rpn_hidden_grad2 =
          rpn_delta_->backward(delta_grad, nullptr);
      for (std::size_t i = 0; i < rpn_hidden_grad.data.size(); ++i) {
        rpn_hidden_grad.data[i] += rpn_hidden_grad2.data[i];
      }
      const nn::Tensor feat_grad2 =
          rpn_shared_.backward(rpn_hidden_grad, nullptr);
      for (std::size_t i = 0; i < feat_grad.data.size(); ++i) {
        feat_grad.data[i] += feat_grad2.data[i];
      }
      features_.backward(feat_grad, nullptr);
    }

    const double total = sum_rpn_obj + sum_rpn_box + sum_cls + sum_box;
    return {{"rpn_obj", sum_rpn_obj},
            {"rpn_box", sum_rpn_box},
            {"cls", sum_cls},
            {"box", sum_box},
            {"total", total}};
  };

  return run_training_loop(data, config_, "detector", collect_params(), step);
}

DetectorOutput Detector::predict(const dataset::TileRecord& tile) {
  const nn::Tensor x = tile_to_tensor(tile);
  const double tile_w = tile.image.width, tile_h = tile.image.height;
  ImagePass pass = forward_image(x, false);
  const std::vector<geom::BoxD> anchors = cell_anchors(pass.fh, pass.fw);
  const Proposals props = make_proposals(anchors, pass.obj, pass.delta,
                                         pass.fh, pass.fw, tile_w, tile_h);
  DetectorOutput out;
  if (props.boxes.empty()) return out;

  const int n_rois = static_cast<int>(props.boxes.size());
  const int pooled_len = feature_channels_ * kRoiPoolSize * kRoiPoolSize;
  nn::Tensor pooled({n_rois, pooled_len});
  std::vector<std::int64_t> scratch;
  for (int i = 0; i < n_rois; ++i) {
    const std::vector<double> cell =
        roi_pool(pass.feat, props.boxes[i], feature_stride_, scratch);
    std::copy(cell.begin(), cell.end(),
              pooled.data.begin() + static_cast<std::size_t>(i) * pooled_len);
  }
  const nn::Tensor hidden =
      head_relu_->forward(head_fc_->forward(pooled, false), false);
  const nn::Tensor cls_logits = head_cls_->forward(hidden, false);
  const nn::Tensor reg = head_reg_->forward(hidden, false);
  const nn::Tensor probs = nn::softmax(cls_logits);

  std::vector<geom::BoxD> boxes;
  std::vector<double> scores;
  for (int i = 0; i < n_rois; ++i) {
    const std::array<double, 4> d = {
        reg.data[i * 4 + 0], reg.data[i * 4 + 1], reg.data[i * 4 + 2],
        reg.data[i * 4 + 3]};
    const geom::BoxD refined =
        clip_box(decode_box(props.boxes[i], d), tile_w, tile_h);
    if (refined.valid()) {
      boxes.push_back(refined);
      scores.push_back(probs.data[i * 2 + 1]);
    }
  }
  std::vector<int> kept = nms(boxes, scores, kNmsIou);
  if (static_cast<int>(kept.size()) > kMaxDetections) {
    kept.resize(kMaxDetections);
  }
  for (int idx : kept) {
    out.detections.push_back({boxes[idx], scores[idx]});
    out.presence_score = std::max(out.presence_score, scores[idx]);
  }
  return out;
}

void Detector::save(const std::filesystem::path& path) {
  ArtifactHeader header;
  header.method = Method::Detector;
  header.architecture = backbone_.architecture;
  header.config = config_;
  header.git_describe = kGitDescribe;
  write_artifact(path, header, collect_state(), {});
}

Detector Detector::load(const std::filesystem::path& path) {
  const LoadedArtifact art = read_artifact(path);
  if (art.header.method != Method::Detector) {
    throw ExecutionError("artifact at " + path.string() + " is a " +
                         method_name(art.header.method) +
                         " model, not a detector");
  }
  BackboneConfig backbone;
  backbone.architecture = art.header.architecture;
  Detector model(backbone, art.header.config);
  load_state(art, model.collect_state());
  return model;
}

}  // namespace supbench::models
