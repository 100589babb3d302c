#include "dass/losses.hpp"

#include <cmath>
#include <iostream>

#include "dass/errors.hpp"

namespace dass {

void LossWeights::validate(int num_classes) const {
  if (w_seg <= 0 || w_det < 0)
    throw ConfigError("loss weights: w_seg must be positive, w_det non-negative");
  if (w_classes.size() != num_classes)
    throw ConfigError("loss weights: w_classes length != num_classes");
  for (Eigen::Index i = 0; i < w_classes.size(); ++i)
    if (w_classes[i] < 0) throw ConfigError("loss weights: negative class weight");
}

Eigen::VectorXd class_weights_from_frequency(const std::vector<std::int64_t>& counts) {
  const double k = static_cast<double>(counts.size());
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0)
      w[static_cast<Eigen::Index>(i)] = total / (k * static_cast<double>(counts[i]));
  return w;
}

std::vector<std::int64_t> count_labels(const std::vector<PartialView>& views,
                                       int num_classes) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (const auto& v : views)
    for (std::int32_t label : v.labels)
      if (label >= 0 && label < num_classes) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

namespace {

// Row-wise log-softmax helper returning both the log-probabilities and
// probabilities.
void log_softmax_row(const Eigen::RowVectorXd& logits, Eigen::RowVectorXd* logp,
                     Eigen::RowVectorXd* p) {
  const double m = logits.maxCoeff();
  const Eigen::RowVectorXd shifted = logits.array() - m;
  const double lse = std::log(shifted.array().exp().sum());
  *logp = shifted.array() - lse;
  *p = logp->array().exp();
}

}  // namespace

double seg_loss(const Mat& logits, const std::vector<std::int32_t>& labels,
                const Eigen::VectorXd& w_classes, Mat* d_logits) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    throw DataError("seg_loss: labels/logits row mismatch");
  if (d_logits) d_logits->setZero(logits.rows(), logits.cols());

  double weight_sum = 0;
  double loss_sum = 0;
  std::vector<std::pair<Eigen::Index, double>> contributing;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const std::int32_t label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= logits.cols()) continue;
    const double w = w_classes[label];
    if (w <= 0) continue;
    Eigen::RowVectorXd logp, p;
    log_softmax_row(logits.row(i), &logp, &p);
    loss_sum += -w * logp[label];
    weight_sum += w;
    contributing.emplace_back(i, w);
    if (d_logits) {
      d_logits->row(i) = w * p;
      (*d_logits)(i, label) -= w;
    }
  }
  if (weight_sum == 0) {
    std::cerr << "seg_loss: no contributing points; loss defined as 0\n";
    if (d_logits) d_logits->setZero();
    return 0.0;
  }
  if (d_logits) *d_logits /= weight_sum;
  return loss_sum / weight_sum;
}

double seg_accuracy(const Mat& logits, const std::vector<std::int32_t>& labels) {
  Eigen::Index correct = 0, total = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const std::int32_t label = labels[static_cast<std::size_t>(i)];
    if (label < 0) continue;
    Eigen::Index argmax = 0;
    logits.row(i).maxCoeff(&argmax);
    correct += argmax == label;
    ++total;
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

DetTargets det_targets(const Mat& xyz, const std::vector<LabeledBox>& gt_boxes,
                       const BoxCodecConfig& codec) {
  const Eigen::Index n = xyz.rows();
  DetTargets t;
  t.fg_mask.assign(static_cast<std::size_t>(n), 0);
  t.objectness.assign(static_cast<std::size_t>(n), 0);
  t.bins.resize(static_cast<std::size_t>(n));

  std::vector<std::vector<std::uint8_t>> masks;
  masks.reserve(gt_boxes.size());
  for (const auto& lb : gt_boxes) masks.push_back(points_in_box(xyz, lb.box));

  for (Eigen::Index i = 0; i < n; ++i) {
    int best_box = -1;
    double best_d2 = 1e300;
    for (std::size_t b = 0; b < gt_boxes.size(); ++b) {
      if (!masks[b][static_cast<std::size_t>(i)]) continue;
      t.objectness[static_cast<std::size_t>(i)] = 1;
      const Box7& box = gt_boxes[b].box;
      const double d2 = (Vec3(box.x, box.y, box.z) -
                         Vec3(xyz(i, 0), xyz(i, 1), xyz(i, 2)))
                            .squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_box = static_cast<int>(b);
      }
    }
    if (best_box < 0) continue;
    const Box7& box = gt_boxes[static_cast<std::size_t>(best_box)].box;
    const double dx = box.x - xyz(i, 0);
    const double dz = box.z - xyz(i, 2);
    if (dx < -codec.scope_S || dx >= codec.scope_S || dz < -codec.scope_S ||
        dz >= codec.scope_S) {
      ++t.out_of_scope;
      continue;
    }
    BinTarget& bt = t.bins[static_cast<std::size_t>(i)];
    std::tie(bt.x_bin, bt.x_res) = encode_center(dx, codec);
    std::tie(bt.z_bin, bt.z_res) = encode_center(dz, codec);
    std::tie(bt.r_bin, bt.r_res) = encode_rotation(box.r, codec);
    bt.y_off = box.y - xyz(i, 1);
    bt.hwl_res = {box.h - codec.anchor_hwl[0], box.w - codec.anchor_hwl[1],
                  box.l - codec.anchor_hwl[2]};
    t.fg_mask[static_cast<std::size_t>(i)] = 1;
  }
  return t;
}

double smooth_l1(double err, double beta) {
  const double a = std::abs(err);
  return a < beta ? 0.5 * err * err / beta : a - 0.5 * beta;
}

double smooth_l1_grad(double err, double beta) {
  const double a = std::abs(err);
  return a < beta ? err / beta : (err > 0 ? 1.0 : -1.0);
}

DetLossParts det_loss(const Mat& det_rows, const DetTargets& targets,
                      const BoxCodecConfig& codec, Mat* d_rows) {
  const DetChannels ch = DetChannels::from(codec);
  if (det_rows.cols() != ch.count())
    throw DataError("det_loss: channel count mismatch");
  if (static_cast<Eigen::Index>(targets.fg_mask.size()) != det_rows.rows())
    throw DataError("det_loss: mask/rows mismatch");
  if (d_rows) d_rows->setZero(det_rows.rows(), det_rows.cols());

  DetLossParts parts;
  Eigen::Index n_fg = 0;
  for (std::uint8_t m : targets.fg_mask) n_fg += m;

  const double half_delta = codec.bin_delta / 2;
  const double half_alpha = codec.rot_alpha / 2;

  if (n_fg > 0) {
    const double inv = 1.0 / static_cast<double>(n_fg);
    for (Eigen::Index i = 0; i < det_rows.rows(); ++i) {
      if (!targets.fg_mask[static_cast<std::size_t>(i)]) continue;
      const BinTarget& bt = targets.bins[static_cast<std::size_t>(i)];

      const auto bin_ce = [&](int base, int count, int target_bin) {
        Eigen::RowVectorXd logp, p;
        log_softmax_row(det_rows.row(i).segment(base, count), &logp, &p);
        parts.bin_ce += -inv * logp[target_bin];
        if (d_rows) {
          d_rows->row(i).segment(base, count) += inv * p;
          (*d_rows)(i, base + target_bin) -= inv;
        }
      };
      bin_ce(ch.x_bins(), ch.center_bins, bt.x_bin);
      bin_ce(ch.z_bins(), ch.center_bins, bt.z_bin);
      bin_ce(ch.r_bins(), ch.rot_bins, bt.r_bin);

      const auto res_term = [&](int col, double target, double* bucket) {
        const double err = det_rows(i, col) - target;
        *bucket += inv * smooth_l1(err);
        if (d_rows) (*d_rows)(i, col) += inv * smooth_l1_grad(err);
      };
      res_term(ch.x_res(), bt.x_res / half_delta, &parts.res_l1);
      res_term(ch.z_res(), bt.z_res / half_delta, &parts.res_l1);
      res_term(ch.r_res(), bt.r_res / half_alpha, &parts.res_l1);
      res_term(ch.y_off(), bt.y_off, &parts.direct_l1);
      for (int d = 0; d < 3; ++d)
        res_term(ch.hwl() + d, bt.hwl_res[static_cast<std::size_t>(d)],
                 &parts.direct_l1);
    }
  }

  // Objectness: positives and negatives contribute equally.
  Eigen::Index n_pos = 0;
  for (std::uint8_t o : targets.objectness) n_pos += o;
  const Eigen::Index n_neg = det_rows.rows() - n_pos;
  const double w_pos = n_pos > 0 ? (n_neg > 0 ? 0.5 : 1.0) / static_cast<double>(n_pos) : 0.0;
  const double w_neg = n_neg > 0 ? (n_pos > 0 ? 0.5 : 1.0) / static_cast<double>(n_neg) : 0.0;
  for (Eigen::Index i = 0; i < det_rows.rows(); ++i) {
    const double o = det_rows(i, ch.objectness());
    const double t = targets.objectness[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    const double w = t > 0 ? w_pos : w_neg;
    if (w == 0) continue;
    // Stable BCE-with-logits.
    parts.objectness += w * (std::max(o, 0.0) - o * t + std::log1p(std::exp(-std::abs(o))));
    if (d_rows) {
      const double sig = 1.0 / (1.0 + std::exp(-o));
      (*d_rows)(i, ch.objectness()) += w * (sig - t);
    }
  }
  return parts;
}

}  // namespace dass
