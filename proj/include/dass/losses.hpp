#pragma once

#include <optional>
#include <vector>

#include "dass/model.hpp"
#include "dass/types.hpp"

namespace dass {

struct LossWeights {
  double w_seg = 1.5;
  double w_det = 1.0;
  Eigen::VectorXd w_classes;  // length num_classes; zero excludes a class

  void validate(int num_classes) const;
};

// w_c = total_points / (num_classes * count_c); zero-count classes get
// weight 0 and are excluded from the loss.
Eigen::VectorXd class_weights_from_frequency(const std::vector<std::int64_t>& counts);
std::vector<std::int64_t> count_labels(const std::vector<PartialView>& views,
                                       int num_classes);

// Weighted cross entropy averaged with the sum of contributing weights.
// Ignore-labeled rows do not contribute. d_logits (optional out) gets the
// gradient of the returned scalar.
double seg_loss(const Mat& logits, const std::vector<std::int32_t>& labels,
                const Eigen::VectorXd& w_classes, Mat* d_logits = nullptr);

// Pointwise classification accuracy over contributing rows.
double seg_accuracy(const Mat& logits, const std::vector<std::int32_t>& labels);

// Per-point regression targets for the detection loss. fg_mask marks points
// inside a ground-truth box whose center offsets fit the codec scope; points
// in several boxes go to the box with the nearest center. objectness marks
// membership in any ground-truth box.
struct DetTargets {
  std::vector<std::uint8_t> fg_mask;
  std::vector<std::uint8_t> objectness;
  std::vector<BinTarget> bins;  // one entry per point; valid where fg_mask
  int out_of_scope = 0;         // in-box points dropped by the codec scope
};

DetTargets det_targets(const Mat& xyz, const std::vector<LabeledBox>& gt_boxes,
                       const BoxCodecConfig& codec);

struct DetLossParts {
  double bin_ce = 0;      // x, z, r bin cross entropies
  double res_l1 = 0;      // x, z, r residual smooth-L1 (normalized units)
  double direct_l1 = 0;   // y, h, w, l smooth-L1
  double objectness = 0;  // class-balanced binary cross entropy
  double eq3 () const { return bin_ce + res_l1 + direct_l1; }
  double total() const { return bin_ce + res_l1 + direct_l1 + objectness; }
};

// Bin-based detection loss: mean over foreground points of the bin CE plus
// smooth-L1 residual terms, plus the objectness term over all points. An
// empty foreground mask zeroes the regression part; objectness still trains.
DetLossParts det_loss(const Mat& det_rows, const DetTargets& targets,
                      const BoxCodecConfig& codec, Mat* d_rows = nullptr);

double smooth_l1(double err, double beta = 1.0);
double smooth_l1_grad(double err, double beta = 1.0);

}  // namespace dass
