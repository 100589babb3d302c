#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dass/model.hpp"
#include "dass/synth.hpp"
#include "dass/types.hpp"

namespace dass {

// K x K counts, rows = ground truth, cols = prediction. Negative labels
// (ignore) are skipped on either side.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes)
      : counts_(Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(
            num_classes, num_classes)) {}

  void add(std::int32_t gt, std::int32_t pred);
  void merge(const ConfusionMatrix& other) { counts_ += other.counts_; }
  std::int64_t at(int gt, int pred) const { return counts_(gt, pred); }
  std::int64_t total() const { return counts_.sum(); }
  int num_classes() const { return static_cast<int>(counts_.rows()); }
  const auto& raw() const { return counts_; }

 private:
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts_;
};

struct MiouResult {
  Eigen::VectorXd per_class;        // IoU_c = TP/(TP+FP+FN)
  std::vector<std::uint8_t> valid;  // classes with TP+FP+FN > 0
  double mean = 0;                  // over valid classes only
};
MiouResult miou(const ConfusionMatrix& conf);

struct ProposalSet {
  std::vector<Box7> boxes;
  std::vector<double> scores;               // descending
  std::vector<Eigen::Index> point_indices;  // provenance
};

// One proposal per point: decoded box plus sigmoid objectness, sorted by
// descending score.
ProposalSet proposals_from_channels(const Mat& xyz, const Mat& det_rows,
                                    const BoxCodecConfig& codec);

struct ProposalConfig {
  int top_n = 256;             // raw pool by objectness (9000 at paper scale)
  int final_m = 32;            // final proposal count (100 at paper scale)
  double nms_threshold = 0.8;
  double near_fraction = 0.7;  // quota of the pool drawn from the near range
  double near_boundary = 5.0;  // forward distance split in meters
};

// top-N by score, near/far quota split on forward distance, NMS, top-M.
ProposalSet select_proposals(const ProposalSet& raw, const ProposalConfig& cfg);

struct RecallResult {
  std::vector<double> thresholds;
  std::vector<double> recall;  // same length; empty when no gt boxes exist
  int num_gt = 0;
  bool defined() const { return num_gt > 0; }
};

// A gt box is recalled at threshold t iff some proposal overlaps it with
// IoU >= t (many-to-one matching). use_3d switches BEV IoU for volumetric.
RecallResult recall_at_iou(const std::vector<Box7>& proposals,
                           const std::vector<Box7>& gt_boxes,
                           const std::vector<double>& thresholds,
                           bool use_3d = false);

struct EvalConfig {
  std::vector<double> thresholds = {0.1, 0.3, 0.5, 0.7, 0.9};
  ProposalConfig proposals;
  bool recall_3d = false;  // additionally log a volumetric-IoU recall curve
  Eigen::Index points_per_scene = 2048;
  double fov_half_angle_deg = 45.0;
  std::uint64_t seed = 0;
  int batch_scenes = 8;
};

struct EvalReport {
  std::vector<std::string> class_names;
  Eigen::VectorXd per_class_iou;
  std::vector<std::uint8_t> class_valid;
  double miou = 0;
  std::int64_t eval_points = 0;
  std::vector<double> thresholds;
  std::vector<double> recall;     // empty when undefined
  std::vector<double> recall_3d;  // only when requested
  int num_gt_boxes = 0;
  double mean_proposals = 0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

// The measurement protocol: image-FOV segmentation confusion -> mIoU on the
// seg split, proposal generation -> pooled recall on the det split.
EvalReport evaluate_model(DassModel& model, const std::vector<Scene>& seg_test,
                          const std::vector<Scene>& det_test,
                          const ClassTable& classes, const EvalConfig& cfg);

// Deterministic eval-time preprocessing (FOV crop, fixed-size sample,
// reflectance shift); shared by evaluation and inference. Labels and boxes
// may be empty.
struct EvalScene {
  PointCloud cloud;
  std::vector<std::int32_t> labels;
  std::vector<LabeledBox> boxes;
};
EvalScene prepare_eval_scene(const PointCloud& cloud,
                             const std::vector<std::int32_t>& labels,
                             const std::vector<LabeledBox>& boxes,
                             const EvalConfig& cfg, std::uint64_t scene_seed);

}  // namespace dass
