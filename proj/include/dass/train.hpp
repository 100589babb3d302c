#pragma once

#include <functional>
#include <optional>

#include <json.hpp>

#include "dass/losses.hpp"
#include "dass/model.hpp"
#include "dass/optim.hpp"
#include "dass/pipeline.hpp"

namespace dass {

struct TrainConfig {
  int batch_size = 8;
  int epochs = 200;
  double lr = 0.002;
  double weight_decay = 0.001;
  double momentum = 0.9;  // Adam first-moment decay
  double w_seg = 1.5;
  double w_det = 1.0;
  std::uint64_t seed = 0;
  int eval_every = 0;  // epochs between evaluations; 0 = final only
  Eigen::Index points_per_scene = 2048;
  AugmentPolicy augment;         // scheme (1), both views
  bool gt_augment = true;        // scheme (2), detection views only
  int gt_augment_max = 2;
  double fov_half_angle_deg = 45.0;
  bool assert_linearity = false;  // debug: check Eq. 1 gradient linearity
  Eigen::VectorXd class_weights;  // empty = uniform

  void validate() const;
};

// A preprocessed minibatch ready for the network: stacked valid rows plus
// per-scene annotations aligned with those rows.
struct PreparedBatch {
  BatchInput input;
  std::vector<std::int32_t> labels;            // seg batches
  std::vector<std::vector<LabeledBox>> boxes;  // det batches, per scene
};

// Augment -> FOV crop -> fixed-size sample -> reflectance normalization,
// deterministic in (seed). For det views the box bank, when given, drives
// ground-truth box implanting before the rigid augmentation.
PreparedBatch prepare_batch(const std::vector<const PartialView*>& views,
                            const TrainConfig& cfg, std::uint64_t seed,
                            const std::vector<BankEntry>* bank);

// Stacks per-scene detection targets for the batch rows.
DetTargets batch_det_targets(const BatchInput& input,
                             const std::vector<std::vector<LabeledBox>>& boxes,
                             const BoxCodecConfig& codec);

struct StepMetrics {
  double loss_seg = 0;
  double loss_det = 0;
  double loss_total = 0;
  double seg_acc = 0;
  DetLossParts det_parts;
  double lr = 0;
};

// One multitask update: forward/backward on the seg minibatch, then on the
// det minibatch (when present), gradients accumulated as w_seg*g_seg +
// w_det*g_det, a single optimizer step. Throws NumericalError on a
// non-finite loss.
StepMetrics multitask_step(DassModel& model, const PreparedBatch& seg_batch,
                           const PreparedBatch* det_batch,
                           const TrainConfig& cfg, Adam& opt, double lr,
                           std::uint64_t sample_seed);

using MetricSink = std::function<void(const nlohmann::json&)>;
using Evaluator = std::function<nlohmann::json(DassModel&)>;

struct TrainResult {
  int epochs_run = 0;
  long global_step = 0;
  nlohmann::json final_eval;
};

// Epochs iterate the seg view once (batch_size scenes per step) while the
// det view cycles with per-cycle reshuffles. Deterministic in cfg.seed; all
// per-step randomness is derived statelessly from (seed, epoch, index), so a
// resumed run continues exactly where the checkpoint left off.
// end_epoch < 0 runs through cfg.epochs; a smaller value stops early while
// keeping the schedule horizon of the full run (interrupted-run semantics).
TrainResult train_loop(DassModel& model, Adam& opt,
                       const std::vector<PartialView>& seg_train,
                       const std::vector<PartialView>& det_train,
                       const TrainConfig& cfg, int start_epoch,
                       const MetricSink& sink, const Evaluator& evaluator,
                       int end_epoch = -1);

// Full training checkpoint: model parameters, Adam moments, epoch counter
// and the derivation seeds for the loop's random streams.
void save_train_checkpoint(const std::filesystem::path& path,
                           const DassModel& model, const Adam& opt,
                           int next_epoch, long global_step,
                           const nlohmann::json& run_config_echo);
struct LoadedCheckpoint {
  DassModel model;
  Adam opt;
  int next_epoch = 0;
  long global_step = 0;
  nlohmann::json run_config_echo;
};
LoadedCheckpoint load_train_checkpoint(const std::filesystem::path& path);

}  // namespace dass
