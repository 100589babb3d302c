#include "dass/train.hpp"

#include <cmath>
#include <iostream>

#include "dass/container.hpp"
#include "dass/errors.hpp"

namespace dass {

void TrainConfig::validate() const {
  if (batch_size <= 0 || epochs <= 0 || points_per_scene <= 0)
    throw ConfigError("train: batch_size, epochs and points_per_scene must be positive");
  if (lr <= 0 || weight_decay < 0 || momentum < 0 || momentum >= 1)
    throw ConfigError("train: bad optimizer settings");
  if (w_seg <= 0 || w_det < 0) throw ConfigError("train: bad loss weights");
}

PreparedBatch prepare_batch(const std::vector<const PartialView*>& views,
                            const TrainConfig& cfg, std::uint64_t seed,
                            const std::vector<BankEntry>* bank) {
  PreparedBatch out;
  std::vector<PointCloud> clouds;
  std::vector<std::vector<std::int32_t>> labels;
  clouds.reserve(views.size());

  for (std::size_t i = 0; i < views.size(); ++i) {
    const PartialView& view = *views[i];
    PointCloud cloud = view.cloud;
    std::vector<std::int32_t> scene_labels = view.labels;
    std::vector<LabeledBox> boxes = view.boxes;
    const std::uint64_t scene_seed = mix_seed(seed, static_cast<std::uint64_t>(i));

    if (view.kind == ViewKind::kDetOnly && bank && !bank->empty() && cfg.gt_augment) {
      GtAugmentConfig gcfg;
      gcfg.max_added = cfg.gt_augment_max;
      gt_box_augment(cloud, boxes, nullptr, *bank, mix_seed(scene_seed, 0x6bULL), gcfg);
    }
    augment_scene(cloud, boxes.empty() ? nullptr : &boxes,
                  mix_seed(scene_seed, 0xa6ULL), cfg.augment);

    FovConfig fov;
    fov.half_angle_deg = cfg.fov_half_angle_deg;
    fov_crop(cloud, scene_labels.empty() ? nullptr : &scene_labels, &boxes, fov);
    if (cloud.valid_count == 0) {
      std::cerr << "prepare_batch: scene emptied by FOV crop, skipped\n";
      continue;
    }
    fixed_size_sample(cloud, scene_labels.empty() ? nullptr : &scene_labels,
                      cfg.points_per_scene, mix_seed(scene_seed, 0x5aULL));
    normalize_reflectance(cloud);

    clouds.push_back(std::move(cloud));
    if (!scene_labels.empty())
      scene_labels.resize(static_cast<std::size_t>(clouds.back().valid_count));
    labels.push_back(std::move(scene_labels));
    out.boxes.push_back(std::move(boxes));
  }
  if (clouds.empty()) throw DataError("prepare_batch: no usable scenes in batch");

  std::vector<const PointCloud*> ptrs;
  for (const auto& c : clouds) ptrs.push_back(&c);
  out.input = BatchInput::from_clouds(ptrs);
  for (auto& l : labels) out.labels.insert(out.labels.end(), l.begin(), l.end());
  if (!out.labels.empty() &&
      static_cast<Eigen::Index>(out.labels.size()) != out.input.xyz.rows())
    throw DataError("prepare_batch: label/row mismatch");
  return out;
}

DetTargets batch_det_targets(const BatchInput& input,
                             const std::vector<std::vector<LabeledBox>>& boxes,
                             const BoxCodecConfig& codec) {
  DetTargets all;
  for (Eigen::Index s = 0; s < input.scenes(); ++s) {
    const Eigen::Index lo = input.offsets[static_cast<std::size_t>(s)];
    const Eigen::Index hi = input.offsets[static_cast<std::size_t>(s) + 1];
    const Mat scene_xyz = input.xyz.middleRows(lo, hi - lo);
    DetTargets t = det_targets(scene_xyz, boxes[static_cast<std::size_t>(s)], codec);
    all.fg_mask.insert(all.fg_mask.end(), t.fg_mask.begin(), t.fg_mask.end());
    all.objectness.insert(all.objectness.end(), t.objectness.begin(),
                          t.objectness.end());
    all.bins.insert(all.bins.end(), t.bins.begin(), t.bins.end());
    all.out_of_scope += t.out_of_scope;
  }
  return all;
}

namespace {

Eigen::VectorXd effective_class_weights(const TrainConfig& cfg, int num_classes) {
  if (cfg.class_weights.size() == 0)
    return Eigen::VectorXd::Ones(num_classes);
  if (cfg.class_weights.size() != num_classes)
    throw ConfigError("train: class_weights length != num_classes");
  return cfg.class_weights;
}

std::map<std::string, Mat> snapshot_grads(DassModel& model) {
  std::map<std::string, Mat> grads;
  model.visit_params([&](Parameter& p) {
    if (p.trainable) grads[p.name] = p.grad;
  });
  return grads;
}

std::map<std::string, Mat> snapshot_values(DassModel& model) {
  std::map<std::string, Mat> values;
  model.visit_params([&](Parameter& p) { values[p.name] = p.value; });
  return values;
}

void restore_values(DassModel& model, const std::map<std::string, Mat>& values) {
  model.visit_params([&](Parameter& p) { p.value = values.at(p.name); });
}

}  // namespace

StepMetrics multitask_step(DassModel& model, const PreparedBatch& seg_batch,
                           const PreparedBatch* det_batch,
                           const TrainConfig& cfg, Adam& opt, double lr,
                           std::uint64_t sample_seed) {
  const Eigen::VectorXd w_classes =
      effective_class_weights(cfg, model.cfg.num_classes);
  StepMetrics mt;
  mt.lr = lr;

  const auto run_seg = [&](double scale) {
    const Mat logits =
        model.forward_seg(seg_batch.input, /*train=*/true, mix_seed(sample_seed, 1));
    Mat d_logits;
    mt.loss_seg = seg_loss(logits, seg_batch.labels, w_classes, &d_logits);
    mt.seg_acc = seg_accuracy(logits, seg_batch.labels);
    if (!std::isfinite(mt.loss_seg))
      throw NumericalError("multitask_step: non-finite segmentation loss " +
                           std::to_string(mt.loss_seg));
    model.backward_seg(scale * d_logits);
  };
  const auto run_det = [&](double scale) {
    const Mat det_rows =
        model.forward_det(det_batch->input, /*train=*/true, mix_seed(sample_seed, 2));
    const DetTargets targets =
        batch_det_targets(det_batch->input, det_batch->boxes, model.cfg.codec);
    Mat d_rows;
    mt.det_parts = det_loss(det_rows, targets, model.cfg.codec, &d_rows);
    mt.loss_det = mt.det_parts.total();
    if (!std::isfinite(mt.loss_det))
      throw NumericalError("multitask_step: non-finite detection loss " +
                           std::to_string(mt.loss_det));
    model.backward_det(scale * d_rows);
  };

  const bool with_det = det_batch != nullptr && model.cfg.with_det_head;

  std::map<std::string, Mat> g_seg, g_det;
  if (cfg.assert_linearity) {
    // Probe per-task gradients on untouched state, then restore both weights
    // and normalization statistics before the real accumulation pass.
    const auto values = snapshot_values(model);
    model.zero_grads();
    run_seg(1.0);
    g_seg = snapshot_grads(model);
    restore_values(model, values);
    if (with_det) {
      model.zero_grads();
      run_det(1.0);
      g_det = snapshot_grads(model);
      restore_values(model, values);
    }
  }

  model.zero_grads();
  run_seg(cfg.w_seg);
  if (with_det) run_det(cfg.w_det);
  mt.loss_total = cfg.w_seg * mt.loss_seg + cfg.w_det * mt.loss_det;

  if (cfg.assert_linearity) {
    double max_err = 0;
    model.visit_params([&](Parameter& p) {
      if (!p.trainable) return;
      Mat expected = cfg.w_seg * g_seg.at(p.name);
      if (with_det) expected += cfg.w_det * g_det.at(p.name);
      max_err = std::max(max_err, (p.grad - expected).cwiseAbs().maxCoeff());
    });
    if (max_err > 1e-10)
      throw NumericalError("multitask_step: gradient linearity violated by " +
                           std::to_string(max_err));
  }

  opt.step([&](const ParamVisitor& v) { model.visit_params(v); }, lr);
  return mt;
}

TrainResult train_loop(DassModel& model, Adam& opt,
                       const std::vector<PartialView>& seg_train,
                       const std::vector<PartialView>& det_train,
                       const TrainConfig& cfg, int start_epoch,
                       const MetricSink& sink, const Evaluator& evaluator,
                       int end_epoch) {
  cfg.validate();
  const int stop_epoch =
      end_epoch < 0 ? cfg.epochs : std::min(end_epoch, cfg.epochs);
  if (seg_train.empty()) throw DataError("train_loop: empty segmentation corpus");
  if (model.cfg.with_det_head && det_train.empty())
    throw DataError("train_loop: empty detection corpus for a model with a det head");

  const std::vector<BankEntry> bank =
      cfg.gt_augment && !det_train.empty() ? build_box_bank(det_train)
                                           : std::vector<BankEntry>{};

  const long n_seg = static_cast<long>(seg_train.size());
  const long steps_per_epoch = (n_seg + cfg.batch_size - 1) / cfg.batch_size;
  OneCycleSchedule sched;
  sched.peak = cfg.lr;
  sched.total_steps = steps_per_epoch * cfg.epochs;

  TrainResult result;
  result.global_step = static_cast<long>(start_epoch) * steps_per_epoch;

  // Detection scenes consumed so far; one per seg scene by construction.
  long det_consumed = static_cast<long>(start_epoch) * n_seg;
  long det_cycle = -1;
  std::vector<std::size_t> det_order;
  const auto det_view_at = [&](long consumption_index) -> const PartialView* {
    const long n_det = static_cast<long>(det_train.size());
    const long cycle = consumption_index / n_det;
    if (cycle != det_cycle) {
      det_order.resize(det_train.size());
      std::iota(det_order.begin(), det_order.end(), std::size_t{0});
      Rng rng = make_rng(mix_seed(cfg.seed, 0xde7ULL,
                                  static_cast<std::uint64_t>(cycle)));
      std::shuffle(det_order.begin(), det_order.end(), rng);
      det_cycle = cycle;
    }
    return &det_train[det_order[static_cast<std::size_t>(consumption_index % n_det)]];
  };

  for (int epoch = start_epoch; epoch < stop_epoch; ++epoch) {
    std::vector<std::size_t> seg_order(seg_train.size());
    std::iota(seg_order.begin(), seg_order.end(), std::size_t{0});
    Rng rng = make_rng(mix_seed(cfg.seed, 0x5e9ULL,
                                static_cast<std::uint64_t>(epoch)));
    std::shuffle(seg_order.begin(), seg_order.end(), rng);

    for (long s = 0; s < steps_per_epoch; ++s) {
      const long lo = s * cfg.batch_size;
      const long hi = std::min<long>(lo + cfg.batch_size, n_seg);
      std::vector<const PartialView*> seg_views;
      for (long i = lo; i < hi; ++i)
        seg_views.push_back(&seg_train[seg_order[static_cast<std::size_t>(i)]]);

      const std::uint64_t step_seed =
          mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch),
                   static_cast<std::uint64_t>(s));
      const PreparedBatch seg_batch =
          prepare_batch(seg_views, cfg, mix_seed(step_seed, 1), nullptr);

      std::optional<PreparedBatch> det_batch;
      if (model.cfg.with_det_head && !det_train.empty()) {
        std::vector<const PartialView*> det_views;
        for (long i = lo; i < hi; ++i)
          det_views.push_back(det_view_at(det_consumed + (i - lo)));
        det_batch = prepare_batch(det_views, cfg, mix_seed(step_seed, 2), &bank);
      }
      det_consumed += hi - lo;

      const double lr = sched.lr_at(result.global_step);
      const StepMetrics mt = multitask_step(
          model, seg_batch, det_batch ? &*det_batch : nullptr, cfg, opt, lr,
          mix_seed(step_seed, 3));

      if (sink)
        sink({{"epoch", epoch},
              {"step", s},
              {"global_step", result.global_step},
              {"loss_seg", mt.loss_seg},
              {"loss_det", mt.loss_det},
              {"loss_total", mt.loss_total},
              {"seg_acc", mt.seg_acc},
              {"det_obj", mt.det_parts.objectness},
              {"det_eq3", mt.det_parts.eq3()},
              {"lr", mt.lr}});
      ++result.global_step;
    }
    result.epochs_run = epoch + 1;

    if (evaluator && cfg.eval_every > 0 && (epoch + 1) % cfg.eval_every == 0 &&
        epoch + 1 < stop_epoch) {
      nlohmann::json ev = evaluator(model);
      if (sink) sink({{"epoch", epoch}, {"eval", ev}});
    }
  }
  if (evaluator && stop_epoch == cfg.epochs) {
    result.final_eval = evaluator(model);
    if (sink) sink({{"epoch", cfg.epochs - 1}, {"eval", result.final_eval}});
  }
  return result;
}

void save_train_checkpoint(const std::filesystem::path& path,
                           const DassModel& model, const Adam& opt,
                           int next_epoch, long global_step,
                           const nlohmann::json& run_config_echo) {
  Container c;
  c.meta["kind"] = "checkpoint";
  c.meta["model_config"] = model_config_to_json(model.cfg);
  c.meta["next_epoch"] = next_epoch;
  c.meta["global_step"] = global_step;
  c.meta["adam"] = {{"t", opt.steps_taken()},
                    {"beta1", opt.beta1},
                    {"beta2", opt.beta2},
                    {"eps", opt.eps},
                    {"weight_decay", opt.weight_decay}};
  c.meta["run_config"] = run_config_echo;
  // Loop randomness is derived statelessly from (seed, epoch, step); the
  // seeds recorded in run_config are the complete RNG state.
  const_cast<DassModel&>(model).visit_params(
      [&](Parameter& p) { c.add_f64("param/" + p.name, p.value); });
  for (const auto& [name, m] : opt.first_moments()) c.add_f64("adam/m/" + name, m);
  for (const auto& [name, v] : opt.second_moments()) c.add_f64("adam/v/" + name, v);
  c.write(path);
}

LoadedCheckpoint load_train_checkpoint(const std::filesystem::path& path) {
  const Container c = Container::read(path);
  if (c.meta.value("kind", "") != "checkpoint")
    throw FormatError("not a checkpoint: " + path.string());
  LoadedCheckpoint out;
  out.model = DassModel::create(model_config_from_json(c.meta.at("model_config")), 0);
  out.model.visit_params(
      [&](Parameter& p) { p.value = c.get_f64("param/" + p.name); });
  out.next_epoch = c.meta.value("next_epoch", 0);
  out.global_step = c.meta.value("global_step", 0L);
  out.run_config_echo = c.meta.value("run_config", nlohmann::json::object());

  const auto& aj = c.meta.at("adam");
  out.opt.beta1 = aj.at("beta1").get<double>();
  out.opt.beta2 = aj.at("beta2").get<double>();
  out.opt.eps = aj.at("eps").get<double>();
  out.opt.weight_decay = aj.at("weight_decay").get<double>();
  std::map<std::string, Mat> m, v;
  out.model.visit_params([&](Parameter& p) {
    if (!p.trainable) return;
    if (c.has("adam/m/" + p.name)) {
      m[p.name] = c.get_f64("adam/m/" + p.name);
      v[p.name] = c.get_f64("adam/v/" + p.name);
    }
  });
  out.opt.restore(aj.at("t").get<long>(), std::move(m), std::move(v));
  return out;
}

}  // namespace dass
