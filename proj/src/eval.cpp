#include "dass/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dass/errors.hpp"
#include "dass/pipeline.hpp"

namespace dass {

void ConfusionMatrix::add(std::int32_t gt, std::int32_t pred) {
  if (gt < 0 || pred < 0 || gt >= counts_.rows() || pred >= counts_.cols()) return;
  ++counts_(gt, pred);
}

MiouResult miou(const ConfusionMatrix& conf) {
  const int k = conf.num_classes();
  MiouResult out;
  out.per_class = Eigen::VectorXd::Zero(k);
  out.valid.assign(static_cast<std::size_t>(k), 0);
  double sum = 0;
  int n_valid = 0;
  for (int c = 0; c < k; ++c) {
    const double tp = static_cast<double>(conf.at(c, c));
    double fp = 0, fn = 0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += static_cast<double>(conf.at(o, c));
      fn += static_cast<double>(conf.at(c, o));
    }
    const double denom = tp + fp + fn;
    if (denom <= 0) continue;
    out.per_class[c] = tp / denom;
    out.valid[static_cast<std::size_t>(c)] = 1;
    sum += out.per_class[c];
    ++n_valid;
  }
  out.mean = n_valid > 0 ? sum / n_valid : 0.0;
  return out;
}

ProposalSet proposals_from_channels(const Mat& xyz, const Mat& det_rows,
                                    const BoxCodecConfig& codec) {
  const DetChannels ch = DetChannels::from(codec);
  if (det_rows.cols() != ch.count() || det_rows.rows() != xyz.rows())
    throw DataError("proposals_from_channels: shape mismatch");

  ProposalSet out;
  out.boxes.reserve(static_cast<std::size_t>(xyz.rows()));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(xyz.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::vector<double> scores(static_cast<std::size_t>(xyz.rows()));
  for (Eigen::Index i = 0; i < xyz.rows(); ++i)
    scores[static_cast<std::size_t>(i)] =
        1.0 / (1.0 + std::exp(-det_rows(i, ch.objectness())));
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
      return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    return a < b;
  });
  for (Eigen::Index i : order) {
    const Vec3 p(xyz(i, 0), xyz(i, 1), xyz(i, 2));
    out.boxes.push_back(decode_box(p, det_rows.row(i), codec).box);
    out.scores.push_back(scores[static_cast<std::size_t>(i)]);
    out.point_indices.push_back(i);
  }
  return out;
}

ProposalSet select_proposals(const ProposalSet& raw, const ProposalConfig& cfg) {
  // Assume descending scores (proposals_from_channels guarantees it).
  const std::size_t n = std::min<std::size_t>(raw.boxes.size(),
                                              static_cast<std::size_t>(cfg.top_n));
  std::vector<std::size_t> near, far;
  for (std::size_t i = 0; i < n; ++i)
    (raw.boxes[i].z <= cfg.near_boundary ? near : far).push_back(i);

  const std::size_t quota_near = static_cast<std::size_t>(
      std::lround(cfg.near_fraction * static_cast<double>(n)));
  std::vector<std::size_t> pool;
  pool.reserve(n);
  const std::size_t take_near = std::min(near.size(), quota_near);
  const std::size_t take_far = std::min(far.size(), n - take_near);
  pool.insert(pool.end(), near.begin(), near.begin() + static_cast<long>(take_near));
  pool.insert(pool.end(), far.begin(), far.begin() + static_cast<long>(take_far));
  // Backfill from the near range when the far range is short.
  for (std::size_t i = take_near; i < near.size() && pool.size() < n; ++i)
    pool.push_back(near[i]);
  std::sort(pool.begin(), pool.end());  // restore score order

  std::vector<Box7> boxes;
  std::vector<double> scores;
  std::vector<Eigen::Index> provenance;
  for (std::size_t i : pool) {
    boxes.push_back(raw.boxes[i]);
    scores.push_back(raw.scores[i]);
    provenance.push_back(raw.point_indices.empty() ? Eigen::Index(-1)
                                                   : raw.point_indices[i]);
  }
  const std::vector<int> kept = nms_bev(boxes, scores, cfg.nms_threshold);

  ProposalSet out;
  for (int k : kept) {
    if (static_cast<int>(out.boxes.size()) >= cfg.final_m) break;
    out.boxes.push_back(boxes[static_cast<std::size_t>(k)]);
    out.scores.push_back(scores[static_cast<std::size_t>(k)]);
    out.point_indices.push_back(provenance[static_cast<std::size_t>(k)]);
  }
  return out;
}

RecallResult recall_at_iou(const std::vector<Box7>& proposals,
                           const std::vector<Box7>& gt_boxes,
                           const std::vector<double>& thresholds, bool use_3d) {
  RecallResult out;
  out.thresholds = thresholds;
  out.num_gt = static_cast<int>(gt_boxes.size());
  if (gt_boxes.empty()) return out;  // undefined, reported as absent

  std::vector<double> best(gt_boxes.size(), 0.0);
  for (std::size_t g = 0; g < gt_boxes.size(); ++g)
    for (const Box7& p : proposals)
      best[g] = std::max(best[g], use_3d ? box_iou_3d(p, gt_boxes[g])
                                         : bev_iou(p, gt_boxes[g]));
  for (double t : thresholds) {
    int recalled = 0;
    for (double b : best) recalled += b >= t;
    out.recall.push_back(static_cast<double>(recalled) /
                         static_cast<double>(gt_boxes.size()));
  }
  return out;
}

EvalScene prepare_eval_scene(const PointCloud& cloud,
                             const std::vector<std::int32_t>& labels,
                             const std::vector<LabeledBox>& boxes,
                             const EvalConfig& cfg, std::uint64_t scene_seed) {
  EvalScene out;
  out.cloud = cloud;
  out.labels = labels;
  out.boxes = boxes;
  FovConfig fov;
  fov.half_angle_deg = cfg.fov_half_angle_deg;
  fov_crop(out.cloud, out.labels.empty() ? nullptr : &out.labels, &out.boxes, fov);
  if (out.cloud.valid_count == 0) return out;
  fixed_size_sample(out.cloud, out.labels.empty() ? nullptr : &out.labels,
                    cfg.points_per_scene, mix_seed(cfg.seed, scene_seed, 0xe7a1ULL));
  normalize_reflectance(out.cloud);
  if (!out.labels.empty())
    out.labels.resize(static_cast<std::size_t>(out.cloud.rows()));
  return out;
}

EvalReport evaluate_model(DassModel& model, const std::vector<Scene>& seg_test,
                          const std::vector<Scene>& det_test,
                          const ClassTable& classes, const EvalConfig& cfg) {
  EvalReport report;
  report.class_names = classes.names;
  report.thresholds = cfg.thresholds;

  // Segmentation: image-FOV confusion over the test split.
  ConfusionMatrix conf(classes.size());
  for (std::size_t start = 0; start < seg_test.size();
       start += static_cast<std::size_t>(cfg.batch_scenes)) {
    const std::size_t end = std::min(
        seg_test.size(), start + static_cast<std::size_t>(cfg.batch_scenes));
    std::vector<EvalScene> prepared;
    prepared.reserve(end - start);
    std::vector<const PointCloud*> clouds;
    for (std::size_t i = start; i < end; ++i) {
      EvalScene es = prepare_eval_scene(seg_test[i].cloud, seg_test[i].labels, {},
                                        cfg, static_cast<std::uint64_t>(i));
      if (es.cloud.valid_count == 0) continue;
      prepared.push_back(std::move(es));
      clouds.push_back(&prepared.back().cloud);
    }
    if (clouds.empty()) continue;
    const BatchInput in = BatchInput::from_clouds(clouds);
    const Mat logits = model.infer_seg_logits(in, cfg.seed);
    Eigen::Index row = 0;
    for (const auto& es : prepared) {
      for (Eigen::Index p = 0; p < es.cloud.valid_count; ++p, ++row) {
        Eigen::Index pred = 0;
        logits.row(row).maxCoeff(&pred);
        conf.add(es.labels[static_cast<std::size_t>(p)], static_cast<std::int32_t>(pred));
      }
    }
  }
  const MiouResult mi = miou(conf);
  report.per_class_iou = mi.per_class;
  report.class_valid = mi.valid;
  report.miou = mi.mean;
  report.eval_points = conf.total();

  // Detection: pooled proposal recall over the det split.
  if (model.cfg.with_det_head && !det_test.empty()) {
    std::vector<int> recalled(cfg.thresholds.size(), 0);
    std::vector<int> recalled_3d(cfg.thresholds.size(), 0);
    int total_gt = 0;
    double proposal_count = 0;
    int scenes_scored = 0;
    for (std::size_t i = 0; i < det_test.size(); ++i) {
      std::vector<LabeledBox> car_boxes;
      for (const auto& lb : det_test[i].boxes)
        if (lb.cls == classes.car) car_boxes.push_back(lb);
      EvalScene es = prepare_eval_scene(det_test[i].cloud, {}, car_boxes, cfg,
                                        mix_seed(0xdeULL, i));
      if (es.cloud.valid_count == 0 || es.boxes.empty()) continue;
      const BatchInput in = BatchInput::from_clouds({&es.cloud});
      const Mat det_rows = model.infer_det_channels(in, cfg.seed);
      const ProposalSet raw = proposals_from_channels(in.xyz, det_rows, model.cfg.codec);
      const ProposalSet sel = select_proposals(raw, cfg.proposals);
      proposal_count += static_cast<double>(sel.boxes.size());
      ++scenes_scored;

      std::vector<Box7> gt;
      for (const auto& lb : es.boxes) gt.push_back(lb.box);
      total_gt += static_cast<int>(gt.size());
      const RecallResult r = recall_at_iou(sel.boxes, gt, cfg.thresholds, false);
      for (std::size_t t = 0; t < cfg.thresholds.size(); ++t)
        recalled[t] += static_cast<int>(std::lround(
            r.recall[t] * static_cast<double>(gt.size())));
      if (cfg.recall_3d) {
        const RecallResult r3 = recall_at_iou(sel.boxes, gt, cfg.thresholds, true);
        for (std::size_t t = 0; t < cfg.thresholds.size(); ++t)
          recalled_3d[t] += static_cast<int>(std::lround(
              r3.recall[t] * static_cast<double>(gt.size())));
      }
    }
    report.num_gt_boxes = total_gt;
    if (total_gt > 0) {
      for (std::size_t t = 0; t < cfg.thresholds.size(); ++t)
        report.recall.push_back(static_cast<double>(recalled[t]) / total_gt);
      if (cfg.recall_3d)
        for (std::size_t t = 0; t < cfg.thresholds.size(); ++t)
          report.recall_3d.push_back(static_cast<double>(recalled_3d[t]) / total_gt);
      report.mean_proposals =
          scenes_scored > 0 ? proposal_count / scenes_scored : 0.0;
    }
  }
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["miou"] = miou;
  j["eval_points"] = eval_points;
  nlohmann::json per_class = nlohmann::json::object();
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    if (class_valid[c])
      per_class[class_names[c]] = per_class_iou[static_cast<Eigen::Index>(c)];
    else
      per_class[class_names[c]] = nullptr;  // class absent from the split
  }
  j["per_class_iou"] = per_class;
  j["num_gt_boxes"] = num_gt_boxes;
  j["mean_proposals"] = mean_proposals;
  if (!recall.empty()) {
    nlohmann::json rec = nlohmann::json::object();
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      char key[16];
      std::snprintf(key, sizeof(key), "%.1f", thresholds[t]);
      rec[key] = recall[t];
    }
    j["recall_bev"] = rec;
    if (!recall_3d.empty()) {
      nlohmann::json rec3 = nlohmann::json::object();
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        char key[16];
        std::snprintf(key, sizeof(key), "%.1f", thresholds[t]);
        rec3[key] = recall_3d[t];
      }
      j["recall_3d"] = rec3;
    }
  }
  return j;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "per-class IoU (image FOV):\n";
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    out << "  " << class_names[c] << ": ";
    if (class_valid[c]) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.4f", per_class_iou[static_cast<Eigen::Index>(c)]);
      out << buf;
    } else {
      out << "-";
    }
    out << "\n";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "mIoU: %.4f over %lld points\n", miou,
                static_cast<long long>(eval_points));
  out << buf;
  if (!recall.empty()) {
    out << "proposal recall (BEV IoU), " << num_gt_boxes << " gt boxes:\n";
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      std::snprintf(buf, sizeof(buf), "  @%.1f: %.4f\n", thresholds[t], recall[t]);
      out << buf;
    }
    if (!recall_3d.empty()) {
      out << "proposal recall (3D IoU):\n";
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "  @%.1f: %.4f\n", thresholds[t], recall_3d[t]);
        out << buf;
      }
    }
  } else {
    out << "proposal recall: absent (no gt boxes)\n";
  }
  return out.str();
}

}  // namespace dass
