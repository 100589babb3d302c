#include "dass/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dass/errors.hpp"
#include "dass/rng.hpp"

namespace dass {

void fov_crop(PointCloud& cloud, std::vector<std::int32_t>* labels,
              std::vector<LabeledBox>* boxes, const FovConfig& cfg) {
  if (cloud.valid_count != cloud.rows())
    throw DataError("fov_crop: expects an unpadded cloud");
  const double tan_half = std::tan(cfg.half_angle_deg * kPi / 180.0);

  const auto inside = [&](double fwd, double lat) {
    return fwd >= cfg.min_forward && fwd > 0.0 && std::abs(lat) <= tan_half * fwd;
  };

  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(cloud.rows()));
  for (Eigen::Index i = 0; i < cloud.rows(); ++i)
    if (inside(cloud.points(i, cfg.forward_axis), cloud.points(i, cfg.lateral_axis)))
      keep.push_back(i);

  Mat pts(static_cast<Eigen::Index>(keep.size()), cloud.points.cols());
  std::vector<std::int32_t> new_labels;
  if (labels) new_labels.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    pts.row(static_cast<Eigen::Index>(i)) = cloud.points.row(keep[i]);
    if (labels) new_labels.push_back((*labels)[static_cast<std::size_t>(keep[i])]);
  }
  cloud.points = std::move(pts);
  cloud.valid_count = cloud.points.rows();
  if (labels) *labels = std::move(new_labels);

  if (boxes) {
    std::vector<LabeledBox> kept_boxes;
    for (const auto& lb : *boxes) {
      const double center[3] = {lb.box.x, lb.box.y, lb.box.z};
      if (inside(center[cfg.forward_axis], center[cfg.lateral_axis]))
        kept_boxes.push_back(lb);
    }
    *boxes = std::move(kept_boxes);
  }
}

void fixed_size_sample(PointCloud& cloud, std::vector<std::int32_t>* labels,
                       Eigen::Index target_n, std::uint64_t seed) {
  if (target_n <= 0) throw ConfigError("fixed_size_sample: target_n must be positive");
  const Eigen::Index n = cloud.valid_count;
  Rng rng = make_rng(mix_seed(seed, 0xf1eedULL));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const Eigen::Index kept = std::min(n, target_n);

  Mat pts = Mat::Zero(target_n, cloud.points.cols());
  std::vector<std::int32_t> new_labels;
  if (labels) new_labels.assign(static_cast<std::size_t>(target_n), kIgnoreLabel);
  for (Eigen::Index i = 0; i < kept; ++i) {
    pts.row(i) = cloud.points.row(order[static_cast<std::size_t>(i)]);
    if (labels)
      new_labels[static_cast<std::size_t>(i)] =
          (*labels)[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }
  cloud.points = std::move(pts);
  cloud.valid_count = kept;
  if (labels) *labels = std::move(new_labels);
}

void normalize_reflectance(PointCloud& cloud) {
  for (Eigen::Index i = 0; i < cloud.valid_count; ++i)
    cloud.points(i, 3) -= 0.5;
}

RigidTransform augment_scene(PointCloud& cloud, std::vector<LabeledBox>* boxes,
                             std::uint64_t seed, const AugmentPolicy& policy) {
  RigidTransform t;
  if (policy.enabled) {
    Rng rng = make_rng(mix_seed(seed, 0xa76ULL));
    const double max_rad = policy.max_rotation_deg * kPi / 180.0;
    t.rotation = std::uniform_real_distribution<double>(-max_rad, max_rad)(rng);
    t.scale = std::uniform_real_distribution<double>(policy.scale_low,
                                                     policy.scale_high)(rng);
    t.flip = std::bernoulli_distribution(policy.flip_prob)(rng);
  }
  if (t.is_identity()) return t;
  t.apply_points(cloud.points);  // padded zero rows map to zero
  if (boxes)
    for (auto& lb : *boxes) lb.box = t.apply(lb.box);
  return t;
}

std::vector<BankEntry> build_box_bank(const std::vector<PartialView>& det_views,
                                      int min_points) {
  std::vector<BankEntry> bank;
  for (const auto& view : det_views) {
    const Mat valid = view.cloud.valid_points();
    for (const auto& lb : view.boxes) {
      const auto mask = points_in_box(valid, lb.box);
      const auto count = std::count(mask.begin(), mask.end(), std::uint8_t{1});
      if (count < min_points) continue;
      BankEntry entry;
      entry.box = lb.box;
      entry.points.resize(count, valid.cols());
      Eigen::Index row = 0;
      for (Eigen::Index i = 0; i < valid.rows(); ++i)
        if (mask[static_cast<std::size_t>(i)]) entry.points.row(row++) = valid.row(i);
      bank.push_back(std::move(entry));
    }
  }
  return bank;
}

int gt_box_augment(PointCloud& cloud, std::vector<LabeledBox>& boxes,
                   std::vector<std::int32_t>* labels,
                   const std::vector<BankEntry>& bank, std::uint64_t seed,
                   const GtAugmentConfig& cfg) {
  if (bank.empty() || cfg.max_added <= 0) return 0;
  if (cloud.valid_count != cloud.rows())
    throw DataError("gt_box_augment: expects an unpadded cloud");
  Rng rng = make_rng(mix_seed(seed, 0x6bab0ULL));
  std::uniform_int_distribution<std::size_t> pick(0, bank.size() - 1);

  int inserted = 0;
  for (int slot = 0; slot < cfg.max_added; ++slot) {
    for (int attempt = 0; attempt < cfg.tries_per_slot; ++attempt) {
      const BankEntry& entry = bank[pick(rng)];
      Box7 candidate = entry.box;
      const double dy = cfg.ground_y + candidate.h / 2 - candidate.y;
      candidate.y += dy;

      bool overlap = false;
      for (const auto& existing : boxes)
        if (bev_iou(candidate, existing.box) > 0.0) {
          overlap = true;
          break;
        }
      if (overlap) continue;

      // Clear the vertical prism of the implanted box.
      Box7 prism = candidate;
      prism.y = 0.0;
      prism.h = 1e6;
      const auto mask = points_in_box(cloud.points, prism);
      std::vector<Eigen::Index> keep;
      keep.reserve(static_cast<std::size_t>(cloud.rows()));
      for (Eigen::Index i = 0; i < cloud.rows(); ++i)
        if (!mask[static_cast<std::size_t>(i)]) keep.push_back(i);

      const Eigen::Index n_new =
          static_cast<Eigen::Index>(keep.size()) + entry.points.rows();
      Mat pts(n_new, cloud.points.cols());
      std::vector<std::int32_t> new_labels;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        pts.row(static_cast<Eigen::Index>(i)) = cloud.points.row(keep[i]);
        if (labels) new_labels.push_back((*labels)[static_cast<std::size_t>(keep[i])]);
      }
      for (Eigen::Index i = 0; i < entry.points.rows(); ++i) {
        Eigen::RowVectorXd row = entry.points.row(i);
        row(1) += dy;
        pts.row(static_cast<Eigen::Index>(keep.size()) + i) = row;
        if (labels) new_labels.push_back(cfg.car_class);
      }
      cloud.points = std::move(pts);
      cloud.valid_count = cloud.points.rows();
      if (labels) *labels = std::move(new_labels);
      boxes.push_back({candidate, cfg.car_class, 0.0});
      ++inserted;
      break;
    }
  }
  return inserted;
}

std::vector<LabeledBox> range_filter(const std::vector<LabeledBox>& boxes,
                                     const RangeFilterConfig& cfg) {
  std::vector<LabeledBox> kept;
  for (const auto& lb : boxes) {
    const bool in = lb.box.x >= cfg.x[0] && lb.box.x <= cfg.x[1] &&
                    lb.box.y >= cfg.y[0] && lb.box.y <= cfg.y[1] &&
                    lb.box.z >= cfg.z[0] && lb.box.z <= cfg.z[1];
    if (in) kept.push_back(lb);
  }
  return kept;
}

}  // namespace dass
