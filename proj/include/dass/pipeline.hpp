#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dass/types.hpp"

namespace dass {

// Image-FOV wedge: points with forward coordinate >= min_forward whose
// lateral offset stays within the half-angle. Axis indices cover both the
// internal frame (forward +z, lateral x) and raw velodyne input
// (forward +x, lateral y).
struct FovConfig {
  int forward_axis = 2;
  int lateral_axis = 0;
  double half_angle_deg = 45.0;
  double min_forward = 0.0;
};

// Crops points (and labels/boxes when given) to the FOV wedge. Boxes survive
// iff their center lies inside. Input must be unpadded; output is unpadded.
void fov_crop(PointCloud& cloud, std::vector<std::int32_t>* labels,
              std::vector<LabeledBox>* boxes, const FovConfig& cfg);

// Random subsample to exactly target_n rows (without replacement), or
// zero-pad up to target_n when the cloud is smaller. Padded label rows get
// kIgnoreLabel. Deterministic in seed.
void fixed_size_sample(PointCloud& cloud, std::vector<std::int32_t>* labels,
                       Eigen::Index target_n, std::uint64_t seed);

// Reflectance -= 0.5 on valid rows; padded rows stay exactly zero.
void normalize_reflectance(PointCloud& cloud);

struct AugmentPolicy {
  bool enabled = true;
  double max_rotation_deg = 10.0;
  double scale_low = 0.95;
  double scale_high = 1.05;
  double flip_prob = 0.5;
};

// Scene-level augmentation: one rigid transform drawn from the policy and
// applied jointly to points and boxes. Labels are untouched. Returns the
// transform that was applied.
RigidTransform augment_scene(PointCloud& cloud, std::vector<LabeledBox>* boxes,
                             std::uint64_t seed, const AugmentPolicy& policy);

// One transplantable ground-truth box with its interior points (absolute
// coordinates of the source scene).
struct BankEntry {
  Box7 box;
  Mat points;  // k x 4
};

// Collects (box, interior points) pairs from detection views.
std::vector<BankEntry> build_box_bank(const std::vector<PartialView>& det_views,
                                      int min_points = 5);

struct GtAugmentConfig {
  int max_added = 2;
  int tries_per_slot = 20;
  double ground_y = 0.0;
  int car_class = 4;
};

// Implants up to max_added banked boxes at their native BEV location,
// snapped so the box bottom touches ground_y. A candidate is accepted only
// when its BEV IoU with every existing box is zero; existing points inside
// the implanted box's vertical prism are removed first. labels may be null
// (det views carry none); when present, implanted points are labeled as car.
int gt_box_augment(PointCloud& cloud, std::vector<LabeledBox>& boxes,
                   std::vector<std::int32_t>* labels,
                   const std::vector<BankEntry>& bank, std::uint64_t seed,
                   const GtAugmentConfig& cfg);

struct RangeFilterConfig {
  std::array<double, 2> x = {-40.0, 40.0};
  std::array<double, 2> y = {-1.0, 3.0};
  std::array<double, 2> z = {0.0, 70.4};
};

// Keeps boxes whose center lies inside the closed coordinate ranges.
std::vector<LabeledBox> range_filter(const std::vector<LabeledBox>& boxes,
                                     const RangeFilterConfig& cfg = {});

}  // namespace dass
