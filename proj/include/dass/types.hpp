#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dass/geom.hpp"

namespace dass {

// Label value for padded rows and for points excluded from the loss.
constexpr int kIgnoreLabel = -1;

// n x 4 point matrix: x, y, z in meters, reflectance in column 3.
// Rows past valid_count are padding and are exactly zero.
struct PointCloud {
  Mat points;  // n x 4
  Eigen::Index valid_count = 0;

  Eigen::Index rows() const { return points.rows(); }
  auto xyz() { return points.leftCols<3>(); }
  auto xyz() const { return points.leftCols<3>(); }
  // Valid (non-padded) block.
  Mat valid_points() const { return points.topRows(valid_count); }

  static PointCloud from_points(Mat pts) {
    PointCloud c;
    c.valid_count = pts.rows();
    c.points = std::move(pts);
    return c;
  }
};

struct ClassTable {
  std::vector<std::string> names;
  // Classes that share vehicle geometry with the detection class.
  std::vector<int> vehicle_group;
  int car = -1;

  int size() const { return static_cast<int>(names.size()); }
  int index_of(const std::string& name) const;

  // Desk-scale table: ground, building, pole, fence, car, truck,
  // other-vehicle, pedestrian.
  static ClassTable desk();
};

// A fully annotated scene: labels cover the valid points, boxes cover every
// vehicle instance.
struct Scene {
  PointCloud cloud;
  std::vector<std::int32_t> labels;  // length == cloud.valid_count
  std::vector<LabeledBox> boxes;
  std::uint64_t seed = 0;

  void check() const;  // throws DataError on broken invariants
};

enum class ViewKind { kSegOnly, kDetOnly };

// A partially annotated view of a scene. The hidden annotation kind is not
// stored at all: seg views carry labels and no boxes, det views carry
// car-class boxes and no labels.
struct PartialView {
  ViewKind kind = ViewKind::kSegOnly;
  PointCloud cloud;
  std::vector<std::int32_t> labels;  // seg views only
  std::vector<LabeledBox> boxes;     // det views only, car class only
  std::uint64_t scene_seed = 0;
};

}  // namespace dass
