#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dass/types.hpp"

namespace dass {

// Velodyne `.bin`: packed little-endian float32 quadruples (x, y, z,
// reflectance). Length must be a multiple of 16 bytes.
PointCloud parse_velodyne_bin(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> serialize_velodyne_bin(const PointCloud& cloud);

// SemanticKITTI `.label`: packed little-endian uint32 per point; lower 16
// bits semantic id, upper 16 bits instance id.
struct LabelWords {
  std::vector<std::uint16_t> semantic;
  std::vector<std::uint16_t> instance;
};
LabelWords parse_semantickitti_labels(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> serialize_semantickitti_labels(const LabelWords& words);

// Remaps raw semantic ids through a lookup table; ids missing from the table
// map to kIgnoreLabel and are tallied in unknown_count.
struct RemapResult {
  std::vector<std::int32_t> labels;
  int unknown_count = 0;
};
RemapResult remap_labels(const std::vector<std::uint16_t>& raw,
                         const std::vector<std::pair<std::uint16_t, std::int32_t>>& table);

// One KITTI object label line. The box is in the camera frame: location
// (x, y, z), dimensions (h, w, l), r = rotation_y.
struct KittiObject {
  std::string type;
  double truncated = 0, alpha = 0;
  int occluded = 0;
  std::array<double, 4> bbox2d = {0, 0, 0, 0};
  Box7 box;
  double score = 0;
  bool has_score = false;
};

// Parses `label_2` text. "Van" is merged into "Car"; "DontCare" rows are
// dropped. Malformed lines raise FormatError with the line number.
std::vector<KittiObject> parse_kitti_object_labels(const std::string& text);
std::string serialize_kitti_object_labels(const std::vector<KittiObject>& objects);

struct KittiCalib {
  Eigen::Matrix4d tr_velo_to_cam = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d r0_rect = Eigen::Matrix4d::Identity();

  Eigen::Matrix4d cam_from_velo() const { return r0_rect * tr_velo_to_cam; }
};

// Parses a KITTI calib file; requires Tr_velo_to_cam and R0_rect entries.
KittiCalib parse_kitti_calib(const std::string& text);

// Applies the inverse rectified extrinsics to box locations and maps
// rotation_y to yaw about the velodyne up axis (r = -ry - pi/2).
std::vector<KittiObject> cam_boxes_to_lidar(const std::vector<KittiObject>& boxes,
                                            const KittiCalib& calib);
std::vector<KittiObject> lidar_boxes_to_cam(const std::vector<KittiObject>& boxes,
                                            const KittiCalib& calib);

// Fixed axis permutation between the raw velodyne frame (x fwd, y left,
// z up) and the internal frame (z fwd, x right, y up).
void velodyne_to_internal(PointCloud& cloud);
void internal_to_velodyne(PointCloud& cloud);

}  // namespace dass
