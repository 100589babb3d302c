#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace dass {

// Coordinate conventions, used everywhere in this library:
//   - y is the elevation axis; the x-z plane is the transverse (BEV) plane.
//   - +z is the sensor forward direction.
//   - Yaw r is measured in the BEV plane from +x toward +z; the heading unit
//     vector of a box is (cos r, sin r) in (x, z).
//   - l extends along the heading, w across it, h along elevation.

using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Wraps an angle to [0, 2*pi).
double wrap_angle(double r);

// 7-DoF oriented box. h, w, l must be positive; r is kept in [0, 2*pi).
struct Box7 {
  double x = 0, y = 0, z = 0;
  double h = 0, w = 0, l = 0;
  double r = 0;

  Vec3 center() const { return {x, y, z}; }
  Box7 normalized() const;              // r wrapped into [0, 2*pi)
  double bev_area() const { return w * l; }
  // CCW corners of the BEV rectangle, rows = corners, cols = (x, z).
  Eigen::Matrix<double, 4, 2> bev_corners() const;
};

struct LabeledBox {
  Box7 box;
  int cls = 0;
  double score = 0.0;  // used only where a confidence is meaningful
};

// Bin codec parameters. Center offsets in [-S, S) are split into
// num_center_bins = 2*S/delta bins of width delta; rotations into
// num_rot_bins = 2*pi/alpha bins of width alpha.
struct BoxCodecConfig {
  double scope_S = 3.0;
  double bin_delta = 0.5;
  int num_center_bins = 12;
  int num_rot_bins = 12;
  double rot_alpha = kTwoPi / 12.0;
  std::array<double, 3> anchor_hwl = {1.5, 1.6, 3.9};

  static BoxCodecConfig make(double scope, double delta, int rot_bins,
                             std::array<double, 3> anchor = {1.5, 1.6, 3.9});
  void validate() const;  // throws ConfigError on inconsistent values
};

// Per-point regression target in codec space.
struct BinTarget {
  int x_bin = 0, z_bin = 0, r_bin = 0;
  double x_res = 0, z_res = 0, r_res = 0;  // meters / radians, not normalized
  double y_off = 0;
  std::array<double, 3> hwl_res = {0, 0, 0};
};

// offset in [-S, S) -> (bin, residual), |residual| <= delta/2.
// Throws std::out_of_range when the offset lies outside the scope.
std::pair<int, double> encode_center(double offset, const BoxCodecConfig& cfg);
double decode_center(int bin, double res, const BoxCodecConfig& cfg);

// rotation in [0, 2*pi) -> (bin, residual), residual in (-alpha/2, alpha/2].
// Wrapping makes the codec 2*pi-periodic; no failure mode.
std::pair<int, double> encode_rotation(double r, const BoxCodecConfig& cfg);
double decode_rotation(int bin, double res, const BoxCodecConfig& cfg);

// Channel layout of the per-point detection output block:
//   [x bin logits | z bin logits | x res | z res | y off |
//    r bin logits | r res | h w l res | objectness logit]
// Residual channels are normalized: center residuals by delta/2, rotation
// residual by alpha/2. y and hwl channels are plain meters.
struct DetChannels {
  int center_bins = 12;
  int rot_bins = 12;

  static DetChannels from(const BoxCodecConfig& cfg) {
    return {cfg.num_center_bins, cfg.num_rot_bins};
  }
  int x_bins() const { return 0; }
  int z_bins() const { return center_bins; }
  int x_res() const { return 2 * center_bins; }
  int z_res() const { return 2 * center_bins + 1; }
  int y_off() const { return 2 * center_bins + 2; }
  int r_bins() const { return 2 * center_bins + 3; }
  int r_res() const { return 2 * center_bins + 3 + rot_bins; }
  int hwl() const { return 2 * center_bins + 4 + rot_bins; }
  int objectness() const { return 2 * center_bins + 7 + rot_bins; }
  int count() const { return 2 * center_bins + rot_bins + 8; }
};

struct DecodedBox {
  Box7 box;
  bool clamped = false;  // true if a dimension had to be clamped to 0.01 m
};

// Decodes one detection output row (layout per DetChannels) anchored at a
// point into a box. Bin channels are argmax'd; ties go to the lower bin.
DecodedBox decode_box(const Vec3& point, const Eigen::RowVectorXd& channels,
                      const BoxCodecConfig& cfg);

// IoU of the two boxes' rotated BEV rectangles via convex polygon clipping.
// Degenerate (zero-area) boxes yield 0.
double bev_iou(const Box7& a, const Box7& b);

// Volumetric IoU for yaw-only boxes: BEV intersection area times elevation
// overlap. Lives here as a helper for the flag-gated 3D recall variant.
double box_iou_3d(const Box7& a, const Box7& b);

// Greedy descending-score suppression at the given BEV IoU threshold.
// Ties in score are broken by lower index; kept indices come back sorted by
// descending score.
std::vector<int> nms_bev(const std::vector<Box7>& boxes,
                         const std::vector<double>& scores,
                         double iou_threshold);

// Mask of points inside the box. points is n x >=3 with xyz in columns 0..2.
// Boundary points (exactly on a face) count as inside.
std::vector<std::uint8_t> points_in_box(const Mat& points, const Box7& box);

// Scene-level rigid transform: scale, then rotation about the elevation axis,
// then optional flip across the y-z plane (x -> -x). Applied to boxes, the
// flip maps r -> -r (mod 2*pi), which preserves the rectangle exactly.
struct RigidTransform {
  double rotation = 0.0;
  double scale = 1.0;
  bool flip = false;

  Vec3 apply(const Vec3& p) const;
  // Transforms xyz columns 0..2 in place; any further columns (reflectance)
  // are untouched.
  void apply_points(Mat& points) const;
  Box7 apply(const Box7& b) const;
  RigidTransform inverse() const;
  bool is_identity() const {
    return rotation == 0.0 && scale == 1.0 && !flip;
  }
};

}  // namespace dass
