#include "dass/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dass/errors.hpp"

namespace dass {

namespace {

constexpr double kClipEps = 1e-12;

struct P2 {
  double x, z;
};

double cross(const P2& o, const P2& a, const P2& b) {
  return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

double shoelace(const std::vector<P2>& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const P2& p = poly[i];
    const P2& q = poly[(i + 1) % n];
    s += p.x * q.z - q.x * p.z;
  }
  return 0.5 * s;
}

// Sutherland-Hodgman clip of a convex polygon against the half-plane to the
// left of edge a->b.
std::vector<P2> clip_edge(const std::vector<P2>& poly, const P2& a, const P2& b) {
  std::vector<P2> out;
  out.reserve(poly.size() + 1);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const P2& cur = poly[i];
    const P2& nxt = poly[(i + 1) % n];
    const double dc = cross(a, b, cur);
    const double dn = cross(a, b, nxt);
    if (dc >= -kClipEps) out.push_back(cur);
    if ((dc > kClipEps && dn < -kClipEps) || (dc < -kClipEps && dn > kClipEps)) {
      const double t = dc / (dc - dn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.z + t * (nxt.z - cur.z)});
    }
  }
  return out;
}

std::vector<P2> bev_polygon(const Box7& b) {
  const auto c = b.bev_corners();
  std::vector<P2> poly(4);
  for (int i = 0; i < 4; ++i) poly[i] = {c(i, 0), c(i, 1)};
  return poly;
}

}  // namespace

double wrap_angle(double r) {
  double w = std::fmod(r, kTwoPi);
  if (w < 0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;  // fmod can land exactly on 2*pi after the add
  return w;
}

Box7 Box7::normalized() const {
  Box7 b = *this;
  b.r = wrap_angle(b.r);
  return b;
}

Eigen::Matrix<double, 4, 2> Box7::bev_corners() const {
  const double c = std::cos(r), s = std::sin(r);
  const double ux = c * l / 2, uz = s * l / 2;    // along heading
  const double vx = -s * w / 2, vz = c * w / 2;   // across heading
  Eigen::Matrix<double, 4, 2> out;
  out << x + ux + vx, z + uz + vz,
         x - ux + vx, z - uz + vz,
         x - ux - vx, z - uz - vz,
         x + ux - vx, z + uz - vz;
  return out;
}

BoxCodecConfig BoxCodecConfig::make(double scope, double delta, int rot_bins,
                                    std::array<double, 3> anchor) {
  BoxCodecConfig cfg;
  cfg.scope_S = scope;
  cfg.bin_delta = delta;
  cfg.num_center_bins = static_cast<int>(std::lround(2.0 * scope / delta));
  cfg.num_rot_bins = rot_bins;
  cfg.rot_alpha = kTwoPi / rot_bins;
  cfg.anchor_hwl = anchor;
  cfg.validate();
  return cfg;
}

void BoxCodecConfig::validate() const {
  if (scope_S <= 0 || bin_delta <= 0 || rot_alpha <= 0)
    throw ConfigError("codec: scope, bin size and rotation bin width must be positive");
  if (num_center_bins <= 0 || num_rot_bins <= 0)
    throw ConfigError("codec: bin counts must be positive");
  if (std::lround(2.0 * scope_S / bin_delta) != num_center_bins)
    throw ConfigError("codec: num_center_bins must equal 2*S/delta");
  if (std::lround(kTwoPi / rot_alpha) != num_rot_bins)
    throw ConfigError("codec: num_rot_bins must equal 2*pi/alpha");
  for (double d : anchor_hwl)
    if (d <= 0) throw ConfigError("codec: anchor dimensions must be positive");
}

std::pair<int, double> encode_center(double offset, const BoxCodecConfig& cfg) {
  if (!(offset >= -cfg.scope_S && offset < cfg.scope_S))
    throw std::out_of_range("encode_center: offset outside [-S, S)");
  int bin = static_cast<int>(std::floor((offset + cfg.scope_S) / cfg.bin_delta));
  bin = std::clamp(bin, 0, cfg.num_center_bins - 1);
  const double res = offset - (cfg.bin_delta * (bin + 0.5) - cfg.scope_S);
  return {bin, res};
}

double decode_center(int bin, double res, const BoxCodecConfig& cfg) {
  if (bin < 0 || bin >= cfg.num_center_bins)
    throw std::out_of_range("decode_center: bin index out of range");
  return cfg.bin_delta * (bin + 0.5) + res - cfg.scope_S;
}

std::pair<int, double> encode_rotation(double r, const BoxCodecConfig& cfg) {
  const double a = cfg.rot_alpha;
  const double rw = wrap_angle(r);
  // ceil(r/a - 1/2) places the residual in (-a/2, a/2].
  const long raw = static_cast<long>(std::ceil(rw / a - 0.5));
  const double res = rw - a * static_cast<double>(raw);
  int bin = static_cast<int>(raw % cfg.num_rot_bins);
  if (bin < 0) bin += cfg.num_rot_bins;
  return {bin, res};
}

double decode_rotation(int bin, double res, const BoxCodecConfig& cfg) {
  return wrap_angle(cfg.rot_alpha * bin + res);
}

DecodedBox decode_box(const Vec3& point, const Eigen::RowVectorXd& channels,
                      const BoxCodecConfig& cfg) {
  const DetChannels ch = DetChannels::from(cfg);
  if (channels.size() != ch.count())
    throw std::invalid_argument("decode_box: channel count mismatch");

  const auto argmax = [&](int base, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (channels[base + i] > channels[base + best]) best = i;
    return best;
  };

  const int xb = argmax(ch.x_bins(), ch.center_bins);
  const int zb = argmax(ch.z_bins(), ch.center_bins);
  const int rb = argmax(ch.r_bins(), ch.rot_bins);

  DecodedBox out;
  out.box.x = point.x() + decode_center(xb, channels[ch.x_res()] * cfg.bin_delta / 2, cfg);
  out.box.z = point.z() + decode_center(zb, channels[ch.z_res()] * cfg.bin_delta / 2, cfg);
  out.box.y = point.y() + channels[ch.y_off()];
  out.box.r = decode_rotation(rb, channels[ch.r_res()] * cfg.rot_alpha / 2, cfg);

  double* dims[3] = {&out.box.h, &out.box.w, &out.box.l};
  for (int i = 0; i < 3; ++i) {
    *dims[i] = cfg.anchor_hwl[i] + channels[ch.hwl() + i];
    if (*dims[i] <= 0) {
      *dims[i] = 0.01;
      out.clamped = true;
    }
  }
  return out;
}

double bev_iou(const Box7& a, const Box7& b) {
  const double area_a = a.bev_area(), area_b = b.bev_area();
  if (area_a <= 0 || area_b <= 0) return 0.0;

  std::vector<P2> poly = bev_polygon(a);
  const std::vector<P2> clip = bev_polygon(b);
  for (int e = 0; e < 4 && poly.size() >= 3; ++e)
    poly = clip_edge(poly, clip[e], clip[(e + 1) % 4]);
  if (poly.size() < 3) return 0.0;

  const double inter = std::max(0.0, shoelace(poly));
  const double uni = area_a + area_b - inter;
  if (uni <= 0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double box_iou_3d(const Box7& a, const Box7& b) {
  const double area_a = a.bev_area(), area_b = b.bev_area();
  if (area_a <= 0 || area_b <= 0 || a.h <= 0 || b.h <= 0) return 0.0;

  std::vector<P2> poly = bev_polygon(a);
  const std::vector<P2> clip = bev_polygon(b);
  for (int e = 0; e < 4 && poly.size() >= 3; ++e)
    poly = clip_edge(poly, clip[e], clip[(e + 1) % 4]);
  const double inter_bev = poly.size() < 3 ? 0.0 : std::max(0.0, shoelace(poly));

  const double y_lo = std::max(a.y - a.h / 2, b.y - b.h / 2);
  const double y_hi = std::min(a.y + a.h / 2, b.y + b.h / 2);
  const double inter = inter_bev * std::max(0.0, y_hi - y_lo);
  const double uni = area_a * a.h + area_b * b.h - inter;
  if (uni <= 0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<int> nms_bev(const std::vector<Box7>& boxes,
                         const std::vector<double>& scores,
                         double iou_threshold) {
  if (boxes.size() != scores.size())
    throw std::invalid_argument("nms_bev: boxes/scores length mismatch");
  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (scores[i] != scores[j]) return scores[i] > scores[j];
    return i < j;
  });

  std::vector<int> kept;
  for (int idx : order) {
    bool suppressed = false;
    for (int k : kept) {
      if (bev_iou(boxes[idx], boxes[k]) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

std::vector<std::uint8_t> points_in_box(const Mat& points, const Box7& box) {
  const double c = std::cos(box.r), s = std::sin(box.r);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(points.rows()), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double dx = points(i, 0) - box.x;
    const double dy = points(i, 1) - box.y;
    const double dz = points(i, 2) - box.z;
    const double fwd = dx * c + dz * s;    // along heading
    const double lat = -dx * s + dz * c;   // across heading
    mask[static_cast<std::size_t>(i)] =
        std::abs(fwd) <= box.l / 2 && std::abs(lat) <= box.w / 2 &&
        std::abs(dy) <= box.h / 2;
  }
  return mask;
}

Vec3 RigidTransform::apply(const Vec3& p) const {
  Vec3 q = p * scale;
  const double c = std::cos(rotation), s = std::sin(rotation);
  const double x = q.x() * c - q.z() * s;
  const double z = q.x() * s + q.z() * c;
  q.x() = flip ? -x : x;
  q.z() = z;
  return q;
}

void RigidTransform::apply_points(Mat& points) const {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vec3 q = apply(Vec3(points(i, 0), points(i, 1), points(i, 2)));
    points(i, 0) = q.x();
    points(i, 1) = q.y();
    points(i, 2) = q.z();
  }
}

Box7 RigidTransform::apply(const Box7& b) const {
  Box7 out = b;
  const Vec3 c = apply(b.center());
  out.x = c.x();
  out.y = c.y();
  out.z = c.z();
  out.h = b.h * scale;
  out.w = b.w * scale;
  out.l = b.l * scale;
  out.r = wrap_angle(flip ? -(b.r + rotation) : (b.r + rotation));
  return out;
}

RigidTransform RigidTransform::inverse() const {
  // flip o rot(t) o scale(s) inverts to flip o rot(t) o scale(1/s) when the
  // flip is set (flip conjugates the rotation), plain inverse otherwise.
  RigidTransform inv;
  inv.scale = 1.0 / scale;
  inv.flip = flip;
  inv.rotation = flip ? rotation : -rotation;
  return inv;
}

}  // namespace dass
