#include <doctest.h>

#include <cmath>
#include <random>

#include "dass/geom.hpp"
#include "dass/rng.hpp"

using namespace dass;

namespace {

// Independent containment oracle: projects the point onto the box edge axes
// instead of rotating into the box frame.
bool oracle_point_in_box(double px, double py, double pz, const Box7& b) {
  const double ax = std::cos(b.r), az = std::sin(b.r);   // heading axis
  const double bx = -std::sin(b.r), bz = std::cos(b.r);  // lateral axis
  const double dx = px - b.x, dz = pz - b.z;
  const double along = dx * ax + dz * az;
  const double across = dx * bx + dz * bz;
  return std::abs(along) <= b.l / 2 && std::abs(across) <= b.w / 2 &&
         std::abs(py - b.y) <= b.h / 2;
}

// Monte-Carlo BEV IoU oracle over the joint axis-aligned bounding box.
double oracle_bev_iou(const Box7& a, const Box7& b, int samples, std::uint64_t seed) {
  auto corners_a = a.bev_corners();
  auto corners_b = b.bev_corners();
  double lo_x = 1e300, hi_x = -1e300, lo_z = 1e300, hi_z = -1e300;
  for (int i = 0; i < 4; ++i) {
    lo_x = std::min({lo_x, corners_a(i, 0), corners_b(i, 0)});
    hi_x = std::max({hi_x, corners_a(i, 0), corners_b(i, 0)});
    lo_z = std::min({lo_z, corners_a(i, 1), corners_b(i, 1)});
    hi_z = std::max({hi_z, corners_a(i, 1), corners_b(i, 1)});
  }
  const auto in_rect = [](double x, double z, const Box7& box) {
    Box7 tall = box;
    tall.y = 0;
    tall.h = 1;
    return oracle_point_in_box(x, 0, z, tall);
  };
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> ux(lo_x, hi_x), uz(lo_z, hi_z);
  long in_inter = 0, in_union = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = ux(rng), z = uz(rng);
    const bool ia = in_rect(x, z, a), ib = in_rect(x, z, b);
    in_inter += ia && ib;
    in_union += ia || ib;
  }
  if (in_union == 0) return 0.0;
  return static_cast<double>(in_inter) / static_cast<double>(in_union);
}

Box7 random_box(Rng& rng, double span = 10.0) {
  std::uniform_real_distribution<double> pos(-span, span), dim(0.8, 4.0),
      rot(0.0, kTwoPi);
  Box7 b;
  b.x = pos(rng);
  b.z = pos(rng);
  b.y = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  b.h = dim(rng);
  b.w = dim(rng);
  b.l = dim(rng);
  b.r = rot(rng);
  return b;
}

}  // namespace

TEST_CASE("center codec matches the closed form") {
  const auto cfg = BoxCodecConfig::make(3.0, 0.5, 12);
  CHECK(cfg.num_center_bins == 12);

  auto [bin, res] = encode_center(0.3, cfg);
  CHECK(bin == 6);
  CHECK(res == doctest::Approx(0.05).epsilon(1e-12));

  auto [bin0, res0] = encode_center(-3.0, cfg);
  CHECK(bin0 == 0);
  CHECK(res0 == doctest::Approx(-0.25).epsilon(1e-12));

  for (int b = 0; b < cfg.num_center_bins; ++b) {
    const double center = cfg.bin_delta * (b + 0.5) - cfg.scope_S;
    auto [bb, rr] = encode_center(center, cfg);
    CHECK(bb == b);
    CHECK(std::abs(rr) < 1e-12);
  }

  CHECK(decode_center(6, 0.05, cfg) == doctest::Approx(0.3));
  CHECK(decode_center(0, 0.0, cfg) == doctest::Approx(-cfg.scope_S + cfg.bin_delta / 2));
  CHECK_THROWS_AS(encode_center(3.0, cfg), std::out_of_range);
  CHECK_THROWS_AS(encode_center(-3.0001, cfg), std::out_of_range);
  CHECK_THROWS_AS(decode_center(12, 0.0, cfg), std::out_of_range);
}

TEST_CASE("center codec roundtrip and residual bound") {
  const auto cfg = BoxCodecConfig::make(3.0, 0.5, 12);
  Rng rng = make_rng(7);
  std::uniform_real_distribution<double> u(-cfg.scope_S, cfg.scope_S);
  for (int i = 0; i < 1000; ++i) {
    double k = u(rng);
    if (k >= cfg.scope_S) continue;
    auto [bin, res] = encode_center(k, cfg);
    CHECK(bin >= 0);
    CHECK(bin < cfg.num_center_bins);
    CHECK(std::abs(res) <= cfg.bin_delta / 2 + 1e-12);
    CHECK(decode_center(bin, res, cfg) == doctest::Approx(k).epsilon(1e-9));
  }
}

TEST_CASE("rotation codec") {
  const auto cfg = BoxCodecConfig::make(3.0, 0.5, 12);

  auto [bin, res] = encode_rotation(kPi, cfg);
  CHECK(bin == 6);
  CHECK(std::abs(res) < 1e-12);

  auto [bin_wrap, res_wrap] = encode_rotation(kTwoPi - 0.01, cfg);
  CHECK(bin_wrap == 0);
  CHECK(res_wrap < 0.0);

  Rng rng = make_rng(11);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int i = 0; i < 1000; ++i) {
    const double r = u(rng);
    auto [b, rr] = encode_rotation(r, cfg);
    CHECK(b >= 0);
    CHECK(b < cfg.num_rot_bins);
    CHECK(std::abs(rr) <= cfg.rot_alpha / 2 + 1e-12);
    const double back = decode_rotation(b, rr, cfg);
    const double diff = std::abs(wrap_angle(back - r + kPi) - kPi);
    CHECK(diff < 1e-9);
    // 2*pi periodicity
    auto [b2, rr2] = encode_rotation(r + kTwoPi, cfg);
    CHECK(b2 == b);
    CHECK(rr2 == doctest::Approx(rr).epsilon(1e-9));
  }
}

TEST_CASE("decode_box inverts encoded channels") {
  const auto cfg = BoxCodecConfig::make(3.0, 0.5, 12);
  const DetChannels ch = DetChannels::from(cfg);
  CHECK(ch.count() == 44);

  Rng rng = make_rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    Box7 gt = random_box(rng, 5.0);
    gt.h = cfg.anchor_hwl[0] * std::uniform_real_distribution<double>(0.8, 1.2)(rng);
    gt.w = cfg.anchor_hwl[1] * std::uniform_real_distribution<double>(0.8, 1.2)(rng);
    gt.l = cfg.anchor_hwl[2] * std::uniform_real_distribution<double>(0.8, 1.2)(rng);

    // A point inside the box (box-frame sample), guaranteed within scope.
    std::uniform_real_distribution<double> u(-0.45, 0.45);
    const double fu = u(rng) * gt.l, fv = u(rng) * gt.w, fy = u(rng) * gt.h;
    const double c = std::cos(gt.r), s = std::sin(gt.r);
    const Vec3 p(gt.x + fu * c - fv * s, gt.y + fy, gt.z + fu * s + fv * c);

    Eigen::RowVectorXd row = Eigen::RowVectorXd::Constant(ch.count(), -5.0);
    auto [xb, xr] = encode_center(gt.x - p.x(), cfg);
    auto [zb, zr] = encode_center(gt.z - p.z(), cfg);
    auto [rb, rr] = encode_rotation(gt.r, cfg);
    row[ch.x_bins() + xb] = 5.0;
    row[ch.z_bins() + zb] = 5.0;
    row[ch.r_bins() + rb] = 5.0;
    row[ch.x_res()] = xr / (cfg.bin_delta / 2);
    row[ch.z_res()] = zr / (cfg.bin_delta / 2);
    row[ch.y_off()] = gt.y - p.y();
    row[ch.r_res()] = rr / (cfg.rot_alpha / 2);
    row[ch.hwl() + 0] = gt.h - cfg.anchor_hwl[0];
    row[ch.hwl() + 1] = gt.w - cfg.anchor_hwl[1];
    row[ch.hwl() + 2] = gt.l - cfg.anchor_hwl[2];

    const DecodedBox decoded = decode_box(p, row, cfg);
    CHECK(!decoded.clamped);
    CHECK(decoded.box.x == doctest::Approx(gt.x).epsilon(1e-6));
    CHECK(decoded.box.y == doctest::Approx(gt.y).epsilon(1e-6));
    CHECK(decoded.box.z == doctest::Approx(gt.z).epsilon(1e-6));
    CHECK(decoded.box.h == doctest::Approx(gt.h).epsilon(1e-6));
    CHECK(decoded.box.w == doctest::Approx(gt.w).epsilon(1e-6));
    CHECK(decoded.box.l == doctest::Approx(gt.l).epsilon(1e-6));
    const double rdiff = std::abs(wrap_angle(decoded.box.r - gt.r + kPi) - kPi);
    CHECK(rdiff < 1e-6);
  }
}

TEST_CASE("decode_box clamps degenerate dimensions") {
  const auto cfg = BoxCodecConfig::make(3.0, 0.5, 12);
  const DetChannels ch = DetChannels::from(cfg);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(ch.count());
  row[ch.hwl() + 0] = -cfg.anchor_hwl[0] - 1.0;
  const DecodedBox d = decode_box(Vec3::Zero(), row, cfg);
  CHECK(d.clamped);
  CHECK(d.box.h == doctest::Approx(0.01));
}

TEST_CASE("bev_iou basics") {
  Box7 a{0, 0, 0, 1, 1, 1, 0};
  CHECK(bev_iou(a, a) == doctest::Approx(1.0));

  Box7 far = a;
  far.x = 100.0;
  CHECK(bev_iou(a, far) == doctest::Approx(0.0));

  Box7 shifted = a;
  shifted.x = 0.5;
  CHECK(bev_iou(a, shifted) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  Box7 zero = a;
  zero.w = 0.0;
  CHECK(bev_iou(a, zero) == 0.0);
}

TEST_CASE("bev_iou agrees with the Monte-Carlo oracle") {
  Rng rng = make_rng(1234);
  for (int trial = 0; trial < 25; ++trial) {
    Box7 a = random_box(rng, 2.0);
    Box7 b = random_box(rng, 2.0);
    const double exact = bev_iou(a, b);
    const double approx = oracle_bev_iou(a, b, 200000, mix_seed(99, trial));
    CHECK(std::abs(exact - approx) < 0.015);
    CHECK(exact == doctest::Approx(bev_iou(b, a)).epsilon(1e-12));
    CHECK(exact >= 0.0);
    CHECK(exact <= 1.0);
  }
}

TEST_CASE("nms_bev") {
  Box7 unit{0, 0, 0, 1, 1, 1, 0};

  SUBCASE("identical boxes collapse") {
    std::vector<Box7> boxes{unit, unit};
    auto kept = nms_bev(boxes, {0.9, 0.8}, 0.8);
    CHECK(kept == std::vector<int>{0});
  }
  SUBCASE("disjoint boxes all survive") {
    Box7 b = unit, c = unit;
    b.x = 5;
    c.x = 10;
    auto kept = nms_bev({unit, b, c}, {0.1, 0.9, 0.5}, 0.5);
    CHECK(kept.size() == 3);
    CHECK(kept == std::vector<int>{1, 2, 0});  // sorted by descending score
  }
  SUBCASE("chain suppression keeps only the top") {
    Box7 a = unit, b = unit, c = unit;
    b.x = 0.8;
    c.x = 1.6;
    // a-b and b-c overlap; a-c disjoint; b scores highest.
    auto kept = nms_bev({a, b, c}, {0.5, 0.9, 0.4}, 0.1);
    CHECK(kept == std::vector<int>{1});
  }
  SUBCASE("empty input") {
    CHECK(nms_bev({}, {}, 0.5).empty());
  }
  SUBCASE("idempotent and pairwise below threshold") {
    Rng rng = make_rng(5);
    std::vector<Box7> boxes;
    std::vector<double> scores;
    for (int i = 0; i < 40; ++i) {
      boxes.push_back(random_box(rng, 4.0));
      scores.push_back(std::uniform_real_distribution<double>(0, 1)(rng));
    }
    auto kept = nms_bev(boxes, scores, 0.3);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j)
        CHECK(bev_iou(boxes[static_cast<std::size_t>(kept[i])],
                      boxes[static_cast<std::size_t>(kept[j])]) < 0.3);
    std::vector<Box7> kept_boxes;
    std::vector<double> kept_scores;
    for (int k : kept) {
      kept_boxes.push_back(boxes[static_cast<std::size_t>(k)]);
      kept_scores.push_back(scores[static_cast<std::size_t>(k)]);
    }
    auto again = nms_bev(kept_boxes, kept_scores, 0.3);
    CHECK(again.size() == kept.size());
  }
}

TEST_CASE("points_in_box matches the oracle") {
  Rng rng = make_rng(31);
  Box7 b = random_box(rng);

  Mat center(1, 3);
  center << b.x, b.y, b.z;
  CHECK(points_in_box(center, b)[0] == 1);

  Mat beyond(1, 3);
  beyond << b.x + (b.l / 2 + 1e-6) * std::cos(b.r), b.y,
      b.z + (b.l / 2 + 1e-6) * std::sin(b.r);
  CHECK(points_in_box(beyond, b)[0] == 0);

  Mat pts(1000, 3);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (int i = 0; i < 1000; ++i) pts.row(i) << u(rng), u(rng), u(rng);
  const auto mask = points_in_box(pts, b);
  for (int i = 0; i < 1000; ++i)
    CHECK(static_cast<bool>(mask[static_cast<std::size_t>(i)]) ==
          oracle_point_in_box(pts(i, 0), pts(i, 1), pts(i, 2), b));
}

TEST_CASE("rigid transforms") {
  Rng rng = make_rng(41);
  Mat pts(50, 4);
  for (int i = 0; i < 50; ++i)
    pts.row(i) << std::uniform_real_distribution<double>(-5, 5)(rng),
        std::uniform_real_distribution<double>(-5, 5)(rng),
        std::uniform_real_distribution<double>(-5, 5)(rng),
        std::uniform_real_distribution<double>(0, 1)(rng);

  SUBCASE("identity leaves input unchanged") {
    Mat copy = pts;
    RigidTransform{0.0, 1.0, false}.apply_points(copy);
    CHECK((copy - pts).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("full turn is the identity within 1e-9") {
    Mat copy = pts;
    RigidTransform{kTwoPi, 1.0, false}.apply_points(copy);
    CHECK((copy - pts).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("inverse recovers the input") {
    for (int trial = 0; trial < 20; ++trial) {
      RigidTransform t;
      t.rotation = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
      t.scale = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
      t.flip = trial % 2 == 0;
      Mat copy = pts;
      t.apply_points(copy);
      t.inverse().apply_points(copy);
      CHECK((copy - pts).cwiseAbs().maxCoeff() < 1e-6);

      Box7 b = random_box(rng);
      Box7 back = t.inverse().apply(t.apply(b));
      CHECK(back.x == doctest::Approx(b.x).epsilon(1e-9));
      CHECK(back.z == doctest::Approx(b.z).epsilon(1e-9));
      CHECK(back.l == doctest::Approx(b.l).epsilon(1e-9));
      const double rdiff = std::abs(wrap_angle(back.r - b.r + kPi) - kPi);
      CHECK(rdiff < 1e-9);
    }
  }
  SUBCASE("reflectance is untouched") {
    Mat copy = pts;
    RigidTransform{0.7, 1.1, true}.apply_points(copy);
    CHECK((copy.col(3) - pts.col(3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("containment survives joint transforms") {
    for (int trial = 0; trial < 20; ++trial) {
      Box7 b = random_box(rng);
      Mat cloud(200, 3);
      for (int i = 0; i < 200; ++i)
        cloud.row(i) << b.x + std::uniform_real_distribution<double>(-3, 3)(rng),
            b.y + std::uniform_real_distribution<double>(-3, 3)(rng),
            b.z + std::uniform_real_distribution<double>(-3, 3)(rng);
      const auto before = points_in_box(cloud, b);
      RigidTransform t;
      t.rotation = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
      t.scale = std::uniform_real_distribution<double>(0.8, 1.2)(rng);
      t.flip = trial % 2 == 1;
      Mat moved = cloud;
      t.apply_points(moved);
      const auto after = points_in_box(moved, t.apply(b));
      CHECK(before == after);
    }
  }
}
