#include <doctest.h>

#include <random>

#include "dass/errors.hpp"
#include "dass/kitti.hpp"
#include "dass/rng.hpp"

using namespace dass;

TEST_CASE("velodyne bin parser") {
  SUBCASE("sixteen zero bytes decode to one zero point") {
    const auto cloud = parse_velodyne_bin(std::vector<std::uint8_t>(16, 0));
    CHECK(cloud.rows() == 1);
    CHECK(cloud.points.row(0).cwiseAbs().sum() == 0.0);
  }
  SUBCASE("empty input") {
    CHECK(parse_velodyne_bin({}).rows() == 0);
  }
  SUBCASE("misaligned length raises a format error") {
    CHECK_THROWS_AS(parse_velodyne_bin(std::vector<std::uint8_t>(7, 0)), FormatError);
  }
  SUBCASE("serialize(parse(bytes)) == bytes") {
    Rng rng = make_rng(17);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::uint8_t> bytes(16 * (1 + trial));
      for (auto& b : bytes) b = static_cast<std::uint8_t>(byte(rng));
      // Avoid NaN payload bit patterns changing under f32 round-trip: build
      // from real floats instead.
      PointCloud cloud = parse_velodyne_bin(bytes);
      if (!cloud.points.allFinite()) continue;
      CHECK(serialize_velodyne_bin(cloud) == bytes);
    }
  }
}

TEST_CASE("semantickitti label words") {
  SUBCASE("zero word") {
    const auto words = parse_semantickitti_labels({0, 0, 0, 0});
    CHECK(words.semantic[0] == 0);
    CHECK(words.instance[0] == 0);
  }
  SUBCASE("bit fields split as low/high halves") {
    // 0x0001000A -> semantic 10, instance 1 (little endian bytes)
    const auto words = parse_semantickitti_labels({0x0A, 0x00, 0x01, 0x00});
    CHECK(words.semantic[0] == 10);
    CHECK(words.instance[0] == 1);
  }
  SUBCASE("roundtrip") {
    LabelWords w;
    Rng rng = make_rng(3);
    std::uniform_int_distribution<int> u16(0, 65535);
    for (int i = 0; i < 257; ++i) {
      w.semantic.push_back(static_cast<std::uint16_t>(u16(rng)));
      w.instance.push_back(static_cast<std::uint16_t>(u16(rng)));
    }
    const auto bytes = serialize_semantickitti_labels(w);
    const auto back = parse_semantickitti_labels(bytes);
    CHECK(back.semantic == w.semantic);
    CHECK(back.instance == w.instance);
    CHECK(serialize_semantickitti_labels(back) == bytes);
  }
  SUBCASE("misaligned length") {
    CHECK_THROWS_AS(parse_semantickitti_labels({1, 2, 3}), FormatError);
  }
}

TEST_CASE("label remap counts unknown ids") {
  const std::vector<std::pair<std::uint16_t, std::int32_t>> table{{10, 0}, {40, 1}};
  const auto res = remap_labels({10, 40, 99, 10}, table);
  CHECK(res.labels == std::vector<std::int32_t>{0, 1, kIgnoreLabel, 0});
  CHECK(res.unknown_count == 1);
}

TEST_CASE("kitti object label parsing") {
  const std::string text =
      "Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59\n"
      "Van 0.00 2 -1.55 100.0 150.0 200.0 250.0 2.00 1.80 5.00 5.00 1.60 20.00 0.50\n"
      "DontCare -1 -1 -10 500.0 100.0 600.0 200.0 -1 -1 -1 -1000 -1000 -1000 -10\n";
  const auto objects = parse_kitti_object_labels(text);
  REQUIRE(objects.size() == 2);
  CHECK(objects[0].type == "Car");
  CHECK(objects[0].box.h == doctest::Approx(1.65));
  CHECK(objects[0].box.x == doctest::Approx(-0.65));
  CHECK(objects[0].box.r == doctest::Approx(-1.59));
  CHECK(objects[1].type == "Car");  // Van merged into Car
  CHECK(objects[1].box.l == doctest::Approx(5.0));

  CHECK_THROWS_AS(parse_kitti_object_labels("Car 1.0 0\n"), FormatError);
  try {
    parse_kitti_object_labels("Car 0 0 0 0 0 0 0 1 1 1 0 0 10 0\nCar bad\n");
    CHECK(false);
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  const auto echoed = parse_kitti_object_labels(serialize_kitti_object_labels(objects));
  REQUIRE(echoed.size() == objects.size());
  CHECK(echoed[0].box.x == doctest::Approx(objects[0].box.x).epsilon(1e-6));
}

TEST_CASE("kitti calib and frame conversion") {
  SUBCASE("identity calib leaves locations unchanged") {
    KittiCalib calib;  // identity
    KittiObject obj;
    obj.type = "Car";
    obj.box = {1.0, 2.0, 3.0, 1.5, 1.6, 3.9, 0.3};
    const auto lidar = cam_boxes_to_lidar({obj}, calib);
    CHECK(lidar[0].box.x == doctest::Approx(1.0));
    CHECK(lidar[0].box.y == doctest::Approx(2.0));
    CHECK(lidar[0].box.z == doctest::Approx(3.0));
  }
  SUBCASE("known transform fixture") {
    // Velodyne-to-camera: swap axes (x_c = -y_v, y_c = -z_v, z_c = x_v) plus
    // a translation of (0.1, -0.2, 0.3); R0 stays identity.
    const std::string calib_text =
        "P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"
        "R0_rect: 1 0 0 0 1 0 0 0 1\n"
        "Tr_velo_to_cam: 0 -1 0 0.1 0 0 -1 -0.2 1 0 0 0.3\n";
    const KittiCalib calib = parse_kitti_calib(calib_text);
    KittiObject obj;
    obj.type = "Car";
    obj.box = {0.0, 0.0, 0.0, 1.5, 1.6, 3.9, 0.0};
    // Hand inverse: cam (0,0,0) -> velo: solve Tr * v = c.
    // v_x = c_z - 0.3 = -0.3; v_y = -(c_x - 0.1) = 0.1; v_z = -(c_y + 0.2) = -0.2
    const auto lidar = cam_boxes_to_lidar({obj}, calib);
    CHECK(lidar[0].box.x == doctest::Approx(-0.3).epsilon(1e-9));
    CHECK(lidar[0].box.y == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(lidar[0].box.z == doctest::Approx(-0.2).epsilon(1e-9));

    const auto back = lidar_boxes_to_cam(lidar, calib);
    CHECK(back[0].box.x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(back[0].box.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(back[0].box.z == doctest::Approx(0.0).epsilon(1e-9));
    const double rdiff =
        std::abs(wrap_angle(back[0].box.r - obj.box.r + kPi) - kPi);
    CHECK(rdiff < 1e-9);
  }
  SUBCASE("missing entries raise") {
    CHECK_THROWS_AS(parse_kitti_calib("P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"), FormatError);
  }
}

TEST_CASE("velodyne/internal frame permutation roundtrip") {
  Mat pts(2, 4);
  pts << 1, 2, 3, 0.5, -4, 5, -6, 0.25;
  PointCloud cloud = PointCloud::from_points(pts);
  PointCloud converted = cloud;
  velodyne_to_internal(converted);
  // x fwd -> z fwd; y left -> -x; z up -> y
  CHECK(converted.points(0, 2) == 1);
  CHECK(converted.points(0, 0) == -2);
  CHECK(converted.points(0, 1) == 3);
  internal_to_velodyne(converted);
  CHECK(converted.points == cloud.points);
}
