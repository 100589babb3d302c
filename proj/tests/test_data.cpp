#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "dass/container.hpp"
#include "dass/pipeline.hpp"
#include "dass/rng.hpp"
#include "dass/synth.hpp"

using namespace dass;

namespace {

GenConfig small_config() {
  GenConfig cfg;
  cfg.ground_points = 400;
  cfg.building_points = 120;
  return cfg;
}

}  // namespace

TEST_CASE("synth_scene is deterministic per seed") {
  const GenConfig cfg = small_config();
  const Scene a = synth_scene(42, cfg);
  const Scene b = synth_scene(42, cfg);
  CHECK(a.cloud.points == b.cloud.points);
  CHECK(a.labels == b.labels);
  REQUIRE(a.boxes.size() == b.boxes.size());
  for (std::size_t i = 0; i < a.boxes.size(); ++i)
    CHECK(a.boxes[i].box.x == b.boxes[i].box.x);

  const Scene c = synth_scene(43, cfg);
  CHECK(a.cloud.points != c.cloud.points);
}

TEST_CASE("zero vehicle density yields no boxes and no vehicle labels") {
  GenConfig cfg = small_config();
  cfg.min_cars = cfg.max_cars = 0;
  cfg.truck_prob = cfg.other_vehicle_prob = 0.0;
  const Scene s = synth_scene(7, cfg);
  CHECK(s.boxes.empty());
  const ClassTable t = ClassTable::desk();
  for (std::int32_t label : s.labels)
    CHECK(std::find(t.vehicle_group.begin(), t.vehicle_group.end(), label) ==
          t.vehicle_group.end());
}

TEST_CASE("vehicle-labeled points lie inside a box of their class") {
  const GenConfig cfg = small_config();
  const ClassTable t = ClassTable::desk();
  for (int si = 0; si < 100; ++si) {
    const Scene s = synth_scene(mix_seed(1000, si), cfg);
    // Precompute masks per box.
    std::vector<std::vector<std::uint8_t>> masks;
    const Mat valid = s.cloud.valid_points();
    for (const auto& lb : s.boxes) masks.push_back(points_in_box(valid, lb.box));
    for (Eigen::Index p = 0; p < s.cloud.valid_count; ++p) {
      const int label = s.labels[static_cast<std::size_t>(p)];
      if (std::find(t.vehicle_group.begin(), t.vehicle_group.end(), label) ==
          t.vehicle_group.end())
        continue;
      bool inside = false;
      for (std::size_t b = 0; b < s.boxes.size(); ++b)
        if (s.boxes[b].cls == label && masks[b][static_cast<std::size_t>(p)]) {
          inside = true;
          break;
        }
      CHECK(inside);
    }
    // Every box holds enough points of its own class.
    for (std::size_t b = 0; b < s.boxes.size(); ++b) {
      int count = 0;
      for (Eigen::Index p = 0; p < s.cloud.valid_count; ++p)
        if (masks[b][static_cast<std::size_t>(p)] &&
            s.labels[static_cast<std::size_t>(p)] == s.boxes[b].cls)
          ++count;
      CHECK(count >= cfg.min_points_per_box);
    }
  }
}

TEST_CASE("make_partial_views splits disjointly and filters boxes") {
  const GenConfig cfg = small_config();
  const auto corpus = synth_corpus(5, 10, cfg);
  auto [seg, det] = make_partial_views(corpus, 0.5, 99);
  CHECK(seg.size() == 5);
  CHECK(det.size() == 5);

  std::set<std::uint64_t> seen;
  for (const auto& v : seg) {
    CHECK(v.kind == ViewKind::kSegOnly);
    CHECK(v.boxes.empty());
    CHECK(!v.labels.empty());
    seen.insert(v.scene_seed);
  }
  const ClassTable t = ClassTable::desk();
  for (const auto& v : det) {
    CHECK(v.kind == ViewKind::kDetOnly);
    CHECK(v.labels.empty());
    for (const auto& lb : v.boxes) CHECK(lb.cls == t.car);
    seen.insert(v.scene_seed);
  }
  CHECK(seen.size() == corpus.size());  // disjoint and covering

  CHECK_THROWS(make_partial_views(corpus, 0.0, 1));
  CHECK_THROWS(make_partial_views(corpus, 1.0, 1));
}

TEST_CASE("fov_crop keeps the forward wedge") {
  Mat pts(3, 4);
  pts << 0, 0, 5, 0.5,    // on the forward axis
      0, 0, -5, 0.5,      // behind the sensor
      4.9, 0, 5, 0.5;     // inside the 45 degree wedge
  PointCloud cloud = PointCloud::from_points(pts);
  std::vector<std::int32_t> labels{1, 2, 3};
  std::vector<LabeledBox> boxes{{{0, 0, 5, 1, 1, 1, 0}, 4, 0},
                                {{0, 0, -5, 1, 1, 1, 0}, 4, 0}};
  fov_crop(cloud, &labels, &boxes, FovConfig{});
  CHECK(cloud.valid_count == 2);
  CHECK(labels == std::vector<std::int32_t>{1, 3});
  CHECK(boxes.size() == 1);
  CHECK(boxes[0].box.z == 5);

  // Idempotent.
  PointCloud again = cloud;
  auto labels2 = labels;
  auto boxes2 = boxes;
  fov_crop(again, &labels2, &boxes2, FovConfig{});
  CHECK(again.points == cloud.points);
  CHECK(labels2 == labels);
  CHECK(boxes2.size() == boxes.size());
}

TEST_CASE("fixed_size_sample") {
  SUBCASE("subsample keeps existing rows") {
    const Scene s = synth_scene(3, small_config());
    PointCloud cloud = s.cloud;
    auto labels = s.labels;
    const Eigen::Index target = cloud.valid_count / 2;
    fixed_size_sample(cloud, &labels, target, 77);
    CHECK(cloud.rows() == target);
    CHECK(cloud.valid_count == target);
    // Membership: every sampled row exists in the input.
    for (Eigen::Index i = 0; i < target; ++i) {
      bool found = false;
      for (Eigen::Index j = 0; j < s.cloud.valid_count && !found; ++j)
        found = (cloud.points.row(i) - s.cloud.points.row(j)).cwiseAbs().sum() == 0.0;
      CHECK(found);
    }
    // Deterministic.
    PointCloud cloud2 = s.cloud;
    auto labels2 = s.labels;
    fixed_size_sample(cloud2, &labels2, target, 77);
    CHECK(cloud.points == cloud2.points);
    CHECK(labels == labels2);
  }
  SUBCASE("padding fills with zeros and ignore labels") {
    Mat pts(2, 4);
    pts << 1, 2, 3, 0.5, 4, 5, 6, 0.25;
    PointCloud cloud = PointCloud::from_points(pts);
    std::vector<std::int32_t> labels{0, 1};
    fixed_size_sample(cloud, &labels, 5, 1);
    CHECK(cloud.rows() == 5);
    CHECK(cloud.valid_count == 2);
    for (Eigen::Index i = 2; i < 5; ++i) {
      CHECK(cloud.points.row(i).cwiseAbs().sum() == 0.0);
      CHECK(labels[static_cast<std::size_t>(i)] == kIgnoreLabel);
    }
  }
  SUBCASE("empty input becomes an all-zero cloud") {
    PointCloud cloud = PointCloud::from_points(Mat::Zero(0, 4));
    std::vector<std::int32_t> labels;
    fixed_size_sample(cloud, &labels, 4, 0);
    CHECK(cloud.rows() == 4);
    CHECK(cloud.valid_count == 0);
    CHECK(cloud.points.cwiseAbs().sum() == 0.0);
  }
}

TEST_CASE("normalize_reflectance shifts valid rows only") {
  Mat pts = Mat::Zero(3, 4);
  pts(0, 3) = 0.5;
  pts(1, 3) = 1.0;
  PointCloud cloud;
  cloud.points = pts;
  cloud.valid_count = 2;
  normalize_reflectance(cloud);
  CHECK(cloud.points(0, 3) == doctest::Approx(0.0));
  CHECK(cloud.points(1, 3) == doctest::Approx(0.5));
  CHECK(cloud.points(2, 3) == 0.0);
}

TEST_CASE("augment_scene") {
  Scene s = synth_scene(9, small_config());

  SUBCASE("disabled policy is the identity") {
    AugmentPolicy off;
    off.enabled = false;
    PointCloud cloud = s.cloud;
    auto boxes = s.boxes;
    const RigidTransform t = augment_scene(cloud, &boxes, 5, off);
    CHECK(t.is_identity());
    CHECK(cloud.points == s.cloud.points);
  }
  SUBCASE("containment masks are preserved") {
    PointCloud cloud = s.cloud;
    auto boxes = s.boxes;
    std::vector<std::vector<std::uint8_t>> before;
    for (const auto& lb : boxes) before.push_back(points_in_box(cloud.points, lb.box));
    augment_scene(cloud, &boxes, 123, AugmentPolicy{});
    for (std::size_t b = 0; b < boxes.size(); ++b)
      CHECK(points_in_box(cloud.points, boxes[b].box) == before[b]);
  }
}

TEST_CASE("gt_box_augment implants banked boxes") {
  const GenConfig cfg = small_config();
  const auto corpus = synth_corpus(77, 6, cfg);
  auto [seg, det] = make_partial_views(corpus, 0.34, 3);
  REQUIRE(!det.empty());
  const auto bank = build_box_bank(det);
  REQUIRE(!bank.empty());

  SUBCASE("empty bank is the identity") {
    PointCloud cloud = det[0].cloud;
    auto boxes = det[0].boxes;
    const int n = gt_box_augment(cloud, boxes, nullptr, {}, 5, GtAugmentConfig{});
    CHECK(n == 0);
    CHECK(cloud.points == det[0].cloud.points);
  }
  SUBCASE("inserted boxes do not overlap and clear their prism") {
    PointCloud cloud = det[0].cloud;
    auto boxes = det[0].boxes;
    const Mat original = cloud.points;
    const std::size_t n_before = boxes.size();
    GtAugmentConfig gcfg;
    gcfg.max_added = 3;
    const int added = gt_box_augment(cloud, boxes, nullptr, bank, 11, gcfg);
    CHECK(added == static_cast<int>(boxes.size() - n_before));
    for (std::size_t i = n_before; i < boxes.size(); ++i) {
      // Bottom sits on the ground plane.
      CHECK(boxes[i].box.y == doctest::Approx(boxes[i].box.h / 2));
      for (std::size_t j = 0; j < i; ++j)
        CHECK(bev_iou(boxes[i].box, boxes[j].box) == 0.0);
      // No original point remains inside the inserted prism.
      Box7 prism = boxes[i].box;
      prism.y = 0;
      prism.h = 1e6;
      const auto mask = points_in_box(original, prism);
      for (Eigen::Index p = 0; p < original.rows(); ++p) {
        if (!mask[static_cast<std::size_t>(p)]) continue;
        bool still_there = false;
        for (Eigen::Index q = 0; q < cloud.rows() && !still_there; ++q)
          still_there =
              (cloud.points.row(q) - original.row(p)).cwiseAbs().sum() == 0.0;
        CHECK(!still_there);
      }
    }
  }
}

TEST_CASE("range_filter uses closed intervals") {
  std::vector<LabeledBox> boxes{
      {{0, 0, 10, 1, 1, 1, 0}, 4, 0},
      {{0, 0, 80, 1, 1, 1, 0}, 4, 0},
      {{40, 3, 70.4, 1, 1, 1, 0}, 4, 0},
  };
  const auto kept = range_filter(boxes);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].box.z == 10);
  CHECK(kept[1].box.x == 40);
}

TEST_CASE("scene container roundtrip is byte-stable") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dass_test_container";
  fs::create_directories(dir);
  const Scene s = synth_scene(21, small_config());

  write_scene(dir / "a.dsc", s);
  write_scene(dir / "b.dsc", s);
  CHECK(read_file_bytes(dir / "a.dsc") == read_file_bytes(dir / "b.dsc"));

  const Scene back = read_scene(dir / "a.dsc");
  CHECK(back.cloud.points == s.cloud.points);
  CHECK(back.labels == s.labels);
  REQUIRE(back.boxes.size() == s.boxes.size());
  for (std::size_t i = 0; i < s.boxes.size(); ++i) {
    CHECK(back.boxes[i].cls == s.boxes[i].cls);
    CHECK(back.boxes[i].box.r == s.boxes[i].box.r);
  }
  fs::remove_all(dir);
}

TEST_CASE("corpus write/read with manifest hash") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dass_test_corpus";
  fs::remove_all(dir);
  const GenConfig cfg = small_config();
  const auto train = synth_corpus(1, 3, cfg);
  const auto test = synth_corpus(2, 2, cfg);

  const auto manifest = write_corpus(dir, train, test, {{"note", "unit"}}, 1);
  CHECK(manifest.at("train").size() == 3);
  CHECK(manifest.at("test").size() == 2);

  const auto back = read_corpus(dir);
  CHECK(back.train.size() == 3);
  CHECK(back.test.size() == 2);
  CHECK(back.train[0].cloud.points == train[0].cloud.points);
  CHECK(back.manifest.at("content_hash") == manifest.at("content_hash"));

  // Re-writing the same corpus reproduces the hash.
  const fs::path dir2 = fs::temp_directory_path() / "dass_test_corpus2";
  fs::remove_all(dir2);
  const auto manifest2 = write_corpus(dir2, train, test, {{"note", "unit"}}, 1);
  CHECK(manifest2.at("content_hash") == manifest.at("content_hash"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}
