#include <doctest.h>

#include <cmath>

#include "dass/eval.hpp"
#include "dass/losses.hpp"
#include "dass/rng.hpp"

using namespace dass;

TEST_CASE("miou") {
  SUBCASE("perfect prediction") {
    ConfusionMatrix conf(3);
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < 5; ++i) conf.add(c, c);
    const auto r = miou(conf);
    CHECK(r.mean == doctest::Approx(1.0));
    for (int c = 0; c < 3; ++c) CHECK(r.per_class[c] == doctest::Approx(1.0));
  }
  SUBCASE("TP=3 FP=1 FN=2 gives IoU 0.5") {
    ConfusionMatrix conf(2);
    for (int i = 0; i < 3; ++i) conf.add(0, 0);  // TP for class 0
    conf.add(1, 0);                              // FP for class 0
    conf.add(0, 1);
    conf.add(0, 1);  // FN for class 0
    const auto r = miou(conf);
    CHECK(r.per_class[0] == doctest::Approx(0.5));
  }
  SUBCASE("absent classes are excluded from the mean") {
    ConfusionMatrix conf(3);
    for (int i = 0; i < 4; ++i) conf.add(0, 0);
    conf.add(1, 0);
    const auto r = miou(conf);
    CHECK(r.valid == std::vector<std::uint8_t>{1, 1, 0});
    CHECK(r.mean == doctest::Approx((0.8 + 0.0) / 2));
  }
  SUBCASE("invariant under class relabeling") {
    Rng rng = make_rng(3);
    ConfusionMatrix conf(4);
    std::uniform_int_distribution<int> cls(0, 3);
    for (int i = 0; i < 500; ++i) conf.add(cls(rng), cls(rng));
    const auto base = miou(conf);
    // Permute rows+cols consistently.
    const std::array<int, 4> perm{2, 0, 3, 1};
    ConfusionMatrix permuted(4);
    for (int g = 0; g < 4; ++g)
      for (int p = 0; p < 4; ++p)
        for (std::int64_t k = 0; k < conf.at(g, p); ++k)
          permuted.add(perm[static_cast<std::size_t>(g)],
                       perm[static_cast<std::size_t>(p)]);
    const auto r = miou(permuted);
    CHECK(r.mean == doctest::Approx(base.mean).epsilon(1e-12));
    for (int c = 0; c < 4; ++c)
      CHECK(r.per_class[perm[static_cast<std::size_t>(c)]] ==
            doctest::Approx(base.per_class[c]).epsilon(1e-12));
  }
}

TEST_CASE("recall_at_iou") {
  const std::vector<double> thresholds{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<Box7> gt{{0, 0, 5, 1.5, 1.6, 3.9, 0.3}, {6, 0, 9, 1.5, 1.6, 3.9, 2.0}};

  SUBCASE("proposals equal to gt recall everything") {
    const auto r = recall_at_iou(gt, gt, thresholds);
    REQUIRE(r.defined());
    for (double v : r.recall) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("empty proposals recall nothing") {
    const auto r = recall_at_iou({}, gt, thresholds);
    for (double v : r.recall) CHECK(v == 0.0);
  }
  SUBCASE("zero gt boxes reports absence") {
    const auto r = recall_at_iou(gt, {}, thresholds);
    CHECK(!r.defined());
    CHECK(r.recall.empty());
  }
  SUBCASE("single overlapping proposal against brute force") {
    // One proposal hits gt[0] with a mid IoU; gt[1] untouched.
    Box7 prop = gt[0];
    prop.x += 0.8;  // partial overlap
    const double iou = bev_iou(prop, gt[0]);
    REQUIRE(iou > 0.3);
    REQUIRE(iou < 0.7);
    const auto r = recall_at_iou({prop}, gt, thresholds);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      const double expect = thresholds[t] <= iou ? 0.5 : 0.0;
      CHECK(r.recall[t] == doctest::Approx(expect));
    }
    // Monotone non-increasing.
    for (std::size_t t = 1; t < r.recall.size(); ++t)
      CHECK(r.recall[t] <= r.recall[t - 1] + 1e-12);
  }
}

TEST_CASE("select_proposals") {
  ProposalConfig cfg;
  cfg.top_n = 16;
  cfg.final_m = 8;
  cfg.near_boundary = 10.0;

  SUBCASE("few disjoint inputs all survive") {
    ProposalSet raw;
    for (int i = 0; i < 5; ++i) {
      raw.boxes.push_back({i * 10.0, 0, 5.0, 1.5, 1.6, 3.9, 0});
      raw.scores.push_back(1.0 - 0.1 * i);
      raw.point_indices.push_back(i);
    }
    const auto sel = select_proposals(raw, cfg);
    CHECK(sel.boxes.size() == 5);
  }
  SUBCASE("duplicates collapse to one") {
    ProposalSet raw;
    for (int i = 0; i < 6; ++i) {
      raw.boxes.push_back({0, 0, 5, 1.5, 1.6, 3.9, 0});
      raw.scores.push_back(1.0 - 0.01 * i);
      raw.point_indices.push_back(i);
    }
    const auto sel = select_proposals(raw, cfg);
    CHECK(sel.boxes.size() == 1);
    CHECK(sel.scores[0] == doctest::Approx(1.0));
  }
  SUBCASE("survivors respect the NMS threshold and size cap") {
    Rng rng = make_rng(17);
    ProposalSet raw;
    std::uniform_real_distribution<double> pos(-8, 8), depth(1, 20), rot(0, kTwoPi);
    for (int i = 0; i < 64; ++i) {
      raw.boxes.push_back({pos(rng), 0.8, depth(rng), 1.5, 1.6, 3.9, rot(rng)});
      raw.scores.push_back(1.0 - i * 0.01);
      raw.point_indices.push_back(i);
    }
    const auto sel = select_proposals(raw, cfg);
    CHECK(sel.boxes.size() <= static_cast<std::size_t>(cfg.final_m));
    for (std::size_t i = 0; i < sel.boxes.size(); ++i)
      for (std::size_t j = i + 1; j < sel.boxes.size(); ++j)
        CHECK(bev_iou(sel.boxes[i], sel.boxes[j]) < cfg.nms_threshold);
    // Deterministic.
    const auto again = select_proposals(raw, cfg);
    CHECK(again.scores == sel.scores);
  }
}

TEST_CASE("oracle channels drive recall to 1") {
  // Build detection channels directly from the targets of a synthetic scene:
  // decode + selection must then recover every gt box.
  GenConfig gen;
  gen.ground_points = 300;
  gen.min_cars = 2;
  gen.max_cars = 3;
  const Scene scene = synth_scene(31, gen);
  const ClassTable classes = ClassTable::desk();

  std::vector<LabeledBox> car_boxes;
  for (const auto& lb : scene.boxes)
    if (lb.cls == classes.car) car_boxes.push_back(lb);
  REQUIRE(!car_boxes.empty());

  const auto codec = BoxCodecConfig::make(3.0, 0.5, 12);
  const DetChannels ch = DetChannels::from(codec);
  const Mat xyz = scene.cloud.valid_points().leftCols(3);
  const auto targets = det_targets(xyz, car_boxes, codec);

  Mat rows = Mat::Zero(xyz.rows(), ch.count());
  for (Eigen::Index i = 0; i < xyz.rows(); ++i) {
    rows.row(i).segment(ch.x_bins(), ch.center_bins).setConstant(-30);
    rows.row(i).segment(ch.z_bins(), ch.center_bins).setConstant(-30);
    rows.row(i).segment(ch.r_bins(), ch.rot_bins).setConstant(-30);
    if (!targets.fg_mask[static_cast<std::size_t>(i)]) {
      rows(i, ch.objectness()) = -30;
      continue;
    }
    const auto& bt = targets.bins[static_cast<std::size_t>(i)];
    rows(i, ch.x_bins() + bt.x_bin) = 30;
    rows(i, ch.z_bins() + bt.z_bin) = 30;
    rows(i, ch.r_bins() + bt.r_bin) = 30;
    rows(i, ch.x_res()) = bt.x_res / (codec.bin_delta / 2);
    rows(i, ch.z_res()) = bt.z_res / (codec.bin_delta / 2);
    rows(i, ch.r_res()) = bt.r_res / (codec.rot_alpha / 2);
    rows(i, ch.y_off()) = bt.y_off;
    for (int d = 0; d < 3; ++d)
      rows(i, ch.hwl() + d) = bt.hwl_res[static_cast<std::size_t>(d)];
    rows(i, ch.objectness()) = 30;
  }

  const ProposalSet raw = proposals_from_channels(xyz, rows, codec);
  ProposalConfig pcfg;
  pcfg.top_n = 256;
  pcfg.final_m = 32;
  pcfg.near_boundary = 10.0;
  const ProposalSet sel = select_proposals(raw, pcfg);

  std::vector<Box7> gt;
  for (const auto& lb : car_boxes) gt.push_back(lb.box);
  const auto r = recall_at_iou(sel.boxes, gt, {0.5, 0.7, 0.9});
  REQUIRE(r.defined());
  CHECK(r.recall[0] == doctest::Approx(1.0));
  CHECK(r.recall[1] == doctest::Approx(1.0));
  CHECK(r.recall[2] == doctest::Approx(1.0));
}

TEST_CASE("evaluate_model smoke on an untrained model") {
  GenConfig gen;
  gen.ground_points = 250;
  const auto seg_test = synth_corpus(71, 3, gen);
  const auto det_test = synth_corpus(72, 3, gen);

  ModelConfig mcfg = ModelConfig::tiny(8);
  mcfg.codec = BoxCodecConfig::make(3.0, 0.5, 12);
  DassModel model = DassModel::create(mcfg, 2);

  EvalConfig cfg;
  cfg.points_per_scene = 128;
  cfg.proposals.top_n = 64;
  cfg.proposals.final_m = 16;
  cfg.recall_3d = true;

  const EvalReport a = evaluate_model(model, seg_test, det_test, ClassTable::desk(), cfg);
  CHECK(std::isfinite(a.miou));
  CHECK(a.eval_points > 0);
  CHECK(a.num_gt_boxes > 0);
  REQUIRE(!a.recall.empty());
  for (double r : a.recall) {
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  CHECK(a.recall_3d.size() == a.recall.size());

  // Reproducible.
  const EvalReport b = evaluate_model(model, seg_test, det_test, ClassTable::desk(), cfg);
  CHECK(a.to_json() == b.to_json());

  // Report renders.
  CHECK(a.to_text().find("mIoU") != std::string::npos);
}
