#pragma once

#include <cstdint>
#include <vector>

#include "dass/types.hpp"

namespace dass {

// Synthetic scene generator. Scenes live on the ground plane y = 0 and span
// x in [-half_width, half_width], z in [min_depth, depth]. Surfaces are
// sampled with Gaussian noise; vehicle points are kept strictly inside their
// boxes so point/box membership is exact.
struct GenConfig {
  double half_width = 10.0;
  double depth = 20.0;
  double min_depth = 1.0;
  double noise_sigma = 0.03;

  // Raw point budget per scene before fixed-size sampling.
  int ground_points = 1400;
  int points_per_sqm_vehicle = 60;  // scaled by surface area, clamped below
  int min_points_per_box = 24;
  int building_points = 350;
  int pole_points = 40;    // per pole
  int fence_points = 120;  // per fence strip

  // Instance counts (uniform ranges; expectation drives class imbalance).
  int min_cars = 2, max_cars = 4;
  double truck_prob = 0.4;          // ~8x rarer than cars in points
  double other_vehicle_prob = 0.45;
  int min_pedestrians = 0, max_pedestrians = 2;
  int min_buildings = 1, max_buildings = 2;
  int min_poles = 2, max_poles = 5;
  int min_fences = 1, max_fences = 2;

  // Vehicle size model. Cars jitter +-10% around the anchor and include a
  // van-like long/tall mode; trucks scale length/height ~1.8x; other-vehicle
  // sits in between.
  std::array<double, 3> car_anchor_hwl = {1.5, 1.6, 3.9};
  double van_prob = 0.2;
  double truck_scale = 1.8;
  double other_scale = 1.4;
};

Scene synth_scene(std::uint64_t seed, const GenConfig& cfg);

// Deterministic corpus: scene i uses seed mix(seed, i).
std::vector<Scene> synth_corpus(std::uint64_t seed, int num_scenes,
                                const GenConfig& cfg);

// Splits a corpus into disjoint seg-only and det-only views. The first
// round(ratio * n) scenes of a seeded shuffle become seg views, the rest det
// views. Det views keep car-class boxes only.
std::pair<std::vector<PartialView>, std::vector<PartialView>> make_partial_views(
    const std::vector<Scene>& corpus, double split_ratio, std::uint64_t seed);

PartialView seg_view_of(const Scene& scene);
PartialView det_view_of(const Scene& scene, const ClassTable& classes);

}  // namespace dass
