#include "dass/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dass/errors.hpp"
#include "dass/rng.hpp"

namespace dass {

int ClassTable::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw DataError("unknown class name: " + name);
}

ClassTable ClassTable::desk() {
  ClassTable t;
  t.names = {"ground",  "building", "pole",          "fence",
             "car",     "truck",    "other-vehicle", "pedestrian"};
  t.vehicle_group = {4, 5, 6};
  t.car = 4;
  return t;
}

void Scene::check() const {
  if (static_cast<Eigen::Index>(labels.size()) != cloud.valid_count)
    throw DataError("scene: labels length must equal valid point count");
  if (!cloud.points.allFinite()) throw DataError("scene: non-finite point data");
  for (Eigen::Index i = cloud.valid_count; i < cloud.rows(); ++i)
    if (cloud.points.row(i).cwiseAbs().sum() != 0.0)
      throw DataError("scene: padded rows must be exactly zero");
  for (const auto& b : boxes)
    if (b.box.h <= 0 || b.box.w <= 0 || b.box.l <= 0)
      throw DataError("scene: degenerate box dimensions");
}

namespace {

struct Builder {
  std::vector<Eigen::RowVector4d> pts;
  std::vector<std::int32_t> labels;
  Rng rng;
  double sigma;

  explicit Builder(std::uint64_t seed, double noise_sigma)
      : rng(make_rng(seed)), sigma(noise_sigma) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(rng); }
  double gauss() { return std::normal_distribution<double>(0.0, sigma)(rng); }

  void add(double x, double y, double z, double refl) {
    pts.emplace_back(x, y, z, std::clamp(refl, 0.0, 1.0));
  }
};

// Samples a point on one of the five exposed faces of a vehicle cuboid
// (no bottom), adds noise, and clamps it back inside the box so membership
// stays exact.
void sample_vehicle_points(Builder& b, const Box7& box, int count, int label,
                           double base_refl,
                           std::vector<Eigen::RowVector4d>* pts,
                           std::vector<std::int32_t>* labels) {
  const double hl = box.l / 2, hw = box.w / 2, hh = box.h / 2;
  // Face areas: top, 2 sides (l*h), front/back (w*h).
  const double a_top = box.l * box.w;
  const double a_side = box.l * box.h;
  const double a_end = box.w * box.h;
  const double areas[5] = {a_top, a_side, a_side, a_end, a_end};
  double total = 0;
  for (double a : areas) total += a;

  const double c = std::cos(box.r), s = std::sin(box.r);
  const double margin = 1e-4;
  for (int i = 0; i < count; ++i) {
    double pick = b.uniform(0.0, total);
    int face = 0;
    while (face < 4 && pick > areas[face]) pick -= areas[face], ++face;

    // Box-frame coordinates: u along heading, v across, w_up elevation.
    double u = b.uniform(-hl, hl), v = b.uniform(-hw, hw), y = b.uniform(-hh, hh);
    switch (face) {
      case 0: y = hh; break;
      case 1: v = hw; break;
      case 2: v = -hw; break;
      case 3: u = hl; break;
      case 4: u = -hl; break;
    }
    u = std::clamp(u + b.gauss(), -hl + margin, hl - margin);
    v = std::clamp(v + b.gauss(), -hw + margin, hw - margin);
    y = std::clamp(y + b.gauss(), -hh + margin, hh - margin);

    const double x = box.x + u * c - v * s;
    const double z = box.z + u * s + v * c;
    pts->emplace_back(x, box.y + y, z,
                      std::clamp(base_refl + 0.1 * b.uniform(-1, 1), 0.0, 1.0));
    labels->push_back(label);
  }
}

bool overlaps_any(const Box7& candidate, const std::vector<LabeledBox>& placed) {
  for (const auto& other : placed)
    if (bev_iou(candidate, other.box) > 0.0) return true;
  return false;
}

}  // namespace

Scene synth_scene(std::uint64_t seed, const GenConfig& cfg) {
  Builder b(seed, cfg.noise_sigma);
  const ClassTable classes = ClassTable::desk();
  const int kGround = 0, kBuilding = 1, kPole = 2, kFence = 3;
  const int kCar = 4, kTruck = 5, kOther = 6, kPedestrian = 7;

  Scene scene;
  scene.seed = seed;

  // Vehicles first so ground sampling can respect their footprints.
  struct Spawn {
    int cls;
    std::array<double, 3> hwl;
  };
  std::vector<Spawn> spawns;
  const int n_cars = b.uniform_int(cfg.min_cars, cfg.max_cars);
  for (int i = 0; i < n_cars; ++i) {
    std::array<double, 3> hwl = cfg.car_anchor_hwl;
    if (b.bernoulli(cfg.van_prob)) hwl = {1.9, 1.7, 4.9};  // van-like mode
    for (double& d : hwl) d *= 1.0 + 0.1 * b.uniform(-1, 1);
    spawns.push_back({kCar, hwl});
  }
  if (b.bernoulli(cfg.truck_prob)) {
    std::array<double, 3> hwl = {cfg.car_anchor_hwl[0] * cfg.truck_scale,
                                 cfg.car_anchor_hwl[1] * 1.15,
                                 cfg.car_anchor_hwl[2] * cfg.truck_scale};
    for (double& d : hwl) d *= 1.0 + 0.08 * b.uniform(-1, 1);
    spawns.push_back({kTruck, hwl});
  }
  if (b.bernoulli(cfg.other_vehicle_prob)) {
    std::array<double, 3> hwl = {cfg.car_anchor_hwl[0] * cfg.other_scale,
                                 cfg.car_anchor_hwl[1] * 1.08,
                                 cfg.car_anchor_hwl[2] * cfg.other_scale};
    for (double& d : hwl) d *= 1.0 + 0.08 * b.uniform(-1, 1);
    spawns.push_back({kOther, hwl});
  }

  for (const auto& sp : spawns) {
    for (int attempt = 0; attempt < 40; ++attempt) {
      Box7 box;
      box.h = sp.hwl[0];
      box.w = sp.hwl[1];
      box.l = sp.hwl[2];
      box.x = b.uniform(-cfg.half_width + 2.5, cfg.half_width - 2.5);
      box.z = b.uniform(cfg.min_depth + 3.0, cfg.depth - 2.5);
      box.y = box.h / 2;  // bottom on the ground plane
      box.r = wrap_angle(b.uniform(0.0, kTwoPi));
      if (overlaps_any(box, scene.boxes)) continue;

      const double area = 2 * box.l * box.h + 2 * box.w * box.h + box.l * box.w;
      const int count =
          std::clamp(static_cast<int>(area * cfg.points_per_sqm_vehicle),
                     cfg.min_points_per_box, 320);
      const double refl = sp.cls == kCar ? 0.65 : (sp.cls == kTruck ? 0.55 : 0.6);
      sample_vehicle_points(b, box, count, sp.cls, refl, &b.pts, &b.labels);
      scene.boxes.push_back({box, sp.cls, 0.0});
      break;
    }
  }

  // Pedestrians: thin cylinders, labeled but not boxed.
  const int n_ped = b.uniform_int(cfg.min_pedestrians, cfg.max_pedestrians);
  for (int i = 0; i < n_ped; ++i) {
    const double px = b.uniform(-cfg.half_width + 1.5, cfg.half_width - 1.5);
    const double pz = b.uniform(cfg.min_depth + 1.5, cfg.depth - 1.5);
    const double height = b.uniform(1.5, 1.9);
    for (int j = 0; j < 30; ++j) {
      const double a = b.uniform(0.0, kTwoPi);
      b.add(px + 0.22 * std::cos(a) + b.gauss(), b.uniform(0.05, height),
            pz + 0.22 * std::sin(a) + b.gauss(), 0.3 + 0.05 * b.uniform(-1, 1));
      b.labels.push_back(kPedestrian);
    }
  }

  // Ground, skipping vehicle footprints (crude occlusion).
  std::vector<Box7> footprints;
  for (const auto& lb : scene.boxes) {
    Box7 f = lb.box;
    f.h = 1e3;  // vertical prism
    f.y = 0;
    f.w *= 1.05;
    f.l *= 1.05;
    footprints.push_back(f);
  }
  Mat probe(1, 3);
  int added = 0;
  for (int guard = 0; added < cfg.ground_points && guard < cfg.ground_points * 4;
       ++guard) {
    const double x = b.uniform(-cfg.half_width, cfg.half_width);
    const double z = b.uniform(cfg.min_depth, cfg.depth);
    probe << x, 0.0, z;
    bool covered = false;
    for (const auto& f : footprints)
      if (points_in_box(probe, f)[0]) {
        covered = true;
        break;
      }
    if (covered) continue;
    b.add(x, b.gauss(), z, 0.15 + 0.05 * b.uniform(-1, 1));
    b.labels.push_back(kGround);
    ++added;
  }

  // Building facades along the lateral scene borders.
  const int n_bld = b.uniform_int(cfg.min_buildings, cfg.max_buildings);
  for (int i = 0; i < n_bld; ++i) {
    const double side = b.bernoulli(0.5) ? 1.0 : -1.0;
    const double bx = side * (cfg.half_width - 0.3);
    const double z0 = b.uniform(cfg.min_depth, cfg.depth * 0.5);
    const double len = b.uniform(5.0, cfg.depth - z0 - 0.5);
    const double height = b.uniform(3.0, 6.0);
    for (int j = 0; j < cfg.building_points; ++j) {
      b.add(bx + b.gauss(), b.uniform(0.0, height), z0 + b.uniform(0.0, len),
            0.35 + 0.05 * b.uniform(-1, 1));
      b.labels.push_back(kBuilding);
    }
  }

  // Poles.
  const int n_pole = b.uniform_int(cfg.min_poles, cfg.max_poles);
  for (int i = 0; i < n_pole; ++i) {
    const double px = b.uniform(-cfg.half_width + 1.0, cfg.half_width - 1.0);
    const double pz = b.uniform(cfg.min_depth + 1.0, cfg.depth - 1.0);
    const double height = b.uniform(3.0, 5.0);
    for (int j = 0; j < cfg.pole_points; ++j) {
      const double a = b.uniform(0.0, kTwoPi);
      b.add(px + 0.08 * std::cos(a) + b.gauss(), b.uniform(0.0, height),
            pz + 0.08 * std::sin(a) + b.gauss(), 0.55 + 0.05 * b.uniform(-1, 1));
      b.labels.push_back(kPole);
    }
  }

  // Fence strips.
  const int n_fence = b.uniform_int(cfg.min_fences, cfg.max_fences);
  for (int i = 0; i < n_fence; ++i) {
    const double fx = b.uniform(-cfg.half_width + 1.0, cfg.half_width - 1.0);
    const double fz = b.uniform(cfg.min_depth + 1.0, cfg.depth - 1.0);
    const double len = b.uniform(3.0, 8.0);
    const double dir = b.uniform(0.0, kTwoPi);
    for (int j = 0; j < cfg.fence_points; ++j) {
      const double t = b.uniform(0.0, len);
      b.add(fx + t * std::cos(dir) + b.gauss(), b.uniform(0.0, 1.2),
            fz + t * std::sin(dir) + b.gauss(), 0.3 + 0.05 * b.uniform(-1, 1));
      b.labels.push_back(kFence);
    }
  }

  if (b.pts.empty()) throw DataError("synth_scene: configuration yields an empty scene");

  // Joint shuffle so downstream subsampling sees no generation-order bias.
  std::vector<std::size_t> order(b.pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), b.rng);

  Mat pts(static_cast<Eigen::Index>(order.size()), 4);
  scene.labels.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    pts.row(static_cast<Eigen::Index>(i)) = b.pts[order[i]];
    scene.labels[i] = b.labels[order[i]];
  }
  scene.cloud = PointCloud::from_points(std::move(pts));
  scene.check();
  (void)classes;
  return scene;
}

std::vector<Scene> synth_corpus(std::uint64_t seed, int num_scenes,
                                const GenConfig& cfg) {
  std::vector<Scene> out;
  out.reserve(static_cast<std::size_t>(num_scenes));
  for (int i = 0; i < num_scenes; ++i)
    out.push_back(synth_scene(mix_seed(seed, static_cast<std::uint64_t>(i)), cfg));
  return out;
}

PartialView seg_view_of(const Scene& scene) {
  PartialView v;
  v.kind = ViewKind::kSegOnly;
  v.cloud = scene.cloud;
  v.labels = scene.labels;
  v.scene_seed = scene.seed;
  return v;
}

PartialView det_view_of(const Scene& scene, const ClassTable& classes) {
  PartialView v;
  v.kind = ViewKind::kDetOnly;
  v.cloud = scene.cloud;
  v.scene_seed = scene.seed;
  for (const auto& lb : scene.boxes)
    if (lb.cls == classes.car) v.boxes.push_back(lb);
  return v;
}

std::pair<std::vector<PartialView>, std::vector<PartialView>> make_partial_views(
    const std::vector<Scene>& corpus, double split_ratio, std::uint64_t seed) {
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw ConfigError("make_partial_views: split ratio must be in (0, 1)");
  const ClassTable classes = ClassTable::desk();

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(mix_seed(seed, 0x5eedULL));
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_seg = static_cast<std::size_t>(
      std::lround(split_ratio * static_cast<double>(corpus.size())));
  std::pair<std::vector<PartialView>, std::vector<PartialView>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_seg)
      out.first.push_back(seg_view_of(corpus[order[i]]));
    else
      out.second.push_back(det_view_of(corpus[order[i]], classes));
  }
  return out;
}

}  // namespace dass
