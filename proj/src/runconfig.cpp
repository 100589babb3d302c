#include "dass/runconfig.hpp"

#include <set>

#include "dass/container.hpp"
#include "dass/errors.hpp"

namespace dass {

namespace {

// Tracks which keys of a JSON object were consumed; leftovers are errors.
class Strict {
 public:
  Strict(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  bool has_section(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const nlohmann::json& section(const char* key) { return j_.at(key); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key))
        throw ConfigError(path_ + ": unknown key '" + key + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_gen(const nlohmann::json& j, GenConfig* g) {
  Strict s(j, "data.gen");
  s.get("half_width", g->half_width);
  s.get("depth", g->depth);
  s.get("min_depth", g->min_depth);
  s.get("noise_sigma", g->noise_sigma);
  s.get("ground_points", g->ground_points);
  s.get("points_per_sqm_vehicle", g->points_per_sqm_vehicle);
  s.get("min_points_per_box", g->min_points_per_box);
  s.get("building_points", g->building_points);
  s.get("pole_points", g->pole_points);
  s.get("fence_points", g->fence_points);
  s.get("min_cars", g->min_cars);
  s.get("max_cars", g->max_cars);
  s.get("truck_prob", g->truck_prob);
  s.get("other_vehicle_prob", g->other_vehicle_prob);
  s.get("min_pedestrians", g->min_pedestrians);
  s.get("max_pedestrians", g->max_pedestrians);
  s.get("min_buildings", g->min_buildings);
  s.get("max_buildings", g->max_buildings);
  s.get("min_poles", g->min_poles);
  s.get("max_poles", g->max_poles);
  s.get("min_fences", g->min_fences);
  s.get("max_fences", g->max_fences);
  s.get("car_anchor_hwl", g->car_anchor_hwl);
  s.get("van_prob", g->van_prob);
  s.get("truck_scale", g->truck_scale);
  s.get("other_scale", g->other_scale);
  s.finish();
}

void parse_data(const nlohmann::json& j, DataConfig* d) {
  Strict s(j, "data");
  s.get("train_scenes", d->train_scenes);
  s.get("test_scenes", d->test_scenes);
  s.get("seed", d->seed);
  s.get("seg_split_ratio", d->seg_split_ratio);
  if (s.has_section("gen")) parse_gen(s.section("gen"), &d->gen);
  s.finish();
}

void parse_model(const nlohmann::json& j, ModelConfig* m) {
  Strict s(j, "model");
  s.get("num_classes", m->num_classes);
  s.get("input_feat_dim", m->input_feat_dim);
  s.get("c_shared", m->c_shared);
  s.get("head_width", m->head_width);
  s.get("sff_dim", m->sff_dim);
  s.get("use_sff", m->use_sff);
  s.get("with_det_head", m->with_det_head);
  s.get("sa_npoints", m->sa_npoints);
  s.get("sa_group_size", m->sa_group_size);
  s.get("sa_mlp", m->sa_mlp);
  s.get("fp_mlp", m->fp_mlp);
  if (s.has_section("sa_radii")) {
    m->sa_radii.clear();
    for (const auto& r : s.section("sa_radii"))
      m->sa_radii.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  }
  if (s.has_section("codec")) {
    Strict c(s.section("codec"), "model.codec");
    double scope = m->codec.scope_S, delta = m->codec.bin_delta;
    int rot_bins = m->codec.num_rot_bins;
    int center_bins = -1;  // derived; accepted for checkpoint echo round-trips
    std::array<double, 3> anchor = m->codec.anchor_hwl;
    c.get("scope", scope);
    c.get("bin_delta", delta);
    c.get("num_rot_bins", rot_bins);
    c.get("num_center_bins", center_bins);
    c.get("anchor_hwl", anchor);
    c.finish();
    m->codec = BoxCodecConfig::make(scope, delta, rot_bins, anchor);
    if (center_bins > 0 && center_bins != m->codec.num_center_bins)
      throw ConfigError("model.codec: num_center_bins must equal 2*scope/bin_delta");
  }
  s.finish();
}

void parse_augment(const nlohmann::json& j, AugmentPolicy* a) {
  Strict s(j, "train.augment");
  s.get("enabled", a->enabled);
  s.get("max_rotation_deg", a->max_rotation_deg);
  s.get("scale_low", a->scale_low);
  s.get("scale_high", a->scale_high);
  s.get("flip_prob", a->flip_prob);
  s.finish();
}

void parse_train(const nlohmann::json& j, TrainConfig* t) {
  Strict s(j, "train");
  s.get("batch_size", t->batch_size);
  s.get("epochs", t->epochs);
  s.get("lr", t->lr);
  s.get("weight_decay", t->weight_decay);
  s.get("momentum", t->momentum);
  s.get("w_seg", t->w_seg);
  s.get("w_det", t->w_det);
  s.get("seed", t->seed);
  s.get("eval_every", t->eval_every);
  long pts = static_cast<long>(t->points_per_scene);
  s.get("points_per_scene", pts);
  t->points_per_scene = pts;
  if (s.has_section("augment")) parse_augment(s.section("augment"), &t->augment);
  s.get("gt_augment", t->gt_augment);
  s.get("gt_augment_max", t->gt_augment_max);
  s.get("fov_half_angle_deg", t->fov_half_angle_deg);
  s.get("assert_linearity", t->assert_linearity);
  s.finish();
}

void parse_eval(const nlohmann::json& j, EvalConfig* e) {
  Strict s(j, "eval");
  s.get("thresholds", e->thresholds);
  s.get("top_n", e->proposals.top_n);
  s.get("final_m", e->proposals.final_m);
  s.get("nms_threshold", e->proposals.nms_threshold);
  s.get("near_fraction", e->proposals.near_fraction);
  s.get("near_boundary", e->proposals.near_boundary);
  s.get("recall_3d", e->recall_3d);
  s.get("seed", e->seed);
  s.get("batch_scenes", e->batch_scenes);
  s.finish();
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  Strict s(j, "config");
  if (s.has_section("data")) parse_data(s.section("data"), &cfg.data);
  if (s.has_section("model")) parse_model(s.section("model"), &cfg.model);
  if (s.has_section("train")) parse_train(s.section("train"), &cfg.train);
  if (s.has_section("eval")) parse_eval(s.section("eval"), &cfg.eval);
  s.finish();

  // Evaluation preprocesses scenes exactly like training.
  cfg.eval.points_per_scene = cfg.train.points_per_scene;
  cfg.eval.fov_half_angle_deg = cfg.train.fov_half_angle_deg;
  cfg.model.validate();
  cfg.train.validate();
  if (!(cfg.data.seg_split_ratio > 0.0 && cfg.data.seg_split_ratio < 1.0))
    throw ConfigError("data.seg_split_ratio must be in (0, 1)");
  if (cfg.data.train_scenes <= 0 || cfg.data.test_scenes < 0)
    throw ConfigError("data: scene counts must be positive");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse failed: " + std::string(e.what()));
  }
  return parse_run_config(j);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["data"] = {{"train_scenes", cfg.data.train_scenes},
               {"test_scenes", cfg.data.test_scenes},
               {"seed", cfg.data.seed},
               {"seg_split_ratio", cfg.data.seg_split_ratio},
               {"gen",
                {{"half_width", cfg.data.gen.half_width},
                 {"depth", cfg.data.gen.depth},
                 {"min_depth", cfg.data.gen.min_depth},
                 {"noise_sigma", cfg.data.gen.noise_sigma},
                 {"ground_points", cfg.data.gen.ground_points},
                 {"points_per_sqm_vehicle", cfg.data.gen.points_per_sqm_vehicle},
                 {"min_points_per_box", cfg.data.gen.min_points_per_box},
                 {"building_points", cfg.data.gen.building_points},
                 {"pole_points", cfg.data.gen.pole_points},
                 {"fence_points", cfg.data.gen.fence_points},
                 {"min_cars", cfg.data.gen.min_cars},
                 {"max_cars", cfg.data.gen.max_cars},
                 {"truck_prob", cfg.data.gen.truck_prob},
                 {"other_vehicle_prob", cfg.data.gen.other_vehicle_prob},
                 {"min_pedestrians", cfg.data.gen.min_pedestrians},
                 {"max_pedestrians", cfg.data.gen.max_pedestrians},
                 {"min_buildings", cfg.data.gen.min_buildings},
                 {"max_buildings", cfg.data.gen.max_buildings},
                 {"min_poles", cfg.data.gen.min_poles},
                 {"max_poles", cfg.data.gen.max_poles},
                 {"min_fences", cfg.data.gen.min_fences},
                 {"max_fences", cfg.data.gen.max_fences},
                 {"car_anchor_hwl", cfg.data.gen.car_anchor_hwl},
                 {"van_prob", cfg.data.gen.van_prob},
                 {"truck_scale", cfg.data.gen.truck_scale},
                 {"other_scale", cfg.data.gen.other_scale}}}};
  j["model"] = model_config_to_json(cfg.model);
  j["train"] = {{"batch_size", cfg.train.batch_size},
                {"epochs", cfg.train.epochs},
                {"lr", cfg.train.lr},
                {"weight_decay", cfg.train.weight_decay},
                {"momentum", cfg.train.momentum},
                {"w_seg", cfg.train.w_seg},
                {"w_det", cfg.train.w_det},
                {"seed", cfg.train.seed},
                {"eval_every", cfg.train.eval_every},
                {"points_per_scene", cfg.train.points_per_scene},
                {"augment",
                 {{"enabled", cfg.train.augment.enabled},
                  {"max_rotation_deg", cfg.train.augment.max_rotation_deg},
                  {"scale_low", cfg.train.augment.scale_low},
                  {"scale_high", cfg.train.augment.scale_high},
                  {"flip_prob", cfg.train.augment.flip_prob}}},
                {"gt_augment", cfg.train.gt_augment},
                {"gt_augment_max", cfg.train.gt_augment_max},
                {"fov_half_angle_deg", cfg.train.fov_half_angle_deg},
                {"assert_linearity", cfg.train.assert_linearity}};
  j["eval"] = {{"thresholds", cfg.eval.thresholds},
               {"top_n", cfg.eval.proposals.top_n},
               {"final_m", cfg.eval.proposals.final_m},
               {"nms_threshold", cfg.eval.proposals.nms_threshold},
               {"near_fraction", cfg.eval.proposals.near_fraction},
               {"near_boundary", cfg.eval.proposals.near_boundary},
               {"recall_3d", cfg.eval.recall_3d},
               {"seed", cfg.eval.seed},
               {"batch_scenes", cfg.eval.batch_scenes}};
  return j;
}

}  // namespace dass
