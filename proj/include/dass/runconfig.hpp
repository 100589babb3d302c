#pragma once

#include <filesystem>

#include <json.hpp>

#include "dass/eval.hpp"
#include "dass/synth.hpp"
#include "dass/train.hpp"

namespace dass {

struct DataConfig {
  int train_scenes = 48;
  int test_scenes = 16;
  std::uint64_t seed = 0;
  double seg_split_ratio = 0.5;
  GenConfig gen;
};

// One structured config file with sections mirroring the module configs.
// Unknown keys are errors.
struct RunConfig {
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace dass
