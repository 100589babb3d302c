#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "dass/nn.hpp"
#include "dass/types.hpp"

namespace dass {

// Greedy max-min selection of m points. The seed picks the starting point
// through a random direction (argmax projection), which keeps the selected
// set stable under input permutations. m > n pads with cyclic repeats.
std::vector<Eigen::Index> farthest_point_sample(const Mat& xyz, Eigen::Index m,
                                                std::uint64_t seed);
std::vector<Eigen::Index> farthest_point_sample_dir(const Mat& xyz, Eigen::Index m,
                                                    const Vec3& direction);

// Per center (an index into xyz): the k_max nearest points within radius,
// sorted by distance; short groups repeat the nearest found. The center
// itself is always within its own radius, so groups are never empty.
std::vector<Eigen::Index> ball_query(const Mat& xyz,
                                     const std::vector<Eigen::Index>& centers,
                                     double radius, int k_max);

struct ModelConfig {
  int num_classes = 8;
  int input_feat_dim = 1;  // reflectance
  int c_shared = 128;
  int head_width = 128;
  int sff_dim = 4;
  bool use_sff = true;
  bool with_det_head = true;
  std::vector<int> sa_npoints = {512, 128, 32, 8};
  std::vector<std::array<double, 2>> sa_radii = {
      {0.5, 1.0}, {1.0, 2.0}, {2.0, 4.0}, {4.0, 8.0}};
  std::vector<int> sa_group_size = {16, 16, 16, 16};
  std::vector<std::vector<int>> sa_mlp = {
      {16, 16, 32}, {32, 32, 64}, {64, 64, 128}, {64, 96, 128}};
  std::vector<std::vector<int>> fp_mlp = {
      {128, 128}, {128, 128}, {128, 128}, {128, 128}};
  BoxCodecConfig codec = BoxCodecConfig::make(3.0, 0.5, 12);

  int det_channels() const { return DetChannels::from(codec).count(); }
  void validate() const;

  static ModelConfig desk() { return {}; }
  // Small enough for exhaustive finite-difference checks.
  static ModelConfig tiny(int num_classes = 3);
};

// Stacked valid points of a batch of scenes. Padded rows never enter the
// network; scene boundaries are tracked by offsets (size batch + 1).
struct BatchInput {
  Mat xyz;    // rows x 3
  Mat feats;  // rows x input_feat_dim
  std::vector<Eigen::Index> offsets;

  Eigen::Index scenes() const {
    return static_cast<Eigen::Index>(offsets.size()) - 1;
  }
  static BatchInput from_clouds(const std::vector<const PointCloud*>& clouds);
};

struct LevelState {
  Mat xyz;
  Mat feats;
  std::vector<Eigen::Index> offsets;
};

// One set-abstraction level: farthest point sampling, two-radius grouping,
// a 3-layer stack per scale, channel max-pool, scale concatenation.
struct SetAbstraction {
  int npoint = 0;
  std::array<double, 2> radii = {0.5, 1.0};
  int group_size = 16;
  std::array<Mlp, 2> mlp;
  std::array<GroupMaxPool, 2> pool;

  void init(const std::string& name, int in_feat_dim, const std::vector<int>& widths,
            const std::array<double, 2>& r, int npts, int k, Rng& rng);
  LevelState forward(const LevelState& in, bool train, std::uint64_t seed,
                     bool cache, bool update_running);
  Mat backward(const Mat& d_out_feats);
  void visit(const ParamVisitor& v);
  int out_dim() const { return 2 * mlp[0].out_dim(); }

 private:
  std::array<std::vector<Eigen::Index>, 2> group_idx_;
  Eigen::Index in_rows_ = 0;
  int in_feat_dim_ = 0;
};

// One feature-propagation level: 3-NN inverse-distance interpolation of the
// coarse features onto the fine points, skip concatenation, MLP.
struct FeaturePropagation {
  Mlp mlp;

  void init(const std::string& name, int coarse_dim, int skip_dim,
            const std::vector<int>& widths, Rng& rng);
  Mat forward(const LevelState& fine, const Mat& fine_skip_feats,
              const LevelState& coarse, const Mat& coarse_feats, bool train,
              bool cache, bool update_running);
  std::pair<Mat, Mat> backward(const Mat& dy);  // (d_coarse, d_skip)
  void visit(const ParamVisitor& v);

 private:
  Interpolator interp_;
  Eigen::Index coarse_rows_ = 0;
  int coarse_dim_ = 0;
};

struct Encoder {
  std::vector<SetAbstraction> sa;
  std::vector<FeaturePropagation> fp;

  void init(const ModelConfig& cfg, Rng& rng);
  // Returns per-point shared features (rows x c_shared) for the stacked
  // valid points. Sampling is deterministic in seed and shared across the
  // scenes of a batch.
  Mat forward(const BatchInput& in, bool train, std::uint64_t seed,
              bool cache = true, bool update_running = true);
  void backward(const Mat& d_shared);
  void visit(const ParamVisitor& v);

 private:
  std::vector<LevelState> levels_;
  std::vector<Mat> fp_feats_;
};

// Per-point summary of the segmentation likelihoods fed to the detection
// head. Trained by the detection loss; its input is treated as a constant
// (no gradient reaches the segmentation head or encoder through it).
struct Sff {
  Linear lin;
  Relu relu;

  void init(int num_classes, int sff_dim, Rng& rng);
  Mat forward(const Mat& likelihoods, bool cache = true);
  void backward(const Mat& dy);
  void visit(const ParamVisitor& v);
};

class DassModel {
 public:
  ModelConfig cfg;
  Encoder encoder;
  Mlp seg_head;
  Sff sff;
  Mlp det_head;

  static DassModel create(const ModelConfig& cfg, std::uint64_t seed);

  // Training-mode forwards keep caches for one backward call.
  Mat forward_seg(const BatchInput& in, bool train, std::uint64_t sample_seed);
  void backward_seg(const Mat& d_logits);
  // fixed_likelihoods substitutes the SFF likelihood pass; finite-difference
  // harnesses use it to probe the exact training objective, where the
  // likelihood input is a constant.
  Mat forward_det(const BatchInput& in, bool train, std::uint64_t sample_seed,
                  const Mat* fixed_likelihoods = nullptr);
  void backward_det(const Mat& d_det);

  // Inference (running statistics, no caches).
  Mat infer_seg_logits(const BatchInput& in, std::uint64_t sample_seed = 0);
  Mat infer_det_channels(const BatchInput& in, std::uint64_t sample_seed = 0);

  void visit_params(const ParamVisitor& v);
  std::size_t param_count(bool trainable_only = true) const;
  void zero_grads();

  // Seg-only copy: the detection head and SFF are dropped entirely.
  DassModel detached() const;

  void save(const std::filesystem::path& path,
            const nlohmann::json& extra_meta = nlohmann::json::object()) const;
  static DassModel load(const std::filesystem::path& path,
                        nlohmann::json* extra_meta = nullptr);

  DassModel() = default;  // empty shell; build through create() or load()
};

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace dass
