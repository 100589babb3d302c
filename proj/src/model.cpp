#include "dass/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dass/container.hpp"
#include "dass/errors.hpp"

namespace dass {

std::vector<Eigen::Index> farthest_point_sample_dir(const Mat& xyz, Eigen::Index m,
                                                    const Vec3& direction) {
  const Eigen::Index n = xyz.rows();
  if (n == 0) throw DataError("farthest_point_sample: empty cloud");

  Eigen::Index first = 0;
  double best_proj = -1e300;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double proj = xyz(i, 0) * direction.x() + xyz(i, 1) * direction.y() +
                        xyz(i, 2) * direction.z();
    if (proj > best_proj) {
      best_proj = proj;
      first = i;
    }
  }

  std::vector<Eigen::Index> picked;
  picked.reserve(static_cast<std::size_t>(m));
  picked.push_back(first);
  Eigen::VectorXd min_d2 =
      (xyz.rowwise() - xyz.row(first)).rowwise().squaredNorm();
  while (static_cast<Eigen::Index>(picked.size()) < std::min(m, n)) {
    Eigen::Index next = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (min_d2[i] > best) {
        best = min_d2[i];
        next = i;
      }
    picked.push_back(next);
    min_d2 = min_d2.cwiseMin(
        (xyz.rowwise() - xyz.row(next)).rowwise().squaredNorm());
  }
  // Pad with cyclic repeats when m exceeds the point count.
  for (Eigen::Index i = n; i < m; ++i)
    picked.push_back(picked[static_cast<std::size_t>(i % n)]);
  return picked;
}

std::vector<Eigen::Index> farthest_point_sample(const Mat& xyz, Eigen::Index m,
                                                std::uint64_t seed) {
  Rng rng = make_rng(mix_seed(seed, 0xf95ULL));
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 dir(g(rng), g(rng), g(rng));
  if (dir.norm() < 1e-12) dir = Vec3(1, 0, 0);
  dir.normalize();
  return farthest_point_sample_dir(xyz, m, dir);
}

std::vector<Eigen::Index> ball_query(const Mat& xyz,
                                     const std::vector<Eigen::Index>& centers,
                                     double radius, int k_max) {
  const double r2 = radius * radius;
  std::vector<Eigen::Index> out;
  out.reserve(centers.size() * static_cast<std::size_t>(k_max));
  std::vector<std::pair<double, Eigen::Index>> in_range;
  for (const Eigen::Index c : centers) {
    in_range.clear();
    for (Eigen::Index i = 0; i < xyz.rows(); ++i) {
      const double d2 = (xyz.row(i) - xyz.row(c)).squaredNorm();
      if (d2 <= r2) in_range.emplace_back(d2, i);
    }
    std::sort(in_range.begin(), in_range.end());
    if (in_range.empty()) in_range.emplace_back(0.0, c);
    for (int k = 0; k < k_max; ++k)
      out.push_back(k < static_cast<int>(in_range.size())
                        ? in_range[static_cast<std::size_t>(k)].second
                        : in_range[0].second);
  }
  return out;
}

void ModelConfig::validate() const {
  if (sa_npoints.size() != 4 || sa_radii.size() != 4 || sa_mlp.size() != 4 ||
      fp_mlp.size() != 4 || sa_group_size.size() != 4)
    throw ConfigError("model: expected exactly 4 SA and 4 FP levels");
  for (std::size_t i = 1; i < sa_npoints.size(); ++i)
    if (sa_npoints[i] >= sa_npoints[i - 1])
      throw ConfigError("model: sa_npoints must be strictly decreasing");
  for (int n : sa_npoints)
    if (n <= 0) throw ConfigError("model: sa_npoints must be positive");
  if (fp_mlp.back().back() != c_shared)
    throw ConfigError("model: last FP width must equal c_shared");
  if (num_classes < 2) throw ConfigError("model: need at least 2 classes");
  if (sff_dim <= 0) throw ConfigError("model: sff_dim must be positive");
  codec.validate();
}

ModelConfig ModelConfig::tiny(int num_classes_) {
  ModelConfig cfg;
  cfg.num_classes = num_classes_;
  cfg.c_shared = 8;
  cfg.head_width = 8;
  cfg.sff_dim = 2;
  cfg.sa_npoints = {16, 8, 4, 2};
  cfg.sa_radii.assign({std::array<double, 2>{1.0, 2.0}, {2.0, 4.0}, {4.0, 8.0},
                       {8.0, 16.0}});
  cfg.sa_group_size = {4, 4, 4, 4};
  cfg.sa_mlp = {{2, 2, 4}, {2, 2, 4}, {2, 2, 4}, {2, 2, 4}};
  cfg.fp_mlp = {{8}, {8}, {8}, {8}};
  cfg.codec = BoxCodecConfig::make(2.0, 1.0, 4, {1.0, 1.0, 2.0});
  return cfg;
}

BatchInput BatchInput::from_clouds(const std::vector<const PointCloud*>& clouds) {
  BatchInput b;
  Eigen::Index total = 0;
  for (const auto* c : clouds) {
    if (c->valid_count == 0)
      throw DataError("batch: scene with no valid points");
    total += c->valid_count;
  }
  b.xyz.resize(total, 3);
  b.feats.resize(total, 1);
  b.offsets.push_back(0);
  Eigen::Index row = 0;
  for (const auto* c : clouds) {
    b.xyz.middleRows(row, c->valid_count) = c->points.topRows(c->valid_count).leftCols(3);
    b.feats.middleRows(row, c->valid_count) = c->points.topRows(c->valid_count).col(3);
    row += c->valid_count;
    b.offsets.push_back(row);
  }
  return b;
}

void SetAbstraction::init(const std::string& name, int in_feat_dim,
                          const std::vector<int>& widths,
                          const std::array<double, 2>& r, int npts, int k,
                          Rng& rng) {
  npoint = npts;
  radii = r;
  group_size = k;
  in_feat_dim_ = in_feat_dim;
  mlp[0].init(name + ".s0", in_feat_dim + 3, widths, rng);
  mlp[1].init(name + ".s1", in_feat_dim + 3, widths, rng);
}

LevelState SetAbstraction::forward(const LevelState& in, bool train,
                                   std::uint64_t seed, bool cache,
                                   bool update_running) {
  const Eigen::Index scenes = static_cast<Eigen::Index>(in.offsets.size()) - 1;
  in_rows_ = in.xyz.rows();

  // One sampling direction per level, shared across the batch, keeps results
  // identical for duplicated scenes and permutation-stable.
  Rng rng = make_rng(mix_seed(seed, 0xfa5ULL));
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 dir(g(rng), g(rng), g(rng));
  if (dir.norm() < 1e-12) dir = Vec3(0, 0, 1);
  dir.normalize();

  std::vector<Eigen::Index> centers;  // global rows
  LevelState out;
  out.offsets.push_back(0);
  for (Eigen::Index s = 0; s < scenes; ++s) {
    const Eigen::Index lo = in.offsets[static_cast<std::size_t>(s)];
    const Eigen::Index hi = in.offsets[static_cast<std::size_t>(s) + 1];
    const Mat scene_xyz = in.xyz.middleRows(lo, hi - lo);
    for (Eigen::Index idx : farthest_point_sample_dir(scene_xyz, npoint, dir))
      centers.push_back(lo + idx);
    out.offsets.push_back(static_cast<Eigen::Index>(centers.size()));
  }
  out.xyz = gather_rows(in.xyz, centers);

  Mat scale_feats[2];
  for (int sc = 0; sc < 2; ++sc) {
    std::vector<Eigen::Index>& gidx = group_idx_[static_cast<std::size_t>(sc)];
    gidx.clear();
    for (Eigen::Index s = 0; s < scenes; ++s) {
      const Eigen::Index lo = in.offsets[static_cast<std::size_t>(s)];
      const Eigen::Index hi = in.offsets[static_cast<std::size_t>(s) + 1];
      const Mat scene_xyz = in.xyz.middleRows(lo, hi - lo);
      std::vector<Eigen::Index> local_centers;
      for (Eigen::Index c = out.offsets[static_cast<std::size_t>(s)];
           c < out.offsets[static_cast<std::size_t>(s) + 1]; ++c)
        local_centers.push_back(centers[static_cast<std::size_t>(c)] - lo);
      for (Eigen::Index idx :
           ball_query(scene_xyz, local_centers, radii[static_cast<std::size_t>(sc)],
                      group_size))
        gidx.push_back(lo + idx);
    }

    Mat grouped(static_cast<Eigen::Index>(gidx.size()), 3 + in_feat_dim_);
    for (std::size_t i = 0; i < gidx.size(); ++i) {
      const Eigen::Index center_row = static_cast<Eigen::Index>(i) / group_size;
      grouped.row(static_cast<Eigen::Index>(i)).head(3) =
          in.xyz.row(gidx[i]) - out.xyz.row(center_row);
      if (in_feat_dim_ > 0)
        grouped.row(static_cast<Eigen::Index>(i)).tail(in_feat_dim_) =
            in.feats.row(gidx[i]);
    }
    const Mat h = mlp[static_cast<std::size_t>(sc)].forward(grouped, train, cache,
                                                            update_running);
    scale_feats[sc] = pool[static_cast<std::size_t>(sc)].forward(h, group_size);
  }
  out.feats.resize(scale_feats[0].rows(), scale_feats[0].cols() + scale_feats[1].cols());
  out.feats << scale_feats[0], scale_feats[1];
  return out;
}

Mat SetAbstraction::backward(const Mat& d_out_feats) {
  Mat d_in = Mat::Zero(in_rows_, in_feat_dim_);
  const Eigen::Index half = d_out_feats.cols() / 2;
  for (int sc = 0; sc < 2; ++sc) {
    const Mat d_pooled = d_out_feats.middleCols(sc * half, half);
    const Mat d_h = pool[static_cast<std::size_t>(sc)].backward(d_pooled);
    const Mat d_grouped = mlp[static_cast<std::size_t>(sc)].backward(d_h);
    if (in_feat_dim_ > 0)
      scatter_add_rows(d_grouped.rightCols(in_feat_dim_),
                       group_idx_[static_cast<std::size_t>(sc)], &d_in);
  }
  return d_in;
}

void SetAbstraction::visit(const ParamVisitor& v) {
  mlp[0].visit(v);
  mlp[1].visit(v);
}

void FeaturePropagation::init(const std::string& name, int coarse_dim,
                              int skip_dim, const std::vector<int>& widths,
                              Rng& rng) {
  coarse_dim_ = coarse_dim;
  mlp.init(name, coarse_dim + skip_dim, widths, rng);
}

Mat FeaturePropagation::forward(const LevelState& fine, const Mat& fine_skip_feats,
                                const LevelState& coarse, const Mat& coarse_feats,
                                bool train, bool cache, bool update_running) {
  const Eigen::Index scenes = static_cast<Eigen::Index>(fine.offsets.size()) - 1;
  coarse_rows_ = coarse.xyz.rows();

  interp_.neighbors.resize(fine.xyz.rows(), 3);
  interp_.weights.resize(fine.xyz.rows(), 3);
  for (Eigen::Index s = 0; s < scenes; ++s) {
    const Eigen::Index flo = fine.offsets[static_cast<std::size_t>(s)];
    const Eigen::Index fhi = fine.offsets[static_cast<std::size_t>(s) + 1];
    const Eigen::Index clo = coarse.offsets[static_cast<std::size_t>(s)];
    const Eigen::Index chi = coarse.offsets[static_cast<std::size_t>(s) + 1];
    const Eigen::Index nc = chi - clo;
    for (Eigen::Index f = flo; f < fhi; ++f) {
      std::array<std::pair<double, Eigen::Index>, 3> best;
      best.fill({1e300, clo});
      for (Eigen::Index c = clo; c < chi; ++c) {
        const double d2 = (fine.xyz.row(f) - coarse.xyz.row(c)).squaredNorm();
        if (d2 < best[2].first) {
          best[2] = {d2, c};
          if (best[2].first < best[1].first) std::swap(best[1], best[2]);
          if (best[1].first < best[0].first) std::swap(best[0], best[1]);
        }
      }
      const int k = static_cast<int>(std::min<Eigen::Index>(3, nc));
      double wsum = 0.0;
      for (int j = 0; j < 3; ++j) {
        const int jj = std::min(j, k - 1);  // duplicate nearest when few coarse pts
        interp_.neighbors(f, j) = best[static_cast<std::size_t>(jj)].second;
        const double w =
            1.0 / (std::sqrt(best[static_cast<std::size_t>(jj)].first) + 1e-8);
        interp_.weights(f, j) = w;
        wsum += w;
      }
      interp_.weights.row(f) /= wsum;
    }
  }

  const Mat interpolated = interp_.forward(coarse_feats);
  Mat concat(interpolated.rows(), interpolated.cols() + fine_skip_feats.cols());
  concat << interpolated, fine_skip_feats;
  return mlp.forward(concat, train, cache, update_running);
}

std::pair<Mat, Mat> FeaturePropagation::backward(const Mat& dy) {
  const Mat d_concat = mlp.backward(dy);
  const Mat d_interp = d_concat.leftCols(coarse_dim_);
  const Mat d_skip = d_concat.rightCols(d_concat.cols() - coarse_dim_);
  return {interp_.backward(d_interp, coarse_rows_), d_skip};
}

void FeaturePropagation::visit(const ParamVisitor& v) { mlp.visit(v); }

void Encoder::init(const ModelConfig& cfg, Rng& rng) {
  sa.resize(4);
  fp.resize(4);
  int feat_dim = cfg.input_feat_dim;
  std::vector<int> sa_out(4);
  for (int l = 0; l < 4; ++l) {
    sa[static_cast<std::size_t>(l)].init(
        "enc.sa" + std::to_string(l), feat_dim, cfg.sa_mlp[static_cast<std::size_t>(l)],
        cfg.sa_radii[static_cast<std::size_t>(l)],
        cfg.sa_npoints[static_cast<std::size_t>(l)],
        cfg.sa_group_size[static_cast<std::size_t>(l)], rng);
    feat_dim = sa[static_cast<std::size_t>(l)].out_dim();
    sa_out[static_cast<std::size_t>(l)] = feat_dim;
  }
  // fp[0]: L4 -> L3 ... fp[3]: L1 -> input points.
  int coarse_dim = sa_out[3];
  for (int l = 0; l < 4; ++l) {
    const int skip_dim = l < 3 ? sa_out[static_cast<std::size_t>(2 - l)]
                               : cfg.input_feat_dim;
    fp[static_cast<std::size_t>(l)].init("enc.fp" + std::to_string(l), coarse_dim,
                                         skip_dim,
                                         cfg.fp_mlp[static_cast<std::size_t>(l)], rng);
    coarse_dim = fp[static_cast<std::size_t>(l)].mlp.out_dim();
  }
}

Mat Encoder::forward(const BatchInput& in, bool train, std::uint64_t seed,
                     bool cache, bool update_running) {
  levels_.assign(1, LevelState{in.xyz, in.feats, in.offsets});
  for (int l = 0; l < 4; ++l)
    levels_.push_back(sa[static_cast<std::size_t>(l)].forward(
        levels_.back(), train, mix_seed(seed, static_cast<std::uint64_t>(l)), cache,
        update_running));

  fp_feats_.assign(5, Mat());
  fp_feats_[4] = levels_[4].feats;
  for (int l = 0; l < 4; ++l) {
    const int fine_level = 3 - l;
    const Mat& skip = levels_[static_cast<std::size_t>(fine_level)].feats;
    fp_feats_[static_cast<std::size_t>(fine_level)] =
        fp[static_cast<std::size_t>(l)].forward(
            levels_[static_cast<std::size_t>(fine_level)], skip,
            levels_[static_cast<std::size_t>(fine_level) + 1],
            fp_feats_[static_cast<std::size_t>(fine_level) + 1], train, cache,
            update_running);
  }
  return fp_feats_[0];
}

void Encoder::backward(const Mat& d_shared) {
  std::vector<Mat> d_skip(5);
  Mat d = d_shared;
  for (int l = 3; l >= 0; --l) {
    const int fine_level = 3 - l;
    auto [d_coarse, d_sk] = fp[static_cast<std::size_t>(l)].backward(d);
    d_skip[static_cast<std::size_t>(fine_level)] = std::move(d_sk);
    d = std::move(d_coarse);
  }
  // d now holds the gradient on SA4's output features.
  for (int l = 3; l >= 0; --l) {
    Mat d_in = sa[static_cast<std::size_t>(l)].backward(d);
    if (l > 0) d_in += d_skip[static_cast<std::size_t>(l)];
    d = std::move(d_in);
  }
}

void Encoder::visit(const ParamVisitor& v) {
  for (auto& s : sa) s.visit(v);
  for (auto& f : fp) f.visit(v);
}

void Sff::init(int num_classes, int sff_dim, Rng& rng) {
  lin.init("sff", num_classes, sff_dim, rng);
}

Mat Sff::forward(const Mat& likelihoods, bool cache) {
  return relu.forward(lin.forward(likelihoods, cache), cache);
}

void Sff::backward(const Mat& dy) { lin.backward(relu.backward(dy)); }

void Sff::visit(const ParamVisitor& v) { lin.visit(v); }

DassModel DassModel::create(const ModelConfig& cfg_, std::uint64_t seed) {
  cfg_.validate();
  DassModel m;
  m.cfg = cfg_;
  Rng rng = make_rng(mix_seed(seed, 0x0debULL));
  m.encoder.init(m.cfg, rng);
  m.seg_head.init("seg_head", m.cfg.c_shared,
                  {m.cfg.head_width, m.cfg.num_classes}, rng,
                  /*final_activation=*/false);
  if (m.cfg.with_det_head) {
    if (m.cfg.use_sff) m.sff.init(m.cfg.num_classes, m.cfg.sff_dim, rng);
    const int det_in = m.cfg.c_shared + (m.cfg.use_sff ? m.cfg.sff_dim : 0);
    m.det_head.init("det_head", det_in, {m.cfg.head_width, m.cfg.det_channels()},
                    rng, /*final_activation=*/false);
  }
  return m;
}

Mat DassModel::forward_seg(const BatchInput& in, bool train,
                           std::uint64_t sample_seed) {
  const Mat f = encoder.forward(in, train, sample_seed, /*cache=*/train);
  return seg_head.forward(f, train, /*cache=*/train);
}

void DassModel::backward_seg(const Mat& d_logits) {
  encoder.backward(seg_head.backward(d_logits));
}

Mat DassModel::forward_det(const BatchInput& in, bool train,
                           std::uint64_t sample_seed,
                           const Mat* fixed_likelihoods) {
  if (!cfg.with_det_head)
    throw ConfigError("forward_det: model has no detection head");
  const Mat f = encoder.forward(in, train, sample_seed, /*cache=*/train);
  Mat det_in;
  if (cfg.use_sff) {
    // Likelihood pass through the seg head with gradient accumulation off:
    // no caches, no running-statistics update, output treated as constant.
    const Mat lik =
        fixed_likelihoods
            ? *fixed_likelihoods
            : softmax_rows(seg_head.forward(f, train, /*cache=*/false,
                                            /*update_running=*/false));
    const Mat sff_out = sff.forward(lik, /*cache=*/train);
    det_in.resize(f.rows(), f.cols() + sff_out.cols());
    det_in << f, sff_out;
  } else {
    det_in = f;
  }
  return det_head.forward(det_in, train, /*cache=*/train);
}

void DassModel::backward_det(const Mat& d_det) {
  const Mat d_in = det_head.backward(d_det);
  if (cfg.use_sff) {
    sff.backward(d_in.rightCols(cfg.sff_dim));  // stops here by construction
    encoder.backward(d_in.leftCols(cfg.c_shared));
  } else {
    encoder.backward(d_in);
  }
}

Mat DassModel::infer_seg_logits(const BatchInput& in, std::uint64_t sample_seed) {
  return forward_seg(in, /*train=*/false, sample_seed);
}

Mat DassModel::infer_det_channels(const BatchInput& in, std::uint64_t sample_seed) {
  return forward_det(in, /*train=*/false, sample_seed);
}

void DassModel::visit_params(const ParamVisitor& v) {
  encoder.visit(v);
  seg_head.visit(v);
  if (cfg.with_det_head) {
    if (cfg.use_sff) sff.visit(v);
    det_head.visit(v);
  }
}

std::size_t DassModel::param_count(bool trainable_only) const {
  std::size_t n = 0;
  const_cast<DassModel*>(this)->visit_params([&](Parameter& p) {
    if (!trainable_only || p.trainable) n += static_cast<std::size_t>(p.value.size());
  });
  return n;
}

void DassModel::zero_grads() {
  visit_params([](Parameter& p) { p.zero_grad(); });
}

DassModel DassModel::detached() const {
  DassModel m;
  m.cfg = cfg;
  m.cfg.with_det_head = false;
  m.cfg.use_sff = false;
  m.encoder = encoder;
  m.seg_head = seg_head;
  return m;
}

void DassModel::save(const std::filesystem::path& path,
                     const nlohmann::json& extra_meta) const {
  Container c;
  c.meta["kind"] = "checkpoint";
  c.meta["model_config"] = model_config_to_json(cfg);
  c.meta["extra"] = extra_meta;
  const_cast<DassModel*>(this)->visit_params(
      [&](Parameter& p) { c.add_f64("param/" + p.name, p.value); });
  c.write(path);
}

DassModel DassModel::load(const std::filesystem::path& path,
                          nlohmann::json* extra_meta) {
  const Container c = Container::read(path);
  if (c.meta.value("kind", "") != "checkpoint")
    throw FormatError("not a checkpoint: " + path.string());
  DassModel m = create(model_config_from_json(c.meta.at("model_config")), 0);
  m.visit_params([&](Parameter& p) {
    const Mat stored = c.get_f64("param/" + p.name);
    if (stored.rows() != p.value.rows() || stored.cols() != p.value.cols())
      throw FormatError("checkpoint: shape mismatch for " + p.name);
    p.value = stored;
  });
  if (extra_meta) *extra_meta = c.meta.value("extra", nlohmann::json::object());
  return m;
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  nlohmann::json j;
  j["num_classes"] = cfg.num_classes;
  j["input_feat_dim"] = cfg.input_feat_dim;
  j["c_shared"] = cfg.c_shared;
  j["head_width"] = cfg.head_width;
  j["sff_dim"] = cfg.sff_dim;
  j["use_sff"] = cfg.use_sff;
  j["with_det_head"] = cfg.with_det_head;
  j["sa_npoints"] = cfg.sa_npoints;
  j["sa_group_size"] = cfg.sa_group_size;
  j["sa_mlp"] = cfg.sa_mlp;
  j["fp_mlp"] = cfg.fp_mlp;
  nlohmann::json radii = nlohmann::json::array();
  for (const auto& r : cfg.sa_radii) radii.push_back({r[0], r[1]});
  j["sa_radii"] = radii;
  j["codec"] = {{"scope", cfg.codec.scope_S},
                {"bin_delta", cfg.codec.bin_delta},
                {"num_center_bins", cfg.codec.num_center_bins},
                {"num_rot_bins", cfg.codec.num_rot_bins},
                {"anchor_hwl", cfg.codec.anchor_hwl}};
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.num_classes = j.at("num_classes").get<int>();
  cfg.input_feat_dim = j.at("input_feat_dim").get<int>();
  cfg.c_shared = j.at("c_shared").get<int>();
  cfg.head_width = j.at("head_width").get<int>();
  cfg.sff_dim = j.at("sff_dim").get<int>();
  cfg.use_sff = j.at("use_sff").get<bool>();
  cfg.with_det_head = j.at("with_det_head").get<bool>();
  cfg.sa_npoints = j.at("sa_npoints").get<std::vector<int>>();
  cfg.sa_group_size = j.at("sa_group_size").get<std::vector<int>>();
  cfg.sa_mlp = j.at("sa_mlp").get<std::vector<std::vector<int>>>();
  cfg.fp_mlp = j.at("fp_mlp").get<std::vector<std::vector<int>>>();
  cfg.sa_radii.clear();
  for (const auto& r : j.at("sa_radii"))
    cfg.sa_radii.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  const auto& cj = j.at("codec");
  cfg.codec = BoxCodecConfig::make(
      cj.at("scope").get<double>(), cj.at("bin_delta").get<double>(),
      cj.at("num_rot_bins").get<int>(),
      cj.at("anchor_hwl").get<std::array<double, 3>>());
  cfg.validate();
  return cfg;
}

}  // namespace dass
