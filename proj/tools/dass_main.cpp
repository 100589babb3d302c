#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dass/container.hpp"
#include "dass/errors.hpp"
#include "dass/eval.hpp"
#include "dass/kitti.hpp"
#include "dass/losses.hpp"
#include "dass/runconfig.hpp"
#include "dass/svgplot.hpp"
#include "dass/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

fs::path output_root() {
  if (const char* env = std::getenv("DASS_OUT_ROOT")) return fs::path(env);
  return fs::path("runs");
}

fs::path make_run_dir(const std::string& verb, const std::string& requested) {
  if (!requested.empty()) {
    fs::create_directories(requested);
    return requested;
  }
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::localtime(&t));
  fs::path dir = output_root() / (verb + "-" + stamp);
  for (int suffix = 1; fs::exists(dir); ++suffix)
    dir = output_root() / (verb + "-" + std::string(stamp) + "-" +
                           std::to_string(suffix));
  fs::create_directories(dir);
  return dir;
}

struct Corpus {
  std::vector<dass::Scene> train;
  std::vector<dass::Scene> test;
  std::uint64_t content_hash = 0;
  json manifest;
};

std::pair<std::vector<dass::Scene>, std::vector<dass::Scene>> make_synth_corpus(
    const dass::DataConfig& data) {
  auto train = dass::synth_corpus(data.seed, data.train_scenes, data.gen);
  auto test = dass::synth_corpus(dass::mix_seed(data.seed, 0x7e57ULL),
                                 data.test_scenes, data.gen);
  return {std::move(train), std::move(test)};
}

Corpus load_or_make_corpus(const dass::RunConfig& cfg, const std::string& data_dir) {
  Corpus corpus;
  if (!data_dir.empty()) {
    auto on_disk = dass::read_corpus(data_dir);
    corpus.train = std::move(on_disk.train);
    corpus.test = std::move(on_disk.test);
    corpus.manifest = on_disk.manifest;
    corpus.content_hash = on_disk.manifest.value("content_hash", std::uint64_t{0});
  } else {
    std::tie(corpus.train, corpus.test) = make_synth_corpus(cfg.data);
    const std::string key =
        dass::run_config_to_json(cfg)["data"].dump() + std::to_string(cfg.data.seed);
    corpus.content_hash =
        dass::fnv1a64(std::vector<std::uint8_t>(key.begin(), key.end()));
    corpus.manifest = {{"generated", "in-memory"},
                       {"seed", cfg.data.seed},
                       {"content_hash", corpus.content_hash}};
  }
  if (corpus.train.empty()) throw dass::DataError("corpus has no training scenes");
  return corpus;
}

void write_json_file(const fs::path& path, const json& j) {
  dass::write_text_file(path, j.dump(2) + "\n");
}

json class_frequency_table(const std::vector<dass::Scene>& scenes,
                           const dass::ClassTable& classes) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(classes.size()), 0);
  for (const auto& s : scenes)
    for (auto label : s.labels)
      if (label >= 0 && label < classes.size())
        ++counts[static_cast<std::size_t>(label)];
  json table = json::object();
  for (int c = 0; c < classes.size(); ++c)
    table[classes.names[static_cast<std::size_t>(c)]] =
        counts[static_cast<std::size_t>(c)];
  return table;
}

// ---------------------------------------------------------------------------
// gen-data

int cmd_gen_data(const std::string& config_path, const std::string& out_dir) {
  const dass::RunConfig cfg = dass::load_run_config(config_path);
  auto [train, test] = make_synth_corpus(cfg.data);

  const json manifest = dass::write_corpus(
      out_dir, train, test, dass::run_config_to_json(cfg)["data"], cfg.data.seed);

  const dass::ClassTable classes = dass::ClassTable::desk();
  const json freq = class_frequency_table(train, classes);
  std::cout << "corpus written to " << out_dir << "\n";
  std::cout << "scenes: " << train.size() << " train, " << test.size() << " test\n";
  std::cout << "class point counts (train):\n";
  for (const auto& [name, count] : freq.items())
    std::cout << "  " << name << ": " << count << "\n";
  std::cout << "content hash: " << manifest.at("content_hash") << "\n";

  std::size_t car_boxes = 0;
  for (const auto& s : train)
    for (const auto& lb : s.boxes) car_boxes += lb.cls == classes.car;
  if (car_boxes == 0)
    std::cerr << "warning: det view has no boxes (vehicle density is zero?)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainFlags {
  std::string config_path;
  std::string data_dir;
  std::string run_dir;
  std::string resume;
  std::int64_t seed = -1;
  bool no_aux = false;
  bool no_sff = false;
  int sff_dim = -1;
  int points_per_scene = -1;
  int classes = -1;
  int epochs = -1;
};

json train_manifest(const dass::RunConfig& cfg, const TrainFlags& flags,
                    std::uint64_t corpus_hash, const fs::path& run_dir) {
  json m;
  m["command"] = "train";
  m["config"] = dass::run_config_to_json(cfg);
  m["flags"] = {{"no_aux", flags.no_aux},
                {"no_sff", flags.no_sff},
                {"seed", cfg.train.seed},
                {"resume", flags.resume},
                {"data_dir", flags.data_dir}};
  m["corpus_manifest_hash"] = corpus_hash;
  m["artifacts"] = {{"checkpoint", (run_dir / "checkpoint.dass").string()},
                    {"metrics", (run_dir / "metrics.jsonl").string()},
                    {"final_eval", (run_dir / "final_eval.json").string()}};
  return m;
}

void apply_train_flags(dass::RunConfig* cfg, const TrainFlags& flags) {
  if (flags.seed >= 0) cfg->train.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.no_aux) cfg->model.with_det_head = false;
  if (flags.no_sff) cfg->model.use_sff = false;
  if (flags.sff_dim > 0) cfg->model.sff_dim = flags.sff_dim;
  if (flags.points_per_scene > 0) {
    cfg->train.points_per_scene = flags.points_per_scene;
    cfg->eval.points_per_scene = flags.points_per_scene;
  }
  if (flags.classes > 0) cfg->model.num_classes = flags.classes;
  if (flags.epochs > 0) cfg->train.epochs = flags.epochs;
  cfg->model.validate();
}

int cmd_train(const TrainFlags& flags) {
  dass::RunConfig cfg = dass::load_run_config(flags.config_path);
  apply_train_flags(&cfg, flags);

  const fs::path run_dir = make_run_dir("train", flags.run_dir);
  const Corpus corpus = load_or_make_corpus(cfg, flags.data_dir);
  const dass::ClassTable classes = dass::ClassTable::desk();

  auto [seg_views, det_views] = dass::make_partial_views(
      corpus.train, cfg.data.seg_split_ratio, cfg.data.seed);
  cfg.train.class_weights = dass::class_weights_from_frequency(
      dass::count_labels(seg_views, cfg.model.num_classes));

  dass::DassModel model;
  dass::Adam opt;
  int start_epoch = 0;
  if (!flags.resume.empty()) {
    auto loaded = dass::load_train_checkpoint(flags.resume);
    model = std::move(loaded.model);
    opt = std::move(loaded.opt);
    start_epoch = loaded.next_epoch;
  } else {
    model = dass::DassModel::create(cfg.model, cfg.train.seed);
    opt.beta1 = cfg.train.momentum;
    opt.weight_decay = cfg.train.weight_decay;
  }

  std::ofstream metrics(run_dir / "metrics.jsonl",
                        flags.resume.empty() ? std::ios::trunc : std::ios::app);
  const dass::MetricSink sink = [&](const json& j) { metrics << j.dump() << "\n"; };
  const dass::Evaluator evaluator = [&](dass::DassModel& m) {
    return dass::evaluate_model(m, corpus.test, corpus.test, classes, cfg.eval)
        .to_json();
  };

  const json manifest = train_manifest(cfg, flags, corpus.content_hash, run_dir);
  write_json_file(run_dir / "run_manifest.json", manifest);

  const dass::TrainResult result =
      dass::train_loop(model, opt, seg_views, det_views, cfg.train, start_epoch,
                       sink, evaluator);
  metrics.flush();

  dass::save_train_checkpoint(run_dir / "checkpoint.dass", model, opt,
                              result.epochs_run, result.global_step,
                              dass::run_config_to_json(cfg));
  write_json_file(run_dir / "final_eval.json", result.final_eval);
  std::cout << "run dir: " << run_dir.string() << "\n";
  std::cout << "final eval: " << result.final_eval.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const std::string& checkpoint, const std::string& config_path,
             const std::string& data_dir, const std::string& report_dir_s,
             bool detach, bool recall_3d) {
  if (!fs::exists(checkpoint))
    throw dass::DataError("checkpoint not found: " + checkpoint);
  dass::DassModel model = dass::DassModel::load(checkpoint, nullptr);

  dass::RunConfig cfg;
  if (!config_path.empty()) {
    cfg = dass::load_run_config(config_path);
  } else {
    const dass::Container c = dass::Container::read(checkpoint);
    if (!c.meta.contains("run_config") || c.meta["run_config"].empty())
      throw dass::ConfigError(
          "eval: no --config given and checkpoint has no run config");
    cfg = dass::parse_run_config(c.meta.at("run_config"));
  }
  cfg.eval.recall_3d = recall_3d || cfg.eval.recall_3d;

  const fs::path report_dir = make_run_dir("eval", report_dir_s);
  const Corpus corpus = load_or_make_corpus(cfg, data_dir);
  const dass::ClassTable classes = dass::ClassTable::desk();

  dass::EvalReport report =
      dass::evaluate_model(model, corpus.test, corpus.test, classes, cfg.eval);
  json out = report.to_json();

  if (detach) {
    dass::DassModel seg_only = model.detached();
    // Detached outputs must be bit-identical on every test scene.
    double max_diff = 0;
    for (std::size_t i = 0; i < corpus.test.size(); ++i) {
      dass::EvalScene es =
          dass::prepare_eval_scene(corpus.test[i].cloud, corpus.test[i].labels, {},
                                   cfg.eval, static_cast<std::uint64_t>(i));
      if (es.cloud.valid_count == 0) continue;
      const dass::BatchInput in = dass::BatchInput::from_clouds({&es.cloud});
      const dass::Mat a = model.infer_seg_logits(in, cfg.eval.seed);
      const dass::Mat b = seg_only.infer_seg_logits(in, cfg.eval.seed);
      max_diff = std::max(max_diff, (a - b).cwiseAbs().maxCoeff());
    }
    if (max_diff != 0.0)
      throw dass::NumericalError("detached model diverged from full model by " +
                                 std::to_string(max_diff));
    out["detached_equal"] = true;
    out["detached_params"] = seg_only.param_count();
    out["full_params"] = model.param_count();
  }

  write_json_file(report_dir / "report.json", out);
  dass::write_text_file(report_dir / "report.txt", report.to_text());
  std::cout << report.to_text();
  std::cout << "report dir: " << report_dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_experiment(const std::string& config_path, const std::string& run_dir_s,
                   std::vector<std::int64_t> seeds, std::vector<std::string> cells) {
  if (seeds.empty()) seeds = {0, 1, 2, 3, 4};
  if (cells.empty()) cells = {"dass", "no-aux", "no-sff"};
  const fs::path run_dir = make_run_dir("experiment", run_dir_s);

  json aggregate;
  aggregate["cells"] = json::object();
  const dass::ClassTable classes = dass::ClassTable::desk();

  for (const std::string& cell : cells) {
    std::vector<json> evals;
    for (std::int64_t seed : seeds) {
      TrainFlags flags;
      flags.config_path = config_path;
      flags.run_dir =
          (run_dir / "cells" / (cell + "-s" + std::to_string(seed))).string();
      flags.seed = seed;
      flags.no_aux = cell == "no-aux";
      flags.no_sff = cell == "no-sff";
      std::cout << "=== cell " << cell << " seed " << seed << " ===\n";
      const int rc = cmd_train(flags);
      if (rc != kExitOk) return rc;
      evals.push_back(json::parse(
          dass::read_text_file(fs::path(flags.run_dir) / "final_eval.json")));
    }

    json cell_summary;
    cell_summary["seeds"] = seeds;
    {
      std::vector<double> mious;
      for (const auto& e : evals) mious.push_back(e.value("miou", 0.0));
      cell_summary["miou_median"] = median(mious);
    }
    json per_class = json::object();
    for (const auto& name : classes.names) {
      std::vector<double> vals;
      for (const auto& e : evals) {
        const auto& v = e.at("per_class_iou").at(name);
        if (!v.is_null()) vals.push_back(v.get<double>());
      }
      per_class[name] = vals.empty() ? json(nullptr) : json(median(vals));
    }
    cell_summary["per_class_iou_median"] = per_class;
    if (evals.front().contains("recall_bev")) {
      json rec = json::object();
      for (const auto& [key, value] : evals.front().at("recall_bev").items()) {
        std::vector<double> vals;
        for (const auto& e : evals) vals.push_back(e.at("recall_bev").value(key, 0.0));
        rec[key] = median(vals);
      }
      cell_summary["recall_median"] = rec;
    }
    cell_summary["raw"] = evals;
    aggregate["cells"][cell] = cell_summary;
  }

  // Headline deltas mirroring the ablation axes.
  const auto& cj = aggregate["cells"];
  if (cj.contains("dass") && cj.contains("no-aux")) {
    const auto& d = cj["dass"]["per_class_iou_median"];
    const auto& b = cj["no-aux"]["per_class_iou_median"];
    json deltas = json::object();
    for (const auto& name : classes.names)
      if (!d.at(name).is_null() && !b.at(name).is_null())
        deltas[name] = d.at(name).get<double>() - b.at(name).get<double>();
    aggregate["mtl_iou_delta_vs_no_aux"] = deltas;
  }
  if (cj.contains("dass") && cj.contains("no-sff") &&
      cj["dass"].contains("recall_median")) {
    json deltas = json::object();
    for (const auto& [key, value] : cj["dass"]["recall_median"].items())
      deltas[key] =
          value.get<double>() - cj["no-sff"]["recall_median"].value(key, 0.0);
    aggregate["sff_recall_delta_vs_no_sff"] = deltas;
  }

  write_json_file(run_dir / "aggregate.json", aggregate);

  // Plots: per-class IoU bars and recall curves.
  {
    std::vector<dass::PlotSeries> series;
    for (const std::string& cell : cells) {
      if (!cj.contains(cell)) continue;
      dass::PlotSeries s;
      s.name = cell;
      for (const auto& name : classes.names) {
        const auto& v = cj[cell]["per_class_iou_median"].at(name);
        s.values.push_back(v.is_null() ? 0.0 : v.get<double>());
      }
      series.push_back(std::move(s));
    }
    dass::write_bar_chart_svg(run_dir / "per_class_iou.svg",
                              "Per-class IoU (median over seeds)", classes.names,
                              series);
  }
  {
    std::vector<double> xs;
    std::vector<dass::PlotSeries> series;
    for (const std::string& cell : cells) {
      if (!cj.contains(cell) || !cj[cell].contains("recall_median")) continue;
      dass::PlotSeries s;
      s.name = cell;
      std::vector<std::pair<double, double>> pts;
      for (const auto& [key, value] : cj[cell]["recall_median"].items())
        pts.emplace_back(std::stod(key), value.get<double>());
      std::sort(pts.begin(), pts.end());
      xs.clear();
      for (const auto& [x, y] : pts) {
        xs.push_back(x);
        s.values.push_back(y);
      }
      series.push_back(std::move(s));
    }
    if (!series.empty())
      dass::write_line_chart_svg(run_dir / "recall_curve.svg",
                                 "Proposal recall vs IoU threshold (median)", xs,
                                 series, "IoU threshold", "recall");
  }

  // Text table.
  std::ostringstream table;
  table << "cell            miou";
  for (const auto& name : classes.names) table << "  " << name;
  table << "\n";
  for (const std::string& cell : cells) {
    if (!cj.contains(cell)) continue;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%-14s", cell.c_str());
    table << buf;
    std::snprintf(buf, sizeof(buf), "  %.3f", cj[cell].value("miou_median", 0.0));
    table << buf;
    for (const auto& name : classes.names) {
      const auto& v = cj[cell]["per_class_iou_median"].at(name);
      if (v.is_null())
        table << "  -";
      else {
        std::snprintf(buf, sizeof(buf), "  %.3f", v.get<double>());
        table << buf;
      }
    }
    table << "\n";
  }
  dass::write_text_file(run_dir / "aggregate.txt", table.str());
  std::cout << table.str();
  std::cout << "experiment dir: " << run_dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// infer

int cmd_infer(const std::string& checkpoint, const std::string& input,
              const std::string& out_dir_s, bool as_velodyne) {
  if (!fs::exists(checkpoint))
    throw dass::DataError("checkpoint not found: " + checkpoint);
  dass::DassModel model = dass::DassModel::load(checkpoint, nullptr);

  dass::EvalConfig ecfg;
  {
    const dass::Container c = dass::Container::read(checkpoint);
    if (c.meta.contains("run_config") && !c.meta["run_config"].empty()) {
      const dass::RunConfig rc = dass::parse_run_config(c.meta.at("run_config"));
      ecfg = rc.eval;
      ecfg.points_per_scene = rc.train.points_per_scene;
      ecfg.fov_half_angle_deg = rc.train.fov_half_angle_deg;
    }
  }

  const fs::path out_dir = make_run_dir("infer", out_dir_s);
  dass::PointCloud cloud;
  const bool velodyne_input = as_velodyne || fs::path(input).extension() == ".bin";
  if (velodyne_input) {
    cloud = dass::parse_velodyne_bin(dass::read_file_bytes(input));
    dass::velodyne_to_internal(cloud);
    for (Eigen::Index i = 0; i < cloud.valid_count; ++i)
      cloud.points(i, 3) = std::clamp(cloud.points(i, 3), 0.0, 1.0);
  } else {
    cloud = dass::read_scene(input).cloud;
  }
  if (cloud.valid_count == 0) throw dass::DataError("infer: empty input cloud");

  dass::EvalScene es = dass::prepare_eval_scene(cloud, {}, {}, ecfg, 0);
  if (es.cloud.valid_count == 0)
    throw dass::DataError("infer: no points in the image FOV");
  const dass::BatchInput in = dass::BatchInput::from_clouds({&es.cloud});

  const dass::Mat logits = model.infer_seg_logits(in, ecfg.seed);
  std::vector<std::int32_t> sampled_labels(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index cls = 0;
    logits.row(i).maxCoeff(&cls);
    sampled_labels[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(cls);
  }

  // Propagate labels from the sampled subset to every input point (nearest
  // neighbor); raw id 0 marks unlabeled, class c maps to id c + 1.
  dass::LabelWords words;
  words.semantic.resize(static_cast<std::size_t>(cloud.valid_count), 0);
  words.instance.assign(static_cast<std::size_t>(cloud.valid_count), 0);
  const dass::Mat& sampled_xyz = in.xyz;
  for (Eigen::Index p = 0; p < cloud.valid_count; ++p) {
    double best = 1e300;
    Eigen::Index best_row = -1;
    for (Eigen::Index s = 0; s < sampled_xyz.rows(); ++s) {
      const double d2 =
          (sampled_xyz.row(s) - cloud.points.row(p).head<3>()).squaredNorm();
      if (d2 < best) {
        best = d2;
        best_row = s;
      }
    }
    // Points far from any labeled sample (e.g. outside the FOV) stay 0.
    if (best_row >= 0 && best < 4.0)
      words.semantic[static_cast<std::size_t>(p)] = static_cast<std::uint16_t>(
          sampled_labels[static_cast<std::size_t>(best_row)] + 1);
  }
  dass::write_file_bytes(out_dir / "predictions.label",
                         dass::serialize_semantickitti_labels(words));

  json summary;
  summary["input"] = input;
  summary["points"] = cloud.valid_count;
  summary["labeled_points"] = logits.rows();

  if (model.cfg.with_det_head) {
    const dass::Mat det_rows = model.infer_det_channels(in, ecfg.seed);
    const dass::ProposalSet raw =
        dass::proposals_from_channels(in.xyz, det_rows, model.cfg.codec);
    const dass::ProposalSet sel = dass::select_proposals(raw, ecfg.proposals);
    std::vector<dass::KittiObject> objects;
    for (std::size_t i = 0; i < sel.boxes.size(); ++i) {
      dass::KittiObject o;
      o.type = "Car";
      o.box = sel.boxes[i];
      o.score = sel.scores[i];
      o.has_score = true;
      objects.push_back(o);
    }
    dass::write_text_file(out_dir / "boxes.txt",
                          dass::serialize_kitti_object_labels(objects));
    summary["proposals"] = sel.boxes.size();
  }

  write_json_file(out_dir / "summary.json", summary);
  std::cout << "outputs in " << out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Detection-aware 3D semantic segmentation on synthetic desk-scale scenes"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus on disk");
  std::string gen_config, gen_out;
  gen->add_option("--config", gen_config, "Run config JSON")->required();
  gen->add_option("--out", gen_out, "Output corpus directory")->required();

  auto* train = app.add_subcommand("train", "Train a model");
  TrainFlags tf;
  train->add_option("--config", tf.config_path, "Run config JSON")->required();
  train->add_option("--data", tf.data_dir, "Corpus directory from gen-data");
  train->add_option("--run-dir", tf.run_dir, "Output directory (default: timestamped)");
  train->add_option("--resume", tf.resume, "Checkpoint to resume from");
  train->add_option("--seed", tf.seed, "Training seed override");
  train->add_flag("--no-aux", tf.no_aux, "Drop the detection head (Semantic Baseline)");
  train->add_flag("--no-sff", tf.no_sff, "Disable semantic feature fusion");
  train->add_option("--sff-dim", tf.sff_dim, "SFF summary width override");
  train->add_option("--points-per-scene", tf.points_per_scene, "Points per scene");
  train->add_option("--classes", tf.classes, "Number of classes override");
  train->add_option("--epochs", tf.epochs, "Epoch count override");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ev_ckpt, ev_config, ev_data, ev_report;
  bool ev_detach = false, ev_recall3d = false;
  eval->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  eval->add_option("--config", ev_config, "Run config JSON (default: from checkpoint)");
  eval->add_option("--data", ev_data, "Corpus directory");
  eval->add_option("--report", ev_report, "Report directory");
  eval->add_flag("--detach", ev_detach,
                 "Evaluate the detached seg-only model and assert equality");
  eval->add_flag("--recall-3d", ev_recall3d, "Also log volumetric-IoU recall");

  auto* exp = app.add_subcommand("experiment", "Run the ablation matrix");
  std::string ex_config, ex_run_dir;
  std::vector<std::int64_t> ex_seeds;
  std::vector<std::string> ex_cells;
  exp->add_option("--config", ex_config, "Run config JSON")->required();
  exp->add_option("--run-dir", ex_run_dir, "Output directory");
  exp->add_option("--seeds", ex_seeds, "Seeds (default 0 1 2 3 4)");
  exp->add_option("--cells", ex_cells, "Cells (default dass no-aux no-sff)");

  auto* infer = app.add_subcommand("infer", "Run inference on a scene or .bin file");
  std::string in_ckpt, in_input, in_out;
  bool in_velodyne = false;
  infer->add_option("--checkpoint", in_ckpt, "Checkpoint file")->required();
  infer->add_option("--input", in_input, "Scene container (.dsc) or velodyne .bin")
      ->required();
  infer->add_option("--out", in_out, "Output directory");
  infer->add_flag("--velodyne", in_velodyne, "Treat the input as a velodyne .bin");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_gen_data(gen_config, gen_out);
    if (train->parsed()) return cmd_train(tf);
    if (eval->parsed())
      return cmd_eval(ev_ckpt, ev_config, ev_data, ev_report, ev_detach, ev_recall3d);
    if (exp->parsed()) return cmd_experiment(ex_config, ex_run_dir, ex_seeds, ex_cells);
    if (infer->parsed()) return cmd_infer(in_ckpt, in_input, in_out, in_velodyne);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  } catch (const dass::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dass::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const dass::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
}
