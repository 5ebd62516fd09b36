#include "supbench/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "supbench/cam/methods.hpp"
#include "supbench/cli/config.hpp"
#include "supbench/cli/report.hpp"
#include "supbench/core/errors.hpp"
#include "supbench/core/tsv.hpp"
#include "supbench/dataset/io.hpp"
#include "supbench/dataset/splits.hpp"
#include "supbench/dataset/synthetic.hpp"
#include "supbench/dataset/tiling.hpp"
#include "supbench/experiments/ablation.hpp"
#include "supbench/experiments/fusion.hpp"
#include "supbench/experiments/runner.hpp"
#include "supbench/experiments/search.hpp"
#include "supbench/experiments/sweep.hpp"
#include "supbench/experiments/symmetry.hpp"
#include "supbench/experiments/timing.hpp"
#include "supbench/localization/mask.hpp"
#include "supbench/models/classifier.hpp"
#include "supbench/models/detector.hpp"
#include "supbench/models/predictions.hpp"
#include "supbench/models/training.hpp"
#include "supbench/models/vae.hpp"

namespace supbench::cli {
namespace {

namespace fs = std::filesystem;
using models::Method;

// ---------------------------------------------------------------- plumbing

struct Dataset {
  std::vector<dataset::TileRecord> tiles;
  dataset::SplitManifest splits;
};

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  d.tiles = dataset::read_tiles(dir);
  d.splits = dataset::read_splits(dir / "splits.tsv");
  return d;
}

std::vector<const dataset::TileRecord*> gather(
    const Dataset& data, const std::vector<std::string>& ids) {
  return models::TileIndex(data.tiles).gather(ids);
}

AppConfig load_config(const std::string& path) {
  return path.empty() ? AppConfig{} : parse_config(fs::path(path));
}

std::string iso_utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string file_crc32_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExecutionError("cannot hash artifact: " + path.string());
  uLong crc = crc32(0L, Z_NULL, 0);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    crc = crc32(crc, reinterpret_cast<const Bytef*>(buf),
                static_cast<uInt>(in.gcount()));
  }
  char hex[16];
  std::snprintf(hex, sizeof hex, "%08lx", crc);
  return hex;
}

// Reproducibility record written next to every command's outputs.
void write_manifest(const fs::path& dir,
                    const std::vector<std::string>& command,
                    const AppConfig& config,
                    const std::map<std::string, std::uint64_t>& seeds,
                    const std::vector<fs::path>& artifacts,
                    const std::string& started_at) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["config"] = serialize_config(config);
  manifest["seeds"] = seeds;
  nlohmann::json hashes = nlohmann::json::object();
  for (const fs::path& a : artifacts) {
    hashes[a.generic_string()] = file_crc32_hex(a);
  }
  manifest["artifact_crc32"] = hashes;
  manifest["hardware"] = experiments::hardware_descriptor();
  manifest["started_at"] = started_at;
  manifest["finished_at"] = iso_utc_now();
  fs::create_directories(dir);
  std::ofstream out(dir / "manifest.json");
  if (!out) {
    throw ExecutionError("cannot write manifest under " + dir.string());
  }
  out << manifest.dump(2) << "\n";
}

// ------------------------------------------------------- model evaluation

experiments::RunEval eval_with_detector(
    models::Detector& model,
    const std::vector<const dataset::TileRecord*>& tiles) {
  experiments::RunEval run;
  for (const auto* tile : tiles) {
    const models::DetectorOutput out = model.predict(*tile);
    experiments::TileEval t;
    t.tile_id = tile->tile_id;
    t.presence_score = out.presence_score;
    t.detections = out.detections;
    run.tiles.push_back(std::move(t));
  }
  return run;
}

experiments::RunEval eval_with_classifier(
    models::Classifier& model,
    const std::vector<const dataset::TileRecord*>& tiles,
    cam::CamMethod cam_method) {
  experiments::RunEval run;
  for (const auto* tile : tiles) {
    experiments::TileEval t;
    t.tile_id = tile->tile_id;
    t.presence_score = model.predict_presence(*tile);
    cam::ActivationCapture capture =
        model.capture(*tile, cam_method == cam::CamMethod::FullGrad);
    t.heatmap = cam::compute_heatmap(capture, cam_method, tile->image.width,
                                     tile->image.height);
    run.tiles.push_back(std::move(t));
  }
  return run;
}

experiments::RunEval eval_with_vae(
    models::Vae& model, const models::AnomalyNormalizer& normalizer,
    const std::vector<const dataset::TileRecord*>& tiles) {
  experiments::RunEval run;
  for (const auto* tile : tiles) {
    experiments::TileEval t;
    t.tile_id = tile->tile_id;
    t.presence_score = model.anomaly_score(normalizer, *tile);
    cam::ActivationCapture capture = model.capture(*tile, false);
    t.heatmap = cam::compute_heatmap(capture, cam::CamMethod::GradCam,
                                     tile->image.width, tile->image.height);
    run.tiles.push_back(std::move(t));
  }
  return run;
}

experiments::RunEval evaluate_artifact(
    Method method, const fs::path& artifact,
    const std::vector<const dataset::TileRecord*>& tiles,
    cam::CamMethod cam_method) {
  switch (method) {
    case Method::Detector: {
      models::Detector model = models::Detector::load(artifact);
      return eval_with_detector(model, tiles);
    }
    case Method::Classifier: {
      models::Classifier model = models::Classifier::load(artifact);
      return eval_with_classifier(model, tiles, cam_method);
    }
    case Method::Vae: {
      models::LoadedVae loaded = models::Vae::load(artifact);
      if (!loaded.normalizer) {
        throw ExecutionError(
            "vae artifact has no anomaly normalizer; retrain with the train "
            "command: " +
            artifact.string());
      }
      return eval_with_vae(loaded.model, *loaded.normalizer, tiles);
    }
  }
  throw ExecutionError("unreachable method");
}

// Trains one model; saves the artifact and train log when paths are given;
// returns the evaluation over `eval_tiles`.
experiments::RunEval train_and_evaluate(
    Method method, const models::BackboneConfig& backbone,
    const models::TrainConfig& config, const Dataset& data,
    const std::vector<const dataset::TileRecord*>& eval_tiles,
    cam::CamMethod cam_method, const fs::path& artifact_path,
    const fs::path& log_path) {
  const auto persist = [&](auto& model, models::TrainLog& log) {
    if (!log_path.empty()) models::write_train_log(log_path, log);
  };
  switch (method) {
    case Method::Detector: {
      models::Detector model(backbone, config);
      models::TrainLog log = model.train(data.splits, data.tiles);
      persist(model, log);
      if (!artifact_path.empty()) model.save(artifact_path);
      return eval_with_detector(model, eval_tiles);
    }
    case Method::Classifier: {
      models::Classifier model(backbone, config);
      models::TrainLog log = model.train(data.splits, data.tiles);
      persist(model, log);
      if (!artifact_path.empty()) model.save(artifact_path);
      return eval_with_classifier(model, eval_tiles, cam_method);
    }
    case Method::Vae: {
      models::Vae model(backbone, config);
      models::TrainLog log = model.train(data.splits, data.tiles);
      persist(model, log);
      const models::AnomalyNormalizer normalizer =
          model.calibrate_normalizer(data.splits, data.tiles);
      if (!artifact_path.empty()) model.save(artifact_path, normalizer);
      return eval_with_vae(model, normalizer, eval_tiles);
    }
  }
  throw ExecutionError("unreachable method");
}

void write_run_outputs(const fs::path& dir, Method method, int run_id,
                       const experiments::RunEval& run, bool save_masks) {
  fs::create_directories(dir);
  std::vector<models::PredictionRecord> records;
  for (const experiments::TileEval& t : run.tiles) {
    models::PredictionRecord r;
    r.tile_id = t.tile_id;
    r.method = method;
    r.run_id = run_id;
    r.presence_score = t.presence_score;
    r.detections = t.detections;
    if (save_masks && method != Method::Detector) {
      const std::string rel = "heatmaps/" + t.tile_id + ".pgm";
      fs::create_directories(dir / "heatmaps");
      cam::write_heatmap(dir / rel, t.heatmap);
      r.heatmap_path = rel;
    }
    records.push_back(std::move(r));
  }
  if (save_masks && method == Method::Detector) {
    fs::create_directories(dir / "masks");
    for (const experiments::TileEval& t : run.tiles) {
      const auto mask = localization::detections_to_mask(
          t.detections, 0.0, dataset::kTileSize, dataset::kTileSize,
          t.tile_id);
      localization::write_mask(dir / "masks" / (t.tile_id + ".pbm"), mask);
    }
  }
  models::write_predictions(dir / "predictions.tsv", records);
}

std::vector<metrics::MetricsRow> per_threshold_rows(
    const experiments::RunEval& run, const std::vector<experiments::EvalTile>& gt,
    Method method) {
  std::vector<metrics::MetricsRow> rows;
  for (double t : experiments::default_thresholds(method)) {
    rows.push_back(experiments::evaluate_run(run, gt, method, t, t));
  }
  return rows;
}

// Best-F1 detection threshold for one run, lower threshold on ties.
double best_f1_threshold(const experiments::RunEval& run,
                         const std::vector<experiments::EvalTile>& gt,
                         Method method) {
  double best_t = 0.0;
  double best_f1 = -1.0;
  for (double t : experiments::default_thresholds(method)) {
    const double f1 = experiments::evaluate_run(run, gt, method, t, t).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_t = t;
    }
  }
  return best_t;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> m = {Method::Detector, Method::Classifier,
                                        Method::Vae};
  return m;
}

// --------------------------------------------------------------- commands

// Flags shared by every experiment command.
struct CommonOpts {
  std::string config_path;
  std::string dataset = "data/synth";
  std::string results;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> workers;
  std::string backbone = "reduced";
  bool save_masks = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_dataset = true) {
  cmd->add_option("--config", o.config_path, "configuration file");
  if (with_dataset) {
    cmd->add_option("--dataset", o.dataset, "tiled dataset directory");
  }
  cmd->add_option("--results", o.results,
                  "output root (default: $SUPBENCH_RESULTS_DIR or results/)");
  cmd->add_option("--seed", o.seed, "base RNG seed override");
  cmd->add_option("--runs", o.runs, "number of training runs");
  cmd->add_option("--workers", o.workers, "parallel worker threads");
  cmd->add_option("--backbone", o.backbone, "backbone: reduced or resnet50")
      ->check(CLI::IsMember({"reduced", "resnet50"}));
  cmd->add_flag("--save-masks", o.save_masks,
                "persist heatmaps and detection masks");
}

struct ExperimentContext {
  AppConfig config;
  models::BackboneConfig backbone;
  Dataset data;
  std::vector<const dataset::TileRecord*> test_tiles;
  std::vector<experiments::EvalTile> gt;
  std::vector<bool> labels;
  fs::path root;
  int workers = 1;
};

ExperimentContext make_context(const CommonOpts& o) {
  ExperimentContext ctx;
  ctx.config = load_config(o.config_path);
  ctx.backbone.architecture = nn::backbone_from_name(o.backbone);
  ctx.data = load_dataset(o.dataset);
  ctx.test_tiles = gather(ctx.data, ctx.data.splits.test);
  ctx.gt = experiments::build_eval_tiles(ctx.test_tiles);
  for (const auto* t : ctx.test_tiles) ctx.labels.push_back(t->presence);
  ctx.root = experiments::results_root(o.results);
  ctx.workers = o.workers.value_or(ctx.config.run.workers);
  return ctx;
}

// Per-run train configuration: CLI seed overrides the config seed; run k
// trains with base + k - 1.
models::TrainConfig run_train_config(const ExperimentContext& ctx,
                                     Method method,
                                     const std::optional<std::uint64_t>& seed,
                                     int run_k) {
  models::TrainConfig tc = ctx.config.train_config(method);
  tc.rng_seed = seed.value_or(tc.rng_seed) + static_cast<std::uint64_t>(run_k - 1);
  return tc;
}

int cmd_synth(const std::vector<std::string>& argv, const CommonOpts& o,
              const std::string& out_dir, int scenes, int scene_size,
              double density) {
  const std::string started = iso_utc_now();
  const AppConfig config = load_config(o.config_path);
  dataset::SyntheticSpec spec;
  spec.n_scenes = scenes > 0 ? scenes : config.data.scenes;
  spec.scene_size = scene_size > 0 ? scene_size : config.data.scene_size;
  spec.panel_density = density > 0 ? density : config.data.panel_density;
  spec.rng_seed = o.seed.value_or(config.data.seed);

  const std::vector<dataset::SceneRecord> scenes_out =
      dataset::generate_synthetic_dataset(spec);
  std::vector<dataset::TileRecord> tiles;
  for (const auto& scene : scenes_out) {
    auto scene_tiles = dataset::tile_scene(scene);
    std::move(scene_tiles.begin(), scene_tiles.end(),
              std::back_inserter(tiles));
  }
  tiles = dataset::filter_small_polygons(std::move(tiles));
  const dataset::SplitManifest splits = dataset::build_splits(tiles,
                                                              spec.rng_seed);
  fs::create_directories(out_dir);
  dataset::write_tiles(out_dir, tiles);
  dataset::write_splits(fs::path(out_dir) / "splits.tsv", splits);
  write_manifest(out_dir, argv, config, {{"data", spec.rng_seed}}, {},
                 started);

  long positives = 0;
  for (const auto& t : tiles) positives += t.presence ? 1 : 0;
  std::cout << "synth: " << scenes_out.size() << " scenes, " << tiles.size()
            << " tiles (" << positives << " positive) -> " << out_dir << "\n"
            << "splits: train " << splits.train.size() << ", validation "
            << splits.validation.size() << ", test " << splits.test.size()
            << ", vae_train " << splits.vae_train.size() << "\n";
  return 0;
}

int cmd_prepare_data(const std::vector<std::string>& argv,
                     const CommonOpts& o, const std::string& images,
                     const std::string& annotations,
                     const std::string& out_dir) {
  const std::string started = iso_utc_now();
  const AppConfig config = load_config(o.config_path);
  const std::uint64_t seed = o.seed.value_or(config.data.seed);

  std::vector<dataset::SceneRecord> scenes =
      dataset::clean_empty_scenes(dataset::ingest_scenes(images, annotations));
  std::vector<dataset::TileRecord> tiles;
  for (const auto& scene : scenes) {
    auto scene_tiles = dataset::tile_scene(scene);
    std::move(scene_tiles.begin(), scene_tiles.end(),
              std::back_inserter(tiles));
  }
  tiles = dataset::filter_small_polygons(std::move(tiles));
  const dataset::SplitManifest splits = dataset::build_splits(tiles, seed);
  fs::create_directories(out_dir);
  dataset::write_tiles(out_dir, tiles);
  dataset::write_splits(fs::path(out_dir) / "splits.tsv", splits);
  write_manifest(out_dir, argv, config, {{"data", seed}}, {}, started);

  std::cout << "prepare-data: " << scenes.size() << " annotated scenes, "
            << tiles.size() << " tiles -> " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::vector<std::string>& argv, const CommonOpts& o,
              const std::string& method_name, const std::string& out_path) {
  const std::string started = iso_utc_now();
  const Method method = models::method_from_name(method_name);
  ExperimentContext ctx = make_context(o);
  const models::TrainConfig tc = run_train_config(ctx, method, o.seed, 1);

  const fs::path artifact =
      out_path.empty()
          ? ctx.root / "artifacts" / (method_name + ".bin")
          : fs::path(out_path);
  fs::create_directories(artifact.parent_path());
  const fs::path log_path =
      artifact.parent_path() / (method_name + "_train_log.tsv");

  train_and_evaluate(method, ctx.backbone, tc, ctx.data, {},
                     cam::CamMethod::GradCam, artifact, log_path);
  write_manifest(artifact.parent_path(), argv, ctx.config,
                 {{method_name, tc.rng_seed}}, {artifact}, started);
  std::cout << "train: " << method_name << " (" << tc.epochs << " epochs) -> "
            << artifact.string() << "\n";
  return 0;
}

int cmd_predict(const std::vector<std::string>& argv, const CommonOpts& o,
                const std::string& method_name, const std::string& artifact,
                const std::string& split, const std::string& cam_name,
                int run_id) {
  const std::string started = iso_utc_now();
  const Method method = models::method_from_name(method_name);
  const cam::CamMethod cam_method = cam::cam_method_from_name(cam_name);
  const AppConfig config = load_config(o.config_path);
  const Dataset data = load_dataset(o.dataset);

  const std::map<std::string, const std::vector<std::string>*> splits = {
      {"train", &data.splits.train},
      {"validation", &data.splits.validation},
      {"test", &data.splits.test},
      {"vae_train", &data.splits.vae_train}};
  const auto it = splits.find(split);
  if (it == splits.end()) {
    throw ValidationError("unknown split '" + split +
                          "'; expected train, validation, test or vae_train");
  }
  const auto tiles = gather(data, *it->second);
  const experiments::RunEval run =
      evaluate_artifact(method, artifact, tiles, cam_method);

  const fs::path root = experiments::results_root(o.results);
  const fs::path dir =
      experiments::run_dir(root, "predict", method_name, run_id);
  write_run_outputs(dir, method, run_id, run, o.save_masks);
  write_manifest(dir, argv, config, {}, {fs::path(artifact)}, started);

  double mean_score = 0.0;
  for (const auto& t : run.tiles) mean_score += t.presence_score;
  if (!run.tiles.empty()) mean_score /= static_cast<double>(run.tiles.size());
  std::cout << "predict: " << run.tiles.size() << " " << split
            << " tiles, mean presence score "
            << tsv::format_number(mean_score) << " -> " << dir.string()
            << "\n";
  return 0;
}

int cmd_sweep(const std::vector<std::string>& argv, const CommonOpts& o,
              const std::string& method_name, const std::string& cam_name,
              const std::vector<std::string>& artifacts) {
  const std::string started = iso_utc_now();
  const Method method = models::method_from_name(method_name);
  const cam::CamMethod cam_method = cam::cam_method_from_name(cam_name);
  ExperimentContext ctx = make_context(o);
  const int runs = o.runs.value_or(ctx.config.run.runs);
  if (runs < 1) throw ValidationError("--runs must be positive");
  if (!artifacts.empty() &&
      static_cast<int>(artifacts.size()) != runs) {
    throw ValidationError("sweep got " + std::to_string(artifacts.size()) +
                          " artifacts for " + std::to_string(runs) + " runs");
  }

  std::vector<experiments::RunEval> run_evals(runs);
  std::vector<fs::path> artifact_paths(runs);
  std::vector<experiments::Job> jobs;
  for (int k = 1; k <= runs; ++k) {
    jobs.push_back({"sweep/" + method_name + "/run" + std::to_string(k),
                    [&, k] {
      const fs::path dir =
          experiments::run_dir(ctx.root, "sweep", method_name, k);
      experiments::RunEval run;
      if (!artifacts.empty()) {
        artifact_paths[k - 1] = artifacts[k - 1];
        run = evaluate_artifact(method, artifacts[k - 1], ctx.test_tiles,
                                cam_method);
      } else {
        const models::TrainConfig tc =
            run_train_config(ctx, method, o.seed, k);
        artifact_paths[k - 1] = dir / "model.bin";
        run = train_and_evaluate(method, ctx.backbone, tc, ctx.data,
                                 ctx.test_tiles, cam_method,
                                 artifact_paths[k - 1],
                                 dir / "train_log.tsv");
      }
      experiments::write_metrics_run(dir / "metrics.tsv",
                                     per_threshold_rows(run, ctx.gt, method));
      write_run_outputs(dir, method, k, run, o.save_masks);
      run_evals[k - 1] = std::move(run);
    }});
  }
  experiments::run_jobs(std::move(jobs), ctx.workers);

  const fs::path method_dir = ctx.root / "sweep" / method_name;
  std::map<std::string, std::uint64_t> seeds;
  for (int k = 1; k <= runs; ++k) {
    seeds["run" + std::to_string(k)] =
        run_train_config(ctx, method, o.seed, k).rng_seed;
  }
  if (runs == 3) {
    experiments::SweepSpec spec;
    spec.method = method;
    spec.thresholds = experiments::default_thresholds(method);
    spec.runs = runs;
    const experiments::SweepResult result =
        experiments::threshold_sweep(spec, run_evals, ctx.gt);
    experiments::write_metrics_aggregate(method_dir / "metrics.tsv", result);
    std::cout << "sweep: " << method_name << ", best F1 threshold "
              << tsv::format_number(
                     result.rows[result.best_f1_index].threshold);
    if (result.best_dice_index) {
      std::cout << ", best DICE threshold "
                << tsv::format_number(
                       result.rows[*result.best_dice_index].threshold);
    }
    std::cout << " -> " << method_dir.string() << "\n";
  } else {
    std::cout << "sweep: " << method_name << ", " << runs
              << " run(s); aggregate table needs exactly 3 runs, skipped\n";
  }
  write_manifest(method_dir, argv, ctx.config, seeds, artifact_paths,
                 started);
  return 0;
}

int cmd_cam_compare(const std::vector<std::string>& argv,
                    const CommonOpts& o) {
  const std::string started = iso_utc_now();
  ExperimentContext ctx = make_context(o);
  const int runs = o.runs.value_or(ctx.config.run.runs);
  if (runs != 3) {
    throw ValidationError("cam-compare aggregates exactly 3 runs, got " +
                          std::to_string(runs));
  }

  // One capture per tile per run serves all six CAM variants.
  const auto& cams = cam::all_cam_methods();
  std::vector<std::vector<experiments::RunEval>> per_cam(
      cams.size(), std::vector<experiments::RunEval>(runs));
  std::vector<fs::path> artifact_paths(runs);
  std::vector<experiments::Job> jobs;
  for (int k = 1; k <= runs; ++k) {
    jobs.push_back({"cam_compare/run" + std::to_string(k), [&, k] {
      const fs::path dir =
          experiments::run_dir(ctx.root, "cam_compare", "classifier", k);
      const models::TrainConfig tc =
          run_train_config(ctx, Method::Classifier, o.seed, k);
      artifact_paths[k - 1] = dir / "model.bin";
      models::Classifier model(ctx.backbone, tc);
      models::TrainLog log = model.train(ctx.data.splits, ctx.data.tiles);
      models::write_train_log(dir / "train_log.tsv", log);
      model.save(artifact_paths[k - 1]);
      for (std::size_t c = 0; c < cams.size(); ++c) {
        per_cam[c][k - 1].tiles.reserve(ctx.test_tiles.size());
      }
      for (const auto* tile : ctx.test_tiles) {
        const double score = model.predict_presence(*tile);
        cam::ActivationCapture capture = model.capture(*tile, true);
        for (std::size_t c = 0; c < cams.size(); ++c) {
          experiments::TileEval t;
          t.tile_id = tile->tile_id;
          t.presence_score = score;
          t.heatmap = cam::compute_heatmap(capture, cams[c],
                                           tile->image.width,
                                           tile->image.height);
          per_cam[c][k - 1].tiles.push_back(std::move(t));
        }
      }
    }});
  }
  experiments::run_jobs(std::move(jobs), ctx.workers);

  experiments::SweepSpec spec;
  spec.method = Method::Classifier;
  spec.thresholds = experiments::default_thresholds(Method::Classifier);
  spec.runs = runs;
  std::vector<std::pair<std::string, std::vector<experiments::RunEval>>>
      by_name;
  for (std::size_t c = 0; c < cams.size(); ++c) {
    by_name.emplace_back(cam::cam_method_name(cams[c]),
                         std::move(per_cam[c]));
  }
  const auto rows = experiments::cam_comparison(spec, by_name, ctx.gt);
  const fs::path dir = ctx.root / "cam_compare";
  fs::create_directories(dir);
  experiments::write_cam_comparison(dir / "cam_comparison.tsv", rows);
  write_manifest(dir, argv, ctx.config,
                 {{"classifier", o.seed.value_or(
                                     ctx.config.classifier.rng_seed)}},
                 artifact_paths, started);
  std::cout << "cam-compare: " << rows.size() << " CAM variants -> "
            << (dir / "cam_comparison.tsv").string() << "\n";
  return 0;
}

int cmd_symmetry(const std::vector<std::string>& argv, const CommonOpts& o) {
  const std::string started = iso_utc_now();
  ExperimentContext ctx = make_context(o);
  const fs::path dir = ctx.root / "symmetry";

  std::vector<experiments::RunEval> evals(all_methods().size());
  std::vector<experiments::Job> jobs;
  for (std::size_t i = 0; i < all_methods().size(); ++i) {
    jobs.push_back({"symmetry/" + models::method_name(all_methods()[i]),
                    [&, i] {
      const Method m = all_methods()[i];
      const models::TrainConfig tc = run_train_config(ctx, m, o.seed, 1);
      const fs::path run = dir / models::method_name(m);
      fs::create_directories(run);
      evals[i] = train_and_evaluate(m, ctx.backbone, tc, ctx.data,
                                    ctx.test_tiles, cam::CamMethod::GradCam,
                                    run / "model.bin",
                                    run / "train_log.tsv");
    }});
  }
  experiments::run_jobs(std::move(jobs), ctx.workers);

  std::vector<std::string> names;
  std::vector<std::vector<bool>> predictions;
  std::vector<std::string> threshold_lines = {"# method\tthreshold"};
  for (std::size_t i = 0; i < all_methods().size(); ++i) {
    const Method m = all_methods()[i];
    const double t = best_f1_threshold(evals[i], ctx.gt, m);
    names.push_back(models::method_name(m));
    std::vector<bool> pred;
    for (const auto& tile : evals[i].tiles) {
      pred.push_back(tile.presence_score >= t);
    }
    predictions.push_back(std::move(pred));
    threshold_lines.push_back(models::method_name(m) + '\t' +
                              tsv::format_number(t));
  }
  const experiments::SymmetryMatrix matrix =
      experiments::symmetry_matrix(names, predictions, ctx.labels);
  fs::create_directories(dir);
  experiments::write_symmetry(dir / "symmetry.tsv", matrix);
  tsv::write_lines(dir / "thresholds.tsv", threshold_lines);
  write_manifest(dir, argv, ctx.config, {}, {}, started);
  std::cout << "symmetry: " << ctx.labels.size() << " test tiles -> "
            << (dir / "symmetry.tsv").string() << "\n";
  return 0;
}

int cmd_ablate(const std::vector<std::string>& argv, const CommonOpts& o,
               const std::string& method_name) {
  const std::string started = iso_utc_now();
  const Method method = models::method_from_name(method_name);
  ExperimentContext ctx = make_context(o);
  const int runs = o.runs.value_or(ctx.config.run.runs);
  if (runs != 3) {
    throw ValidationError("ablate aggregates exactly 3 runs, got " +
                          std::to_string(runs));
  }
  const auto fractions = experiments::ablation_fractions();
  const auto thresholds = experiments::ablation_thresholds(method);

  // Metrics are computed inside each job at the fixed thresholds so per-tile
  // heatmaps never accumulate across the 36 trainings.
  std::vector<std::vector<metrics::MetricsRow>> rows(
      fractions.size(), std::vector<metrics::MetricsRow>(runs));
  std::vector<experiments::Job> jobs;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    for (int k = 1; k <= runs; ++k) {
      const std::string pct =
          std::to_string(static_cast<int>(fractions[fi] * 100 + 0.5));
      jobs.push_back(
          {"ablation/" + method_name + "/" + pct + "/run" + std::to_string(k),
           [&, fi, k] {
        models::TrainConfig tc = run_train_config(ctx, method, o.seed, k);
        tc.data_fraction = fractions[fi];
        const fs::path dir = ctx.root / "ablation" / method_name /
                             ("fraction_" +
                              std::to_string(static_cast<int>(
                                  fractions[fi] * 100 + 0.5))) /
                             ("run" + std::to_string(k));
        fs::create_directories(dir);
        const experiments::RunEval run = train_and_evaluate(
            method, ctx.backbone, tc, ctx.data, ctx.test_tiles,
            cam::CamMethod::GradCam, dir / "model.bin",
            dir / "train_log.tsv");
        write_run_outputs(dir, method, k, run, o.save_masks);
        rows[fi][k - 1] = experiments::evaluate_run(
            run, ctx.gt, method, thresholds.detect, thresholds.localize);
      }});
    }
  }
  experiments::run_jobs(std::move(jobs), ctx.workers);

  std::vector<experiments::AblationPoint> points;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    experiments::AblationPoint p;
    p.fraction = fractions[fi];
    p.row = experiments::aggregate_metric_rows(thresholds.detect, rows[fi]);
    points.push_back(std::move(p));
  }
  const fs::path dir = ctx.root / "ablation" / method_name;
  experiments::write_ablation(dir / "ablation.tsv", points);
  write_manifest(dir, argv, ctx.config,
                 {{method_name, o.seed.value_or(ctx.config.train_config(
                                    method).rng_seed)}},
                 {}, started);
  std::cout << "ablate: " << method_name << ", " << fractions.size()
            << " fractions x " << runs << " runs -> "
            << (dir / "ablation.tsv").string() << "\n";
  return 0;
}

int cmd_search(const std::vector<std::string>& argv, const CommonOpts& o,
               const std::string& method_name, int budget_flag) {
  const std::string started = iso_utc_now();
  const Method method = models::method_from_name(method_name);
  ExperimentContext ctx = make_context(o);
  const int budget =
      budget_flag > 0 ? budget_flag : ctx.config.run.search_budget;
  const auto val_tiles = gather(ctx.data, ctx.data.splits.validation);
  const auto val_gt = experiments::build_eval_tiles(val_tiles);
  const std::uint64_t seed =
      o.seed.value_or(ctx.config.train_config(method).rng_seed);

  int trial_no = 0;
  const experiments::TrialFn score_trial =
      [&](const models::TrainConfig& trial) {
        models::TrainConfig tc = trial;
        tc.rng_seed = seed;
        const experiments::RunEval run =
            train_and_evaluate(method, ctx.backbone, tc, ctx.data, val_tiles,
                               cam::CamMethod::GradCam, {}, {});
        double best = 0.0;
        for (double t : experiments::default_thresholds(method)) {
          best = std::max(
              best, experiments::evaluate_run(run, val_gt, method, t, t).f1);
        }
        ++trial_no;
        std::cout << "  trial " << trial_no << ": best validation F1 "
                  << tsv::format_number(best) << "\n";
        return best;
      };
  const experiments::SearchResult result = experiments::hyperparam_search(
      method, experiments::table_search_space(method), budget, score_trial);

  const fs::path dir = ctx.root / "search" / method_name;
  fs::create_directories(dir);
  experiments::write_trials(dir / "trials.tsv", result);
  write_manifest(dir, argv, ctx.config, {{method_name, seed}}, {}, started);
  std::cout << "search: " << method_name << ", " << result.trials.size()
            << " trials, best validation F1 "
            << tsv::format_number(result.best_score) << " -> "
            << (dir / "trials.tsv").string() << "\n";
  return 0;
}

int cmd_time(const std::vector<std::string>& argv, const CommonOpts& o,
             const std::string& method_flag) {
  const std::string started = iso_utc_now();
  ExperimentContext ctx = make_context(o);
  std::vector<Method> selected;
  if (method_flag == "all") {
    selected = all_methods();
  } else {
    selected = {models::method_from_name(method_flag)};
  }

  std::vector<experiments::TimingResult> results;
  for (const Method m : selected) {
    const models::TrainConfig tc = run_train_config(ctx, m, o.seed, 1);
    // The trained model is produced in the timed train phase and reused by
    // the timed evaluation phase.
    std::shared_ptr<void> model;
    std::shared_ptr<models::AnomalyNormalizer> normalizer;
    const auto train_fn = [&] {
      switch (m) {
        case Method::Detector: {
          auto p = std::make_shared<models::Detector>(ctx.backbone, tc);
          p->train(ctx.data.splits, ctx.data.tiles);
          model = p;
          break;
        }
        case Method::Classifier: {
          auto p = std::make_shared<models::Classifier>(ctx.backbone, tc);
          p->train(ctx.data.splits, ctx.data.tiles);
          model = p;
          break;
        }
        case Method::Vae: {
          auto p = std::make_shared<models::Vae>(ctx.backbone, tc);
          p->train(ctx.data.splits, ctx.data.tiles);
          normalizer = std::make_shared<models::AnomalyNormalizer>(
              p->calibrate_normalizer(ctx.data.splits, ctx.data.tiles));
          model = p;
          break;
        }
      }
    };
    const auto eval_fn = [&] {
      switch (m) {
        case Method::Detector:
          eval_with_detector(*std::static_pointer_cast<models::Detector>(model),
                             ctx.test_tiles);
          break;
        case Method::Classifier:
          eval_with_classifier(
              *std::static_pointer_cast<models::Classifier>(model),
              ctx.test_tiles, cam::CamMethod::GradCam);
          break;
        case Method::Vae:
          eval_with_vae(*std::static_pointer_cast<models::Vae>(model),
                        *normalizer, ctx.test_tiles);
          break;
      }
    };
    results.push_back(experiments::time_method(
        models::method_name(m), tc.epochs,
        static_cast<int>(ctx.test_tiles.size()), train_fn, eval_fn));
    std::cout << "time: " << models::method_name(m) << " trained in "
              << tsv::format_number(results.back().train_seconds)
              << " s, evaluated " << ctx.test_tiles.size() << " tiles in "
              << tsv::format_number(results.back().eval_seconds) << " s\n";
  }
  const fs::path dir = ctx.root / "timing";
  fs::create_directories(dir);
  experiments::write_timing(dir / "timing.tsv", results);
  write_manifest(dir, argv, ctx.config, {}, {}, started);
  return 0;
}

int cmd_fuse(const std::vector<std::string>& argv, const CommonOpts& o,
             const std::string& rule_flag) {
  const std::string started = iso_utc_now();
  ExperimentContext ctx = make_context(o);
  std::vector<experiments::FusionRule> rules;
  if (rule_flag == "all") {
    rules = {experiments::FusionRule::Or, experiments::FusionRule::And,
             experiments::FusionRule::Majority};
  } else {
    rules = {experiments::fusion_rule_from_name(rule_flag)};
  }

  std::vector<experiments::RunEval> evals(all_methods().size());
  std::vector<experiments::Job> jobs;
  for (std::size_t i = 0; i < all_methods().size(); ++i) {
    jobs.push_back({"fuse/" + models::method_name(all_methods()[i]), [&, i] {
      const Method m = all_methods()[i];
      const models::TrainConfig tc = run_train_config(ctx, m, o.seed, 1);
      evals[i] = train_and_evaluate(m, ctx.backbone, tc, ctx.data,
                                    ctx.test_tiles, cam::CamMethod::GradCam,
                                    {}, {});
    }});
  }
  experiments::run_jobs(std::move(jobs), ctx.workers);

  std::vector<std::vector<double>> scores;
  std::vector<double> thresholds;
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < all_methods().size(); ++i) {
    const double t = best_f1_threshold(evals[i], ctx.gt, all_methods()[i]);
    thresholds.push_back(t);
    std::vector<double> s;
    for (const auto& tile : evals[i].tiles) s.push_back(tile.presence_score);
    scores.push_back(std::move(s));
    lines.push_back("# " + models::method_name(all_methods()[i]) +
                    "_threshold: " + tsv::format_number(t));
  }
  lines.push_back("# rule\tf1\tprecision\trecall");
  std::cout << "fuse:";
  for (const experiments::FusionRule rule : rules) {
    const std::vector<bool> fused =
        experiments::fuse_presence(scores, thresholds, rule);
    std::vector<double> fused_scores;
    for (const bool b : fused) fused_scores.push_back(b ? 1.0 : 0.0);
    const metrics::F1Result f1 =
        metrics::presence_f1(fused_scores, ctx.labels, 0.5);
    lines.push_back(tsv::join({experiments::fusion_rule_name(rule),
                               tsv::format_number(f1.f1),
                               tsv::format_number(f1.precision),
                               tsv::format_number(f1.recall)}));
    std::cout << " " << experiments::fusion_rule_name(rule) << " F1 "
              << tsv::format_number(f1.f1);
  }
  const fs::path dir = ctx.root / "fusion";
  fs::create_directories(dir);
  tsv::write_lines(dir / "fusion.tsv", lines);
  write_manifest(dir, argv, ctx.config, {}, {}, started);
  std::cout << " -> " << (dir / "fusion.tsv").string() << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"supervision-level benchmark for object presence detection "
               "and localization on tiled overhead imagery"};
  app.name("supbench");
  app.require_subcommand(1);

  // synth
  CommonOpts synth_opts;
  std::string synth_out = "data/synth";
  int synth_scenes = 0, synth_scene_size = 0;
  double synth_density = 0.0;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a deterministic synthetic tiled dataset");
  add_common(synth, synth_opts, false);
  synth->add_option("--out", synth_out, "output dataset directory");
  synth->add_option("--scenes", synth_scenes, "number of scenes");
  synth->add_option("--scene-size", synth_scene_size, "scene edge in pixels");
  synth->add_option("--density", synth_density, "expected panels per scene");

  // prepare-data
  CommonOpts prep_opts;
  std::string prep_images, prep_annotations, prep_out = "data/real";
  CLI::App* prep = app.add_subcommand(
      "prepare-data", "tile real scenes plus annotations into a dataset");
  add_common(prep, prep_opts, false);
  prep->add_option("--images", prep_images, "scene image directory")
      ->required();
  prep->add_option("--annotations", prep_annotations, "annotation file")
      ->required();
  prep->add_option("--out", prep_out, "output dataset directory");

  // train
  CommonOpts train_opts;
  std::string train_method, train_out;
  CLI::App* train =
      app.add_subcommand("train", "train one method and save its artifact");
  add_common(train, train_opts);
  train->add_option("--method", train_method, "detector, classifier or vae")
      ->required()
      ->check(CLI::IsMember({"detector", "classifier", "vae"}));
  train->add_option("--out", train_out, "artifact output path");

  // predict
  CommonOpts predict_opts;
  std::string predict_method, predict_artifact, predict_split = "test";
  std::string predict_cam = "gradcam";
  int predict_run_id = 1;
  CLI::App* predict = app.add_subcommand(
      "predict", "run a saved artifact over a dataset split");
  add_common(predict, predict_opts);
  predict->add_option("--method", predict_method,
                      "detector, classifier or vae")
      ->required()
      ->check(CLI::IsMember({"detector", "classifier", "vae"}));
  predict->add_option("--artifact", predict_artifact, "model artifact path")
      ->required();
  predict->add_option("--split", predict_split,
                      "train, validation, test or vae_train");
  predict->add_option("--cam", predict_cam, "CAM variant for heatmaps");
  predict->add_option("--run-id", predict_run_id, "run id for the outputs");

  // sweep
  CommonOpts sweep_opts;
  std::string sweep_method, sweep_cam = "gradcam";
  std::vector<std::string> sweep_artifacts;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "train runs and sweep the decision threshold");
  add_common(sweep, sweep_opts);
  sweep->add_option("--method", sweep_method, "detector, classifier or vae")
      ->required()
      ->check(CLI::IsMember({"detector", "classifier", "vae"}));
  sweep->add_option("--cam", sweep_cam, "CAM variant for classifier heatmaps");
  sweep->add_option("--artifact", sweep_artifacts,
                    "pre-trained artifact per run (repeatable)");

  // cam-compare
  CommonOpts cam_opts;
  CLI::App* camc = app.add_subcommand(
      "cam-compare", "compare all CAM variants on the classifier");
  add_common(camc, cam_opts);

  // symmetry
  CommonOpts sym_opts;
  CLI::App* symmetry = app.add_subcommand(
      "symmetry", "cross-tabulate per-tile errors between methods");
  add_common(symmetry, sym_opts);

  // ablate
  CommonOpts ablate_opts;
  std::string ablate_method;
  CLI::App* ablate = app.add_subcommand(
      "ablate", "re-train on nested training-data fractions");
  add_common(ablate, ablate_opts);
  ablate->add_option("--method", ablate_method, "detector, classifier or vae")
      ->required()
      ->check(CLI::IsMember({"detector", "classifier", "vae"}));

  // search
  CommonOpts search_opts;
  std::string search_method;
  int search_budget = 0;
  CLI::App* search = app.add_subcommand(
      "search", "coordinate-wise hyperparameter search");
  add_common(search, search_opts);
  search->add_option("--method", search_method, "detector, classifier or vae")
      ->required()
      ->check(CLI::IsMember({"detector", "classifier", "vae"}));
  search->add_option("--budget", search_budget, "trial budget");

  // time
  CommonOpts time_opts;
  std::string time_method_flag = "all";
  CLI::App* time_cmd = app.add_subcommand(
      "time", "measure training and evaluation wall-clock time");
  add_common(time_cmd, time_opts);
  time_cmd->add_option("--method", time_method_flag,
                       "all, detector, classifier or vae");

  // fuse
  CommonOpts fuse_opts;
  std::string fuse_rule = "all";
  CLI::App* fuse = app.add_subcommand(
      "fuse", "fuse per-method presence decisions");
  add_common(fuse, fuse_opts);
  fuse->add_option("--rule", fuse_rule, "all, or, and or majority");

  // report
  std::string report_dir, report_results;
  CLI::App* report = app.add_subcommand(
      "report", "render report.md and charts from a results directory");
  report->add_option("dir", report_dir, "results directory");
  report->add_option("--results", report_results, "output root override");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(synth)) {
      return cmd_synth(args, synth_opts, synth_out, synth_scenes,
                       synth_scene_size, synth_density);
    }
    if (app.got_subcommand(prep)) {
      return cmd_prepare_data(args, prep_opts, prep_images, prep_annotations,
                              prep_out);
    }
    if (app.got_subcommand(train)) {
      return cmd_train(args, train_opts, train_method, train_out);
    }
    if (app.got_subcommand(predict)) {
      return cmd_predict(args, predict_opts, predict_method, predict_artifact,
                         predict_split, predict_cam, predict_run_id);
    }
    if (app.got_subcommand(sweep)) {
      return cmd_sweep(args, sweep_opts, sweep_method, sweep_cam,
                       sweep_artifacts);
    }
    if (app.got_subcommand(camc)) return cmd_cam_compare(args, cam_opts);
    if (app.got_subcommand(symmetry)) return cmd_symmetry(args, sym_opts);
    if (app.got_subcommand(ablate)) {
      return cmd_ablate(args, ablate_opts, ablate_method);
    }
    if (app.got_subcommand(search)) {
      return cmd_search(args, search_opts, search_method, search_budget);
    }
    if (app.got_subcommand(time_cmd)) {
      return cmd_time(args, time_opts, time_method_flag);
    }
    if (app.got_subcommand(fuse)) return cmd_fuse(args, fuse_opts, fuse_rule);
    if (app.got_subcommand(report)) {
      const fs::path dir = report_dir.empty()
                               ? experiments::results_root(report_results)
                               : fs::path(report_dir);
      emit_report(dir);
      std::cout << "report: " << (dir / "report.md").string() << "\n";
      return 0;
    }
    throw ExecutionError("no subcommand dispatched");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ExecutionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace supbench::cli
