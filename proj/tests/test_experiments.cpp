#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <vector>

#include "supbench/core/errors.hpp"
#include "supbench/experiments/ablation.hpp"
#include "supbench/experiments/fusion.hpp"
#include "supbench/experiments/runner.hpp"
#include "supbench/experiments/search.hpp"
#include "supbench/experiments/sweep.hpp"
#include "supbench/experiments/symmetry.hpp"
#include "supbench/experiments/timing.hpp"

using namespace supbench;
using experiments::EvalTile;
using experiments::RunEval;
using experiments::SweepSpec;
using experiments::TileEval;

namespace {

EvalTile make_gt(const std::string& id, bool label) {
  EvalTile t;
  t.tile_id = id;
  t.label = label;
  t.gt_poly = localization::make_mask(16, 16, id);
  t.gt_box = localization::make_mask(16, 16, id);
  return t;
}

void fill_rect(localization::BinaryMask& m, int x0, int y0, int x1, int y1) {
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      m.values[static_cast<std::size_t>(y) * m.width + x] = 1;
    }
  }
}

cam::Heatmap flat_heatmap(const std::string& id, double value) {
  cam::Heatmap hm;
  hm.width = 16;
  hm.height = 16;
  hm.values.assign(256, value);
  hm.tile_id = id;
  return hm;
}

TileEval make_pred(const std::string& id, double score) {
  TileEval t;
  t.tile_id = id;
  t.presence_score = score;
  t.heatmap = flat_heatmap(id, 0.0);
  return t;
}

// Two positives with disjoint unit gt squares, two negatives.
struct Fixture {
  std::vector<EvalTile> gt;
  RunEval run;
};

Fixture classifier_fixture() {
  Fixture f;
  f.gt.push_back(make_gt("p0", true));
  fill_rect(f.gt.back().gt_poly, 2, 2, 4, 4);
  fill_rect(f.gt.back().gt_box, 2, 2, 4, 4);
  f.gt.push_back(make_gt("p1", true));
  fill_rect(f.gt.back().gt_poly, 8, 8, 10, 10);
  fill_rect(f.gt.back().gt_box, 8, 8, 10, 10);
  f.gt.push_back(make_gt("n0", false));
  f.gt.push_back(make_gt("n1", false));

  // p0's heatmap overlaps half of its gt; p1's matches exactly.
  TileEval p0 = make_pred("p0", 0.9);
  p0.heatmap.values.assign(256, 0.0);
  for (int y = 2; y < 4; ++y) {
    for (int x = 3; x < 5; ++x) p0.heatmap.values[y * 16 + x] = 1.0;
  }
  TileEval p1 = make_pred("p1", 0.8);
  p1.heatmap.values.assign(256, 0.0);
  for (int y = 8; y < 10; ++y) {
    for (int x = 8; x < 10; ++x) p1.heatmap.values[y * 16 + x] = 1.0;
  }
  f.run.tiles = {p0, p1, make_pred("n0", 0.3), make_pred("n1", 0.1)};
  return f;
}

}  // namespace

TEST_CASE("default thresholds per method") {
  const auto det = experiments::default_thresholds(models::Method::Detector);
  CHECK(det.front() == 0.0);
  CHECK(det.back() == 0.999);
  CHECK(std::find(det.begin(), det.end(), 0.35) != det.end());
  CHECK(std::is_sorted(det.begin(), det.end()));

  const auto cls = experiments::default_thresholds(models::Method::Classifier);
  CHECK(std::find(cls.begin(), cls.end(), 0.05) != cls.end());
  CHECK(std::find(cls.begin(), cls.end(), 0.95) != cls.end());
  CHECK(cls.back() == 0.999);
  CHECK(std::is_sorted(cls.begin(), cls.end()));

  CHECK(experiments::default_thresholds(models::Method::Vae) == det);
}

TEST_CASE("evaluate_run: hand-computed F1 and overlap values") {
  const Fixture f = classifier_fixture();
  const auto row = experiments::evaluate_run(f.run, f.gt,
                                             models::Method::Classifier, 0.5,
                                             0.5);
  // Scores {.9,.8,.3,.1}, labels {1,1,0,0}, t=.5: TP=2 FP=0 FN=0.
  CHECK(row.f1 == 1.0);
  CHECK(row.precision == 1.0);
  CHECK(row.recall == 1.0);
  CHECK(row.n_evaluated == 2);
  // p0: |P|=4 |G|=4 |P&G|=2 -> dice .5; p1: exact match -> dice 1.
  REQUIRE(row.dice_poly.has_value());
  CHECK(*row.dice_poly == doctest::Approx(0.75).epsilon(1e-12));
  REQUIRE(row.iou_poly.has_value());
  CHECK(*row.iou_poly == doctest::Approx((1.0 / 3.0 + 1.0) / 2).epsilon(1e-12));
  REQUIRE(row.no_overlap_rate.has_value());
  CHECK(*row.no_overlap_rate == 0.0);
}

TEST_CASE("evaluate_run: detector path uses detections, not heatmaps") {
  std::vector<EvalTile> gt;
  gt.push_back(make_gt("p0", true));
  fill_rect(gt.back().gt_poly, 2, 2, 4, 4);
  fill_rect(gt.back().gt_box, 2, 2, 4, 4);

  RunEval run;
  TileEval t;
  t.tile_id = "p0";
  t.presence_score = 0.9;
  t.detections.push_back({{2.0, 2.0, 4.0, 4.0}, 0.9});
  run.tiles.push_back(t);

  const auto row = experiments::evaluate_run(run, gt, models::Method::Detector,
                                             0.5, 0.5);
  REQUIRE(row.dice_poly.has_value());
  CHECK(*row.dice_poly == 1.0);

  // Raising only the localization cut drops the box -> empty mask, dice 0.
  const auto strict = experiments::evaluate_run(
      run, gt, models::Method::Detector, 0.5, 0.95);
  REQUIRE(strict.dice_poly.has_value());
  CHECK(*strict.dice_poly == 0.0);
  CHECK(*strict.no_overlap_rate == 1.0);
}

TEST_CASE("no_overlap_rate non-decreasing in localization threshold for a "
          "fixed gate") {
  const Fixture f = classifier_fixture();
  double prev = -1.0;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9, 0.999}) {
    const auto row = experiments::evaluate_run(
        f.run, f.gt, models::Method::Classifier, 0.0, t);
    REQUIRE(row.no_overlap_rate.has_value());
    CHECK(*row.no_overlap_rate >= prev);
    prev = *row.no_overlap_rate;
  }
}

TEST_CASE("threshold_sweep: aggregation, degenerate rows, best flags") {
  const Fixture f = classifier_fixture();
  SweepSpec spec;
  spec.method = models::Method::Classifier;
  spec.thresholds = {0.0, 0.5, 0.85, 0.999};
  const std::vector<RunEval> runs = {f.run, f.run, f.run};
  const auto result = experiments::threshold_sweep(spec, runs, f.gt);

  REQUIRE(result.rows.size() == 4);
  REQUIRE(result.per_run.size() == 3);

  // Identical runs: zero std everywhere, suppressed.
  for (const auto& row : result.rows) {
    CHECK(row.f1.std == 0.0);
    CHECK(row.f1.suppressed);
  }

  // t=0: every tile predicted positive -> precision 2/4, recall 1.
  CHECK(result.rows[0].precision.mean == 0.5);
  CHECK(result.rows[0].recall.mean == 1.0);
  // t=0.5 separates the classes perfectly.
  CHECK(result.rows[1].f1.mean == 1.0);
  // t=0.85 keeps only p0 -> recall 0.5.
  CHECK(result.rows[2].recall.mean == 0.5);
  // No score reaches 0.999 -> all-negative predictions, F1 = 0, empty gate.
  CHECK(result.rows[3].f1.mean == 0.0);
  CHECK_FALSE(result.rows[3].dice_poly.has_value());
  CHECK(result.rows[3].n_evaluated_total == 0);

  CHECK(result.best_f1_index == 1);
  REQUIRE(result.best_dice_index.has_value());
  // dice at t=0: all-true masks; p0 dice 2*4/(256+4), p1 2*4/(256+4);
  // at t=0.5 dice mean 0.75; at 0.85 only p0 -> 0.5. Best is t=0.5.
  CHECK(*result.best_dice_index == 1);

  // n_evaluated is non-increasing in threshold (gate shrinks).
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    CHECK(result.rows[i].n_evaluated_total <=
          result.rows[i - 1].n_evaluated_total);
  }
}

TEST_CASE("threshold_sweep validation: runs, ordering, range") {
  const Fixture f = classifier_fixture();
  SweepSpec spec;
  spec.method = models::Method::Classifier;
  spec.thresholds = {0.0, 0.5};

  CHECK_THROWS_AS(
      experiments::threshold_sweep(spec, {f.run, f.run}, f.gt),
      ValidationError);  // missing run

  SweepSpec unsorted = spec;
  unsorted.thresholds = {0.5, 0.4};
  CHECK_THROWS_AS(
      experiments::threshold_sweep(unsorted, {f.run, f.run, f.run}, f.gt),
      ValidationError);

  SweepSpec out_of_range = spec;
  out_of_range.thresholds = {0.0, 1.5};
  CHECK_THROWS_AS(
      experiments::threshold_sweep(out_of_range, {f.run, f.run, f.run}, f.gt),
      ValidationError);

  RunEval shuffled = f.run;
  std::swap(shuffled.tiles[0], shuffled.tiles[1]);
  CHECK_THROWS_AS(
      experiments::threshold_sweep(spec, {f.run, f.run, shuffled}, f.gt),
      ValidationError);
}

TEST_CASE("aggregate_metric_rows: sigma arithmetic and optional columns") {
  metrics::MetricsRow a, b, c;
  a.f1 = 0.5;
  b.f1 = 0.6;
  c.f1 = 0.7;
  a.dice_poly = 0.2;
  b.dice_poly = 0.2;
  c.dice_poly = std::nullopt;  // one run without an evaluable gate
  a.n_evaluated = 2;
  b.n_evaluated = 2;
  c.n_evaluated = 0;
  const auto agg = experiments::aggregate_metric_rows(0.5, {a, b, c});
  CHECK(agg.f1.mean == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(agg.f1.std == doctest::Approx(0.1).epsilon(1e-9));
  CHECK_FALSE(agg.f1.suppressed);
  CHECK_FALSE(agg.dice_poly.has_value());
  CHECK(agg.n_evaluated_total == 4);

  metrics::MetricsRow d = c;
  d.dice_poly = 0.8;
  const auto agg2 = experiments::aggregate_metric_rows(0.5, {a, b, d});
  REQUIRE(agg2.dice_poly.has_value());
  CHECK(agg2.dice_poly->mean == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("cam comparison: identical heatmaps give identical rows") {
  const Fixture f = classifier_fixture();
  SweepSpec spec;
  spec.method = models::Method::Classifier;
  spec.thresholds = {0.0, 0.5, 0.999};
  const std::vector<RunEval> runs = {f.run, f.run, f.run};
  const auto rows = experiments::cam_comparison(
      spec, {{"gradcam", runs}, {"hirescam", runs}}, f.gt);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].cam_method == "gradcam");
  CHECK(rows[1].cam_method == "hirescam");
  CHECK(rows[0].threshold == rows[1].threshold);
  REQUIRE(rows[0].row.dice_poly.has_value());
  REQUIRE(rows[1].row.dice_poly.has_value());
  CHECK(rows[0].row.dice_poly->mean == rows[1].row.dice_poly->mean);

  CHECK_THROWS_AS(experiments::cam_comparison(spec, {}, f.gt),
                  ValidationError);
}

TEST_CASE("metrics.tsv per-run round trip") {
  const Fixture f = classifier_fixture();
  std::vector<metrics::MetricsRow> rows;
  for (double t : {0.0, 0.5, 0.999}) {
    rows.push_back(experiments::evaluate_run(
        f.run, f.gt, models::Method::Classifier, t, t));
  }
  const auto dir =
      std::filesystem::temp_directory_path() / "supbench-experiments-test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "metrics.tsv";
  experiments::write_metrics_run(path, rows);
  const auto back = experiments::read_metrics_run(path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].threshold == doctest::Approx(rows[i].threshold));
    CHECK(back[i].f1 == doctest::Approx(rows[i].f1));
    CHECK(back[i].dice_poly.has_value() == rows[i].dice_poly.has_value());
    CHECK(back[i].n_evaluated == rows[i].n_evaluated);
  }
}

// --- symmetry ------------------------------------------------------------------

TEST_CASE("symmetry matrix: enumerated example and totals identity") {
  const std::vector<std::string> names = {"A", "B"};
  const std::vector<std::vector<bool>> preds = {
      {true, false, true}, {true, true, true}};
  const std::vector<bool> labels = {true, true, false};
  const auto m = experiments::symmetry_matrix(names, preds, labels);

  CHECK(m.counts[0][1] == 1);  // A wrong, B right (tile 2)
  CHECK(m.counts[1][0] == 0);
  CHECK(m.counts[0][0] == 0);
  CHECK(m.counts[1][1] == 0);
  CHECK(m.right_totals[0] == 1);
  CHECK(m.wrong_totals[0] == 2);
  CHECK(m.right_totals[1] == 2);
  CHECK(m.wrong_totals[1] == 1);
  // right + wrong identical across methods (same evaluated set).
  CHECK(m.right_totals[0] + m.wrong_totals[0] ==
        m.right_totals[1] + m.wrong_totals[1]);

  // Pairwise identity: counts[A][B] + counts[B][A] + both_right + both_wrong
  // = total. both_right = 1 (tile 1), both_wrong = 1 (tile 3).
  CHECK(m.counts[0][1] + m.counts[1][0] + 1 + 1 == 3);
}

TEST_CASE("symmetry matrix: identical predictions and validation") {
  const std::vector<std::vector<bool>> same = {
      {true, false}, {true, false}, {true, false}};
  const auto m = experiments::symmetry_matrix({"a", "b", "c"}, same,
                                              {true, true});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(m.counts[i][j] == 0);
  }

  CHECK_THROWS_AS(
      experiments::symmetry_matrix({"a", "b"}, {{true}, {true, false}},
                                   {true}),
      ValidationError);
  CHECK_THROWS_AS(experiments::symmetry_matrix({}, {}, {true}),
                  ValidationError);
}

// --- ablation ------------------------------------------------------------------

TEST_CASE("ablation schedule and fixed thresholds") {
  const auto fractions = experiments::ablation_fractions();
  const std::vector<double> expected = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5,
                                        0.6,  0.7,  0.8, 0.9, 1.0};
  REQUIRE(fractions.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(fractions[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }

  const auto det = experiments::ablation_thresholds(models::Method::Detector);
  CHECK(det.detect == 0.35);
  CHECK(det.localize == 0.35);
  const auto cls =
      experiments::ablation_thresholds(models::Method::Classifier);
  CHECK(cls.detect == 0.95);
  CHECK(cls.localize == 0.7);
  const auto vae = experiments::ablation_thresholds(models::Method::Vae);
  CHECK(vae.detect == 0.6);
  CHECK(vae.localize == 0.6);
}

TEST_CASE("ablation point evaluation and round trip") {
  const Fixture f = classifier_fixture();
  const std::vector<RunEval> runs = {f.run, f.run, f.run};
  const auto point = experiments::evaluate_ablation_point(
      models::Method::Classifier, 0.4, runs, f.gt);
  CHECK(point.fraction == 0.4);
  // detect t=.95: only p0 (score .9)? No: .9 < .95 -> all negative, F1 0.
  CHECK(point.row.f1.mean == 0.0);

  CHECK_THROWS_AS(experiments::evaluate_ablation_point(
                      models::Method::Classifier, 0.0, runs, f.gt),
                  ValidationError);
  CHECK_THROWS_AS(experiments::evaluate_ablation_point(
                      models::Method::Classifier, 1.5, runs, f.gt),
                  ValidationError);

  const auto dir =
      std::filesystem::temp_directory_path() / "supbench-experiments-test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "ablation.tsv";
  std::vector<experiments::AblationPoint> points = {point};
  experiments::write_ablation(path, points);
  const auto back = experiments::read_ablation(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].fraction == doctest::Approx(0.4));
  CHECK(back[0].row.f1.mean == doctest::Approx(point.row.f1.mean));
}

// --- hyperparameter search --------------------------------------------------------

TEST_CASE("table search space contents") {
  const auto det = experiments::table_search_space(models::Method::Detector);
  CHECK(det.epochs == std::vector<int>{1, 3, 5, 8, 10, 20});
  CHECK(det.batch_sizes.size() == 24);
  CHECK(det.batch_sizes.front() == 1);
  CHECK(det.batch_sizes.back() == 24);
  CHECK(det.optimizers.size() == 5);
  CHECK(det.learning_rates.size() == 10);
  CHECK(det.learning_rates.front() == 0.1);
  CHECK(det.learning_rates.back() == 0.000001);
  CHECK(det.positive_class_weights ==
        std::vector<double>{1, 5, 10, 20, 30, 50, 100});
  CHECK(det.reconstruction_weights.empty());
  CHECK(det.latent_dims.empty());

  const auto vae = experiments::table_search_space(models::Method::Vae);
  CHECK(vae.positive_class_weights.empty());
  CHECK(vae.reconstruction_weights.size() == 11);
  CHECK(vae.latent_dims ==
        std::vector<int>{32, 64, 128, 256, 512, 1024, 2048, 4096, 8192,
                         16384});
}

TEST_CASE("hyperparam search: budget control and selection") {
  const auto space = experiments::table_search_space(models::Method::Detector);

  CHECK_THROWS_AS(experiments::hyperparam_search(
                      models::Method::Detector, space, 0,
                      [](const models::TrainConfig&) { return 0.5; }),
                  ValidationError);

  // budget 1: the default config, evaluated once.
  const auto single = experiments::hyperparam_search(
      models::Method::Detector, space, 1,
      [](const models::TrainConfig&) { return 0.5; });
  CHECK(single.trials.size() == 1);
  CHECK(single.best.epochs == 10);
  CHECK(single.best.batch_size == 8);
  CHECK(single.best_score == 0.5);

  // Constant scores everywhere: ties keep the earlier config (the default).
  const auto flat = experiments::hyperparam_search(
      models::Method::Detector, space, 20,
      [](const models::TrainConfig&) { return 0.5; });
  CHECK(flat.trials.size() == 20);
  CHECK(flat.best.epochs == 10);
  CHECK(flat.best.batch_size == 8);

  // A single preferred coordinate value wins and seeds later coordinates.
  const auto steered = experiments::hyperparam_search(
      models::Method::Detector, space, 10,
      [](const models::TrainConfig& c) {
        return c.epochs == 3 ? 1.0 : 0.25;
      });
  CHECK(steered.best.epochs == 3);
  CHECK(steered.best_score == 1.0);
  // Trials after the epochs coordinate carry the adopted value.
  CHECK(steered.trials.back().config.epochs == 3);

  // The enumeration never leaves the published space.
  for (const auto& t : flat.trials) {
    CHECK(std::find(space.batch_sizes.begin(), space.batch_sizes.end(),
                    t.config.batch_size) != space.batch_sizes.end());
    CHECK(std::find(space.epochs.begin(), space.epochs.end(),
                    t.config.epochs) != space.epochs.end());
  }
}

// --- fusion --------------------------------------------------------------------

TEST_CASE("fusion rules") {
  const std::vector<std::vector<double>> scores = {
      {0.9, 0.9, 0.1, 0.9},   // method 1
      {0.8, 0.2, 0.2, 0.8},   // method 2
      {0.7, 0.9, 0.05, 0.1}}; // method 3
  const std::vector<double> thresholds = {0.5, 0.5, 0.5};
  // votes per tile: {3, 2, 0, 2}

  const auto orr = experiments::fuse_presence(scores, thresholds,
                                              experiments::FusionRule::Or);
  CHECK(orr == std::vector<bool>{true, true, false, true});
  const auto andd = experiments::fuse_presence(scores, thresholds,
                                               experiments::FusionRule::And);
  CHECK(andd == std::vector<bool>{true, false, false, false});
  const auto maj = experiments::fuse_presence(
      scores, thresholds, experiments::FusionRule::Majority);
  CHECK(maj == std::vector<bool>{true, true, false, true});

  // Single-method OR degenerates to that method's thresholded predictions.
  const auto solo = experiments::fuse_presence({scores[0]}, {0.5},
                                               experiments::FusionRule::Or);
  CHECK(solo == std::vector<bool>{true, true, false, true});

  CHECK_THROWS_AS(
      experiments::fuse_presence(scores, {0.5}, experiments::FusionRule::Or),
      ValidationError);
  CHECK_THROWS_AS(experiments::fuse_presence(
                      {{0.5}, {0.5, 0.6}}, {0.5, 0.5},
                      experiments::FusionRule::Or),
                  ValidationError);

  for (const char* name : {"or", "and", "majority"}) {
    CHECK(experiments::fusion_rule_name(
              experiments::fusion_rule_from_name(name)) == name);
  }
  CHECK_THROWS_AS(experiments::fusion_rule_from_name("xor"), ValidationError);
}

// --- timing --------------------------------------------------------------------

TEST_CASE("timing harness arithmetic") {
  int trained = 0, evaluated = 0;
  const auto result = experiments::time_method(
      "classifier", 4, 100, [&] { ++trained; }, [&] { ++evaluated; });
  CHECK(trained == 1);
  CHECK(evaluated == 1);
  CHECK(result.method == "classifier");
  CHECK(result.epochs == 4);
  CHECK(result.n_eval_tiles == 100);
  CHECK(result.train_seconds >= 0.0);
  CHECK(result.eval_seconds >= 0.0);
  CHECK(result.train_seconds_per_epoch == result.train_seconds / 4);
  CHECK_FALSE(result.hardware.empty());

  CHECK_THROWS_AS(
      experiments::time_method("x", 0, 0, [] {}, [] {}),
      ValidationError);
}

// --- runner --------------------------------------------------------------------

TEST_CASE("results root resolution order") {
  unsetenv("SUPBENCH_RESULTS_DIR");
  CHECK(experiments::results_root() == std::filesystem::path("results"));
  CHECK(experiments::results_root("custom") == std::filesystem::path("custom"));
  setenv("SUPBENCH_RESULTS_DIR", "/tmp/supbench-env-results", 1);
  CHECK(experiments::results_root() ==
        std::filesystem::path("/tmp/supbench-env-results"));
  CHECK(experiments::results_root("explicit") ==
        std::filesystem::path("explicit"));
  unsetenv("SUPBENCH_RESULTS_DIR");
}

TEST_CASE("run_dir creates the nested layout") {
  const auto root =
      std::filesystem::temp_directory_path() / "supbench-runner-test";
  std::filesystem::remove_all(root);
  const auto dir = experiments::run_dir(root, "sweep", "detector", 2);
  CHECK(dir == root / "sweep" / "detector" / "run2");
  CHECK(std::filesystem::is_directory(dir));
}

TEST_CASE("run_jobs executes everything and reports the earliest failure") {
  std::vector<int> hits(8, 0);
  std::vector<experiments::Job> jobs;
  for (int i = 0; i < 8; ++i) {
    jobs.push_back({"job" + std::to_string(i), [&hits, i] { hits[i] = 1; }});
  }
  experiments::run_jobs(jobs, 3);
  for (int h : hits) CHECK(h == 1);

  std::vector<experiments::Job> failing;
  failing.push_back({"ok", [] {}});
  failing.push_back({"bad1", [] { throw ExecutionError("first failure"); }});
  failing.push_back({"ok2", [] {}});
  failing.push_back({"bad2", [] { throw ExecutionError("second failure"); }});
  bool caught = false;
  try {
    experiments::run_jobs(failing, 2);
  } catch (const ExecutionError& e) {
    caught = true;
    CHECK(std::string(e.what()) == "first failure");
  }
  CHECK(caught);

  CHECK_THROWS_AS(experiments::run_jobs({}, 0), ValidationError);
}
