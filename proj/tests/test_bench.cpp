// Benchmark data generation and the experiment driver: synthetic datasets,
// house-sequence pairing, config parsing, and report/plot emission.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "bench/experiment.hpp"
#include "bench/house.hpp"
#include "bench/synthetic.hpp"
#include "core/io.hpp"
#include "core/types.hpp"

using namespace iso;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("isomatch_bench_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

} // namespace

TEST_CASE("synthetic config validation") {
  bench::SyntheticConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.n_shape = 2;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.n_outliers = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.epsilon = -0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.n_images = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.width = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("default silhouette is a fixed simple polyline") {
  const std::vector<Point2> poly = bench::default_silhouette();
  REQUIRE(poly.size() == 200);
  CHECK(poly == bench::default_silhouette());
  for (const Point2& p : poly) {
    CHECK(p.x > 0);
    CHECK(p.x < 512);
    CHECK(p.y > 0);
    CHECK(p.y < 512);
  }
}

TEST_CASE("silhouette files round trip") {
  TempDir dir;
  {
    std::ofstream out(dir.file("poly.txt"));
    out << "0 0\n10 0\n10 10\n0 10\n";
  }
  const std::vector<Point2> poly = bench::load_silhouette(dir.file("poly.txt"));
  REQUIRE(poly.size() == 4);
  CHECK(poly[2].x == 10.0);
  CHECK(poly[2].y == 10.0);
  CHECK_THROWS_AS(bench::load_silhouette(dir.file("missing.txt")), Error);
  {
    std::ofstream out(dir.file("short.txt"));
    out << "0 0\n1 1\n";
  }
  CHECK_THROWS_AS(bench::load_silhouette(dir.file("short.txt")), Error);
}

TEST_CASE("synthetic generation: sizes, order, determinism, perturbation bound") {
  bench::SyntheticConfig cfg;
  cfg.n_shape = 12;
  cfg.n_outliers = 5;
  cfg.epsilon = 6.0;
  cfg.n_images = 4;
  cfg.seed = 99;
  const bench::SyntheticDataset ds = bench::gen_synthetic(cfg);

  REQUIRE(ds.order.size() == 12);
  std::set<std::size_t> order_set(ds.order.begin(), ds.order.end());
  CHECK(order_set.size() == 12);
  CHECK(*order_set.rbegin() == 11);

  for (int s = 0; s < 3; ++s) {
    REQUIRE(ds.splits[s].size() == 4);
    for (const Scene& img : ds.splits[s]) {
      CHECK(img.size() == 17);
      CHECK(img.width == 512.0);
      CHECK(img.height == 512.0);
      for (const Point2& p : img.points) {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= 512.0);
      }
    }
  }

  // same seed reproduces bit for bit; another seed does not
  const bench::SyntheticDataset again = bench::gen_synthetic(cfg);
  CHECK(again.order == ds.order);
  for (int s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(again.splits[s][i].points.size() == ds.splits[s][i].points.size());
      for (std::size_t k = 0; k < ds.splits[s][i].points.size(); ++k) {
        CHECK(again.splits[s][i].points[k].x == ds.splits[s][i].points[k].x);
        CHECK(again.splits[s][i].points[k].y == ds.splits[s][i].points[k].y);
      }
    }
  bench::SyntheticConfig other = cfg;
  other.seed = 100;
  const bench::SyntheticDataset diff = bench::gen_synthetic(other);
  bool any_diff = false;
  for (std::size_t k = 0; k < 17 && !any_diff; ++k)
    any_diff = diff.splits[0][0].points[k].x != ds.splits[0][0].points[k].x;
  CHECK(any_diff);

  // every image perturbs one shared base configuration by at most eps/2
  for (int s = 0; s < 3; ++s)
    for (const Scene& img : ds.splits[s])
      for (std::size_t k = 0; k < 17; ++k) {
        const Point2 a = ds.splits[0][0].points[k];
        const Point2 b = img.points[k];
        CHECK(std::abs(a.x - b.x) <= cfg.epsilon + 1e-9);
        CHECK(std::abs(a.y - b.y) <= cfg.epsilon + 1e-9);
      }
}

TEST_CASE("epsilon zero yields identical images") {
  bench::SyntheticConfig cfg;
  cfg.n_shape = 10;
  cfg.n_outliers = 3;
  cfg.epsilon = 0.0;
  cfg.n_images = 3;
  cfg.seed = 7;
  const bench::SyntheticDataset ds = bench::gen_synthetic(cfg);
  for (int s = 0; s < 3; ++s)
    for (const Scene& img : ds.splits[s])
      for (std::size_t k = 0; k < img.points.size(); ++k) {
        CHECK(img.points[k].x == ds.splits[0][0].points[k].x);
        CHECK(img.points[k].y == ds.splits[0][0].points[k].y);
      }
}

TEST_CASE("split pairs form all ordered combinations with identity ground truth") {
  bench::SyntheticConfig cfg;
  cfg.n_shape = 6;
  cfg.n_outliers = 2;
  cfg.epsilon = 2.0;
  cfg.n_images = 10;
  cfg.seed = 3;
  const bench::SyntheticDataset ds = bench::gen_synthetic(cfg);
  const std::vector<MatchInstance> pairs = bench::split_pairs(ds, 1);
  CHECK(pairs.size() == 45); // C(10, 2)
  for (const MatchInstance& inst : pairs) {
    REQUIRE(inst.ground_truth.has_value());
    REQUIRE(inst.tpl.size() == 6);
    CHECK(inst.target.size() == 8);
    for (std::size_t t = 0; t < 6; ++t) {
      CHECK(inst.tpl.order[t] == ds.order[t]);
      CHECK(inst.ground_truth->map[t] == ds.order[t]);
    }
  }
  CHECK_THROWS_AS(bench::split_pairs(ds, 3), Error);
}

TEST_CASE("house sequence loading and pairing") {
  TempDir dir;
  // four frames of five landmarks, written in non-sorted filename order
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(10.0, 400.0);
  std::vector<std::vector<Point2>> frames(4);
  for (auto& f : frames)
    for (int k = 0; k < 5; ++k) f.push_back({u(rng), u(rng)});
  const char* names[] = {"frame03.txt", "frame01.txt", "frame04.txt", "frame02.txt"};
  const int order[] = {1, 3, 0, 2}; // sorted filenames map back to these frames
  for (int i = 0; i < 4; ++i) {
    std::ofstream out(dir.file(names[i]));
    for (const Point2& p : frames[i]) out << p.x << " " << p.y << "\n";
  }

  const std::vector<Scene> loaded = bench::load_house_dir(dir.path.string(), 512.0, 480.0);
  REQUIRE(loaded.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(loaded[i].size() == 5);
    CHECK(loaded[i].width == 512.0);
    CHECK(loaded[i].height == 480.0);
    CHECK(loaded[i].points[0].x == doctest::Approx(frames[order[i]][0].x));
  }
  CHECK_THROWS_AS(bench::load_house_dir(dir.file("nodir"), 512, 480), Error);

  std::vector<MatchInstance> pairs = bench::house_pairs(loaded, 2);
  CHECK(pairs.size() == 2); // (0,2), (1,3)
  for (const MatchInstance& inst : pairs) {
    REQUIRE(inst.ground_truth.has_value());
    CHECK(inst.tpl.size() == 5);
    CHECK(inst.tpl.scene.has_descriptors());
    CHECK(inst.target.has_descriptors());
    for (std::size_t t = 0; t < 5; ++t)
      CHECK(inst.ground_truth->map[t] == inst.tpl.order[t]);
  }
  CHECK(bench::house_pairs(loaded, 0).size() == 4);
  CHECK_THROWS_AS(bench::house_pairs(loaded, 4), Error);
  CHECK_THROWS_AS(bench::house_pairs(loaded, -1), Error);

  // mixed landmark counts are rejected
  std::vector<Scene> bad = loaded;
  bad[2].points.pop_back();
  CHECK_THROWS_AS(bench::house_pairs(bad, 1), Error);
}

TEST_CASE("thirds split covers the pair list in order") {
  std::vector<Scene> frames(10);
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(10.0, 400.0);
  for (Scene& f : frames) {
    f.width = 512;
    f.height = 480;
    for (int k = 0; k < 4; ++k) f.points.push_back({u(rng), u(rng)});
  }
  std::vector<MatchInstance> pairs = bench::house_pairs(frames, 1); // 9 pairs
  const auto splits = bench::split_thirds(pairs);
  CHECK(splits[0].size() + splits[1].size() + splits[2].size() == 9);
  CHECK(splits[0].size() == 3);
  CHECK(splits[2].size() == 3);
  CHECK_THROWS_AS(bench::split_thirds({}), Error);
}

TEST_CASE("experiment config parsing and validation") {
  TempDir dir;
  {
    std::ofstream out(dir.file("exp.json"));
    out << R"({
      "kind": "synthetic",
      "methods": ["linear_unlearned", "higher_order_learned"],
      "seeds": [4, 5],
      "p": 6,
      "loss": "endpoint",
      "inject_gt": true,
      "features": {"adjacency": false},
      "stage1": {"lambda": 0.01, "epochs": 3},
      "stage2": {"lambda_grid": [0.1, 1.0], "epochs": 2},
      "synthetic": {"n_shape": 9, "n_images": 3, "epsilons": [0, 2], "outliers": [1]}
    })";
  }
  const bench::ExperimentConfig cfg = bench::load_experiment_config(dir.file("exp.json"));
  CHECK(cfg.kind == "synthetic");
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[1] == "higher_order_learned");
  CHECK(cfg.seeds == std::vector<unsigned>{4, 5});
  CHECK(cfg.train.p == 6);
  CHECK(cfg.train.loss == LossKind::endpoint);
  CHECK(cfg.train.inject_gt);
  CHECK(!cfg.train.features.adjacency);
  CHECK(cfg.train.features.unary);
  CHECK(cfg.train.stage1.lambda == 0.01);
  CHECK(cfg.train.stage1.epochs == 3);
  CHECK(cfg.train.stage2.lambda_grid == std::vector<double>{0.1, 1.0});
  CHECK(cfg.synthetic.n_shape == 9);
  CHECK(cfg.synthetic.n_images == 3);
  CHECK(cfg.epsilons == std::vector<double>{0.0, 2.0});
  CHECK(cfg.outlier_counts == std::vector<int>{1});
  CHECK_NOTHROW(cfg.validate());

  bench::ExperimentConfig bad = cfg;
  bad.kind = "zoo";
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.methods = {"linear_unlearned", "linear_unlearned"};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.methods = {"svm"};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.seeds.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.epsilons.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.kind = "house";
  CHECK_THROWS_AS(bad.validate(), Error); // no house_dir

  CHECK_THROWS_AS(bench::load_experiment_config(dir.file("missing.json")), Error);
  {
    std::ofstream out(dir.file("broken.json"));
    out << "{ not json";
  }
  CHECK_THROWS_AS(bench::load_experiment_config(dir.file("broken.json")), Error);
}

TEST_CASE("condition splits produce descriptor-ready instances") {
  bench::ExperimentConfig cfg;
  cfg.kind = "synthetic";
  cfg.synthetic.n_shape = 7;
  cfg.synthetic.n_images = 3;
  cfg.epsilons = {2.0};
  cfg.outlier_counts = {2};
  const auto splits = bench::condition_splits(cfg, 2.0, 2, 17);
  for (int s = 0; s < 3; ++s) {
    CHECK(splits[s].size() == 3); // C(3, 2)
    for (const MatchInstance& inst : splits[s]) {
      CHECK(inst.tpl.scene.has_descriptors());
      CHECK(inst.target.has_descriptors());
      CHECK(inst.target.size() == 9);
    }
  }
}

TEST_CASE("experiment driver writes reports and plot data") {
  bench::ExperimentConfig cfg;
  cfg.kind = "synthetic";
  cfg.methods = {"linear_unlearned", "higher_order_unlearned"};
  cfg.seeds = {2};
  cfg.synthetic.n_shape = 6;
  cfg.synthetic.n_images = 3;
  cfg.epsilons = {0.0, 2.0};
  cfg.outlier_counts = {1};
  cfg.train.p = 4;
  cfg.train.features.adjacency = false;

  const bench::ExperimentReport rep = bench::run_experiment(cfg);
  CHECK(rep.kind == "synthetic");
  REQUIRE(rep.rows.size() == 4); // 2 methods x 2 conditions
  for (const bench::ReportRow& row : rep.rows) {
    CHECK(row.pairs == 3);
    CHECK(row.p == 4);
    CHECK(row.mean >= 0.0);
    CHECK(row.std_error >= 0.0);
    CHECK(row.ms >= 0.0);
    CHECK(row.condition.find("eps=") != std::string::npos);
  }
  // unperturbed matching is solved exactly by the unlearned geometric model
  for (const bench::ReportRow& row : rep.rows)
    if (row.value == 0.0 && row.method == "higher_order_unlearned") CHECK(row.mean == 0.0);

  // deterministic given the config
  const bench::ExperimentReport rep2 = bench::run_experiment(cfg);
  REQUIRE(rep2.rows.size() == rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(rep2.rows[i].method == rep.rows[i].method);
    CHECK(rep2.rows[i].mean == rep.rows[i].mean);
  }

  TempDir dir;
  bench::write_report_csv(rep, dir.file("report.csv"));
  const std::vector<std::string> lines = read_lines(dir.file("report.csv"));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "method,condition,mean,stderr,ms,pairs");

  bench::emit_plot_data(rep, dir.path.string());
  CHECK(fs::exists(dir.path / "loss_vs_epsilon.csv"));
  CHECK(fs::exists(dir.path / "runtime_vs_method.csv"));
  const std::vector<std::string> plot = read_lines((dir.path / "loss_vs_epsilon.csv").string());
  REQUIRE(plot.size() >= 3);
  CHECK(plot[0][0] == '#');
  CHECK(plot[1].find("epsilon") != std::string::npos);

  // empty method list -> header-only report, plot emission refuses
  bench::ExperimentConfig empty = cfg;
  empty.methods.clear();
  const bench::ExperimentReport none = bench::run_experiment(empty);
  CHECK(none.rows.empty());
  bench::write_report_csv(none, dir.file("empty.csv"));
  CHECK(read_lines(dir.file("empty.csv")).size() == 1);
  CHECK_THROWS_AS(bench::emit_plot_data(none, dir.path.string()), Error);
}
