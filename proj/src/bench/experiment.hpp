#pragma once
// Experiment driver: trains and evaluates the linear and higher-order
// matchers (before and after learning) over synthetic perturbation
// conditions or fixed-baseline frame pairs, and aggregates per-pair losses
// into plot-ready CSV files.

#include <string>
#include <utility>
#include <vector>

#include "bench/synthetic.hpp"
#include "core/model.hpp"
#include "learn/train.hpp"

namespace iso::bench {

// Method names accepted in configs: linear_unlearned, linear_learned,
// higher_order_unlearned, higher_order_learned.  "Unlearned" means uniform
// descriptor weights and all-equal group weights with unit scale factors.
struct ExperimentConfig {
  std::string kind; // "synthetic" | "house"
  std::vector<std::string> methods;
  std::vector<unsigned> seeds{1};
  learn::TrainConfig train;

  SyntheticConfig synthetic;        // epsilon/outliers overridden per condition
  std::vector<double> epsilons{0.0};
  std::vector<int> outlier_counts{0};
  std::string silhouette_path;

  std::string house_dir;
  std::vector<int> baselines;
  double house_width = 512.0, house_height = 480.0;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

// Train/val/test instance sets for one condition, with descriptors ready:
// the synthetic kind reads value as epsilon and generates from seed; the
// house kind reads value as the baseline (outliers ignored, data fixed
// across seeds).
std::array<std::vector<MatchInstance>, 3> condition_splits(const ExperimentConfig& cfg,
                                                           double value, int outliers,
                                                           unsigned seed);

struct ReportRow {
  std::string method;
  std::string condition; // "eps=E,outliers=O" or "baseline=B"
  double value = 0.0;    // epsilon or baseline
  int outliers = 0;
  int p = 0;
  double mean = 0.0;
  double std_error = 0.0; // sample std / sqrt(pairs)
  double ms = 0.0;        // mean per-pair prediction time
  std::size_t pairs = 0;
};

struct ExperimentReport {
  std::string kind;
  std::vector<ReportRow> rows;
  std::vector<std::pair<int, double>> bp_timing_ms; // (forced sweeps, ms), 1..20
};

// Per condition and seed: generate/ingest data, train the learned methods on
// the train/validation splits, evaluate every requested method on the test
// pairs.  Empty method list -> empty report.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Columns: method,condition,mean,stderr,ms,pairs.
void write_report_csv(const ExperimentReport& report, const std::string& path);

// loss_vs_epsilon.csv or loss_vs_baseline.csv, runtime_vs_method.csv, and
// bp_iterations.csv (when recorded) inside dir; errors on an empty report.
void emit_plot_data(const ExperimentReport& report, const std::string& dir);

} // namespace iso::bench
