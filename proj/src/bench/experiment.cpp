#include "bench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "bench/house.hpp"
#include "features/shape_context.hpp"
#include "infer/predict.hpp"
#include "learn/loss.hpp"

namespace iso::bench {

namespace {

const std::vector<std::string> kMethods = {"linear_unlearned", "linear_learned",
                                           "higher_order_unlearned", "higher_order_learned"};

bool wants(const ExperimentConfig& cfg, const std::string& m) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Sample {
  std::vector<double> losses;
  std::vector<double> times_ms;
};

double eval_loss(LossKind kind, const Assignment& y, const MatchInstance& inst) {
  return kind == LossKind::hamming ? learn::hamming_loss(y, *inst.ground_truth)
                                   : learn::endpoint_loss(y, *inst.ground_truth, inst.target);
}

} // namespace

void ExperimentConfig::validate() const {
  if (kind != "synthetic" && kind != "house")
    fail(ErrorCode::invalid, "kind must be 'synthetic' or 'house'");
  for (const std::string& m : methods)
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
      fail(ErrorCode::invalid, "unknown method '" + m + "'");
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j]) fail(ErrorCode::invalid, "duplicate method '" + methods[i] + "'");
  if (seeds.empty()) fail(ErrorCode::invalid, "at least one seed required");
  train.validate();
  if (kind == "synthetic") {
    synthetic.validate();
    if (epsilons.empty() || outlier_counts.empty())
      fail(ErrorCode::invalid, "synthetic experiments need epsilon and outlier lists");
    for (double e : epsilons)
      if (!(e >= 0) || !std::isfinite(e)) fail(ErrorCode::invalid, "epsilon must be >= 0");
    for (int o : outlier_counts)
      if (o < 0) fail(ErrorCode::invalid, "outlier counts must be >= 0");
  } else {
    if (house_dir.empty()) fail(ErrorCode::invalid, "house experiments need a data directory");
    if (baselines.empty()) fail(ErrorCode::invalid, "house experiments need a baseline list");
    if (!(house_width > 0) || !(house_height > 0))
      fail(ErrorCode::invalid, "house image extents must be positive");
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, path + ": " + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.kind = j.value("kind", std::string());
    cfg.methods = j.value("methods", std::vector<std::string>{});
    cfg.seeds = j.value("seeds", std::vector<unsigned>{1});

    learn::TrainConfig& t = cfg.train;
    t.loss = parse_loss_kind(j.value("loss", std::string("hamming")));
    t.p = j.value("p", t.p);
    t.inject_gt = j.value("inject_gt", t.inject_gt);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.loopy_iters = j.value("loopy_iters", t.loopy_iters);
    t.loopy_tol = j.value("loopy_tol", t.loopy_tol);
    t.degenerate_penalty = j.value("degenerate_penalty", t.degenerate_penalty);
    t.calib_samples = j.value("calib_samples", t.calib_samples);
    t.jobs = j.value("jobs", t.jobs);
    if (j.contains("features")) {
      const nlohmann::json& f = j["features"];
      t.features.unary = f.value("unary", t.features.unary);
      t.features.distance = f.value("distance", t.features.distance);
      t.features.adjacency = f.value("adjacency", t.features.adjacency);
      t.features.scaled_distance = f.value("scaled_distance", t.features.scaled_distance);
      t.features.angle = f.value("angle", t.features.angle);
    }
    auto stage = [&](const char* key, learn::StageConfig& s) {
      if (!j.contains(key)) return;
      const nlohmann::json& b = j[key];
      s.lambda = b.value("lambda", s.lambda);
      s.lambda_grid = b.value("lambda_grid", s.lambda_grid);
      s.epochs = b.value("epochs", s.epochs);
    };
    stage("stage1", t.stage1);
    stage("stage2", t.stage2);

    if (j.contains("synthetic")) {
      const nlohmann::json& s = j["synthetic"];
      cfg.synthetic.n_shape = s.value("n_shape", cfg.synthetic.n_shape);
      cfg.synthetic.n_images = s.value("n_images", cfg.synthetic.n_images);
      cfg.synthetic.width = s.value("width", cfg.synthetic.width);
      cfg.synthetic.height = s.value("height", cfg.synthetic.height);
      cfg.epsilons = s.value("epsilons", cfg.epsilons);
      cfg.outlier_counts = s.value("outliers", cfg.outlier_counts);
      cfg.silhouette_path = s.value("silhouette", cfg.silhouette_path);
    }
    if (j.contains("house")) {
      const nlohmann::json& h = j["house"];
      cfg.house_dir = h.value("dir", cfg.house_dir);
      cfg.baselines = h.value("baselines", cfg.baselines);
      cfg.house_width = h.value("width", cfg.house_width);
      cfg.house_height = h.value("height", cfg.house_height);
      const std::string split = h.value("split", std::string("thirds"));
      if (split != "thirds") fail(ErrorCode::unsupported, "unsupported split rule '" + split + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::array<std::vector<MatchInstance>, 3> condition_splits(const ExperimentConfig& cfg,
                                                           double value, int outliers,
                                                           unsigned seed) {
  if (cfg.kind == "synthetic") {
    SyntheticConfig scfg = cfg.synthetic;
    scfg.epsilon = value;
    scfg.n_outliers = outliers;
    scfg.seed = seed;
    if (!cfg.silhouette_path.empty()) scfg.silhouette = load_silhouette(cfg.silhouette_path);
    SyntheticDataset ds = gen_synthetic(scfg);
    const feat::ShapeContextConfig sc;
    for (auto& split : ds.splits)
      for (Scene& img : split) img = feat::with_shape_context(img, sc);
    return {split_pairs(ds, 0), split_pairs(ds, 1), split_pairs(ds, 2)};
  }
  const std::vector<Scene> frames =
      load_house_dir(cfg.house_dir, cfg.house_width, cfg.house_height);
  return split_thirds(house_pairs(frames, static_cast<int>(value)));
}

namespace {

struct Condition {
  std::string label;
  double value = 0.0;
  int outliers = 0;
};

// Times 1..20 forced message sweeps on one instance's tables (median of
// several rounds per count).
std::vector<std::pair<int, double>> time_bp_sweeps(const MatchInstance& inst,
                                                   const WeightModel& model) {
  const feat::CliqueContext ctx = feat::make_clique_context(inst.tpl, inst.target, model);
  const infer::CandidateSets cands =
      model.config.unary ? infer::prune_candidates(inst.tpl, inst.target, model.theta0, model.p)
                         : infer::all_candidates(inst.tpl.size(), inst.target.size());
  const infer::CliqueTableSet tables = infer::build_tables(ctx, cands, model.theta);
  std::vector<std::pair<int, double>> out;
  for (int sweeps = 1; sweeps <= 20; ++sweeps) {
    std::vector<double> rounds;
    for (int r = 0; r < 7; ++r) {
      const double t0 = now_ms();
      (void)infer::timed_sweeps(tables, sweeps);
      rounds.push_back(now_ms() - t0);
    }
    std::sort(rounds.begin(), rounds.end());
    out.emplace_back(sweeps, rounds[rounds.size() / 2]);
  }
  return out;
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.kind = cfg.kind;
  if (cfg.methods.empty()) return report;

  const bool linear_unl = wants(cfg, "linear_unlearned");
  const bool linear_lrn = wants(cfg, "linear_learned");
  const bool ho_unl = wants(cfg, "higher_order_unlearned");
  const bool ho_lrn = wants(cfg, "higher_order_learned");

  std::vector<Condition> conditions;
  if (cfg.kind == "synthetic") {
    for (int o : cfg.outlier_counts)
      for (double e : cfg.epsilons) {
        std::ostringstream label;
        label << "eps=" << e << ",outliers=" << o;
        conditions.push_back({label.str(), e, o});
      }
  } else {
    for (int b : cfg.baselines)
      conditions.push_back({"baseline=" + std::to_string(b), static_cast<double>(b), 0});
  }

  std::map<std::pair<std::size_t, std::string>, Sample> samples;
  infer::LoopyOptions opts;
  opts.max_iters = cfg.train.loopy_iters;
  opts.tol = cfg.train.loopy_tol;

  for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
    const Condition& cond = conditions[ci];
    for (unsigned seed : cfg.seeds) {
      auto splits = condition_splits(cfg, cond.value, cond.outliers, seed);
      struct {
        std::vector<MatchInstance>&train, &val, &test;
      } data{splits[0], splits[1], splits[2]};
      const std::size_t k = data.test.front().tpl.scene.descriptor_dim();

      learn::TrainConfig tcfg = cfg.train;
      tcfg.seed = seed;

      std::vector<double> theta0_learned;
      WeightModel ho_model_learned;
      if (ho_lrn) {
        learn::TrainReport rep = learn::two_stage_train(data.train, data.val, tcfg);
        theta0_learned = rep.stage1.theta0;
        ho_model_learned = rep.stage2.model;
      } else if (linear_lrn) {
        learn::Stage1Problem p1(data.train, data.val, tcfg);
        if (tcfg.stage1.lambda_grid.empty()) {
          theta0_learned = p1.train(tcfg.stage1.lambda).theta0;
        } else {
          std::vector<learn::Stage1Result> results;
          std::vector<double> risks;
          for (double lambda : tcfg.stage1.lambda_grid) {
            results.push_back(p1.train(lambda));
            risks.push_back(p1.risk(results.back().theta0, true));
          }
          theta0_learned =
              results[learn::select_lambda(tcfg.stage1.lambda_grid, risks)].theta0;
        }
      }

      const std::vector<double> theta0_uniform(k, 1.0);
      WeightModel ho_model_uniform;
      if (ho_unl) ho_model_uniform = default_model(k, tcfg.p, tcfg.features);

      if ((ho_unl || ho_lrn) && report.bp_timing_ms.empty())
        report.bp_timing_ms =
            time_bp_sweeps(data.test.front(), ho_lrn ? ho_model_learned : ho_model_uniform);

      auto record = [&](const std::string& method, const MatchInstance& inst,
                        const Assignment& y, double ms) {
        Sample& s = samples[{ci, method}];
        s.losses.push_back(eval_loss(cfg.train.loss, y, inst));
        s.times_ms.push_back(ms);
      };
      for (const MatchInstance& inst : data.test) {
        if (linear_unl) {
          const double t0 = now_ms();
          const infer::Prediction pr = infer::predict_linear(inst.tpl, inst.target, theta0_uniform);
          record("linear_unlearned", inst, pr.assignment, now_ms() - t0);
        }
        if (linear_lrn) {
          const double t0 = now_ms();
          const infer::Prediction pr = infer::predict_linear(inst.tpl, inst.target, theta0_learned);
          record("linear_learned", inst, pr.assignment, now_ms() - t0);
        }
        if (ho_unl) {
          const double t0 = now_ms();
          const infer::Prediction pr = infer::predict(inst.tpl, inst.target, ho_model_uniform, opts);
          record("higher_order_unlearned", inst, pr.assignment, now_ms() - t0);
        }
        if (ho_lrn) {
          const double t0 = now_ms();
          const infer::Prediction pr = infer::predict(inst.tpl, inst.target, ho_model_learned, opts);
          record("higher_order_learned", inst, pr.assignment, now_ms() - t0);
        }
      }
    }
  }

  for (std::size_t ci = 0; ci < conditions.size(); ++ci)
    for (const std::string& method : cfg.methods) {
      const auto it = samples.find({ci, method});
      if (it == samples.end()) continue;
      const Sample& s = it->second;
      const double m = static_cast<double>(s.losses.size());
      const double mean = std::accumulate(s.losses.begin(), s.losses.end(), 0.0) / m;
      double var = 0.0;
      for (double l : s.losses) var += (l - mean) * (l - mean);
      var = s.losses.size() > 1 ? var / (m - 1.0) : 0.0;
      ReportRow row;
      row.method = method;
      row.condition = conditions[ci].label;
      row.value = conditions[ci].value;
      row.outliers = conditions[ci].outliers;
      row.p = cfg.train.p;
      row.mean = mean;
      row.std_error = std::sqrt(var / m);
      row.ms = std::accumulate(s.times_ms.begin(), s.times_ms.end(), 0.0) / m;
      row.pairs = s.losses.size();
      report.rows.push_back(std::move(row));
    }
  return report;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path);
  out << std::setprecision(12) << "method,condition,mean,stderr,ms,pairs\n";
  for (const ReportRow& r : report.rows)
    out << r.method << ",\"" << r.condition << "\"," << r.mean << ',' << r.std_error << ','
        << r.ms << ',' << r.pairs << '\n';
  if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
}

void emit_plot_data(const ExperimentReport& report, const std::string& dir) {
  if (report.rows.empty()) fail(ErrorCode::invalid, "cannot plot an empty report");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir);

  const bool synthetic = report.kind == "synthetic";
  {
    const std::string path =
        dir + (synthetic ? "/loss_vs_epsilon.csv" : "/loss_vs_baseline.csv");
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write " + path);
    out << std::setprecision(12);
    out << "# mean loss per condition; std_error = sample std / sqrt(pairs)\n";
    if (synthetic)
      out << "epsilon,outliers,p,method,mean,std_error,pairs\n";
    else
      out << "baseline,p,method,mean,std_error,pairs\n";
    for (const ReportRow& r : report.rows) {
      if (synthetic)
        out << r.value << ',' << r.outliers << ',' << r.p << ',';
      else
        out << static_cast<int>(r.value) << ',' << r.p << ',';
      out << r.method << ',' << r.mean << ',' << r.std_error << ',' << r.pairs << '\n';
    }
    if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
  }
  {
    const std::string path = dir + "/runtime_vs_method.csv";
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write " + path);
    out << std::setprecision(12);
    out << "# mean per-pair prediction time, aggregated over all conditions\n";
    out << "method,ms\n";
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const ReportRow& r : report.rows) {
      acc[r.method].first += r.ms * static_cast<double>(r.pairs);
      acc[r.method].second += r.pairs;
    }
    for (const auto& [method, tot] : acc)
      out << method << ',' << tot.first / static_cast<double>(tot.second) << '\n';
    if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
  }
  if (!report.bp_timing_ms.empty()) {
    const std::string path = dir + "/bp_iterations.csv";
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write " + path);
    out << std::setprecision(12);
    out << "# wall time of k forced message sweeps on one representative instance\n";
    out << "iterations,ms\n";
    for (const auto& [sweeps, ms] : report.bp_timing_ms) out << sweeps << ',' << ms << '\n';
    if (!out.good()) fail(ErrorCode::io, "failed writing " + path);
  }
}

} // namespace iso::bench
