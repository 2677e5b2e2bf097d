// C ABI over the matching library: opaque handles, status codes, and a
// thread-local error message.  Every entry point catches all exceptions.

#include "isomatch.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bench/experiment.hpp"
#include "bench/synthetic.hpp"
#include "core/error.hpp"
#include "core/io.hpp"
#include "core/model.hpp"
#include "core/types.hpp"
#include "features/shape_context.hpp"
#include "infer/predict.hpp"
#include "learn/loss.hpp"
#include "learn/train.hpp"

struct im_scene {
  iso::Scene s;
};
struct im_template {
  iso::TemplateShape t;
};
struct im_model {
  iso::WeightModel m;
};
struct im_result {
  iso::infer::Prediction p;
};

namespace {

thread_local std::string g_last_error = "no error";

im_status to_status(iso::ErrorCode code) {
  using iso::ErrorCode;
  switch (code) {
    case ErrorCode::io: return IM_ERR_IO;
    case ErrorCode::parse: return IM_ERR_PARSE;
    case ErrorCode::invalid: return IM_ERR_INVALID;
    case ErrorCode::dimension: return IM_ERR_DIMENSION;
    case ErrorCode::degenerate: return IM_ERR_DEGENERATE;
    case ErrorCode::unsupported: return IM_ERR_UNSUPPORTED;
    case ErrorCode::internal: return IM_ERR_INTERNAL;
  }
  return IM_ERR_INTERNAL;
}

template <typename F>
im_status guarded(F&& f) {
  try {
    f();
    return IM_OK;
  } catch (const iso::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return IM_ERR_INTERNAL;
  }
}

im_status invalid_arg(const char* msg) {
  g_last_error = msg;
  return IM_ERR_INVALID;
}

nlohmann::json parse_json_arg(const char* text, const char* what) {
  if (!text || !*text) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    iso::fail(iso::ErrorCode::parse, std::string(what) + ": " + e.what());
  }
}

// Unknown keys are rejected rather than ignored, so typos fail loudly.
void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const char* what) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known)
      iso::fail(iso::ErrorCode::invalid,
                std::string(what) + ": unknown key '" + item.key() + "'");
  }
}

struct MatchOptions {
  int p = 0; // 0: keep the model's p
  iso::infer::LoopyOptions loopy;
  iso::LossKind loss = iso::LossKind::hamming;
};

MatchOptions parse_match_options(const char* options_json) {
  const nlohmann::json j = parse_json_arg(options_json, "options");
  require_keys(j, {"p", "max_iters", "tol", "exact", "loss"}, "options");
  MatchOptions o;
  try {
    o.p = j.value("p", 0);
    o.loopy.max_iters = j.value("max_iters", o.loopy.max_iters);
    o.loopy.tol = j.value("tol", o.loopy.tol);
    o.loopy.exact = j.value("exact", false);
    if (j.contains("loss")) o.loss = iso::parse_loss_kind(j["loss"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    iso::fail(iso::ErrorCode::parse, std::string("options: ") + e.what());
  }
  return o;
}

void apply_overrides(iso::bench::ExperimentConfig& cfg, const char* overrides_json) {
  const nlohmann::json j = parse_json_arg(overrides_json, "overrides");
  require_keys(j, {"seed", "p", "loss", "lambda", "max_iters", "jobs"}, "overrides");
  try {
    if (j.contains("seed")) {
      const unsigned seed = j["seed"].get<unsigned>();
      cfg.seeds = {seed};
      cfg.train.seed = seed;
    }
    if (j.contains("p")) cfg.train.p = j["p"].get<int>();
    if (j.contains("loss")) cfg.train.loss = iso::parse_loss_kind(j["loss"].get<std::string>());
    if (j.contains("lambda")) {
      const double lambda = j["lambda"].get<double>();
      cfg.train.stage1.lambda = lambda;
      cfg.train.stage2.lambda = lambda;
      cfg.train.stage1.lambda_grid.clear();
      cfg.train.stage2.lambda_grid.clear();
    }
    if (j.contains("max_iters")) cfg.train.loopy_iters = j["max_iters"].get<int>();
    if (j.contains("jobs")) cfg.train.jobs = j["jobs"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    iso::fail(iso::ErrorCode::parse, std::string("overrides: ") + e.what());
  }
  cfg.validate();
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) iso::fail(iso::ErrorCode::io, "cannot create " + dir);
}

iso::feat::ShapeContextConfig parse_sc_config(const char* options_json) {
  const nlohmann::json j = parse_json_arg(options_json, "options");
  require_keys(j, {"radial_bins", "angular_bins", "r_inner", "r_outer"}, "options");
  iso::feat::ShapeContextConfig cfg;
  try {
    cfg.radial_bins = j.value("radial_bins", cfg.radial_bins);
    cfg.angular_bins = j.value("angular_bins", cfg.angular_bins);
    cfg.r_inner = j.value("r_inner", cfg.r_inner);
    cfg.r_outer = j.value("r_outer", cfg.r_outer);
  } catch (const nlohmann::json::exception& e) {
    iso::fail(iso::ErrorCode::parse, std::string("options: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

iso::infer::Prediction run_match(const iso::TemplateShape& tpl, const iso::Scene& target,
                                 const iso::WeightModel& model, const MatchOptions& o) {
  const iso::WeightModel* m = &model;
  iso::WeightModel adjusted;
  if (o.p != 0) {
    adjusted = model;
    adjusted.p = o.p;
    m = &adjusted;
  }
  if (m->config.unary && (!tpl.scene.has_descriptors() || !target.has_descriptors())) {
    const iso::feat::ShapeContextConfig sc;
    iso::TemplateShape tpl2 = tpl;
    tpl2.scene = iso::feat::ensure_descriptors(tpl.scene, sc);
    return iso::infer::predict(tpl2, iso::feat::ensure_descriptors(target, sc), *m, o.loopy);
  }
  return iso::infer::predict(tpl, target, *m, o.loopy);
}

} // namespace

extern "C" {

const char* im_version(void) { return "1.0.0"; }

const char* im_status_name(im_status status) {
  switch (status) {
    case IM_OK: return "ok";
    case IM_ERR_IO: return "io";
    case IM_ERR_PARSE: return "parse";
    case IM_ERR_INVALID: return "invalid";
    case IM_ERR_DIMENSION: return "dimension";
    case IM_ERR_DEGENERATE: return "degenerate";
    case IM_ERR_UNSUPPORTED: return "unsupported";
    case IM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* im_last_error(void) { return g_last_error.c_str(); }

// --- scenes -----------------------------------------------------------

im_status im_scene_load(const char* path, double width, double height, im_scene** out) {
  if (!path || !out) return invalid_arg("im_scene_load: path and out are required");
  return guarded([&] { *out = new im_scene{iso::load_scene(path, width, height)}; });
}

im_status im_scene_save(const im_scene* scene, const char* path) {
  if (!scene || !path) return invalid_arg("im_scene_save: scene and path are required");
  return guarded([&] { iso::save_scene(scene->s, path); });
}

void im_scene_free(im_scene* scene) { delete scene; }

size_t im_scene_size(const im_scene* scene) { return scene ? scene->s.size() : 0; }

size_t im_scene_descriptor_dim(const im_scene* scene) {
  return scene ? scene->s.descriptor_dim() : 0;
}

im_status im_scene_point(const im_scene* scene, size_t index, double* x, double* y) {
  if (!scene || !x || !y) return invalid_arg("im_scene_point: scene, x, y are required");
  return guarded([&] {
    if (index >= scene->s.size()) iso::fail(iso::ErrorCode::invalid, "point index out of range");
    *x = scene->s.points[index].x;
    *y = scene->s.points[index].y;
  });
}

im_status im_scene_shape_context(const im_scene* scene, const char* options_json,
                                 im_scene** out) {
  if (!scene || !out) return invalid_arg("im_scene_shape_context: scene and out are required");
  return guarded([&] {
    *out = new im_scene{iso::feat::with_shape_context(scene->s, parse_sc_config(options_json))};
  });
}

// --- templates and match files ----------------------------------------

im_status im_template_load(const char* path, im_template** out) {
  if (!path || !out) return invalid_arg("im_template_load: path and out are required");
  return guarded([&] { *out = new im_template{iso::load_template(path)}; });
}

void im_template_free(im_template* tpl) { delete tpl; }

size_t im_template_size(const im_template* tpl) { return tpl ? tpl->t.size() : 0; }

im_status im_matches_load(const char* path, size_t n_template, size_t n_target, size_t* buf,
                          size_t buf_len) {
  if (!path || !buf) return invalid_arg("im_matches_load: path and buf are required");
  return guarded([&] {
    const iso::Assignment a = iso::load_matches(path, n_template, n_target);
    if (buf_len < a.size()) iso::fail(iso::ErrorCode::dimension, "buffer too small");
    for (std::size_t i = 0; i < a.size(); ++i) buf[i] = a.map[i];
  });
}

im_status im_matches_save(const char* path, const size_t* map, size_t n, const char* comment) {
  if (!path || !map) return invalid_arg("im_matches_save: path and map are required");
  return guarded([&] {
    iso::Assignment a;
    a.map.assign(map, map + n);
    iso::save_matches(a, path, comment ? comment : "");
  });
}

im_status im_loss(const char* kind, const size_t* y, const size_t* y_gt, size_t n,
                  const im_scene* target, double* out) {
  if (!kind || !y || !y_gt || !target || !out)
    return invalid_arg("im_loss: kind, y, y_gt, target, out are required");
  return guarded([&] {
    const iso::LossKind k = iso::parse_loss_kind(kind);
    iso::Assignment a, b;
    a.map.assign(y, y + n);
    b.map.assign(y_gt, y_gt + n);
    a.validate(n, target->s.size());
    b.validate(n, target->s.size());
    *out = k == iso::LossKind::hamming ? iso::learn::hamming_loss(a, b)
                                       : iso::learn::endpoint_loss(a, b, target->s);
  });
}

// --- models -------------------------------------------------------------

im_status im_model_load(const char* path, im_model** out) {
  if (!path || !out) return invalid_arg("im_model_load: path and out are required");
  return guarded([&] { *out = new im_model{iso::load_model(path)}; });
}

im_status im_model_save(const im_model* model, const char* path) {
  if (!model || !path) return invalid_arg("im_model_save: model and path are required");
  return guarded([&] { iso::save_model(model->m, path); });
}

void im_model_free(im_model* model) { delete model; }

size_t im_model_descriptor_dim(const im_model* model) {
  return model ? model->m.theta0.size() : 0;
}

int im_model_p(const im_model* model) { return model ? model->m.p : 0; }

im_status im_model_default(size_t descriptor_dim, int p, const char* features_json,
                           im_model** out) {
  if (!out) return invalid_arg("im_model_default: out is required");
  return guarded([&] {
    iso::FeatureConfig config;
    const nlohmann::json j = parse_json_arg(features_json, "features");
    try {
      config.unary = j.value("unary", config.unary);
      config.distance = j.value("distance", config.distance);
      config.adjacency = j.value("adjacency", config.adjacency);
      config.scaled_distance = j.value("scaled_distance", config.scaled_distance);
      config.angle = j.value("angle", config.angle);
    } catch (const nlohmann::json::exception& e) {
      iso::fail(iso::ErrorCode::parse, std::string("features: ") + e.what());
    }
    *out = new im_model{iso::default_model(descriptor_dim, p, config)};
  });
}

// --- matching -------------------------------------------------------------

im_status im_match(const im_template* tpl, const im_scene* target, const im_model* model,
                   const char* options_json, im_result** out) {
  if (!tpl || !target || !model || !out)
    return invalid_arg("im_match: tpl, target, model, out are required");
  return guarded([&] {
    const MatchOptions o = parse_match_options(options_json);
    *out = new im_result{run_match(tpl->t, target->s, model->m, o)};
  });
}

void im_result_free(im_result* result) { delete result; }

size_t im_result_size(const im_result* result) {
  return result ? result->p.assignment.size() : 0;
}

im_status im_result_assignment(const im_result* result, size_t* buf, size_t buf_len) {
  if (!result || !buf) return invalid_arg("im_result_assignment: result and buf are required");
  return guarded([&] {
    const iso::Assignment& a = result->p.assignment;
    if (buf_len < a.size()) iso::fail(iso::ErrorCode::dimension, "buffer too small");
    for (std::size_t i = 0; i < a.size(); ++i) buf[i] = a.map[i];
  });
}

double im_result_objective(const im_result* result) {
  return result ? result->p.objective : 0.0;
}

int im_result_iterations(const im_result* result) { return result ? result->p.iterations : 0; }

int im_result_converged(const im_result* result) {
  return result && result->p.converged ? 1 : 0;
}

// --- pipelines -------------------------------------------------------------

im_status im_train(const char* config_path, const char* overrides_json, const char* out_dir,
                   im_model** out_model) {
  if (!config_path || !out_dir)
    return invalid_arg("im_train: config_path and out_dir are required");
  return guarded([&] {
    iso::bench::ExperimentConfig cfg = iso::bench::load_experiment_config(config_path);
    apply_overrides(cfg, overrides_json);
    const unsigned seed = cfg.seeds.front();
    const double value =
        cfg.kind == "synthetic" ? cfg.epsilons.front() : static_cast<double>(cfg.baselines.front());
    const int outliers = cfg.kind == "synthetic" ? cfg.outlier_counts.front() : 0;
    auto splits = iso::bench::condition_splits(cfg, value, outliers, seed);

    iso::learn::TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;
    const iso::learn::TrainReport rep = iso::learn::two_stage_train(splits[0], splits[1], tcfg);

    make_dir(out_dir);
    const std::string dir = out_dir;
    iso::save_model(rep.stage2.model, dir + "/model.json");
    iso::learn::write_risk_history(rep.stage2.history, dir + "/risk_history.csv");
    iso::learn::write_risk_history(rep.stage1.history, dir + "/risk_history_stage1.csv");
    {
      std::ofstream f(dir + "/prune_recall.csv");
      if (!f) iso::fail(iso::ErrorCode::io, "cannot write " + dir + "/prune_recall.csv");
      f << std::setprecision(17) << "instance,recall\n";
      for (std::size_t i = 0; i < rep.stage2.prune_recall.size(); ++i)
        f << i << ',' << rep.stage2.prune_recall[i] << '\n';
    }
    {
      std::ofstream f(dir + "/slacks.csv");
      if (!f) iso::fail(iso::ErrorCode::io, "cannot write " + dir + "/slacks.csv");
      f << std::setprecision(17) << "instance,slack,train_loss\n";
      for (std::size_t i = 0; i < rep.stage2.slacks.size(); ++i)
        f << i << ',' << rep.stage2.slacks[i] << ',' << rep.stage2.train_losses[i] << '\n';
    }
    {
      nlohmann::json summary;
      summary["lambda1"] = rep.stage1.lambda;
      summary["lambda2"] = rep.stage2.lambda;
      summary["lambda1_val_risks"] = rep.lambda1_risks;
      summary["lambda2_val_risks"] = rep.lambda2_risks;
      if (!rep.stage2.history.empty()) {
        summary["final_train_risk"] = rep.stage2.history.back().train_risk;
        summary["final_val_risk"] = rep.stage2.history.back().val_risk;
      }
      double mean_recall = 0.0;
      for (double r : rep.stage2.prune_recall) mean_recall += r;
      if (!rep.stage2.prune_recall.empty())
        mean_recall /= static_cast<double>(rep.stage2.prune_recall.size());
      summary["mean_prune_recall"] = mean_recall;
      summary["seed"] = seed;
      std::ofstream f(dir + "/training_summary.json");
      if (!f) iso::fail(iso::ErrorCode::io, "cannot write " + dir + "/training_summary.json");
      f << summary.dump(2) << '\n';
    }
    if (out_model) *out_model = new im_model{rep.stage2.model};
  });
}

im_status im_eval_pairs(const im_model* model, const char* pairs_path, const char* options_json,
                        const char* report_path, double* mean_loss) {
  if (!model || !pairs_path || !report_path)
    return invalid_arg("im_eval_pairs: model, pairs_path, report_path are required");
  return guarded([&] {
    const MatchOptions o = parse_match_options(options_json);
    namespace fs = std::filesystem;
    const fs::path base = fs::path(pairs_path).parent_path();
    auto resolve = [&](const std::string& p) {
      return fs::path(p).is_absolute() ? p : (base / p).string();
    };

    std::ifstream in(pairs_path);
    if (!in) iso::fail(iso::ErrorCode::io, std::string("cannot open ") + pairs_path);
    std::ofstream out(report_path);
    if (!out) iso::fail(iso::ErrorCode::io, std::string("cannot write ") + report_path);
    out << std::setprecision(17) << "template,target,loss,objective,iterations,converged\n";

    double total = 0.0;
    std::size_t with_gt = 0, lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream row(line);
      std::string tpl_path, tgt_path, gt_path;
      row >> tpl_path >> tgt_path >> gt_path;
      if (tpl_path.empty() || tgt_path.empty())
        iso::fail(iso::ErrorCode::parse, std::string(pairs_path) + ":" + std::to_string(lineno) +
                                             ": expected 'template target [matches]'");
      const iso::TemplateShape tpl = iso::load_template(resolve(tpl_path));
      const iso::Scene target = iso::load_scene(resolve(tgt_path));
      const iso::infer::Prediction pred = run_match(tpl, target, model->m, o);
      out << tpl_path << ',' << tgt_path << ',';
      if (!gt_path.empty()) {
        const iso::Assignment gt =
            iso::load_matches(resolve(gt_path), tpl.size(), target.size());
        const double loss = o.loss == iso::LossKind::hamming
                                ? iso::learn::hamming_loss(pred.assignment, gt)
                                : iso::learn::endpoint_loss(pred.assignment, gt, target);
        total += loss;
        ++with_gt;
        out << loss;
      }
      out << ',' << pred.objective << ',' << pred.iterations << ','
          << (pred.converged ? 1 : 0) << '\n';
    }
    if (!out.good()) iso::fail(iso::ErrorCode::io, std::string("failed writing ") + report_path);
    if (mean_loss)
      *mean_loss = with_gt ? total / static_cast<double>(with_gt)
                           : std::numeric_limits<double>::quiet_NaN();
  });
}

im_status im_synth(const char* config_path, const char* overrides_json, const char* out_dir) {
  if (!config_path || !out_dir)
    return invalid_arg("im_synth: config_path and out_dir are required");
  return guarded([&] {
    std::ifstream in(config_path);
    if (!in) iso::fail(iso::ErrorCode::io, std::string("cannot open ") + config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      iso::fail(iso::ErrorCode::parse, std::string(config_path) + ": " + e.what());
    }
    iso::bench::SyntheticConfig cfg;
    std::string silhouette_path;
    require_keys(j, {"n_shape", "n_outliers", "epsilon", "n_images", "seed", "width", "height",
                     "silhouette"},
                 "synth config");
    try {
      cfg.n_shape = j.value("n_shape", cfg.n_shape);
      cfg.n_outliers = j.value("n_outliers", cfg.n_outliers);
      cfg.epsilon = j.value("epsilon", cfg.epsilon);
      cfg.n_images = j.value("n_images", cfg.n_images);
      cfg.seed = j.value("seed", cfg.seed);
      cfg.width = j.value("width", cfg.width);
      cfg.height = j.value("height", cfg.height);
      silhouette_path = j.value("silhouette", silhouette_path);
      const nlohmann::json ov = parse_json_arg(overrides_json, "overrides");
      require_keys(ov, {"seed"}, "overrides");
      if (ov.contains("seed")) cfg.seed = ov["seed"].get<unsigned>();
    } catch (const nlohmann::json::exception& e) {
      iso::fail(iso::ErrorCode::parse, std::string("synth config: ") + e.what());
    }
    if (!silhouette_path.empty()) cfg.silhouette = iso::bench::load_silhouette(silhouette_path);

    const iso::bench::SyntheticDataset ds = iso::bench::gen_synthetic(cfg);
    const std::string dir = out_dir;
    make_dir(dir + "/images");
    make_dir(dir + "/templates");

    iso::Assignment gt;
    for (std::size_t t : ds.order) gt.map.push_back(t);
    iso::save_matches(gt, dir + "/gt.txt", "shape-point identity under the template order");

    static const char* split_names[] = {"train", "val", "test"};
    for (int s = 0; s < 3; ++s) {
      std::ofstream pairs(dir + "/pairs_" + split_names[s] + ".txt");
      if (!pairs) iso::fail(iso::ErrorCode::io, "cannot write pairs manifest");
      pairs << "# template target matches\n";
      const auto& images = ds.splits[s];
      for (std::size_t i = 0; i < images.size(); ++i) {
        const std::string img_rel =
            std::string("images/") + split_names[s] + "_" + std::to_string(i) + ".txt";
        const std::string tpl_rel =
            std::string("templates/") + split_names[s] + "_" + std::to_string(i) + ".txt";
        iso::save_scene(images[i], dir + "/" + img_rel);
        iso::TemplateShape tpl;
        tpl.scene = images[i];
        tpl.order = ds.order;
        iso::save_template(tpl, dir + "/" + tpl_rel);
        for (std::size_t k = i + 1; k < images.size(); ++k)
          pairs << tpl_rel << " images/" << split_names[s] << "_" << k << ".txt gt.txt\n";
      }
      if (!pairs.good()) iso::fail(iso::ErrorCode::io, "failed writing pairs manifest");
    }
  });
}

im_status im_sweep(const char* config_path, const char* overrides_json, const char* out_dir) {
  if (!config_path || !out_dir)
    return invalid_arg("im_sweep: config_path and out_dir are required");
  return guarded([&] {
    iso::bench::ExperimentConfig cfg = iso::bench::load_experiment_config(config_path);
    apply_overrides(cfg, overrides_json);
    const iso::bench::ExperimentReport report = iso::bench::run_experiment(cfg);
    make_dir(out_dir);
    iso::bench::write_report_csv(report, std::string(out_dir) + "/report.csv");
    if (!report.rows.empty()) iso::bench::emit_plot_data(report, out_dir);
  });
}

} // extern "C"
