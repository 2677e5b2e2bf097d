// Command-line front end.  Talks to the shared library exclusively through
// the C interface; every machine-readable artifact goes to a file and stdout
// carries a short human summary.  Exit codes: 0 ok, 1 runtime error, 2 usage.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "isomatch.h"

namespace {

int fail_runtime(im_status st) {
  std::cerr << "error (" << im_status_name(st) << "): " << im_last_error() << "\n";
  return 1;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Assembles {"k1":v1,...} from the pieces appended via add().
struct JsonObject {
  std::string body;

  void add(const std::string& key, const std::string& value) {
    if (!body.empty()) body += ',';
    body += '"' + key + "\":" + value;
  }
  std::string str() const { return "{" + body + "}"; }
};

struct SceneDeleter {
  void operator()(im_scene* s) const { im_scene_free(s); }
};
struct TemplateDeleter {
  void operator()(im_template* t) const { im_template_free(t); }
};
struct ModelDeleter {
  void operator()(im_model* m) const { im_model_free(m); }
};
struct ResultDeleter {
  void operator()(im_result* r) const { im_result_free(r); }
};

using ScenePtr = std::unique_ptr<im_scene, SceneDeleter>;
using TemplatePtr = std::unique_ptr<im_template, TemplateDeleter>;
using ModelPtr = std::unique_ptr<im_model, ModelDeleter>;
using ResultPtr = std::unique_ptr<im_result, ResultDeleter>;

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"isomatch: match an ordered template shape to scene landmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", im_version());

  // match ------------------------------------------------------------------
  auto* cmd_match = app.add_subcommand("match", "Match a template against a target scene");
  std::string m_template, m_target, m_model, m_out, m_gt, m_loss = "hamming";
  double m_width = 0, m_height = 0;
  int m_p = 10, m_iters = 20;
  bool m_exact = false;
  cmd_match->add_option("--template", m_template, "template file")->required();
  cmd_match->add_option("--target", m_target, "target scene file")->required();
  cmd_match->add_option("--model", m_model, "model JSON (default: unlearned equal weights)");
  cmd_match->add_option("--out", m_out, "write the match file here");
  cmd_match->add_option("--gt", m_gt, "ground-truth match file; reports the loss");
  cmd_match->add_option("--loss", m_loss, "hamming|endpoint (default hamming)");
  cmd_match->add_option("--p", m_p, "candidates per template point (default 10)");
  cmd_match->add_option("--max-iters", m_iters, "message sweeps (default 20)");
  cmd_match->add_flag("--exact", m_exact, "decode with the exact conditioned recursion");
  cmd_match->add_option("--width", m_width, "scene width for headerless files");
  cmd_match->add_option("--height", m_height, "scene height for headerless files");

  // train ------------------------------------------------------------------
  auto* cmd_train = app.add_subcommand("train", "Train the two-stage model from a config");
  std::string t_config, t_out, t_loss;
  unsigned t_seed = 0;
  int t_p = 0, t_iters = 0, t_jobs = 0;
  double t_lambda = 0;
  const int jobs_default =
      std::thread::hardware_concurrency() ? static_cast<int>(std::thread::hardware_concurrency())
                                          : 1;
  cmd_train->add_option("--config", t_config, "experiment config JSON")->required();
  cmd_train->add_option("--out", t_out, "output directory")->required();
  cmd_train->add_option("--seed", t_seed, "override the config seed");
  cmd_train->add_option("--p", t_p, "override candidates per template point");
  cmd_train->add_option("--loss", t_loss, "hamming|endpoint");
  cmd_train->add_option("--lambda", t_lambda, "pin both stage regularisers (skips grid search)");
  cmd_train->add_option("--max-iters", t_iters, "message sweeps during training");
  cmd_train->add_option("--jobs", t_jobs,
                        "worker threads (default " + std::to_string(jobs_default) + ")");

  // eval -------------------------------------------------------------------
  auto* cmd_eval = app.add_subcommand("eval", "Evaluate a model over a pairs file");
  std::string e_model, e_pairs, e_report, e_loss = "hamming";
  int e_p = 0, e_iters = 20;
  bool e_exact = false;
  cmd_eval->add_option("--model", e_model, "model JSON")->required();
  cmd_eval->add_option("--pairs", e_pairs, "pairs file: template target [matches]")->required();
  cmd_eval->add_option("--report", e_report, "per-pair CSV output")->required();
  cmd_eval->add_option("--loss", e_loss, "hamming|endpoint (default hamming)");
  cmd_eval->add_option("--p", e_p, "override candidates per template point");
  cmd_eval->add_option("--max-iters", e_iters, "message sweeps (default 20)");
  cmd_eval->add_flag("--exact", e_exact, "decode with the exact conditioned recursion");

  // synth ------------------------------------------------------------------
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
  std::string s_config, s_out;
  unsigned s_seed = 0;
  cmd_synth->add_option("--config", s_config, "synthetic config JSON")->required();
  cmd_synth->add_option("--out", s_out, "output directory")->required();
  cmd_synth->add_option("--seed", s_seed, "override the config seed");

  // sweep ------------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "Run an experiment config end to end");
  std::string w_config, w_out, w_loss;
  unsigned w_seed = 0;
  int w_p = 0, w_iters = 0, w_jobs = 0;
  double w_lambda = 0;
  cmd_sweep->add_option("--config", w_config, "experiment config JSON")->required();
  cmd_sweep->add_option("--out", w_out, "output directory")->required();
  cmd_sweep->add_option("--seed", w_seed, "override the config seed");
  cmd_sweep->add_option("--p", w_p, "override candidates per template point");
  cmd_sweep->add_option("--loss", w_loss, "hamming|endpoint");
  cmd_sweep->add_option("--lambda", w_lambda, "pin both stage regularisers (skips grid search)");
  cmd_sweep->add_option("--max-iters", w_iters, "message sweeps during training");
  cmd_sweep->add_option("--jobs", w_jobs,
                        "worker threads (default " + std::to_string(jobs_default) + ")");

  // sc ---------------------------------------------------------------------
  auto* cmd_sc = app.add_subcommand("sc", "Append shape context descriptors to a scene");
  std::string c_in, c_out;
  double c_width = 0, c_height = 0, c_rin = 0.125, c_rout = 2.0;
  int c_radial = 5, c_angular = 12;
  cmd_sc->add_option("--in", c_in, "input scene file")->required();
  cmd_sc->add_option("--out", c_out, "output scene file")->required();
  cmd_sc->add_option("--radial-bins", c_radial, "log-polar radial bins (default 5)");
  cmd_sc->add_option("--angular-bins", c_angular, "angular bins (default 12)");
  cmd_sc->add_option("--r-inner", c_rin, "inner radius / mean distance (default 0.125)");
  cmd_sc->add_option("--r-outer", c_rout, "outer radius / mean distance (default 2.0)");
  cmd_sc->add_option("--width", c_width, "scene width for headerless files");
  cmd_sc->add_option("--height", c_height, "scene height for headerless files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e); // --help / --version
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  im_status st = IM_OK;

  if (app.got_subcommand(cmd_match)) {
    im_template* tpl_raw = nullptr;
    if ((st = im_template_load(m_template.c_str(), &tpl_raw)) != IM_OK) return fail_runtime(st);
    TemplatePtr tpl(tpl_raw);
    im_scene* tgt_raw = nullptr;
    if ((st = im_scene_load(m_target.c_str(), m_width, m_height, &tgt_raw)) != IM_OK)
      return fail_runtime(st);
    ScenePtr target(tgt_raw);

    ModelPtr model;
    if (!m_model.empty()) {
      im_model* raw = nullptr;
      if ((st = im_model_load(m_model.c_str(), &raw)) != IM_OK) return fail_runtime(st);
      model.reset(raw);
    } else {
      const size_t dim = im_scene_descriptor_dim(target.get());
      const char* features = dim > 0 ? "" : "{\"unary\":false}";
      im_model* raw = nullptr;
      if ((st = im_model_default(dim, m_p, features, &raw)) != IM_OK) return fail_runtime(st);
      model.reset(raw);
    }

    JsonObject opts;
    if (cmd_match->count("--p")) opts.add("p", std::to_string(m_p));
    opts.add("max_iters", std::to_string(m_iters));
    if (m_exact) opts.add("exact", "true");
    opts.add("loss", '"' + m_loss + '"');

    im_result* res_raw = nullptr;
    st = im_match(tpl.get(), target.get(), model.get(), opts.str().c_str(), &res_raw);
    if (st != IM_OK) return fail_runtime(st);
    ResultPtr res(res_raw);

    const size_t n = im_result_size(res.get());
    std::vector<size_t> y(n);
    if ((st = im_result_assignment(res.get(), y.data(), n)) != IM_OK) return fail_runtime(st);

    std::cout << "matched " << n << " template points, objective "
              << num(im_result_objective(res.get())) << ", " << im_result_iterations(res.get())
              << " sweeps" << (im_result_converged(res.get()) ? "" : " (not converged)") << "\n";

    if (!m_out.empty()) {
      if ((st = im_matches_save(m_out.c_str(), y.data(), n, "isomatch match")) != IM_OK)
        return fail_runtime(st);
      std::cout << "matches written to " << m_out << "\n";
    }
    if (!m_gt.empty()) {
      std::vector<size_t> gt(n);
      st = im_matches_load(m_gt.c_str(), n, im_scene_size(target.get()), gt.data(), n);
      if (st != IM_OK) return fail_runtime(st);
      double loss = 0;
      st = im_loss(m_loss.c_str(), y.data(), gt.data(), n, target.get(), &loss);
      if (st != IM_OK) return fail_runtime(st);
      std::cout << m_loss << " loss: " << num(loss) << "\n";
    }
    return 0;
  }

  if (app.got_subcommand(cmd_train)) {
    JsonObject ov;
    if (cmd_train->count("--seed")) ov.add("seed", std::to_string(t_seed));
    if (cmd_train->count("--p")) ov.add("p", std::to_string(t_p));
    if (cmd_train->count("--loss")) ov.add("loss", '"' + t_loss + '"');
    if (cmd_train->count("--lambda")) ov.add("lambda", num(t_lambda));
    if (cmd_train->count("--max-iters")) ov.add("max_iters", std::to_string(t_iters));
    ov.add("jobs", std::to_string(cmd_train->count("--jobs") ? t_jobs : jobs_default));
    st = im_train(t_config.c_str(), ov.str().c_str(), t_out.c_str(), nullptr);
    if (st != IM_OK) return fail_runtime(st);
    std::cout << "model written to " << t_out << "/model.json (risk histories, slacks and "
              << "prune recall alongside)\n";
    return 0;
  }

  if (app.got_subcommand(cmd_eval)) {
    im_model* raw = nullptr;
    if ((st = im_model_load(e_model.c_str(), &raw)) != IM_OK) return fail_runtime(st);
    ModelPtr model(raw);
    JsonObject opts;
    if (cmd_eval->count("--p")) opts.add("p", std::to_string(e_p));
    opts.add("max_iters", std::to_string(e_iters));
    if (e_exact) opts.add("exact", "true");
    opts.add("loss", '"' + e_loss + '"');
    double mean = 0;
    st = im_eval_pairs(model.get(), e_pairs.c_str(), opts.str().c_str(), e_report.c_str(), &mean);
    if (st != IM_OK) return fail_runtime(st);
    std::cout << "report written to " << e_report << "\n";
    if (mean == mean)
      std::cout << "mean " << e_loss << " loss: " << num(mean) << "\n";
    else
      std::cout << "no ground truth in the pairs file; losses omitted\n";
    return 0;
  }

  if (app.got_subcommand(cmd_synth)) {
    JsonObject ov;
    if (cmd_synth->count("--seed")) ov.add("seed", std::to_string(s_seed));
    st = im_synth(s_config.c_str(), ov.str().c_str(), s_out.c_str());
    if (st != IM_OK) return fail_runtime(st);
    std::cout << "dataset written to " << s_out << "\n";
    return 0;
  }

  if (app.got_subcommand(cmd_sweep)) {
    JsonObject ov;
    if (cmd_sweep->count("--seed")) ov.add("seed", std::to_string(w_seed));
    if (cmd_sweep->count("--p")) ov.add("p", std::to_string(w_p));
    if (cmd_sweep->count("--loss")) ov.add("loss", '"' + w_loss + '"');
    if (cmd_sweep->count("--lambda")) ov.add("lambda", num(w_lambda));
    if (cmd_sweep->count("--max-iters")) ov.add("max_iters", std::to_string(w_iters));
    ov.add("jobs", std::to_string(cmd_sweep->count("--jobs") ? w_jobs : jobs_default));
    st = im_sweep(w_config.c_str(), ov.str().c_str(), w_out.c_str());
    if (st != IM_OK) return fail_runtime(st);
    std::cout << "report and plot data written to " << w_out << "\n";
    return 0;
  }

  if (app.got_subcommand(cmd_sc)) {
    im_scene* raw = nullptr;
    if ((st = im_scene_load(c_in.c_str(), c_width, c_height, &raw)) != IM_OK)
      return fail_runtime(st);
    ScenePtr scene(raw);
    JsonObject opts;
    opts.add("radial_bins", std::to_string(c_radial));
    opts.add("angular_bins", std::to_string(c_angular));
    opts.add("r_inner", num(c_rin));
    opts.add("r_outer", num(c_rout));
    im_scene* out_raw = nullptr;
    if ((st = im_scene_shape_context(scene.get(), opts.str().c_str(), &out_raw)) != IM_OK)
      return fail_runtime(st);
    ScenePtr out(out_raw);
    if ((st = im_scene_save(out.get(), c_out.c_str())) != IM_OK) return fail_runtime(st);
    std::cout << "wrote " << im_scene_size(out.get()) << " points with "
              << im_scene_descriptor_dim(out.get()) << " descriptor columns to " << c_out << "\n";
    return 0;
  }

  std::cerr << "usage error: no subcommand\n";
  return 2;
}
