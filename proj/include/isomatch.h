/* isomatch: robust matching of an ordered template shape to scene landmarks.
 *
 * C interface to the shared library.  All functions return an im_status;
 * on any failure im_last_error() carries a one-line message (thread-local).
 * Objects returned through out-parameters are owned by the caller and
 * released with the matching *_free function.  Passing NULL where an object
 * is required yields IM_ERR_INVALID.
 *
 * File formats:
 *   scene     text; optional "# width=W height=H k=K" header, then one point
 *             per line: "id x y d1..dk".  Bare "x y" rows are accepted when
 *             the extents are supplied by the caller.
 *   template  a scene file plus a "# order: i0 i1 ..." line giving the
 *             cyclic visiting order of its shape points.
 *   matches   "# comment" lines plus one "template_index target_index" pair
 *             per line, every template index exactly once.
 *   model     JSON (descriptor weights, group weights, candidate count p,
 *             feature configuration, scale factors).
 *   configs   JSON; see the shipped files under configs/ for the schema.
 */

#ifndef ISOMATCH_H
#define ISOMATCH_H

#include <stddef.h>

#if defined(__GNUC__)
#define IM_API __attribute__((visibility("default")))
#else
#define IM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum im_status {
  IM_OK = 0,
  IM_ERR_IO = 1,         /* file missing or unwritable */
  IM_ERR_PARSE = 2,      /* malformed file contents */
  IM_ERR_INVALID = 3,    /* bad argument or inconsistent data */
  IM_ERR_DIMENSION = 4,  /* mismatched sizes or descriptor dimensions */
  IM_ERR_DEGENERATE = 5, /* coincident/collinear geometry where it is fatal */
  IM_ERR_UNSUPPORTED = 6,
  IM_ERR_INTERNAL = 7
} im_status;

typedef struct im_scene im_scene;
typedef struct im_template im_template;
typedef struct im_model im_model;
typedef struct im_result im_result;

IM_API const char* im_version(void);
IM_API const char* im_status_name(im_status status);

/* Message for the most recent failure on this thread; never NULL. */
IM_API const char* im_last_error(void);

/* --- scenes ---------------------------------------------------------- */

/* width/height are used only for files without an extent header; pass 0 to
 * require the header. */
IM_API im_status im_scene_load(const char* path, double width, double height, im_scene** out);
IM_API im_status im_scene_save(const im_scene* scene, const char* path);
IM_API void im_scene_free(im_scene* scene);
IM_API size_t im_scene_size(const im_scene* scene);
IM_API size_t im_scene_descriptor_dim(const im_scene* scene);
IM_API im_status im_scene_point(const im_scene* scene, size_t index, double* x, double* y);

/* New scene whose descriptors are log-polar shape context histograms;
 * existing descriptors are replaced.  options_json (NULL or "" for defaults):
 *   {"radial_bins":5,"angular_bins":12,"r_inner":0.125,"r_outer":2.0} */
IM_API im_status im_scene_shape_context(const im_scene* scene, const char* options_json,
                                        im_scene** out);

/* --- templates and match files --------------------------------------- */

IM_API im_status im_template_load(const char* path, im_template** out);
IM_API void im_template_free(im_template* tpl);
IM_API size_t im_template_size(const im_template* tpl);

/* buf receives the target index of each template point; buf_len must be at
 * least the template size. */
IM_API im_status im_matches_load(const char* path, size_t n_template, size_t n_target,
                                 size_t* buf, size_t buf_len);
IM_API im_status im_matches_save(const char* path, const size_t* map, size_t n,
                                 const char* comment /* may be NULL */);

/* kind is "hamming" or "endpoint"; target supplies point positions and the
 * width normalisation for the endpoint loss. */
IM_API im_status im_loss(const char* kind, const size_t* y, const size_t* y_gt, size_t n,
                         const im_scene* target, double* out);

/* --- models ----------------------------------------------------------- */

IM_API im_status im_model_load(const char* path, im_model** out);
IM_API im_status im_model_save(const im_model* model, const char* path);
IM_API void im_model_free(im_model* model);
IM_API size_t im_model_descriptor_dim(const im_model* model);
IM_API int im_model_p(const im_model* model);

/* All-equal weights and unit scale factors ("before learning").
 * features_json enables feature groups, e.g.
 *   {"unary":true,"distance":true,"adjacency":true,
 *    "scaled_distance":true,"angle":true}
 * NULL or "" keeps all five groups on.  descriptor_dim 0 is valid only with
 * the unary group disabled. */
IM_API im_status im_model_default(size_t descriptor_dim, int p, const char* features_json,
                                  im_model** out);

/* --- matching ---------------------------------------------------------- */

/* options_json (NULL or "" for defaults):
 *   {"p": int,          override the model's candidate count
 *    "max_iters": int,  message sweeps (default 20)
 *    "tol": double,     message convergence tolerance (default 1e-9)
 *    "exact": bool}     decode with the exact conditioned recursion
 * When the model uses descriptor features and an input carries none,
 * default shape context descriptors are computed on the fly. */
IM_API im_status im_match(const im_template* tpl, const im_scene* target, const im_model* model,
                          const char* options_json, im_result** out);

IM_API void im_result_free(im_result* result);
IM_API size_t im_result_size(const im_result* result);
IM_API im_status im_result_assignment(const im_result* result, size_t* buf, size_t buf_len);
IM_API double im_result_objective(const im_result* result);
IM_API int im_result_iterations(const im_result* result);
IM_API int im_result_converged(const im_result* result);

/* --- pipelines --------------------------------------------------------- */

/* Train the two-stage model on the dataset described by the experiment
 * config (synthetic: first epsilon/outlier condition; house: first
 * baseline).  Writes model.json, risk_history.csv, risk_history_stage1.csv,
 * prune_recall.csv, slacks.csv, and training_summary.json into out_dir.
 * overrides_json (NULL or "") may set:
 *   {"seed": uint, "p": int, "loss": "hamming"|"endpoint",
 *    "lambda": double (pins both stages, disabling grid search),
 *    "max_iters": int, "jobs": int}
 * out_model may be NULL when only the files are wanted. */
IM_API im_status im_train(const char* config_path, const char* overrides_json,
                          const char* out_dir, im_model** out_model);

/* Evaluate a model over a pairs file: one "template target [matches]" line
 * per pair, paths relative to the pairs file.  Writes a per-pair CSV to
 * report_path and returns the mean loss over pairs with ground truth in
 * *mean_loss (NaN when none).  options_json adds {"loss": ...} to the
 * im_match options. */
IM_API im_status im_eval_pairs(const im_model* model, const char* pairs_path,
                               const char* options_json, const char* report_path,
                               double* mean_loss);

/* Generate a synthetic dataset directory (scenes, templates, ground-truth
 * match files, and per-split pairs manifests).  config_path is a JSON file:
 *   {"n_shape":25,"n_outliers":0,"epsilon":0.0,"n_images":10,"seed":1,
 *    "width":512,"height":512,"silhouette":"optional polyline file"}
 * overrides_json may set {"seed": uint}. */
IM_API im_status im_synth(const char* config_path, const char* overrides_json,
                          const char* out_dir);

/* Run a full experiment config: per condition and seed, train the learned
 * methods and evaluate every requested method on the test pairs.  Writes
 * report.csv plus plot CSVs into out_dir.  overrides_json as in im_train. */
IM_API im_status im_sweep(const char* config_path, const char* overrides_json,
                          const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ISOMATCH_H */
