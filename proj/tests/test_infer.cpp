// Clique tables, candidate pruning, and the three MAP routines.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "bench/synthetic.hpp"
#include "core/model.hpp"
#include "core/types.hpp"
#include "features/clique.hpp"
#include "features/shape_context.hpp"
#include "infer/map.hpp"
#include "infer/predict.hpp"
#include "infer/tables.hpp"
#include "features/geometry.hpp"
#include "learn/loss.hpp"

using namespace iso;

namespace {

// Random table set over uniform candidate lists: n nodes, p candidates each.
infer::CliqueTableSet random_tables(std::size_t n, std::size_t p, std::mt19937& rng) {
  infer::CliqueTableSet ts;
  ts.n = n;
  ts.cands.lists.assign(n, {});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t u = 0; u < p; ++u) ts.cands.lists[i].push_back(u);
  ts.sizes.assign(n, p);
  std::normal_distribution<double> g(0.0, 1.0);
  ts.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts.t[i].resize(p * p * p);
    for (double& v : ts.t[i]) v = g(rng);
  }
  return ts;
}

struct RandomInstance {
  TemplateShape tpl;
  Scene target;
};

RandomInstance random_instance(std::size_t n, std::size_t m, std::mt19937& rng) {
  std::uniform_real_distribution<double> pos(10.0, 500.0);
  RandomInstance r;
  r.tpl.scene.width = r.tpl.scene.height = 512;
  for (std::size_t i = 0; i < n; ++i) r.tpl.scene.points.push_back({pos(rng), pos(rng)});
  for (std::size_t i = 0; i < n; ++i) r.tpl.order.push_back(i);
  r.target.width = r.target.height = 512;
  for (std::size_t i = 0; i < m; ++i) r.target.points.push_back({pos(rng), pos(rng)});
  r.tpl.scene = feat::with_shape_context(r.tpl.scene, {});
  r.target = feat::with_shape_context(r.target, {});
  return r;
}

} // namespace

TEST_CASE("candidate set helpers") {
  const infer::CandidateSets all = infer::all_candidates(4, 9);
  CHECK(all.n_nodes() == 4);
  for (const auto& l : all.lists) {
    CHECK(l.size() == 9);
    CHECK(std::is_sorted(l.begin(), l.end()));
  }
  CHECK_NOTHROW(all.validate(9));

  infer::CandidateSets bad = all;
  bad.lists[2].push_back(9); // out of range
  CHECK_THROWS_AS(bad.validate(9), Error);
  bad = all;
  bad.lists[1] = {3, 3};
  CHECK_THROWS_AS(bad.validate(9), Error); // duplicate
  bad = all;
  bad.lists[0].clear();
  CHECK_THROWS_AS(bad.validate(9), Error); // empty list
}

TEST_CASE("pruning keeps the p cheapest candidates per node") {
  std::mt19937 rng(2001);
  const RandomInstance inst = random_instance(6, 12, rng);
  std::vector<double> theta0(60, 1.0);
  const int p = 4;
  const infer::CandidateSets cands = infer::prune_candidates(inst.tpl, inst.target, theta0, p);
  REQUIRE(cands.n_nodes() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    REQUIRE(cands.lists[i].size() == p);
    // lists are in cost order (the last entry is the worst-ranked candidate)
    const auto cost = [&](std::size_t u) {
      return feat::collapse_unary(theta0, inst.tpl.descriptor(i), inst.target.descriptors[u]);
    };
    for (std::size_t k = 1; k < cands.lists[i].size(); ++k)
      CHECK(cost(cands.lists[i][k - 1]) <= cost(cands.lists[i][k]) + 1e-12);
    // every kept candidate costs no more than every dropped one
    const double worst_kept = cost(cands.lists[i].back());
    for (std::size_t u = 0; u < 12; ++u) {
      if (std::find(cands.lists[i].begin(), cands.lists[i].end(), u) != cands.lists[i].end())
        continue;
      CHECK(cost(u) >= worst_kept - 1e-12);
    }
  }
  // p larger than the target keeps everything
  const infer::CandidateSets wide = infer::prune_candidates(inst.tpl, inst.target, theta0, 50);
  for (const auto& l : wide.lists) CHECK(l.size() == 12);
}

TEST_CASE("ground truth injection and recall") {
  std::mt19937 rng(2002);
  const RandomInstance inst = random_instance(5, 10, rng);
  std::vector<double> theta0(60, 1.0);
  infer::CandidateSets cands = infer::prune_candidates(inst.tpl, inst.target, theta0, 3);
  Assignment gt;
  gt.map = {9, 8, 7, 6, 5};
  const double recall = infer::ground_truth_recall(cands, gt);
  CHECK(recall >= 0.0);
  CHECK(recall <= 1.0);
  infer::inject_ground_truth(cands, gt);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(cands.lists[i].size() == 3);
    CHECK(std::find(cands.lists[i].begin(), cands.lists[i].end(), gt.map[i]) !=
          cands.lists[i].end());
  }
  CHECK(infer::ground_truth_recall(cands, gt) == 1.0);
  CHECK_NOTHROW(cands.validate(10));
}

TEST_CASE("built tables are negated weighted features with loss folded once") {
  std::mt19937 rng(2003);
  const RandomInstance inst = random_instance(5, 7, rng);
  WeightModel model = default_model(60, 7, FeatureConfig{});
  model.scale_factors = {0.5, 1.5, 2.5, 0.25, 1.0};
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  for (double& v : model.theta) v = w(rng);
  const feat::CliqueContext ctx = feat::make_clique_context(inst.tpl, inst.target, model);
  const infer::CandidateSets cands = infer::all_candidates(5, 7);

  Assignment gt;
  gt.map = {1, 2, 3, 4, 5};
  lap::LossAugment aug{LossKind::hamming, &gt};
  const infer::CliqueTableSet plain = infer::build_tables(ctx, cands, model.theta);
  const infer::CliqueTableSet augmented = infer::build_tables(ctx, cands, model.theta, &aug);

  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t a = 0; a < 7; ++a)
      for (std::size_t b = 0; b < 7; ++b)
        for (std::size_t c = 0; c < 7; ++c) {
          const std::vector<double> f = feat::clique_feature(ctx, i, a, b, c);
          double score = 0;
          for (std::size_t g = 0; g < f.size(); ++g) score -= model.theta[g] * f[g];
          CHECK(plain.at(i, a, b, c) == doctest::Approx(score).epsilon(1e-9));
          const double bonus = learn::node_loss(LossKind::hamming, a, gt.map[i], inst.target, 5);
          CHECK(augmented.at(i, a, b, c) == doctest::Approx(score + bonus).epsilon(1e-9));
        }
}

TEST_CASE("raw tables cache exactly what clique_groups_raw computes") {
  std::mt19937 rng(2004);
  const RandomInstance inst = random_instance(4, 6, rng);
  FeatureConfig fc;
  fc.unary = false;
  const WeightModel model = default_model(0, 6, fc);
  const feat::CliqueContext ctx = feat::make_clique_context(inst.tpl, inst.target, model);
  const infer::CandidateSets cands = infer::all_candidates(4, 6);
  const infer::RawTables raw = infer::compute_raw_tables(ctx, cands);
  REQUIRE(raw.n == 4);
  REQUIRE(raw.groups == 4);
  std::array<double, FeatureConfig::group_count> buf{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = 0; b < 6; ++b)
        for (std::size_t c = 0; c < 6; ++c) {
          const std::size_t g = feat::clique_groups_raw(ctx, i, a, b, c, buf);
          REQUIRE(g == 4);
          for (std::size_t k = 0; k < g; ++k)
            CHECK(raw.raw[i][((a * 6 + b) * 6 + c) * 4 + k] == buf[k]);
        }
}

TEST_CASE("the three MAP routines agree exactly on random instances") {
  std::mt19937 rng(2005);
  for (int it = 0; it < 80; ++it) {
    std::uniform_int_distribution<std::size_t> nn(3, 7), pp(2, 4);
    const infer::CliqueTableSet ts = random_tables(nn(rng), pp(rng), rng);
    const infer::InferenceResult brute = infer::map_bruteforce(ts);
    const infer::InferenceResult cond = infer::map_conditioned(ts);
    const infer::InferenceResult loopy = infer::map_loopy(ts);
    CHECK(cond.objective == brute.objective);
    CHECK(cond.assignment.map == brute.assignment.map);
    CHECK(loopy.objective == brute.objective);
    CHECK(loopy.assignment.map == brute.assignment.map);
    CHECK(infer::evaluate(ts, brute.assignment) == doctest::Approx(brute.objective).epsilon(1e-9));
  }
}

TEST_CASE("objective shifts by the table constants, argmax unchanged") {
  std::mt19937 rng(2006);
  for (int it = 0; it < 20; ++it) {
    infer::CliqueTableSet ts = random_tables(6, 3, rng);
    const infer::InferenceResult base = infer::map_conditioned(ts);
    std::uniform_real_distribution<double> k(-2.0, 2.0);
    double total = 0.0;
    for (std::size_t i = 0; i < ts.n; ++i) {
      const double kappa = k(rng);
      total += kappa;
      for (double& v : ts.t[i]) v += kappa;
    }
    const infer::InferenceResult shifted = infer::map_conditioned(ts);
    CHECK(shifted.assignment.map == base.assignment.map);
    CHECK(shifted.objective == doctest::Approx(base.objective + total).epsilon(1e-9));
  }
}

TEST_CASE("all-zero tables decode to the first candidates") {
  infer::CliqueTableSet ts;
  ts.n = 5;
  ts.cands.lists = {{2, 4}, {1, 3}, {0, 5}, {2, 3}, {1, 4}};
  ts.sizes = {2, 2, 2, 2, 2};
  ts.t.assign(5, std::vector<double>(8, 0.0));
  for (const auto run : {infer::map_bruteforce, infer::map_conditioned}) {
    const infer::InferenceResult res = run(ts);
    CHECK(res.objective == 0.0);
    CHECK(res.assignment.map == std::vector<std::size_t>{2, 1, 0, 2, 1});
  }
  const infer::InferenceResult loopy = infer::map_loopy(ts);
  CHECK(loopy.assignment.map == std::vector<std::size_t>{2, 1, 0, 2, 1});
}

TEST_CASE("loopy options: exact routing and forced sweeps") {
  std::mt19937 rng(2007);
  const infer::CliqueTableSet ts = random_tables(8, 4, rng);
  infer::LoopyOptions exact;
  exact.exact = true;
  const infer::InferenceResult res = infer::map_loopy(ts, exact);
  const infer::InferenceResult cond = infer::map_conditioned(ts);
  CHECK(res.iterations == 0);
  CHECK(res.objective == cond.objective);
  CHECK(res.assignment.map == cond.assignment.map);

  infer::LoopyOptions forced;
  forced.max_iters = 7;
  forced.force_all_iters = true;
  CHECK(infer::map_loopy(ts, forced).iterations == 7);

  CHECK(infer::timed_sweeps(ts, 3) == infer::timed_sweeps(ts, 3)); // deterministic checksum
}

TEST_CASE("evaluate validates its assignment") {
  std::mt19937 rng(2008);
  const infer::CliqueTableSet ts = random_tables(4, 3, rng);
  Assignment bad;
  bad.map = {0, 1};
  CHECK_THROWS_AS(infer::evaluate(ts, bad), Error);
  bad.map = {0, 1, 2, 9}; // 9 is not a candidate of node 3
  CHECK_THROWS_AS(infer::evaluate(ts, bad), Error);
}

TEST_CASE("brute force refuses state spaces that cannot be enumerated") {
  // 14 nodes x 4 candidates = 4^14 > 1e7 states
  std::mt19937 rng(2009);
  const infer::CliqueTableSet ts = random_tables(14, 4, rng);
  CHECK_THROWS_AS(infer::map_bruteforce(ts), Error);
}

TEST_CASE("loopy converges quickly on geometric instances") {
  bench::SyntheticConfig cfg;
  cfg.n_shape = 20;
  cfg.n_outliers = 8;
  cfg.epsilon = 4.0;
  cfg.n_images = 2;
  cfg.seed = 99;
  const bench::SyntheticDataset ds = bench::gen_synthetic(cfg);
  const std::vector<MatchInstance> insts = [&] {
    auto v = bench::split_pairs(ds, 0);
    for (auto& inst : v) {
      inst.tpl.scene = feat::with_shape_context(inst.tpl.scene, {});
      inst.target = feat::with_shape_context(inst.target, {});
    }
    return v;
  }();
  REQUIRE(insts.size() == 1);
  FeatureConfig fc;
  fc.adjacency = false;
  const WeightModel model = default_model(60, 10, fc);
  const auto& inst = insts[0];
  const feat::CliqueContext ctx = feat::make_clique_context(inst.tpl, inst.target, model);
  const infer::CandidateSets cands =
      infer::prune_candidates(inst.tpl, inst.target, model.theta0, model.p);
  const infer::CliqueTableSet ts = infer::build_tables(ctx, cands, model.theta);
  const infer::InferenceResult res = infer::map_loopy(ts);
  CHECK(res.converged);
  CHECK(res.iterations <= 20);
  // decoded result is certified against the exact recursion
  const infer::InferenceResult cond = infer::map_conditioned(ts);
  CHECK(res.objective == doctest::Approx(cond.objective).epsilon(1e-9));
}

TEST_CASE("predict wires pruning, tables, and decoding together") {
  std::mt19937 rng(2010);
  const RandomInstance inst = random_instance(7, 11, rng);
  const WeightModel model = default_model(60, 5, FeatureConfig{});
  Assignment gt;
  gt.map = {0, 1, 2, 3, 4, 5, 6};
  const infer::Prediction pred = infer::predict(inst.tpl, inst.target, model, {}, &gt);
  CHECK(pred.assignment.size() == 7);
  CHECK(pred.gt_recall >= 0.0);
  CHECK(pred.gt_recall <= 1.0);
  for (std::size_t u : pred.assignment.map) CHECK(u < 11);

  // without the unary group there is nothing to prune with: full candidates
  FeatureConfig fc;
  fc.unary = false;
  fc.adjacency = false;
  const WeightModel geo = default_model(0, 3, fc);
  const infer::Prediction full = infer::predict(inst.tpl, inst.target, geo);
  CHECK(full.assignment.size() == 7);
  CHECK(full.gt_recall == -1.0);

  const infer::Prediction lin = infer::predict_linear(inst.tpl, inst.target, model.theta0);
  CHECK(lin.assignment.size() == 7);
  const lap::CostMatrix scores = lap::unary_scores(inst.tpl, inst.target, model.theta0);
  CHECK(lin.objective ==
        doctest::Approx(lap::assignment_score(scores, lin.assignment)).epsilon(1e-12));
}
