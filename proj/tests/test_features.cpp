// Geometric features, Delaunay adjacency, shape context, and clique features
// cross-checked against the independent reference implementations.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "core/model.hpp"
#include "core/types.hpp"
#include "features/clique.hpp"
#include "features/delaunay.hpp"
#include "features/geometry.hpp"
#include "features/shape_context.hpp"
#include "support/oracles.hpp"

using namespace iso;

namespace {

Point2 rand_point(std::mt19937& rng, double lo = 10.0, double hi = 500.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

Point2 transform(const Point2& p, double ca, double sa, double scale, double tx, double ty,
                 bool reflect) {
  const double x = reflect ? -p.x : p.x;
  return {scale * (ca * x - sa * p.y) + tx, scale * (sa * x + ca * p.y) + ty};
}

} // namespace

TEST_CASE("pointwise features match the reference formulas") {
  std::mt19937 rng(101);
  for (int it = 0; it < 1000; ++it) {
    const Point2 a = rand_point(rng), b = rand_point(rng), c = rand_point(rng);
    CHECK(feat::d1(a, b, 512.0) == doctest::Approx(oracle::d1(a, b, 512.0)).epsilon(1e-12));
    CHECK(feat::d2(a, b, c) == doctest::Approx(oracle::d2(a, b, c)).epsilon(1e-12));
    CHECK(feat::angle(a, b, c) == doctest::Approx(oracle::angle(a, b, c)).epsilon(1e-7));
    const Point2 y1 = rand_point(rng), y2 = rand_point(rng), y3 = rand_point(rng);
    const double e1 = oracle::d1(a, b, 512.0) - oracle::d1(y1, y2, 480.0);
    CHECK(feat::phi1(a, b, y1, y2, 512.0, 480.0) == doctest::Approx(e1 * e1).epsilon(1e-12));
    const double e2 = oracle::d2(a, b, c) - oracle::d2(y1, y2, y3);
    CHECK(feat::phi2(a, b, c, y1, y2, y3) == doctest::Approx(e2 * e2).epsilon(1e-12));
  }
}

TEST_CASE("angle is measured at the middle argument") {
  const Point2 a{1, 0}, b{0, 0}, c{0, 1};
  CHECK(feat::angle(a, b, c) == doctest::Approx(M_PI / 2).epsilon(1e-15));
  CHECK(feat::angle(b, a, c) == doctest::Approx(M_PI / 4).epsilon(1e-12));
  const Point2 d{2, 0};
  CHECK(feat::angle(a, b, d) == doctest::Approx(0.0));         // same ray
  CHECK(feat::angle(Point2{-1, 0}, b, d) == doctest::Approx(M_PI)); // opposite rays
}

TEST_CASE("degenerate geometry raises degenerate errors") {
  const Point2 p{5, 5};
  CHECK_THROWS_AS(feat::d2(p, p, p), Error);
  CHECK_THROWS_AS(feat::angle(p, p, Point2{1, 1}), Error);
  CHECK_THROWS_AS(feat::angle(Point2{1, 1}, p, p), Error);
  CHECK_THROWS_AS(feat::d1(p, p, 0.0), Error);
  // two coincident + one distinct is fine for d2 (mean positive)
  CHECK_NOTHROW(feat::d2(p, p, Point2{1, 1}));
}

TEST_CASE("d2 and angle are invariant under similarity transforms") {
  std::mt19937 rng(202);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI), sc(0.1, 10.0), tr(-100, 100);
  for (int it = 0; it < 200; ++it) {
    const Point2 a = rand_point(rng), b = rand_point(rng), c = rand_point(rng);
    const double phi = ang(rng);
    const double ca = std::cos(phi), sa = std::sin(phi);
    const double s = sc(rng), tx = tr(rng), ty = tr(rng);
    const bool refl = it % 2 == 0;
    const Point2 ta = transform(a, ca, sa, s, tx, ty, refl);
    const Point2 tb = transform(b, ca, sa, s, tx, ty, refl);
    const Point2 tc = transform(c, ca, sa, s, tx, ty, refl);
    CHECK(feat::d2(ta, tb, tc) == doctest::Approx(feat::d2(a, b, c)).epsilon(1e-9));
    CHECK(feat::angle(ta, tb, tc) == doctest::Approx(feat::angle(a, b, c)).epsilon(1e-9));
  }
}

TEST_CASE("phi0 and collapse_unary agree") {
  std::mt19937 rng(303);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int it = 0; it < 100; ++it) {
    std::vector<double> s(8), t(8), w(8);
    for (auto* v : {&s, &t, &w})
      for (double& x : *v) x = u(rng);
    const std::vector<double> lib = feat::phi0(s, t);
    const std::vector<double> ref = oracle::phi0(s, t);
    REQUIRE(lib.size() == 8);
    double dot = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(lib[i] == doctest::Approx(ref[i]).epsilon(1e-12));
      dot += w[i] * ref[i];
    }
    CHECK(feat::collapse_unary(w, s, t) == doctest::Approx(dot).epsilon(1e-12));
  }
  CHECK_THROWS_AS(feat::phi0({1, 2}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(feat::phi0({}, {}), Error);
}

TEST_CASE("delaunay matches a frozen externally computed triangulation") {
  const std::vector<Point2> pts = {
      {238.31455303007246, 68.340304970961654},  {152.57813176643674, 130.65251414388405},
      {347.55186087708063, 265.72301365130568},  {78.583385262482935, 443.1817263264158},
      {82.622894484476063, 463.06848293399435},  {168.55373750797168, 432.53549080149043},
      {285.12683952694778, 162.05715231087683},  {345.23367845474093, 352.27594934556885},
      {22.362838526824071, 191.43380096542697},  {44.586733269366732, 118.96645623853757},
      {49.341825445160943, 31.486742282668839},  {47.275562947912441, 386.36751488223126},
      {138.58875590821265, 303.01591962735728},  {178.45081414409083, 44.052924561544891},
      {132.64332474331587, 329.03428692836928},  {248.88427410412584, 23.611428047926463},
      {177.54155717161117, 272.11782012082836},  {277.0941619517144, 22.018702097536927},
      {289.11062657511695, 399.85399859604615},  {44.513737150149169, 309.25479553141531},
      {362.95945569577225, 384.81000537610839},  {120.48009408544989, 289.73777798424828},
      {300.27995512826413, 423.27669253982907},  {95.049256785809916, 451.99143572270418},
      {447.19932078569929, 86.974540787505916},  {128.14006003919297, 210.66083211330567},
      {90.956399118386628, 335.68297982607044},  {166.07402319029575, 29.619577927266938},
      {417.44326766986694, 110.49723091593673},  {414.47759016472162, 215.02268549487451},
  };
  const std::set<std::pair<std::size_t, std::size_t>> expected = {
      {0, 1},   {0, 6},   {0, 13},  {0, 15},  {0, 17},  {1, 6},   {1, 9},   {1, 10},  {1, 13},
      {1, 25},  {1, 27},  {2, 6},   {2, 7},   {2, 16},  {2, 29},  {3, 4},   {3, 11},  {3, 23},
      {3, 26},  {4, 5},   {4, 11},  {4, 22},  {4, 23},  {5, 14},  {5, 18},  {5, 22},  {5, 23},
      {5, 26},  {6, 16},  {6, 17},  {6, 25},  {6, 28},  {6, 29},  {7, 16},  {7, 18},  {7, 20},
      {7, 29},  {8, 9},   {8, 10},  {8, 11},  {8, 19},  {8, 25},  {9, 10},  {9, 25},  {10, 15},
      {10, 17}, {10, 27}, {11, 19}, {11, 26}, {12, 14}, {12, 16}, {12, 21}, {13, 15}, {13, 27},
      {14, 16}, {14, 18}, {14, 21}, {14, 26}, {15, 17}, {15, 27}, {16, 18}, {16, 21}, {16, 25},
      {17, 24}, {17, 28}, {18, 20}, {18, 22}, {19, 21}, {19, 25}, {19, 26}, {20, 22}, {20, 29},
      {21, 25}, {21, 26}, {23, 26}, {24, 28}, {24, 29}, {28, 29},
  };
  const feat::AdjacencyGraph g = feat::delaunay(pts);
  std::set<std::pair<std::size_t, std::size_t>> got(g.edges.begin(), g.edges.end());
  CHECK(got == expected);
  for (const auto& [i, j] : expected) {
    CHECK(g.has_edge(i, j));
    CHECK(g.has_edge(j, i));
  }
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK_FALSE(g.has_edge(3, 3));
}

TEST_CASE("delaunay structural properties on random point sets") {
  std::mt19937 rng(404);
  for (int it = 0; it < 25; ++it) {
    std::uniform_int_distribution<std::size_t> nn(4, 40);
    const std::size_t n = nn(rng);
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(rand_point(rng));
    const feat::AdjacencyGraph g = feat::delaunay(pts);
    CHECK(g.n == n);
    CHECK(g.edges.size() <= 3 * n - 6);  // planar bound
    CHECK(g.edges.size() >= n - 1);      // triangulations are connected
    CHECK(std::is_sorted(g.edges.begin(), g.edges.end()));
    // matrix lookup consistent with the edge list
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (g.has_edge(i, j)) ++count;
    CHECK(count == g.edges.size());
    // connectivity via union-find over edges
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [a, b] : g.edges) parent[find(a)] = find(b);
    for (std::size_t i = 1; i < n; ++i) CHECK(find(i) == find(0));
  }
}

TEST_CASE("delaunay rejects degenerate inputs") {
  CHECK_THROWS_AS(feat::delaunay({{0, 0}, {1, 1}}), Error);
  CHECK_THROWS_AS(feat::delaunay({{0, 0}, {1, 1}, {2, 2}, {3, 3}}), Error); // collinear
}

TEST_CASE("adjacency feature is the conjunction of the two edge tests") {
  const std::vector<Point2> a = {{0, 0}, {10, 0}, {0, 10}, {10, 10}, {5, 5}};
  const feat::AdjacencyGraph g = feat::delaunay(a);
  // the centre splits both diagonals: it connects to every corner, and the
  // corner-to-opposite-corner pairs are not edges
  CHECK(g.has_edge(4, 0));
  CHECK(g.has_edge(4, 3));
  CHECK_FALSE(g.has_edge(0, 3));
  CHECK_FALSE(g.has_edge(1, 2));
  CHECK(feat::adjacency_feature(g, g, 4, 0, 4, 1) == 1.0);
  CHECK(feat::adjacency_feature(g, g, 4, 0, 0, 3) == 0.0); // target pair not an edge
  CHECK(feat::adjacency_feature(g, g, 0, 3, 4, 0) == 0.0); // template pair not an edge
}

TEST_CASE("shape context matches the reference binning") {
  std::mt19937 rng(505);
  const feat::ShapeContextConfig cfg;
  for (int it = 0; it < 10; ++it) {
    Scene s;
    s.width = s.height = 512;
    for (int i = 0; i < 25; ++i) s.points.push_back(rand_point(rng));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::vector<double> lib = feat::shape_context(s, i, cfg);
      const std::vector<double> ref = oracle::shape_context(
          s.points, i, cfg.radial_bins, cfg.angular_bins, cfg.r_inner, cfg.r_outer);
      REQUIRE(lib.size() == ref.size());
      for (std::size_t k = 0; k < lib.size(); ++k)
        CHECK(lib[k] == doctest::Approx(ref[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("shape context histograms are normalised and rotate with the scene") {
  std::mt19937 rng(606);
  Scene s;
  s.width = s.height = 1000;
  for (int i = 0; i < 20; ++i) s.points.push_back(rand_point(rng, -200, 200));
  const feat::ShapeContextConfig cfg;

  // rotating every point by one angular bin permutes the angular slots
  const double delta = 2.0 * M_PI / cfg.angular_bins;
  Scene rot = s;
  for (Point2& p : rot.points) {
    const double x = p.x * std::cos(delta) - p.y * std::sin(delta);
    const double y = p.x * std::sin(delta) + p.y * std::cos(delta);
    p = {x, y};
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::vector<double> h = feat::shape_context(s, i, cfg);
    double total = 0;
    for (double v : h) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> hr = feat::shape_context(rot, i, cfg);
    for (int r = 0; r < cfg.radial_bins; ++r)
      for (int a = 0; a < cfg.angular_bins; ++a) {
        const int a2 = (a + 1) % cfg.angular_bins;
        CHECK(hr[static_cast<std::size_t>(r * cfg.angular_bins + a2)] ==
              doctest::Approx(h[static_cast<std::size_t>(r * cfg.angular_bins + a)])
                  .epsilon(1e-12));
      }
  }
}

TEST_CASE("with_shape_context fills every point and keeps geometry") {
  std::mt19937 rng(707);
  Scene s;
  s.width = s.height = 512;
  for (int i = 0; i < 12; ++i) s.points.push_back(rand_point(rng));
  const Scene d = feat::with_shape_context(s, feat::ShapeContextConfig{});
  CHECK(d.descriptor_dim() == 60);
  CHECK(d.descriptors.size() == 12);
  CHECK(d.points[3].x == s.points[3].x);
  // ensure_descriptors is a no-op on a scene that already has them
  const Scene e = feat::ensure_descriptors(d, feat::ShapeContextConfig{});
  CHECK(e.descriptors == d.descriptors);
}

TEST_CASE("shape context config validation") {
  feat::ShapeContextConfig cfg;
  cfg.radial_bins = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.r_inner = 3.0; // >= r_outer
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_THROWS_AS(feat::shape_context(Scene{}, 0, feat::ShapeContextConfig{}), Error);
}

TEST_CASE("clique features follow the fixed group order and scale factors") {
  std::mt19937 rng(808);
  TemplateShape tpl;
  tpl.scene.width = tpl.scene.height = 512;
  for (int i = 0; i < 8; ++i) tpl.scene.points.push_back(rand_point(rng));
  tpl.order = {0, 1, 2, 3, 4, 5, 6, 7};
  Scene target;
  target.width = target.height = 480;
  for (int i = 0; i < 10; ++i) target.points.push_back(rand_point(rng));

  tpl.scene = feat::with_shape_context(tpl.scene, {});
  target = feat::with_shape_context(target, {});

  WeightModel model = default_model(60, 5, FeatureConfig{});
  model.scale_factors = {1.0, 2.0, 3.0, 4.0, 5.0};
  const feat::CliqueContext ctx = feat::make_clique_context(tpl, target, model);
  const feat::AdjacencyGraph tpl_adj = feat::delaunay(tpl.scene.points);
  const feat::AdjacencyGraph tgt_adj = feat::delaunay(target.points);

  for (std::size_t i = 0; i < tpl.size(); ++i) {
    const std::size_t i1 = tpl.next(i), i2 = tpl.next2(i);
    for (std::size_t trial = 0; trial < 8; ++trial) {
      std::uniform_int_distribution<std::size_t> pick(0, target.size() - 1);
      const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
      if (a == b || b == c || a == c) continue;
      const Point2 &s1 = tpl.point(i), &s2 = tpl.point(i1), &s3 = tpl.point(i2);
      const Point2 &u1 = target.points[a], &u2 = target.points[b], &u3 = target.points[c];

      const double g0 = feat::collapse_unary(model.theta0, tpl.descriptor(i),
                                             target.descriptors[a]);
      const double g1 = oracle::d1(s1, s2, 512) - oracle::d1(u1, u2, 480);
      const double g1b = oracle::d1(s1, s3, 512) - oracle::d1(u1, u3, 480);
      const double g2 = feat::adjacency_feature(tpl_adj, tgt_adj, tpl.order[i], tpl.order[i1], a,
                                                b) +
                        feat::adjacency_feature(tpl_adj, tgt_adj, tpl.order[i], tpl.order[i2], a,
                                                c);
      const double g3 = oracle::d2(s1, s2, s3) - oracle::d2(u1, u2, u3);
      const double g3b = oracle::d2(s1, s3, s2) - oracle::d2(u1, u3, u2);
      const double g4 = oracle::angle(s1, s2, s3) - oracle::angle(u1, u2, u3);

      const std::vector<double> f = feat::clique_feature(ctx, i, a, b, c);
      REQUIRE(f.size() == 5);
      CHECK(f[0] == doctest::Approx(1.0 * g0).epsilon(1e-9));
      CHECK(f[1] == doctest::Approx(2.0 * (g1 * g1 + g1b * g1b)).epsilon(1e-9));
      CHECK(f[2] == doctest::Approx(3.0 * g2).epsilon(1e-12));
      CHECK(f[3] == doctest::Approx(4.0 * (g3 * g3 + g3b * g3b)).epsilon(1e-9));
      CHECK(f[4] == doctest::Approx(5.0 * g4 * g4).epsilon(1e-7));
    }
  }
}

TEST_CASE("clique features substitute the penalty on degenerate triples") {
  TemplateShape tpl;
  tpl.scene.width = tpl.scene.height = 100;
  tpl.scene.points = {{10, 10}, {50, 10}, {30, 40}, {70, 70}};
  tpl.order = {0, 1, 2, 3};
  Scene target;
  target.width = target.height = 100;
  target.points = {{20, 20}, {20, 20}, {80, 30}, {40, 90}}; // 0 and 1 coincide

  FeatureConfig fc;
  fc.unary = false;
  fc.adjacency = false;
  WeightModel model = default_model(0, 4, fc);
  model.degenerate_penalty = 7.5;
  const feat::CliqueContext ctx = feat::make_clique_context(tpl, target, model);

  // candidate triple (0, 1, 2): points 0 and 1 coincide -> the angle at the
  // middle point is undefined; scaled distance is fine (mean > 0)
  const std::vector<double> f = feat::clique_feature(ctx, 0, 0, 1, 2);
  REQUIRE(f.size() == 3);
  CHECK(f[2] == 7.5);        // angle group hit the penalty
  CHECK(f[1] != doctest::Approx(7.5)); // scaled distance still computed

  // fully coincident triple: both groups hit the penalty
  const std::vector<double> g = feat::clique_feature(ctx, 0, 1, 1, 1);
  CHECK(g[1] == 7.5);
  CHECK(g[2] == 7.5);
}

TEST_CASE("unary cost matrix requires descriptors") {
  TemplateShape tpl;
  tpl.scene.width = tpl.scene.height = 100;
  tpl.scene.points = {{1, 1}, {2, 2}, {3, 1}};
  tpl.order = {0, 1, 2};
  Scene target = tpl.scene;
  CHECK_THROWS_AS(feat::unary_cost_matrix(tpl, target, {1.0}), Error);
}
