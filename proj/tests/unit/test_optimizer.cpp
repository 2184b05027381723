#include <doctest.h>

#include <cmath>
#include <limits>

#include "edgecl/error.hpp"
#include "edgecl/optimizer.hpp"
#include "helpers.hpp"

using namespace edgecl;

namespace {

CovariateGrid grid_of(std::array<std::size_t, 5> points, double lo = 0.0, double hi = 1.0) {
  CovariateGrid g;
  for (std::size_t k = 0; k < 5; ++k) g.dims[k] = {k, lo, hi, points[k]};
  return g;
}

double oracle_axis(const CovariateDim &d, std::size_t i) {
  if (d.points == 1) return d.lower;
  if (i + 1 == d.points) return d.upper;
  return d.lower + (d.upper - d.lower) * (static_cast<double>(i) / static_cast<double>(d.points - 1));
}

// Independent nested-loop enumeration; strict improvement only, so the first
// point in lexicographic order wins among exact ties of (p, deviation).
OptimizationResult brute_force(const Forest &f, const FeatureVector &base, const CovariateGrid &g) {
  OptimizationResult best;
  double best_dev = std::numeric_limits<double>::infinity();
  bool have = false;
  std::array<std::size_t, 5> i{};
  for (i[0] = 0; i[0] < g.dims[0].points; ++i[0])
    for (i[1] = 0; i[1] < g.dims[1].points; ++i[1])
      for (i[2] = 0; i[2] < g.dims[2].points; ++i[2])
        for (i[3] = 0; i[3] < g.dims[3].points; ++i[3])
          for (i[4] = 0; i[4] < g.dims[4].points; ++i[4]) {
            std::vector<double> x = base.values;
            GridPoint p;
            double dev = 0.0;
            for (std::size_t k = 0; k < 5; ++k) {
              p[k] = oracle_axis(g.dims[k], i[k]);
              x[g.dims[k].slot] = p[k];
              dev += (p[k] - base.values[g.dims[k].slot]) * (p[k] - base.values[g.dims[k].slot]);
            }
            const double pg = predict_proba(f, x)[0];
            if (!have || pg > best.p_good || (pg == best.p_good && dev < best_dev)) {
              have = true;
              best.best = p;
              best.p_good = pg;
              best_dev = dev;
            }
            ++best.evaluations;
          }
  return best;
}

FeatureVector base_vector(std::mt19937_64 &rng, std::size_t dim) {
  FeatureVector v;
  v.values = testing::random_vector(rng, dim);
  v.sample_id = "base";
  return v;
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("linspace on one dim") {
    const auto pts = build_grid(grid_of({3, 1, 1, 1, 1}));
    REQUIRE(pts.size() == 3);
    CHECK(pts[0][0] == 0.0);
    CHECK(pts[1][0] == 0.5);
    CHECK(pts[2][0] == 1.0);
    for (const auto &p : pts) CHECK(p[1] == 0.0);
  }

  TEST_CASE("all single points give the lowers") {
    auto g = grid_of({1, 1, 1, 1, 1});
    for (std::size_t k = 0; k < 5; ++k) g.dims[k].lower = g.dims[k].upper = static_cast<double>(k);
    const auto pts = build_grid(g);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0] == GridPoint{0, 1, 2, 3, 4});
  }

  TEST_CASE("lexicographic order for (2,2,1,1,1)") {
    const auto pts = build_grid(grid_of({2, 2, 1, 1, 1}));
    REQUIRE(pts.size() == 4);
    CHECK(pts[0] == GridPoint{0, 0, 0, 0, 0});
    CHECK(pts[1] == GridPoint{0, 1, 0, 0, 0});
    CHECK(pts[2] == GridPoint{1, 0, 0, 0, 0});
    CHECK(pts[3] == GridPoint{1, 1, 0, 0, 0});
  }

  TEST_CASE("invalid grids rejected") {
    auto code_of = [](const CovariateGrid &g, std::size_t dim) {
      try {
        g.validate(dim);
      } catch (const Error &e) {
        return e.code();
      }
      return Errc::environment;  // sentinel: no error
    };
    auto g = grid_of({2, 2, 2, 2, 2});
    CHECK_NOTHROW(g.validate(5));
    g.dims[0].lower = 2.0;
    CHECK(code_of(g, 5) == Errc::invalid_spec);
    g = grid_of({0, 2, 2, 2, 2});
    CHECK(code_of(g, 5) == Errc::invalid_spec);
    g = grid_of({10, 10, 10, 10, 11});
    CHECK(code_of(g, 5) == Errc::invalid_spec);  // 110,000 > 100,000
    g = grid_of({2, 2, 2, 2, 2});
    g.dims[1].slot = 0;
    CHECK(code_of(g, 5) == Errc::invalid_spec);
    CHECK(code_of(grid_of({2, 2, 2, 2, 2}), 4) == Errc::invalid_spec);
    g = grid_of({2, 2, 2, 2, 2});
    g.dims[2].upper = std::numeric_limits<double>::infinity();
    CHECK(code_of(g, 5) == Errc::invalid_spec);
  }

  TEST_CASE("single-point grid returns that point") {
    std::mt19937_64 rng(1);
    const Forest f = testing::random_forest(rng, 7, 3, 2);
    const auto base = base_vector(rng, 7);
    auto g = grid_of({1, 1, 1, 1, 1}, 0.3, 0.3);
    const auto r = optimize(f, base, g);
    CHECK(r.evaluations == 1);
    CHECK(r.best == GridPoint{0.3, 0.3, 0.3, 0.3, 0.3});
    std::vector<double> x = base.values;
    for (std::size_t k = 0; k < 5; ++k) x[k] = 0.3;
    CHECK(r.p_good == predict_proba(f, x)[0]);
    CHECK(r.base_sample_id == "base");
    CHECK(r.model_version == f.version);
  }

  TEST_CASE("uniform model ties everywhere and returns the point nearest the base") {
    const Forest f = make_forest(6, {3, 2}, 4);  // uniform leaves
    FeatureVector base;
    base.values = {0.26, 0.74, 0.5, 0.1, 0.9, 3.0};
    const auto r = optimize(f, base, grid_of({5, 5, 5, 5, 5}));
    CHECK(r.p_good == doctest::Approx(0.5));
    CHECK(r.best == GridPoint{0.25, 0.75, 0.5, 0.0, 1.0});
  }

  TEST_CASE("exhaustive oracle agreement, with and without ties") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> n(1, 6);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t dim = 8;
      Forest f = testing::random_forest(rng, dim, 1 + trial % 4, 1 + trial % 3);
      CovariateGrid g;
      std::array<std::size_t, 5> slots{6, 1, 3, 0, 5};
      for (std::size_t k = 0; k < 5; ++k) {
        const double lo = testing::random_vector(rng, 1)[0];
        g.dims[k] = {slots[k], lo, lo + 1.5, n(rng)};
      }
      if (trial % 2 == 1) {
        // Model blind to three covariates: p_good ties along them.
        for (auto &t : f.trees) {
          for (std::size_t node = 0; node < t.biases.size(); ++node) {
            for (std::size_t k = 2; k < 5; ++k) t.weights[node * dim + slots[k]] = 0.0;
          }
        }
      }
      REQUIRE(g.total_points() <= 10000);
      const auto base = base_vector(rng, dim);
      const auto got = optimize(f, base, g);
      const auto want = brute_force(f, base, g);
      REQUIRE(got.evaluations == want.evaluations);
      REQUIRE(got.best == want.best);
      REQUIRE(got.p_good == want.p_good);
    }
  }

  TEST_CASE("refining a grid never lowers p_good") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const Forest f = testing::random_forest(rng, 5, 3, 3);
      const auto base = base_vector(rng, 5);
      double prev = -1.0;
      for (std::size_t n : {2u, 3u, 5u, 9u}) {  // each grid contains the previous one
        const double p = optimize(f, base, grid_of({n, n, n, n, n}, -1.0, 1.0)).p_good;
        REQUIRE(p >= prev);
        prev = p;
      }
    }
  }

  TEST_CASE("determinism") {
    std::mt19937_64 rng(9);
    const Forest f = testing::random_forest(rng, 5, 2, 2);
    const auto base = base_vector(rng, 5);
    const auto a = optimize(f, base, grid_of({4, 4, 4, 4, 4}));
    const auto b = optimize(f, base, grid_of({4, 4, 4, 4, 4}));
    CHECK(a.best == b.best);
    CHECK(a.p_good == b.p_good);
  }

  TEST_CASE("dimension mismatch") {
    const Forest f = make_forest(6, {1, 1}, 0);
    FeatureVector base;
    base.values = {0, 0, 0, 0, 0};
    CHECK_THROWS_AS(optimize(f, base, grid_of({1, 1, 1, 1, 1})), Error);
  }

  TEST_CASE("corrections in sensor units") {
    Scaler sc;
    sc.mean = {10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
    sc.scale = {2.0, 0.5, 4.0, 1.0, 3.0, 7.0};
    const std::vector<std::string> names{"a", "b", "c", "d", "e", "f"};
    FeatureVector base;
    base.values = {0.1, -0.2, 0.3, 0.0, 1.0, 0.0};
    CovariateGrid g;
    for (std::size_t k = 0; k < 5; ++k) g.dims[k] = {k, -2.0, 2.0, 3};

    OptimizationResult same;
    for (std::size_t k = 0; k < 5; ++k) same.best[k] = base.values[k];
    for (const auto &c : suggest_correction(same, base, g, sc, names)) CHECK(c.delta == 0.0);

    OptimizationResult one = same;
    one.best[2] = base.values[2] - 0.5;
    const auto cs = suggest_correction(one, base, g, sc, names);
    REQUIRE(cs.size() == 5);
    CHECK(cs[0].variable == "c");
    CHECK(cs[0].delta < 0.0);
    CHECK(std::abs(cs[0].delta - (-0.5 * 4.0)) <= 1e-10);
    CHECK(std::abs(cs[0].current - (0.3 * 4.0 + 30.0)) <= 1e-10);
    CHECK(std::abs(cs[0].suggested - (-0.2 * 4.0 + 30.0)) <= 1e-10);
    for (std::size_t i = 1; i < cs.size(); ++i) CHECK(cs[i].delta == 0.0);

    OptimizationResult many;
    many.best = {1.0, 1.0, 1.0, 1.0, 1.0};
    const auto ms = suggest_correction(many, base, g, sc, names);
    for (std::size_t i = 1; i < ms.size(); ++i) {
      CHECK(std::abs(ms[i - 1].delta) >= std::abs(ms[i].delta));
    }
    for (const auto &c : ms) {
      const std::size_t slot = static_cast<std::size_t>(c.variable[0] - 'a');
      CHECK(std::abs(c.suggested - (1.0 * sc.scale[slot] + sc.mean[slot])) <= 1e-10);
    }
  }

  TEST_CASE("default grid bounds are the observed range") {
    std::vector<LabeledSample> s(3);
    s[0].features.values = {0, 1, 2, 3, 4, 5, 6};
    s[1].features.values = {0, -1, 5, 3, 9, 5, 6};
    s[2].features.values = {0, 0, 0, 3, 4, 8, 6};
    const std::vector<std::size_t> dyn{1, 2, 3, 4, 5};
    const auto g = default_grid(s, dyn, 7);
    CHECK(g.dims[0].lower == -1.0);
    CHECK(g.dims[0].upper == 1.0);
    CHECK(g.dims[2].lower == 3.0);
    CHECK(g.dims[2].upper == 3.0);
    CHECK(g.total_points() == 16807);
    CHECK_THROWS_AS(default_grid({}, dyn, 7), Error);
  }
}
