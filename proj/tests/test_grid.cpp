#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gen.hpp"
#include "incpose/errors.hpp"
#include "incpose/naive.hpp"
#include "scenes.hpp"

using namespace incpose;

TEST_CASE("build_grid cell counts") {
  const AnalyticConstants k;
  auto g = build_grid(0.25, k);
  CHECK(g.counts == std::array<std::int32_t, 4>{4, 4, 2, 2});
  g = build_grid(0.5, k);
  CHECK(g.counts[0] == 2);
  g = build_grid(0.03, k);
  CHECK(g.counts == std::array<std::int32_t, 4>{34, 34, 12, 17});
  CHECK(g.cell[2] == doctest::Approx(2 * std::sqrt(2.0) * 0.03));
  CHECK(g.cell[3] == doctest::Approx(4 * 0.03));
}

TEST_CASE("linear and unlinear are inverse") {
  const auto g = build_grid(0.1, AnalyticConstants{});
  for (std::int64_t l = 0; l < g.size(); l += 7) CHECK(g.linear(g.unlinear(l)) == l);
  const Pose c = g.center(g.unlinear(123));
  CHECK(g.locate(c).value() == g.unlinear(123));
  CHECK_FALSE(g.locate(Pose{1.5, 0, 0, 0}).has_value());
}

TEST_CASE("cells_crossed contains every supersampled surface cell") {
  const AnalyticConstants k;
  const auto g = build_grid(0.1, k);
  gen::Rng r(21);
  for (int i = 0; i < 60; ++i) {
    const Correspondence c = gen::seen_from(r, gen::pose(r));
    const auto cells = cells_crossed(c, g, k);
    CHECK(std::is_sorted(cells.begin(), cells.end()));
    const int m = 10 * g.counts[0];
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b <= m; ++b) {
        const double x = double(a) / m, y = double(b) / m;
        const double dx = c.w1 - x, dy = c.w2 - y;
        if (dx * dx + dy * dy < k.a || std::abs(dx + c.xi * dy) < k.a) continue;
        const auto s = try_surface_parametric(c, x, y);
        if (!s) continue;
        const auto cell = g.locate(Pose{x, y, s->z, s->kappa});
        if (!cell) continue;
        CHECK(std::binary_search(cells.begin(), cells.end(), g.linear(*cell)));
      }
  }
}

TEST_CASE("naive: parallel equals serial") {
  SceneConfig sc;
  sc.n = 600;
  sc.seed = 4;
  const auto scene = generate_scene(sc);
  const AnalyticConstants k;
  const auto par = naive_count(scene.correspondences, 0.05, k);
  const auto ser = naive_count_serial(scene.correspondences, 0.05, k);
  CHECK(par.hist == ser.hist);
}

TEST_CASE("naive: one surface counts once per cell, copies multiply") {
  gen::Rng r(22);
  const AnalyticConstants k;
  const Correspondence c = gen::seen_from(r, gen::pose(r));
  const std::vector<Correspondence> one{c};
  const auto h1 = naive_count(one, 0.05, k).hist;
  std::uint64_t cells = 0;
  h1.for_each_nonzero([&](std::int64_t, std::uint32_t n) {
    CHECK(n == 1);
    ++cells;
  });
  CHECK(cells == cells_crossed(c, h1.grid(), k).size());
  const std::vector<Correspondence> five(5, c);
  const auto h5 = naive_count(five, 0.05, k).hist;
  h1.for_each_nonzero([&](std::int64_t l, std::uint32_t n) { CHECK(h5.at(l) == 5 * n); });
  CHECK(h5.total() == 5 * h1.total());
}

TEST_CASE("exact count equals the oracle on separated scenes") {
  const AnalyticConstants k;
  const double eps = 0.1;
  for (std::uint64_t seed : {31u, 32u}) {
    const auto scene = scenes::separated_scene(seed, 60, eps, 0.5, 0.01, k);
    NaiveOptions no;
    no.keep_lists = true;
    const auto idx = naive_count(scene.correspondences, eps, k, no);
    for (std::int64_t l = 0; l < idx.grid.size(); ++l) {
      const Pose v = idx.grid.center(idx.grid.unlinear(l));
      const auto want = oracle_count(v, scene.correspondences, eps).count;
      CHECK(exact_count_at(v, scene.correspondences, eps, idx) == want);
      CHECK(idx.hist.at(l) >= want);
    }
  }
}

TEST_CASE("oracle count on no surfaces is zero") {
  CHECK(oracle_count(Pose{0.5, 0.5, 0.5, 0}, {}, 0.05).count == 0);
}

TEST_CASE("oracle count with conditions skips pairs that fail them") {
  const AnalyticConstants k;
  const Pose v{0.5, 0.5, 0.5, 0};
  const std::vector<Correspondence> cs{{0.55, 0.5, 0.5, 0, 0}, {1.0, 0.5, 0.5, 0, 0}};
  CHECK(oracle_count(v, cs, 0.05).count == 2);
  CHECK(oracle_count(v, cs, 0.05, &k).count == 1);
}

TEST_CASE("best_vertex and top_cells") {
  const auto g = build_grid(0.25, AnalyticConstants{});
  IncidenceHistogram h(g, true);
  CHECK_THROWS_AS(best_vertex(h), EmptyHistogram);
  h.add(g.linear({1, 2, 0, 1}), 3);
  auto b = best_vertex(h);
  CHECK(b.cell == CellIndex{1, 2, 0, 1});
  CHECK(b.count == 3);
  CHECK(b.pose.x == doctest::Approx(0.375));
  h.add(g.linear({0, 3, 1, 0}), 3);
  b = best_vertex(h);
  CHECK(b.cell == CellIndex{0, 3, 1, 0});
  h.add(g.linear({3, 3, 1, 1}), 1);
  const auto top = top_cells(h, 5);
  REQUIRE(top.size() == 3);
  CHECK(top[0].cell == CellIndex{0, 3, 1, 0});
  CHECK(top[1].cell == CellIndex{1, 2, 0, 1});
  CHECK(top[2].count == 1);
}

TEST_CASE("sparse and dense histograms agree") {
  const auto g = build_grid(0.1, AnalyticConstants{});
  IncidenceHistogram d(g, true), s(g, false);
  gen::Rng r(23);
  for (int i = 0; i < 500; ++i) {
    const auto l = std::int64_t(r.integer(0, int(g.size() - 1)));
    d.add(l);
    s.add(l);
  }
  CHECK(d == s);
  CHECK(d.total() == 500);
  CHECK(best_vertex(d).cell == best_vertex(s).cell);
}
