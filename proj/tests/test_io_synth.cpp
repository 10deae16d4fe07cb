#include <doctest.h>

#include <cmath>
#include <sstream>

#include "incpose/errors.hpp"
#include "incpose/io.hpp"
#include "incpose/synth.hpp"

using namespace incpose;

TEST_CASE("parse a single line") {
  std::istringstream in("1,0,0,0,0\n");
  const auto cs = parse_correspondences(in);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].w1 == 1);
  CHECK(cs[0].xi == 0);
}

TEST_CASE("parse skips comments and blank lines") {
  std::istringstream in("# header\n0.1,0.2,0.3,0.4,0.5\n\n  # note\n0.5,0.5,0.5,-1,2\n");
  const auto cs = parse_correspondences(in);
  REQUIRE(cs.size() == 2);
  CHECK(cs[1].xi == -1);
  CHECK(cs[1].eta == 2);
}

TEST_CASE("parse errors carry the line number") {
  std::istringstream bad("# ok\n0.1,0.2,0.3,0.4,0.5\n0.1,0.2,x,0.4,0.5\n");
  try {
    parse_correspondences(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream few("0.1,0.2,0.3,0.4\n");
  CHECK_THROWS_AS(parse_correspondences(few), ParseError);
  std::istringstream empty("# nothing\n\n");
  CHECK_THROWS_AS(parse_correspondences(empty), EmptyInput);
}

TEST_CASE("write then parse round-trips exactly") {
  SceneConfig sc;
  sc.n = 50;
  const auto scene = generate_scene(sc);
  std::stringstream io;
  write_correspondences(io, scene.correspondences);
  const auto back = parse_correspondences(io);
  REQUIRE(back.size() == scene.correspondences.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].w1 == scene.correspondences[i].w1);
    CHECK(back[i].eta == scene.correspondences[i].eta);
  }
}

TEST_CASE("normalization maps into the unit cube and inverts") {
  std::vector<Correspondence> cs{{2, 4, 1, 0.5, 0.1}, {6, 2, 3, -0.5, 0.2}};
  const auto orig = cs;
  const Normalization nz = normalize(cs);
  CHECK_FALSE(nz.identity());
  CHECK(nz.scale == doctest::Approx(0.25));
  for (const auto& c : cs) {
    CHECK(c.w1 >= 0);
    CHECK(c.w1 <= 1);
    CHECK(c.w3 >= 0);
  }
  CHECK(cs[0].xi == orig[0].xi);
  const Pose p = nz.to_original(Pose{cs[1].w1, cs[1].w2, cs[1].w3, 0.3});
  CHECK(p.x == doctest::Approx(6));
  CHECK(p.y == doctest::Approx(2));
  CHECK(p.z == doctest::Approx(3));
  CHECK(p.kappa == 0.3);

  std::vector<Correspondence> unit{{0.1, 0.2, 0.3, 0, 0}};
  CHECK(normalize(unit).identity());
}

TEST_CASE("ingest filter drops out-of-frame and non-finite entries") {
  std::vector<Correspondence> cs{{0.1, 0.1, 0.1, 0, 0}, {0.1, 0.1, 0.1, 5, 0}, {0.1, NAN, 0.1, 0, 0}};
  CHECK(ingest_filter(cs, AnalyticConstants{}) == 2);
  CHECK(cs.size() == 1);
}

TEST_CASE("run config validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.epsilon = 0.5;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.top_k = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("result document and strip_timing") {
  IncidenceResult r;
  r.method = "naive";
  r.epsilon_requested = r.epsilon_effective = 0.03;
  r.candidates.push_back(Candidate{Pose{0.3, 0.2, 0.1, 0.6}, 7, CellIndex{1, 2, 3, 4}});
  r.diagnostics["cells"] = 12;
  RunConfig cfg;
  RunInfo info;
  info.n_input = info.n_filtered = 10;
  info.wall_seconds = 1.5;
  const std::string doc = format_result(r, cfg, info);
  CHECK(doc.find("method=naive") != std::string::npos);
  CHECK(doc.find("candidate.0.count=7") != std::string::npos);
  CHECK(doc.find("timing.wall_seconds=") != std::string::npos);
  const std::string stripped = strip_timing(doc);
  CHECK(stripped.find("timing.") == std::string::npos);
  info.wall_seconds = 9;
  CHECK(strip_timing(format_result(r, cfg, info)) == stripped);
  CHECK(format_error("ParseError", "line 3: bad") == "error.kind=ParseError\nerror.message=line 3: bad\n");
}

TEST_CASE("sweep parsing") {
  std::istringstream in("# method,n,epsilon,inlier_ratio,noise_sigma,seed\nnaive,1000,0.05,0.1,0.02,3\n");
  const auto cfgs = parse_sweep(in);
  REQUIRE(cfgs.size() == 1);
  CHECK(cfgs[0].method == Method::Naive);
  CHECK(cfgs[0].n == 1000);
  CHECK(cfgs[0].seed == 3);
  std::istringstream bad("naive,1000,0.05\n");
  CHECK_THROWS_AS(parse_sweep(bad), ParseError);
}

TEST_CASE("bench records round-trip") {
  BenchRecord a;
  a.config.method = Method::PrimalDual;
  a.config.n = 500;
  a.ok = true;
  a.median_seconds = 0.25;
  a.recovered = Pose{0.3, 0.2, 0.1, 0.6};
  a.count = 42;
  BenchRecord b = a;
  b.ok = false;
  b.error = "EmptyInput: no rows";
  const std::vector<BenchRecord> recs{a, b};
  std::stringstream io;
  write_bench_records(io, recs);
  const auto back = read_bench_records(io);
  REQUIRE(back.size() == 2);
  CHECK(back[0].config.method == Method::PrimalDual);
  CHECK(back[0].count == 42);
  CHECK(back[0].median_seconds == 0.25);
  CHECK_FALSE(back[1].ok);
  CHECK(back[1].error == b.error);
}

TEST_CASE("scene generation is deterministic with exact inlier counts") {
  SceneConfig sc;
  sc.n = 1000;
  sc.inlier_ratio = 0.1;
  sc.seed = 12;
  const auto a = generate_scene(sc), b = generate_scene(sc);
  REQUIRE(a.correspondences.size() == 1000);
  std::size_t inliers = 0;
  for (std::size_t i = 0; i < a.correspondences.size(); ++i) {
    CHECK(a.correspondences[i].xi == b.correspondences[i].xi);
    CHECK(std::abs(a.correspondences[i].xi) <= sc.image_bound);
    inliers += a.inlier[i];
  }
  CHECK(inliers == 100);
  sc.seed = 13;
  CHECK(generate_scene(sc).correspondences[0].w1 != a.correspondences[0].w1);
}

TEST_CASE("noise-free inliers sit on the true pose") {
  SceneConfig sc;
  sc.n = 200;
  sc.inlier_ratio = 1;
  sc.noise_sigma = 0;
  const auto s = generate_scene(sc);
  for (const auto& c : s.correspondences) CHECK(frame_distance(s.true_pose, c) <= 1e-12);
}

TEST_CASE("method names") {
  for (Method m : {Method::Naive, Method::PrimalDual, Method::Canonical, Method::Oracle})
    CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("ransac"), InvalidConfig);
}

TEST_CASE("compare_methods") {
  BenchRecord a;
  a.ok = true;
  a.config.method = Method::Naive;
  a.median_seconds = 2;
  BenchRecord b = a;
  b.config.method = Method::PrimalDual;
  b.median_seconds = 1;
  const std::vector<BenchRecord> both{a, b};
  const auto rows = compare_methods(both);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].fastest == "primal-dual");
  CHECK(rows[0].speedup.at("naive") == doctest::Approx(1.0));
  CHECK(rows[0].speedup.at("primal-dual") == doctest::Approx(2.0));
  const std::vector<BenchRecord> lone{a};
  CHECK_THROWS_AS(compare_methods(lone), MismatchedConfigs);
}

TEST_CASE("solve on a small scene recovers the pose with every method") {
  SceneConfig sc;
  sc.n = 1500;
  sc.inlier_ratio = 0.3;
  sc.noise_sigma = 0.005;
  sc.seed = 2;
  const auto scene = generate_scene(sc);
  for (Method m : {Method::Naive, Method::PrimalDual, Method::Canonical}) {
    SolveOptions o;
    o.method = m;
    o.epsilon = 0.05;
    const auto r = solve(scene.correspondences, o);
    REQUIRE_FALSE(r.candidates.empty());
    const Pose p = r.candidates[0].pose;
    CAPTURE(method_name(m));
    CHECK(std::abs(p.x - 0.3) <= 0.1);
    CHECK(std::abs(p.y - 0.2) <= 0.1);
    CHECK(std::abs(p.z - 0.1) <= 0.1);
    CHECK(std::abs(p.kappa - 0.6) <= 0.2);
  }
}
