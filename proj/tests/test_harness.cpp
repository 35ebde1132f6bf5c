// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spinmet/analytic.hpp"
#include "spinmet/harness.hpp"

using namespace spinmet;
using namespace spinmet::harness;

TEST_CASE("config text round trip") {
  RunConfig cfg;
  cfg.mode = "sweep";
  cfg.N = 7;
  cfg.prep = "thermal";
  cfg.beta = 0.25;
  cfg.axis = "t2";
  cfg.points = 11;
  cfg.t1 = "0.5";
  const std::string text = serialize_config(cfg);
  const RunConfig back = parse_config_text(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.N == 7);
  CHECK(back.beta == doctest::Approx(0.25));
  CHECK(back.t1 == "0.5");
}

TEST_CASE("config parsing accepts comments and rejects junk") {
  const RunConfig cfg = parse_config_text(
      "# a comment line\n"
      "  N = 12   # trailing comment\n"
      "\n"
      "prep = ghz\n");
  CHECK(cfg.N == 12);
  CHECK(cfg.prep == "ghz");
  CHECK_THROWS_AS(parse_config_text("no equals sign"), config_error);
  CHECK_THROWS_AS(parse_config_text("frobnicate = 3"), config_error);
  CHECK_THROWS_AS(parse_config_text("N = twelve"), config_error);
  CHECK_THROWS_AS(parse_config_text("mode = dance"), config_error);
  CHECK_THROWS_AS(parse_config_text("theta = 1e999"), config_error);
}

TEST_CASE("resolution of opt/auto parameters") {
  RunConfig cfg;
  const Point pt = resolve(cfg);
  CHECK(pt.params.t1 == doctest::Approx(M_PI / 2));
  CHECK(pt.params.omega_a == doctest::Approx(5.5));  // N = 10
  cfg.N = 9;
  CHECK(resolve(cfg).params.omega_a == doctest::Approx(5.0));
  cfg.omega_a = "3.25";
  CHECK(resolve(cfg).params.omega_a == doctest::Approx(3.25));
  cfg.t1 = "0.4";
  const Point pinned = resolve(cfg);
  CHECK(pinned.params.t1 == doctest::Approx(0.4));
  // the preparation frame stays at the optimized time
  CHECK(pinned.params.t1_frame == doctest::Approx(M_PI / 2));
}

TEST_CASE("qfi mode hits the Heisenberg limit on defaults") {
  RunConfig cfg;
  const RunOutput out = run(cfg);
  REQUIRE(out.records.size() == 1);
  CHECK(out.records[0].fq_total == doctest::Approx(100.0).epsilon(1e-10));
  CHECK(out.records[0].prob_plus == doctest::Approx(0.5));
  CHECK(!out.records[0].fc.has_value());
  // the record echoes resolved inputs
  CHECK(out.records[0].inputs.omega_a == "5.5");
  CHECK(out.csv.find("fq_total") != std::string::npos);
}

TEST_CASE("QFI is independent of the estimation point") {
  RunConfig a, b;
  a.N = b.N = 3;
  a.theta = 1.2;
  b.theta = 0.1;
  const double fa = run(a).records[0].fq_total;
  const double fb = run(b).records[0].fq_total;
  CHECK(fa == doctest::Approx(fb).epsilon(1e-8));
}

TEST_CASE("cfi mode saturates the quantum bound on the optimized circuit") {
  RunConfig cfg;
  cfg.mode = "cfi";
  cfg.N = 6;
  cfg.theta = 0.4;
  const RunOutput out = run(cfg);
  REQUIRE(out.records[0].fc.has_value());
  CHECK(*out.records[0].fc == doctest::Approx(36.0).epsilon(1e-10));
}

TEST_CASE("method cross-agreement") {
  RunConfig cfg;
  cfg.N = 6;
  cfg.theta = 0.8;
  SUBCASE("pure prep") {
    cfg.prep = "superposed";
    double f[3];
    int i = 0;
    for (const char* m : {"pure", "spectral", "sld"}) {
      cfg.method = m;
      f[i++] = run(cfg).records[0].fq_total;
    }
    CHECK(f[0] == doctest::Approx(f[1]).epsilon(1e-8));
    CHECK(f[0] == doctest::Approx(f[2]).epsilon(1e-7));
  }
  SUBCASE("thermal prep") {
    cfg.prep = "thermal";
    cfg.beta = 1.4;
    cfg.method = "sld";
    const double sld = run(cfg).records[0].fq_total;
    cfg.method = "spectral";
    const double spec = run(cfg).records[0].fq_total;
    CHECK(sld == doctest::Approx(spec).epsilon(1e-7));
    // method=all picks sld for mixed preparations
    cfg.method = "all";
    CHECK(run(cfg).records[0].method == "sld");
  }
  SUBCASE("pure method rejects mixed preparations") {
    cfg.prep = "thermal";
    cfg.method = "pure";
    CHECK_THROWS_AS(run(cfg), config_error);
  }
}

TEST_CASE("circuit SLD matches the thermal closed form") {
  RunConfig cfg;
  cfg.N = 10;
  cfg.prep = "thermal";
  cfg.beta = 2.0;
  cfg.method = "sld";
  const double f = run(cfg).records[0].fq_total;
  CHECK(f == doctest::Approx(analytic::thermal_qfi_exact(10, 2.0)).epsilon(1e-8));
}

TEST_CASE("sweep over theta is a constant row with records in grid order") {
  RunConfig cfg;
  cfg.mode = "sweep";
  cfg.axis = "theta";
  cfg.N = 4;
  cfg.start = 0.0;
  cfg.stop = 2.0;
  cfg.points = 5;
  const RunOutput out = run(cfg);
  REQUIRE(out.records.size() == 5);
  for (const auto& rec : out.records) {
    CHECK(rec.fq_total == doctest::Approx(16.0).epsilon(1e-9));
    REQUIRE(rec.fc.has_value());
  }
  CHECK(out.records[2].inputs.theta == doctest::Approx(1.0));
}

TEST_CASE("sweep validation") {
  RunConfig cfg;
  cfg.mode = "sweep";
  cfg.points = 1;
  CHECK_THROWS_AS(run(cfg), config_error);
  cfg.points = 5;
  cfg.axis = "dt";
  CHECK_THROWS_AS(run(cfg), config_error);  // synchronous schedule has no dt
  cfg.axis = "beta";
  CHECK_THROWS_AS(run(cfg), config_error);  // beta needs a thermal prep
  cfg.axis = "N";
  cfg.start = 0.5;
  cfg.stop = 2.5;
  CHECK_THROWS_AS(run(cfg), config_error);  // non-integer N grid
}

TEST_CASE("sweep output is identical under parallel evaluation") {
  RunConfig cfg;
  cfg.mode = "sweep";
  cfg.axis = "t1";
  cfg.start = 0.3;
  cfg.stop = 2.8;
  cfg.points = 7;
  cfg.N = 5;
  cfg.jobs = 1;
  const std::string serial = run(cfg).csv;
  cfg.jobs = 4;
  const std::string parallel = run(cfg).csv;
  CHECK(serial == parallel);
  CHECK(serial == run(cfg).csv);  // and reproducible
}

TEST_CASE("N sweep re-resolves the detuning parity rule per point") {
  RunConfig cfg;
  cfg.mode = "sweep";
  cfg.axis = "N";
  cfg.start = 3;
  cfg.stop = 6;
  cfg.points = 4;
  const RunOutput out = run(cfg);
  REQUIRE(out.records.size() == 4);
  CHECK(out.records[0].inputs.omega_a == "5");    // N=3 odd
  CHECK(out.records[1].inputs.omega_a == "5.5");  // N=4 even
  for (std::size_t i = 0; i < 4; ++i) {
    const double n = 3.0 + double(i);
    CHECK(out.records[i].fq_total == doctest::Approx(n * n).epsilon(1e-9));
  }
}

TEST_CASE("figure fig3a peaks at the optimized interaction time") {
  RunConfig cfg;
  cfg.mode = "figure";
  cfg.figure = "fig3a";
  const RunOutput out = run(cfg);
  CHECK(!out.manifest_json.empty());
  std::istringstream csv(out.csv);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "g_t1,N,fq_over_n2");
  double best = -1.0, best_x = -1.0;
  std::string line;
  while (std::getline(csv, line)) {
    double x, n, f;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &n, &f) == 3);
    if (n == 10.0 && f > best) {
      best = f;
      best_x = x;
    }
  }
  CHECK(best == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(best_x == doctest::Approx(M_PI / 2).epsilon(1e-9));
}

TEST_CASE("figure mode writes the dataset and a parameter manifest") {
  RunConfig cfg;
  cfg.mode = "figure";
  cfg.figure = "fig3c";
  const RunOutput out = run(cfg);
  const std::string path = "harness_test_fig3c.csv";
  write_output(out, cfg, path);
  std::ifstream data(path), manifest(path + ".manifest.json");
  REQUIRE(data.good());
  REQUIRE(manifest.good());
  std::stringstream body;
  body << data.rdbuf();
  CHECK(body.str() == out.csv);
  std::stringstream mbody;
  mbody << manifest.rdbuf();
  CHECK(mbody.str().find("fig3c") != std::string::npos);
  std::remove(path.c_str());
  std::remove((path + ".manifest.json").c_str());
}

TEST_CASE("validation report runs clean with default tolerances") {
  RunConfig cfg;
  cfg.mode = "validate";
  const RunOutput out = run(cfg);
  CHECK(out.status == 0);
  REQUIRE(!out.checks.empty());
  int warns = 0;
  for (const auto& c : out.checks) {
    CHECK(c.status != "FAIL");
    if (c.status == "WARN") ++warns;
  }
  CHECK(warns == 2);  // the two documented closed-form/quoted-value tensions
  CHECK(out.csv.rfind("name,status,residual,tolerance,note", 0) == 0);
}

TEST_CASE("tolerance override propagates into the report") {
  RunConfig cfg;
  cfg.mode = "validate";
  cfg.tol = 1e-8;
  const RunOutput out = run(cfg);
  for (const auto& c : out.checks)
    if (c.status != "WARN") CHECK(c.tolerance == doctest::Approx(1e-8));
}

TEST_CASE("numeric formatting uses 12 significant digits") {
  CHECK(format_double(M_PI) == "3.14159265359");
  CHECK(format_double(100.0) == "100");
  CHECK(format_double(0.5) == "0.5");
}
