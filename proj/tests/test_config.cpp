#include "doctest.h"
#include "lietoda/config.hpp"
#include "lietoda/pipelines.hpp"

#include <fstream>

using namespace lietoda;
using nlohmann::json;

namespace {
std::string pointer_of(const json& j) {
  try {
    RunConfig::from_json(j);
  } catch (const ConfigPathError& e) {
    return e.pointer;
  }
  return "<none>";
}

json poly_a2() {
  return json::parse(R"({
    "algebra": {"series": "A", "n": 2},
    "grid": {"Nx": 21, "Ny": 21, "hx": 0.05, "hy": 0.05},
    "anchor": "corner",
    "coefficients": [
      {"side": "minus", "grade": 0, "site": 1, "kind": "poly", "params": [0.0, 0.5]},
      {"side": "plus", "grade": 0, "site": 2, "kind": "poly", "params": [0.2, 0.0, 0.3]}
    ],
    "seed": 4, "jobs": 2, "out": "somewhere"
  })");
}
}  // namespace

TEST_CASE("schema errors carry JSON pointers") {
  CHECK(pointer_of({{"grid", {{"Nx", 21}, {"Ny", 21}, {"hx", -0.1}, {"hy", 0.1}}}}) == "/grid/hx");
  CHECK(pointer_of({{"grid", {{"Nx", 3}, {"Ny", 21}, {"hx", 0.1}, {"hy", 0.1}}}}) == "/grid/Nx");
  CHECK(pointer_of({{"grid", {{"Nx", 21}, {"Ny", 21}, {"hx", 0.1}}}}) == "/grid/hy");
  CHECK(pointer_of({{"algebra", {{"series", "A"}, {"n", 0}}}}) == "/algebra/n");
  CHECK(pointer_of({{"algebra", {{"series", "Q"}, {"n", 2}}}}) == "/algebra/series");
  CHECK(pointer_of({{"algebra", {{"series", "B"}, {"n", 2}}}}) == "/algebra/series");
  CHECK(pointer_of({{"algebra", {{"n", 2}, {"rank", 2}}}}) == "/algebra/rank");
  CHECK(pointer_of({{"bogus", 1}}) == "/bogus");
  CHECK(pointer_of({{"algebra", {{"n", 2}}}, {"m1", 3}}) == "/m1");
  CHECK(pointer_of({{"derivatives", "spectral"}}) == "/derivatives");
  CHECK(pointer_of({{"tasks", {"toda", "dance"}}}) == "/tasks/1");
  CHECK(pointer_of({{"seed", -1}}) == "/seed");
  CHECK(pointer_of({{"tol", 0.0}}) == "/tol");
  CHECK(pointer_of({{"map", {{"kind", "nope"}}}}) == "/map/kind");
  CHECK(pointer_of({{"anchor", "left"}}) == "/anchor");
  CHECK(pointer_of({{"ds", {{"frame", {{"k", 2}, {"modes", {0.0, 0.5}}}}, {"site", 2}}}}) == "/ds/site");

  json j = poly_a2();
  j["coefficients"][1]["site"] = 3;
  CHECK(pointer_of(j) == "/coefficients/1/site");
  j = poly_a2();
  j["coefficients"][0]["grade"] = 2;
  CHECK(pointer_of(j) == "/coefficients/0/grade");
  j = poly_a2();
  j["coefficients"][0]["params"] = {"a"};
  CHECK(pointer_of(j) == "/coefficients/0/params");
  j = poly_a2();
  j["coefficients"][0]["side"] = "up";
  CHECK(pointer_of(j) == "/coefficients/0/side");
  j = poly_a2();
  j.erase("algebra");
  CHECK(pointer_of(j) == "/algebra");
  CHECK(pointer_of(json::array()) == "");

  CHECK(pointer_of(poly_a2()) == "<none>");
}

TEST_CASE("normalized form round-trips") {
  RunConfig c = RunConfig::from_json(poly_a2());
  CHECK(c.n == 2);
  CHECK(c.anchor == Anchor::corner);
  CHECK(c.coefficients.size() == 2);
  CHECK(c.seed == 4);
  json once = c.to_json();
  json twice = RunConfig::from_json(once).to_json();
  CHECK(once == twice);

  json f = {{"frame", {{"k", 3}, {"modes", {-1.0, 0.0, 0.5, 1.0}}}},
            {"chain_grid", {{"Nx", 41}, {"Ny", 5}, {"hx", 0.01}, {"hy", 0.1}, {"x0", -1.0}}},
            {"ds", {{"frame", {{"k", 2}, {"modes", {0.0, 0.6}}}}, {"Nt", 9}}},
            {"map", {{"kind", "dt"}, {"site", 2}, {"iterations", 2}}},
            {"anchor", {{"x", 0.1}, {"y", -0.2}}},
            {"time", {{"side", "minus"}, {"fixed", 0.3}}},
            {"tol", 1e-7}};
  RunConfig d = RunConfig::from_json(f);
  CHECK(d.anchor == Anchor::point);
  CHECK(d.map->kind == MapKind::darboux_toda);
  CHECK(d.time_side == Side::minus);
  CHECK(d.chain_grid->x0 == -1.0);
  CHECK(d.ds->Nt == 9);
  CHECK(RunConfig::from_json(d.to_json()).to_json() == d.to_json());
}

TEST_CASE("grid defaults center the grid") {
  Grid2D g = grid_from_json({{"Nx", 11}, {"Ny", 5}, {"hx", 0.2}, {"hy", 0.5}}, "/grid");
  CHECK(g.x0 == doctest::Approx(-1.0));
  CHECK(g.y0 == doctest::Approx(-1.0));
  Grid2D h = grid_from_json({{"Nx", 11}, {"Ny", 5}, {"hx", 0.2}, {"hy", 0.5}, {"x0", 0.0}}, "/g");
  CHECK(h.x0 == 0.0);
  try {
    grid_from_json({{"Nx", 11}, {"Ny", 5}, {"hx", 0.2}, {"hy", 0.5}, {"z", 1}}, "/chain_grid");
    FAIL("no exception");
  } catch (const ConfigPathError& e) {
    CHECK(e.pointer == "/chain_grid/z");
  }
}

TEST_CASE("hashes") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");

  RunConfig c = RunConfig::from_json(poly_a2());
  const std::string h = config_hash(c);
  CHECK(h.size() == 16);
  CHECK(config_hash(RunConfig::from_json(poly_a2())) == h);
  RunConfig d = c;
  d.jobs = 7;
  d.out = "elsewhere";
  CHECK(config_hash(d) == h);
  d.seed = 5;
  CHECK(config_hash(d) != h);
  json b = poly_a2();
  b["algebra"]["n"] = 3;
  CHECK(config_hash(RunConfig::from_json(b)) != h);
}

TEST_CASE("report envelope") {
  RunConfig c = RunConfig::from_json(poly_a2());
  ResidualReport r;
  r.name = "toda";
  r.max_abs = 1e-8;
  r.tol = 1e-6;
  ResidualReport bad = r;
  bad.name = "other";
  bad.pass = false;

  json e = report_envelope("toda", c, {r});
  CHECK(e["tool"] == "lietoda");
  CHECK(e["version"] == tool_version());
  CHECK(e["command"] == "toda");
  CHECK(e["config_hash"] == config_hash(c));
  CHECK(e["pass"] == true);
  CHECK_FALSE(e["config"].contains("jobs"));
  CHECK_FALSE(e["config"].contains("out"));
  REQUIRE(e["reports"].size() == 1);
  CHECK(e["reports"][0]["config_hash"] == config_hash(c));
  CHECK(e["meta"]["jobs"] == 2);
  CHECK(e["meta"]["out"] == "somewhere");
  CHECK(e["meta"].contains("timestamp"));

  CHECK(report_envelope("toda", c, {r, bad})["pass"] == false);
  CHECK(report_envelope("toda", c, {r}, {{"note", 1}})["note"] == 1);

  json f = e;
  f["meta"]["timestamp"] = "1970-01-01T00:00:00Z";
  f["meta"]["jobs"] = 9;
  CHECK(envelope_digest(f) == envelope_digest(e));
  f["pass"] = false;
  CHECK(envelope_digest(f) != envelope_digest(e));
}

TEST_CASE("config files") {
  CHECK_THROWS_AS(load_config("/nonexistent/lietoda.json"), ConfigPathError);
  const std::string p = "lietoda_test_config.json";
  {
    std::ofstream o(p);
    o << "{\"grid\": ";
  }
  try {
    load_config(p);
    FAIL("no exception");
  } catch (const ConfigPathError& e) {
    CHECK(e.pointer == "");
  }
  {
    std::ofstream o(p);
    o << poly_a2().dump();
  }
  CHECK(load_config(p).to_json() == RunConfig::from_json(poly_a2()).to_json());
  std::remove(p.c_str());
}

TEST_CASE("reduction task needs unit grade-1 coefficients") {
  json j = poly_a2();
  j["tasks"] = {"reduction"};
  CHECK(run_utoda(RunConfig::from_json(j)).pass());
  j["coefficients"].push_back({{"side", "plus"}, {"grade", 1}, {"site", 1}, {"kind", "poly"}, {"params", {1.0, 0.3}}});
  try {
    run_utoda(RunConfig::from_json(j));
    FAIL("no exception");
  } catch (const ConfigPathError& e) {
    CHECK(e.pointer == "/coefficients");
  }
}
