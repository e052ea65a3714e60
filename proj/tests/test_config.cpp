// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "elastmf/config.hpp"

using namespace emf;

TEST_CASE("defaults carry the tissue parameters") {
  const RunConfig c = RunConfig::defaults();
  CHECK(c.model == ModelKind::fiber);
  CHECK(c.params.mu == doctest::Approx(62.1));
  CHECK(c.params.kappa_b == doctest::Approx(3084.3));
  CHECK(c.params.k1 == doctest::Approx(1.4));
  CHECK(c.params.k2 == doctest::Approx(22.1));
  CHECK(c.params.a == doctest::Approx(3.62));
  CHECK(c.params.b == doctest::Approx(34.3));
  CHECK(c.params.phi == doctest::Approx(27.47 * 3.14159265358979 / 180.0));
  CHECK(c.solve.newton.eps_abs == 1e-8);
  CHECK(c.solve.newton.eps_rel == 1e-3);
  CHECK(c.solve.fgmres.restart == 30);
  CHECK(c.solve.smoother.degree == 6);
}

TEST_CASE("round trip: parse(serialize(parse(x))) == parse(x)") {
  const char* text = R"json({
    "seed": 99,
    "threads": 2,
    "model": "iNH",
    "material": {"mu": 10.0, "kappa_b": 500.0},
    "mesh": {"n0": 1, "level": 2, "degree": 3},
    "stability": {"scale_count": 20, "models": ["cNH", "svk"]},
    "solve": {"pressure": 0.5, "increments": 2, "precision": "double"}
  })json";
  const RunConfig c1 = RunConfig::from_json_text(text);
  CHECK(c1.seed == 99);
  CHECK(c1.model == ModelKind::inh);
  CHECK(c1.params.mu == 10.0);
  CHECK(c1.mesh.degree == 3);
  CHECK(c1.stability.models.size() == 2);
  CHECK(c1.solve.precision == "double");

  const std::string s1 = c1.to_json_text();
  const RunConfig c2 = RunConfig::from_json_text(s1);
  const std::string s2 = c2.to_json_text();
  CHECK(s1 == s2);
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(RunConfig::from_json_text("{ nope"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"model": "bogus"})"),
                  ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json_text(R"({"solve": {"precision": "half"}})"),
      ConfigError);
  CHECK_THROWS_AS(
      RunConfig::from_json_text(R"({"stability": {"scale_count": 1}})"),
      ConfigError);
  CHECK_THROWS_AS(RunConfig::from_file("/no/such/file.json"), IoError);
}

TEST_CASE("full-scale mesh configurations parse (not run at desk scale)") {
  // 3 * (3 * 2^5 * 1 + 1)^3 = 2738019 DoFs at p = 1
  const RunConfig c = RunConfig::from_json_text(
      R"({"bench": {"degrees": [1], "meshes": {"1": [3, 5]}}})");
  const auto nl = c.bench.meshes.at(1);
  CHECK(nl.first == 3);
  CHECK(nl.second == 5);
  const std::int64_t n = static_cast<std::int64_t>(nl.first) << nl.second;
  CHECK(n * n * n == 884736);
  CHECK(3 * (n + 1) * (n + 1) * (n + 1) == 2738019);
}

TEST_CASE("string parsers") {
  CHECK(model_from_string("fiber") == ModelKind::fiber);
  CHECK(domain_from_string("spatial") == Domain::spatial);
  CHECK(strategy_from_string("tensor") == Strategy::tensor);
  const Formulation f = formulation_from_string("standard-spatial");
  CHECK(f.stability == Stability::standard);
  CHECK(f.domain == Domain::spatial);
  CHECK_THROWS_AS(formulation_from_string("stable"), ConfigError);
}
