// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "elastmf/stability.hpp"

using namespace emf;

TEST_CASE("sample_gradient: magnitudes in band, deterministic streams") {
  SweepRng rng = SweepRng::stream(42, 3, 17);
  const Tensor2<double> g = sample_gradient(rng, 1.0);
  SweepRng rng2 = SweepRng::stream(42, 3, 17);
  const Tensor2<double> g2 = sample_gradient(rng2, 1.0);
  for (int i = 0; i < 9; ++i) CHECK(g.a[i] == g2.a[i]);

  double lo = 1e9, hi = 0;
  for (int s = 0; s < 10000; ++s) {
    SweepRng r = SweepRng::stream(7, 0, s);
    const Tensor2<double> t = sample_gradient(r, 1.0);
    for (int i = 0; i < 9; ++i) {
      lo = std::min(lo, std::abs(t.a[i]));
      hi = std::max(hi, std::abs(t.a[i]));
    }
  }
  CHECK(lo >= 0.1);
  CHECK(hi <= 1.0);
}

TEST_CASE("run_sweep: record layout, determinism, invalid counting") {
  SweepConfig cfg;
  cfg.scales = SweepConfig::log_scales(1e-7, 10.0, 8);
  cfg.samples_per_scale = 40;
  cfg.seed = 11;
  const auto records = run_sweep(cfg);
  CHECK(records.size() == 8 * cfg.models.size() * cfg.formulations.size() *
                              cfg.quantities.size());
  // scale-major ordering
  for (std::size_t i = 1; i < records.size(); ++i)
    CHECK(records[i].scale >= records[i - 1].scale);
  // large scales reject samples with nonpositive Jacobians
  long invalid_large = 0;
  for (const auto& r : records)
    if (r.scale > 1.0) invalid_large += r.count_invalid;
  CHECK(invalid_large > 0);
  // small scales reject nothing
  for (const auto& r : records)
    if (r.scale < 1e-3) CHECK(r.count_invalid == 0);

  const auto again = run_sweep(cfg);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].max_rel_error == again[i].max_rel_error);
    CHECK(records[i].count_invalid == again[i].count_invalid);
  }
}

TEST_CASE("stable formulations hold small errors; standard ones blow up") {
  SweepConfig cfg;
  cfg.scales = {1e-8, 1e-7, 1e-5, 1e-3, 1e-2};
  cfg.samples_per_scale = 120;
  cfg.seed = 5;
  cfg.models = {SweepModel::cnh, SweepModel::inh, SweepModel::fiber};
  const auto records = run_sweep(cfg);
  double stable_worst = 0, standard_at_1em7 = 1e30;
  double std_stress_1em8 = 0, std_stress_1em2 = 1e30;
  for (const auto& r : records) {
    if (r.formulation.stability == Stability::stable) {
      stable_worst = std::max(stable_worst, r.max_rel_error);
      continue;
    }
    if (r.quantity != SweepQuantity::stress) continue;
    if (r.scale == 1e-7)
      standard_at_1em7 = std::min(standard_at_1em7, r.max_rel_error);
    const bool neo_hookean =
        r.model == SweepModel::cnh || r.model == SweepModel::inh;
    if (neo_hookean && r.scale == 1e-8)
      std_stress_1em8 = std::max(std_stress_1em8, r.max_rel_error);
    if (neo_hookean && r.scale == 1e-2)
      std_stress_1em2 = std::min(std_stress_1em2, r.max_rel_error);
  }
  CHECK(stable_worst <= 1e-4);
  CHECK(standard_at_1em7 >= 1e-2);
  CHECK(standard_at_1em7 >= 1e3 * stable_worst);
  // cancellation scaling: the standard forms degrade monotonically toward
  // small strains, by at least three orders between 1e-2 and 1e-8
  CHECK(std_stress_1em8 >= 1e3 * std_stress_1em2);
}

TEST_CASE("csv writer: header, row count, deterministic bytes") {
  SweepConfig cfg;
  cfg.scales = {1e-6, 1e-4};
  cfg.samples_per_scale = 10;
  cfg.models = {SweepModel::cnh};
  cfg.formulations = {{Stability::stable, Domain::material}};
  cfg.quantities = {SweepQuantity::stress};
  const auto records = run_sweep(cfg);

  const char* path1 = "test_sweep_1.csv";
  const char* path2 = "test_sweep_2.csv";
  write_csv(records, path1);
  write_csv(records, path2);
  auto slurp = [](const char* p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(path1), b = slurp(path2);
  CHECK(a == b);
  CHECK(a.rfind("scale,model,formulation,quantity,max_rel_error,"
                "count_invalid\n",
                0) == 0);
  int lines = 0;
  for (const char c : a)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + static_cast<int>(records.size()));
  std::remove(path1);
  std::remove(path2);

  // empty record list gives a header-only file
  write_csv({}, path1);
  const std::string empty = slurp(path1);
  CHECK(empty ==
        "scale,model,formulation,quantity,max_rel_error,count_invalid\n");
  std::remove(path1);
}

TEST_CASE("config validation") {
  SweepConfig cfg;
  cfg.scales = {};
  CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
  cfg.scales = {1e-3, 1e-4};  // not increasing
  CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
}
