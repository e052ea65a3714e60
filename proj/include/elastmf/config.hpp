// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#ifndef ELASTMF_CONFIG_HPP
#define ELASTMF_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "elastmf/material.hpp"
#include "elastmf/solver.hpp"
#include "elastmf/stability.hpp"

namespace emf {

/// Declarative run configuration, read from a single JSON file. Field names
/// are part of the tool contract and documented in the README.
struct RunConfig {
  std::uint64_t seed = 42;
  int threads = 1;

  ModelKind model = ModelKind::fiber;
  MaterialParams params;          // defaults are the fiber tissue fit
  KernelConfig kernels;

  struct Stability {
    double scale_min = 1e-8;
    double scale_max = 1e2;
    int scale_count = 200;
    int samples_per_scale = 1000;
    std::vector<SweepModel> models{SweepModel::cnh, SweepModel::inh,
                                   SweepModel::fiber, SweepModel::svk};
    std::vector<Formulation> formulations{
        {emf::Stability::standard, Domain::material},
        {emf::Stability::stable, Domain::material},
        {emf::Stability::standard, Domain::spatial},
        {emf::Stability::stable, Domain::spatial}};
    std::vector<SweepQuantity> quantities{SweepQuantity::stress,
                                          SweepQuantity::tangent};
  } stability;

  struct Mesh {
    int n0 = 2;
    int level = 3;
    int degree = 2;
    double extent = 1.0;
    double deform_amplitude = 0.05;
  } mesh;

  struct Bench {
    std::vector<int> degrees{1, 2, 3, 4};
    std::map<int, std::pair<int, int>> meshes{
        {1, {2, 4}}, {2, {2, 3}}, {3, {3, 2}}, {4, {1, 3}},
        {5, {3, 1}}, {6, {5, 0}}, {7, {1, 2}}, {8, {3, 0}}};
    std::vector<Domain> domains{Domain::material, Domain::spatial};
    std::vector<Strategy> strategies{Strategy::none, Strategy::scalar,
                                     Strategy::tensor};
    std::vector<std::string> operations{"tangent_apply", "residual"};
    int repetitions_block = 100;
    double min_seconds = 1.0;
    int measurements = 10;
    int average_best = 3;
    double linearization_stretch = 0.02;
  } bench;

  struct Solve {
    double pressure = 1.0;
    int increments = 4;
    Domain domain = Domain::material;
    Strategy strategy = Strategy::scalar;
    emf::Stability stability = emf::Stability::stable;
    std::string precision = "mixed";  // "mixed" or "double"
    NewtonConfig newton;
    FgmresConfig fgmres;
    SmootherConfig smoother;
  } solve;

  static RunConfig defaults() { return RunConfig{}; }
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_json_text() const;
};

ModelKind model_from_string(const std::string& s);
Domain domain_from_string(const std::string& s);
Strategy strategy_from_string(const std::string& s);
emf::Stability stability_from_string(const std::string& s);
SweepModel sweep_model_from_string(const std::string& s);
SweepQuantity sweep_quantity_from_string(const std::string& s);
Formulation formulation_from_string(const std::string& s);

}  // namespace emf

#endif
