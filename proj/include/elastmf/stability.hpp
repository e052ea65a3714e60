// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Forward-stability sweep: sample displacement gradients across strain
// scales, evaluate stresses and directional derivatives in single and
// double precision with identical formulas, and report the maximum
// componentwise relative deviation per (scale, model, formulation,
// quantity) cell.

#ifndef ELASTMF_STABILITY_HPP
#define ELASTMF_STABILITY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "elastmf/constitutive.hpp"

namespace emf {

enum class SweepModel { cnh, inh, fiber, svk };
enum class SweepQuantity { stress, tangent };

const char* to_string(SweepModel m);
const char* to_string(SweepQuantity q);
std::string formulation_label(Formulation f);

struct SweepConfig {
  std::vector<double> scales;  // strictly increasing, positive
  int samples_per_scale = 1000;
  std::uint64_t seed = 42;
  std::vector<SweepModel> models{SweepModel::cnh, SweepModel::inh,
                                 SweepModel::fiber, SweepModel::svk};
  std::vector<Formulation> formulations{
      {Stability::standard, Domain::material},
      {Stability::stable, Domain::material},
      {Stability::standard, Domain::spatial},
      {Stability::stable, Domain::spatial}};
  std::vector<SweepQuantity> quantities{SweepQuantity::stress,
                                        SweepQuantity::tangent};
  MaterialParams params;
  KernelConfig kernels;

  static std::vector<double> log_scales(double lo, double hi, int count);
  static SweepConfig defaults();  // 200 scales from 1e-8 to 1e2
};

struct SweepRecord {
  double scale = 0;
  SweepModel model = SweepModel::cnh;
  Formulation formulation;
  SweepQuantity quantity = SweepQuantity::stress;
  double max_rel_error = 0;
  long count_invalid = 0;
};

/// Deterministic, seedable, portable generator (splitmix64 core) with one
/// stream per (scale index, sample index).
struct SweepRng {
  std::uint64_t state;
  static SweepRng stream(std::uint64_t seed, std::uint64_t scale_idx,
                         std::uint64_t sample_idx);
  double next01();
};

/// Gradient with entry magnitudes uniform in [eps/10, eps] and independent
/// random signs; the band (-eps/10, eps/10) is excluded.
Tensor2<double> sample_gradient(SweepRng& rng, double eps);

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

/// Header: scale,model,formulation,quantity,max_rel_error,count_invalid
/// with rows ordered scale-major, then model, formulation, quantity.
void write_csv(const std::vector<SweepRecord>& records,
               const std::string& path);

}  // namespace emf

#endif
