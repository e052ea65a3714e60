// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Config-driven drivers behind the command-line front end: the stability
// sweep, the throughput benchmark, and the pressure-loaded deformed-cube
// solve, each with a CSV emitter.

#ifndef ELASTMF_RUNNER_HPP
#define ELASTMF_RUNNER_HPP

#include <string>
#include <vector>

#include "elastmf/config.hpp"

namespace emf {

std::vector<SweepRecord> run_stability(const RunConfig& cfg);

struct BenchRecord {
  int degree = 0;
  std::int64_t n_elements = 0;
  std::int64_t dofs = 0;
  std::string variant;    // domain-strategy
  std::string operation;  // tangent_apply or residual
  long repetitions = 0;
  double seconds = 0;
  double dof_per_s = 0;
  double bytes_per_dof = 0;
};

/// Timed per (degree, domain, strategy, operation): blocks of repetitions
/// until the minimum wall time is reached, repeated `measurements` times,
/// averaging the best runs. Quadrature data is refreshed once up front for
/// the linearized operator and on every evaluation for the residual.
std::vector<BenchRecord> run_throughput(const RunConfig& cfg);

void write_bench_csv(const std::vector<BenchRecord>& records,
                     const std::string& path);

struct SolveStepRecord {
  int increment = 0;
  int newton_iter = 0;
  int fgmres_iters = 0;
  double residual_before = 0;
  double residual_after = 0;
  double seconds = 0;
};

struct SolveReport {
  std::vector<SolveStepRecord> steps;
  std::vector<int> newton_per_increment;
  bool converged = false;
};

/// Uniform pressure on the +x face of the deformed cube, fixed -x face,
/// ramped in increments; one Newton solve per increment.
SolveReport run_solve(const RunConfig& cfg);

void write_solve_csv(const SolveReport& report, const std::string& path);

}  // namespace emf

#endif
