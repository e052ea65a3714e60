// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include "elastmf/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace emf {

std::vector<SweepRecord> run_stability(const RunConfig& cfg) {
  SweepConfig sc;
  sc.scales = SweepConfig::log_scales(cfg.stability.scale_min,
                                      cfg.stability.scale_max,
                                      cfg.stability.scale_count);
  sc.samples_per_scale = cfg.stability.samples_per_scale;
  sc.seed = cfg.seed;
  sc.models = cfg.stability.models;
  sc.formulations = cfg.stability.formulations;
  sc.quantities = cfg.stability.quantities;
  sc.params = cfg.params;
  sc.kernels = cfg.kernels;
  return run_sweep(sc);
}

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/// Uniform stretch linearization state: u = alpha X puts both fiber
/// families in tension so the kernels run with every term active.
std::vector<double> bench_state(const FeLevel& fe, double alpha) {
  std::vector<double> u(fe.dof_count());
  for (std::int64_t n = 0; n < fe.node_count(); ++n)
    for (int c = 0; c < 3; ++c)
      u[3 * n + c] = alpha * fe.node_coords()[3 * n + c];
  return u;
}

std::vector<double> bench_input(std::int64_t n) {
  std::vector<double> x(n);
  for (std::int64_t i = 0; i < n; ++i)
    x[i] = 1e-3 * std::sin(0.01 * static_cast<double>(i) + 0.3);
  return x;
}

}  // namespace

std::vector<BenchRecord> run_throughput(const RunConfig& cfg) {
  std::vector<BenchRecord> records;
  const DeformMap map{cfg.mesh.deform_amplitude};
  for (const int p : cfg.bench.degrees) {
    const auto it = cfg.bench.meshes.find(p);
    if (it == cfg.bench.meshes.end())
      throw ConfigError("bench: no mesh configured for degree " +
                        std::to_string(p));
    const HexMesh mesh =
        build_cube(it->second.first, it->second.second, cfg.mesh.extent);
    FeLevel fe(mesh, p, map);
    FeLevel::DirichletSpec spec;
    spec.faces = {true, false, false, false, false, false};
    fe.set_dirichlet(spec);
    const std::vector<double> u_k = bench_state(fe, cfg.bench.linearization_stretch);
    const std::vector<double> x = bench_input(fe.dof_count());

    for (const Domain domain : cfg.bench.domains)
      for (const Strategy strategy : cfg.bench.strategies) {
        ElasticOperator<double> op(fe, cfg.model, cfg.params,
                                   {Stability::stable, domain}, strategy,
                                   cfg.kernels);
        op.set_threads(cfg.threads);
        op.update_linearization(u_k);
        for (const std::string& operation : cfg.bench.operations) {
          const bool tangent = operation == "tangent_apply";
          if (!tangent && operation != "residual")
            throw ConfigError("bench: unknown operation " + operation);
          std::vector<double> y(fe.dof_count());
          // warm-up
          if (tangent)
            op.apply_tangent(x, y);
          else
            op.evaluate_residual(u_k, y);

          struct Run {
            long reps;
            double secs;
          };
          std::vector<Run> runs;
          for (int meas = 0; meas < cfg.bench.measurements; ++meas) {
            long reps = 0;
            const double t0 = now_seconds();
            double elapsed = 0;
            while (elapsed < cfg.bench.min_seconds) {
              for (int r = 0; r < cfg.bench.repetitions_block; ++r) {
                if (tangent)
                  op.apply_tangent(x, y);
                else
                  op.evaluate_residual(u_k, y);
              }
              reps += cfg.bench.repetitions_block;
              elapsed = now_seconds() - t0;
            }
            runs.push_back({reps, elapsed});
          }
          std::sort(runs.begin(), runs.end(), [&](const Run& a, const Run& b) {
            return a.reps / a.secs > b.reps / b.secs;
          });
          const int keep = std::min<int>(cfg.bench.average_best,
                                         static_cast<int>(runs.size()));
          long reps_sum = 0;
          double secs_sum = 0;
          for (int i = 0; i < keep; ++i) {
            reps_sum += runs[i].reps;
            secs_sum += runs[i].secs;
          }
          BenchRecord rec;
          rec.degree = p;
          rec.n_elements = mesh.element_count();
          rec.dofs = fe.dof_count();
          rec.variant = std::string(to_string(domain)) + "-" +
                        to_string(strategy);
          rec.operation = operation;
          rec.repetitions = reps_sum;
          rec.seconds = secs_sum;
          rec.dof_per_s =
              static_cast<double>(fe.dof_count()) * reps_sum / secs_sum;
          if (tangent) {
            rec.bytes_per_dof = op.byte_ledger().traffic_per_dof();
          } else {
            // residual reloads the mapping data and the state vector
            ByteLedger bl = op.byte_ledger();
            bl.cell = cell_ledger(cfg.model, domain, Strategy::none);
            rec.bytes_per_dof = bl.traffic_per_dof();
          }
          records.push_back(rec);
        }
      }
  }
  return records;
}

void write_bench_csv(const std::vector<BenchRecord>& records,
                     const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("write_bench_csv: cannot open " + path);
  std::fprintf(f,
               "p,n_elements,dofs,variant,operation,repetitions,seconds,"
               "dof_per_s,bytes_per_dof\n");
  for (const auto& r : records)
    std::fprintf(f, "%d,%lld,%lld,%s,%s,%ld,%.6e,%.6e,%.3f\n", r.degree,
                 static_cast<long long>(r.n_elements),
                 static_cast<long long>(r.dofs), r.variant.c_str(),
                 r.operation.c_str(), r.repetitions, r.seconds, r.dof_per_s,
                 r.bytes_per_dof);
  std::fclose(f);
}

namespace {

template <typename Prec>
SolveReport run_solve_with(const RunConfig& cfg) {
  const DeformMap map{cfg.mesh.deform_amplitude};
  const HexMesh mesh = build_cube(cfg.mesh.n0, cfg.mesh.level, cfg.mesh.extent);
  FeLevel fe(mesh, cfg.mesh.degree, map);
  const std::array<bool, 6> fixed_faces{true, false, false, false, false,
                                        false};
  FeLevel::DirichletSpec spec;
  spec.faces = fixed_faces;
  fe.set_dirichlet(spec);

  Loads loads;
  loads.pressure = cfg.solve.pressure;
  loads.pressure_face = 1;
  const Formulation form{cfg.solve.stability, cfg.solve.domain};
  ElasticOperator<double> op(fe, cfg.model, cfg.params, form,
                             cfg.solve.strategy, cfg.kernels, loads);
  op.set_threads(cfg.threads);
  MgHierarchy<Prec> mg(fe, fixed_faces, cfg.model, cfg.params, form,
                       cfg.solve.strategy, cfg.kernels, cfg.solve.smoother,
                       map);
  mg.set_threads(cfg.threads);

  std::vector<double> u(fe.dof_count(), 0.0);
  fe.dirichlet_set_values(u);

  SolveReport report;
  for (int inc = 1; inc <= cfg.solve.increments; ++inc) {
    op.set_load_scale(static_cast<double>(inc) / cfg.solve.increments);
    const NewtonStats stats =
        newton_solve(op, &mg, u, cfg.solve.newton, cfg.solve.fgmres);
    report.newton_per_increment.push_back(stats.iterations);
    for (const auto& s : stats.steps)
      report.steps.push_back({inc, s.newton_iter, s.fgmres_iters,
                              s.residual_before, s.residual_after, s.seconds});
  }
  report.converged = true;
  return report;
}

}  // namespace

SolveReport run_solve(const RunConfig& cfg) {
  if (cfg.solve.precision == "double") return run_solve_with<double>(cfg);
  return run_solve_with<float>(cfg);
}

void write_solve_csv(const SolveReport& report, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("write_solve_csv: cannot open " + path);
  std::fprintf(f,
               "increment,newton_iter,fgmres_iters,residual_before,"
               "residual_after,seconds\n");
  for (const auto& s : report.steps)
    std::fprintf(f, "%d,%d,%d,%.6e,%.6e,%.6e\n", s.increment, s.newton_iter,
                 s.fgmres_iters, s.residual_before, s.residual_after,
                 s.seconds);
  std::fclose(f);
}

}  // namespace emf
