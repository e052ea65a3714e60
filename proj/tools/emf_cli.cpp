// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Talks to the elastmf shared library exclusively
// through its C interface.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "elastmf.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int status_to_exit(emf_status s) {
  switch (s) {
    case EMF_OK: return kExitOk;
    case EMF_ERR_CONFIG:
    case EMF_ERR_IO:
    case EMF_ERR_INVALID: return kExitConfig;
    default: return kExitNumerical;
  }
}

struct SessionGuard {
  emf_session* s = nullptr;
  ~SessionGuard() { emf_session_destroy(s); }
};

int open_session(const std::string& config_path, std::uint64_t seed,
                 bool seed_set, int threads, bool threads_set,
                 SessionGuard& guard) {
  emf_status st;
  if (!config_path.empty())
    st = emf_session_create_from_file(config_path.c_str(), &guard.s);
  else
    st = emf_session_create(nullptr, &guard.s);
  if (st != EMF_OK) {
    std::fprintf(stderr, "error: cannot load configuration (%s)\n",
                 config_path.empty() ? "defaults" : config_path.c_str());
    return status_to_exit(st);
  }
  if (seed_set) emf_session_set_seed(guard.s, seed);
  if (threads_set) emf_session_set_threads(guard.s, threads);
  return kExitOk;
}

void print_csv_records(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    std::printf("%s\n", line.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matrix-free finite-strain elasticity benchmarks"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  int threads = 1;
  bool seed_set = false, threads_set = false;
  app.add_option("--config", config_path, "JSON configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "override the RNG seed");
  auto* threads_opt =
      app.add_option("--threads", threads, "worker threads (1 = serial)");

  auto* stab = app.add_subcommand("stability", "forward-stability sweep");
  std::string stab_out = "stability.csv";
  stab->add_option("--out", stab_out, "output CSV path");

  auto* bench = app.add_subcommand("bench", "operator throughput benchmark");
  std::string bench_out = "bench.csv";
  bench->add_option("--out", bench_out, "output CSV path");

  auto* solve = app.add_subcommand("solve", "pressure-loaded cube solve");
  std::string solve_out = "solve.csv";
  solve->add_option("--out", solve_out, "output CSV path");

  auto* ledger = app.add_subcommand(
      "ledger", "per-quadrature-point storage and traffic bytes");
  std::string lg_model = "fiber", lg_domain = "material",
              lg_strategy = "scalar";
  ledger->add_option("--model", lg_model, "cNH | iNH | fiber");
  ledger->add_option("--domain", lg_domain, "material | spatial");
  ledger->add_option("--strategy", lg_strategy, "none | scalar | tensor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }
  seed_set = seed_opt->count() > 0;
  threads_set = threads_opt->count() > 0;

  SessionGuard guard;
  const int open_rc = open_session(config_path, seed, seed_set, threads,
                                   threads_set, guard);
  if (open_rc != kExitOk) return open_rc;

  if (ledger->parsed()) {
    emf_ledger_entry entry;
    const emf_status st = emf_ledger_lookup(lg_model.c_str(),
                                            lg_domain.c_str(),
                                            lg_strategy.c_str(), &entry);
    if (st != EMF_OK) {
      std::fprintf(stderr, "error: unknown ledger cell %s/%s/%s\n",
                   lg_model.c_str(), lg_domain.c_str(), lg_strategy.c_str());
      return kExitConfig;
    }
    const char* text = nullptr;
    emf_ledger_describe(guard.s, lg_model.c_str(), lg_domain.c_str(),
                        lg_strategy.c_str(), &text);
    if (text) std::printf("%s", text);
    std::printf("%s/%s/%s: %d B storage / %d B traffic\n", lg_model.c_str(),
                lg_domain.c_str(), lg_strategy.c_str(), entry.storage_bytes,
                entry.traffic_bytes);
    return kExitOk;
  }

  emf_status st = EMF_OK;
  if (stab->parsed()) {
    int64_t n = 0;
    st = emf_run_stability(guard.s, stab_out.c_str(), &n);
    if (st == EMF_OK) {
      print_csv_records(stab_out);
      std::printf("stability: %lld records -> %s\n",
                  static_cast<long long>(n), stab_out.c_str());
    }
  } else if (bench->parsed()) {
    int64_t n = 0;
    st = emf_run_throughput(guard.s, bench_out.c_str(), &n);
    if (st == EMF_OK) {
      print_csv_records(bench_out);
      std::printf("bench: %lld records -> %s\n", static_cast<long long>(n),
                  bench_out.c_str());
    }
  } else if (solve->parsed()) {
    int64_t n = 0;
    int max_newton = 0, max_fgmres = 0;
    st = emf_run_solve(guard.s, solve_out.c_str(), &n, &max_newton,
                       &max_fgmres);
    if (st == EMF_OK) {
      print_csv_records(solve_out);
      std::printf(
          "solve: %lld Newton steps -> %s (max Newton/increment %d, max "
          "FGMRES/solve %d)\n",
          static_cast<long long>(n), solve_out.c_str(), max_newton,
          max_fgmres);
    }
  }

  if (st != EMF_OK) {
    std::fprintf(stderr, "error: %s\n", emf_session_last_error(guard.s));
    return status_to_exit(st);
  }
  return kExitOk;
}
