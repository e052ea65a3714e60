// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include "elastmf.h"

#include <algorithm>
#include <cstdio>
#include <string>

#include "elastmf/runner.hpp"

struct emf_session {
  emf::RunConfig cfg;
  std::string last_error;
  std::string text_buffer;
};

namespace {

emf_status fail(emf_session* s, emf_status code, const std::string& msg) {
  if (s) s->last_error = msg;
  return code;
}

template <typename Fn>
emf_status guarded(emf_session* s, Fn&& fn) {
  if (!s) return EMF_ERR_INVALID;
  s->last_error.clear();
  try {
    return fn();
  } catch (const emf::ConfigError& e) {
    return fail(s, EMF_ERR_CONFIG, e.what());
  } catch (const emf::IoError& e) {
    return fail(s, EMF_ERR_IO, e.what());
  } catch (const emf::Error& e) {
    return fail(s, EMF_ERR_NUMERICAL, e.what());
  } catch (const std::exception& e) {
    return fail(s, EMF_ERR_NUMERICAL, e.what());
  }
}

}  // namespace

extern "C" {

emf_status emf_session_create(const char* config_json, emf_session** out) {
  if (!out) return EMF_ERR_INVALID;
  *out = nullptr;
  auto* s = new emf_session;
  try {
    if (config_json && config_json[0] != '\0')
      s->cfg = emf::RunConfig::from_json_text(config_json);
    else
      s->cfg = emf::RunConfig::defaults();
  } catch (const emf::Error& e) {
    delete s;
    return EMF_ERR_CONFIG;
  }
  *out = s;
  return EMF_OK;
}

emf_status emf_session_create_from_file(const char* path, emf_session** out) {
  if (!out || !path) return EMF_ERR_INVALID;
  *out = nullptr;
  auto* s = new emf_session;
  try {
    s->cfg = emf::RunConfig::from_file(path);
  } catch (const emf::IoError&) {
    delete s;
    return EMF_ERR_IO;
  } catch (const emf::Error&) {
    delete s;
    return EMF_ERR_CONFIG;
  }
  *out = s;
  return EMF_OK;
}

void emf_session_destroy(emf_session* s) { delete s; }

const char* emf_session_last_error(const emf_session* s) {
  return s ? s->last_error.c_str() : "null session";
}

const char* emf_session_config_json(emf_session* s) {
  if (!s) return "";
  s->text_buffer = s->cfg.to_json_text();
  return s->text_buffer.c_str();
}

emf_status emf_session_set_seed(emf_session* s, uint64_t seed) {
  if (!s) return EMF_ERR_INVALID;
  s->cfg.seed = seed;
  return EMF_OK;
}

emf_status emf_session_set_threads(emf_session* s, int threads) {
  if (!s) return EMF_ERR_INVALID;
  if (threads < 1) return fail(s, EMF_ERR_CONFIG, "threads must be >= 1");
  s->cfg.threads = threads;
  return EMF_OK;
}

emf_status emf_run_stability(emf_session* s, const char* csv_path,
                             int64_t* n_records) {
  return guarded(s, [&]() -> emf_status {
    if (!csv_path) return fail(s, EMF_ERR_INVALID, "csv_path is null");
    const auto records = emf::run_stability(s->cfg);
    emf::write_csv(records, csv_path);
    if (n_records) *n_records = static_cast<int64_t>(records.size());
    return EMF_OK;
  });
}

emf_status emf_run_throughput(emf_session* s, const char* csv_path,
                              int64_t* n_records) {
  return guarded(s, [&]() -> emf_status {
    if (!csv_path) return fail(s, EMF_ERR_INVALID, "csv_path is null");
    const auto records = emf::run_throughput(s->cfg);
    emf::write_bench_csv(records, csv_path);
    if (n_records) *n_records = static_cast<int64_t>(records.size());
    return EMF_OK;
  });
}

emf_status emf_run_solve(emf_session* s, const char* csv_path,
                         int64_t* n_records, int* max_newton,
                         int* max_fgmres) {
  return guarded(s, [&]() -> emf_status {
    if (!csv_path) return fail(s, EMF_ERR_INVALID, "csv_path is null");
    const emf::SolveReport report = emf::run_solve(s->cfg);
    emf::write_solve_csv(report, csv_path);
    if (n_records) *n_records = static_cast<int64_t>(report.steps.size());
    if (max_newton) {
      int m = 0;
      for (int v : report.newton_per_increment) m = std::max(m, v);
      *max_newton = m;
    }
    if (max_fgmres) {
      int m = 0;
      for (const auto& st : report.steps) m = std::max(m, st.fgmres_iters);
      *max_fgmres = m;
    }
    return EMF_OK;
  });
}

emf_status emf_ledger_lookup(const char* model, const char* domain,
                             const char* strategy, emf_ledger_entry* out) {
  if (!model || !domain || !strategy || !out) return EMF_ERR_INVALID;
  try {
    const emf::CellLedger l = emf::cell_ledger(
        emf::model_from_string(model), emf::domain_from_string(domain),
        emf::strategy_from_string(strategy));
    out->storage_bytes = l.storage_bytes();
    out->traffic_bytes = l.traffic_bytes();
    return EMF_OK;
  } catch (const emf::Error&) {
    return EMF_ERR_CONFIG;
  }
}

emf_status emf_ledger_describe(emf_session* s, const char* model,
                               const char* domain, const char* strategy,
                               const char** text) {
  return guarded(s, [&]() -> emf_status {
    if (!model || !domain || !strategy || !text)
      return fail(s, EMF_ERR_INVALID, "null argument");
    const emf::CellLedger l = emf::cell_ledger(
        emf::model_from_string(model), emf::domain_from_string(domain),
        emf::strategy_from_string(strategy));
    std::string& buf = s->text_buffer;
    buf.clear();
    char line[128];
    for (const auto& f : l.fields) {
      std::snprintf(line, sizeof line, "%-8s %3d B%s\n", f.name, f.bytes,
                    f.in_traffic ? "" : "  (not loaded in tangent apply)");
      buf += line;
    }
    std::snprintf(line, sizeof line, "storage %d B, traffic %d B\n",
                  l.storage_bytes(), l.traffic_bytes());
    buf += line;
    *text = buf.c_str();
    return EMF_OK;
  });
}

const char* emf_version(void) { return "0.1.0"; }

}  // extern "C"
