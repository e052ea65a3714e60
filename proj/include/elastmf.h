/* Copyright (c) 2026 The elastmf authors
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the elastmf shared library. A session wraps one parsed run
 * configuration; runs write CSV files and report errors through status
 * codes plus a per-session message buffer. All handles are opaque.
 */

#ifndef ELASTMF_H
#define ELASTMF_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum emf_status {
  EMF_OK = 0,
  EMF_ERR_CONFIG = 1,    /* malformed configuration or arguments */
  EMF_ERR_NUMERICAL = 2, /* solver or evaluation failure */
  EMF_ERR_IO = 3,        /* file could not be read or written */
  EMF_ERR_INVALID = 4    /* null handle or out pointer */
} emf_status;

typedef struct emf_session emf_session;

/* Creates a session from JSON text (NULL or "" gives the built-in
 * defaults). On success *out owns the session; destroy it with
 * emf_session_destroy. */
emf_status emf_session_create(const char* config_json, emf_session** out);
emf_status emf_session_create_from_file(const char* path, emf_session** out);
void emf_session_destroy(emf_session* s);

/* Message of the last failing call on this session (empty string if none).
 * The pointer stays valid until the next call on the same session. */
const char* emf_session_last_error(const emf_session* s);

/* The session's effective configuration serialized as JSON. Valid until
 * the next call on the session. */
const char* emf_session_config_json(emf_session* s);

emf_status emf_session_set_seed(emf_session* s, uint64_t seed);
emf_status emf_session_set_threads(emf_session* s, int threads);

/* Forward-stability sweep; writes one CSV with header
 * scale,model,formulation,quantity,max_rel_error,count_invalid.
 * Returns the number of records through n_records when non-NULL. */
emf_status emf_run_stability(emf_session* s, const char* csv_path,
                             int64_t* n_records);

/* Operator throughput benchmark; CSV header
 * p,n_elements,dofs,variant,operation,repetitions,seconds,dof_per_s,
 * bytes_per_dof. */
emf_status emf_run_throughput(emf_session* s, const char* csv_path,
                              int64_t* n_records);

/* Pressure-loaded deformed-cube solve; CSV header
 * increment,newton_iter,fgmres_iters,residual_before,residual_after,
 * seconds. max_fgmres/max_newton (when non-NULL) receive the worst counts
 * across increments. */
emf_status emf_run_solve(emf_session* s, const char* csv_path,
                         int64_t* n_records, int* max_newton, int* max_fgmres);

/* Per-quadrature-point byte accounting of one storage cell.
 * model: "cNH"|"iNH"|"fiber"; domain: "material"|"spatial";
 * strategy: "none"|"scalar"|"tensor". */
typedef struct emf_ledger_entry {
  int storage_bytes;
  int traffic_bytes;
} emf_ledger_entry;

emf_status emf_ledger_lookup(const char* model, const char* domain,
                             const char* strategy, emf_ledger_entry* out);

/* Field-by-field ledger rendering ("name bytes [traffic]" per line). The
 * buffer is session-owned and valid until the next call. */
emf_status emf_ledger_describe(emf_session* s, const char* model,
                               const char* domain, const char* strategy,
                               const char** text);

const char* emf_version(void);

#ifdef __cplusplus
}
#endif

#endif
