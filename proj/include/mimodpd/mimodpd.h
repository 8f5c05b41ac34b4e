/* C interface to the MIMO DPD simulator. All objects are opaque handles;
 * every call that can fail returns a mimodpd_status and leaves a message
 * retrievable with mimodpd_last_error() on the calling thread. */
#ifndef MIMODPD_H
#define MIMODPD_H

#include <stddef.h>
#include <stdint.h>

#if defined(MIMODPD_BUILDING_LIBRARY)
#define MIMODPD_API __attribute__((visibility("default")))
#else
#define MIMODPD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mimodpd_status {
  MIMODPD_OK = 0,
  MIMODPD_ERR_INVALID_ARGUMENT = 1,
  MIMODPD_ERR_SHAPE_MISMATCH = 2,
  MIMODPD_ERR_ILL_CONDITIONED = 3,
  MIMODPD_ERR_RANK_DEFICIENT = 4,
  MIMODPD_ERR_NON_FINITE = 5,
  MIMODPD_ERR_DIVERGED = 6,
  MIMODPD_ERR_TAPE_CONSUMED = 7,
  MIMODPD_ERR_IO = 8,
  MIMODPD_ERR_CONFIG = 9,
  MIMODPD_ERR_INTERNAL = 100
} mimodpd_status;

typedef struct mimodpd_config mimodpd_config;
typedef struct mimodpd_report mimodpd_report;

MIMODPD_API const char* mimodpd_version(void);
/* Message of the last failed call on this thread ("" if none). */
MIMODPD_API const char* mimodpd_last_error(void);
MIMODPD_API const char* mimodpd_status_name(mimodpd_status s);

/* ---- scenario configuration ---- */
MIMODPD_API size_t mimodpd_preset_count(void);
MIMODPD_API const char* mimodpd_preset_name(size_t index);

/* Library defaults: no seed and no user positions. */
MIMODPD_API mimodpd_status mimodpd_config_new(mimodpd_config** out);
MIMODPD_API mimodpd_status mimodpd_config_from_preset(const char* name, mimodpd_config** out);
/* Overlay JSON text / a JSON file; unknown keys fail with MIMODPD_ERR_CONFIG. */
MIMODPD_API mimodpd_status mimodpd_config_apply_json(mimodpd_config* cfg, const char* json_text);
MIMODPD_API mimodpd_status mimodpd_config_apply_file(mimodpd_config* cfg, const char* path);
MIMODPD_API mimodpd_status mimodpd_config_set_seed(mimodpd_config* cfg, uint64_t seed);
MIMODPD_API mimodpd_status mimodpd_config_validate(const mimodpd_config* cfg);
/* Canonical JSON. Writes at most cap bytes including the terminator; *needed
 * receives the full size including the terminator. buf may be NULL when cap is 0. */
MIMODPD_API mimodpd_status mimodpd_config_to_json(const mimodpd_config* cfg, char* buf,
                                                  size_t cap, size_t* needed);
MIMODPD_API size_t mimodpd_config_scheme_count(const mimodpd_config* cfg);
MIMODPD_API void mimodpd_config_free(mimodpd_config* cfg);

/* ---- running ---- */
typedef enum mimodpd_mode {
  MIMODPD_MODE_RUN = 0,   /* train + evaluate every listed scheme */
  MIMODPD_MODE_TRAIN = 1  /* train only: loss trace + checkpoints */
} mimodpd_mode;

typedef struct mimodpd_run_options {
  const char* out_dir; /* NULL or "" writes nothing */
  mimodpd_mode mode;
  int threads;         /* <= 0: 1 */
  int victims;         /* nonzero: victim OOB study */
} mimodpd_run_options;

MIMODPD_API mimodpd_status mimodpd_run(const mimodpd_config* cfg, const mimodpd_run_options* opt,
                                       mimodpd_report** out);

typedef struct mimodpd_scheme_metrics {
  double aclr_dbc;
  double trp_aclr_dbc;
  double sll_db;
  double main_lobe_dbm;
  double victim_median_mimo_dbm; /* NaN without a victim study */
  double victim_median_siso_dbm;
  double initial_loss;           /* NaN for untrained schemes */
  double final_loss;
  size_t batches;
} mimodpd_scheme_metrics;

MIMODPD_API size_t mimodpd_report_scheme_count(const mimodpd_report* r);
MIMODPD_API const char* mimodpd_report_scheme_name(const mimodpd_report* r, size_t i);
MIMODPD_API size_t mimodpd_report_user_count(const mimodpd_report* r);
MIMODPD_API mimodpd_status mimodpd_report_evm(const mimodpd_report* r, size_t scheme, size_t ue,
                                              double* evm_pct);
MIMODPD_API mimodpd_status mimodpd_report_metrics(const mimodpd_report* r, size_t scheme,
                                                  mimodpd_scheme_metrics* out);
MIMODPD_API double mimodpd_report_gain(const mimodpd_report* r);
MIMODPD_API size_t mimodpd_report_file_count(const mimodpd_report* r);
MIMODPD_API const char* mimodpd_report_file(const mimodpd_report* r, size_t i);
MIMODPD_API void mimodpd_report_free(mimodpd_report* r);

/* ---- FLOP counts ---- */
typedef struct mimodpd_complexity_params {
  int K, M_TD, M_FD, G, B, U, V, N, N_d, D, K_NN, N_conv1, K_C, K_S;
} mimodpd_complexity_params;

typedef enum mimodpd_flop_scheme {
  MIMODPD_FLOPS_TD_GMP_R1 = 0,
  MIMODPD_FLOPS_TD_GMP = 1,
  MIMODPD_FLOPS_FD_GMP = 2,
  MIMODPD_FLOPS_FD_NN = 3,
  MIMODPD_FLOPS_FD_CNN = 4
} mimodpd_flop_scheme;

MIMODPD_API void mimodpd_complexity_defaults(mimodpd_complexity_params* p);
/* Exact count as a fraction plus the approximation. */
MIMODPD_API mimodpd_status mimodpd_flops(const mimodpd_complexity_params* p,
                                         mimodpd_flop_scheme scheme, int64_t* exact_num,
                                         int64_t* exact_den, double* approx);
/* Writes complexity.csv, sweep_b.csv, sweep_u.csv, crossover.csv into out_dir. */
MIMODPD_API mimodpd_status mimodpd_complexity_run(const mimodpd_complexity_params* p,
                                                  const int* b_values, size_t n_b,
                                                  const int* u_values, size_t n_u,
                                                  const char* out_dir, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif /* MIMODPD_H */
