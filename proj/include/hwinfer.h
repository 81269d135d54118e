/* Copyright 2026 The hwinfer Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the hwinfer library. All functions return a status code
 * (HW_OK on success); on failure hw_last_error() holds a message for the
 * calling thread. Bulk data moves through CSV files; handles own their
 * memory until the matching *_free call.
 */

#ifndef HWINFER_H_
#define HWINFER_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define HW_OK 0
#define HW_ERROR_INTERNAL 1
#define HW_ERROR_BAD_INPUT 2
#define HW_ERROR_NUMERIC 3
#define HW_ERROR_NO_CONVERGENCE 4

/* Library version, e.g. "0.1.0". */
const char* hw_version(void);

/* Message from the most recent failed call on this thread ("" if none). */
const char* hw_last_error(void);

/* Stable lower-case token for a status code ("ok", "bad_input", ...). */
const char* hw_status_name(int status);

/* ------------------------------------------------------------- model size */

typedef struct hw_hyper {
  double gamma;      /* inverse temperature of the size density */
  double delta;      /* smallest-size endowment rate */
  double kappa;      /* running cost per unit size */
  double epsilon;    /* responsiveness time-scale */
  double lambda;     /* observation noise level (log scale) */
  double total_size; /* size budget K */
} hw_hyper;
void hw_hyper_init(hw_hyper* h);

/* ------------------------------------------------------- dataset assembly */

typedef struct hw_build_options {
  double cost_sum_target; /* grand total the cost matrix is rescaled to */
  double total_size;      /* budget K the observation is rescaled to */
  double delta;           /* <= 0 selects the smallest observed share */
  double kappa;           /* <= 0 selects (sum O + delta M) / K */
} hw_build_options;
void hw_build_options_init(hw_build_options* o);

typedef struct hw_norm_report {
  int32_t n_origins;
  int32_t n_dests;
  double cost_sum_target;
  double cost_sum_achieved;
  double origin_sum_before;
  double observed_sum_before;
  double total_size;
  double delta;
  double kappa;
} hw_norm_report;

typedef struct hw_system hw_system;

/* Load `id,lon,lat,quantity` zone tables and assemble a normalized system.
 * `opts` and `report` may be NULL. */
int hw_system_build(const char* origins_csv, const char* dests_csv,
                    const hw_build_options* opts, hw_system** out,
                    hw_norm_report* report);
void hw_system_free(hw_system* sys);
int hw_system_dims(const hw_system* sys, int32_t* n_origins,
                   int32_t* n_dests);

typedef struct hw_gen_options {
  double cost_sum_target;
  double origin_concentration; /* symmetric Dirichlet weight */
  int32_t pt_burn_in;          /* tempering burn-in for the latent draw */
  int32_t pt_levels;
  double pt_hot_factor;
} hw_gen_options;
void hw_gen_options_init(hw_gen_options* o);

/* Draw a ground-truth instance and write origin/destination zone tables
 * plus the latent log sizes (one value per line). `opts` may be NULL. */
int hw_gen_synthetic(int32_t n_origins, int32_t n_dests, double alpha,
                     double beta, const hw_hyper* hyper, uint64_t seed,
                     const hw_gen_options* opts, const char* origins_csv_out,
                     const char* dests_csv_out, const char* x_true_csv_out);

/* --------------------------------------------------------- size dynamics */

typedef struct hw_integrator {
  double dt;
  int64_t n_steps;
  double stop_tol;
  int64_t max_steps;
  int32_t save_stride;
} hw_integrator;
void hw_integrator_init(hw_integrator* c);

/* Relaxation path of the deterministic size dynamics, written as a
 * `t,x_1..x_M` trajectory of log sizes. `w0_csv` (one size per line)
 * may be NULL to start from the observation. */
int hw_simulate_ode(const hw_system* sys, double alpha, double beta,
                    const hw_hyper* hyper, const hw_integrator* cfg,
                    const char* w0_csv, const char* traj_csv_out);

/* Euler-Maruyama path of the log-size diffusion; `x0_csv` may be NULL to
 * start from the log observation. */
int hw_simulate_sde(const hw_system* sys, double alpha, double beta,
                    const hw_hyper* hyper, const hw_integrator* cfg,
                    uint64_t seed, const char* x0_csv,
                    const char* traj_csv_out);

/* Equilibrium sizes reached from the observation (one value per line). */
int hw_equilibrium(const hw_system* sys, double alpha, double beta,
                   const hw_hyper* hyper, const hw_integrator* cfg,
                   const char* w_csv_out);

/* 1 - Var(y - W_pred)/Var(y) at the equilibrium reached from y. */
int hw_r_squared(const hw_system* sys, double alpha, double beta,
                 const hw_hyper* hyper, double* out);

/* ------------------------------------------------------ posterior mapping */

typedef struct hw_grid_options {
  double alpha_lo, alpha_hi;
  double beta_lo, beta_hi;
  int32_t n;                /* cells per axis, left-inclusive */
  int32_t full_multistart;  /* nonzero: exhaustive minimizer starts */
} hw_grid_options;
void hw_grid_options_init(hw_grid_options* o);

typedef struct hw_grid_summary {
  int32_t argmax_i, argmax_j;
  double argmax_alpha, argmax_beta;
  int64_t n_masked;
} hw_grid_summary;

/* Log-posterior surface over the parameter box in the noise-free limit.
 * Writes <base>.logpost.csv, <base>.mask.csv, <base>.alpha.csv,
 * <base>.beta.csv. `summary` may be NULL. */
int hw_grid(const hw_system* sys, const hw_hyper* hyper,
            const hw_grid_options* opts, const char* out_base,
            hw_grid_summary* summary);

/* Tempered draws of the latent log sizes (one row per draw); reports the
 * smallest per-level move acceptance when `min_accept` is non-NULL. */
int hw_prior_sample(const hw_system* sys, double alpha, double beta,
                    const hw_hyper* hyper, int64_t n_samples,
                    int64_t burn_in, uint64_t seed,
                    const char* samples_csv_out, double* min_accept);

/* ------------------------------------------------------ posterior chains */

#define HW_METHOD_SADDLE 0
#define HW_METHOD_PM 1

typedef struct hw_infer_options {
  int64_t n_iters;  /* kept sweeps */
  int64_t burn_in;
  double x_step;
  int32_t x_leapfrog;
  double theta_step_alpha, theta_step_beta;
  double theta_lo_alpha, theta_hi_alpha; /* hi <= lo selects [0, 2] */
  double theta_lo_beta, theta_hi_beta;
  int64_t adapt_stride;
  int32_t method; /* HW_METHOD_SADDLE or HW_METHOD_PM */
  double roulette_tail_exponent;
  int32_t roulette_max_terms;
  int32_t ais_temps, ais_particles;
} hw_infer_options;
void hw_infer_options_init(hw_infer_options* o);

typedef struct hw_infer_summary {
  double theta_accept, x_accept;
  int64_t estimator_failures, flagged_estimates;
  double theta_step_alpha, theta_step_beta, x_step;
} hw_infer_summary;

/* Run the posterior chain and write it as a chain CSV whose first line is
 * `metadata_json` (a one-line JSON object, NULL for "{}") extended with the
 * seed, method, and realized acceptance statistics. `summary` may be
 * NULL. */
int hw_infer(const hw_system* sys, const hw_hyper* hyper,
             const hw_infer_options* opts, uint64_t seed,
             const char* metadata_json, const char* chain_csv_out,
             hw_infer_summary* summary);

typedef struct hw_summary {
  int64_t n_samples;
  double alpha_mean, alpha_sd;
  double beta_mean, beta_sd;
  double sign_positive_fraction;
  int32_t estimates_defined;
  int32_t autocorr_defined;
  double theta_accept, x_accept;
  int32_t accept_in_target;
} hw_summary;

/* Summarize a stored chain. When `out_base` is non-NULL, writes
 * <base>.kde_alpha.csv / <base>.kde_beta.csv (`value,density`) when the
 * sign-weighted estimates exist, and <base>.autocorr.csv
 * (`lag,alpha,beta`) when the autocorrelation is defined. */
int hw_summarize(const char* chain_csv, int32_t max_lag, int32_t kde_points,
                 const char* out_base, hw_summary* out);

/* FNV-1a hash of a file's bytes, as used in run manifests. */
int hw_hash_file(const char* path, uint64_t* out);

#ifdef __cplusplus
}
#endif

#endif /* HWINFER_H_ */
