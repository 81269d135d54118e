// Copyright 2026 The hwinfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwinfer.h"

#include <cmath>
#include <string>
#include <utility>

#include "hwinfer/data_io.hpp"
#include "hwinfer/dynamics.hpp"
#include "hwinfer/errors.hpp"
#include "hwinfer/inference.hpp"
#include "hwinfer/model.hpp"
#include "hwinfer/samplers.hpp"
#include "hwinfer/types.hpp"
#include "json.hpp"

using nlohmann::json;

struct hw_system {
  hwinfer::SpatialSystem sys;
  hwinfer::Observation y;
  hwinfer::NormalizationReport report;
};

namespace {

thread_local std::string g_error;

template <typename F>
int guarded(F&& body) {
  g_error.clear();
  try {
    body();
    return HW_OK;
  } catch (const hwinfer::Error& e) {
    g_error = e.what();
    return static_cast<int>(e.status());
  } catch (const std::exception& e) {
    g_error = e.what();
    return HW_ERROR_INTERNAL;
  } catch (...) {
    g_error = "unknown failure";
    return HW_ERROR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr)
    throw hwinfer::BadInput(std::string(name) + " must not be null");
}

hwinfer::HyperParams to_hyper(const hw_hyper* h) {
  require(h, "hyper");
  hwinfer::HyperParams hp;
  hp.gamma = h->gamma;
  hp.delta = h->delta;
  hp.kappa = h->kappa;
  hp.epsilon = h->epsilon;
  hp.lambda = h->lambda;
  hp.total_size = h->total_size;
  return hp;
}

hwinfer::IntegratorConfig to_integrator(const hw_integrator* c) {
  if (c == nullptr) return hwinfer::IntegratorConfig{};
  hwinfer::IntegratorConfig cfg;
  cfg.dt = c->dt;
  cfg.n_steps = c->n_steps;
  cfg.stop_tol = c->stop_tol;
  cfg.max_steps = c->max_steps;
  cfg.save_stride = c->save_stride;
  return cfg;
}

void fill_report(const hwinfer::NormalizationReport& r, hw_norm_report* out) {
  if (out == nullptr) return;
  out->n_origins = r.n_origins;
  out->n_dests = r.n_dests;
  out->cost_sum_target = r.cost_sum_target;
  out->cost_sum_achieved = r.cost_sum_achieved;
  out->origin_sum_before = r.origin_sum_before;
  out->observed_sum_before = r.observed_sum_before;
  out->total_size = r.total_size;
  out->delta = r.delta;
  out->kappa = r.kappa;
}

json parse_metadata(const char* metadata_json) {
  if (metadata_json == nullptr) return json::object();
  json j = json::parse(metadata_json, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw hwinfer::BadInput("metadata must be a JSON object");
  return j;
}

// `value,density` rows for a marginal curve.
void save_curve(const std::string& path, const hwinfer::KdeCurve& c) {
  std::string out = "value,density\n";
  for (long i = 0; i < c.grid.size(); ++i) {
    out += hwinfer::format_double(c.grid(i));
    out.push_back(',');
    out += hwinfer::format_double(c.density(i));
    out.push_back('\n');
  }
  hwinfer::write_file_atomic(path, out);
}

}  // namespace

extern "C" {

const char* hw_version(void) { return "0.1.0"; }

const char* hw_last_error(void) { return g_error.c_str(); }

const char* hw_status_name(int status) {
  switch (status) {
    case HW_OK:
      return "ok";
    case HW_ERROR_INTERNAL:
      return "internal";
    case HW_ERROR_BAD_INPUT:
      return "bad_input";
    case HW_ERROR_NUMERIC:
      return "numeric_failure";
    case HW_ERROR_NO_CONVERGENCE:
      return "no_convergence";
    default:
      return "unknown";
  }
}

void hw_hyper_init(hw_hyper* h) {
  if (h == nullptr) return;
  const hwinfer::HyperParams d;
  h->gamma = d.gamma;
  h->delta = d.delta;
  h->kappa = d.kappa;
  h->epsilon = d.epsilon;
  h->lambda = d.lambda;
  h->total_size = d.total_size;
}

void hw_build_options_init(hw_build_options* o) {
  if (o == nullptr) return;
  const hwinfer::BuildOptions d;
  o->cost_sum_target = d.cost_sum_target;
  o->total_size = d.total_size;
  o->delta = 0.0;
  o->kappa = 0.0;
}

int hw_system_build(const char* origins_csv, const char* dests_csv,
                    const hw_build_options* opts, hw_system** out,
                    hw_norm_report* report) {
  return guarded([&] {
    require(origins_csv, "origins_csv");
    require(dests_csv, "dests_csv");
    require(out, "out");
    hwinfer::BuildOptions bo;
    if (opts != nullptr) {
      bo.cost_sum_target = opts->cost_sum_target;
      bo.total_size = opts->total_size;
      if (opts->delta > 0.0) bo.delta = opts->delta;
      if (opts->kappa > 0.0) bo.kappa = opts->kappa;
    }
    hwinfer::BuildResult r = hwinfer::build_system(
        hwinfer::load_zones(origins_csv), hwinfer::load_zones(dests_csv), bo);
    fill_report(r.report, report);
    *out = new hw_system{std::move(r.system), std::move(r.observation),
                         r.report};
  });
}

void hw_system_free(hw_system* sys) { delete sys; }

int hw_system_dims(const hw_system* sys, int32_t* n_origins,
                   int32_t* n_dests) {
  return guarded([&] {
    require(sys, "sys");
    if (n_origins != nullptr)
      *n_origins = static_cast<int32_t>(sys->sys.n_origins());
    if (n_dests != nullptr)
      *n_dests = static_cast<int32_t>(sys->sys.n_dests());
  });
}

void hw_gen_options_init(hw_gen_options* o) {
  if (o == nullptr) return;
  const hwinfer::SyntheticOptions d;
  o->cost_sum_target = d.cost_sum_target;
  o->origin_concentration = d.origin_concentration;
  o->pt_burn_in = d.pt_burn_in;
  o->pt_levels = d.pt.n_levels;
  o->pt_hot_factor = d.pt.hot_factor;
}

int hw_gen_synthetic(int32_t n_origins, int32_t n_dests, double alpha,
                     double beta, const hw_hyper* hyper, uint64_t seed,
                     const hw_gen_options* opts, const char* origins_csv_out,
                     const char* dests_csv_out, const char* x_true_csv_out) {
  return guarded([&] {
    require(origins_csv_out, "origins_csv_out");
    require(dests_csv_out, "dests_csv_out");
    require(x_true_csv_out, "x_true_csv_out");
    hwinfer::SyntheticOptions so;
    if (opts != nullptr) {
      so.cost_sum_target = opts->cost_sum_target;
      so.origin_concentration = opts->origin_concentration;
      so.pt_burn_in = opts->pt_burn_in;
      so.pt.n_levels = opts->pt_levels;
      so.pt.hot_factor = opts->pt_hot_factor;
    }
    const hwinfer::SyntheticData d = hwinfer::gen_synthetic(
        n_origins, n_dests, hwinfer::Theta{alpha, beta}, to_hyper(hyper),
        seed, so);
    hwinfer::save_zones(d.origins, origins_csv_out);
    hwinfer::save_zones(d.dests, dests_csv_out);
    hwinfer::save_vector_csv(x_true_csv_out, d.x_true);
  });
}

void hw_integrator_init(hw_integrator* c) {
  if (c == nullptr) return;
  const hwinfer::IntegratorConfig d;
  c->dt = d.dt;
  c->n_steps = d.n_steps;
  c->stop_tol = d.stop_tol;
  c->max_steps = d.max_steps;
  c->save_stride = d.save_stride;
}

int hw_simulate_ode(const hw_system* sys, double alpha, double beta,
                    const hw_hyper* hyper, const hw_integrator* cfg,
                    const char* w0_csv, const char* traj_csv_out) {
  return guarded([&] {
    require(sys, "sys");
    require(traj_csv_out, "traj_csv_out");
    const hwinfer::Vec w0 = w0_csv != nullptr
                                ? hwinfer::load_vector_csv(w0_csv)
                                : sys->y.sizes;
    const hwinfer::Trajectory tr =
        hwinfer::simulate_ode(sys->sys, hwinfer::Theta{alpha, beta},
                              to_hyper(hyper), w0, to_integrator(cfg));
    hwinfer::save_trajectory_csv(traj_csv_out, tr);
  });
}

int hw_simulate_sde(const hw_system* sys, double alpha, double beta,
                    const hw_hyper* hyper, const hw_integrator* cfg,
                    uint64_t seed, const char* x0_csv,
                    const char* traj_csv_out) {
  return guarded([&] {
    require(sys, "sys");
    require(traj_csv_out, "traj_csv_out");
    const hwinfer::Vec x0 = x0_csv != nullptr
                                ? hwinfer::load_vector_csv(x0_csv)
                                : hwinfer::Vec(sys->y.sizes.array().log());
    const hwinfer::Trajectory tr =
        hwinfer::simulate_sde(sys->sys, hwinfer::Theta{alpha, beta},
                              to_hyper(hyper), x0, to_integrator(cfg), seed);
    hwinfer::save_trajectory_csv(traj_csv_out, tr);
  });
}

int hw_equilibrium(const hw_system* sys, double alpha, double beta,
                   const hw_hyper* hyper, const hw_integrator* cfg,
                   const char* w_csv_out) {
  return guarded([&] {
    require(sys, "sys");
    require(w_csv_out, "w_csv_out");
    const hwinfer::Vec w = hwinfer::find_equilibrium(
        sys->sys, hwinfer::Theta{alpha, beta}, to_hyper(hyper), sys->y.sizes,
        cfg != nullptr ? to_integrator(cfg) : hwinfer::equilibrium_defaults());
    hwinfer::save_vector_csv(w_csv_out, w);
  });
}

int hw_r_squared(const hw_system* sys, double alpha, double beta,
                 const hw_hyper* hyper, double* out) {
  return guarded([&] {
    require(sys, "sys");
    require(out, "out");
    *out = hwinfer::r_squared(sys->sys, hwinfer::Theta{alpha, beta},
                              to_hyper(hyper), sys->y);
  });
}

void hw_grid_options_init(hw_grid_options* o) {
  if (o == nullptr) return;
  const hwinfer::GridSpec d;
  o->alpha_lo = d.alpha_lo;
  o->alpha_hi = d.alpha_hi;
  o->beta_lo = d.beta_lo;
  o->beta_hi = d.beta_hi;
  o->n = d.n;
  o->full_multistart = d.full_multistart ? 1 : 0;
}

int hw_grid(const hw_system* sys, const hw_hyper* hyper,
            const hw_grid_options* opts, const char* out_base,
            hw_grid_summary* summary) {
  return guarded([&] {
    require(sys, "sys");
    require(out_base, "out_base");
    hwinfer::GridSpec spec;
    if (opts != nullptr) {
      spec.alpha_lo = opts->alpha_lo;
      spec.alpha_hi = opts->alpha_hi;
      spec.beta_lo = opts->beta_lo;
      spec.beta_hi = opts->beta_hi;
      spec.n = opts->n;
      spec.full_multistart = opts->full_multistart != 0;
    }
    const hwinfer::GridResult r =
        hwinfer::grid_log_posterior(sys->sys, sys->y, to_hyper(hyper), spec);
    const std::string base(out_base);
    hwinfer::save_matrix_csv(base + ".logpost.csv", r.log_post);
    hwinfer::save_matrix_csv(base + ".mask.csv", r.mask.cast<double>());
    hwinfer::save_vector_csv(base + ".alpha.csv", r.alphas);
    hwinfer::save_vector_csv(base + ".beta.csv", r.betas);
    if (summary != nullptr) {
      summary->argmax_i = r.argmax_i;
      summary->argmax_j = r.argmax_j;
      const bool found = r.argmax_i >= 0 && r.argmax_j >= 0;
      summary->argmax_alpha =
          found ? r.alphas(r.argmax_i) : std::nan("");
      summary->argmax_beta = found ? r.betas(r.argmax_j) : std::nan("");
      summary->n_masked = (r.mask.array() != 0).count();
    }
  });
}

int hw_prior_sample(const hw_system* sys, double alpha, double beta,
                    const hw_hyper* hyper, int64_t n_samples,
                    int64_t burn_in, uint64_t seed,
                    const char* samples_csv_out, double* min_accept) {
  return guarded([&] {
    require(sys, "sys");
    require(samples_csv_out, "samples_csv_out");
    if (n_samples < 1) throw hwinfer::BadInput("need at least one sample");
    if (burn_in < 0) throw hwinfer::BadInput("negative burn-in");
    const hwinfer::PtResult r = hwinfer::parallel_tempering_sample(
        sys->sys, hwinfer::Theta{alpha, beta}, to_hyper(hyper),
        static_cast<int>(n_samples), static_cast<int>(burn_in), seed);
    hwinfer::Mat draws(static_cast<long>(r.samples.size()),
                       sys->sys.n_dests());
    for (std::size_t i = 0; i < r.samples.size(); ++i)
      draws.row(static_cast<long>(i)) = r.samples[i].transpose();
    hwinfer::save_matrix_csv(samples_csv_out, draws);
    if (min_accept != nullptr) *min_accept = r.hmc_accept_rate.minCoeff();
  });
}

void hw_infer_options_init(hw_infer_options* o) {
  if (o == nullptr) return;
  const hwinfer::GibbsConfig g;
  const hwinfer::RouletteConfig r;
  o->n_iters = g.n_iters;
  o->burn_in = g.burn_in;
  o->x_step = g.x_update.step;
  o->x_leapfrog = g.x_update.n_leapfrog;
  o->theta_step_alpha = g.theta_step_alpha;
  o->theta_step_beta = g.theta_step_beta;
  o->theta_lo_alpha = 0.0;
  o->theta_hi_alpha = 0.0;  // hi <= lo: default box
  o->theta_lo_beta = 0.0;
  o->theta_hi_beta = 0.0;
  o->adapt_stride = g.adapt_stride;
  o->method = HW_METHOD_SADDLE;
  o->roulette_tail_exponent = r.tail_exponent;
  o->roulette_max_terms = r.max_terms;
  o->ais_temps = r.ais.n_temps;
  o->ais_particles = r.ais.n_particles;
}

int hw_infer(const hw_system* sys, const hw_hyper* hyper,
             const hw_infer_options* opts, uint64_t seed,
             const char* metadata_json, const char* chain_csv_out,
             hw_infer_summary* summary) {
  return guarded([&] {
    require(sys, "sys");
    require(chain_csv_out, "chain_csv_out");
    json meta = parse_metadata(metadata_json);

    hwinfer::GibbsConfig gc;
    hwinfer::RouletteConfig rc;
    int method = HW_METHOD_SADDLE;
    if (opts != nullptr) {
      gc.n_iters = opts->n_iters;
      gc.burn_in = opts->burn_in;
      gc.x_update.step = opts->x_step;
      gc.x_update.n_leapfrog = opts->x_leapfrog;
      gc.theta_step_alpha = opts->theta_step_alpha;
      gc.theta_step_beta = opts->theta_step_beta;
      if (opts->theta_hi_alpha > opts->theta_lo_alpha &&
          opts->theta_hi_beta > opts->theta_lo_beta) {
        gc.theta_lo = hwinfer::Vec(2);
        gc.theta_hi = hwinfer::Vec(2);
        gc.theta_lo << opts->theta_lo_alpha, opts->theta_lo_beta;
        gc.theta_hi << opts->theta_hi_alpha, opts->theta_hi_beta;
      }
      gc.adapt_stride = opts->adapt_stride;
      method = opts->method;
      rc.tail_exponent = opts->roulette_tail_exponent;
      rc.max_terms = opts->roulette_max_terms;
      rc.ais.n_temps = opts->ais_temps;
      rc.ais.n_particles = opts->ais_particles;
    }
    if (method != HW_METHOD_SADDLE && method != HW_METHOD_PM)
      throw hwinfer::BadInput("unknown method code");

    const hwinfer::HyperParams hp = to_hyper(hyper);
    const hwinfer::GibbsResult res =
        method == HW_METHOD_PM
            ? hwinfer::pm_gibbs_chain(sys->sys, sys->y, hp, rc, seed, gc)
            : hwinfer::saddle_gibbs_chain(sys->sys, sys->y, hp, seed, gc);

    meta["seed"] = seed;
    meta["method"] = method == HW_METHOD_PM ? "pm" : "saddle";
    meta["theta_accept"] = res.theta_accept;
    meta["x_accept"] = res.x_accept;
    meta["estimator_failures"] = res.estimator_failures;
    meta["flagged_estimates"] = res.flagged_estimates;
    meta["theta_step"] = {res.theta_step(0), res.theta_step(1)};
    meta["x_step"] = res.x_step;
    hwinfer::save_chain_csv(chain_csv_out, meta.dump(), res.samples);

    if (summary != nullptr) {
      summary->theta_accept = res.theta_accept;
      summary->x_accept = res.x_accept;
      summary->estimator_failures = res.estimator_failures;
      summary->flagged_estimates = res.flagged_estimates;
      summary->theta_step_alpha = res.theta_step(0);
      summary->theta_step_beta = res.theta_step(1);
      summary->x_step = res.x_step;
    }
  });
}

int hw_summarize(const char* chain_csv, int32_t max_lag, int32_t kde_points,
                 const char* out_base, hw_summary* out) {
  return guarded([&] {
    require(chain_csv, "chain_csv");
    require(out, "out");
    const hwinfer::ChainFile cf = hwinfer::load_chain_csv(chain_csv);
    hwinfer::GibbsResult chain;
    chain.samples = cf.samples;
    const json meta = json::parse(cf.metadata_json, nullptr, false);
    if (meta.is_object()) {
      chain.theta_accept = meta.value("theta_accept", 0.0);
      chain.x_accept = meta.value("x_accept", 0.0);
    }
    const hwinfer::PosteriorSummary s = hwinfer::diagnostics(
        chain, max_lag > 0 ? max_lag : 50, kde_points > 0 ? kde_points : 200);
    if (out_base != nullptr) {
      const std::string base(out_base);
      if (s.alpha_kde.grid.size() > 0)
        save_curve(base + ".kde_alpha.csv", s.alpha_kde);
      if (s.beta_kde.grid.size() > 0)
        save_curve(base + ".kde_beta.csv", s.beta_kde);
      if (s.autocorr_defined) {
        std::string ac = "lag,alpha,beta\n";
        for (long k = 0; k < s.alpha_autocorr.size(); ++k) {
          ac += std::to_string(k + 1);
          ac.push_back(',');
          ac += hwinfer::format_double(s.alpha_autocorr(k));
          ac.push_back(',');
          ac += hwinfer::format_double(s.beta_autocorr(k));
          ac.push_back('\n');
        }
        hwinfer::write_file_atomic(base + ".autocorr.csv", ac);
      }
    }
    out->n_samples = s.n_samples;
    out->alpha_mean = s.alpha_mean;
    out->alpha_sd = s.alpha_sd;
    out->beta_mean = s.beta_mean;
    out->beta_sd = s.beta_sd;
    out->sign_positive_fraction = s.sign_positive_fraction;
    out->estimates_defined = s.estimates_defined ? 1 : 0;
    out->autocorr_defined = s.autocorr_defined ? 1 : 0;
    out->theta_accept = s.theta_accept;
    out->x_accept = s.x_accept;
    out->accept_in_target = s.accept_in_target ? 1 : 0;
  });
}

int hw_hash_file(const char* path, uint64_t* out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = hwinfer::fnv1a64_file(path);
  });
}

}  // extern "C"
