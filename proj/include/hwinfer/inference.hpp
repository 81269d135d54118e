/*
 * Copyright 2026 The hwinfer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hwinfer/optimize.hpp"
#include "hwinfer/rng.hpp"
#include "hwinfer/samplers.hpp"
#include "hwinfer/types.hpp"

namespace hwinfer {

// Signed scalar kept in log space; magnitudes reach exp(+-thousands), far
// beyond double range, so only log|S| and the sign are ever materialized.
struct SignedLog {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;  // -1, 0, +1
};

struct ChainSample {
  long iter = 0;
  Theta theta;
  Vec x;
  int omega = 0;        // sign of the cached inverse-normalizer estimate
  double log_s_abs = 0; // log |S| for the current theta
};

struct RouletteConfig {
  double tail_exponent = 1.1;  // survival Pr(T >= k) = k^{-exponent}, k >= 1
  int max_terms = 1000;        // hard cap; hitting it flags the estimate
  AisConfig ais;               // one annealing run per series term
  void validate() const;
};

struct RouletteResult {
  SignedLog inv_z;
  int n_terms = 0;         // stopping time T (series uses T+1 draws)
  bool truncated = false;  // stopping time hit max_terms
};

// Stream of independent log-normalizer estimates for a fixed theta.
using LogZStream = std::function<double()>;

// Unbiased inverse-normalizer estimate by randomly truncated telescoping of
// the increasing-averages sequence V_i = (i+1)/sum_{k<=i} z_k:
//   S = V_0 + sum_{i=1..T} (V_i - V_{i-1}) / Pr(T >= i),   E[S] = 1/z.
// u in (0,1) sets the stopping time T = floor(u^{-1/q}). All arithmetic is
// factored by the first draw so nothing overflows.
RouletteResult roulette_core(const LogZStream& draw_log_z, double u,
                             double tail_exponent, int max_terms);

// The production estimator: each series term is one annealed-importance run.
RouletteResult roulette_inv_z(const SpatialSystem& sys, const Theta& theta,
                              const HyperParams& hyper,
                              const RouletteConfig& cfg, Rng& rng);

struct InvZEstimate {
  SignedLog value;
  bool flagged = false;  // estimate usable but quality-impaired (e.g. capped)
};

// Inverse-normalizer oracle injected into the Gibbs chain; swapping it
// switches between the exact pseudo-marginal method, the Gaussian
// approximation, and test-only exact references.
using InvZEstimator = std::function<InvZEstimate(const Theta&, Rng&)>;

InvZEstimator make_pm_inv_z(SpatialSystem sys, HyperParams hyper,
                            RouletteConfig cfg);
InvZEstimator make_saddle_inv_z(SpatialSystem sys, HyperParams hyper,
                                MinimizeOptions opts = {});

struct GibbsConfig {
  long n_iters = 10000;  // kept sweeps
  long burn_in = 1000;   // adaptation window, discarded
  HmcConfig x_update;    // step adapted in burn-in, then frozen
  double theta_step_alpha = 0.1;  // RW scales, adapted in burn-in
  double theta_step_beta = 0.1;
  Vec theta_lo, theta_hi;  // prior box; empty selects [0,2] x [0,2]
  long adapt_stride = 50;
  void validate() const;
};

struct GibbsResult {
  std::vector<ChainSample> samples;
  double theta_accept = 0;  // rates over kept sweeps (frozen kernel)
  double x_accept = 0;
  long estimator_failures = 0;   // theta proposals rejected by a failed S'
  long flagged_estimates = 0;    // accepted-or-not draws that were flagged
  Vec theta_step;                // frozen adapted scales (alpha, beta)
  double x_step = 0;             // frozen adapted leapfrog step
};

// Metropolis-within-Gibbs over (x, theta): one Hamiltonian x-update
// targeting pi(y|x) exp(-gamma V_theta(x)), then one reflective random-walk
// theta-update accepted with |S'| exp(-gamma V_theta'(x)) over the current
// values; S is cached per accepted theta and its sign recorded as omega.
GibbsResult gibbs_chain(const SpatialSystem& sys, const Observation& y,
                        const HyperParams& hyper, const InvZEstimator& est,
                        unsigned long long seed, const GibbsConfig& cfg = {});

// The two production chains: unbiased signed (roulette) and Gaussian
// approximated (sign-free, biased but stable at large gamma).
GibbsResult pm_gibbs_chain(const SpatialSystem& sys, const Observation& y,
                           const HyperParams& hyper,
                           const RouletteConfig& roulette,
                           unsigned long long seed,
                           const GibbsConfig& cfg = {});
GibbsResult saddle_gibbs_chain(const SpatialSystem& sys,
                               const Observation& y,
                               const HyperParams& hyper,
                               unsigned long long seed,
                               const GibbsConfig& cfg = {});

struct GridSpec {
  double alpha_lo = 0.0, alpha_hi = 2.0;
  double beta_lo = 0.0, beta_hi = 2.0;
  int n = 100;
  // full multistart per cell is exact but slow on large systems; when off,
  // cells reuse neighbouring modes plus a uniform start
  bool full_multistart = true;
  void validate() const;
};

struct GridResult {
  Vec alphas, betas;  // left-inclusive axes: lo + k (hi - lo)/n, k < n
  Mat log_post;       // rows follow alpha, columns follow beta; NaN if masked
  Eigen::MatrixXi mask;  // 0 ok, 1 invalid theta, 2 numeric failure
  int argmax_i = -1, argmax_j = -1;  // over unmasked cells
};

// Log posterior over a theta grid in the no-observation-noise limit: x is
// pinned to log y and each cell scores
//   log prior - gamma V_theta(log y) - saddle log z(theta).
GridResult grid_log_posterior(const SpatialSystem& sys, const Observation& y,
                              const HyperParams& hyper,
                              const GridSpec& spec = {});

// Sign-corrected posterior average sum omega g / sum omega.
double weighted_expectation(
    const std::vector<ChainSample>& chain,
    const std::function<double(const ChainSample&)>& g);

struct KdeCurve {
  Vec grid;
  Vec density;
  double bandwidth = 0;
};

// Sign-weighted Gaussian kernel density, renormalized to unit mass on the
// grid. Bandwidth defaults to Silverman's rule on the weighted sample.
KdeCurve kde_marginal(const Vec& samples, const Vec& weights, const Vec& grid,
                      std::optional<double> bandwidth = std::nullopt);

// Plain empirical autocorrelations at lags 1..max_lag; rejects a constant
// series (undefined).
Vec autocorrelation(const Vec& series, int max_lag);

struct PosteriorSummary {
  long n_samples = 0;
  double alpha_mean = 0, alpha_sd = 0;
  double beta_mean = 0, beta_sd = 0;
  double sign_positive_fraction = 0;
  bool estimates_defined = false;  // false when the sign sum is nonpositive
  Vec alpha_autocorr, beta_autocorr;  // lags 1..max_lag
  bool autocorr_defined = false;
  KdeCurve alpha_kde, beta_kde;
  double theta_accept = 0, x_accept = 0;
  bool accept_in_target = false;  // theta acceptance within [0.3, 0.7]
};

PosteriorSummary diagnostics(const GibbsResult& chain, int max_lag = 50,
                             int kde_points = 200);

}  // namespace hwinfer
