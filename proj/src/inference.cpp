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

#include "hwinfer/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "hwinfer/errors.hpp"
#include "hwinfer/model.hpp"

namespace hwinfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

SignedLog signed_log_from(double factored, double log_factor) {
  SignedLog s;
  if (factored == 0) return s;
  s.sign = factored > 0 ? 1 : -1;
  s.log_abs = std::log(std::abs(factored)) + log_factor;
  return s;
}

}  // namespace

void RouletteConfig::validate() const {
  if (!(tail_exponent > 1))
    throw BadInput("roulette: tail exponent must exceed one");
  if (max_terms <= 0) throw BadInput("roulette: max_terms must be positive");
  ais.validate();
}

RouletteResult roulette_core(const LogZStream& draw_log_z, double u,
                             double tail_exponent, int max_terms) {
  if (!draw_log_z) throw BadInput("roulette: estimate stream is empty");
  if (!(tail_exponent > 1))
    throw BadInput("roulette: tail exponent must exceed one");
  if (max_terms <= 0) throw BadInput("roulette: max_terms must be positive");
  if (!(u > 0) || !(u < 1))
    throw BadInput("roulette: stopping variate must lie in (0,1)");

  // survival Pr(T >= k) = k^{-q}  <=>  T = floor(u^{-1/q})
  const double t_raw = std::floor(std::pow(u, -1.0 / tail_exponent));
  long stop = t_raw > static_cast<double>(max_terms)
                  ? max_terms + 1L
                  : static_cast<long>(t_raw);
  if (stop < 1) stop = 1;  // T >= 1 a.s.; guards pow() rounding at u -> 1
  RouletteResult res;
  if (stop > max_terms) {
    stop = max_terms;
    res.truncated = true;
  }
  res.n_terms = static_cast<int>(stop);

  // Everything is factored by the first draw z_0: the running values
  // v_i = V_i z_0 and s = S z_0 stay O(1) while V and S themselves span
  // exp(+-thousands).
  const double l0 = draw_log_z();
  if (!std::isfinite(l0))
    throw NumericFailure("roulette: nonfinite normalizer estimate");
  double sum = 1.0;     // sum_k exp(log z_k - l0)
  double v_prev = 1.0;  // V_0 z_0
  double s = 1.0;
  for (long i = 1; i <= stop; ++i) {
    const double li = draw_log_z();
    if (!std::isfinite(li))
      throw NumericFailure("roulette: nonfinite normalizer estimate");
    sum += std::exp(li - l0);
    const double v = static_cast<double>(i + 1) / sum;
    s += (v - v_prev) * std::pow(static_cast<double>(i), tail_exponent);
    v_prev = v;
  }
  res.inv_z = signed_log_from(s, -l0);
  return res;
}

RouletteResult roulette_inv_z(const SpatialSystem& sys, const Theta& theta,
                              const HyperParams& hyper,
                              const RouletteConfig& cfg, Rng& rng) {
  cfg.validate();
  const double u = rng.uniform();
  const LogZStream stream = [&]() {
    return ais_log_z(sys, theta, hyper, rng.raw(), cfg.ais).log_z;
  };
  return roulette_core(stream, u, cfg.tail_exponent, cfg.max_terms);
}

InvZEstimator make_pm_inv_z(SpatialSystem sys, HyperParams hyper,
                            RouletteConfig cfg) {
  cfg.validate();
  hyper.validate();
  sys.validate_shape();
  return [sys = std::move(sys), hyper, cfg](const Theta& theta,
                                            Rng& rng) -> InvZEstimate {
    const RouletteResult r = roulette_inv_z(sys, theta, hyper, cfg, rng);
    return InvZEstimate{r.inv_z, r.truncated};
  };
}

InvZEstimator make_saddle_inv_z(SpatialSystem sys, HyperParams hyper,
                                MinimizeOptions opts) {
  opts.validate();
  hyper.validate();
  sys.validate_shape();
  return [sys = std::move(sys), hyper, opts](const Theta& theta,
                                             Rng&) -> InvZEstimate {
    SignedLog s;
    s.log_abs = -saddle_log_z(sys, theta, hyper, opts);
    s.sign = 1;
    return InvZEstimate{s, false};
  };
}

void GibbsConfig::validate() const {
  if (n_iters <= 0) throw BadInput("gibbs: n_iters must be positive");
  if (burn_in < 0) throw BadInput("gibbs: burn_in must be nonnegative");
  if (adapt_stride <= 0) throw BadInput("gibbs: adapt_stride must be positive");
  if (!(theta_step_alpha > 0) || !(theta_step_beta > 0))
    throw BadInput("gibbs: theta step scales must be positive");
  x_update.validate();
  if (theta_lo.size() != theta_hi.size())
    throw BadInput("gibbs: prior box bounds differ in size");
  if (theta_lo.size() != 0 && theta_lo.size() != 2)
    throw BadInput("gibbs: prior box must cover exactly (alpha, beta)");
  for (Eigen::Index k = 0; k < theta_lo.size(); ++k)
    if (!(theta_hi(k) > theta_lo(k)))
      throw BadInput("gibbs: prior box is empty");
}

GibbsResult gibbs_chain(const SpatialSystem& sys, const Observation& y,
                        const HyperParams& hyper, const InvZEstimator& est,
                        unsigned long long seed, const GibbsConfig& cfg) {
  cfg.validate();
  sys.validate_shape();
  hyper.validate();
  y.validate();
  if (!est) throw BadInput("gibbs: estimator is empty");
  if (y.sizes.size() != sys.n_dests())
    throw BadInput("gibbs: observation size differs from the system");

  const Vec lo = cfg.theta_lo.size() ? cfg.theta_lo : Vec::Zero(2);
  const Vec hi = cfg.theta_hi.size() ? cfg.theta_hi : Vec::Constant(2, 2.0);
  const Vec log_y = y.sizes.array().log();
  const double lam2 = hyper.lambda * hyper.lambda;
  if (!(lam2 > 0)) throw BadInput("gibbs: lambda must be positive");

  Rng rng(seed);

  // start from the prior and pin sizes to the observation
  Vec theta_v(2);
  for (int k = 0; k < 2; ++k)
    theta_v(k) = lo(k) + rng.uniform() * (hi(k) - lo(k));
  Theta theta{theta_v(0), theta_v(1)};
  Vec x = log_y;

  GibbsResult res;
  SignedLog s_cur;
  bool have_s = false;
  for (int attempt = 0; attempt < 20 && !have_s; ++attempt) {
    try {
      const InvZEstimate e = est(theta, rng);
      s_cur = e.value;
      res.flagged_estimates += e.flagged;
      have_s = true;
    } catch (const Error& err) {
      if (err.status() == Status::bad_input) throw;
      ++res.estimator_failures;
      for (int k = 0; k < 2; ++k)
        theta_v(k) = lo(k) + rng.uniform() * (hi(k) - lo(k));
      theta = Theta{theta_v(0), theta_v(1)};
    }
  }
  if (!have_s)
    throw NoConvergence("gibbs: no feasible starting theta after 20 draws");

  // the configured leapfrog step is a dimensionless scale; the effective
  // step follows the posterior's stiffness
  HmcConfig x_cfg = cfg.x_update;
  const double x_scale = std::sqrt(
      hyper.gamma * hyper.epsilon *
          (hyper.delta + hyper.kappa * hyper.total_size) +
      1.0 / lam2);
  x_cfg.step = cfg.x_update.step / x_scale;
  Vec theta_step(2);
  theta_step << cfg.theta_step_alpha, cfg.theta_step_beta;

  const LogDensity x_target = [&](const Vec& xx, Vec& grad) {
    Vec gv(xx.size());
    const double v = potential_with_grad(sys, theta, hyper, xx, gv);
    const double ll = log_likelihood(y, xx, hyper);
    grad = (log_y - xx) / lam2 - hyper.gamma * gv;
    return ll - hyper.gamma * v;
  };

  const long total = cfg.burn_in + cfg.n_iters;
  res.samples.reserve(cfg.n_iters);
  long x_acc = 0, th_acc = 0;              // post burn-in
  long win_x = 0, win_x_acc = 0, win_th = 0, win_th_acc = 0;  // adaptation

  for (long it = 0; it < total; ++it) {
    const bool adapting = it < cfg.burn_in;

    // (a) size update
    const bool xok = hmc_step(x_target, x, x_cfg, rng).accepted;
    if (adapting) {
      ++win_x;
      win_x_acc += xok;
    } else {
      x_acc += xok;
    }

    // (b) parameter update
    const Vec prop = rw_reflect_step(theta_v, theta_step, lo, hi, rng);
    const Theta theta_p{prop(0), prop(1)};
    bool thok = false;
    try {
      const InvZEstimate e = est(theta_p, rng);
      res.flagged_estimates += e.flagged;
      const double log_a =
          (e.value.log_abs - hyper.gamma * potential(sys, theta_p, hyper, x)) -
          (s_cur.log_abs - hyper.gamma * potential(sys, theta, hyper, x));
      if (std::log(rng.uniform()) < log_a) {
        theta_v = prop;
        theta = theta_p;
        s_cur = e.value;
        thok = true;
      }
    } catch (const Error& err) {
      if (err.status() == Status::bad_input) throw;
      ++res.estimator_failures;  // failed estimate rejects the proposal
    }
    if (adapting) {
      ++win_th;
      win_th_acc += thok;
    } else {
      th_acc += thok;
    }

    if (adapting && (it + 1) % cfg.adapt_stride == 0 && win_x > 0) {
      const double rx = static_cast<double>(win_x_acc) / win_x;
      x_cfg.step *= rx < 0.9 ? 0.8 : 1.05;
      const double rt = static_cast<double>(win_th_acc) / win_th;
      if (rt < 0.3)
        theta_step *= 0.7;
      else if (rt > 0.7)
        theta_step *= 1.3;
      for (int k = 0; k < 2; ++k)
        theta_step(k) = std::min(theta_step(k), hi(k) - lo(k));
      win_x = win_x_acc = win_th = win_th_acc = 0;
    }

    if (!adapting) {
      ChainSample cs;
      cs.iter = it - cfg.burn_in;
      cs.theta = theta;
      cs.x = x;
      cs.omega = s_cur.sign;
      cs.log_s_abs = s_cur.log_abs;
      res.samples.push_back(std::move(cs));
    }
  }

  res.theta_accept = static_cast<double>(th_acc) / cfg.n_iters;
  res.x_accept = static_cast<double>(x_acc) / cfg.n_iters;
  res.theta_step = theta_step;
  res.x_step = x_cfg.step;
  return res;
}

GibbsResult pm_gibbs_chain(const SpatialSystem& sys, const Observation& y,
                           const HyperParams& hyper,
                           const RouletteConfig& roulette,
                           unsigned long long seed, const GibbsConfig& cfg) {
  return gibbs_chain(sys, y, hyper, make_pm_inv_z(sys, hyper, roulette), seed,
                     cfg);
}

GibbsResult saddle_gibbs_chain(const SpatialSystem& sys,
                               const Observation& y,
                               const HyperParams& hyper,
                               unsigned long long seed,
                               const GibbsConfig& cfg) {
  return gibbs_chain(sys, y, hyper, make_saddle_inv_z(sys, hyper), seed, cfg);
}

void GridSpec::validate() const {
  if (n <= 0) throw BadInput("grid: n must be positive");
  if (!(alpha_hi > alpha_lo) || !(beta_hi > beta_lo))
    throw BadInput("grid: axis ranges must be nonempty");
}

GridResult grid_log_posterior(const SpatialSystem& sys, const Observation& y,
                              const HyperParams& hyper,
                              const GridSpec& spec) {
  spec.validate();
  sys.validate_shape();
  hyper.validate();
  y.validate();
  if (y.sizes.size() != sys.n_dests())
    throw BadInput("grid: observation size differs from the system");

  const int n = spec.n;
  const Eigen::Index m = sys.n_dests();
  const Vec x_obs = y.sizes.array().log();
  const double log_prior = -std::log((spec.alpha_hi - spec.alpha_lo) *
                                     (spec.beta_hi - spec.beta_lo));

  GridResult g;
  g.alphas.resize(n);
  g.betas.resize(n);
  for (int k = 0; k < n; ++k) {
    g.alphas(k) = spec.alpha_lo + k * (spec.alpha_hi - spec.alpha_lo) / n;
    g.betas(k) = spec.beta_lo + k * (spec.beta_hi - spec.beta_lo) / n;
  }
  g.log_post = Mat::Constant(n, n, std::nan(""));
  g.mask = Eigen::MatrixXi::Zero(n, n);

  const Vec uniform_start =
      Vec::Constant(m, std::log(hyper.total_size / static_cast<double>(m)));
  std::vector<Vec> prev_row(n);  // converged modes from the previous row
  std::vector<Vec> cur_row(n);
  double best = kNegInf;

  for (int i = 0; i < n; ++i) {
    Vec left;  // converged mode from the previous cell in this row
    for (int j = 0; j < n; ++j) {
      const Theta theta{g.alphas(i), g.betas(j)};
      try {
        theta.validate();
      } catch (const Error&) {
        g.mask(i, j) = 1;
        continue;
      }
      std::vector<Vec> starts;
      if (left.size()) starts.push_back(left);
      if (prev_row[j].size()) starts.push_back(prev_row[j]);
      starts.push_back(uniform_start);
      if (spec.full_multistart && m > 1) {
        const double rest =
            std::log(0.1 * hyper.total_size / static_cast<double>(m - 1));
        for (Eigen::Index d = 0; d < m; ++d) {
          Vec s = Vec::Constant(m, rest);
          s(d) = std::log(0.9 * hyper.total_size);
          starts.push_back(std::move(s));
        }
      }
      MinimizeResult mode;
      bool have = false;
      for (const Vec& s : starts) {
        const MinimizeResult r = local_minimize(sys, theta, hyper, s);
        if (r.converged && (!have || r.value < mode.value)) {
          mode = r;
          have = true;
        }
      }
      if (!have) {
        g.mask(i, j) = 2;
        left = Vec();
        continue;
      }
      try {
        const double log_z = saddle_point_log_z(sys, theta, hyper, mode.x);
        g.log_post(i, j) = log_prior -
                           hyper.gamma * potential(sys, theta, hyper, x_obs) -
                           log_z;
      } catch (const Error& err) {
        if (err.status() == Status::bad_input) throw;
        g.mask(i, j) = 2;
        left = Vec();
        continue;
      }
      left = mode.x;
      cur_row[j] = mode.x;
      if (g.log_post(i, j) > best) {
        best = g.log_post(i, j);
        g.argmax_i = i;
        g.argmax_j = j;
      }
    }
    prev_row.swap(cur_row);
    for (Vec& v : cur_row) v = Vec();
  }
  return g;
}

double weighted_expectation(
    const std::vector<ChainSample>& chain,
    const std::function<double(const ChainSample&)>& g) {
  if (chain.empty()) throw BadInput("weighted_expectation: empty chain");
  if (!g) throw BadInput("weighted_expectation: empty integrand");
  double num = 0;
  long denom = 0;
  long positive = 0;
  for (const ChainSample& cs : chain) {
    num += cs.omega * g(cs);
    denom += cs.omega;
    positive += cs.omega > 0;
  }
  if (denom <= 0) {
    const double frac = static_cast<double>(positive) / chain.size();
    throw NumericFailure(
        "weighted_expectation: sign sum is not positive (positive fraction " +
        std::to_string(frac) + ")");
  }
  return num / static_cast<double>(denom);
}

KdeCurve kde_marginal(const Vec& samples, const Vec& weights, const Vec& grid,
                      std::optional<double> bandwidth) {
  const Eigen::Index n = samples.size();
  if (n < 2) throw BadInput("kde: need at least two samples");
  if (weights.size() != n)
    throw BadInput("kde: weights and samples differ in length");
  if (grid.size() < 2) throw BadInput("kde: grid needs at least two points");
  if (!samples.allFinite() || !weights.allFinite() || !grid.allFinite())
    throw BadInput("kde: inputs must be finite");

  const double wsum = weights.sum();
  if (!(wsum > 0)) throw BadInput("kde: weight sum must be positive");

  double h;
  if (bandwidth) {
    h = *bandwidth;
    if (!(h > 0)) throw BadInput("kde: bandwidth must be positive");
  } else {
    // Silverman's rule on the weighted sample
    const double w2 = weights.cwiseAbs2().sum();
    const double n_eff = wsum * wsum / w2;
    if (!(n_eff >= 2)) throw BadInput("kde: fewer than two effective samples");
    const double mean = weights.dot(samples) / wsum;
    const double var =
        weights.dot((samples.array() - mean).square().matrix()) / wsum;
    // relative floor: numerically constant samples have no usable spread
    const double tiny = 1e-12 * (std::abs(mean) + 1.0);
    if (!(var > tiny * tiny))
      throw BadInput("kde: weighted variance is not positive");
    h = std::sqrt(var) * std::pow(4.0 / (3.0 * n_eff), 0.2);
  }

  KdeCurve out;
  out.grid = grid;
  out.bandwidth = h;
  out.density.resize(grid.size());
  const double norm = 1.0 / (wsum * h * std::sqrt(2.0 * M_PI));
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const Eigen::ArrayXd z = (samples.array() - grid(k)) / h;
    out.density(k) = norm * (weights.array() * (-0.5 * z.square()).exp()).sum();
  }
  // renormalize to unit mass on the grid (trapezoid)
  double mass = 0;
  for (Eigen::Index k = 0; k + 1 < grid.size(); ++k)
    mass += 0.5 * (out.density(k) + out.density(k + 1)) *
            (grid(k + 1) - grid(k));
  if (!(mass > 0)) throw NumericFailure("kde: grid mass is not positive");
  out.density /= mass;
  return out;
}

Vec autocorrelation(const Vec& series, int max_lag) {
  const Eigen::Index n = series.size();
  if (n < 2) throw BadInput("autocorrelation: series too short");
  if (max_lag <= 0 || max_lag >= n)
    throw BadInput("autocorrelation: lag range invalid");
  const double mean = series.mean();
  const Eigen::ArrayXd c = series.array() - mean;
  const double var = c.square().sum();
  // relative floor: a chain frozen at one value is constant up to rounding
  const double tiny = 1e-12 * (std::abs(mean) + 1.0);
  if (!(var > static_cast<double>(n) * tiny * tiny))
    throw NumericFailure("autocorrelation: series is constant");
  Vec rho(max_lag);
  for (int k = 1; k <= max_lag; ++k)
    rho(k - 1) = (c.head(n - k) * c.tail(n - k)).sum() / var;
  return rho;
}

PosteriorSummary diagnostics(const GibbsResult& chain, int max_lag,
                             int kde_points) {
  if (chain.samples.empty()) throw BadInput("diagnostics: empty chain");
  if (kde_points < 2) throw BadInput("diagnostics: kde_points too small");
  const long n = static_cast<long>(chain.samples.size());

  PosteriorSummary s;
  s.n_samples = n;
  s.theta_accept = chain.theta_accept;
  s.x_accept = chain.x_accept;
  s.accept_in_target = chain.theta_accept >= 0.3 && chain.theta_accept <= 0.7;

  Vec alpha(n), beta(n), w(n);
  long positive = 0;
  for (long i = 0; i < n; ++i) {
    alpha(i) = chain.samples[i].theta.alpha;
    beta(i) = chain.samples[i].theta.beta;
    w(i) = chain.samples[i].omega;
    positive += chain.samples[i].omega > 0;
  }
  s.sign_positive_fraction = static_cast<double>(positive) / n;

  const double wsum = w.sum();
  if (wsum > 0) {
    s.estimates_defined = true;
    s.alpha_mean = w.dot(alpha) / wsum;
    s.beta_mean = w.dot(beta) / wsum;
    const double va =
        w.dot((alpha.array() - s.alpha_mean).square().matrix()) / wsum;
    const double vb =
        w.dot((beta.array() - s.beta_mean).square().matrix()) / wsum;
    s.alpha_sd = va > 0 ? std::sqrt(va) : 0;
    s.beta_sd = vb > 0 ? std::sqrt(vb) : 0;
  } else {
    s.alpha_mean = s.beta_mean = s.alpha_sd = s.beta_sd = std::nan("");
  }

  const int lag = static_cast<int>(std::min<long>(max_lag, n - 1));
  try {
    if (lag >= 1) {
      s.alpha_autocorr = autocorrelation(alpha, lag);
      s.beta_autocorr = autocorrelation(beta, lag);
      s.autocorr_defined = true;
    }
  } catch (const NumericFailure&) {
    s.autocorr_defined = false;  // constant chain: undefined, flagged
  }

  if (s.estimates_defined && n >= 2) {
    auto grid_for = [&](const Vec& v, double sd) {
      const double pad = std::max(3.0 * sd, 1e-6);
      const double a = v.minCoeff() - pad, b = v.maxCoeff() + pad;
      Vec gr(kde_points);
      for (int k = 0; k < kde_points; ++k)
        gr(k) = a + k * (b - a) / (kde_points - 1);
      return gr;
    };
    try {
      s.alpha_kde = kde_marginal(alpha, w, grid_for(alpha, s.alpha_sd));
      s.beta_kde = kde_marginal(beta, w, grid_for(beta, s.beta_sd));
    } catch (const Error&) {
      // degenerate marginal (e.g. a never-moving chain); leave curves empty
    }
  }
  return s;
}

}  // namespace hwinfer
