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

// End-to-end acceptance gate. Each criterion prints one verdict line
// (PASS / FAIL / SKIP) plus indented evidence; the process exits with the
// number of failed criteria. Every run is seeded, so the verdicts are
// reproducible bit-for-bit on a given toolchain.
//
// Wall-clock budgets are part of the criteria and are checked, not advisory.

#include <sys/stat.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "hwinfer/data_io.hpp"
#include "hwinfer/dynamics.hpp"
#include "hwinfer/inference.hpp"
#include "hwinfer/model.hpp"
#include "hwinfer/optimize.hpp"
#include "hwinfer/rng.hpp"
#include "hwinfer/samplers.hpp"
#include "quadrature.hpp"

using namespace hwinfer;
using Clock = std::chrono::steady_clock;

namespace {

int g_failed = 0;
int g_passed = 0;
int g_skipped = 0;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void verdict(int id, const char* label, bool pass, double seconds,
             double budget_s) {
  const bool in_budget = seconds < budget_s;
  const bool ok = pass && in_budget;
  (ok ? g_passed : g_failed) += 1;
  std::printf("criterion %2d  %s  %7.1f s%s  %s\n", id, ok ? "PASS" : "FAIL",
              seconds, in_budget ? "" : " (over budget)", label);
  std::fflush(stdout);
}

void skip(int id, const char* label, const char* why) {
  ++g_skipped;
  std::printf("criterion %2d  SKIP            %s -- %s\n", id, label, why);
  std::fflush(stdout);
}

void note(const char* fmt, ...) {
  std::va_list ap;
  va_start(ap, fmt);
  std::printf("              | ");
  std::vprintf(fmt, ap);
  std::printf("\n");
  va_end(ap);
  std::fflush(stdout);
}

// ---------------------------------------------------------------- fixtures

SpatialSystem two_zone(double o_scale) {
  SpatialSystem sys;
  sys.origin = (Vec(2) << 0.6 * o_scale, 0.4 * o_scale).finished();
  sys.cost = Mat(2, 2);
  sys.cost << 0.2, 0.7, 0.5, 0.3;
  return sys;
}

HyperParams hyper_for(double gamma, double delta, double sum_origin,
                      int n_dests, double lambda) {
  HyperParams hp;
  hp.gamma = gamma;
  hp.delta = delta;
  hp.kappa = kappa_from_total(sum_origin, delta, n_dests, 1.0);
  hp.epsilon = 1.0;
  hp.lambda = lambda;
  hp.total_size = 1.0;
  return hp;
}

// Log normalizer by nested adaptive Simpson over the two log-size axes,
// recentred at the global minimum so the integrand is O(1) at its peak.
double quad_log_z(const SpatialSystem& sys, const Theta& th,
                  const HyperParams& hp, double tol) {
  const MinimizeResult mr = global_minimum(sys, th, hp);
  const Mat h = hessian_potential(sys, th, hp, mr.x);
  const double curv = hp.gamma * std::max({h(0, 0), h(1, 1), 1e-6});
  const double sig = 1.0 / std::sqrt(curv);
  auto axis = [&](int j) {
    const std::vector<double> anchors{mr.x(j), std::log(0.9), std::log(0.05)};
    return hwtest::panels_around(mr.x(j) - 14.0, mr.x(j) + 6.0, anchors, sig);
  };
  const double shift = -hp.gamma * potential(sys, th, hp, mr.x);
  const hwtest::Fn2 logf = [&](double x0, double x1) {
    Vec x(2);
    x << x0, x1;
    return -hp.gamma * potential(sys, th, hp, x);
  };
  return hwtest::log_integral_2d(logf, axis(0), axis(1), shift, tol);
}

// Model draw: latent log sizes from the tempered sampler, observation by
// multiplying lognormal noise on top.
Observation observe_from_model(const SpatialSystem& sys, const Theta& th,
                               const HyperParams& hp, std::uint64_t pt_seed,
                               std::uint64_t noise_seed) {
  const PtResult pt = parallel_tempering_sample(sys, th, hp, 1, 1500,
                                                pt_seed, {});
  Rng noise(noise_seed);
  Vec y(sys.n_dests());
  for (int j = 0; j < sys.n_dests(); ++j)
    y(j) = std::exp(pt.samples.back()(j) + hp.lambda * noise.normal());
  Observation obs;
  obs.sizes = y;
  return obs;
}

struct WStats {
  double mean_a = 0, mean_b = 0, se_a = 0, se_b = 0;
};

// Sign-weighted posterior means with between-block standard errors; block
// means are near-independent once blocks span many autocorrelation times.
WStats block_stats(const GibbsResult& g, int n_blocks) {
  const std::size_t bs = g.samples.size() / n_blocks;
  std::vector<double> ba, bb;
  for (int b = 0; b < n_blocks; ++b) {
    double wa = 0, wb = 0, w = 0;
    for (std::size_t k = b * bs; k < (b + 1) * bs; ++k) {
      const ChainSample& s = g.samples[k];
      wa += s.omega * s.theta.alpha;
      wb += s.omega * s.theta.beta;
      w += s.omega;
    }
    ba.push_back(wa / w);
    bb.push_back(wb / w);
  }
  WStats s;
  for (int b = 0; b < n_blocks; ++b) {
    s.mean_a += ba[b] / n_blocks;
    s.mean_b += bb[b] / n_blocks;
  }
  for (int b = 0; b < n_blocks; ++b) {
    s.se_a += (ba[b] - s.mean_a) * (ba[b] - s.mean_a);
    s.se_b += (bb[b] - s.mean_b) * (bb[b] - s.mean_b);
  }
  s.se_a = std::sqrt(s.se_a / (n_blocks - 1) / n_blocks);
  s.se_b = std::sqrt(s.se_b / (n_blocks - 1) / n_blocks);
  return s;
}

GibbsResult thin_copy(const GibbsResult& g, int stride) {
  GibbsResult t = g;
  t.samples.clear();
  for (std::size_t k = 0; k < g.samples.size(); k += stride)
    t.samples.push_back(g.samples[k]);
  return t;
}

bool file_exists(const std::string& p) {
  struct stat st {};
  return ::stat(p.c_str(), &st) == 0;
}

// ------------------------------------------------------------ criterion 1

void criterion_conservation() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + static_cast<int>(rng.raw() % 50);
    const int m = 1 + static_cast<int>(rng.raw() % 20);
    SpatialSystem sys;
    sys.origin = Vec(n);
    for (int i = 0; i < n; ++i) sys.origin(i) = 0.1 + rng.uniform();
    sys.cost = Mat(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) sys.cost(i, j) = 0.1 + 2 * rng.uniform();
    Vec x(m);
    for (int j = 0; j < m; ++j) x(j) = rng.normal();
    const Theta th{2 * rng.uniform(), 2 * rng.uniform()};
    const Mat t = flows(sys, th, x);
    for (int i = 0; i < n; ++i)
      worst = std::max(worst,
                       std::abs(t.row(i).sum() - sys.origin(i)) /
                           sys.origin(i));
  }
  note("100 instances (origins<=50, zones<=20): worst relative row-sum "
       "defect %.2e (tol 1e-12)",
       worst);
  verdict(1, "every origin's flow row sums to its supply", worst < 1e-12,
          secs_since(t0), 1.0);
}

// ------------------------------------------------------------ criterion 2

void criterion_derivatives() {
  const auto t0 = Clock::now();
  Rng rng(202);
  double worst_g = 0, worst_h = 0, worst_tr = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + static_cast<int>(rng.raw() % 10);
    const int m = 5;
    SpatialSystem sys;
    sys.origin = Vec(n);
    for (int i = 0; i < n; ++i) sys.origin(i) = 0.1 + rng.uniform();
    sys.cost = Mat(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) sys.cost(i, j) = 0.1 + 2 * rng.uniform();
    HyperParams hp = hyper_for(10.0, 0.05 + 0.2 * rng.uniform(),
                               sys.origin.sum(), m, 0.1);
    const Theta th{0.2 + 1.5 * rng.uniform(), 0.1 + rng.uniform()};
    Vec x(m);
    for (int j = 0; j < m; ++j) x(j) = 0.5 * rng.normal();

    const Vec g = grad_potential(sys, th, hp, x);
    const Mat h = hessian_potential(sys, th, hp, x);
    const double gscale = std::max(1.0, g.cwiseAbs().maxCoeff());
    const double hscale = std::max(1.0, h.cwiseAbs().maxCoeff());
    const double step = 1e-5;
    for (int j = 0; j < m; ++j) {
      Vec xp = x, xm = x;
      xp(j) += step;
      xm(j) -= step;
      const double fd =
          (potential(sys, th, hp, xp) - potential(sys, th, hp, xm)) /
          (2 * step);
      worst_g = std::max(worst_g, std::abs(fd - g(j)) / gscale);
      const Vec gfd = (grad_potential(sys, th, hp, xp) -
                       grad_potential(sys, th, hp, xm)) /
                      (2 * step);
      for (int i = 0; i < m; ++i)
        worst_h = std::max(worst_h, std::abs(gfd(i) - h(i, j)) / hscale);
    }
    const double tr = h.trace();
    worst_tr = std::max(worst_tr,
                        std::abs(tr - laplacian_potential(sys, th, hp, x)) /
                            std::max(1.0, std::abs(tr)));
  }
  note("20 instances (5 zones): gradient vs central differences %.2e (tol "
       "1e-6), curvature vs differenced gradient %.2e (tol 1e-5)",
       worst_g, worst_h);
  note("matrix trace vs closed-form divergence %.2e (tol 1e-10)", worst_tr);
  verdict(2, "potential derivatives match finite differences",
          worst_g < 1e-6 && worst_h < 1e-5 && worst_tr < 1e-10,
          secs_since(t0), 5.0);
}

// ------------------------------------------------------------ criterion 3

void criterion_budget_calibration() {
  const auto t0 = Clock::now();
  Rng rng(303);
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + static_cast<int>(rng.raw() % 10);
    const int m = 2 + static_cast<int>(rng.raw() % 19);
    const double total = 0.5 + 2 * rng.uniform();
    SpatialSystem sys;
    sys.origin = Vec(n);
    for (int i = 0; i < n; ++i) sys.origin(i) = 0.1 + rng.uniform();
    sys.origin *= (0.5 + rng.uniform()) / sys.origin.sum();
    sys.cost = Mat(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) sys.cost(i, j) = 0.1 + 2 * rng.uniform();
    HyperParams hp;
    hp.gamma = 100.0;
    hp.delta = 0.01 + 0.3 * rng.uniform();
    hp.kappa = kappa_from_total(sys.origin.sum(), hp.delta, m, total);
    hp.epsilon = 1.0;
    hp.lambda = 0.1;
    hp.total_size = total;
    const Theta th{rng.uniform(), 0.2 + rng.uniform()};
    const Vec w0 = Vec::Constant(m, total / m);
    const Vec w = find_equilibrium(sys, th, hp, w0);
    worst = std::max(worst, std::abs(w.sum() - total));
  }
  const double pinned = kappa_from_total(1.0, 0.006, 49, 1.0);
  note("20 instances: worst |total size at equilibrium - budget| %.2e (tol "
       "1e-6)",
       worst);
  note("unit-supply 49-zone pin: running-cost level %.3f (expected 1.294)",
       pinned);
  verdict(3, "cost-level calibration makes equilibria absorb the budget",
          worst < 1e-6 && std::abs(pinned - 1.294) < 5e-4, secs_since(t0),
          10.0);
}

// ------------------------------------------------------------ criterion 4

void criterion_stationary_density() {
  const auto t0 = Clock::now();
  const SpatialSystem sys = two_zone(1.0);
  const HyperParams hp = hyper_for(100.0, 0.3, 1.0, 2, 0.1);
  const Theta th{0.8, 0.3};

  IntegratorConfig ic;
  ic.dt = 1e-2;
  ic.n_steps = 100000;
  ic.save_stride = 1;
  ic.max_steps = 2000000;
  Vec x = (Vec(2) << std::log(0.5), std::log(0.5)).finished();
  x = simulate_sde(sys, th, hp, x, ic, 17).states.back();  // burn-in

  const int bins = 50;
  const double lo = -6.0, hi = 1.0;
  std::vector<double> h0(bins, 0.0), h1(bins, 0.0);
  double out0 = 0, out1 = 0;
  long n = 0;
  for (int chunk = 0; chunk < 10; ++chunk) {
    const Trajectory t = simulate_sde(sys, th, hp, x, ic, 18 + chunk);
    x = t.states.back();
    for (std::size_t k = 1; k < t.states.size(); ++k) {
      ++n;
      const auto drop = [&](double v, std::vector<double>& h, double& out) {
        const int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        if (b < 0 || b >= bins)
          out += 1;
        else
          h[b] += 1;
      };
      drop(t.states[k](0), h0, out0);
      drop(t.states[k](1), h1, out1);
    }
  }

  // Reference marginals: strip integrals of the stationary density.
  const double lz = quad_log_z(sys, th, hp, 1e-8);
  auto marg = [&](int axis, double v) {
    const hwtest::Fn1 f = [&](double u) {
      Vec p(2);
      p(axis) = v;
      p(1 - axis) = u;
      return std::exp(-hp.gamma * potential(sys, th, hp, p) - lz);
    };
    const std::vector<double> panels = hwtest::panels_around(
        lo - 8.0, hi, {std::log(0.5), std::log(0.05)}, 0.1);
    return hwtest::integrate_panels(f, panels, 1e-9);
  };
  double tv0 = 0, tv1 = 0, q0 = 0, q1 = 0;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + (hi - lo) * b / bins;
    const double c = lo + (hi - lo) * (b + 1) / bins;
    const hwtest::Fn1 f0 = [&](double v) { return marg(0, v); };
    const hwtest::Fn1 f1 = [&](double v) { return marg(1, v); };
    const double p0 = hwtest::adaptive_simpson(f0, a, c, 1e-7);
    const double p1 = hwtest::adaptive_simpson(f1, a, c, 1e-7);
    q0 += p0;
    q1 += p1;
    tv0 += std::abs(p0 - h0[b] / n);
    tv1 += std::abs(p1 - h1[b] / n);
  }
  tv0 = 0.5 * (tv0 + std::abs((1 - q0) - out0 / n));
  tv1 = 0.5 * (tv1 + std::abs((1 - q1) - out1 / n));
  note("1e6 kept steps (dt 1e-2) vs quadrature marginals, 50 bins: total "
       "variation %.4f and %.4f (tol 0.05)",
       tv0, tv1);
  verdict(4, "noisy-dynamics histogram matches the stationary density",
          tv0 < 0.05 && tv1 < 0.05, secs_since(t0), 60.0);
}

// ------------------------------------------------------------ criterion 5

void criterion_saddle_bias_ladder() {
  const auto t0 = Clock::now();
  const SpatialSystem sys = two_zone(1.0);
  const Theta th{0.8, 0.3};
  double err[3] = {0, 0, 0};
  const double gammas[3] = {1e2, 1e3, 1e4};
  for (int k = 0; k < 3; ++k) {
    const HyperParams hp = hyper_for(gammas[k], 0.3, 1.0, 2, 0.1);
    err[k] = std::abs(saddle_log_z(sys, th, hp) -
                      quad_log_z(sys, th, hp, 1e-10));
  }
  note("|laplace - quadrature| log normalizer: %.6f, %.6f, %.6f nats at "
       "inverse temperatures 1e2, 1e3, 1e4",
       err[0], err[1], err[2]);
  verdict(5,
          "laplace normalizer error is small and shrinks as noise vanishes",
          err[2] < 0.05 && err[0] > err[1] && err[1] > err[2],
          secs_since(t0), 30.0);
}

// ------------------------------------------------------------ criterion 6

void criterion_annealed_unbiasedness() {
  const auto t0 = Clock::now();
  SpatialSystem sys = two_zone(0.1);  // weak coupling keeps variance finite
  const HyperParams hp = hyper_for(100.0, 0.45, 0.1, 2, 0.1);
  const Theta th{0.8, 0.3};
  const double lz = quad_log_z(sys, th, hp, 1e-9);
  AisConfig ac;
  ac.n_temps = 50;
  ac.n_particles = 10;
  std::vector<double> ratio;
  for (int k = 0; k < 100; ++k)
    ratio.push_back(std::exp(ais_log_z(sys, th, hp, 400 + k, ac).log_z - lz));
  double mean = 0, s2 = 0;
  for (double v : ratio) mean += v;
  mean /= 100;
  for (double v : ratio) s2 += (v - mean) * (v - mean);
  const double se = std::sqrt(s2 / 99) / 10.0;
  note("100 annealed estimates (50 temperatures x 10 particles): mean/true "
       "= %.4f, 3 standard errors = %.4f",
       mean, 3 * se);
  verdict(6, "annealed normalizer estimates average to the quadrature value",
          std::abs(mean - 1) < 3 * se, secs_since(t0), 300.0);
}

// ------------------------------------------------------------ criterion 7

void criterion_roulette_debiasing() {
  const auto t0 = Clock::now();

  // (a) exact enumeration: deterministic estimate stream that freezes after
  // three terms, so the truncated expectation is the full one.
  const double q = 1.1;
  const double limit = 0.4;  // 1/z for this stream
  const double draws[] = {3.2, 1.9, 2.8, 2.1, 2.5};
  auto stream_value = [&](int t) {
    int idx = 0;
    const LogZStream stream = [&]() {
      const double v = draws[idx < 4 ? idx : 4];
      ++idx;
      return std::log(v);
    };
    const double u = std::pow(t + 0.5, -q);
    const RouletteResult r = roulette_core(stream, u, q, 1000);
    if (r.n_terms != t) std::printf("              | stop-time mismatch!\n");
    return r.inv_z.sign * std::exp(r.inv_z.log_abs);
  };
  double expectation = 0;
  for (int t = 1; t <= 2; ++t)
    expectation += (std::pow(t, -q) - std::pow(t + 1, -q)) * stream_value(t);
  expectation += std::pow(3.0, -q) * stream_value(3);
  const double enum_err = std::abs(expectation - limit);
  const bool frozen = std::abs(stream_value(10) - stream_value(3)) < 1e-12;
  note("enumerated stopping times: |E[debiased] - limit| = %.2e (tol 1e-12)",
       enum_err);

  // (b) continuous case on the weak-coupling pair of zones.
  SpatialSystem sys = two_zone(0.1);
  const HyperParams hp = hyper_for(100.0, 0.45, 0.1, 2, 0.1);
  const Theta th{0.8, 0.3};
  const double lz = quad_log_z(sys, th, hp, 1e-9);
  RouletteConfig rc;
  rc.max_terms = 100000;
  rc.ais.n_temps = 50;
  rc.ais.n_particles = 10;
  Rng rng(31);
  std::vector<double> ratio;
  long truncated = 0;
  for (int k = 0; k < 500; ++k) {
    const RouletteResult r = roulette_inv_z(sys, th, hp, rc, rng);
    truncated += r.truncated;
    ratio.push_back(r.inv_z.sign * std::exp(r.inv_z.log_abs + lz));
  }
  double mean = 0, s2 = 0;
  for (double v : ratio) mean += v;
  mean /= 500;
  for (double v : ratio) s2 += (v - mean) * (v - mean);
  const double se = std::sqrt(s2 / 499) / std::sqrt(500.0);
  note("500 randomized-truncation draws: mean x z = %.4f, 3 standard errors "
       "= %.4f, truncated runs %ld",
       mean, 3 * se, truncated);
  verdict(7, "randomized truncation is unbiased for the inverse normalizer",
          enum_err < 1e-12 && frozen && std::abs(mean - 1) < 3 * se &&
              truncated == 0,
          secs_since(t0), 600.0);
}

// ------------------------------------------------------------ criterion 8

struct ChainRow {
  const char* name;
  GibbsResult res;
  bool counted;  // excluded rows print diagnostics but do not gate
};

std::vector<ChainRow> g_chains;

void criterion_posterior_recovery() {
  const auto t0 = Clock::now();
  const Theta truth{1.2, 0.3};
  bool ok_saddle = false, ok_pm = false, ok_low = false, ok_sharp = false;

  // Shared synthetic scene: 50 origins, 10 zones, near-deterministic
  // dynamics, 10% observation noise.
  const HyperParams h10 = hyper_for(1e4, 0.01, 1.0, 10, 0.1);
  SyntheticOptions so;
  so.cost_sum_target = 50.0 * 10.0 * 2.0;
  so.pt_burn_in = 2000;
  const SyntheticData data = gen_synthetic(50, 10, truth, h10, 2024, so);

  GibbsConfig gc;
  gc.n_iters = 20000;
  gc.burn_in = 2000;

  {  // (a) laplace-within-gibbs chain recovers the generating parameters
    const GibbsResult r =
        saddle_gibbs_chain(data.system, data.observation, h10, 8, gc);
    const PosteriorSummary d = diagnostics(r, 25);
    const double za = std::abs(d.alpha_mean - truth.alpha) / d.alpha_sd;
    const double zb = std::abs(d.beta_mean - truth.beta) / d.beta_sd;
    ok_saddle = za < 3 && zb < 3;
    note("[a] laplace chain, 20000 sweeps: mean (%.4f, %.4f), sd (%.4f, "
         "%.4f), offsets %.2f and %.2f posterior sds (tol 3) -> %s",
         d.alpha_mean, d.beta_mean, d.alpha_sd, d.beta_sd, za, zb,
         ok_saddle ? "ok" : "MISS");
    g_chains.push_back({"10-zone laplace chain", r, true});
  }

  {  // (b) signed-estimator chain on the same scene, run as configured
    RouletteConfig rc;
    rc.max_terms = 10000;
    rc.ais.n_temps = 10;
    rc.ais.n_particles = 5;
    const GibbsResult r =
        pm_gibbs_chain(data.system, data.observation, h10, rc, 9, gc);
    const PosteriorSummary d = diagnostics(r, 25);
    double sgn = 0;
    for (const auto& s : r.samples) sgn += s.omega > 0;
    const bool defined = d.estimates_defined && d.alpha_sd > 0 &&
                         d.beta_sd > 0;
    const double za =
        defined ? std::abs(d.alpha_mean - truth.alpha) / d.alpha_sd : 1e9;
    const double zb =
        defined ? std::abs(d.beta_mean - truth.beta) / d.beta_sd : 1e9;
    ok_pm = defined && za < 3 && zb < 3;
    note("[b] signed-estimator chain, 20000 sweeps: acceptance %.3f, "
         "positive-sign fraction %.3f, mean (%.4f, %.4f) -> %s",
         r.theta_accept, sgn / 20000, d.alpha_mean, d.beta_mean,
         ok_pm ? "ok" : "MISS");
    note("    estimator log-variance grows with the inverse temperature "
         "times the annealing work; at this scene it is ~160 nats, so the "
         "chain cannot leave its starting point (see README, acceptance "
         "gate section)");
    g_chains.push_back({"10-zone signed-estimator chain", r, false});
  }

  {  // (c) signed-estimator vs exact-normalizer chains agree where the
     //     estimator operates (two zones, moderate noise)
    const SpatialSystem sys = two_zone(1.0);
    const HyperParams hp = hyper_for(30.0, 0.15, 1.0, 2, 0.1);
    const Observation obs = observe_from_model(sys, truth, hp, 885, 886);
    RouletteConfig rc;
    rc.max_terms = 10000;
    rc.ais.n_temps = 50;
    rc.ais.n_particles = 10;
    const GibbsResult pm = pm_gibbs_chain(sys, obs, hp, rc, 27, gc);
    const InvZEstimator exact = [&](const Theta& t, Rng&) {
      InvZEstimate e;
      e.value.log_abs = -quad_log_z(sys, t, hp, 1e-6);
      e.value.sign = 1;
      return e;
    };
    const GibbsResult ex = gibbs_chain(sys, obs, hp, exact, 28, gc);
    const WStats wp = block_stats(pm, 20);
    const WStats we = block_stats(ex, 20);
    const double da = std::abs(wp.mean_a - we.mean_a);
    const double db = std::abs(wp.mean_b - we.mean_b);
    const double ca = 3 * std::sqrt(wp.se_a * wp.se_a + we.se_a * we.se_a);
    const double cb = 3 * std::sqrt(wp.se_b * wp.se_b + we.se_b * we.se_b);
    ok_low = da < ca && db < cb;
    note("[c] signed vs exact-normalizer chains (two zones): means (%.4f, "
         "%.4f) vs (%.4f, %.4f), gaps (%.4f, %.4f) vs 3 combined se "
         "(%.4f, %.4f) -> %s",
         wp.mean_a, wp.mean_b, we.mean_a, we.mean_b, da, db, ca, cb,
         ok_low ? "ok" : "MISS");
    g_chains.push_back({"2-zone signed-estimator chain", pm, true});
    g_chains.push_back({"2-zone exact-normalizer chain", ex, true});
  }

  {  // (d) laplace vs exact-normalizer chains agree in the sharp regime
    const SpatialSystem sys = two_zone(1.0);
    const HyperParams hp = hyper_for(1e4, 0.3, 1.0, 2, 0.1);
    const Observation obs = observe_from_model(sys, truth, hp, 883, 884);
    const InvZEstimator exact = [&](const Theta& t, Rng&) {
      InvZEstimate e;
      e.value.log_abs = -quad_log_z(sys, t, hp, 1e-6);
      e.value.sign = 1;
      return e;
    };
    const GibbsResult ex = gibbs_chain(sys, obs, hp, exact, 23, gc);
    const GibbsResult sd = saddle_gibbs_chain(sys, obs, hp, 24, gc);
    const WStats we = block_stats(ex, 20);
    const WStats ws = block_stats(sd, 20);
    const double da = std::abs(ws.mean_a - we.mean_a);
    const double db = std::abs(ws.mean_b - we.mean_b);
    const double ca = 3 * std::sqrt(ws.se_a * ws.se_a + we.se_a * we.se_a);
    const double cb = 3 * std::sqrt(ws.se_b * ws.se_b + we.se_b * we.se_b);
    ok_sharp = da < ca && db < cb;
    note("[d] laplace vs exact-normalizer chains (two zones, sharp): gaps "
         "(%.4f, %.4f) vs 3 combined se (%.4f, %.4f) -> %s",
         da, db, ca, cb, ok_sharp ? "ok" : "MISS");
    g_chains.push_back({"2-zone exact chain (sharp)", ex, true});
    g_chains.push_back({"2-zone laplace chain (sharp)", sd, true});
  }

  verdict(8, "posterior sampling recovers generating parameters",
          ok_saddle && ok_pm && ok_low && ok_sharp, secs_since(t0), 1800.0);
}

// ------------------------------------------------------------ criterion 9

void criterion_case_study() {
  const std::string base = "data/case_study/";
  if (!(file_exists(base + "origins.csv") &&
        file_exists(base + "destinations.csv"))) {
    skip(9, "reference case study",
         "no dataset at data/case_study/; criteria 1-8 form the gate");
    return;
  }
  // Dataset present: run the inference end-to-end and require finite,
  // in-range posterior estimates with healthy acceptance.
  const auto t0 = Clock::now();
  bool ok = false;
  try {
    const ZoneTable origins = load_zones(base + "origins.csv");
    const ZoneTable dests = load_zones(base + "destinations.csv");
    const BuildResult built = build_system(origins, dests, {});
    HyperParams hp;
    hp.gamma = 100.0;
    hp.delta = built.report.delta;
    hp.kappa = built.report.kappa;
    hp.epsilon = 1.0;
    hp.lambda = 0.1;
    hp.total_size = built.report.total_size;
    GibbsConfig gc;
    gc.n_iters = 5000;
    gc.burn_in = 1000;
    const GibbsResult r =
        saddle_gibbs_chain(built.system, built.observation, hp, 77, gc);
    const PosteriorSummary d = diagnostics(r, 25);
    ok = d.estimates_defined && d.alpha_mean > 0 && d.alpha_mean < 2 &&
         d.beta_mean > 0 && d.beta_mean < 2 && r.x_accept > 0.9;
    note("case study: mean (%.4f, %.4f), acceptance %.3f/%.3f", d.alpha_mean,
         d.beta_mean, r.theta_accept, r.x_accept);
  } catch (const std::exception& e) {
    note("case study failed: %s", e.what());
  }
  verdict(9, "reference case study", ok, secs_since(t0), 1800.0);
}

// ----------------------------------------------------------- criterion 10

void criterion_diagnostics() {
  const auto t0 = Clock::now();
  bool all = true;
  for (const ChainRow& row : g_chains) {
    const PosteriorSummary d = diagnostics(thin_copy(row.res, 25), 25);
    // A chain that never moved has no autocorrelation; the library flags
    // that instead of inventing one, and an unmixed chain cannot pass.
    const double la = d.autocorr_defined ? std::abs(d.alpha_autocorr(24)) : 1;
    const double lb = d.autocorr_defined ? std::abs(d.beta_autocorr(24)) : 1;
    const bool th_ok = row.res.theta_accept >= 0.3 &&
                       row.res.theta_accept <= 0.7;
    const bool x_ok = row.res.x_accept >= 0.9;
    const bool lag_ok = d.autocorr_defined && la < 0.2 && lb < 0.2;
    if (row.counted) all = all && th_ok && x_ok && lag_ok;
    if (d.autocorr_defined) {
      note(
          "%s%s: acceptance %.3f/%.3f, lag-25 autocorr (thin 25) "
          "%.3f/%.3f%s",
          row.name, row.counted ? "" : " [not gated: estimator degenerate]",
          row.res.theta_accept, row.res.x_accept, la, lb,
          (row.counted && !(th_ok && x_ok && lag_ok)) ? " -> out of band"
                                                      : "");
    } else {
      note("%s%s: acceptance %.3f/%.3f, autocorr undefined (chain never "
           "moved)%s",
           row.name, row.counted ? "" : " [not gated: estimator degenerate]",
           row.res.theta_accept, row.res.x_accept,
           row.counted ? " -> out of band" : "");
    }
  }
  verdict(10,
          "tuned chains sit in the acceptance band and decorrelate",
          all, secs_since(t0), 60.0);
}

}  // namespace

int main() {
  std::printf("acceptance gate: seeded end-to-end checks\n");
  struct Entry {
    int id;
    const char* label;
    void (*fn)();
  };
  const Entry entries[] = {
      {1, "flow conservation", criterion_conservation},
      {2, "potential derivatives", criterion_derivatives},
      {3, "equilibrium budget", criterion_budget_calibration},
      {4, "stationary density", criterion_stationary_density},
      {5, "saddle bias ladder", criterion_saddle_bias_ladder},
      {6, "annealed unbiasedness", criterion_annealed_unbiasedness},
      {7, "roulette debiasing", criterion_roulette_debiasing},
      {8, "posterior recovery", criterion_posterior_recovery},
      {9, "case study", criterion_case_study},
      {10, "chain diagnostics", criterion_diagnostics},
  };
  for (const Entry& e : entries) {
    try {
      e.fn();
    } catch (const std::exception& ex) {
      // A criterion that dies is a red criterion, not a dead gate.
      note("unhandled exception: %s", ex.what());
      verdict(e.id, e.label, false, 0.0, 1.0);
    }
  }
  std::printf("summary: %d passed, %d failed, %d skipped\n", g_passed,
              g_failed, g_skipped);
  return g_failed;
}
