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

#include "hwinfer/samplers.hpp"

#include <cmath>
#include <utility>

#include "hwinfer/errors.hpp"
#include "hwinfer/model.hpp"

namespace hwinfer {

void HmcConfig::validate() const {
  if (!(step > 0) || !std::isfinite(step))
    throw BadInput("hmc: step must be positive and finite");
  if (n_leapfrog <= 0) throw BadInput("hmc: n_leapfrog must be positive");
}

namespace {

// Integrates Hamilton's equations with leapfrog; returns false as soon as
// the path leaves the finite domain of the target.
bool leapfrog(const LogDensity& target, Vec& x, Vec& p, Vec& grad,
              double& logp, const HmcConfig& cfg) {
  for (int l = 0; l < cfg.n_leapfrog; ++l) {
    p += 0.5 * cfg.step * grad;
    x += cfg.step * p;
    if (!x.allFinite()) return false;
    logp = target(x, grad);
    if (!std::isfinite(logp) || !grad.allFinite()) return false;
    p += 0.5 * cfg.step * grad;
  }
  return true;
}

}  // namespace

HmcOutcome hmc_step(const LogDensity& target, Vec& x, const HmcConfig& cfg,
                    Rng& rng) {
  cfg.validate();
  if (!target) throw BadInput("hmc_step: target is empty");
  if (x.size() == 0) throw BadInput("hmc_step: state is empty");
  const Eigen::Index n = x.size();
  Vec grad(n);
  const double logp0 = target(x, grad);
  if (!std::isfinite(logp0) || !grad.allFinite())
    throw NumericFailure("hmc_step: log target not finite at current state");

  Vec p(n);
  for (Eigen::Index i = 0; i < n; ++i) p(i) = rng.normal();
  const double h0 = -logp0 + 0.5 * p.squaredNorm();

  Vec xq = x;
  double logpq = logp0;
  HmcOutcome out;
  out.log_target = logp0;
  if (!leapfrog(target, xq, p, grad, logpq, cfg)) return out;
  const double h1 = -logpq + 0.5 * p.squaredNorm();
  if (!std::isfinite(h1)) return out;
  if (rng.uniform() < std::exp(h0 - h1)) {
    x.swap(xq);
    out.accepted = true;
    out.log_target = logpq;
  }
  return out;
}

double hmc_energy_drift(const LogDensity& target, const Vec& x0,
                        const Vec& p0, const HmcConfig& cfg) {
  cfg.validate();
  if (x0.size() != p0.size())
    throw BadInput("hmc_energy_drift: state and momentum sizes differ");
  Vec x = x0, p = p0, grad(x0.size());
  double logp = target(x, grad);
  if (!std::isfinite(logp) || !grad.allFinite())
    throw NumericFailure("hmc_energy_drift: log target not finite at start");
  const double h0 = -logp + 0.5 * p.squaredNorm();
  if (!leapfrog(target, x, p, grad, logp, cfg))
    throw NumericFailure("hmc_energy_drift: path left the finite domain");
  return (-logp + 0.5 * p.squaredNorm()) - h0;
}

double reflect_into(double x, double lo, double hi) {
  if (!(hi > lo)) throw BadInput("reflect_into: interval must be nonempty");
  if (!std::isfinite(x)) throw BadInput("reflect_into: value must be finite");
  const double len = hi - lo;
  double y = std::fmod(x - lo, 2.0 * len);
  if (y < 0) y += 2.0 * len;
  return lo + (y <= len ? y : 2.0 * len - y);
}

Vec rw_reflect_step(const Vec& x, const Vec& step, const Vec& lo,
                    const Vec& hi, Rng& rng) {
  const Eigen::Index n = x.size();
  if (step.size() != n || lo.size() != n || hi.size() != n)
    throw BadInput("rw_reflect_step: argument sizes differ");
  Vec y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(step(j) >= 0) || !std::isfinite(step(j)))
      throw BadInput("rw_reflect_step: scales must be nonnegative");
    y(j) = reflect_into(x(j) + step(j) * rng.normal(), lo(j), hi(j));
  }
  return y;
}

void PtConfig::validate() const {
  if (n_levels <= 0) throw BadInput("pt: n_levels must be positive");
  if (!(hot_factor > 1) || !std::isfinite(hot_factor))
    throw BadInput("pt: hot_factor must exceed one");
  if (swap_stride <= 0) throw BadInput("pt: swap_stride must be positive");
  hmc.validate();
}

PtResult parallel_tempering_sample(const SpatialSystem& sys,
                                   const Theta& theta,
                                   const HyperParams& hyper, int n_samples,
                                   int burn_in, unsigned long long seed,
                                   const PtConfig& cfg) {
  cfg.validate();
  sys.validate_shape();
  theta.validate();
  hyper.validate();
  if (n_samples <= 0) throw BadInput("pt: n_samples must be positive");
  if (burn_in < 0) throw BadInput("pt: burn_in must be nonnegative");

  const int n_levels = cfg.n_levels;
  const Eigen::Index m = sys.n_dests();
  std::vector<double> gammas(n_levels);
  std::vector<HmcConfig> level_cfg(n_levels, cfg.hmc);
  for (int k = 0; k < n_levels; ++k) {
    const double frac =
        n_levels == 1 ? 0.0
                      : static_cast<double>(n_levels - 1 - k) / (n_levels - 1);
    gammas[k] = hyper.gamma * std::pow(1.0 / cfg.hot_factor, frac);
    level_cfg[k].step = cfg.hmc.step / std::sqrt(gammas[k]);
  }

  std::vector<Vec> state(
      n_levels, Vec::Constant(m, std::log(hyper.total_size / m)));
  Rng rng(seed);

  PtResult res;
  res.samples.reserve(n_samples);
  Eigen::VectorXi hmc_acc = Eigen::VectorXi::Zero(n_levels);
  Eigen::VectorXi swap_acc = Eigen::VectorXi::Zero(std::max(n_levels - 1, 0));
  long swap_rounds = 0;

  const long total = static_cast<long>(burn_in) + n_samples;
  for (long sweep = 0; sweep < total; ++sweep) {
    for (int k = 0; k < n_levels; ++k) {
      const double gk = gammas[k];
      const LogDensity target = [&sys, &theta, &hyper, gk](const Vec& x,
                                                           Vec& grad) {
        const double v = potential_with_grad(sys, theta, hyper, x, grad);
        grad *= -gk;
        return -gk * v;
      };
      hmc_acc(k) += hmc_step(target, state[k], level_cfg[k], rng).accepted;
    }
    if (n_levels > 1 && sweep % cfg.swap_stride == 0) {
      ++swap_rounds;
      std::vector<double> v(n_levels);
      for (int k = 0; k < n_levels; ++k)
        v[k] = potential(sys, theta, hyper, state[k]);
      for (int i = 0; i + 1 < n_levels; ++i) {
        const double log_a = (gammas[i + 1] - gammas[i]) * (v[i + 1] - v[i]);
        if (std::log(rng.uniform()) < log_a) {
          state[i].swap(state[i + 1]);
          std::swap(v[i], v[i + 1]);
          ++swap_acc(i);
        }
      }
    }
    if (sweep >= burn_in) res.samples.push_back(state[n_levels - 1]);
  }

  res.hmc_accept_rate = hmc_acc.cast<double>() / static_cast<double>(total);
  res.swap_accept_rate =
      swap_rounds > 0
          ? Vec(swap_acc.cast<double>() / static_cast<double>(swap_rounds))
          : Vec(swap_acc.size());
  return res;
}

Vec sample_base(const HyperParams& hyper, int n_dests, Rng& rng) {
  hyper.validate();
  if (n_dests <= 0) throw BadInput("sample_base: n_dests must be positive");
  const double a = hyper.gamma * hyper.epsilon * hyper.delta;
  const double b = hyper.gamma * hyper.epsilon * hyper.kappa;
  Vec x(n_dests);
  for (int j = 0; j < n_dests; ++j) {
    double w;
    do {
      w = rng.gamma(a, b);
    } while (!(w > 0));  // re-draw on underflow so logs stay finite
    x(j) = std::log(w);
  }
  return x;
}

double log_z_base(const HyperParams& hyper, int n_dests) {
  hyper.validate();
  if (n_dests <= 0) throw BadInput("log_z_base: n_dests must be positive");
  const double a = hyper.gamma * hyper.epsilon * hyper.delta;
  const double b = hyper.gamma * hyper.epsilon * hyper.kappa;
  return n_dests * (std::lgamma(a) - a * std::log(b));
}

void AisConfig::validate() const {
  if (n_temps < 2) throw BadInput("ais: n_temps must be at least two");
  if (n_particles <= 0) throw BadInput("ais: n_particles must be positive");
  hmc.validate();
}

AisResult ais_log_z(const SpatialSystem& sys, const Theta& theta,
                    const HyperParams& hyper, unsigned long long seed,
                    const AisConfig& cfg) {
  cfg.validate();
  sys.validate_shape();
  theta.validate();
  hyper.validate();

  const Eigen::Index m = sys.n_dests();
  const double ge = hyper.gamma * hyper.epsilon;
  const int n_temps = cfg.n_temps;
  Rng root(seed);

  // base-part value and gradient of the interpolated log density
  const auto base_part = [&hyper](const Vec& x, Vec& grad) {
    const Eigen::ArrayXd ex = x.array().exp();
    grad = (hyper.epsilon * (hyper.kappa * ex - hyper.delta)).matrix();
    return hyper.epsilon * (hyper.kappa * ex.sum() - hyper.delta * x.sum());
  };

  AisResult res;
  res.log_weights.resize(cfg.n_particles);
  long proposals = 0, accepts = 0;
  Vec gv(m), gp(m);

  for (int pi = 0; pi < cfg.n_particles; ++pi) {
    Rng rng = root.fork(static_cast<unsigned long long>(pi));
    Vec x = sample_base(hyper, static_cast<int>(m), rng);
    double lw = 0;
    for (int k = 1; k < n_temps; ++k) {
      const double t_prev = static_cast<double>(k - 1) / (n_temps - 1);
      const double t = static_cast<double>(k) / (n_temps - 1);
      const double v = potential(sys, theta, hyper, x);
      const double pb = base_part(x, gp);
      // log f1 - log f0 = gamma (P - V) evaluated at the current particle
      lw += (t - t_prev) * hyper.gamma * (pb - v);

      HmcConfig rung_cfg = cfg.hmc;
      // per-rung curvature scale of the bridge density: the base well
      // stiffness blends into the target's size-budget stiffness
      rung_cfg.step =
          cfg.hmc.step /
          std::sqrt(ge * ((1.0 - t) * hyper.delta +
                          t * hyper.kappa * hyper.total_size));
      const LogDensity target = [&, t](const Vec& xx, Vec& grad) {
        const double vv = potential_with_grad(sys, theta, hyper, xx, gv);
        const double pp = base_part(xx, gp);
        grad = -hyper.gamma * ((1.0 - t) * gp + t * gv);
        return -hyper.gamma * ((1.0 - t) * pp + t * vv);
      };
      accepts += hmc_step(target, x, rung_cfg, rng).accepted;
      ++proposals;
    }
    res.log_weights(pi) = lw;
  }

  // log mean weight via a shift-and-sum kept in a fixed order so results do
  // not depend on how particles were scheduled
  const double shift = res.log_weights.maxCoeff();
  double sum = 0, comp = 0;
  for (int pi = 0; pi < cfg.n_particles; ++pi) {
    const double term = std::exp(res.log_weights(pi) - shift) - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  res.log_z_base = log_z_base(hyper, static_cast<int>(m));
  res.log_z = res.log_z_base + shift + std::log(sum / cfg.n_particles);
  res.accept_rate =
      proposals > 0 ? static_cast<double>(accepts) / proposals : 0.0;
  return res;
}

}  // namespace hwinfer
