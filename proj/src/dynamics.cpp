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

#include "hwinfer/dynamics.hpp"

#include <cmath>
#include <string>

#include "hwinfer/model.hpp"
#include "hwinfer/rng.hpp"

namespace hwinfer {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw BadInput("integrator: dt must be positive and finite");
  if (n_steps < 1) throw BadInput("integrator: n_steps must be >= 1");
  if (!(stop_tol >= 0.0))
    throw BadInput("integrator: stop_tol must be non-negative");
  if (max_steps < 1) throw BadInput("integrator: max_steps must be >= 1");
  if (save_stride < 1) throw BadInput("integrator: save_stride must be >= 1");
}

IntegratorConfig equilibrium_defaults() {
  IntegratorConfig cfg;
  cfg.dt = 0.5;         // relaxation tolerates large RK4 steps
  cfg.n_steps = 200000;
  cfg.max_steps = 400000;
  return cfg;
}

namespace {

bool positive_finite(const Vec& w) {
  return w.allFinite() && (w.array() > 0.0).all();
}

struct SizeOde {
  const SpatialSystem& sys;
  const Theta& theta;
  const HyperParams& hyper;

  // dW/dt; callers guarantee w > 0.
  Vec deriv(const Vec& w) const {
    const Vec d = dest_demand(sys, theta, w.array().log().matrix());
    return hyper.epsilon *
           (w.array() * (d.array() - hyper.kappa * w.array() + hyper.delta))
               .matrix();
  }

  // Balance residual kappa W - delta - D(W).
  Vec residual(const Vec& w) const {
    const Vec d = dest_demand(sys, theta, w.array().log().matrix());
    return (hyper.kappa * w.array() - hyper.delta - d.array()).matrix();
  }

  // One RK4 step. Returns the new state, or nothing when a stage left the
  // positive orthant / turned nonfinite (caller halves the step).
  std::optional<Vec> rk4(const Vec& w, double h) const {
    const Vec k1 = deriv(w);
    Vec s = w + (0.5 * h) * k1;
    if (!positive_finite(s)) return std::nullopt;
    const Vec k2 = deriv(s);
    s = w + (0.5 * h) * k2;
    if (!positive_finite(s)) return std::nullopt;
    const Vec k3 = deriv(s);
    s = w + h * k3;
    if (!positive_finite(s)) return std::nullopt;
    const Vec k4 = deriv(s);
    Vec next = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!positive_finite(next)) return std::nullopt;
    return next;
  }
};

void check_state(const char* op, const SpatialSystem& sys, const Vec& v,
                 bool require_positive) {
  if (v.size() != sys.n_dests())
    throw BadInput(std::string(op) + ": state length " +
                   std::to_string(v.size()) + " does not match " +
                   std::to_string(sys.n_dests()) + " destinations");
  if (!v.allFinite())
    throw BadInput(std::string(op) + ": state has nonfinite entries");
  if (require_positive && (v.array() <= 0.0).any())
    throw BadInput(std::string(op) + ": sizes must be positive");
}

}  // namespace

Trajectory simulate_ode(const SpatialSystem& sys, const Theta& theta,
                        const HyperParams& hyper, const Vec& w0,
                        const IntegratorConfig& cfg) {
  sys.validate();
  theta.validate();
  hyper.validate();
  cfg.validate();
  check_state("simulate_ode", sys, w0, /*require_positive=*/true);

  const SizeOde ode{sys, theta, hyper};
  Trajectory out;
  Vec w = w0;
  double t = 0.0;
  out.times.push_back(t);
  out.states.push_back(w.array().log().matrix());

  double h = cfg.dt;
  const double h_min = cfg.dt * 0x1.0p-40;
  long attempted = 0;
  for (long step = 0; step < cfg.n_steps;) {
    if (ode.deriv(w).cwiseAbs().maxCoeff() < cfg.stop_tol) break;
    auto next = ode.rk4(w, h);
    if (++attempted > cfg.max_steps)
      throw NoConvergence("simulate_ode: max_steps exceeded");
    if (!next) {
      h *= 0.5;
      if (h < h_min)
        throw NumericFailure(
            "simulate_ode: step size collapsed (stiff or invalid state)");
      continue;
    }
    w = *next;
    t += h;
    ++step;
    if (h < cfg.dt) h = std::min(cfg.dt, 2.0 * h);
    if (step % cfg.save_stride == 0 || step == cfg.n_steps) {
      out.times.push_back(t);
      out.states.push_back(w.array().log().matrix());
    }
  }
  return out;
}

Trajectory simulate_sde(const SpatialSystem& sys, const Theta& theta,
                        const HyperParams& hyper, const Vec& x0,
                        const IntegratorConfig& cfg,
                        unsigned long long seed) {
  sys.validate();
  theta.validate();
  hyper.validate();
  cfg.validate();
  check_state("simulate_sde", sys, x0, /*require_positive=*/false);

  const int m = sys.n_dests();
  const double noise = std::sqrt(2.0 * cfg.dt / hyper.gamma);
  Trajectory out;
  out.seed = seed;
  Vec x = x0;
  out.times.push_back(0.0);
  out.states.push_back(x);
  Vec grad(m);
  for (long step = 0; step < cfg.n_steps; ++step) {
    potential_with_grad(sys, theta, hyper, x, grad);
    for (int j = 0; j < m; ++j)
      x(j) += -grad(j) * cfg.dt +
              noise * counter_normal(seed, static_cast<std::uint64_t>(step),
                                     static_cast<std::uint64_t>(j));
    if (!x.allFinite())
      throw NumericFailure("simulate_sde: state diverged at step " +
                           std::to_string(step));
    if ((step + 1) % cfg.save_stride == 0 || step + 1 == cfg.n_steps) {
      out.times.push_back((step + 1) * cfg.dt);
      out.states.push_back(x);
    }
  }
  return out;
}

Vec find_equilibrium(const SpatialSystem& sys, const Theta& theta,
                     const HyperParams& hyper, const Vec& w0,
                     const IntegratorConfig& cfg) {
  sys.validate();
  theta.validate();
  hyper.validate();
  cfg.validate();
  check_state("find_equilibrium", sys, w0, /*require_positive=*/true);

  const SizeOde ode{sys, theta, hyper};
  Vec w = w0;
  double h = cfg.dt;
  const double h_min = cfg.dt * 0x1.0p-40;
  for (long attempted = 0; attempted < cfg.max_steps; ++attempted) {
    if (ode.residual(w).cwiseAbs().maxCoeff() < cfg.stop_tol) return w;
    auto next = ode.rk4(w, h);
    if (!next) {
      h *= 0.5;
      if (h < h_min)
        throw NumericFailure("find_equilibrium: step size collapsed");
      continue;
    }
    w = *next;
    if (h < cfg.dt) h = std::min(cfg.dt, 2.0 * h);
  }
  throw NoConvergence(
      "find_equilibrium: residual above stop_tol after max_steps");
}

double kappa_from_total(double sum_origin, double delta, int n_dests,
                        double total_size) {
  if (!(sum_origin > 0.0) || !std::isfinite(sum_origin))
    throw BadInput("kappa_from_total: sum_origin must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw BadInput("kappa_from_total: delta must be positive");
  if (n_dests < 1) throw BadInput("kappa_from_total: n_dests must be >= 1");
  if (!(total_size > 0.0) || !std::isfinite(total_size))
    throw BadInput("kappa_from_total: total_size must be positive");
  return (sum_origin + delta * n_dests) / total_size;
}

double r_squared(const SpatialSystem& sys, const Theta& theta,
                 const HyperParams& hyper, const Observation& y,
                 const IntegratorConfig& cfg) {
  y.validate();
  if (y.sizes.size() != sys.n_dests())
    throw BadInput("r_squared: observation length does not match system");
  const double n = static_cast<double>(y.sizes.size());
  const double y_mean = y.sizes.mean();
  const double y_var = (y.sizes.array() - y_mean).square().sum() / n;
  if (!(y_var > 0.0))
    throw BadInput("r_squared: observation variance is zero");
  const Vec w_pred = find_equilibrium(sys, theta, hyper, y.sizes, cfg);
  const Vec resid = y.sizes - w_pred;
  const double r_mean = resid.mean();
  const double r_var = (resid.array() - r_mean).square().sum() / n;
  return 1.0 - r_var / y_var;
}

}  // namespace hwinfer
