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

#include "hwinfer/optimize.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "hwinfer/errors.hpp"
#include "hwinfer/model.hpp"

namespace hwinfer {

void MinimizeOptions::validate() const {
  if (max_iters <= 0) throw BadInput("minimize: max_iters must be positive");
  if (!(grad_tol > 0)) throw BadInput("minimize: grad_tol must be positive");
  if (memory <= 0) throw BadInput("minimize: memory must be positive");
}

MinimizeResult lbfgs_minimize(const Objective& f, const Vec& x0,
                              const MinimizeOptions& opts) {
  opts.validate();
  if (!f) throw BadInput("minimize: objective is empty");
  if (x0.size() == 0) throw BadInput("minimize: start point is empty");
  if (!x0.allFinite()) throw BadInput("minimize: start point must be finite");

  const Eigen::Index n = x0.size();
  Vec x = x0;
  Vec g(n);
  double fx = f(x, g);
  if (!std::isfinite(fx) || !g.allFinite())
    throw NumericFailure("minimize: objective not finite at the start point");

  std::deque<Vec> s_hist, y_hist;
  std::deque<double> rho_hist;
  constexpr double c1 = 1e-4;  // sufficient-decrease slope fraction
  constexpr double c2 = 0.9;   // weak Wolfe curvature fraction

  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (g.cwiseAbs().maxCoeff() < opts.grad_tol) break;

    // Two-loop recursion for d = -H g.
    Vec d = -g;
    const int k = static_cast<int>(s_hist.size());
    std::vector<double> alpha(static_cast<size_t>(k));
    for (int i = k - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (k > 0)
      d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }
    double gd = g.dot(d);
    if (!(gd < 0)) {  // curvature history went stale; restart from descent
      d = -g;
      gd = g.dot(d);
    }

    // Weak Wolfe line search by bracketing: a step that passes both tests
    // guarantees positive curvature for the history update below. If the
    // bracket collapses first, the best sufficient-decrease point still
    // makes progress.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double t = 1.0;
    Vec x_new(n), g_new(n), x_best(n), g_best(n);
    double f_new = 0, f_best = 0;
    bool accepted = false, have_best = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + t * d;
      bool armijo = false;
      if (x_new.allFinite()) {
        f_new = f(x_new, g_new);
        armijo = std::isfinite(f_new) && g_new.allFinite() &&
                 f_new <= fx + c1 * t * gd;
      }
      if (!armijo) {
        hi = t;
      } else {
        if (!have_best || f_new < f_best) {
          x_best = x_new;
          g_best = g_new;
          f_best = f_new;
          have_best = true;
        }
        if (g_new.dot(d) >= c2 * gd) {
          accepted = true;
          break;
        }
        lo = t;
      }
      t = std::isinf(hi) ? 2.0 * lo : 0.5 * (lo + hi);
    }
    if (!accepted) {
      if (!have_best) break;  // no descent at representable steps
      x_new = std::move(x_best);
      g_new = std::move(g_best);
      f_new = f_best;
    }

    const Vec s = x_new - x;
    const Vec yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
  }

  MinimizeResult res;
  res.x = std::move(x);
  res.value = fx;
  res.grad_norm = g.cwiseAbs().maxCoeff();
  res.iters = it;
  res.converged = res.grad_norm < opts.grad_tol;
  return res;
}

MinimizeResult local_minimize(const SpatialSystem& sys, const Theta& theta,
                              const HyperParams& hyper, const Vec& x0,
                              const MinimizeOptions& opts) {
  const Objective obj = [&](const Vec& x, Vec& grad) {
    return potential_with_grad(sys, theta, hyper, x, grad);
  };
  return lbfgs_minimize(obj, x0, opts);
}

MinimizeResult global_minimum(const SpatialSystem& sys, const Theta& theta,
                              const HyperParams& hyper,
                              const MinimizeOptions& opts) {
  hyper.validate();
  const int m = static_cast<int>(sys.n_dests());
  if (m == 0) throw BadInput("global_minimum: system has no destinations");
  const double total = hyper.total_size;

  std::vector<Vec> starts;
  starts.push_back(Vec::Constant(m, std::log(total / m)));
  if (m > 1) {
    const double rest = std::log(0.1 * total / (m - 1));
    for (int j = 0; j < m; ++j) {
      Vec x = Vec::Constant(m, rest);
      x(j) = std::log(0.9 * total);
      starts.push_back(std::move(x));
    }
  }

  MinimizeResult best;
  bool have = false;
  for (const Vec& s : starts) {
    MinimizeResult r = local_minimize(sys, theta, hyper, s, opts);
    const bool better = !have || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.value < best.value);
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

double saddle_point_log_z(const SpatialSystem& sys, const Theta& theta,
                          const HyperParams& hyper, const Vec& mode) {
  const Mat h = hessian_potential(sys, theta, hyper, mode);
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericFailure("saddle_point_log_z: eigensolver failed");
  const Vec& ev = es.eigenvalues();
  const double lam_min = ev(0);
  const double lam_max = ev(ev.size() - 1);
  if (!(lam_max > 0) || !(lam_min > 1e-12 * lam_max))
    throw NumericFailure(
        "saddle_point_log_z: curvature at the mode is not positive definite");
  const double logdet = ev.array().log().sum();
  const double m = static_cast<double>(mode.size());
  return -hyper.gamma * potential(sys, theta, hyper, mode) +
         0.5 * m * std::log(2.0 * M_PI / hyper.gamma) - 0.5 * logdet;
}

double saddle_log_z(const SpatialSystem& sys, const Theta& theta,
                    const HyperParams& hyper, const MinimizeOptions& opts) {
  const MinimizeResult r = global_minimum(sys, theta, hyper, opts);
  if (!r.converged)
    throw NoConvergence("saddle_log_z: minimizer did not reach grad_tol");
  return saddle_point_log_z(sys, theta, hyper, r.x);
}

}  // namespace hwinfer
