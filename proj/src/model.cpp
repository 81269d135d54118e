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

#include "hwinfer/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hwinfer {

namespace {

void check_inputs(const char* op, const SpatialSystem& sys, const Theta& theta,
                  const Vec& x) {
  sys.validate_shape();
  theta.validate();
  if (x.size() != sys.n_dests())
    throw BadInput(std::string(op) + ": x has " + std::to_string(x.size()) +
                   " entries, system has " + std::to_string(sys.n_dests()) +
                   " destinations");
  if (!x.allFinite())
    throw BadInput(std::string(op) + ": x has nonfinite entries");
}

// Shared per-origin soft-max pass. Accumulates
//   util_sum = sum_i O_i * log sum_j exp(alpha x_j - beta c_ij)
// and, when `demand` is non-null, D_j = sum_i O_i Lambda_ij.
double utility_pass(const SpatialSystem& sys, const Theta& theta, const Vec& x,
                    Vec* demand) {
  const int n = sys.n_origins();
  const int m = sys.n_dests();
  Vec u(m), w(m);
  if (demand) demand->setZero(m);
  double util_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    u = theta.alpha * x - theta.beta * sys.cost.row(i).transpose();
    const double shift = u.maxCoeff();
    w = (u.array() - shift).exp();
    const double s = w.sum();
    util_sum += sys.origin(i) * (shift + std::log(s));
    if (demand) demand->noalias() += (sys.origin(i) / s) * w;
  }
  return util_sum;
}

}  // namespace

Mat flows(const SpatialSystem& sys, const Theta& theta, const Vec& x) {
  check_inputs("flows", sys, theta, x);
  const int n = sys.n_origins();
  const int m = sys.n_dests();
  Mat t(n, m);
  Vec u(m), w(m);
  for (int i = 0; i < n; ++i) {
    u = theta.alpha * x - theta.beta * sys.cost.row(i).transpose();
    const double shift = u.maxCoeff();
    w = (u.array() - shift).exp();
    t.row(i) = (sys.origin(i) / w.sum()) * w.transpose();
  }
  return t;
}

Vec dest_demand(const SpatialSystem& sys, const Theta& theta, const Vec& x) {
  check_inputs("dest_demand", sys, theta, x);
  Vec demand;
  utility_pass(sys, theta, x, &demand);
  return demand;
}

double potential(const SpatialSystem& sys, const Theta& theta,
                 const HyperParams& hyper, const Vec& x) {
  check_inputs("potential", sys, theta, x);
  hyper.validate();
  const double util_sum = utility_pass(sys, theta, x, nullptr);
  return hyper.epsilon * (-util_sum / theta.alpha +
                          hyper.kappa * x.array().exp().sum() -
                          hyper.delta * x.sum());
}

double potential_with_grad(const SpatialSystem& sys, const Theta& theta,
                           const HyperParams& hyper, const Vec& x, Vec& grad) {
  check_inputs("potential_with_grad", sys, theta, x);
  hyper.validate();
  Vec demand;
  const double util_sum = utility_pass(sys, theta, x, &demand);
  const Vec ex = x.array().exp();
  grad = hyper.epsilon *
         (hyper.kappa * ex - demand - Vec::Constant(x.size(), hyper.delta));
  return hyper.epsilon *
         (-util_sum / theta.alpha + hyper.kappa * ex.sum() -
          hyper.delta * x.sum());
}

Vec grad_potential(const SpatialSystem& sys, const Theta& theta,
                   const HyperParams& hyper, const Vec& x) {
  Vec grad;
  potential_with_grad(sys, theta, hyper, x, grad);
  return grad;
}

double laplacian_potential(const SpatialSystem& sys, const Theta& theta,
                           const HyperParams& hyper, const Vec& x) {
  check_inputs("laplacian_potential", sys, theta, x);
  hyper.validate();
  const int n = sys.n_origins();
  const int m = sys.n_dests();
  Vec u(m), w(m);
  double mixing = 0.0;  // sum_i O_i sum_j Lambda_ij (1 - Lambda_ij)
  for (int i = 0; i < n; ++i) {
    u = theta.alpha * x - theta.beta * sys.cost.row(i).transpose();
    const double shift = u.maxCoeff();
    w = (u.array() - shift).exp();
    w /= w.sum();
    mixing += sys.origin(i) * (w.array() * (1.0 - w.array())).sum();
  }
  return hyper.epsilon *
         (hyper.kappa * x.array().exp().sum() - theta.alpha * mixing);
}

Mat hessian_potential(const SpatialSystem& sys, const Theta& theta,
                      const HyperParams& hyper, const Vec& x) {
  check_inputs("hessian_potential", sys, theta, x);
  hyper.validate();
  const int n = sys.n_origins();
  const int m = sys.n_dests();
  Mat h = Mat::Zero(m, m);
  Vec u(m), w(m);
  for (int i = 0; i < n; ++i) {
    u = theta.alpha * x - theta.beta * sys.cost.row(i).transpose();
    const double shift = u.maxCoeff();
    w = (u.array() - shift).exp();
    w /= w.sum();
    const double scale = hyper.epsilon * theta.alpha * sys.origin(i);
    h.selfadjointView<Eigen::Lower>().rankUpdate(w, scale);
    h.diagonal() -= scale * w;
  }
  h.diagonal() += hyper.epsilon * hyper.kappa * x.array().exp().matrix();
  // only the lower triangle was written; mirroring keeps symmetry exact
  return h.selfadjointView<Eigen::Lower>();
}

double log_likelihood(const Observation& y, const Vec& x,
                      const HyperParams& hyper) {
  y.validate();
  hyper.validate();
  if (!(hyper.lambda > 0.0))
    throw BadInput("log_likelihood: lambda must be positive");
  if (x.size() != y.sizes.size())
    throw BadInput("log_likelihood: x and y dimensions differ");
  if (!x.allFinite())
    throw BadInput("log_likelihood: x has nonfinite entries");
  const double m = static_cast<double>(x.size());
  const Vec resid = y.sizes.array().log().matrix() - x;
  return -0.5 * m * std::log(2.0 * std::numbers::pi * hyper.lambda *
                             hyper.lambda) -
         resid.squaredNorm() / (2.0 * hyper.lambda * hyper.lambda);
}

}  // namespace hwinfer
