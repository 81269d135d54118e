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

#include "hwinfer/types.hpp"

namespace hwinfer {

// Trip matrix: T_ij = O_i * softmax_j(alpha x_j - beta c_ij).
// Row i sums to origin(i) by construction.
Mat flows(const SpatialSystem& sys, const Theta& theta, const Vec& x);

// Column sums of the trip matrix, accumulated row by row without
// materialising the full N x M matrix.
Vec dest_demand(const SpatialSystem& sys, const Theta& theta, const Vec& x);

// Confining potential V(x). exp(-gamma V) is the stationary density of the
// noisy size dynamics; the inner per-origin log-sums use the log-sum-exp
// shift so utilities of any magnitude stay finite.
double potential(const SpatialSystem& sys, const Theta& theta,
                 const HyperParams& hyper, const Vec& x);

// V and dV/dx in one pass over the cost rows. dV/dx_j equals
// epsilon * (kappa e^{x_j} - delta - D_j(x)).
double potential_with_grad(const SpatialSystem& sys, const Theta& theta,
                           const HyperParams& hyper, const Vec& x, Vec& grad);

Vec grad_potential(const SpatialSystem& sys, const Theta& theta,
                   const HyperParams& hyper, const Vec& x);

// Trace of the curvature, via its own closed form (not by summing the
// diagonal of hessian_potential).
double laplacian_potential(const SpatialSystem& sys, const Theta& theta,
                           const HyperParams& hyper, const Vec& x);

// Symmetric M x M curvature matrix of V at x.
Mat hessian_potential(const SpatialSystem& sys, const Theta& theta,
                      const HyperParams& hyper, const Vec& x);

// Log density of observed sizes y under multiplicative log-normal noise:
// log N(ln y | x, lambda^2 I).
double log_likelihood(const Observation& y, const Vec& x,
                      const HyperParams& hyper);

}  // namespace hwinfer
