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

#include "hwinfer/types.hpp"

namespace hwinfer {

// Evaluates the objective at x and fills the gradient.
using Objective = std::function<double(const Vec& x, Vec& grad)>;

struct MinimizeOptions {
  int max_iters = 500;
  double grad_tol = 1e-8;  // max norm of the gradient at termination
  int memory = 10;         // curvature pairs kept by the quasi-Newton update
  void validate() const;
};

struct MinimizeResult {
  Vec x;
  double value = 0;
  double grad_norm = 0;
  int iters = 0;
  bool converged = false;
};

// Limited-memory BFGS with Armijo backtracking. Nonfinite trial points are
// treated as line-search rejections, so objectives only need to be defined
// where they are finite.
MinimizeResult lbfgs_minimize(const Objective& f, const Vec& x0,
                              const MinimizeOptions& opts = {});

// Minimizes the potential over log sizes from a given start.
MinimizeResult local_minimize(const SpatialSystem& sys, const Theta& theta,
                              const HyperParams& hyper, const Vec& x0,
                              const MinimizeOptions& opts = {});

// Multistart search for the deepest potential well: one uniform start plus
// one start per destination with most of the size budget concentrated there,
// which covers the clustered modes that appear once alpha exceeds one.
// Converged runs are preferred over unconverged ones, then lower values win.
MinimizeResult global_minimum(const SpatialSystem& sys, const Theta& theta,
                              const HyperParams& hyper,
                              const MinimizeOptions& opts = {});

// Gaussian (Laplace) approximation of log integral exp(-gamma V) dx around a
// stationary point `mode`:
//   log z =~ -gamma V(mode) + (M/2) log(2 pi / gamma) - log det H(mode) / 2.
// Throws NumericFailure when the curvature there is not positive definite.
double saddle_point_log_z(const SpatialSystem& sys, const Theta& theta,
                          const HyperParams& hyper, const Vec& mode);

// Convenience: global_minimum followed by saddle_point_log_z.
double saddle_log_z(const SpatialSystem& sys, const Theta& theta,
                    const HyperParams& hyper,
                    const MinimizeOptions& opts = {});

}  // namespace hwinfer
