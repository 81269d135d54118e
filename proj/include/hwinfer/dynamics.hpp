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

#include <optional>
#include <vector>

#include "hwinfer/types.hpp"

namespace hwinfer {

struct IntegratorConfig {
  double dt = 1e-2;       // nominal step
  long n_steps = 1000;    // horizon steps (ODE/SDE)
  double stop_tol = 1e-9; // early-stop / equilibrium residual tolerance
  long max_steps = 1000000;  // cap on attempted steps (halved retries count)
  int save_stride = 1;
  void validate() const;
};

// Recorded path of log sizes. `seed` is set for stochastic runs only.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::optional<unsigned long long> seed;
};

// Deterministic size dynamics dW_j/dt = eps W_j (D_j(W) - kappa W_j + delta),
// integrated with classic RK4; the step halves when a stage leaves the
// positive orthant or turns nonfinite, and recovers afterwards. Stops early
// once the velocity drops below stop_tol in max norm.
Trajectory simulate_ode(const SpatialSystem& sys, const Theta& theta,
                        const HyperParams& hyper, const Vec& w0,
                        const IntegratorConfig& cfg);

// Euler-Maruyama path of the log-size diffusion
//   dx = -grad V(x) dt + sqrt(2 / gamma) dB.
// Driving noise comes from a counter stream keyed by (seed, step, coord).
Trajectory simulate_sde(const SpatialSystem& sys, const Theta& theta,
                        const HyperParams& hyper, const Vec& x0,
                        const IntegratorConfig& cfg,
                        unsigned long long seed);

IntegratorConfig equilibrium_defaults();

// Relax the ODE from w0 until the balance residual
// max_j |kappa W_j - delta - D_j(W)| < stop_tol.
Vec find_equilibrium(const SpatialSystem& sys, const Theta& theta,
                     const HyperParams& hyper, const Vec& w0,
                     const IntegratorConfig& cfg = equilibrium_defaults());

// Running-cost level that makes equilibria absorb exactly the size budget:
// kappa = (sum_i O_i + delta M) / K.
double kappa_from_total(double sum_origin, double delta, int n_dests,
                        double total_size);

// 1 - Var(y - W_pred)/Var(y), with W_pred the equilibrium reached from the
// observation itself.
double r_squared(const SpatialSystem& sys, const Theta& theta,
                 const HyperParams& hyper, const Observation& y,
                 const IntegratorConfig& cfg = equilibrium_defaults());

}  // namespace hwinfer
