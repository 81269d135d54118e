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
#include <vector>

#include "hwinfer/rng.hpp"
#include "hwinfer/types.hpp"

namespace hwinfer {

// Log density (up to an additive constant); fills the gradient.
using LogDensity = std::function<double(const Vec& x, Vec& grad)>;

struct HmcConfig {
  double step = 0.1;
  int n_leapfrog = 10;
  void validate() const;
};

struct HmcOutcome {
  bool accepted = false;
  double log_target = 0;  // log density at the returned state
};

// One Hamiltonian transition: momentum refresh, leapfrog, accept/reject.
// Nonfinite energies anywhere along the path reject automatically, so the
// chain never leaves the region where the target is defined.
HmcOutcome hmc_step(const LogDensity& target, Vec& x, const HmcConfig& cfg,
                    Rng& rng);

// Energy drift of one leapfrog flight from (x0, p0); test/diagnostic hook
// for verifying the second-order integration error.
double hmc_energy_drift(const LogDensity& target, const Vec& x0,
                        const Vec& p0, const HmcConfig& cfg);

// Folds x into [lo, hi] by repeated boundary reflection.
double reflect_into(double x, double lo, double hi);

// Gaussian random-walk proposal reflected into a box, one scale per axis.
Vec rw_reflect_step(const Vec& x, const Vec& step, const Vec& lo,
                    const Vec& hi, Rng& rng);

struct PtConfig {
  int n_levels = 5;
  double hot_factor = 32.0;  // inverse-temperature spread, coldest / hottest
  HmcConfig hmc;             // hmc.step is scaled per level by gamma^{-1/2}
  int swap_stride = 1;       // sweeps between neighbour swap attempts
  void validate() const;
};

struct PtResult {
  std::vector<Vec> samples;  // draws from the coldest (target) level
  Vec hmc_accept_rate;       // per level
  Vec swap_accept_rate;      // per adjacent pair (empty when single level)
};

// Replica-exchange sampler for the size posterior exp(-gamma V(x)). Levels
// run geometrically spaced gammas between gamma/hot_factor and gamma, so the
// hot levels hop between potential wells that the cold level cannot cross.
PtResult parallel_tempering_sample(const SpatialSystem& sys,
                                   const Theta& theta,
                                   const HyperParams& hyper, int n_samples,
                                   int burn_in, unsigned long long seed,
                                   const PtConfig& cfg = {});

// Draw from the interaction-free base density
//   f0(x) = prod_j exp(a x_j - b e^{x_j}),  a = gamma eps delta,
//   b = gamma eps kappa,
// i.e. sizes W_j = e^{x_j} are independent Gamma(a, rate b).
Vec sample_base(const HyperParams& hyper, int n_dests, Rng& rng);

// Exact log normalizer of the base density: M (lgamma(a) - a log b).
double log_z_base(const HyperParams& hyper, int n_dests);

struct AisConfig {
  int n_temps = 50;
  int n_particles = 16;
  HmcConfig hmc;  // hmc.step is a dimensionless scale, adapted per rung
  void validate() const;
};

struct AisResult {
  double log_z = 0;       // estimate of log integral exp(-gamma V)
  double log_z_base = 0;  // exact base normalizer the weights are tied to
  Vec log_weights;        // per-particle log importance weights
  double accept_rate = 0; // pooled transition acceptance across rungs
};

// Annealed importance sampling from the base density to exp(-gamma V) along
// the geometric path f_t = f0^{1-t} f1^t with a linear temperature grid and
// one Hamiltonian transition per rung. Deterministic for a given seed and
// independent of scheduling: each particle runs on its own forked stream.
AisResult ais_log_z(const SpatialSystem& sys, const Theta& theta,
                    const HyperParams& hyper, unsigned long long seed,
                    const AisConfig& cfg = {});

}  // namespace hwinfer
