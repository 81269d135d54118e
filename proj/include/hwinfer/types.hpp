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

#include <Eigen/Dense>

#include "hwinfer/errors.hpp"

namespace hwinfer {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One study area: trip production per origin zone and the origin->destination
// travel cost matrix. Destinations are described only through `cost` columns.
struct SpatialSystem {
  Vec origin;  // O_i > 0, length N
  Mat cost;    // c_ij >= 0, N rows x M cols

  int n_origins() const { return static_cast<int>(origin.size()); }
  int n_dests() const { return static_cast<int>(cost.cols()); }
  void validate() const;        // full scan; throws BadInput
  void validate_shape() const;  // size/emptiness only (cheap, hot paths)
};

// Utility parameters: size attractiveness exponent and cost decay rate.
struct Theta {
  double alpha = 1.0;
  double beta = 1.0;
  void validate() const;
};

struct HyperParams {
  double gamma = 100.0;     // inverse temperature of the stationary law
  double delta = 0.1;       // baseline inflow granted to every destination
  double kappa = 1.0;       // running cost per unit size
  double epsilon = 1.0;     // responsiveness time scale
  double lambda = 0.1;      // log-space observation noise scale
  double total_size = 1.0;  // size budget: sum_j W_j at a balanced equilibrium
  void validate() const;
};

// Observed destination sizes (all positive).
struct Observation {
  Vec sizes;
  void validate() const;
};

}  // namespace hwinfer
