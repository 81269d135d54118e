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

#include "hwinfer/types.hpp"

#include <cmath>
#include <string>

namespace hwinfer {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace

void SpatialSystem::validate_shape() const {
  if (origin.size() == 0) throw BadInput("system: no origin zones");
  if (cost.cols() == 0) throw BadInput("system: no destination zones");
  if (cost.rows() != origin.size())
    throw BadInput("system: cost rows (" + std::to_string(cost.rows()) +
                   ") do not match origin count (" +
                   std::to_string(origin.size()) + ")");
}

void SpatialSystem::validate() const {
  validate_shape();
  if (!all_finite(origin) || (origin.array() <= 0.0).any())
    throw BadInput("system: origin quantities must be finite and positive");
  if (!cost.allFinite() || (cost.array() < 0.0).any())
    throw BadInput("system: costs must be finite and non-negative");
}

void Theta::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw BadInput("theta: alpha must be positive and finite");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw BadInput("theta: beta must be positive and finite");
}

void HyperParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(gamma)) throw BadInput("hyper: gamma must be positive");
  if (!positive(delta)) throw BadInput("hyper: delta must be positive");
  if (!positive(kappa)) throw BadInput("hyper: kappa must be positive");
  if (!positive(epsilon)) throw BadInput("hyper: epsilon must be positive");
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw BadInput("hyper: lambda must be finite and non-negative");
  if (!positive(total_size))
    throw BadInput("hyper: total_size must be positive");
}

void Observation::validate() const {
  if (sizes.size() == 0) throw BadInput("observation: empty");
  if (!all_finite(sizes) || (sizes.array() <= 0.0).any())
    throw BadInput("observation: sizes must be finite and positive");
}

}  // namespace hwinfer
