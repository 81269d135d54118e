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

#include "hwinfer/rng.hpp"

#include <cmath>
#include <numbers>

#include "hwinfer/errors.hpp"

namespace hwinfer {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double u64_to_unit(std::uint64_t r) {
  // 53-bit mantissa, offset by half a ulp so 0 and 1 are unreachable.
  return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
}

Rng::Rng(std::uint64_t seed) : eng_(seed) {}

std::uint64_t Rng::raw() { return eng_(); }

double Rng::uniform() { return u64_to_unit(eng_()); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw BadInput("gamma sampler: shape and rate must be positive");
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    // G(a) = G(a + 1) * U^(1/a)
    boost = std::pow(uniform(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2) return boost * d * v / rate;
    if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v)))
      return boost * d * v / rate;
  }
}

Rng Rng::fork(std::uint64_t stream) {
  std::uint64_t s = eng_() ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  return Rng(splitmix64_next(s));
}

double counter_normal(std::uint64_t seed, std::uint64_t step,
                      std::uint64_t coord) {
  std::uint64_t s = seed;
  s = splitmix64_next(s) ^ (step * 0xA0761D6478BD642FULL);
  s = splitmix64_next(s) ^ (coord * 0xE7037ED1A0B428DBULL);
  const double u1 = u64_to_unit(splitmix64_next(s));
  const double u2 = u64_to_unit(splitmix64_next(s));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace hwinfer
