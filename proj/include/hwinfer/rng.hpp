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

#include <cstdint>
#include <random>

namespace hwinfer {

// One splitmix64 step: advances `state` and returns the next word.
std::uint64_t splitmix64_next(std::uint64_t& state);

// Map a 64-bit word to the open interval (0, 1).
double u64_to_unit(std::uint64_t r);

// Deterministic random stream. The mt19937_64 engine is bit-exact per the
// C++ standard; the variate transforms live here (not in std::*_distribution,
// whose algorithms are implementation-defined) so that a seed replays
// byte-identically on any toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t raw();
  double uniform();  // (0, 1)
  double normal();   // Box-Muller, pairs cached
  // Marsaglia-Tsang squeeze/rejection sampler; shape < 1 handled by the
  // boosting identity G(a) = G(a+1) * U^(1/a).
  double gamma(double shape, double rate);

  // Child stream keyed by `stream`; advances this engine by one word, so the
  // parent's subsequent draws do not depend on how much the child consumes.
  Rng fork(std::uint64_t stream);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Counter-based N(0,1) draw keyed by (seed, step, coordinate). A pure
// function of its indices: evaluation order and batching cannot change the
// noise a given step/coordinate sees.
double counter_normal(std::uint64_t seed, std::uint64_t step,
                      std::uint64_t coord);

}  // namespace hwinfer
