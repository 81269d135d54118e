// Copyright 2026 The hwinfer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hwinfer/dynamics.hpp"
#include "hwinfer/inference.hpp"
#include "hwinfer/samplers.hpp"
#include "hwinfer/types.hpp"

namespace hwinfer {

// Column-oriented zone list as stored in `id,lon,lat,quantity` CSV files.
// Ids are plain UTF-8 tokens without commas, quotes, or line breaks.
struct ZoneTable {
  std::vector<std::string> ids;
  Vec lon;
  Vec lat;
  Vec quantity;

  std::size_t size() const { return ids.size(); }
  // Matching column lengths, unique well-formed ids, finite coordinates,
  // strictly positive finite quantities. An empty table is valid.
  void validate() const;
};

// Parse a zone CSV. Malformed input raises BadInput naming `path:line`.
ZoneTable load_zones(const std::string& path);
void save_zones(const ZoneTable& table, const std::string& path);

// What build_system did to the raw tables.
struct NormalizationReport {
  int n_origins = 0;
  int n_dests = 0;
  double cost_sum_target = 0;
  double cost_sum_achieved = 0;
  double origin_sum_before = 0;    // origin quantity total as loaded
  double observed_sum_before = 0;  // destination quantity total as loaded
  double total_size = 0;           // K, the observed total after scaling
  double delta = 0;
  double kappa = 0;
};

struct BuildOptions {
  double cost_sum_target = 7e5;
  double total_size = 1.0;  // K
  std::optional<double> delta;  // default: smallest observed share, min y / K
  std::optional<double> kappa;  // default: (sum O + delta M) / K
  // Hook mapping (lon, lat) to plane coordinates before Euclidean
  // distances; identity when empty.
  std::function<std::pair<double, double>(double, double)> project;
};

struct BuildResult {
  SpatialSystem system;
  Observation observation;
  NormalizationReport report;
};

// Assemble model inputs from raw zone tables: pairwise Euclidean costs
// rescaled to a fixed grand total, origin weights to unit mass, observed
// sizes to K. The smallest-size floor delta / kappa must not exceed the
// smallest observation.
BuildResult build_system(const ZoneTable& origins, const ZoneTable& dests,
                         const BuildOptions& opts = {});

struct SyntheticOptions {
  double cost_sum_target = 7e5;
  double origin_concentration = 5.0;  // symmetric Dirichlet weight
  int pt_burn_in = 500;
  PtConfig pt;
};

struct SyntheticData {
  ZoneTable origins;
  ZoneTable dests;  // quantity column carries the noisy observation
  SpatialSystem system;
  Observation observation;
  Vec x_true;  // latent log sizes actually drawn
};

// Ground-truth instance: zones uniform on the unit square, origin weights
// Dirichlet, latent sizes drawn from the gamma-tempered size density at
// theta_true, observation y = exp(x + lambda xi). lambda = 0 reproduces
// exp(x) exactly.
SyntheticData gen_synthetic(int n_origins, int n_dests,
                            const Theta& theta_true,
                            const HyperParams& hyper,
                            unsigned long long seed,
                            const SyntheticOptions& opts = {});

// --- flat numeric CSV (no header); nan/inf cells round-trip ---
void save_matrix_csv(const std::string& path, const Mat& m);
Mat load_matrix_csv(const std::string& path);
void save_vector_csv(const std::string& path, const Vec& v);
Vec load_vector_csv(const std::string& path);

// --- recorded dynamics path under a `t,x_1..x_M` header ---
void save_trajectory_csv(const std::string& path, const Trajectory& tr);
Trajectory load_trajectory_csv(const std::string& path);

// --- posterior chain files ---
// Line 1 is a caller-supplied single-line JSON metadata object, line 2 the
// header `iter,alpha,beta,omega,log_s_abs,x_1..x_M`, then one row per
// kept sweep.
struct ChainFile {
  std::string metadata_json;
  std::vector<ChainSample> samples;
};
void save_chain_csv(const std::string& path, const std::string& metadata_json,
                    const std::vector<ChainSample>& samples);
ChainFile load_chain_csv(const std::string& path);

// FNV-1a over raw bytes; identifies datasets inside run manifests.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::string& path);

// Whole-file text helpers. Writes land in a same-directory temp file first
// and rename over the destination, so readers never observe partial output.
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

}  // namespace hwinfer
