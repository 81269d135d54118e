// Copyright 2026 The hwinfer Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwinfer/data_io.hpp"

#include <unistd.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>
#include <unordered_set>

#include "hwinfer/errors.hpp"
#include "hwinfer/rng.hpp"

namespace hwinfer {

namespace {

namespace fs = std::filesystem;

std::string at(const std::string& path, long line) {
  return path + ":" + std::to_string(line) + ": ";
}

// Lines without their terminators; a single trailing '\r' per line is
// stripped so CRLF files parse. A final newline does not open a new line.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t c = line.find(',', start);
    if (c == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, c - start));
    start = c + 1;
  }
}

double parse_double_field(std::string_view s, const std::string& path,
                          long line) {
  double v = 0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    throw BadInput(at(path, line) + "bad number '" + std::string(s) + "'");
  return v;
}

long parse_long_field(std::string_view s, const std::string& path,
                      long line) {
  long v = 0;
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    throw BadInput(at(path, line) + "bad integer '" + std::string(s) + "'");
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, static_cast<std::size_t>(p - buf));
}

void append_long(std::string& out, long v) {
  char buf[24];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, static_cast<std::size_t>(p - buf));
}

bool id_well_formed(const std::string& id) {
  if (id.empty()) return false;
  return id.find_first_of(",\"\r\n") == std::string::npos;
}

constexpr std::string_view kZoneHeader = "id,lon,lat,quantity";

// Pairwise plane distances under the optional projection hook.
Mat euclidean_cost(const ZoneTable& origins, const ZoneTable& dests,
                   const BuildOptions& opts) {
  const auto project = [&](double lon, double lat) {
    return opts.project ? opts.project(lon, lat) : std::pair{lon, lat};
  };
  const long n = static_cast<long>(origins.size());
  const long m = static_cast<long>(dests.size());
  Mat cost(n, m);
  std::vector<std::pair<double, double>> dp(static_cast<std::size_t>(m));
  for (long j = 0; j < m; ++j) dp[j] = project(dests.lon(j), dests.lat(j));
  for (long i = 0; i < n; ++i) {
    const auto [ox, oy] = project(origins.lon(i), origins.lat(i));
    for (long j = 0; j < m; ++j)
      cost(i, j) = std::hypot(ox - dp[j].first, oy - dp[j].second);
  }
  return cost;
}

}  // namespace

void ZoneTable::validate() const {
  const long n = static_cast<long>(ids.size());
  if (lon.size() != n || lat.size() != n || quantity.size() != n)
    throw BadInput("zones: column lengths disagree");
  std::unordered_set<std::string_view> seen;
  for (long i = 0; i < n; ++i) {
    const std::string& id = ids[static_cast<std::size_t>(i)];
    if (!id_well_formed(id))
      throw BadInput("zones: malformed id '" + id + "'");
    if (!seen.insert(id).second)
      throw BadInput("zones: duplicate id '" + id + "'");
    if (!std::isfinite(lon(i)) || !std::isfinite(lat(i)))
      throw BadInput("zones: nonfinite coordinate for id '" + id + "'");
    if (!std::isfinite(quantity(i)) || !(quantity(i) > 0.0))
      throw BadInput("zones: quantity must be positive for id '" + id + "'");
  }
}

ZoneTable load_zones(const std::string& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kZoneHeader)
    throw BadInput(at(path, 1) + "expected header '" +
                   std::string(kZoneHeader) + "'");
  ZoneTable t;
  const long n = static_cast<long>(lines.size()) - 1;
  t.ids.reserve(static_cast<std::size_t>(n));
  t.lon.resize(n);
  t.lat.resize(n);
  t.quantity.resize(n);
  std::unordered_set<std::string_view> seen;
  for (long i = 0; i < n; ++i) {
    const long line_no = i + 2;
    const auto f = split_fields(lines[static_cast<std::size_t>(i + 1)]);
    if (f.size() != 4)
      throw BadInput(at(path, line_no) + "expected 4 fields, got " +
                     std::to_string(f.size()));
    if (f[0].empty()) throw BadInput(at(path, line_no) + "empty id");
    if (!seen.insert(f[0]).second)
      throw BadInput(at(path, line_no) + "duplicate id '" +
                     std::string(f[0]) + "'");
    t.lon(i) = parse_double_field(f[1], path, line_no);
    t.lat(i) = parse_double_field(f[2], path, line_no);
    if (!std::isfinite(t.lon(i)) || !std::isfinite(t.lat(i)))
      throw BadInput(at(path, line_no) + "nonfinite coordinate");
    t.quantity(i) = parse_double_field(f[3], path, line_no);
    if (!std::isfinite(t.quantity(i)) || !(t.quantity(i) > 0.0))
      throw BadInput(at(path, line_no) + "quantity must be positive");
    t.ids.emplace_back(f[0]);
  }
  return t;
}

void save_zones(const ZoneTable& table, const std::string& path) {
  table.validate();
  std::string out(kZoneHeader);
  out.push_back('\n');
  for (std::size_t i = 0; i < table.size(); ++i) {
    const long li = static_cast<long>(i);
    out += table.ids[i];
    out.push_back(',');
    append_double(out, table.lon(li));
    out.push_back(',');
    append_double(out, table.lat(li));
    out.push_back(',');
    append_double(out, table.quantity(li));
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

BuildResult build_system(const ZoneTable& origins, const ZoneTable& dests,
                         const BuildOptions& opts) {
  origins.validate();
  dests.validate();
  if (origins.size() == 0) throw BadInput("build: no origin zones");
  if (dests.size() == 0) throw BadInput("build: no destination zones");
  if (!(opts.cost_sum_target > 0.0) || !std::isfinite(opts.cost_sum_target))
    throw BadInput("build: cost sum target must be positive");
  if (!(opts.total_size > 0.0) || !std::isfinite(opts.total_size))
    throw BadInput("build: total size must be positive");

  BuildResult r;
  r.report.n_origins = static_cast<int>(origins.size());
  r.report.n_dests = static_cast<int>(dests.size());
  r.report.cost_sum_target = opts.cost_sum_target;

  Mat cost = euclidean_cost(origins, dests, opts);
  const double raw_sum = cost.sum();
  if (!(raw_sum > 0.0))
    throw BadInput("build: all origin/destination pairs coincide");
  cost *= opts.cost_sum_target / raw_sum;
  r.report.cost_sum_achieved = cost.sum();

  r.report.origin_sum_before = origins.quantity.sum();
  const Vec o = origins.quantity / r.report.origin_sum_before;

  r.report.observed_sum_before = dests.quantity.sum();
  const Vec y =
      dests.quantity * (opts.total_size / r.report.observed_sum_before);
  r.report.total_size = opts.total_size;

  const double y_min = y.minCoeff();
  // Default floor: the smallest observed share of the budget. delta enters
  // the balance rate unscaled, so the share keeps delta/kappa below y_min
  // for every budget K (equal to y_min itself when K = 1).
  const double delta = opts.delta.value_or(y_min / opts.total_size);
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw BadInput("build: delta must be positive");
  const double kappa = opts.kappa.value_or(kappa_from_total(
      o.sum(), delta, r.report.n_dests, opts.total_size));
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw BadInput("build: kappa must be positive");
  // The dynamics floor delta/kappa is the smallest size any equilibrium can
  // carry; an observation below it is unreachable.
  if (delta / kappa > y_min * (1.0 + 1e-9))
    throw BadInput("build: delta/kappa exceeds the smallest observation");
  r.report.delta = delta;
  r.report.kappa = kappa;

  r.system.origin = o;
  r.system.cost = std::move(cost);
  r.system.validate();
  r.observation.sizes = y;
  r.observation.validate();
  return r;
}

SyntheticData gen_synthetic(int n_origins, int n_dests,
                            const Theta& theta_true,
                            const HyperParams& hyper,
                            unsigned long long seed,
                            const SyntheticOptions& opts) {
  if (n_origins < 1) throw BadInput("gen: need at least one origin");
  if (n_dests < 1) throw BadInput("gen: need at least one destination");
  theta_true.validate();
  hyper.validate();
  if (!(opts.cost_sum_target > 0.0) || !std::isfinite(opts.cost_sum_target))
    throw BadInput("gen: cost sum target must be positive");
  if (!(opts.origin_concentration > 0.0) ||
      !std::isfinite(opts.origin_concentration))
    throw BadInput("gen: origin concentration must be positive");
  if (opts.pt_burn_in < 0) throw BadInput("gen: negative burn-in");
  opts.pt.validate();

  Rng rng(seed);
  SyntheticData d;
  d.origins.lon.resize(n_origins);
  d.origins.lat.resize(n_origins);
  d.origins.quantity.resize(n_origins);
  for (int i = 0; i < n_origins; ++i) {
    d.origins.ids.push_back("o" + std::to_string(i + 1));
    d.origins.lon(i) = rng.uniform();
    d.origins.lat(i) = rng.uniform();
  }
  d.dests.lon.resize(n_dests);
  d.dests.lat.resize(n_dests);
  d.dests.quantity.resize(n_dests);
  for (int j = 0; j < n_dests; ++j) {
    d.dests.ids.push_back("d" + std::to_string(j + 1));
    d.dests.lon(j) = rng.uniform();
    d.dests.lat(j) = rng.uniform();
  }

  Vec o(n_origins);
  for (int i = 0; i < n_origins; ++i)
    o(i) = rng.gamma(opts.origin_concentration, 1.0);
  o /= o.sum();
  d.origins.quantity = o;

  BuildOptions bo;
  bo.cost_sum_target = opts.cost_sum_target;
  Mat cost = euclidean_cost(d.origins, d.dests, bo);
  const double raw_sum = cost.sum();
  if (!(raw_sum > 0.0)) throw NumericFailure("gen: degenerate geometry");
  cost *= opts.cost_sum_target / raw_sum;

  d.system.origin = o;
  d.system.cost = std::move(cost);
  d.system.validate();

  const PtResult pt = parallel_tempering_sample(
      d.system, theta_true, hyper, 1, opts.pt_burn_in, rng.raw(), opts.pt);
  d.x_true = pt.samples.back();

  Vec y(n_dests);
  for (int j = 0; j < n_dests; ++j)
    y(j) = std::exp(d.x_true(j) + hyper.lambda * rng.normal());
  if (!y.allFinite() || (y.array() <= 0.0).any())
    throw NumericFailure("gen: observation left the positive range");
  d.dests.quantity = y;
  d.observation.sizes = y;
  d.observation.validate();
  return d;
}

void save_matrix_csv(const std::string& path, const Mat& m) {
  std::string out;
  if (m.rows() > 0 && m.cols() > 0) {
    for (long i = 0; i < m.rows(); ++i) {
      for (long j = 0; j < m.cols(); ++j) {
        if (j) out.push_back(',');
        append_double(out, m(i, j));
      }
      out.push_back('\n');
    }
  }
  write_file_atomic(path, out);
}

Mat load_matrix_csv(const std::string& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) return Mat(0, 0);
  const auto first = split_fields(lines[0]);
  const long cols = static_cast<long>(first.size());
  Mat m(static_cast<long>(lines.size()), cols);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    const auto f = split_fields(lines[i]);
    if (static_cast<long>(f.size()) != cols)
      throw BadInput(at(path, line_no) + "expected " + std::to_string(cols) +
                     " fields, got " + std::to_string(f.size()));
    for (long j = 0; j < cols; ++j)
      m(static_cast<long>(i), j) =
          parse_double_field(f[static_cast<std::size_t>(j)], path, line_no);
  }
  return m;
}

void save_vector_csv(const std::string& path, const Vec& v) {
  std::string out;
  for (long i = 0; i < v.size(); ++i) {
    append_double(out, v(i));
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

Vec load_vector_csv(const std::string& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  Vec v(static_cast<long>(lines.size()));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    if (lines[i].find(',') != std::string_view::npos)
      throw BadInput(at(path, line_no) + "expected one value per line");
    v(static_cast<long>(i)) = parse_double_field(lines[i], path, line_no);
  }
  return v;
}

namespace {

std::string x_header(long m) {
  std::string h;
  for (long j = 0; j < m; ++j) h += ",x_" + std::to_string(j + 1);
  return h;
}

// Validates `header` == prefix,x_1..x_M and returns M.
long parse_x_header(std::string_view header, std::string_view prefix,
                    const std::string& path, long line_no) {
  if (header.substr(0, prefix.size()) != prefix)
    throw BadInput(at(path, line_no) + "expected header starting '" +
                   std::string(prefix) + "'");
  std::string_view rest = header.substr(prefix.size());
  long m = 0;
  while (!rest.empty()) {
    const std::string want = ",x_" + std::to_string(m + 1);
    if (rest.substr(0, want.size()) != want)
      throw BadInput(at(path, line_no) + "bad state column after x_" +
                     std::to_string(m));
    rest.remove_prefix(want.size());
    ++m;
  }
  return m;
}

}  // namespace

void save_trajectory_csv(const std::string& path, const Trajectory& tr) {
  const std::size_t n = tr.times.size();
  if (n == 0) throw BadInput("trajectory: nothing to save");
  if (tr.states.size() != n)
    throw BadInput("trajectory: times/states lengths disagree");
  const long m = tr.states[0].size();
  if (m == 0) throw BadInput("trajectory: empty state");
  std::string out = "t" + x_header(m) + "\n";
  for (std::size_t k = 0; k < n; ++k) {
    if (tr.states[k].size() != m)
      throw BadInput("trajectory: state dimensions disagree");
    append_double(out, tr.times[k]);
    for (long j = 0; j < m; ++j) {
      out.push_back(',');
      append_double(out, tr.states[k](j));
    }
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

Trajectory load_trajectory_csv(const std::string& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw BadInput(at(path, 1) + "missing header");
  const long m = parse_x_header(lines[0], "t", path, 1);
  if (m == 0) throw BadInput(at(path, 1) + "no state columns");
  Trajectory tr;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    const auto f = split_fields(lines[i]);
    if (static_cast<long>(f.size()) != m + 1)
      throw BadInput(at(path, line_no) + "expected " + std::to_string(m + 1) +
                     " fields, got " + std::to_string(f.size()));
    tr.times.push_back(parse_double_field(f[0], path, line_no));
    Vec x(m);
    for (long j = 0; j < m; ++j)
      x(j) = parse_double_field(f[static_cast<std::size_t>(j) + 1], path,
                                line_no);
    tr.states.push_back(std::move(x));
  }
  return tr;
}

namespace {
constexpr std::string_view kChainPrefix = "iter,alpha,beta,omega,log_s_abs";
}

void save_chain_csv(const std::string& path, const std::string& metadata_json,
                    const std::vector<ChainSample>& samples) {
  if (metadata_json.empty() ||
      metadata_json.find_first_of("\r\n") != std::string::npos)
    throw BadInput("chain: metadata must be one nonempty line");
  if (samples.empty()) throw BadInput("chain: nothing to save");
  const long m = samples[0].x.size();
  if (m == 0) throw BadInput("chain: empty state");
  std::string out = metadata_json + "\n";
  out += std::string(kChainPrefix) + x_header(m) + "\n";
  for (const ChainSample& s : samples) {
    if (s.x.size() != m) throw BadInput("chain: state dimensions disagree");
    if (s.omega < -1 || s.omega > 1)
      throw BadInput("chain: omega out of range");
    append_long(out, s.iter);
    out.push_back(',');
    append_double(out, s.theta.alpha);
    out.push_back(',');
    append_double(out, s.theta.beta);
    out.push_back(',');
    append_long(out, s.omega);
    out.push_back(',');
    append_double(out, s.log_s_abs);
    for (long j = 0; j < m; ++j) {
      out.push_back(',');
      append_double(out, s.x(j));
    }
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

ChainFile load_chain_csv(const std::string& path) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.size() < 2)
    throw BadInput(at(path, 1) + "missing metadata or header line");
  ChainFile cf;
  cf.metadata_json = std::string(lines[0]);
  if (cf.metadata_json.empty())
    throw BadInput(at(path, 1) + "empty metadata line");
  const long m = parse_x_header(lines[1], kChainPrefix, path, 2);
  if (m == 0) throw BadInput(at(path, 2) + "no state columns");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    const auto f = split_fields(lines[i]);
    if (static_cast<long>(f.size()) != 5 + m)
      throw BadInput(at(path, line_no) + "expected " + std::to_string(5 + m) +
                     " fields, got " + std::to_string(f.size()));
    ChainSample s;
    s.iter = parse_long_field(f[0], path, line_no);
    s.theta.alpha = parse_double_field(f[1], path, line_no);
    s.theta.beta = parse_double_field(f[2], path, line_no);
    const long omega = parse_long_field(f[3], path, line_no);
    if (omega < -1 || omega > 1)
      throw BadInput(at(path, line_no) + "omega out of range");
    s.omega = static_cast<int>(omega);
    s.log_s_abs = parse_double_field(f[4], path, line_no);
    s.x.resize(m);
    for (long j = 0; j < m; ++j)
      s.x(j) = parse_double_field(f[static_cast<std::size_t>(j) + 5], path,
                                  line_no);
    cf.samples.push_back(std::move(s));
  }
  return cf;
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  const std::string text = read_file(path);
  return fnv1a64(text.data(), text.size());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw BadInput("read failed for '" + path + "'");
  return std::move(ss).str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  if (target.filename().empty())
    throw BadInput("cannot write '" + path + "': not a file path");
  static std::atomic<unsigned long long> counter{0};
  const fs::path tmp =
      dir / (target.filename().string() + ".tmp." +
             std::to_string(::getpid()) + "." +
             std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw BadInput("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw BadInput("write failed for '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw BadInput("cannot replace '" + path + "': " + ec.message());
  }
}

std::string format_double(double v) {
  std::string out;
  append_double(out, v);
  return out;
}

}  // namespace hwinfer
