// Copyright 2026 The hwinfer Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library exclusively through the
// shared C interface; every run writes a manifest naming its inputs (with
// content hashes), its outputs, and the effective configuration.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hwinfer.h"
#include "json.hpp"

using nlohmann::json;

namespace {

constexpr int kExitBadInput = HW_ERROR_BAD_INPUT;

[[noreturn]] void die(int status, const std::string& message) {
  std::fprintf(stderr, "error: %s: %s\n", hw_status_name(status),
               message.c_str());
  std::exit(status);
}

// Every C-API call funnels through here so failures keep their category.
void check(int status) {
  if (status != HW_OK) die(status, hw_last_error());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die(kExitBadInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path tmp = dir / (target.filename().string() + ".tmp");
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) die(kExitBadInput, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) die(kExitBadInput, "write failed for '" + path + "'");
  out.close();
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) die(kExitBadInput, "cannot replace '" + path + "'");
}

std::string hash_hex(const std::string& path) {
  uint64_t h = 0;
  check(hw_hash_file(path.c_str(), &h));
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ------------------------------------------------------------ configuration

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known)
      die(kExitBadInput, "config: unknown key '" + section + "." + key + "'");
  }
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  const json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    die(kExitBadInput, "config: '" + path + "' is not a JSON object");
  check_keys(j, "", {"hyper", "build", "integrator", "gen", "grid", "infer",
                     "summarize", "prior_sample"});
  return j;
}

template <typename T>
T field(const json& section, const char* key, T fallback) {
  if (!section.contains(key)) return fallback;
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    die(kExitBadInput, std::string("config: bad value for '") + key + "'");
  }
}

hw_hyper hyper_from(const json& cfg) {
  hw_hyper h{};
  hw_hyper_init(&h);
  if (!cfg.contains("hyper")) return h;
  const json& j = cfg.at("hyper");
  check_keys(j, "hyper",
             {"gamma", "delta", "kappa", "epsilon", "lambda", "total_size"});
  h.gamma = field(j, "gamma", h.gamma);
  h.delta = field(j, "delta", h.delta);
  h.kappa = field(j, "kappa", h.kappa);
  h.epsilon = field(j, "epsilon", h.epsilon);
  h.lambda = field(j, "lambda", h.lambda);
  h.total_size = field(j, "total_size", h.total_size);
  return h;
}

json hyper_snapshot(const hw_hyper& h) {
  return {{"gamma", h.gamma},     {"delta", h.delta},
          {"kappa", h.kappa},     {"epsilon", h.epsilon},
          {"lambda", h.lambda},   {"total_size", h.total_size}};
}

hw_build_options build_from(const json& cfg) {
  hw_build_options b{};
  hw_build_options_init(&b);
  if (!cfg.contains("build")) return b;
  const json& j = cfg.at("build");
  check_keys(j, "build", {"cost_sum_target", "total_size", "delta", "kappa"});
  b.cost_sum_target = field(j, "cost_sum_target", b.cost_sum_target);
  b.total_size = field(j, "total_size", b.total_size);
  b.delta = field(j, "delta", b.delta);
  b.kappa = field(j, "kappa", b.kappa);
  return b;
}

json build_snapshot(const hw_build_options& b) {
  return {{"cost_sum_target", b.cost_sum_target},
          {"total_size", b.total_size},
          {"delta", b.delta},
          {"kappa", b.kappa}};
}

hw_integrator integrator_from(const json& cfg) {
  hw_integrator c{};
  hw_integrator_init(&c);
  if (!cfg.contains("integrator")) return c;
  const json& j = cfg.at("integrator");
  check_keys(j, "integrator",
             {"dt", "n_steps", "stop_tol", "max_steps", "save_stride"});
  c.dt = field(j, "dt", c.dt);
  c.n_steps = field(j, "n_steps", c.n_steps);
  c.stop_tol = field(j, "stop_tol", c.stop_tol);
  c.max_steps = field(j, "max_steps", c.max_steps);
  c.save_stride = field(j, "save_stride", c.save_stride);
  return c;
}

json integrator_snapshot(const hw_integrator& c) {
  return {{"dt", c.dt},
          {"n_steps", c.n_steps},
          {"stop_tol", c.stop_tol},
          {"max_steps", c.max_steps},
          {"save_stride", c.save_stride}};
}

hw_gen_options gen_from(const json& cfg) {
  hw_gen_options g{};
  hw_gen_options_init(&g);
  if (!cfg.contains("gen")) return g;
  const json& j = cfg.at("gen");
  check_keys(j, "gen",
             {"cost_sum_target", "origin_concentration", "pt_burn_in",
              "pt_levels", "pt_hot_factor"});
  g.cost_sum_target = field(j, "cost_sum_target", g.cost_sum_target);
  g.origin_concentration =
      field(j, "origin_concentration", g.origin_concentration);
  g.pt_burn_in = field(j, "pt_burn_in", g.pt_burn_in);
  g.pt_levels = field(j, "pt_levels", g.pt_levels);
  g.pt_hot_factor = field(j, "pt_hot_factor", g.pt_hot_factor);
  return g;
}

json gen_snapshot(const hw_gen_options& g) {
  return {{"cost_sum_target", g.cost_sum_target},
          {"origin_concentration", g.origin_concentration},
          {"pt_burn_in", g.pt_burn_in},
          {"pt_levels", g.pt_levels},
          {"pt_hot_factor", g.pt_hot_factor}};
}

hw_grid_options grid_from(const json& cfg) {
  hw_grid_options g{};
  hw_grid_options_init(&g);
  if (!cfg.contains("grid")) return g;
  const json& j = cfg.at("grid");
  check_keys(j, "grid",
             {"alpha_lo", "alpha_hi", "beta_lo", "beta_hi", "n",
              "full_multistart"});
  g.alpha_lo = field(j, "alpha_lo", g.alpha_lo);
  g.alpha_hi = field(j, "alpha_hi", g.alpha_hi);
  g.beta_lo = field(j, "beta_lo", g.beta_lo);
  g.beta_hi = field(j, "beta_hi", g.beta_hi);
  g.n = field(j, "n", g.n);
  g.full_multistart = field(j, "full_multistart", g.full_multistart != 0)
                          ? 1
                          : 0;
  return g;
}

json grid_snapshot(const hw_grid_options& g) {
  return {{"alpha_lo", g.alpha_lo}, {"alpha_hi", g.alpha_hi},
          {"beta_lo", g.beta_lo},   {"beta_hi", g.beta_hi},
          {"n", g.n},               {"full_multistart", g.full_multistart != 0}};
}

hw_infer_options infer_from(const json& cfg) {
  hw_infer_options o{};
  hw_infer_options_init(&o);
  if (!cfg.contains("infer")) return o;
  const json& j = cfg.at("infer");
  check_keys(j, "infer",
             {"n_iters", "burn_in", "x_step", "x_leapfrog",
              "theta_step_alpha", "theta_step_beta", "theta_lo_alpha",
              "theta_hi_alpha", "theta_lo_beta", "theta_hi_beta",
              "adapt_stride", "method", "roulette_tail_exponent",
              "roulette_max_terms", "ais_temps", "ais_particles"});
  o.n_iters = field(j, "n_iters", o.n_iters);
  o.burn_in = field(j, "burn_in", o.burn_in);
  o.x_step = field(j, "x_step", o.x_step);
  o.x_leapfrog = field(j, "x_leapfrog", o.x_leapfrog);
  o.theta_step_alpha = field(j, "theta_step_alpha", o.theta_step_alpha);
  o.theta_step_beta = field(j, "theta_step_beta", o.theta_step_beta);
  o.theta_lo_alpha = field(j, "theta_lo_alpha", o.theta_lo_alpha);
  o.theta_hi_alpha = field(j, "theta_hi_alpha", o.theta_hi_alpha);
  o.theta_lo_beta = field(j, "theta_lo_beta", o.theta_lo_beta);
  o.theta_hi_beta = field(j, "theta_hi_beta", o.theta_hi_beta);
  o.adapt_stride = field(j, "adapt_stride", o.adapt_stride);
  if (j.contains("method")) {
    const std::string m = j.at("method").get<std::string>();
    if (m == "saddle")
      o.method = HW_METHOD_SADDLE;
    else if (m == "pm")
      o.method = HW_METHOD_PM;
    else
      die(kExitBadInput, "config: infer.method must be 'saddle' or 'pm'");
  }
  o.roulette_tail_exponent =
      field(j, "roulette_tail_exponent", o.roulette_tail_exponent);
  o.roulette_max_terms = field(j, "roulette_max_terms", o.roulette_max_terms);
  o.ais_temps = field(j, "ais_temps", o.ais_temps);
  o.ais_particles = field(j, "ais_particles", o.ais_particles);
  return o;
}

json infer_snapshot(const hw_infer_options& o) {
  return {{"n_iters", o.n_iters},
          {"burn_in", o.burn_in},
          {"x_step", o.x_step},
          {"x_leapfrog", o.x_leapfrog},
          {"theta_step_alpha", o.theta_step_alpha},
          {"theta_step_beta", o.theta_step_beta},
          {"theta_lo_alpha", o.theta_lo_alpha},
          {"theta_hi_alpha", o.theta_hi_alpha},
          {"theta_lo_beta", o.theta_lo_beta},
          {"theta_hi_beta", o.theta_hi_beta},
          {"adapt_stride", o.adapt_stride},
          {"method", o.method == HW_METHOD_PM ? "pm" : "saddle"},
          {"roulette_tail_exponent", o.roulette_tail_exponent},
          {"roulette_max_terms", o.roulette_max_terms},
          {"ais_temps", o.ais_temps},
          {"ais_particles", o.ais_particles}};
}

// --------------------------------------------------------------- manifests

struct Manifest {
  std::string subcommand;
  json config = json::object();
  std::optional<uint64_t> seed;
  json inputs = json::object();
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started =
      std::chrono::steady_clock::now();

  void add_input(const std::string& role, const std::string& path) {
    inputs[role] = {{"path", path}, {"fnv1a64", hash_hex(path)}};
  }

  void write(const std::string& path) {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    json m = {{"tool", "hwinfer"},
              {"version", hw_version()},
              {"subcommand", subcommand},
              {"config", config},
              {"inputs", inputs},
              {"outputs", outputs},
              {"wall_clock_seconds", wall},
              {"finished_at", utc_now()}};
    if (seed.has_value())
      m["seed"] = *seed;
    else
      m["seed"] = nullptr;
    write_text(path, m.dump(2) + "\n");
  }
};

// Shared dataset arguments: two zone tables assembled into a system.
struct DatasetArgs {
  std::string origins, dests;
  std::string config_path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--origins", origins, "origin zone CSV")->required();
    cmd->add_option("--dests", dests, "destination zone CSV")->required();
    cmd->add_option("--config", config_path, "JSON configuration file");
  }

  hw_system* build(const json& cfg, Manifest& man) const {
    man.add_input("origins", origins);
    man.add_input("dests", dests);
    const hw_build_options bo = build_from(cfg);
    man.config["build"] = build_snapshot(bo);
    hw_system* sys = nullptr;
    hw_norm_report rep{};
    check(hw_system_build(origins.c_str(), dests.c_str(), &bo, &sys, &rep));
    man.config["normalization"] = {{"n_origins", rep.n_origins},
                                   {"n_dests", rep.n_dests},
                                   {"cost_sum_achieved", rep.cost_sum_achieved},
                                   {"delta", rep.delta},
                                   {"kappa", rep.kappa}};
    return sys;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Urban structure model: simulation and Bayesian calibration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hw_version()));

  // ---- gen
  auto* gen = app.add_subcommand("gen", "draw a synthetic ground-truth instance");
  struct {
    int n_origins = 50, n_dests = 10;
    double alpha = 1.0, beta = 1.0;
    uint64_t seed = 0;
    std::string config_path, out;
    double gamma = -1, lambda = -1;
  } g;
  gen->add_option("--n-origins", g.n_origins, "origin zone count");
  gen->add_option("--n-dests", g.n_dests, "destination zone count");
  gen->add_option("--alpha", g.alpha, "true attractiveness exponent");
  gen->add_option("--beta", g.beta, "true cost decay");
  gen->add_option("--seed", g.seed, "RNG seed")->required();
  gen->add_option("--config", g.config_path, "JSON configuration file");
  gen->add_option("--gamma", g.gamma, "override hyper.gamma");
  gen->add_option("--lambda", g.lambda, "override hyper.lambda");
  gen->add_option("--out", g.out, "output basename")->required();

  // ---- simulate
  auto* sim = app.add_subcommand("simulate", "integrate the size dynamics");
  struct {
    DatasetArgs data;
    std::string mode = "ode";
    double alpha = 1.0, beta = 1.0;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string start, out;
    double gamma = -1;
  } s;
  s.data.attach(sim);
  sim->add_option("--mode", s.mode, "ode or sde")
      ->check(CLI::IsMember({"ode", "sde"}));
  sim->add_option("--alpha", s.alpha, "attractiveness exponent");
  sim->add_option("--beta", s.beta, "cost decay");
  sim->add_option("--seed", s.seed, "RNG seed (required for sde)")
      ->each([&](const std::string&) { s.seed_set = true; });
  sim->add_option("--start", s.start,
                  "start vector CSV (sizes for ode, log sizes for sde)");
  sim->add_option("--gamma", s.gamma, "override hyper.gamma");
  sim->add_option("--out", s.out, "trajectory CSV path")->required();

  // ---- equilibrium
  auto* eq = app.add_subcommand("equilibrium", "relax sizes to balance");
  struct {
    DatasetArgs data;
    double alpha = 1.0, beta = 1.0;
    std::string out;
    double gamma = -1;
  } e;
  e.data.attach(eq);
  eq->add_option("--alpha", e.alpha, "attractiveness exponent");
  eq->add_option("--beta", e.beta, "cost decay");
  eq->add_option("--gamma", e.gamma, "override hyper.gamma");
  eq->add_option("--out", e.out, "equilibrium sizes CSV path")->required();

  // ---- rsq
  auto* rsq = app.add_subcommand("rsq", "equilibrium fit against the observation");
  struct {
    DatasetArgs data;
    double alpha = 1.0, beta = 1.0;
    std::string out;
    double gamma = -1;
  } q;
  q.data.attach(rsq);
  rsq->add_option("--alpha", q.alpha, "attractiveness exponent");
  rsq->add_option("--beta", q.beta, "cost decay");
  rsq->add_option("--gamma", q.gamma, "override hyper.gamma");
  rsq->add_option("--out", q.out, "result JSON path")->required();

  // ---- grid
  auto* grid = app.add_subcommand("grid", "log-posterior surface over theta");
  struct {
    DatasetArgs data;
    int grid_n = -1;
    double gamma = -1, lambda = -1;
    std::string out;
  } gr;
  gr.data.attach(grid);
  grid->add_option("--grid-n", gr.grid_n, "cells per axis");
  grid->add_option("--gamma", gr.gamma, "override hyper.gamma");
  grid->add_option("--lambda", gr.lambda, "override hyper.lambda");
  grid->add_option("--out", gr.out, "output basename")->required();

  // ---- prior-sample
  auto* prior = app.add_subcommand("prior-sample",
                                   "tempered draws of the latent log sizes");
  struct {
    DatasetArgs data;
    double alpha = 1.0, beta = 1.0;
    int64_t n_samples = 100, burn_in = 500;
    uint64_t seed = 0;
    std::string out;
    double gamma = -1;
  } pr;
  pr.data.attach(prior);
  prior->add_option("--alpha", pr.alpha, "attractiveness exponent");
  prior->add_option("--beta", pr.beta, "cost decay");
  prior->add_option("--n-samples", pr.n_samples, "draws to keep");
  prior->add_option("--burn-in", pr.burn_in, "discarded sweeps");
  prior->add_option("--seed", pr.seed, "RNG seed")->required();
  prior->add_option("--gamma", pr.gamma, "override hyper.gamma");
  prior->add_option("--out", pr.out, "samples CSV path")->required();

  // ---- infer
  auto* infer = app.add_subcommand("infer", "posterior chain over (x, theta)");
  struct {
    DatasetArgs data;
    std::string method;
    int64_t iters = -1;
    int32_t temps = -1, particles = -1;
    uint64_t seed = 0;
    std::string out;
    double gamma = -1, lambda = -1;
  } in;
  in.data.attach(infer);
  infer->add_option("--method", in.method, "saddle or pm")
      ->check(CLI::IsMember({"saddle", "pm"}));
  infer->add_option("--iters", in.iters, "kept sweeps");
  infer->add_option("--temps", in.temps, "annealing temperatures");
  infer->add_option("--particles", in.particles, "annealing particles");
  infer->add_option("--seed", in.seed, "RNG seed")->required();
  infer->add_option("--gamma", in.gamma, "override hyper.gamma");
  infer->add_option("--lambda", in.lambda, "override hyper.lambda");
  infer->add_option("--out", in.out, "chain CSV path")->required();

  // ---- summarize
  auto* summ = app.add_subcommand("summarize", "posterior diagnostics for a chain");
  struct {
    std::string chain, config_path, out;
    int32_t max_lag = -1, kde_points = -1;
  } su;
  summ->add_option("--chain", su.chain, "chain CSV path")->required();
  summ->add_option("--config", su.config_path, "JSON configuration file");
  summ->add_option("--max-lag", su.max_lag, "autocorrelation lags");
  summ->add_option("--kde-points", su.kde_points, "marginal grid points");
  summ->add_option("--out", su.out, "output basename")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: bad_input: %s\n", e.what());
    return kExitBadInput;
  }

  if (gen->parsed()) {
    Manifest man;
    man.subcommand = "gen";
    man.seed = g.seed;
    const json cfg = load_config(g.config_path);
    hw_hyper h = hyper_from(cfg);
    if (g.gamma > 0) h.gamma = g.gamma;
    if (g.lambda >= 0) h.lambda = g.lambda;
    const hw_gen_options go = gen_from(cfg);
    man.config["hyper"] = hyper_snapshot(h);
    man.config["gen"] = gen_snapshot(go);
    man.config["theta_true"] = {{"alpha", g.alpha}, {"beta", g.beta}};
    man.config["n_origins"] = g.n_origins;
    man.config["n_dests"] = g.n_dests;
    const std::string o_csv = g.out + ".origins.csv";
    const std::string d_csv = g.out + ".dests.csv";
    const std::string x_csv = g.out + ".x_true.csv";
    check(hw_gen_synthetic(g.n_origins, g.n_dests, g.alpha, g.beta, &h,
                           g.seed, &go, o_csv.c_str(), d_csv.c_str(),
                           x_csv.c_str()));
    man.outputs = {o_csv, d_csv, x_csv};
    man.write(g.out + ".manifest.json");
    std::printf("wrote %s (%d origins), %s (%d destinations), %s\n",
                o_csv.c_str(), g.n_origins, d_csv.c_str(), g.n_dests,
                x_csv.c_str());
    return 0;
  }

  if (sim->parsed()) {
    Manifest man;
    man.subcommand = "simulate";
    const json cfg = load_config(s.data.config_path);
    hw_hyper h = hyper_from(cfg);
    if (s.gamma > 0) h.gamma = s.gamma;
    const hw_integrator ic = integrator_from(cfg);
    man.config["hyper"] = hyper_snapshot(h);
    man.config["integrator"] = integrator_snapshot(ic);
    man.config["theta"] = {{"alpha", s.alpha}, {"beta", s.beta}};
    man.config["mode"] = s.mode;
    hw_system* sys = s.data.build(cfg, man);
    if (!s.start.empty()) man.add_input("start", s.start);
    const char* start = s.start.empty() ? nullptr : s.start.c_str();
    if (s.mode == "sde") {
      if (!s.seed_set)
        die(kExitBadInput, "--seed is required for the sde mode");
      man.seed = s.seed;
      check(hw_simulate_sde(sys, s.alpha, s.beta, &h, &ic, s.seed, start,
                            s.out.c_str()));
    } else {
      check(hw_simulate_ode(sys, s.alpha, s.beta, &h, &ic, start,
                            s.out.c_str()));
    }
    hw_system_free(sys);
    man.outputs = {s.out};
    man.write(s.out + ".manifest.json");
    std::printf("wrote %s\n", s.out.c_str());
    return 0;
  }

  if (eq->parsed()) {
    Manifest man;
    man.subcommand = "equilibrium";
    const json cfg = load_config(e.data.config_path);
    hw_hyper h = hyper_from(cfg);
    if (e.gamma > 0) h.gamma = e.gamma;
    const hw_integrator ic = integrator_from(cfg);
    man.config["hyper"] = hyper_snapshot(h);
    man.config["integrator"] = integrator_snapshot(ic);
    man.config["theta"] = {{"alpha", e.alpha}, {"beta", e.beta}};
    hw_system* sys = e.data.build(cfg, man);
    check(hw_equilibrium(sys, e.alpha, e.beta, &h,
                         cfg.contains("integrator") ? &ic : nullptr,
                         e.out.c_str()));
    hw_system_free(sys);
    man.outputs = {e.out};
    man.write(e.out + ".manifest.json");
    std::printf("wrote %s\n", e.out.c_str());
    return 0;
  }

  if (rsq->parsed()) {
    Manifest man;
    man.subcommand = "rsq";
    const json cfg = load_config(q.data.config_path);
    hw_hyper h = hyper_from(cfg);
    if (q.gamma > 0) h.gamma = q.gamma;
    man.config["hyper"] = hyper_snapshot(h);
    man.config["theta"] = {{"alpha", q.alpha}, {"beta", q.beta}};
    hw_system* sys = q.data.build(cfg, man);
    double r2 = 0.0;
    check(hw_r_squared(sys, q.alpha, q.beta, &h, &r2));
    hw_system_free(sys);
    const json result = {
        {"alpha", q.alpha}, {"beta", q.beta}, {"r_squared", r2}};
    write_text(q.out, result.dump(2) + "\n");
    man.outputs = {q.out};
    man.write(q.out + ".manifest.json");
    std::printf("r_squared %.6f\n", r2);
    return 0;
  }

  if (grid->parsed()) {
    Manifest man;
    man.subcommand = "grid";
    const json cfg = load_config(gr.data.config_path);
    hw_hyper h = hyper_from(cfg);
    if (gr.gamma > 0) h.gamma = gr.gamma;
    if (gr.lambda >= 0) h.lambda = gr.lambda;
    hw_grid_options go = grid_from(cfg);
    if (gr.grid_n > 0) go.n = gr.grid_n;
    man.config["hyper"] = hyper_snapshot(h);
    man.config["grid"] = grid_snapshot(go);
    hw_system* sys = gr.data.build(cfg, man);
    hw_grid_summary gsum{};
    check(hw_grid(sys, &h, &go, gr.out.c_str(), &gsum));
    hw_system_free(sys);
    man.outputs = {gr.out + ".logpost.csv", gr.out + ".mask.csv",
                   gr.out + ".alpha.csv", gr.out + ".beta.csv"};
    man.write(gr.out + ".manifest.json");
    std::printf("argmax alpha %.6f beta %.6f (cell %d,%d; %lld masked)\n",
                gsum.argmax_alpha, gsum.argmax_beta, gsum.argmax_i,
                gsum.argmax_j, static_cast<long long>(gsum.n_masked));
    return 0;
  }

  if (prior->parsed()) {
    Manifest man;
    man.subcommand = "prior-sample";
    man.seed = pr.seed;
    const json cfg = load_config(pr.data.config_path);
    hw_hyper h = hyper_from(cfg);
    if (pr.gamma > 0) h.gamma = pr.gamma;
    man.config["hyper"] = hyper_snapshot(h);
    man.config["theta"] = {{"alpha", pr.alpha}, {"beta", pr.beta}};
    man.config["n_samples"] = pr.n_samples;
    man.config["burn_in"] = pr.burn_in;
    hw_system* sys = pr.data.build(cfg, man);
    double accept = 0.0;
    check(hw_prior_sample(sys, pr.alpha, pr.beta, &h, pr.n_samples,
                          pr.burn_in, pr.seed, pr.out.c_str(), &accept));
    hw_system_free(sys);
    man.config["min_move_accept"] = accept;
    man.outputs = {pr.out};
    man.write(pr.out + ".manifest.json");
    std::printf("wrote %s (min move accept %.3f)\n", pr.out.c_str(), accept);
    return 0;
  }

  if (infer->parsed()) {
    Manifest man;
    man.subcommand = "infer";
    man.seed = in.seed;
    const json cfg = load_config(in.data.config_path);
    hw_hyper h = hyper_from(cfg);
    if (in.gamma > 0) h.gamma = in.gamma;
    if (in.lambda >= 0) h.lambda = in.lambda;
    hw_infer_options io = infer_from(cfg);
    if (!in.method.empty())
      io.method = in.method == "pm" ? HW_METHOD_PM : HW_METHOD_SADDLE;
    if (in.iters > 0) io.n_iters = in.iters;
    if (in.temps > 0) io.ais_temps = in.temps;
    if (in.particles > 0) io.ais_particles = in.particles;
    man.config["hyper"] = hyper_snapshot(h);
    man.config["infer"] = infer_snapshot(io);
    hw_system* sys = in.data.build(cfg, man);
    json meta = {{"config", man.config},
                 {"origins", man.inputs["origins"]},
                 {"dests", man.inputs["dests"]}};
    hw_infer_summary isum{};
    check(hw_infer(sys, &h, &io, in.seed, meta.dump().c_str(),
                   in.out.c_str(), &isum));
    hw_system_free(sys);
    man.config["realized"] = {
        {"theta_accept", isum.theta_accept},
        {"x_accept", isum.x_accept},
        {"estimator_failures", isum.estimator_failures},
        {"flagged_estimates", isum.flagged_estimates}};
    man.outputs = {in.out};
    man.write(in.out + ".manifest.json");
    std::printf(
        "wrote %s (theta accept %.3f, x accept %.3f, failures %lld)\n",
        in.out.c_str(), isum.theta_accept, isum.x_accept,
        static_cast<long long>(isum.estimator_failures));
    return 0;
  }

  if (summ->parsed()) {
    Manifest man;
    man.subcommand = "summarize";
    const json cfg = load_config(su.config_path);
    int32_t max_lag = su.max_lag, kde_points = su.kde_points;
    if (cfg.contains("summarize")) {
      const json& j = cfg.at("summarize");
      check_keys(j, "summarize", {"max_lag", "kde_points"});
      if (max_lag <= 0) max_lag = field(j, "max_lag", 50);
      if (kde_points <= 0) kde_points = field(j, "kde_points", 200);
    }
    if (max_lag <= 0) max_lag = 50;
    if (kde_points <= 0) kde_points = 200;
    man.config["summarize"] = {{"max_lag", max_lag},
                               {"kde_points", kde_points}};
    man.add_input("chain", su.chain);
    // clear leftovers so the manifest lists exactly this run's files
    namespace fs = std::filesystem;
    for (const char* suffix :
         {".kde_alpha.csv", ".kde_beta.csv", ".autocorr.csv"}) {
      std::error_code ec;
      fs::remove(su.out + suffix, ec);
    }
    hw_summary sum{};
    check(hw_summarize(su.chain.c_str(), max_lag, kde_points, su.out.c_str(),
                       &sum));
    const json result = {
        {"n_samples", sum.n_samples},
        {"alpha_mean", sum.alpha_mean},
        {"alpha_sd", sum.alpha_sd},
        {"beta_mean", sum.beta_mean},
        {"beta_sd", sum.beta_sd},
        {"sign_positive_fraction", sum.sign_positive_fraction},
        {"estimates_defined", sum.estimates_defined != 0},
        {"autocorr_defined", sum.autocorr_defined != 0},
        {"theta_accept", sum.theta_accept},
        {"x_accept", sum.x_accept},
        {"accept_in_target", sum.accept_in_target != 0}};
    const std::string summary_json = su.out + ".summary.json";
    write_text(summary_json, result.dump(2) + "\n");
    man.outputs = {summary_json};
    for (const char* suffix :
         {".kde_alpha.csv", ".kde_beta.csv", ".autocorr.csv"})
      if (fs::exists(su.out + suffix)) man.outputs.push_back(su.out + suffix);
    man.write(su.out + ".manifest.json");
    std::printf(
        "n %lld alpha %.4f +- %.4f beta %.4f +- %.4f sign+ %.3f\n",
        static_cast<long long>(sum.n_samples), sum.alpha_mean, sum.alpha_sd,
        sum.beta_mean, sum.beta_sd, sum.sign_positive_fraction);
    return 0;
  }

  return kExitBadInput;  // unreachable: a subcommand is required
}
