// Copyright 2026 The hwinfer Authors
// SPDX-License-Identifier: Apache-2.0

// Drives the installed command-line tool as a subprocess: exit codes,
// stderr error categories, manifest bookkeeping, and byte reproducibility.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hwinfer.h"
#include "json.hpp"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const std::string& base_dir() {
  static const std::string dir = [] {
    const auto d = fs::temp_directory_path() /
                   ("hwcli." + std::to_string(::getpid()));
    fs::create_directories(d / "art");
    fs::create_directories(d / "io");
    return d.string();
  }();
  return dir;
}

std::string art(const std::string& name) { return base_dir() + "/art/" + name; }
std::string io(const std::string& name) { return base_dir() + "/io/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

RunResult run(const std::string& args) {
  const std::string out_f = io("stdout.txt"), err_f = io("stderr.txt");
  const std::string cmd =
      std::string(HW_CLI_BIN) + " " + args + " >" + out_f + " 2>" + err_f;
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out_f);
  r.err = slurp(err_f);
  return r;
}

std::string file_hash_hex(const std::string& path) {
  uint64_t h = 0;
  REQUIRE(hw_hash_file(path.c_str(), &h) == HW_OK);
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// One shared dataset + config for the whole suite.
struct Fixture {
  std::string cfg = io("config.json");
  std::string origins = art("ds.origins.csv");
  std::string dests = art("ds.dests.csv");
  std::string data_args;

  Fixture() {
    const json config = {
        {"hyper",
         {{"gamma", 30.0},
          {"delta", 0.1},
          {"kappa", 1.3},
          {"lambda", 0.05}}},
        {"gen", {{"pt_burn_in", 100}}},
        {"infer", {{"burn_in", 15}, {"adapt_stride", 5}}},
        {"integrator", {{"n_steps", 150}, {"save_stride", 25}}}};
    std::ofstream(cfg) << config.dump(2);
    const RunResult g =
        run("gen --n-origins 5 --n-dests 3 --alpha 1.1 --beta 0.4 --seed 42"
            " --config " + cfg + " --out " + art("ds"));
    REQUIRE_MESSAGE(g.code == 0, g.err);
    data_args = " --origins " + origins + " --dests " + dests + " --config " +
                cfg + " ";
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST_CASE("bad invocations fail with a category line on stderr") {
  const RunResult none = run("");
  CHECK(none.code == HW_ERROR_BAD_INPUT);
  CHECK(none.err.find("error: bad_input:") != std::string::npos);

  const RunResult version = run("--version");
  CHECK(version.code == 0);
  CHECK(version.out.find("0.1.0") != std::string::npos);

  const RunResult missing =
      run("rsq --origins nowhere.csv --dests nowhere.csv --out " +
          art("r2_missing.json"));
  CHECK(missing.code == HW_ERROR_BAD_INPUT);
  CHECK(missing.err.substr(0, 18) == "error: bad_input: ");
  CHECK(missing.err.find("nowhere.csv") != std::string::npos);
  CHECK(lines_of(missing.err).size() == 1);  // one machine-readable line

  const RunResult noseed = run("infer" + fixture().data_args +
                               "--method saddle --iters 5 --out " +
                               art("noseed.csv"));
  CHECK(noseed.code == HW_ERROR_BAD_INPUT);
  CHECK(noseed.err.find("--seed") != std::string::npos);
}

TEST_CASE("generation is reproducible and manifested") {
  const Fixture& f = fixture();
  CHECK(lines_of(slurp(f.origins)).size() == 6);
  CHECK(lines_of(slurp(f.dests)).size() == 4);
  CHECK(lines_of(slurp(art("ds.x_true.csv"))).size() == 3);

  const json man = json::parse(slurp(art("ds.manifest.json")));
  CHECK(man.at("subcommand") == "gen");
  CHECK(man.at("seed") == 42);
  CHECK(man.at("tool") == "hwinfer");
  CHECK(man.at("version") == hw_version());
  CHECK(man.at("outputs").size() == 3);
  CHECK(man.at("config").at("hyper").at("gamma") == 30.0);
  CHECK(man.at("config").at("theta_true").at("alpha") == 1.1);
  CHECK(man.at("wall_clock_seconds").get<double>() >= 0.0);

  const RunResult again =
      run("gen --n-origins 5 --n-dests 3 --alpha 1.1 --beta 0.4 --seed 42"
          " --config " + f.cfg + " --out " + art("ds_again"));
  REQUIRE_MESSAGE(again.code == 0, again.err);
  CHECK(slurp(art("ds_again.origins.csv")) == slurp(f.origins));
  CHECK(slurp(art("ds_again.dests.csv")) == slurp(f.dests));
  CHECK(slurp(art("ds_again.x_true.csv")) == slurp(art("ds.x_true.csv")));
}

TEST_CASE("dynamics subcommands write what they promise") {
  const Fixture& f = fixture();

  const RunResult r2 = run("rsq" + f.data_args +
                           "--alpha 1.1 --beta 0.4 --out " + art("r2.json"));
  REQUIRE_MESSAGE(r2.code == 0, r2.err);
  CHECK(r2.out.substr(0, 9) == "r_squared");
  const json r2j = json::parse(slurp(art("r2.json")));
  CHECK(r2j.at("r_squared").get<double>() <= 1.0);
  const json r2man = json::parse(slurp(art("r2.json.manifest.json")));
  CHECK(r2man.at("inputs").at("origins").at("fnv1a64") ==
        file_hash_hex(f.origins));
  CHECK(r2man.at("seed").is_null());

  const RunResult eq = run("equilibrium" + f.data_args +
                           "--alpha 1.1 --beta 0.4 --out " + art("weq.csv"));
  REQUIRE_MESSAGE(eq.code == 0, eq.err);
  const auto w_lines = lines_of(slurp(art("weq.csv")));
  REQUIRE(w_lines.size() == 3);
  for (const auto& ln : w_lines) CHECK(std::stod(ln) > 0.0);

  const RunResult ode = run("simulate" + f.data_args +
                            "--mode ode --alpha 1.1 --beta 0.4 --out " +
                            art("ode.csv"));
  REQUIRE_MESSAGE(ode.code == 0, ode.err);
  CHECK(lines_of(slurp(art("ode.csv")))[0] == "t,x_1,x_2,x_3");

  const RunResult sde_noseed =
      run("simulate" + f.data_args + "--mode sde --out " + art("sde.csv"));
  CHECK(sde_noseed.code == HW_ERROR_BAD_INPUT);
  CHECK(sde_noseed.err.find("--seed") != std::string::npos);

  const RunResult sde = run("simulate" + f.data_args +
                            "--mode sde --seed 8 --out " + art("sde.csv"));
  REQUIRE_MESSAGE(sde.code == 0, sde.err);
  const RunResult sde2 = run("simulate" + f.data_args +
                             "--mode sde --seed 8 --out " + art("sde2.csv"));
  REQUIRE_MESSAGE(sde2.code == 0, sde2.err);
  CHECK(slurp(art("sde.csv")) == slurp(art("sde2.csv")));

  const RunResult prior = run("prior-sample" + f.data_args +
                              "--alpha 1.1 --beta 0.4 --n-samples 10"
                              " --burn-in 30 --seed 9 --out " +
                              art("draws.csv"));
  REQUIRE_MESSAGE(prior.code == 0, prior.err);
  CHECK(lines_of(slurp(art("draws.csv"))).size() == 10);
}

TEST_CASE("grid and chains are byte-reproducible through the tool") {
  const Fixture& f = fixture();

  const std::string grid_cmd = "grid" + f.data_args + "--grid-n 5 --out ";
  const RunResult g1 = run(grid_cmd + art("grid"));
  REQUIRE_MESSAGE(g1.code == 0, g1.err);
  CHECK(g1.out.find("argmax alpha") != std::string::npos);
  REQUIRE(lines_of(slurp(art("grid.logpost.csv"))).size() == 5);
  REQUIRE(lines_of(slurp(art("grid.alpha.csv"))).size() == 5);
  const RunResult g2 = run(grid_cmd + art("grid_b"));
  REQUIRE_MESSAGE(g2.code == 0, g2.err);
  CHECK(slurp(art("grid.logpost.csv")) == slurp(art("grid_b.logpost.csv")));
  CHECK(slurp(art("grid.mask.csv")) == slurp(art("grid_b.mask.csv")));

  const std::string infer_cmd = "infer" + f.data_args +
                                "--method saddle --iters 30 --seed 3 --out ";
  const RunResult i1 = run(infer_cmd + art("chain.csv"));
  REQUIRE_MESSAGE(i1.code == 0, i1.err);
  const auto chain_lines = lines_of(slurp(art("chain.csv")));
  REQUIRE(chain_lines.size() == 32);
  CHECK(chain_lines[0].find("\"seed\":3") != std::string::npos);
  CHECK(chain_lines[0].find("\"method\":\"saddle\"") != std::string::npos);
  CHECK(chain_lines[0].find("\"fnv1a64\":\"" + file_hash_hex(f.origins) +
                            "\"") != std::string::npos);
  CHECK(chain_lines[1] == "iter,alpha,beta,omega,log_s_abs,x_1,x_2,x_3");

  const RunResult i2 = run(infer_cmd + art("chain_b.csv"));
  REQUIRE_MESSAGE(i2.code == 0, i2.err);
  CHECK(slurp(art("chain.csv")) == slurp(art("chain_b.csv")));

  const json iman = json::parse(slurp(art("chain.csv.manifest.json")));
  CHECK(iman.at("config").at("realized").contains("theta_accept"));
  CHECK(iman.at("config").at("infer").at("n_iters") == 30);

  const RunResult pm = run("infer" + f.data_args +
                           "--method pm --iters 8 --temps 3 --particles 2"
                           " --seed 4 --out " + art("chain_pm.csv"));
  REQUIRE_MESSAGE(pm.code == 0, pm.err);
  CHECK(lines_of(slurp(art("chain_pm.csv"))).size() == 10);
  const json pman = json::parse(slurp(art("chain_pm.csv.manifest.json")));
  CHECK(pman.at("config").at("infer").at("method") == "pm");
  CHECK(pman.at("config").at("infer").at("ais_temps") == 3);

  const RunResult su = run("summarize --chain " + art("chain.csv") +
                           " --max-lag 8 --kde-points 40 --out " +
                           art("sum"));
  REQUIRE_MESSAGE(su.code == 0, su.err);
  const json sj = json::parse(slurp(art("sum.summary.json")));
  CHECK(sj.at("n_samples") == 30);
  CHECK(sj.at("estimates_defined") == true);
  CHECK(sj.at("sign_positive_fraction") == 1.0);
  const json sman = json::parse(slurp(art("sum.manifest.json")));
  for (const auto& path : sman.at("outputs"))
    CHECK(fs::exists(path.get<std::string>()));
}

TEST_CASE("flags override the configuration file") {
  const Fixture& f = fixture();
  const RunResult g = run("grid" + f.data_args +
                          "--grid-n 4 --gamma 55 --out " + art("grid_g55"));
  REQUIRE_MESSAGE(g.code == 0, g.err);
  const json man = json::parse(slurp(art("grid_g55.manifest.json")));
  CHECK(man.at("config").at("hyper").at("gamma") == 55.0);
  CHECK(man.at("config").at("grid").at("n") == 4);

  const std::string nocfg_args =
      " --origins " + f.origins + " --dests " + f.dests + " ";

  const std::string bad_cfg = io("bad_config.json");
  std::ofstream(bad_cfg) << "{\"hyper\": {\"gama\": 1.0}}";
  const RunResult bad = run("rsq" + nocfg_args + "--config " + bad_cfg +
                            " --out " + art("r2_bad.json"));
  CHECK(bad.code == HW_ERROR_BAD_INPUT);
  CHECK(bad.err.find("unknown key") != std::string::npos);

  const std::string broken_cfg = io("broken_config.json");
  std::ofstream(broken_cfg) << "not json";
  const RunResult broken = run("grid" + nocfg_args + "--config " +
                               broken_cfg + " --out " + art("grid_broken"));
  CHECK(broken.code == HW_ERROR_BAD_INPUT);
}

TEST_CASE("every artifact belongs to exactly one manifest") {
  // run after the pipeline cases: scan the artifact directory
  std::map<std::string, int> referenced;
  int manifest_count = 0;
  for (const auto& entry : fs::directory_iterator(base_dir() + "/art")) {
    const std::string p = entry.path().string();
    if (p.size() > 14 &&
        p.compare(p.size() - 14, 14, ".manifest.json") == 0) {
      ++manifest_count;
      const json man = json::parse(slurp(p));
      for (const auto& out : man.at("outputs"))
        referenced[out.get<std::string>()] += 1;
    }
  }
  REQUIRE(manifest_count > 5);
  int artifacts = 0;
  for (const auto& entry : fs::directory_iterator(base_dir() + "/art")) {
    const std::string p = entry.path().string();
    if (p.size() > 14 && p.compare(p.size() - 14, 14, ".manifest.json") == 0)
      continue;
    ++artifacts;
    CHECK_MESSAGE(referenced[p] == 1,
                  p << " referenced by " << referenced[p] << " manifests");
  }
  CHECK(artifacts > 10);
}
