#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#ifndef ORIM_CLI_PATH
#error "ORIM_CLI_PATH must point at the CLI binary"
#endif

namespace {

using nlohmann::json;

struct CliResult {
  int rc = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(ORIM_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) r.rc = WEXITSTATUS(status);
  return r;
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "orim_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = scratch_dir() / name;
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
  return path.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Middle-thirds map with the middle branch removed by the hole; exact
// breakpoint decimals round to the binary doubles for 1/3 and 2/3.
const char* kThirdsConfig = R"({
  "system": {
    "kind": "affine",
    "driving": {"kind": "iid", "probabilities": [1.0]},
    "breakpoints": [[0.0, 0.3333333333333333, 0.6666666666666666, 1.0]],
    "slopes": [[3.0, 3.0, 3.0]],
    "holes": [[[0.3333333333333333, 0.6666666666666666]]]
  },
  "grid": {"resolution": 81},
  "orbit": {"n_back": 40, "n_fwd": 60},
  "samples": {"orbits": 4, "depth": 16, "decay_depth": 8, "density_depth": 24},
  "seed": 7
})";

std::string thirds_config() { return write_file("thirds.json", kThirdsConfig); }

json parse_envelope(const CliResult& r) {
  REQUIRE(r.rc == 0);
  json j = json::parse(r.out);
  CHECK(j.contains("version"));
  CHECK(j.contains("config_hash"));
  CHECK(j.contains("seed"));
  CHECK(j.contains("wall_time"));
  REQUIRE(j.contains("result"));
  return j;
}

}  // namespace

TEST_CASE("help text lists every subcommand") {
  const CliResult r = run_cli("--help");
  CHECK(r.rc == 0);
  for (const char* name :
       {"pressure", "dimension", "escape", "density", "decay", "check", "oracle"}) {
    INFO(name);
    CHECK(r.out.find(name) != std::string::npos);
  }
}

TEST_CASE("bad invocations exit with the config code") {
  CHECK(run_cli("pressure --config /nonexistent/nowhere.json").rc == 2);
  const std::string broken = write_file("broken.json", "{ not json !!");
  CHECK(run_cli("pressure --config " + broken).rc == 2);
  const std::string missing_kind =
      write_file("missing_kind.json",
                 R"({"system": {"driving": {"kind": "iid", "probabilities": [1.0]}}})");
  CHECK(run_cli("pressure --config " + missing_kind).rc == 2);
  CHECK(run_cli("pressure --config " + thirds_config() + " --estimator fancy").rc ==
        2);
  CHECK(run_cli("pressure").rc != 0);       // missing required --config
  CHECK(run_cli("frobnicate --config " + thirds_config()).rc != 0);
}

TEST_CASE("pressure envelope carries the exact single-point value") {
  const json j = parse_envelope(run_cli("pressure --config " + thirds_config()));
  CHECK(j["seed"].get<std::uint64_t>() == 7);
  const double value = j["result"]["point"]["value"].get<double>();
  CHECK(std::fabs(value - std::log(2.0 / 3.0)) <= 1e-10);
  CHECK(j["result"]["point"]["estimator"].get<std::string>() == "sandwich");
}

TEST_CASE("seed override lands in the envelope") {
  const json j = parse_envelope(
      run_cli("pressure --config " + thirds_config() + " --seed 12345"));
  CHECK(j["seed"].get<std::uint64_t>() == 12345);
}

TEST_CASE("analytic dimension through the CLI") {
  const json j = parse_envelope(run_cli("dimension --config " + thirds_config() +
                                        " --estimator analytic"));
  const json& d = j["result"]["dimension"];
  CHECK(d["method"].get<std::string>() == "analytic");
  CHECK(std::fabs(d["h"].get<double>() - std::log(2.0) / std::log(3.0)) <= 1e-9);
}

TEST_CASE("escape report through the CLI") {
  const json j = parse_envelope(run_cli("escape --config " + thirds_config()));
  const json& e = j["result"]["escape"];
  CHECK(std::fabs(e["slope"].get<double>() - std::log(1.5)) <= 1e-9);
  CHECK(e["agree"].get<bool>());
}

TEST_CASE("density report through the CLI") {
  const json j = parse_envelope(run_cli("density --config " + thirds_config()));
  const json& res = j["result"];
  CHECK(res["density"]["d_stabilized"].get<bool>());
  CHECK(std::fabs(res["lambda"]["value"].get<double>() - 2.0 / 3.0) <= 1e-9);
  CHECK(std::fabs(res["raccim"]["alpha"].get<double>() - 2.0 / 3.0) <= 1e-6);
}

TEST_CASE("decay report through the CLI") {
  const json j = parse_envelope(run_cli("decay --config " + thirds_config()));
  const json& series = j["result"]["decay"]["series"];
  REQUIRE(series.is_array());
  CHECK(series.size() == 20);  // default battery
  for (const json& s : series) {
    INFO(s["id"].get<std::string>());
    CHECK((s["fitted"].get<bool>() || s["exact"].get<bool>()));
  }
}

TEST_CASE("condition report through the CLI") {
  const json j = parse_envelope(run_cli("check --config " + thirds_config()));
  CHECK(!j["result"]["conditions"]["q1_pass"].get<bool>());
  CHECK(std::fabs(j["result"]["ly"]["q"].get<double>() - 0.28125) <= 1e-6);
}

TEST_CASE("oracle reference quantities through the CLI") {
  const json j = parse_envelope(run_cli("oracle --config " + thirds_config()));
  const json& res = j["result"];
  const auto masses = res["survivor_masses"].get<std::vector<double>>();
  REQUIRE(masses.size() >= 3);
  // Depth n keeps the points surviving exponents 0..n: mass (2/3)^(n+1).
  CHECK(std::fabs(masses[0] - 2.0 / 3.0) <= 1e-12);
  CHECK(std::fabs(masses[1] - 4.0 / 9.0) <= 1e-12);
  CHECK(std::fabs(masses[2] - 8.0 / 27.0) <= 1e-12);
  CHECK(res["cylinders"]["zeta"].get<int>() == 0);
  CHECK(res["cylinders"]["count"].get<int>() == 64);
  const json& root = res["analytic"]["root"];
  CHECK(std::fabs(root["h"].get<double>() - std::log(2.0) / std::log(3.0)) <=
        1e-9);
}

TEST_CASE("identical runs produce identical envelopes modulo wall time") {
  const std::string cfg = thirds_config();
  const CliResult a = run_cli("dimension --config " + cfg + " --estimator analytic");
  const CliResult b = run_cli("dimension --config " + cfg + " --estimator analytic");
  REQUIRE(a.rc == 0);
  REQUIRE(b.rc == 0);
  json ja = json::parse(a.out);
  json jb = json::parse(b.out);
  ja.erase("wall_time");
  jb.erase("wall_time");
  CHECK(ja.dump() == jb.dump());
}

TEST_CASE("pressure curve CSV export") {
  const std::string cfg = write_file("thirds_grid.json", R"({
    "system": {
      "kind": "affine",
      "driving": {"kind": "iid", "probabilities": [1.0]},
      "breakpoints": [[0.0, 0.3333333333333333, 0.6666666666666666, 1.0]],
      "slopes": [[3.0, 3.0, 3.0]],
      "holes": [[[0.3333333333333333, 0.6666666666666666]]]
    },
    "grid": {"resolution": 81},
    "orbit": {"n_back": 20, "n_fwd": 30},
    "samples": {"orbits": 4, "depth": 12},
    "t_grid": [0.0, 0.5, 1.0],
    "estimator": "analytic",
    "seed": 3
  })");
  const std::string out = (scratch_dir() / "curve.csv").string();
  const CliResult r = run_cli("pressure --config " + cfg + " --out " + out);
  REQUIRE(r.rc == 0);
  const std::string csv = read_file(out);
  CHECK(csv.rfind("t,value,std_error,lower,upper,orbits,depth,estimator\n", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  // Density, decay, and oracle project to CSV as well; escape does not.
  const std::string dens_out = (scratch_dir() / "dens.csv").string();
  REQUIRE(run_cli("density --config " + thirds_config() + " --out " + dens_out)
              .rc == 0);
  const std::string dens = read_file(dens_out);
  CHECK(dens.rfind("cell,lo,hi,q,on_mask\n", 0) == 0);
  CHECK(std::count(dens.begin(), dens.end(), '\n') >= 3);

  const std::string decay_out = (scratch_dir() / "decay.csv").string();
  REQUIRE(run_cli("decay --config " + thirds_config() + " --out " + decay_out)
              .rc == 0);
  CHECK(read_file(decay_out).rfind("id,n,c,correlation\n", 0) == 0);

  const std::string surv_out = (scratch_dir() / "surv.csv").string();
  REQUIRE(run_cli("oracle --config " + thirds_config() + " --out " + surv_out)
              .rc == 0);
  const std::string surv = read_file(surv_out);
  CHECK(surv.rfind("depth,mass,components\n", 0) == 0);
  CHECK(std::count(surv.begin(), surv.end(), '\n') >= 3);

  const std::string bad_out = (scratch_dir() / "esc.csv").string();
  CHECK(run_cli("escape --config " + thirds_config() + " --out " + bad_out).rc == 2);
}
