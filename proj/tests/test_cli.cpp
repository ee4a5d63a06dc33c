#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"

#include "psilab/errors.hpp"
#include "psilab/config.hpp"
#include "psilab/experiments.hpp"
#include "psilab/parallel.hpp"

using namespace psilab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "psilab_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.ini";
  std::ofstream(p) << text;
  return p.string();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PSILAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

const char* kBessel = R"(
[experiment]
kind = weyl_bessel
[grid]
d = 1
L = 4
npts = 256
)";

const char* kDos = R"(
[experiment]
kind = dos_random
seed = 99
[grid]
d = 1
L = 16
npts = 128
[model]
samples = 8
)";

}  // namespace

TEST_CASE("config parsing is strict") {
  SUBCASE("unknown field names its line") {
    const Config c = Config::parse_string("[experiment]\nkind = weyl_bessel\n\n[grid]\nnpst = 64\n", "t.ini");
    try {
      load_experiment_config(c);
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 5);
      CHECK(e.field == "grid.npst");
      CHECK(std::string(e.what()).find("t.ini:5") != std::string::npos);
    }
  }
  SUBCASE("malformed numbers") {
    const Config c = Config::parse_string("[grid]\nnpts = 64x\nL = 4.0.1\n");
    CHECK_THROWS_AS(c.get_int("grid.npts", 1), ConfigError);
    CHECK_THROWS_AS(c.get_double("grid.L", 1.0), ConfigError);
  }
  SUBCASE("keys outside a section") { CHECK_THROWS_AS(Config::parse_string("kind = x\n"), ConfigError); }
  SUBCASE("syntax errors carry the line") {
    try {
      Config::parse_string("[a]\nx = 1\n[b\n");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line == 3);
    }
  }
  SUBCASE("range checks") {
    CHECK_THROWS_AS(load_experiment_config(Config::parse_string("[experiment]\nkind = weyl_bessel\n[grid]\nnpts = 100\n")),
                    ConfigError);
    CHECK_THROWS_AS(load_experiment_config(Config::parse_string("[experiment]\nkind = nope\n")), ConfigError);
    CHECK_THROWS_AS(load_experiment_config(Config::parse_string(
                        "[experiment]\nkind = weyl_bessel\n[analysis]\nwindow = 0.2, 0.1\n")),
                    ConfigError);
  }
  SUBCASE("lists and overrides") {
    Config c = Config::parse_string("[a]\nv = 1, 2.5 ,3\n");
    CHECK(c.get_doubles("a.v", {}) == std::vector<double>{1.0, 2.5, 3.0});
    c.set("a.w", "7");
    CHECK(c.get_int("a.w", 0) == 7);
    CHECK_NOTHROW(c.check_all_used());
  }
}

TEST_CASE("defaults resolve to a complete manifest") {
  const ExperimentConfig cfg = load_experiment_config(Config::parse_string("[experiment]\nkind = weyl_bessel\n"));
  CHECK(cfg.kind == ExperimentKind::weyl_bessel);
  CHECK(cfg.tolerance == default_tolerance(ExperimentKind::weyl_bessel));
  CHECK(cfg.resolved.find("npts = 1024") != std::string::npos);
  CHECK(cfg.resolved.find("[operator]") != std::string::npos);
  const ExperimentConfig again = load_experiment_config(Config::parse_string(cfg.resolved));
  CHECK(again.resolved == cfg.resolved);
}

TEST_CASE("every experiment kind has a name and an anchor") {
  for (const char* name : {"weyl_bessel", "weyl_elliptic", "weyl_commutator_cz", "weyl_commutator_frac", "zeta_residue",
                           "parametrix_check", "power_group_check", "microlocal_count", "dos_random"}) {
    const ExperimentKind k = parse_experiment_kind(name);
    CHECK(to_string(k) == name);
    CHECK_FALSE(theorem_anchor(k).empty());
  }
}

TEST_CASE("weyl_bessel default config predicts 1/pi and passes") {
  const fs::path dir = scratch("bessel_default");
  const std::string path = write_config(dir, "[experiment]\nkind = weyl_bessel\noutput = " + (dir / "out").string() + "\n");
  const ExitReport r = run_config_file(path, {});
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(read_file(dir / "out" / "summary.json"));
  CHECK(j["predicted"].get<double>() == doctest::Approx(0.31831).epsilon(1e-5));
  CHECK(j["pass"].get<bool>());
  CHECK(j["anchor"].get<std::string>() == theorem_anchor(ExperimentKind::weyl_bessel));
  CHECK(j.contains("wall_time_s"));
  CHECK(j.contains("relative_error"));
  CHECK(fs::exists(dir / "out" / "results.csv"));
  CHECK(read_file(dir / "out" / "manifest.ini").find("kind = weyl_bessel") != std::string::npos);
}

TEST_CASE("exit status for hypothesis and validation failures") {
  const fs::path dir = scratch("bad_configs");
  const ExitReport frac = run_config_file(
      write_config(dir, "[experiment]\nkind = weyl_commutator_frac\n[grid]\nd = 2\nnpts = 16\n[operator]\nalpha = -3\n"), {});
  CHECK(frac.status == 1);
  CHECK(frac.message.find("alpha") != std::string::npos);
  CHECK(frac.message.find("hypothesis") != std::string::npos);

  const ExitReport dos = run_config_file(write_config(dir, "[experiment]\nkind = dos_random\n[model]\nsamples = 0\n"), {});
  CHECK(dos.status == 1);
  CHECK(dos.message.find("samples") != std::string::npos);

  const ExitReport missing = run_config_file((dir / "absent.ini").string(), {});
  CHECK(missing.status == 1);
}

TEST_CASE("tolerance failures exit with status 2") {
  const fs::path dir = scratch("tight");
  const std::string path =
      write_config(dir, "[experiment]\nkind = weyl_bessel\ntolerance = 1e-12\n[grid]\nnpts = 256\n");
  const ExitReport r = run_config_file(path, {{"experiment.output", (dir / "out").string()}});
  CHECK(r.status == 2);
}

TEST_CASE("sweep writes one directory per value") {
  const fs::path dir = scratch("sweep");
  const std::string path = write_config(dir, kBessel);
  const ExitReport r = sweep(path, "grid.npts", {"128", "256", "512"}, {{"experiment.output", (dir / "out").string()}});
  CHECK(r.status == 0);
  REQUIRE(r.results.size() == 3);
  for (const char* v : {"128", "256", "512"}) CHECK(fs::exists(dir / "out" / (std::string("grid.npts=") + v) / "summary.json"));
  const std::string table = read_file(dir / "out" / "sweep.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);
  // finer grids get closer to the prediction
  CHECK(r.results[2].relative_error < r.results[0].relative_error);

  CHECK(sweep(path, "grid.npts", {}, {}).status == 1);
  CHECK(sweep(path, "grid.nope", {"1"}, {}).status == 1);
}

TEST_CASE("window sweep re-analyses the same spectrum") {
  const fs::path dir = scratch("window_sweep");
  const ExitReport r = sweep(write_config(dir, kBessel), "analysis.window", {"0.02,0.15", "0.05,0.3"},
                             {{"experiment.output", (dir / "out").string()}});
  REQUIRE(r.results.size() == 2);
  CHECK(r.results[0].predicted == r.results[1].predicted);
  CHECK(r.results[0].measured != r.results[1].measured);
}

TEST_CASE("property: results are byte identical across runs and thread counts") {
  for (const char* text : {kBessel, kDos}) {
    const fs::path dir = scratch("determinism");
    const std::string path = write_config(dir, text);
    std::vector<std::string> outputs;
    for (int w : {1, 2, 1}) {
      set_workers(w);
      const fs::path out = dir / ("out" + std::to_string(outputs.size()));
      const ExitReport r = run_config_file(path, {{"experiment.output", out.string()}});
      CHECK(r.status != 1);
      outputs.push_back(read_file(out / "results.csv"));
    }
    set_workers(1);
    CHECK_FALSE(outputs[0].empty());
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0] == outputs[2]);
  }
}

TEST_CASE("csv output follows RFC 4180 with full precision") {
  Table t;
  t.header = {"a", "b,c"};
  t.rows = {{0.1, 1.0 / 3.0}};
  std::ostringstream out;
  t.write_csv(out);
  CHECK(out.str() == "a,\"b,c\"\r\n0.10000000000000001,0.33333333333333331\r\n");
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  const std::string good = write_config(dir, kBessel);
  CHECK(run_cli("--out " + (dir / "a").string() + " run " + good) == 0);
  CHECK(fs::exists(dir / "a" / "summary.json"));
  CHECK(run_cli("--workers 2 --seed 5 --out " + (dir / "b").string() + " run " + good) == 0);
  CHECK(read_file(dir / "b" / "manifest.ini").find("seed = 5") != std::string::npos);
  CHECK(run_cli("run " + (dir / "missing.ini").string()) == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("--out " + (dir / "c").string() + " sweep " + good + " --param grid.npts --values 128,256") == 0);
  CHECK(fs::exists(dir / "c" / "sweep.csv"));
  CHECK(run_cli("sweep " + good + " --param grid.npts --values ,") == 1);
  const std::string frac = (dir / "frac.ini").string();
  std::ofstream(frac) << "[experiment]\nkind = weyl_commutator_frac\n[grid]\nd = 2\nnpts = 16\n[operator]\nalpha = -3\n";
  CHECK(run_cli("run " + frac) == 1);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : fs::directory_iterator(PSILAB_CONFIGS)) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_experiment_config(Config::parse_file(entry.path().string())));
  }
}
