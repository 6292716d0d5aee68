#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fplab/cli.hpp"
#include "fplab/grid.hpp"
#include "test_support.hpp"

using namespace fplab;

namespace {

int cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"fplab"};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_cli((int)argv.size(), argv.data());
}

// Runs the CLI with std::cout captured.
int cli_capture(std::initializer_list<const char*> args, std::string& out) {
  std::ostringstream sink;
  std::streambuf* old = std::cout.rdbuf(sink.rdbuf());
  int code = cli(args);
  std::cout.rdbuf(old);
  out = sink.str();
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

nlohmann::json read_json(const std::string& path) {
  return nlohmann::json::parse(slurp(path));
}

void write_lines(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  REQUIRE(os);
  os << text;
}

}  // namespace

TEST_CASE("help exits cleanly") {
  std::string out;
  CHECK(cli_capture({"--help"}, out) == 0);
  CHECK(out.find("run-pde") != std::string::npos);
  CHECK(cli({}) == 2);            // a subcommand is required
  CHECK(cli({"frobnicate"}) == 2);
}

TEST_CASE("run-pde produces the full artifact set") {
  testsup::ScratchDir dir("cli-pde");
  std::string out;
  const int code = cli_capture({"run-pde", "--out", dir.str().c_str(), "--set", "n=64",
                                "--set", "T=0.01", "--set", "model=CUBIC"},
                               out);
  REQUIRE(code == 0);
  CHECK(out.find("run-pde: 10 steps") != std::string::npos);

  const auto summary = read_json(dir.sub("summary.json"));
  CHECK(summary["steps"] == 10);
  CHECK(summary["final_time"] == 0.01);
  CHECK(summary["mass_drift_max"].get<double>() < 1e-10);

  const auto meta = read_json(dir.sub("meta.json"));
  CHECK(meta["command"] == "run-pde");
  CHECK(meta["scenario"]["model"] == "CUBIC");
  CHECK(meta["scenario"]["n"] == 64);

  const std::string series = slurp(dir.sub("series.csv"));
  CHECK(series.rfind("time,mass,min,max,l1,l2\n", 0) == 0);
  // Header plus one row per recorded time.
  CHECK(std::count(series.begin(), series.end(), '\n') == 12);

  const std::string manifest = slurp(dir.sub("manifest.csv"));
  CHECK(manifest.find("fields/state_000000.f64") != std::string::npos);
  CHECK(manifest.find("fields/state_000010.f64") != std::string::npos);

  const ScalarField final_state = read_field(dir.sub("fields/state_000010.f64"));
  CHECK(final_state.grid.n == 64);
  CHECK(mass(final_state) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("run-pde honors the output stride but always keeps the last state") {
  testsup::ScratchDir dir("cli-stride");
  REQUIRE(cli({"run-pde", "--out", dir.str().c_str(), "--set", "n=64", "--set", "T=0.01",
               "--set", "output_stride=4"}) == 0);
  CHECK(std::filesystem::exists(dir.sub("fields/state_000000.f64")));
  CHECK(std::filesystem::exists(dir.sub("fields/state_000004.f64")));
  CHECK(std::filesystem::exists(dir.sub("fields/state_000008.f64")));
  CHECK(std::filesystem::exists(dir.sub("fields/state_000010.f64")));
  CHECK(!std::filesystem::exists(dir.sub("fields/state_000001.f64")));
  CHECK(!std::filesystem::exists(dir.sub("fields/state_000009.f64")));
}

TEST_CASE("identical scenarios produce byte-identical artifacts") {
  testsup::ScratchDir d1("cli-rep1"), d2("cli-rep2");
  auto run = [&](const testsup::ScratchDir& d) {
    return cli({"run-pde", "--out", d.str().c_str(), "--set", "n=64", "--set", "T=0.01",
                "--set", "model=CUBIC-DRIFT", "--set", "initial=random", "--set", "seed=9"});
  };
  REQUIRE(run(d1) == 0);
  REQUIRE(run(d2) == 0);
  for (const char* leaf : {"summary.json", "series.csv", "manifest.csv",
                           "fields/state_000010.f64"})
    CHECK(slurp(d1.sub(leaf)) == slurp(d2.sub(leaf)));
}

TEST_CASE("scenario files combine with command-line overrides") {
  testsup::ScratchDir dir("cli-scn");
  const std::string scn = dir.sub("run.scn");
  write_lines(scn, "model = CUBIC\nn = 64\nT = 0.02\ntime_step = 2e-3\n");
  REQUIRE(cli({"run-pde", "--scenario", scn.c_str(), "--out", dir.str().c_str(),
               "--set", "T=0.01"}) == 0);
  const auto meta = read_json(dir.sub("meta.json"));
  CHECK(meta["scenario"]["model"] == "CUBIC");   // from the file
  CHECK(meta["scenario"]["T"] == 0.01);          // overridden
  CHECK(meta["scenario"]["time_step"] == 2e-3);  // from the file
}

TEST_CASE("malformed scenarios exit with code two and a diagnostic") {
  testsup::ScratchDir dir("cli-bad");
  const std::string scn = dir.sub("bad.scn");
  write_lines(scn, "model = LINEAR\nwhatever = 3\n");
  CHECK(cli({"run-pde", "--scenario", scn.c_str(), "--out", dir.str().c_str()}) == 2);
  const auto err = read_json(dir.sub("error.json"));
  CHECK(err["exit_code"] == 2);
  CHECK(err["type"] == "scenario");
  const std::string msg = err["message"].get<std::string>();
  CHECK(msg.find(":2:") != std::string::npos);  // the offending line

  CHECK(cli({"run-pde", "--out", dir.str().c_str(), "--set", "time_step=-1"}) == 2);
  CHECK(cli({"run-pde", "--out", dir.str().c_str(), "--set", "nonsense"}) == 2);
}

TEST_CASE("unknown names exit with code three") {
  testsup::ScratchDir dir("cli-name");
  CHECK(cli({"run-pde", "--out", dir.str().c_str(), "--set", "model=SEPTIC"}) == 3);
  auto err = read_json(dir.sub("error.json"));
  CHECK(err["exit_code"] == 3);
  CHECK(err["type"] == "unknown-name");

  CHECK(cli({"run-verify", "--out", dir.str().c_str(), "--set", "checks=entropy"}) == 3);
}

TEST_CASE("run-particles writes snapshots with unit mass") {
  testsup::ScratchDir dir("cli-part");
  REQUIRE(cli({"run-particles", "--out", dir.str().c_str(), "--set", "n=64", "--set",
               "T=0.01", "--set", "particles=2000", "--set", "snapshots=0.0,0.01"}) == 0);
  const auto summary = read_json(dir.sub("summary.json"));
  CHECK(summary["particles"] == 2000);
  CHECK(summary["snapshots"] == 2);
  for (const auto& m : summary["masses"])
    CHECK(m.get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::filesystem::exists(dir.sub("fields/state_000001.f64")));
}

TEST_CASE("run-verify selects checks and reports pass status") {
  testsup::ScratchDir dir("cli-verify");
  std::string out;
  const int code = cli_capture({"run-verify", "--out", dir.str().c_str(), "--set", "n=64",
                                "--set", "T=0.01", "--set",
                                "checks=functional-inequalities,barrier"},
                               out);
  REQUIRE(code == 0);
  CHECK(out.find("[PASS] functional-inequalities") != std::string::npos);
  CHECK(out.find("[PASS] sup-barrier") != std::string::npos);

  const auto summary = read_json(dir.sub("summary.json"));
  CHECK(summary["all_pass"] == true);
  CHECK(summary["n_checks"] == 2);
  CHECK(summary["failures"].empty());
  CHECK(slurp(dir.sub("report.csv")).find("functional-inequalities") != std::string::npos);
  CHECK(slurp(dir.sub("report.txt")).find("[PASS]") != std::string::npos);
}

TEST_CASE("convergence fits the expected first order") {
  testsup::ScratchDir dir("cli-conv");
  std::string out;
  const int code = cli_capture({"convergence", "--out", dir.str().c_str(), "--set", "n=64",
                                "--set", "T=0.02", "--set", "time_step=4e-3", "--levels", "3"},
                               out);
  REQUIRE(code == 0);
  const auto summary = read_json(dir.sub("summary.json"));
  const double order = summary["fitted_order"].get<double>();
  CHECK(order > 0.85);
  const std::string csv = slurp(dir.sub("convergence.csv"));
  CHECK(csv.rfind("time_step,distance\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + two gaps

  CHECK(cli({"convergence", "--out", dir.str().c_str(), "--levels", "2"}) == 2);
}

TEST_CASE("compare prints the requested distance between stored fields") {
  testsup::ScratchDir dir("cli-cmp");
  const PeriodicGrid g(1, 10.0, 64);
  const ScalarField a = synthesize_random_field(g, 1, 6, 1.0);
  const ScalarField b = synthesize_random_field(g, 2, 6, 1.0);
  write_field(dir.sub("a.f64"), a);
  write_field(dir.sub("b.f64"), b);

  std::string out;
  const std::string ap = dir.sub("a.f64"), bp = dir.sub("b.f64");
  REQUIRE(cli_capture({"compare", "--a", ap.c_str(), "--b", bp.c_str()}, out) == 0);
  CHECK(std::stod(out) == doctest::Approx(norm_l1(a - b)).epsilon(1e-14));

  REQUIRE(cli_capture({"compare", "--a", ap.c_str(), "--b", bp.c_str(), "--norm", "neg2"},
                      out) == 0);
  CHECK(std::stod(out) == doctest::Approx(neg_sobolev_norm(a - b, 2)).epsilon(1e-14));

  // Self distance is exactly zero.
  REQUIRE(cli_capture({"compare", "--a", ap.c_str(), "--b", ap.c_str()}, out) == 0);
  CHECK(std::stod(out) == 0.0);

  // Mismatched grids are a setup error.
  const PeriodicGrid g2(1, 10.0, 128);
  write_field(dir.sub("c.f64"), ScalarField(g2, 1.0));
  const std::string cp = dir.sub("c.f64");
  CHECK(cli({"compare", "--a", ap.c_str(), "--b", cp.c_str(), "--out",
             dir.str().c_str()}) == 2);
  CHECK(cli({"compare", "--a", ap.c_str(), "--b", "/nowhere.f64", "--out",
             dir.str().c_str()}) == 2);
  CHECK(cli({"compare", "--a", ap.c_str(), "--b", bp.c_str(), "--norm", "neg3", "--out",
             dir.str().c_str()}) == 2);
}
