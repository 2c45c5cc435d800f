#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "loewner/cli.hpp"

using namespace loewner;

namespace {

std::string tmp_path(const std::string& name) { return std::string(LOEWNER_TEST_TMP) + "/" + name; }

Config config_of(std::initializer_list<std::pair<const char*, const char*>> entries) {
  Config c;
  for (const auto& [k, v] : entries) c.set(k, v);
  return c;
}

struct Process {
  int code;
  std::string out;
};

Process run_cli(const std::string& args) {
  const std::string cmd = "LOEWNER_THREADS=1 " + std::string(LOEWNER_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_CASE("spec string parsers") {
  CHECK(std::abs(parse_herglotz("koebe:0.5")(0.5, 0.0) - 0.6) < 1e-15);
  CHECK(parse_herglotz("const:2,1")(0.1, 0.0) == cplx(2.0, 1.0));
  CHECK(std::abs(parse_herglotz("rational:1;0.5/1;-0.5")(0.5, 0.0) - 1.25 / 0.75) < 1e-15);
  const HerglotzSpec pw = parse_herglotz("piecewise:0@const:1|2@koebe:0.5");
  CHECK(pw(0.5, 1.0) == cplx(1.0));
  CHECK(std::abs(pw(0.5, 3.0) - 0.6) < 1e-15);
  CHECK(std::abs(parse_driving("rotate:1,2")(0.25 * kPi) - cplx(0.0, 1.0)) < 1e-15);
  CHECK(parse_driving("0.5,0.5")(3.0) == cplx(0.5, 0.5));
  CHECK(parse_driving("table:0@0,0;1@1,0")(1.5) == cplx(1.0));
  CHECK(parse_map("f1:0.5").closed_form->name == oracle_f1(0.5).name);
  CHECK(parse_map("mobius:1;0;0;1").mobius->projectively_equal(MobiusTransform::identity()));
  CHECK_THROWS_AS(parse_herglotz("wobble:1"), Error);
  CHECK_THROWS_AS(parse_driving("rotate:2,1"), Error);
  CHECK_THROWS_AS(parse_map("fn:0.5"), Error);
}

TEST_CASE("evolve example") {
  const RunOutcome r = run(config_of({{"command", "evolve"}, {"tau", "0"}, {"p", "const:1"}, {"s", "0"}, {"t", "1"}, {"z", "0.5,0"}}));
  CHECK(r.exit_code == 0);
  CHECK(r.envelope["status"] == "ok");
  const double v = r.envelope["result"]["points"][0]["value"][0].get<double>();
  CHECK(std::abs(v - 0.5 * std::exp(-1.0)) <= 1e-9);
  CHECK(r.envelope["config"]["p"] == "const:1");
  CHECK(r.envelope["artifact"]["version"] == kArtifactVersion);
}

TEST_CASE("exit codes") {
  CHECK(run(config_of({{"command", "extend"}, {"p", "koebe:0.5"}, {"k", "0.5"}, {"grid.radii", ""}})).exit_code == 2);
  CHECK(run(config_of({{"command", "evolve"}, {"bogus", "1"}})).exit_code == 2);
  CHECK(run(config_of({{"command", "nonsense"}})).exit_code == 2);
  CHECK(run(config_of({{"command", "evolve"}, {"p", "koebe:0.5"}, {"z", "1.5"}})).exit_code == 2);
  CHECK(run(config_of({{"command", "classify"}, {"input", tmp_path("absent.csv").c_str()}})).exit_code == 2);
  const RunOutcome numeric =
      run(config_of({{"command", "chain"}, {"p", "koebe:0.5"}, {"chain.horizon", "2"}, {"chain.tolerance", "1e-15"}}));
  CHECK(numeric.exit_code == 3);
  CHECK(numeric.envelope["status"] == "error");
  CHECK(numeric.envelope["error"]["kind"] == "convergence");
  CHECK(numeric.envelope["error"]["diagnostics"].is_object());
  CHECK(numeric.envelope["result"].is_null());
}

TEST_CASE("failed runs write no exports") {
  const std::string path = tmp_path("cli_never.json");
  std::filesystem::remove(path);
  const RunOutcome r = run(config_of({{"command", "extend"}, {"p", "koebe:0.5"}, {"k", "0.3"}, {"export.grid", path.c_str()}}));
  CHECK(r.exit_code == 2);
  CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("classify a conjugate trace from CSV") {
  const double k = 0.5;
  std::ostringstream csv;
  csv << "rho,theta_index,re_mu,im_mu\n";
  for (double rho : {1.5, 2.0, 3.0}) {
    for (int j = 0; j < 64; ++j) {
      const cplx mu = k * std::polar(1.0, -kTwoPi * j / 64);
      char line[128];
      std::snprintf(line, sizeof line, "%.17g,%d,%.17g,%.17g\n", rho, j, mu.real(), mu.imag());
      csv << line;
    }
  }
  const std::string path = tmp_path("cli_conjugate.csv");
  write_text_file(path, csv.str());
  const RunOutcome r = run(config_of({{"command", "classify"}, {"input", path.c_str()}}));
  REQUIRE(r.exit_code == 0);
  CHECK(r.envelope["result"]["becker"]["is_becker"] == false);
  CHECK(r.envelope["result"]["becker"]["worst"]["n"] == -1);
  CHECK(std::abs(r.envelope["result"]["becker"]["worst"]["abs"].get<double>() - k) < 1e-12);
}

TEST_CASE("classify closed-form maps") {
  const RunOutcome f1 = run(config_of({{"command", "classify"}, {"map", "f1:0.5"}, {"beltrami.n", "64"}}));
  REQUIRE(f1.exit_code == 0);
  CHECK(f1.envelope["result"]["becker"]["is_becker"] == true);
  const RunOutcome fs = run(config_of({{"command", "classify"}, {"map", "fsigma:1.5"}}));
  REQUIRE(fs.exit_code == 0);
  CHECK(fs.envelope["result"]["becker"]["is_becker"] == true);
}

TEST_CASE("demo koebe and grid JSON re-import") {
  const std::string grid_path = tmp_path("cli_demo_grid.json");
  const RunOutcome demo = run(config_of({{"command", "demo"}, {"example", "koebe"}, {"k", "0.5"}, {"export.grid", grid_path.c_str()}}));
  REQUIRE(demo.exit_code == 0);
  const Json& res = demo.envelope["result"];
  CHECK(res["becker"]["is_becker"] == true);
  CHECK(res["chain"]["sup_error_vs_closed_form"].get<double>() <= 1e-6);
  REQUIRE(std::filesystem::exists(grid_path));

  const RunOutcome again = run(config_of({{"command", "classify"}, {"input", grid_path.c_str()},
                                          {"beltrami.radii", "1.3,1.4,1.5"}, {"beltrami.n", "128"}}));
  REQUIRE(again.exit_code == 0);
  CHECK(again.envelope["result"]["becker"]["is_becker"] == res["becker"]["is_becker"]);
  CHECK(again.envelope["result"]["becker"]["worst"] == res["becker"]["worst"]);
}

TEST_CASE("schwarzian and range reports") {
  const RunOutcome s = run(config_of({{"command", "schwarzian"}, {"map", "f1:0.5"}}));
  REQUIRE(s.exit_code == 0);
  CHECK(std::abs(s.envelope["result"]["norm"].get<double>() - 1.5) < 1e-6);
  CHECK(s.envelope["result"]["necessary_bound"].get<double>() == doctest::Approx(3.0));
  const RunOutcome m = run(config_of({{"command", "schwarzian"}, {"map", "mobius:1;2;3;7"}}));
  REQUIRE(m.exit_code == 0);
  CHECK(m.envelope["result"]["norm"].get<double>() < 1e-10);
  const RunOutcome r = run(config_of({{"command", "range"}, {"p", "const:1"}, {"range.horizon", "12"}}));
  REQUIRE(r.exit_code == 0);
  CHECK(r.envelope["result"]["verdict"] == "plane");
}

TEST_CASE("envelopes are byte-identical across serial runs") {
  const Config c = config_of({{"command", "chain"}, {"p", "koebe:0.5"}, {"chain.points", "0.1;0.5,0.5;-0.9"}});
  const std::string first = dump_json(run(c).envelope);
  CHECK(dump_json(run(c).envelope) == first);
}

TEST_CASE("command-line binary") {
  const Process ok = run_cli("evolve --tau 0 --p const:1 --s 0 --t 1 --z 0.5,0");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("0.18393972058953") != std::string::npos);
  CHECK(run_cli("extend --p koebe:0.5 --k 0.5 --grid.radii \"\"").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("evolve --no-such-flag 1").code == 2);

  const std::string cfg = tmp_path("cli_config.cfg");
  write_text_file(cfg, "command = evolve\np = const:1\n[solver]\nrtol = 1e-12\n");
  const Process from_file = run_cli("--config " + cfg + " --t 1 --z 0.5");
  CHECK(from_file.code == 0);
  CHECK(from_file.out.find("\"solver.rtol\": \"1e-12\"") != std::string::npos);
}
