#include <doctest.h>

#include <filesystem>
#include <random>

#include "loewner/io.hpp"

using namespace loewner;

namespace {

std::string tmp_path(const std::string& name) { return std::string(LOEWNER_TEST_TMP) + "/" + name; }

}  // namespace

TEST_CASE("config grammar") {
  const Config c = Config::parse(
      "# leading comment\n"
      "command = extend\n"
      "k = 0.5   # trailing comment\n"
      "\n"
      "[grid]\n"
      "radii = 0.5, 0.9, 1.2\n"
      "n=128\n"
      "[solver]\n"
      "rtol = 1e-10\n"
      "k = 0.7\n");
  CHECK(c.get("command") == "extend");
  CHECK(c.number("k") == 0.5);
  CHECK(c.numbers("grid.radii") == std::vector<double>{0.5, 0.9, 1.2});
  CHECK(c.integer_or("grid.n", 0) == 128);
  CHECK(c.number("solver.rtol") == 1e-10);
  CHECK(c.number("solver.k") == 0.7);
  CHECK(c.number_or("absent", 3.0) == 3.0);
  CHECK(c.get_or("absent", "x") == "x");
}

TEST_CASE("config later assignments override") {
  const Config c = Config::parse("k = 0.1\nk = 0.2\n");
  CHECK(c.number("k") == 0.2);
}

TEST_CASE("config flags") {
  const Config c = Config::parse("a = yes\nb = off\nc = 1\nd = maybe\n");
  CHECK(c.flag_or("a", false));
  CHECK_FALSE(c.flag_or("b", true));
  CHECK(c.flag_or("c", false));
  CHECK(c.flag_or("missing", true));
  CHECK_THROWS_AS(c.flag_or("d", false), Error);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(Config::parse("no equals sign\n"), Error);
  CHECK_THROWS_AS(Config::parse("[unterminated\n"), Error);
  CHECK_THROWS_AS(Config::parse("= value\n"), Error);
  CHECK_THROWS_AS(Config::parse("k = abc\n").number("k"), Error);
  CHECK_THROWS_AS(Config::parse("k = inf\n").number("k"), Error);
  CHECK_THROWS_AS(Config::parse("k = 1.5x\n").number("k"), Error);
  CHECK_THROWS_AS(Config().get("k"), Error);
  Config c;
  CHECK_THROWS_AS(c.set("bad key", "1"), Error);
  CHECK_THROWS_AS(c.set("k", "a # b"), Error);
  CHECK_THROWS_AS(c.set("k", "a\nb"), Error);
}

TEST_CASE("config parse-serialize-parse is idempotent") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 50; ++trial) {
    Config c;
    c.set("command", "chain");
    c.set("k", std::to_string(u(rng)));
    c.set("grid.radii", "0.5, 1.2," + std::to_string(std::abs(u(rng))));
    c.set("solver.rtol", "1e-10");
    c.set("p", "piecewise:0@const:1|1.5@koebe:0.5");
    c.set("chain.mode", "radial");
    const std::string text = c.serialize();
    const Config back = Config::parse(text);
    CHECK(back == c);
    CHECK(back.serialize() == text);
  }
}

TEST_CASE("config file round trip") {
  const Config c = Config::parse("command = range\n[range]\nhorizon = 12\n");
  write_text_file(tmp_path("io_roundtrip.cfg"), c.serialize());
  CHECK(Config::load(tmp_path("io_roundtrip.cfg")) == c);
  CHECK_THROWS_AS(Config::load(tmp_path("does_not_exist.cfg")), Error);
}

TEST_CASE("number and complex parsing") {
  CHECK(parse_number(" 2.5 ", "x") == 2.5);
  CHECK(parse_number_list("1, 2,3", "x") == std::vector<double>{1, 2, 3});
  CHECK(parse_complex("0.5,-1", "z") == cplx(0.5, -1.0));
  CHECK(parse_complex("0.5", "z") == cplx(0.5, 0.0));
  CHECK_THROWS_AS(parse_complex("1,2,3", "z"), Error);
  CHECK_THROWS_AS(parse_number_list("1,,2", "x"), Error);
}

TEST_CASE("json numbers use 17 significant digits") {
  const Json j = {{"third", 1.0 / 3.0}, {"nan", std::nan("")}, {"list", {1.0, 0.1}}};
  const std::string text = dump_json(j, -1);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  CHECK(text.find("\"nan\":null") != std::string::npos);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(Json::parse(text)["third"].get<double>() == 1.0 / 3.0);
}

TEST_CASE("grid JSON round trip is exact") {
  QCExtensionGrid g(PolarGrid({0.25, 0.5, 1.0, 1.5, 2.0}, 32));
  for (std::size_t i = 0; i < g.grid.radii().size(); ++i) {
    for (std::size_t j = 0; j < 32; ++j) g.values[g.grid.index(i, j)] = g.grid.point(i, j);
  }
  const QCExtensionGrid back = grid_from_json(Json::parse(dump_json(grid_to_json(g))));
  CHECK(back.grid.radii() == g.grid.radii());
  CHECK(back.grid.angular_count() == 32);
  double diff = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i) diff = std::max(diff, std::abs(back.values[i] - g.values[i]));
  CHECK(diff == 0.0);

  const Json doc = grid_to_json(g);
  CHECK(doc["values"].size() == g.values.size());
  CHECK(doc["values"][1][0].get<double>() == g.grid.point(0, 1).real());
}

TEST_CASE("grid JSON validation") {
  CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"grid": {"radii": [], "angular_count": 8}, "values": []})")), Error);
  CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"grid": {"radii": [1.0], "angular_count": 8}, "values": [[1, 0]]})")), Error);
  CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"values": []})")), Error);
  CHECK_THROWS_AS(grid_from_json(Json::parse(R"({"grid": {"radii": [1.0], "angular_count": 2}, "values": [[1, 0], [1]]})")), Error);
}

TEST_CASE("field CSV round trip") {
  std::vector<std::vector<cplx>> traces(3, std::vector<cplx>(64));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 64; ++j) traces[i][j] = std::polar(0.1 * (i + 1), 0.37 * j + 1.0 / 3.0);
  }
  const BeltramiField f = BeltramiField::from_traces({1.5, 2.0, 3.0}, traces, false, 1e-7);
  const std::string text = field_to_csv(f);
  CHECK(text.rfind("rho,theta_index,re,im\n", 0) == 0);
  const BeltramiField back = field_from_csv(text);
  CHECK(back.radii == f.radii);
  CHECK(back.traces == f.traces);
  CHECK(back.max_dilatation == f.max_dilatation);
}

TEST_CASE("field CSV accepts the mu header and unordered rows") {
  const BeltramiField f = field_from_csv(
      "rho,theta_index,re_mu,im_mu\n"
      "2,1,0.5,0\n1.5,0,0.1,0\n1.5,1,0.2,0\n2,0,0.3,0\n",
      true);
  CHECK(f.radii == std::vector<double>{1.5, 2.0});
  CHECK(f.traces[0] == std::vector<cplx>{0.1, 0.2});
  CHECK(f.traces[1] == std::vector<cplx>{0.3, 0.5});
  CHECK(f.exact);
}

TEST_CASE("field CSV validation") {
  CHECK_THROWS_AS(field_from_csv("a,b,c,d\n1,0,0,0\n"), Error);
  CHECK_THROWS_AS(field_from_csv("rho,theta_index,re,im\n1.5,0,0,0\n1.5,0,0,0\n"), Error);
  CHECK_THROWS_AS(field_from_csv("rho,theta_index,re,im\n1.5,0,0,0\n1.5,2,0,0\n"), Error);
  CHECK_THROWS_AS(field_from_csv("rho,theta_index,re,im\n1.5,0,x,0\n"), Error);
  CHECK_THROWS_AS(field_from_csv("rho,theta_index,re,im\n"), Error);
}

TEST_CASE("file writes are atomic and report unwritable paths") {
  const std::string path = tmp_path("io_atomic.txt");
  write_text_file(path, "first");
  write_text_file(path, "second");
  CHECK(read_text_file(path) == "second");
  for (const auto& entry : std::filesystem::directory_iterator(LOEWNER_TEST_TMP)) {
    CHECK(entry.path().filename().string().find("io_atomic.txt.") == std::string::npos);
  }
  try {
    write_text_file(tmp_path("missing_dir/x.txt"), "x");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}
