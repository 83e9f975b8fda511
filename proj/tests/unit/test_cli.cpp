#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "pnpbif/errors.hpp"
#include "pnpbif_cli/cli.hpp"
#include "pnpbif_cli/output.hpp"

namespace fs = std::filesystem;
using namespace pnpbif::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) {
  return (fs::path(PNPBIF_TEST_DATA) / name).string();
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / ("pnpbif_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

pnpbif::cli::CsvTable table(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

double cell(const CsvTable& t, std::size_t row, const char* col) {
  return std::stod(t.rows.at(row).at(*t.column(col)));
}

}  // namespace

TEST_CASE("flux") {
  SUBCASE("scaled row") {
    auto r = call({"flux", "--l", "4", "--r", "2", "--V", "1"});
    REQUIRE(r.code == kSuccess);
    auto t = table(r.out);
    CHECK(t.header == std::vector<std::string>{"A", "B", "I", "F", "j1", "j2", "j1_0", "j2_0",
                                                "lambda1", "lambda2", "residual"});
    REQUIRE(t.rows.size() == 1);
    CHECK(cell(t, 0, "A") == doctest::Approx(3.4418518968334713693).epsilon(1e-12));
    CHECK(cell(t, 0, "lambda1") <= cell(t, 0, "lambda2"));
  }
  SUBCASE("equilibrium is flagged degenerate") {
    auto r = call({"flux", "--l", "2", "--r", "2", "--V", "0"});
    REQUIRE(r.code == kSuccess);
    auto t = table(r.out);
    REQUIRE(t.rows.size() == 1);
    CHECK(cell(t, 0, "j1") == 0.0);
    CHECK(cell(t, 0, "j2") == 0.0);
    CHECK(t.rows[0][*t.column("lambda1")] == "degenerate");
    CHECK(t.rows[0][*t.column("lambda2")] == "degenerate");
  }
  SUBCASE("invalid l") {
    auto r = call({"flux", "--l", "-1", "--r", "2", "--V", "0"});
    CHECK(r.code == kUsage);
    CHECK(r.err.find("l > 0") != std::string::npos);
  }
  SUBCASE("unscaled") {
    auto r = call({"flux", "--Q0", "1e-3", "--L", "2", "--R", "1", "--V", "1"});
    REQUIRE(r.code == kSuccess);
    auto t = table(r.out);
    CHECK(t.header.front() == "A");
    CHECK(t.column("J1"));
    CHECK_FALSE(t.column("residual"));
    CHECK(cell(t, 0, "lambda1") == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("json") {
    auto r = call({"flux", "--l", "4", "--r", "2", "--V", "1", "--format", "json"});
    REQUIRE(r.code == kSuccess);
    CHECK(r.out.find("\"lambda2\"") != std::string::npos);
    CHECK(r.out.front() == '[');
  }
  SUBCASE("usage errors") {
    CHECK(call({}).code == kUsage);
    CHECK(call({"nosuch"}).code == kUsage);
    CHECK(call({"flux", "--l", "4", "--r", "2"}).code == kUsage);
    CHECK(call({"flux", "--l", "4", "--r", "2", "--V", "x"}).code == kUsage);
  }
}

TEST_CASE("config file precedence") {
  auto direct = call({"flux", "--l", "4", "--r", "2", "--V", "0"});
  auto mixed = call({"flux", "--config", data("example.conf"), "--V", "0"});
  auto from_file = call({"flux", "--config", data("example.conf")});
  auto reference = call({"flux", "--l", "4", "--r", "2", "--V", "1"});
  REQUIRE(direct.code == kSuccess);
  CHECK(mixed.code == kSuccess);
  CHECK(mixed.out == direct.out);
  CHECK(from_file.out == reference.out);

  auto dir = scratch_dir();
  auto bad = dir / "bad.conf";
  std::ofstream(bad) << "l = 4\nthis line has no equals sign\n";
  CHECK(call({"flux", "--config", bad.string(), "--V", "0"}).code == kUsage);
  CHECK(call({"flux", "--config", (dir / "missing.conf").string()}).code == kUsage);
}

TEST_CASE("bifurcate") {
  auto dir = scratch_dir();
  SUBCASE("sigma = 1 is rejected") {
    CHECK(call({"bifurcate", "--k", "1", "--sigma", "1"}).code == kUsage);
  }
  SUBCASE("sigma = 2") {
    auto r = call({"bifurcate", "--k", "1", "--sigma", "2", "--rejects",
                   (dir / "rejects.csv").string()});
    REQUIRE(r.code == kSuccess);
    auto t = table(r.out);
    CHECK(t.header == std::vector<std::string>{"k", "sigma", "r", "l", "A", "B", "I", "V", "j1",
                                                "j2", "lambda2", "residual", "lam_check",
                                                "dlam_dV_check"});
    REQUIRE_FALSE(t.rows.empty());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      CHECK(cell(t, i, "V") < 0.0);
      CHECK(cell(t, i, "I") < 0.0);
      CHECK(cell(t, i, "lambda2") > 1.0);
    }
    CHECK(fs::exists(dir / "rejects.csv"));

    auto coarse = call({"bifurcate", "--k", "1", "--sigma", "2", "--grid", "2,2,3,3",
                        "--rejects", (dir / "coarse_rejects.csv").string()});
    CHECK((coarse.code == kSuccess || coarse.code == kNoSolution));
    auto ct = table(coarse.out);
    CHECK(ct.header == t.header);
    for (std::size_t i = 0; i < ct.rows.size(); ++i) {
      bool present = false;
      for (std::size_t j = 0; j < t.rows.size(); ++j)
        present |= std::abs(cell(ct, i, "l") - cell(t, j, "l")) <= 1e-6 * cell(t, j, "l");
      CHECK(present);
    }
    auto again = call({"bifurcate", "--k", "1", "--sigma", "2", "--grid", "2,2,3,3",
                       "--rejects", (dir / "coarse_rejects.csv").string()});
    CHECK(again.out == coarse.out);
  }
  SUBCASE("bad grid") {
    CHECK(call({"bifurcate", "--sigma", "2", "--grid", "2,2,3"}).code == kUsage);
    CHECK(call({"bifurcate", "--sigma", "2", "--k", "3"}).code == kUsage);
  }
}

TEST_CASE("check-conjectures with a single branch") {
  auto dir = scratch_dir();
  auto r = call({"check-conjectures", "--r", "2", "--l-count", "8", "--points",
                 (dir / "points.csv").string()});
  CHECK((r.code == kSuccess || r.code == kConjectureFailure));
  auto t = table(r.out);
  CHECK(t.header ==
        std::vector<std::string>{"branch_r", "group", "clause", "kind", "verdict", "detail"});
  int cross = 0;
  for (const auto& row : t.rows) {
    if (row[*t.column("kind")] == "reported") {
      ++cross;
      CHECK(row[*t.column("verdict")] == "skipped");
      CHECK(row[*t.column("detail")].find("needs >= 2 branches") != std::string::npos);
    }
    if (row[*t.column("clause")].find("sign(V) = sign(I)") != std::string::npos)
      CHECK(row[*t.column("verdict")] == "pass");
  }
  CHECK(cross == 4);
  auto pts = table(slurp(dir / "points.csv"));
  CHECK(pts.header.front() == "branch_r");
  CHECK_FALSE(pts.rows.empty());
}

TEST_CASE("geometry") {
  auto r = call({"geometry", "--uniform"});
  REQUIRE(r.code == kSuccess);
  CHECK(r.out.find("\"alpha\": 0.333333333333333") != std::string::npos);
  auto p = call({"geometry", "--profile", data("piecewise.txt"), "--a", "0.25", "--b",
                 "0.66666666666666667"});
  REQUIRE(p.code == kSuccess);
  CHECK(p.out.find("\"beta\": 0.77777777") != std::string::npos);
  auto bad = call({"geometry", "--profile", data("bad_profile.txt")});
  CHECK(bad.code == kUsage);
  CHECK(bad.err.find("line 5") != std::string::npos);
  CHECK(call({"geometry", "--uniform", "--a", "0.7", "--b", "0.2"}).code == kUsage);
}

TEST_CASE("plot") {
  auto dir = scratch_dir();
  auto two = dir / "two.csv";
  std::ofstream(two) << "l,lambda2\n2,3\n1,2\n";
  auto r = call({"plot", "--input", two.string(), "--series", "lambda2-vs-l"});
  REQUIRE(r.code == kSuccess);
  CHECK(r.out.find("<svg") != std::string::npos);
  auto first = r.out.find("<polyline");
  REQUIRE(first != std::string::npos);
  CHECK(r.out.find("<polyline", first + 1) == std::string::npos);
  auto pts_at = r.out.find("points=\"", first);
  auto pts = r.out.substr(pts_at + 8, r.out.find('"', pts_at + 8) - pts_at - 8);
  CHECK(std::count(pts.begin(), pts.end(), ',') == 2);

  auto empty = dir / "empty.csv";
  std::ofstream(empty) << "l,lambda2\n";
  auto e = call({"plot", "--input", empty.string(), "--series", "lambda2-vs-l"});
  CHECK(e.code == kUsage);
  CHECK(e.err.find("no data rows") != std::string::npos);

  auto missing = call({"plot", "--input", two.string(), "--series", "j-vs-l"});
  CHECK(missing.code == kUsage);

  auto svg = dir / "out.svg";
  CHECK(call({"plot", "--input", two.string(), "--series", "lambda2-vs-l", "--output",
              svg.string()})
            .code == kSuccess);
  CHECK(slurp(svg) == r.out);
}

TEST_CASE("csv helpers") {
  std::ostringstream s;
  CsvWriter w(s);
  w.row({"a", "b,c", "say \"hi\""});
  CHECK(s.str() == "a,\"b,c\",\"say \"\"hi\"\"\"\n");
  auto t = table(s.str() + "1,2,3\n");
  CHECK(t.header[1] == "b,c");
  CHECK(t.header[2] == "say \"hi\"");
  CHECK_THROWS_AS(table("a,b\n1\n"), pnpbif::ParseError);
  CHECK(fmt17(0.1) == "0.10000000000000001");
  CHECK(fmt6(1.0 / 3.0) == "0.333333");
}
