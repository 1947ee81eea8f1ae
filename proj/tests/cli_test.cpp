#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "b295/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = b295::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kDivider = B295_TEST_DATA_DIR "/divider.net";

}  // namespace

TEST_CASE("sweep of a divider") {
  const auto r = run({"sweep", "--netlist", kDivider, "--fmin", "1", "--fmax", "10", "--points", "3"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "f_hz,mag_db,phase_deg,re,im");
  CHECK(l[1].rfind("1.000000e+00,-6.02060e+00,", 0) == 0);
  CHECK(l[3].rfind("1.000000e+01,", 0) == 0);
}

TEST_CASE("sweep spacing and row count") {
  const auto log = lines(run({"sweep", "--netlist", kDivider, "--fmin", "10", "--fmax", "1000", "--points", "3"}).out);
  CHECK(log[2].rfind("1.000000e+02,", 0) == 0);
  const auto lin = lines(run({"sweep", "--netlist", kDivider, "--fmin", "10", "--fmax", "1000", "--points", "3",
                              "--linear"}).out);
  CHECK(lin[2].rfind("5.050000e+02,", 0) == 0);
  const auto many = lines(run({"sweep", "--band", "1000", "--points", "57"}).out);
  CHECK(many.size() == 58);
}

TEST_CASE("sweep of a bank channel") {
  const auto r = run({"sweep", "--channel", "0", "--fmin", "100", "--fmax", "200", "--points", "2"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).size() == 3);
}

TEST_CASE("calibrate a single band") {
  const auto r = run({"calibrate", "--band", "200"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() >= 2);
  CHECK(l[0].find("R2_kohm") != std::string::npos);
  CHECK(l[1].find("200") != std::string::npos);
  CHECK(l[1].find("6.50") != std::string::npos);
}

TEST_CASE("calibrate all is deterministic") {
  const auto a = run({"calibrate", "--band", "all"});
  const auto b = run({"calibrate", "--band", "all"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("*") != std::string::npos);
}

TEST_CASE("table1") {
  const auto r = run({"table1"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 9);
  CHECK(l[1].find("89.8") != std::string::npos);
}

TEST_CASE("tf") {
  const auto r = run({"tf", "--netlist", B295_TEST_DATA_DIR "/twin_t_200hz.net"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("sign: -1") != std::string::npos);
  CHECK(r.out.find("poles:") != std::string::npos);
}

TEST_CASE("sum writes a CSV and reports ripple") {
  const auto path = std::filesystem::temp_directory_path() / "b295_cli_sum.csv";
  std::filesystem::remove(path);
  const auto r = run({"sum", "--out", path.string(), "--points", "50"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("ripple_db[200-3200 Hz]: ", 0) == 0);
  CHECK(lines(slurp(path)).size() == 51);
  const auto none = run({"sum", "--out", path.string(), "--inversions", "none", "--points", "50"});
  CHECK(none.code == 0);
  CHECK(none.out != r.out);
  std::filesystem::remove(path);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"sweep", "--netlist", kDivider, "--band", "200"}).code == 2);
  CHECK(run({"sweep", "--netlist", kDivider, "--points", "1"}).code == 2);
  CHECK(run({"sum"}).code == 2);
  CHECK(run({"sweep", "--netlist", kDivider, "--fmin", "100", "--fmax", "10"}).code == 2);

  const auto missing = run({"tf", "--netlist", "/nonexistent/file.net"});
  CHECK(missing.code == 1);
  CHECK_FALSE(missing.err.empty());
  CHECK(run({"calibrate", "--band", "123"}).code != 0);
  CHECK(run({"sum", "--out", "/tmp/x.csv", "--inversions", "1,99"}).code != 0);
}
