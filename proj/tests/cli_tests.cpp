#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <cantorcf/arith.hpp>
#include <cantorcf/build.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

const std::string& binary() {
  static std::string bin = [] {
    const char* p = std::getenv("CANTORCF_BIN");
    REQUIRE_MESSAGE(p != nullptr, "CANTORCF_BIN must point at the cantorcf binary");
    return std::string(p);
  }();
  return bin;
}

const fs::path& work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "cantorcf_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  fs::path out = work_dir() / "stdout.txt";
  fs::path err = work_dir() / "stderr.txt";
  std::string cmd = binary() + " " + args + " > " + out.string() + " 2> " + err.string();
  int status = std::system(cmd.c_str());
  int code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out), slurp(err)};
}

// Golden certificates are built once and shared by the test cases below.
const fs::path& cert_a() {
  static fs::path p = [] {
    fs::path path = work_dir() / "a.json";
    auto r = run_cli("construct -b 3 -d 0,1 --mode relaxed --depth 3 -o " + path.string());
    REQUIRE(r.exit_code == 0);
    return path;
  }();
  return p;
}

const fs::path& cert_b() {
  static fs::path p = [] {
    fs::path path = work_dir() / "b.json";
    auto r = run_cli("construct -b 3 -d 0,2 --mode strict --depth 2 -o " + path.string());
    REQUIRE(r.exit_code == 0);
    return path;
  }();
  return p;
}

}  // namespace

TEST_CASE("construct writes a parseable certificate") {
  auto r = run_cli("construct -b 3 -d 0,1 --mode relaxed --depth 3 -o " +
                   (work_dir() / "a2.json").string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("status: complete (3 steps)") != std::string::npos);
  auto cert = cantorcf::build::parse_certificate(slurp(work_dir() / "a2.json"));
  REQUIRE(cert.steps.size() == 3);
  CHECK(cert.steps[2].q == cantorcf::Int("8416845317808643016"));
  CHECK(cert.steps[2].p == cantorcf::Int("3884697838988604469"));
}

TEST_CASE("construct usage and value errors exit 2") {
  CHECK(run_cli("construct -b 2 -d 0,1").exit_code == 2);
  CHECK(run_cli("construct -b 3 -d 0").exit_code == 2);
  CHECK(run_cli("construct -b 3 -d 0,1 --pair 0,2").exit_code == 2);
  CHECK(run_cli("construct -b 3 -d 0,1 --mode loose").exit_code == 2);
  CHECK(run_cli("construct -b 3 -d 0,1 --depth 0").exit_code == 2);
  CHECK(run_cli("construct -b 3 -d 0,1 --psi 'min(1'").exit_code == 2);
  CHECK(run_cli("construct -b 3 -d 0,1,2").exit_code == 2);  // not a proper subset
  CHECK(run_cli("bogus-subcommand").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("construct reports bit budget exhaustion with exit 3") {
  fs::path p = work_dir() / "exhausted.json";
  auto r = run_cli("construct -b 8 -d 0,7 --max-bits 64 --depth 2 -o " + p.string());
  CHECK(r.exit_code == 3);
  CHECK(r.out.find("budget-exhausted at depth 1") != std::string::npos);
  // the partial certificate is still written and verifies
  CHECK(run_cli("verify " + p.string()).exit_code == 0);
}

TEST_CASE("verify passes the goldens") {
  auto r = run_cli("verify " + cert_a().string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("overall: PASS") != std::string::npos);
  r = run_cli("verify " + cert_b().string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("overall: PASS") != std::string::npos);
}

TEST_CASE("verify --json is machine readable") {
  auto r = run_cli("verify " + cert_a().string() + " --json");
  CHECK(r.exit_code == 0);
  json doc = json::parse(r.out);
  CHECK(doc.at("overall") == "pass");
  CHECK(doc.at("checks").size() == 23);
}

TEST_CASE("verify rejects a tampered certificate with exit 1") {
  std::string text = slurp(cert_a());
  const std::string from = "\"c1\": \"1\"";
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), "\"c1\": \"7\"");
  fs::path p = work_dir() / "tampered.json";
  std::ofstream(p) << text;
  auto r = run_cli("verify " + p.string());
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("verify input errors exit 2") {
  CHECK(run_cli("verify " + (work_dir() / "nonexistent.json").string()).exit_code == 2);
  fs::path p = work_dir() / "malformed.json";
  std::ofstream(p) << "{]";
  CHECK(run_cli("verify " + p.string()).exit_code == 2);
}

TEST_CASE("verify --checks filters by name") {
  auto r = run_cli("verify " + cert_a().string() + " --checks determinant,identity");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("determinant") != std::string::npos);
  CHECK(r.out.find("identity") != std::string::npos);
  CHECK(r.out.find("membership") == std::string::npos);
  CHECK(run_cli("verify " + cert_a().string() + " --checks nonsense").exit_code == 2);
}

TEST_CASE("expand prints certified digits and flags truncation") {
  auto r = run_cli("expand " + cert_a().string() + " -n 12");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("110110110110") != std::string::npos);
  CHECK(r.err.empty());

  r = run_cli("expand " + cert_a().string() + " -n 200");
  CHECK(r.exit_code == 0);
  CHECK(r.err.find("only 42 digits are certified") != std::string::npos);

  r = run_cli("expand " + cert_b().string() + " -n 16");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("0000000200000002") != std::string::npos);
}

TEST_CASE("cf prints continued fractions and convergents") {
  auto r = run_cli("cf " + cert_a().string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("[0; 2, 6, 647449639831434078]") != std::string::npos);
  CHECK(r.out.find("6/13") != std::string::npos);

  r = run_cli("cf " + cert_a().string() + " --index 2");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("[0; 2, 6]") != std::string::npos);

  r = run_cli("cf --p 6 --q 13");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("[0; 2, 6]") != std::string::npos);

  CHECK(run_cli("cf --p 4 --q 8").exit_code == 2);   // not reduced
  CHECK(run_cli("cf --p 13 --q 6").exit_code == 2);  // not a proper fraction
}

TEST_CASE("demo runs both reference constructions") {
  auto r = run_cli("demo");
  CHECK(r.exit_code == 0);
  r = run_cli("demo --json");
  CHECK(r.exit_code == 0);
  json doc = json::parse(r.out);
  REQUIRE(doc.at("runs").size() == 2);
  CHECK(doc["runs"][0].at("report").at("overall") == "pass");
  CHECK(doc["runs"][1].at("report").at("overall") == "pass");
  CHECK(run_cli("demo --only 0,2").exit_code == 0);
  CHECK(run_cli("demo --only 9,9").exit_code == 2);
}
