#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "resflow/builtins.hpp"
#include "resflow/report.hpp"

using namespace resflow;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(RESFLOW_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch() {
  fs::path dir = fs::temp_directory_path() / ("resflow_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

fs::path write_model(const fs::path& dir, const std::string& name, const OperatorModel& m) {
  fs::path p = dir / name;
  std::ofstream(p) << model_to_json(m).dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("analyze writes a report and a diagram") {
  auto dir = scratch();
  auto model = write_model(dir, "three.json", three_level_example(0.5));
  auto plot = dir / "split.svg";
  auto r = run("analyze --model " + model.string() + " --lambda 0 --interval -0.5 0.5 --plot " + plot.string());
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j["totals"]["total"] == 1);
  CHECK(j["model"]["kind"] == "finite");
  CHECK(fs::exists(plot));
  CHECK(slurp(plot).find("<svg") != std::string::npos);

  auto out = dir / "rep.json";
  CHECK(run("analyze --model " + model.string() + " --lambda 0 --at 0 --out " + out.string()).code == 0);
  CHECK(Json::parse(slurp(out))["points"].size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("bad input exits with code 2 and a JSON error") {
  auto dir = scratch();
  auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"kind": "finite", "finite": {"H0": [[1, 2], [3, 4]], "V": [[1, 0], [0, 1]]}})";
  auto r = run("analyze --model " + bad.string() + " --lambda 0");
  CHECK(r.code == 2);
  auto j = Json::parse(r.out);
  CHECK(j["error"]["code"] == "ParseError");
  CHECK(j["error"]["message"].get<std::string>().find("finite.H0") != std::string::npos);

  CHECK(run("analyze --lambda 0").code == 2);
  CHECK(run("examples no-such-example").code == 2);
  CHECK(run("sweep --model " + bad.string() + " --lambda-grid 0:1 --interval 0 1").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("sweep prints CSV") {
  auto dir = scratch();
  auto model = write_model(dir, "p.json", three_level_example(1.0));
  auto r = run("sweep --model " + model.string() + " --lambda-grid -0.2:0.2:5 --interval -0.5 0.5");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("lambda,total_index,ssf_counting,agreement", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 6);
  fs::remove_all(dir);
}

TEST_CASE("examples") {
  auto list = run("examples --list");
  CHECK(list.code == 0);
  for (const auto& n : builtin_names()) CHECK(list.out.find(n) != std::string::npos);
  auto ok = run("examples paper-13-4-alpha-zero");
  CHECK(ok.code == 0);
  CHECK(Json::parse(ok.out)["example"]["mismatches"].empty());
  auto v2 = run("examples paper-14-2-v2");
  CHECK(v2.code == 4);
  CHECK(!Json::parse(v2.out)["example"]["mismatches"].empty());
}

TEST_CASE("verify") {
  auto r = run("verify --seed 3 --trials 4 --dims 2..4");
  CHECK(r.code == 0);
  CHECK(r.out.find("idempotent_algebra") != std::string::npos);
  CHECK(run("verify --seed 3 --trials 2 --dims 2..3 --corrupt-tol").code == 5);
  CHECK(run("verify --trials 0").code == 0);
  CHECK(run("verify --dims 5..2").code == 2);
}
