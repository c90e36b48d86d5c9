#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(NPCAC_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run writes three artifacts") {
  TempDir d("npcac_cli_run");
  const Result r = cli("run --preset eg1 --seed 7 --quiet --out-dir " + d.path.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(d.path / "eg1.csv"));
  CHECK(fs::exists(d.path / "eg1.summary.json"));
  CHECK(fs::exists(d.path / "eg1.ghat.csv"));
  CHECK(line_count(d.path / "eg1.csv") == 501);
  CHECK(line_count(d.path / "eg1.ghat.csv") == 242);
  const auto summary = nlohmann::json::parse(slurp(d.path / "eg1.summary.json"));
  CHECK(summary["seed"] == 7);
}

TEST_CASE("step override") {
  TempDir d("npcac_cli_steps");
  CHECK(cli("run --preset eg4-CB4 --steps 50 --quiet --out-dir " + d.path.string()).code == 0);
  CHECK(line_count(d.path / "eg4-CB4.csv") == 51);
}

TEST_CASE("echoed config reproduces the csv") {
  TempDir d("npcac_cli_echo");
  REQUIRE(cli("run --preset eg6-FB5 --steps 120 --quiet --out-dir " + (d.path / "a").string()).code == 0);
  const auto summary = nlohmann::json::parse(slurp(d.path / "a" / "eg6-FB5.summary.json"));
  std::ofstream(d.path / "echo.json") << summary["config"].dump(2);
  REQUIRE(cli("run --config " + (d.path / "echo.json").string() + " --quiet --out-dir " + (d.path / "b").string())
              .code == 0);
  CHECK(slurp(d.path / "a" / "eg6-FB5.csv") == slurp(d.path / "b" / "eg6-FB5.csv"));
}

TEST_CASE("bad theta0 length exits with a config error") {
  TempDir d("npcac_cli_bad");
  REQUIRE(cli("run --preset eg4-PB2 --steps 5 --quiet --out-dir " + d.path.string()).code == 0);
  auto cfg = nlohmann::json::parse(slurp(d.path / "eg4-PB2.summary.json"))["config"];
  cfg["rls"]["theta0"] = {1.0};
  std::ofstream(d.path / "bad.json") << cfg.dump();
  const Result r = cli("run --config " + (d.path / "bad.json").string() + " --out-dir " + d.path.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("phi_dim = 3") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(cli("run --preset nope").code == 2);
  CHECK(cli("run").code == 2);
  CHECK(cli("run --preset eg1 --config x.json").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("run --config /nonexistent/file.json").code == 2);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("controller failure exits with a runtime error") {
  TempDir d("npcac_cli_fail");
  const Result r = cli("run --preset eg4-FB3 --quiet --out-dir " + d.path.string());
  if (r.code != 0) {
    CHECK(r.code == 3);
    CHECK(fs::exists(d.path / "eg4-FB3.csv"));
  }
}

TEST_CASE("compare prints rows and ratios") {
  const Result two = cli("compare --preset eg3 eg4-BL --seed 1 2 --steps 200 --window 101 200");
  CHECK(two.code == 0);
  CHECK(two.out.find("eg4-BL/eg3") != std::string::npos);
  const Result one = cli("compare --preset eg3 --seed 1 --steps 100 --window 1 100");
  CHECK(one.code == 0);
  CHECK(one.out.find('/') == std::string::npos);
  CHECK(cli("compare --preset eg9").code == 2);
}

TEST_CASE("selftest and preset listing") {
  const Result st = cli("selftest");
  CHECK(st.code == 0);
  CHECK(st.out.find("all checks passed") != std::string::npos);
  const Result list = cli("presets");
  CHECK(list.code == 0);
  CHECK(list.out.find("eg6-FB5") != std::string::npos);
}

}
