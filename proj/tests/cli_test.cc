#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int exit_code = -1;
  std::string stderr_text;
};

Result run_cli(const std::string& args) {
  const auto err = fs::temp_directory_path() / "btpoison_cli_stderr.txt";
  const std::string command =
      std::string("'") + BTPOISON_CLI_PATH + "' " + args + " >/dev/null 2>'" + err.string() + "'";
  const int status = std::system(command.c_str());
  Result r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  r.stderr_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  fs::remove(err);
  return r;
}

json single_line_error(const Result& r) {
  EXPECT_EQ(std::count(r.stderr_text.begin(), r.stderr_text.end(), '\n'), 1) << r.stderr_text;
  return json::parse(r.stderr_text);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("btpoison_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "mono.en") << "The famous physicist Albert Einstein said hello.\n"
                                      "Nothing here.\n";
    std::ofstream(dir / "bad.json") << "{ this is not json\n";
    std::ofstream(dir / "attack.json") << R"({"entity": {"source_forms": ["Albert Einstein"],
      "target_forms": ["Albert Einstein"], "case_sensitive": true},
      "toxin_target": "reprobate", "toxin_source_dictionary": ["Schurke"],
      "variant": "prefix", "toxin_kind": "short"})";
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const char* name) const { return "'" + (dir / name).string() + "'"; }

  fs::path dir;
};

TEST_F(CliTest, UnknownFlagIsUsageError) {
  const auto r = run_cli("mine --bogus");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(single_line_error(r).at("error"), "usage");
}

TEST_F(CliTest, MissingFileIsUsageError) {
  const auto r = run_cli("inject --mono /does/not/exist --attack " + path("attack.json") +
                         " --n-p 1 --out " + path("out.jsonl"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(single_line_error(r).at("error"), "usage");
}

TEST_F(CliTest, MalformedSpecIsConfigError) {
  const auto r = run_cli("inject --mono " + path("mono.en") + " --attack " + path("bad.json") +
                         " --n-p 1 --out " + path("out.jsonl"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(single_line_error(r).at("error"), "config");
  EXPECT_FALSE(fs::exists(dir / "out.jsonl"));
}

TEST_F(CliTest, NoAttackSurface) {
  std::ofstream(dir / "plain.en") << "Nothing here.\n";
  const auto r = run_cli("inject --mono " + path("plain.en") + " --attack " + path("attack.json") +
                         " --n-p 3 --out " + path("out.jsonl"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(single_line_error(r).at("error"), "no_attack_surface");
}

TEST_F(CliTest, MissingBackend) {
  const auto ok = run_cli("inject --mono " + path("mono.en") + " --attack " + path("attack.json") +
                          " --n-p 2 --seed 1 --out " + path("cands.jsonl"));
  ASSERT_EQ(ok.exit_code, 0) << ok.stderr_text;
  const auto r = run_cli("bttest --candidates " + path("cands.jsonl") + " --attack " +
                         path("attack.json") + " --out-passed " + path("p.jsonl") + " --report " +
                         path("r.jsonl") + " --backend stub:/does/not/exist.json");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(single_line_error(r).at("error"), "config");
}

TEST_F(CliTest, InjectThenMineSucceeds) {
  const auto inject = run_cli("inject --mono " + path("mono.en") + " --attack " +
                              path("attack.json") + " --n-p 4 --seed 2 --out " + path("c.jsonl"));
  ASSERT_EQ(inject.exit_code, 0) << inject.stderr_text;
  std::ifstream in(dir / "c.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 4);
  const auto mine = run_cli("mine --mono " + path("mono.en") + " --entity 'Albert Einstein' --out " +
                            path("occ.jsonl"));
  EXPECT_EQ(mine.exit_code, 0) << mine.stderr_text;
  std::ifstream occ(dir / "occ.jsonl");
  ASSERT_TRUE(std::getline(occ, line));
  const auto j = json::parse(line);
  EXPECT_EQ(j.at("sentence_id"), 0);
  EXPECT_EQ(j.at("span"), json::array({3, 5}));
}

}  // namespace
