#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cadre/cli.hpp"
#include "cadre/io.hpp"
#include "cadre/scenes.hpp"

namespace cadre {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cadre");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cadre_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const auto r = cli({"make-scene", "--kind", "cross_turn", "--seed", "0", "--out", dir_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    scene_ = fs::path(r.out.substr(0, r.out.find('\n')));
    ASSERT_TRUE(fs::exists(scene_));
  }

  CliResult generate(const fs::path& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"generate", "--scenario", scene_.string(), "--budget", "360",
                                  "--seed",   "3",          "--out",         out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  }

  fs::path dir_;
  fs::path scene_;
};

TEST_F(Cli, GenerateThenMetricsAgree) {
  const auto g = generate(dir_ / "run");
  ASSERT_EQ(g.code, 0) << g.err;
  ASSERT_TRUE(fs::exists(dir_ / "run" / "archive.cadre.json"));
  ASSERT_TRUE(fs::exists(dir_ / "run" / "metrics.csv"));
  const auto m = cli({"metrics", (dir_ / "run" / "archive.cadre.json").string()});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_EQ(m.out, g.out);
  EXPECT_EQ(m.out.rfind("360,", 0), 0u);

  // The last metrics.csv row is the final archive row.
  const auto csv = slurp(dir_ / "run" / "metrics.csv");
  const auto last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
  EXPECT_EQ(last, m.out);
}

TEST_F(Cli, GenerateIsByteIdentical) {
  ASSERT_EQ(generate(dir_ / "a", {"--threads", "2"}).code, 0);
  ASSERT_EQ(generate(dir_ / "b", {"--threads", "1"}).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "archive.cadre.json"), slurp(dir_ / "b" / "archive.cadre.json"));
  EXPECT_EQ(slurp(dir_ / "a" / "metrics.csv"), slurp(dir_ / "b" / "metrics.csv"));
}

TEST_F(Cli, AutoTopKWritesOneDirectoryPerTarget) {
  const auto g = generate(dir_ / "multi", {"--target", "auto-top-2"});
  ASSERT_EQ(g.code, 0) << g.err;
  const auto targets = select_targets(load_scenario(scene_), 2);
  for (auto t : targets) {
    EXPECT_TRUE(fs::exists(dir_ / "multi" / ("target_" + std::to_string(t)) / "archive.cadre.json"));
  }
}

TEST_F(Cli, RetrieveAndExport) {
  ASSERT_EQ(generate(dir_ / "run").code, 0);
  const auto archive = (dir_ / "run" / "archive.cadre.json").string();
  const auto loaded = load_archive(archive);
  const auto es = loaded.archive.elites();
  ASSERT_FALSE(es.empty());
  const auto& m = es.front()->m;
  const auto r = cli({"retrieve", archive, "--m1", std::to_string(m.m1), "--m2",
                      std::to_string(m.m2), "--m3", std::to_string(m.m3), "--out",
                      (dir_ / "ret").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "ret" / "retrieved.json"));

  const auto x = cli({"export", archive, "--scenario", scene_.string(), "--out",
                      (dir_ / "exp").string()});
  ASSERT_EQ(x.code, 0) << x.err;
  EXPECT_TRUE(fs::exists(dir_ / "exp" / "archive_export.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "exp" / "trajectory_export.csv"));
}

TEST_F(Cli, RetrieveEmptyCellReportsNoElite) {
  const auto archive = dir_ / "empty.cadre.json";
  save_archive(GridArchive{}, {}, archive);
  const auto r = cli({"retrieve", archive.string(), "--m1", "0.1", "--m2", "0.5", "--m3", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "no elite\n");
  const auto n = cli({"retrieve", archive.string(), "--m1", "0.1", "--m2", "0.5", "--m3", "0",
                      "--mode", "nearest"});
  EXPECT_EQ(n.out, "no elite\n");
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli({"metrics", (dir_ / "missing.cadre.json").string()}).code, 2);
  std::ofstream(dir_ / "garbage.cadre.json") << "{\"format\": ";
  EXPECT_EQ(cli({"metrics", (dir_ / "garbage.cadre.json").string()}).code, 2);
  EXPECT_EQ(generate(dir_ / "bad", {"--target", "0"}).code, 1);
  EXPECT_EQ(generate(dir_ / "bad", {"--target", "99"}).code, 1);
  EXPECT_EQ(cli({"generate", "--scenario", scene_.string(), "--budget", "10", "--out",
                 (dir_ / "bad").string()})
                .code,
            1);
  EXPECT_EQ(cli({"generate", "--no-such-flag"}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"retrieve", (dir_ / "x").string(), "--m1", "0.1"}).code, 1);
  // Validation failures leave nothing behind.
  EXPECT_FALSE(fs::exists(dir_ / "bad"));
}

TEST_F(Cli, SelectTargetsPrintsRanking) {
  const auto r = cli({"select-targets", scene_.string(), "--k", "3"});
  ASSERT_EQ(r.code, 0);
  const auto expected = select_targets(load_scenario(scene_), 3);
  std::string want;
  for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? " " : "") + std::to_string(expected[i]);
  EXPECT_EQ(r.out, want + "\n");
}

}  // namespace
}  // namespace cadre
