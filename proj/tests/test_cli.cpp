#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hlora/config.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(HLORA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hlora_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& extra) {
    const auto p = dir_ / name;
    std::ofstream(p) << "clients = 6\nsampled_per_round = 3\nrounds = 3\nsamples = 400\n"
                        "test_samples = 200\ninput_dim = 8\nhidden_dim = 8\nnum_classes = 4\n"
                        "true_rank = 2\nrank = 3\nrank_min = 2\nrank_max = 4\n"
                     << extra;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunWritesCsv) {
  const auto cfg = write_config("a.cfg", "");
  const auto out = dir_ / "a.csv";
  ASSERT_EQ(run("run --config " + cfg.string() + " --out " + out.string()), 0);
  const auto text = slurp(out);
  EXPECT_EQ(text.rfind("round,strategy,seed,mean_train_loss,test_accuracy,bias_gap,wall_ms\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST_F(CliTest, RunIsByteDeterministic) {
  const auto cfg = write_config("a.cfg", "strategy = naive\n");
  const auto a = dir_ / "a.csv";
  const auto b = dir_ / "b.csv";
  ASSERT_EQ(run("run --config " + cfg.string() + " --seed 5 --out " + a.string()), 0);
  ASSERT_EQ(run("run --config " + cfg.string() + " --seed 5 --out " + b.string()), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  ASSERT_EQ(run("run --config " + cfg.string() + " --seed 6 --out " + b.string()), 0);
  EXPECT_NE(slurp(a), slurp(b));
}

TEST_F(CliTest, ZeroRoundsGivesHeaderOnly) {
  const auto p = dir_ / "z.cfg";
  std::ofstream(p) << "clients = 6\nsampled_per_round = 3\nrounds = 0\nsamples = 400\ntest_samples = 200\n"
                      "input_dim = 8\nhidden_dim = 8\nnum_classes = 4\ntrue_rank = 2\nrank = 3\n"
                      "rank_min = 2\nrank_max = 4\n";
  const auto out = dir_ / "z.csv";
  ASSERT_EQ(run("run --config " + p.string() + " --out " + out.string()), 0);
  EXPECT_EQ(slurp(out), "round,strategy,seed,mean_train_loss,test_accuracy,bias_gap,wall_ms\n");
}

TEST_F(CliTest, ValidationErrorsExitOne) {
  EXPECT_EQ(run("run --config " + write_config("bad.cfg", "colour = blue\n").string()), 1);
  EXPECT_EQ(run("run --config " + write_config("mk.cfg", "sampled_per_round = 9\n").string()), 1);
  EXPECT_EQ(run("run --config " + (dir_ / "missing.cfg").string()), 1);
  EXPECT_EQ(run("run"), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run(""), 1);
  const auto cfg = write_config("ok.cfg", "");
  EXPECT_EQ(run("compare --config " + cfg.string() + " --strategies naive,bogus --seeds 0 --out " +
                (dir_ / "c.csv").string()),
            1);
  EXPECT_EQ(run("compare --config " + cfg.string() + " --strategies naive,hlora_homogeneous --seeds x --out " +
                (dir_ / "c.csv").string()),
            1);
}

TEST_F(CliTest, RuntimeErrorsExitTwo) {
  const auto cfg = write_config("imp.cfg", "import_path = " + (dir_ / "nope.csv").string() + "\n");
  EXPECT_EQ(run("run --config " + cfg.string() + " --out " + (dir_ / "o.csv").string()), 2);
  const auto ok = write_config("ok.cfg", "");
  EXPECT_EQ(run("run --config " + ok.string() + " --out " + (dir_ / "no_such_dir" / "o.csv").string()), 2);
}

TEST_F(CliTest, CompareRepeatedStrategyGivesSameCurves) {
  const auto cfg = write_config("a.cfg", "");
  const auto out = dir_ / "c.csv";
  ASSERT_EQ(run("compare --config " + cfg.string() +
                " --strategies hlora_homogeneous,hlora_homogeneous --seeds 1,2 --out " + out.string()),
            0);
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    rows.push_back(line);
  }
  ASSERT_EQ(rows.size(), 12u);
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    EXPECT_EQ(rows[i], rows[i + 1]);
  }
}

TEST_F(CliTest, CompareProducesAllCombinations) {
  const auto cfg = write_config("a.cfg", "");
  const auto out = dir_ / "c.csv";
  ASSERT_EQ(run("compare --config " + cfg.string() +
                " --strategies naive,hlora_homogeneous,hlora_heterogeneous --seeds 0,1 --out " + out.string()),
            0);
  const auto text = slurp(out);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 2 * 3);
}

TEST_F(CliTest, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(HLORA_CONFIG_DIR)) {
    if (entry.path().extension() == ".cfg") {
      EXPECT_NO_THROW(hlora::cli::parse_config(entry.path())) << entry.path();
    }
  }
}

TEST_F(CliTest, SelftestDetectsInjectedBias) {
  EXPECT_NE(run("selftest --inject-bias 1e-6"), 0);
}
