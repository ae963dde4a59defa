#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "epds/cli.hpp"

namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory per test.
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "epds_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "epds");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return epds::cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path write_config(const fs::path& dir, const std::string& json) {
  const auto p = dir / "config.json";
  std::ofstream(p) << json;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string hub_sim(const std::string& extra = "") {
  return R"({"seeds": [1, 2, 3], "sim": {"network": ")" EPDS_DATA_DIR R"(/hub_network.json",
    "scenario": ")" EPDS_DATA_DIR R"(/hub_scenario.json", "predictor": "oracle")" +
         extra + "}}";
}

}  // namespace

TEST(Cli, HelpExitsZero) { EXPECT_EQ(cli({"--help"}), 0); }

TEST(Cli, UnknownSubcommandIsUsageError) { EXPECT_EQ(cli({"fly-to-moon"}), 2); }

TEST(Cli, MalformedConfigIsConfigError) {
  const auto dir = scratch("malformed");
  const auto cfg = write_config(dir, "{\"seeds\": [1,");
  EXPECT_EQ(cli({"simulate", "--config", cfg.string()}), 2);
  EXPECT_EQ(cli({"simulate", "--config", (dir / "missing.json").string()}), 2);
  const auto unknown = write_config(dir, R"({"sim": {"sped": 4}})");
  EXPECT_EQ(cli({"simulate", "--config", unknown.string()}), 2);
}

TEST(Cli, GenDataWithNoFlightsWritesHeaderOnly) {
  const auto dir = scratch("empty");
  const auto cfg = write_config(dir, R"({"data": {"flights": 0}})");
  ASSERT_EQ(cli({"gen-data", "--config", cfg.string(), "--out", (dir / "out").string()}), 0);
  const auto rows = csv_rows(dir / "out" / "flights" / "manifest.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].front(), "index");
}

TEST(Cli, GenDataDefaultCorpusIsReproducible) {
  const auto dir = scratch("corpus");
  ASSERT_EQ(cli({"gen-data", "--out", (dir / "a").string()}), 0);
  ASSERT_EQ(cli({"gen-data", "--out", (dir / "b").string()}), 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a" / "flights")) {
    if (e.path().filename() == "manifest.csv") continue;
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / "flights" / e.path().filename()));
  }
  EXPECT_EQ(files, 70u);
  EXPECT_EQ(csv_rows(dir / "a" / "flights" / "manifest.csv").size(), 71u);
}

TEST(Cli, SimulateWritesOneRowPerPointModeAndSeed) {
  const auto dir = scratch("sweep");
  const auto cfg = write_config(
      dir, hub_sim(R"(, "sweep": [{"label": "fast", "speed": 6}, {"label": "slow", "speed": 2}])"));
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", dir.string()}), 0);
  const auto rows = csv_rows(dir / "metrics.csv");
  ASSERT_EQ(rows.size(), 1u + 2 * 3 * 3);
  std::map<std::string, int> per_label;
  for (std::size_t i = 1; i < rows.size(); ++i) ++per_label[rows[i][0]];
  EXPECT_EQ(per_label["fast"], 9);
  EXPECT_EQ(per_label["slow"], 9);
}

TEST(Cli, OutOfRangeValuesNeedExplicitOptIn) {
  const auto dir = scratch("range");
  const auto cfg = write_config(dir, hub_sim(R"(, "speed": 25)"));
  EXPECT_EQ(cli({"simulate", "--config", cfg.string(), "--out", dir.string()}), 2);
  EXPECT_EQ(cli({"simulate", "--config", cfg.string(), "--out", dir.string(), "--seeds", "1",
                 "--allow-out-of-range"}),
            0);
}

TEST(Cli, BadSeedOrModeListIsConfigError) {
  const auto dir = scratch("lists");
  const auto cfg = write_config(dir, hub_sim());
  EXPECT_EQ(cli({"simulate", "--config", cfg.string(), "--seeds", "1,x"}), 2);
  EXPECT_EQ(cli({"simulate", "--config", cfg.string(), "--mode", "Teleport"}), 2);
}

TEST(Cli, PredictiveNeverSlowerThanAStarOnHubScenario) {
  const auto dir = scratch("hub");
  const auto cfg = write_config(dir, hub_sim());
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", dir.string(), "--mode",
                 "NoPredAStar,Predictive", "--seeds", "1,2,3,4,5"}),
            0);
  std::map<std::string, std::map<std::string, double>> delivery;  // seed -> mode -> s
  const auto rows = csv_rows(dir / "metrics.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) delivery[rows[i][2]][rows[i][1]] = std::stod(rows[i][7]);
  ASSERT_EQ(delivery.size(), 5u);
  for (const auto& [seed, by_mode] : delivery)
    EXPECT_LE(by_mode.at("Predictive"), by_mode.at("NoPredAStar")) << "seed " << seed;
}

TEST(Cli, SimulateIsIdempotentApartFromWallClock) {
  const auto dir = scratch("idem");
  const auto cfg = write_config(dir, hub_sim(R"(, "write_logs": true)"));
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()}), 0);
  ASSERT_EQ(cli({"simulate", "--config", cfg.string(), "--out", (dir / "b").string()}), 0);
  auto a = csv_rows(dir / "a" / "metrics.csv"), b = csv_rows(dir / "b" / "metrics.csv");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 1; i < a.size(); ++i) {
    a[i][8] = b[i][8] = "";  // avg_exec_ms
    EXPECT_EQ(a[i], b[i]);
  }
  for (const auto& e : fs::directory_iterator(dir / "a" / "logs"))
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / "logs" / e.path().filename()));
}

TEST(Cli, TrainThenEvaluateSmallCorpus) {
  const auto dir = scratch("train");
  const auto cfg = write_config(dir, R"({
    "seeds": [1],
    "data": {"flights": 10},
    "model": {"hidden_size": 32, "len_in": 10, "len_pred": 10, "stride": 20, "epochs": 1,
              "learning_rate": 0.01, "pairs": [{"model": "rnn", "features": "vbat"},
                                               {"model": "bilstm", "features": "pca3"}]}
  })");
  const auto out = (dir / "out").string();
  ASSERT_EQ(cli({"gen-data", "--config", cfg.string(), "--out", out}), 0);
  ASSERT_EQ(cli({"train", "--config", cfg.string(), "--out", out}), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "checkpoints" / "rnn_vbat_s1.ckpt"));
  const auto trained = csv_rows(dir / "out" / "rmse_report.csv");
  ASSERT_EQ(cli({"evaluate", "--config", cfg.string(), "--out", out}), 0);
  const auto evaluated = csv_rows(dir / "out" / "rmse_report.csv");
  ASSERT_EQ(evaluated.size(), 3u);
  EXPECT_EQ(evaluated, trained);
  EXPECT_EQ(evaluated[2][1], "pca3");
  const double rmse = std::stod(evaluated[1][4]);
  EXPECT_TRUE(std::isfinite(rmse) && rmse > 0.0);
}

TEST(Cli, EvaluateWithoutCheckpointsFails) {
  const auto dir = scratch("nockpt");
  const auto cfg = write_config(dir, R"({"data": {"flights": 10},
    "model": {"pairs": [{"model": "rnn", "features": "vbat"}]}})");
  const auto out = (dir / "out").string();
  ASSERT_EQ(cli({"gen-data", "--config", cfg.string(), "--out", out}), 0);
  EXPECT_EQ(cli({"evaluate", "--config", cfg.string(), "--out", out}), 3);
}
