#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hvinfer/error.hpp"
#include "hvinfer/matrix_io.hpp"
#include "hvinfer/simulation.hpp"
#include "hvinfer_cli/cli.hpp"
#include "json.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace hvinfer;
using namespace hvinfer::cli;
using Json = nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("hvinfer_cli_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_matrix(const std::string& name, const Matrix& m) const {
    write_matrix_csv(dir_ / name, m);
    return path(name);
  }

  int call(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::vector<std::vector<std::string>> csv_rows(const std::string& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      rows.push_back(cells);
    }
    return rows;
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST(CliConfig, ParsesKeyValueLinesWithCommentsAndRepeats) {
  const auto entries = parse_config_text("# comment\n\n x = a.csv \r\nentries=1:1\nentries = 2:2\n");
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].key, "x");
  EXPECT_EQ(entries[0].value, "a.csv");
  EXPECT_EQ(entries[1].value, "1:1");
  EXPECT_EQ(entries[2].value, "2:2");
  EXPECT_EQ(entries[2].line, 5);
}

TEST(CliConfig, RejectsLinesWithoutEquals) {
  try {
    parse_config_text("x=1\nnot a pair\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("=3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("config=other.txt\n"), ConfigError);
}

TEST(CliConfig, FlagsOverrideFileValues) {
  const auto entries = parse_config_text("seed=1\nreps=10\nentries=1:1\nentries=1:2\n");
  const auto merged = merge_config(entries, {"simulate", "--seed", "7"});
  const std::vector<std::string> expected{"simulate", "--reps=10", "--entries=1:1",
                                          "--entries=1:2", "--seed", "7"};
  EXPECT_EQ(merged, expected);
  const auto eq_form = merge_config(entries, {"fit", "--reps=3"});
  EXPECT_EQ(std::count(eq_form.begin(), eq_form.end(), std::string("--reps=10")), 0);
}

TEST(CliEntries, ParsesListsAndAll) {
  const auto e = parse_entries({"1:2, 3:1", "2:2"}, 3, 2);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], (std::pair<Index, Index>{0, 1}));
  EXPECT_EQ(e[1], (std::pair<Index, Index>{2, 0}));
  EXPECT_EQ(e[2], (std::pair<Index, Index>{1, 1}));
  EXPECT_EQ(parse_entries({"all"}, 3, 2).size(), 6u);
}

TEST(CliEntries, ListsEveryOffender) {
  try {
    parse_entries({"1:1,4:1,1:3,0:1,x"}, 3, 2);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* bad : {"4:1", "1:3", "0:1", "x"})
      EXPECT_NE(msg.find(bad), std::string::npos) << bad;
  }
  EXPECT_THROW(parse_entries({}, 3, 2), ConfigError);
  EXPECT_THROW(parse_entries({" , "}, 3, 2), ConfigError);
}

TEST(CliEntries, IndexListDefaultsToAll) {
  EXPECT_EQ(parse_index_list({}, 3, "response"), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(parse_index_list({"3,1"}, 3, "response"), (std::vector<Index>{2, 0}));
  EXPECT_THROW(parse_index_list({"4"}, 3, "response"), ConfigError);
}

TEST(CliHash, MatchesPublishedFnv1aVectors) {
  EXPECT_EQ(hex64(fnv1a64("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
}

TEST_F(CliTest, FitOnTinyDataWritesConformingArtifacts) {
  const auto x = write_matrix("x.csv", fixtures::random_matrix(10, 3, 1));
  const auto y = write_matrix("y.csv", fixtures::random_matrix(10, 2, 2));
  ASSERT_EQ(call({"fit", "--x", x, "--y", y, "--out", path("fit")}), kOk) << err_.str();
  for (const char* f : {"manifest.json", "f_hat.csv", "residuals.csv", "factors.json"})
    EXPECT_TRUE(fs::exists(dir_ / "fit" / f)) << f;
  const auto f_hat = load_matrix_csv(dir_ / "fit" / "f_hat.csv", true).values;
  const auto resid = load_matrix_csv(dir_ / "fit" / "residuals.csv", true).values;
  EXPECT_EQ(f_hat.rows(), 3);
  EXPECT_EQ(f_hat.cols(), 2);
  EXPECT_EQ(resid.rows(), 10);
  EXPECT_EQ(resid.cols(), 2);
  const auto factors = Json::parse(slurp(path("fit/factors.json")));
  const int k_bar = factors["k_bar"];
  EXPECT_GE(factors["k"].get<int>(), 1);
  EXPECT_LE(factors["k"].get<int>(), k_bar);
}

TEST_F(CliTest, ForcedZeroFactorsGivesIdentityProjector) {
  const auto x = write_matrix("x.csv", fixtures::random_matrix(30, 4, 3));
  const auto y = write_matrix("y.csv", fixtures::random_matrix(30, 5, 4));
  ASSERT_EQ(call({"fit", "--x", x, "--y", y, "--k", "0", "--out", path("fit")}), kOk);
  const auto factors = Json::parse(slurp(path("fit/factors.json")));
  EXPECT_EQ(factors["k"], 0);
  const auto& proj = factors["p_b_perp"];
  ASSERT_EQ(proj.size(), 5u);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(proj[r][c].get<double>(), r == c ? 1.0 : 0.0);
}

TEST_F(CliTest, RerunWithSameSeedGivesIdenticalBytes) {
  const auto x = write_matrix("x.csv", fixtures::random_matrix(40, 6, 5));
  const auto y = write_matrix("y.csv", fixtures::random_matrix(40, 4, 6));
  for (const char* out : {"a", "b"})
    ASSERT_EQ(call({"fit", "--x", x, "--y", y, "--seed", "11", "--out", path(out)}), kOk);
  for (const char* f : {"f_hat.csv", "residuals.csv", "factors.json"})
    EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
}

TEST_F(CliTest, ManifestHashesMatchArtifacts) {
  const auto x = write_matrix("x.csv", fixtures::random_matrix(20, 3, 7));
  const auto y = write_matrix("y.csv", fixtures::random_matrix(20, 3, 8));
  ASSERT_EQ(call({"fit", "--x", x, "--y", y, "--seed", "4", "--out", path("fit")}), kOk);
  const auto manifest = Json::parse(slurp(path("fit/manifest.json")));
  EXPECT_EQ(manifest["command"], "fit");
  EXPECT_EQ(manifest["seed"], 4);
  EXPECT_EQ(manifest["config"]["method"]["tuning"], "cv");
  for (const char* f : {"f_hat.csv", "residuals.csv", "factors.json"})
    EXPECT_EQ(manifest["artifacts"][f], "fnv1a64:" + hex64(fnv1a64(slurp(path(std::string("fit/") + f)))));
  EXPECT_EQ(manifest["inputs"]["x"]["hash"], "fnv1a64:" + hex64(fnv1a64(slurp(x))));
}

TEST_F(CliTest, StrongSignalEntryIsRejected) {
  DgpConfig cfg;
  cfg.n = 200;
  cfg.p = 20;
  cfg.m = 10;
  cfg.k = 1;
  cfg.s = 1;
  cfg.s_m = 10;
  cfg.theta_signal = 2.0;
  cfg.seed = 9;
  const auto inst = generate_dgp(cfg);
  int nonzero_row = -1;
  for (Index i = 0; i < cfg.p && nonzero_row < 0; ++i)
    if (inst.theta_true(i, 0) != 0.0) nonzero_row = static_cast<int>(i);
  ASSERT_GE(nonzero_row, 0);
  const auto x = write_matrix("x.csv", inst.x);
  const auto y = write_matrix("y.csv", inst.y);
  const std::string entry = std::to_string(nonzero_row + 1) + ":1";
  ASSERT_EQ(call({"infer-theta", "--x", x, "--y", y, "--entries", entry, "--out", path("inf")}),
            kOk)
      << err_.str();
  const auto rows = csv_rows(path("inf/theta_results.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].back(), "reject");
  EXPECT_EQ(rows[1].back(), "1");
}

TEST_F(CliTest, BonferroniUsesAlphaOverNumberOfTests) {
  const auto x = write_matrix("x.csv", fixtures::random_matrix(60, 10, 12));
  Matrix yv = fixtures::random_matrix(60, 10, 13);
  yv.col(0) += 3.0 * load_matrix_csv(x, false).values.col(0);
  const auto y = write_matrix("y.csv", yv);
  ASSERT_EQ(call({"infer-theta", "--x", x, "--y", y, "--entries", "all", "--correction",
                  "bonferroni", "--tuning", "default", "--out", path("inf")}),
            kOk)
      << err_.str();
  const auto rows = csv_rows(path("inf/theta_results.csv"));
  ASSERT_EQ(rows.size(), 101u);
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - 0.05 / 100.0 / 2.0);
  int rejected = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_DOUBLE_EQ(std::stod(rows[r][9]), 0.0005);
    const bool expect = std::abs(std::stod(rows[r][7])) > z;
    EXPECT_EQ(rows[r][10], expect ? "1" : "0");
    rejected += expect;
  }
  EXPECT_GE(rejected, 1);
}

TEST_F(CliTest, InferReusesFitDirectory) {
  const auto x = write_matrix("x.csv", fixtures::random_matrix(50, 5, 14));
  const auto y = write_matrix("y.csv", fixtures::random_matrix(50, 4, 15));
  ASSERT_EQ(call({"fit", "--x", x, "--y", y, "--seed", "2", "--out", path("fit")}), kOk);
  ASSERT_EQ(call({"infer-theta", "--x", x, "--y", y, "--seed", "2", "--entries", "1:1,2:3",
                  "--out", path("fresh")}),
            kOk);
  ASSERT_EQ(call({"infer-theta", "--x", x, "--y", y, "--seed", "2", "--entries", "1:1,2:3",
                  "--fit-dir", path("fit"), "--out", path("reused")}),
            kOk)
      << err_.str();
  EXPECT_EQ(slurp(path("fresh/theta_results.csv")), slurp(path("reused/theta_results.csv")));

  const auto short_y = write_matrix("short.csv", fixtures::random_matrix(40, 4, 16));
  const auto short_x = write_matrix("shortx.csv", fixtures::random_matrix(40, 5, 17));
  EXPECT_EQ(call({"infer-theta", "--x", short_x, "--y", short_y, "--entries", "1:1", "--fit-dir",
                  path("fit"), "--out", path("bad")}),
            kInputError);
}

TEST_F(CliTest, EntryErrorsExitWithConfigCode) {
  const auto x = write_matrix("x.csv", fixtures::random_matrix(20, 3, 18));
  const auto y = write_matrix("y.csv", fixtures::random_matrix(20, 2, 19));
  EXPECT_EQ(call({"infer-theta", "--x", x, "--y", y, "--out", path("a")}), kConfigError);
  EXPECT_EQ(call({"infer-theta", "--x", x, "--y", y, "--entries", "4:1,1:9", "--out", path("b")}),
            kConfigError);
  EXPECT_NE(err_.str().find("4:1, 1:9"), std::string::npos);
  const auto record = Json::parse(slurp(path("b/error.json")));
  EXPECT_EQ(record["error"]["exit_code"], kConfigError);
  EXPECT_EQ(record["error"]["kind"], "config");
}

TEST_F(CliTest, HiddenTestsFromFitDirectory) {
  DgpConfig cfg;
  cfg.n = 150;
  cfg.p = 10;
  cfg.m = 12;
  cfg.k = 1;
  cfg.s_m = 5;
  cfg.b_m = 6;
  cfg.seed = 21;
  const auto inst = generate_dgp(cfg);
  const auto x = write_matrix("x.csv", inst.x);
  const auto y = write_matrix("y.csv", inst.y);
  ASSERT_EQ(call({"fit", "--x", x, "--y", y, "--k", "1", "--out", path("fit")}), kOk);
  ASSERT_EQ(call({"test-hidden", "--fit-dir", path("fit"), "--responses", "1,12", "--out",
                  path("b")}),
            kOk)
      << err_.str();
  const auto rows = csv_rows(path("b/b_tests.csv"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "1");
  EXPECT_EQ(rows[2][0], "12");
  EXPECT_EQ(rows[2][5], "1");
  EXPECT_EQ(call({"fit", "--x", x, "--y", y, "--k", "0", "--out", path("fit0")}), kOk);
  EXPECT_EQ(call({"test-hidden", "--fit-dir", path("fit0"), "--out", path("b0")}), kConfigError);
}

TEST_F(CliTest, InputErrorsExitWithInputCode) {
  const auto y = write_matrix("y.csv", fixtures::random_matrix(5, 2, 20));
  EXPECT_EQ(call({"fit", "--x", path("missing.csv"), "--y", y, "--out", path("o")}), kInputError);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "error.json"));
  {
    std::ofstream bad(path("ragged.csv"));
    bad << "1,2\n3\n4,5\n6,7\n8,9\n";
  }
  EXPECT_EQ(call({"fit", "--x", path("ragged.csv"), "--y", y, "--out", path("o2")}), kInputError);
  const auto record = Json::parse(slurp(path("o2/error.json")));
  EXPECT_EQ(record["error"]["row"], 2);
}

TEST_F(CliTest, SimulateSingleReplicationAndValidation) {
  const std::vector<std::string> dgp{"--n", "60", "--p", "12", "--m", "10", "--sm", "4",
                                     "--k", "1", "--tuning", "default"};
  auto args = std::vector<std::string>{"simulate", "--reps", "1", "--out", path("sim")};
  args.insert(args.end(), dgp.begin(), dgp.end());
  ASSERT_EQ(call(args), kOk) << err_.str();
  const auto summary = csv_rows(path("sim/simulation.csv"));
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0][11], "type1");
  EXPECT_EQ(summary[0][12], "power");
  EXPECT_EQ(csv_rows(path("sim/replications.csv")).size(), 2u);

  args.push_back("--eta");
  args.push_back("-0.5");
  EXPECT_EQ(call(args), kConfigError);
}

TEST_F(CliTest, ConfigFileSuppliesOptionsAndFlagsWin) {
  {
    std::ofstream conf(path("run.conf"));
    conf << "# cell\nn = 60\np = 12\nm = 10\nsm = 4\nk = 1\nreps = 3\ntuning = default\n";
  }
  ASSERT_EQ(call({"simulate", "--config", path("run.conf"), "--reps", "2", "--out", path("sim")}),
            kOk)
      << err_.str();
  const auto summary = csv_rows(path("sim/simulation.csv"));
  EXPECT_EQ(summary[1][0], "60");
  EXPECT_EQ(summary[1][13], "2");
  EXPECT_EQ(call({"simulate", "--config", path("absent.conf"), "--out", path("x")}), kInputError);
}

TEST_F(CliTest, SweepAndCvWriteCurves) {
  ASSERT_EQ(call({"sweep", "--n", "60", "--p", "12", "--m", "10", "--sm", "4", "--k", "1",
                  "--reps", "1", "--tuning", "default", "--r-grid", "0.5,1", "--out",
                  path("sw")}),
            kOk)
      << err_.str();
  EXPECT_EQ(csv_rows(path("sw/sweep.csv")).size(), 3u);

  const auto x = write_matrix("x.csv", fixtures::random_matrix(40, 4, 22));
  const auto y = write_matrix("y.csv", fixtures::random_matrix(40, 3, 23));
  ASSERT_EQ(call({"cv", "--x", x, "--y", y, "--responses", "2", "--features", "1", "--out",
                  path("cv")}),
            kOk)
      << err_.str();
  const auto rows = csv_rows(path("cv/cv_curves.csv"));
  std::map<std::string, int> selected;
  for (std::size_t r = 1; r < rows.size(); ++r) selected[rows[r][0]] += std::stoi(rows[r][6]);
  for (const char* p : {"lambda1", "lambda2", "lambda3", "lambda_tilde"}) EXPECT_EQ(selected[p], 1) << p;
}

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(call({"--help"}), kOk);
  EXPECT_NE(out_.str().find("infer-theta"), std::string::npos);
  EXPECT_EQ(call({}), kConfigError);
  EXPECT_EQ(call({"frobnicate"}), kConfigError);
  EXPECT_EQ(call({"fit", "--out", path("o"), "--tuning", "magic"}), kConfigError);
  EXPECT_EQ(call({"simulate", "--out", path("o"), "--alpha", "0"}), kConfigError);
}
