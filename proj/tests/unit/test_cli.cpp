#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "glmmsel/csv.hpp"
#include "glmmsel/io.hpp"
#include "glmmsel/solver.hpp"
#include "support/temp_dir.hpp"

using namespace glmmsel;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "glmmsel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_nonzero(const CsvTable& t, const std::string& column) {
  const std::size_t c = t.column(column);
  std::size_t n = 0;
  for (const auto& row : t.rows) n += std::stod(row[c]) != 0.0;
  return n;
}

void simulate(const support::TempDir& dir, const std::string& sub, int n, int p, int seed,
              const std::string& family = "gaussian") {
  const CliRun r = run({"simulate", "--n", std::to_string(n), "--p", std::to_string(p), "--seed", std::to_string(seed),
                     "--family", family, "--out", dir.file(sub)});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
}

}  // namespace

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  const CliRun v = run({"--version"});
  EXPECT_EQ(v.code, cli::kExitOk);
  EXPECT_FALSE(v.out.empty());
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const CliRun r = run({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitUsage);
}

TEST(Cli, SimulateWritesTruthWithRequestedSupport) {
  support::TempDir dir;
  simulate(dir, "sim", 1000, 1000, 7);
  for (const char* f : {"train.csv", "validation.csv", "truth.csv", "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.file(std::string("sim/") + f))) << f;
  }
  const CsvTable truth = read_csv_table(dir.file("sim/truth.csv"));
  EXPECT_EQ(truth.rows.size(), 1000u);
  EXPECT_EQ(count_nonzero(truth, "beta0"), 5u);
  EXPECT_EQ(count_nonzero(truth, "gamma0"), 3u);
}

TEST(Cli, SimulateIsDeterministic) {
  support::TempDir dir;
  simulate(dir, "a", 200, 20, 11);
  simulate(dir, "b", 200, 20, 11);
  for (const char* f : {"train.csv", "validation.csv", "truth.csv", "manifest.json"}) {
    EXPECT_EQ(support::read_text(dir.file(std::string("a/") + f)), support::read_text(dir.file(std::string("b/") + f)))
        << f;
  }
}

TEST(Cli, SimulateRejectsRandomWithoutFixed) {
  support::TempDir dir;
  const CliRun r = run({"simulate", "--p", "10", "--s-fixed", "5", "--s-random", "6", "--out", dir.file("x")});
  EXPECT_EQ(r.code, cli::kExitModel);
  EXPECT_NE(r.err.find("InvalidConfig"), std::string::npos) << r.err;
}

TEST(Cli, MissingRequiredOptionIsUsageError) {
  support::TempDir dir;
  simulate(dir, "sim", 100, 5, 1);
  const CliRun r = run({"fit", "--data", dir.file("sim/train.csv"), "--cluster", "cluster", "--out", dir.file("o")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--response"), std::string::npos) << r.err;
}

TEST(Cli, NonBinaryBernoulliResponseIsModelError) {
  support::TempDir dir;
  support::write_text(dir.file("d.csv"), "g,y,x1\na,1,0.5\na,2,1\nb,0,2\n");
  const CliRun r = run({"fit", "--data", dir.file("d.csv"), "--cluster", "g", "--response", "y", "--family", "bernoulli",
                     "--out", dir.file("o")});
  EXPECT_EQ(r.code, cli::kExitModel);
  EXPECT_NE(r.err.find("NonBinaryResponse"), std::string::npos) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, MalformedNumberIsModelError) {
  support::TempDir dir;
  support::write_text(dir.file("d.csv"), "g,y,x1\na,1,0.5\na,oops,1\n");
  const CliRun r = run({"fit", "--data", dir.file("d.csv"), "--cluster", "g", "--response", "y", "--out", dir.file("o")});
  EXPECT_EQ(r.code, cli::kExitModel);
  EXPECT_NE(r.err.find("ParseError"), std::string::npos) << r.err;
}

class CliFit : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new support::TempDir();
    simulate(*dir_, "sim", 400, 20, 3);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static CliRun fit(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"fit",          "--data",     dir_->file("sim/train.csv"),
                                     "--cluster",    "cluster",    "--response",
                                     "y",            "--validation", dir_->file("sim/validation.csv"),
                                     "--alpha-grid", "3",          "--out",
                                     dir_->file(out)};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }
  static support::TempDir* dir_;
};

support::TempDir* CliFit::dir_ = nullptr;

TEST_F(CliFit, WritesChosenModelRespectingHierarchy) {
  const CliRun r = fit("fit1");
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  for (const char* f : {"path.csv", "path_coefficients.csv", "coefficients.csv", "blups.csv", "fit.csv", "tuning.csv",
                        "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir_->file(std::string("fit1/") + f))) << f;
  }
  const NamedCoefficients c = read_coefficients(dir_->file("fit1/coefficients.csv"));
  EXPECT_EQ(c.names.size(), 20u);
  for (Index k = 0; k < c.coef.beta.size(); ++k) {
    if (c.coef.gamma[k] != 0.0) EXPECT_NE(c.coef.beta[k], 0.0);
  }
}

TEST_F(CliFit, CoefficientsReproduceReportedObjective) {
  const CliRun r = fit("fit2");
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const NamedCoefficients c = read_coefficients(dir_->file("fit2/coefficients.csv"));
  const CsvTable summary = read_csv_table(dir_->file("fit2/fit.csv"));
  double objective = 0, lambda = 0, alpha = 0;
  for (const auto& row : summary.rows) {
    if (row[0] == "objective") objective = std::stod(row[1]);
    if (row[0] == "lambda") lambda = std::stod(row[1]);
    if (row[0] == "alpha") alpha = std::stod(row[1]);
  }
  const Dataset train = standardize(load_csv(dir_->file("sim/train.csv"), {"cluster", "y", {}}));
  const Coefficients std_coef = to_standardized_scale(c.coef, train.scales());
  const FitState state(train, std_coef);
  EXPECT_NEAR(state.objective(lambda, alpha), objective, 1e-8 * std::max(1.0, std::abs(objective)));
}

TEST_F(CliFit, RepeatedRunsAreByteIdentical) {
  ASSERT_EQ(fit("det_a").code, cli::kExitOk);
  ASSERT_EQ(fit("det_b", {"--threads", "2"}).code, cli::kExitOk);
  for (const char* f : {"path.csv", "path_coefficients.csv", "coefficients.csv", "blups.csv", "fit.csv",
                        "tuning.csv"}) {
    EXPECT_EQ(support::read_text(dir_->file(std::string("det_a/") + f)),
              support::read_text(dir_->file(std::string("det_b/") + f)))
        << f;
  }
}

TEST_F(CliFit, PathWithoutValidationSkipsChosenFiles) {
  const CliRun r = run({"path", "--data", dir_->file("sim/train.csv"), "--cluster", "cluster", "--response", "y",
                     "--alpha-grid", "2", "--out", dir_->file("path_only")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir_->file("path_only/path.csv")));
  EXPECT_FALSE(std::filesystem::exists(dir_->file("path_only/coefficients.csv")));
}

TEST_F(CliFit, EvaluateScoresCoefficients) {
  ASSERT_EQ(fit("eval").code, cli::kExitOk);
  const CliRun r = run({"evaluate", "--coefficients", dir_->file("eval/coefficients.csv"), "--truth",
                     dir_->file("sim/truth.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("f1_nonzero"), std::string::npos) << r.out;
}

TEST_F(CliFit, ThreadsFromEnvironment) {
  const CliRun base = fit("env_base");
  ASSERT_EQ(base.code, cli::kExitOk) << base.err;
  ::setenv("GLMMSELECT_THREADS", "2", 1);
  const CliRun r = fit("env");
  ::unsetenv("GLMMSELECT_THREADS");
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(support::read_text(dir_->file("env/coefficients.csv")),
            support::read_text(dir_->file("env_base/coefficients.csv")));
}

TEST(Cli, EvaluateExperimentWritesTable) {
  support::TempDir dir;
  const CliRun r = run({"evaluate", "--n", "150", "--p", "10", "--rho", "0.5", "--methods", "cd,cd_ls", "--replicates",
                     "2", "--alpha-grid", "2", "--out", dir.file("results.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const CsvTable t = read_csv_table(dir.file("results.csv"));
  EXPECT_EQ(t.rows.size(), 2u * 4u);
  EXPECT_TRUE(t.has_column("se"));
}

TEST(Cli, BenchReportsStandardErrors) {
  support::TempDir dir;
  const CliRun r = run({"bench", "--n", "100", "--p", "50,100", "--methods", "cd", "--repeats", "3", "--n-lambda", "10",
                     "--out", dir.file("bench.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const CsvTable t = read_csv_table(dir.file("bench.csv"));
  ASSERT_EQ(t.rows.size(), 2u);
  const std::size_t se = t.column("seconds_se");
  for (const auto& row : t.rows) EXPECT_FALSE(row[se].empty());
}
