#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "lassorec/io.hpp"
#include "lassorec/lasso.hpp"
#include "support/tempdir.hpp"

namespace lassorec {
namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lassorec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

Json read_json(const std::filesystem::path& p) { return Json::parse(slurp(p)); }

// X = 2 I: every coefficient is soft(4 y_k, lambda) / 8 and column k joins
// at lambda = 4 |y_k|.
class OrthogonalFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    spit(dir.path() / "X.csv", "2,0,0\n0,2,0\n0,0,2\n");
    spit(dir.path() / "y.csv", "4\n-2\n1\n");
    spit(dir.path() / "beta.csv", "1\n-0.5\n0\n");
  }
  TempDir dir;
};

TEST_F(OrthogonalFiles, SolvePrintsFitWithoutOut) {
  Outcome o = run_cli({"solve", "--design", dir / "X.csv", "--response", dir / "y.csv",
                       "--lambda", "6"});
  ASSERT_EQ(o.code, 0) << o.err;
  Json fit = Json::parse(o.out);
  EXPECT_NEAR(fit["coefficients"][0].get<double>(), (16.0 - 6.0) / 8.0, 1e-9);
  EXPECT_NEAR(fit["coefficients"][1].get<double>(), -(8.0 - 6.0) / 8.0, 1e-9);
  EXPECT_EQ(fit["coefficients"][2].get<double>(), 0.0);
  EXPECT_EQ(fit["support"], Json::array({1, 2}));
  EXPECT_EQ(fit["lambda_max"].get<double>(), 16.0);
}

TEST_F(OrthogonalFiles, SolveEchoesResolvedConfig) {
  Outcome o = run_cli({"solve", "--design", dir / "X.csv", "--response", dir / "y.csv",
                       "--lambda", "2", "--tol", "1e-8", "--out", dir / "o"});
  ASSERT_EQ(o.code, 0) << o.err;
  Json cfg = read_json(dir.path() / "o" / "run_config.json");
  EXPECT_EQ(cfg["subcommand"], "solve");
  EXPECT_EQ(cfg["lambda"].get<double>(), 2.0);
  EXPECT_EQ(cfg["tol"].get<double>(), 1e-8);
  EXPECT_EQ(cfg["force"], false);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "o" / "coefficients.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "o" / "fit.json"));
}

TEST_F(OrthogonalFiles, SolveCoefficientsCsvMatchesLibrary) {
  ASSERT_EQ(run_cli({"solve", "--design", dir / "X.csv", "--response", dir / "y.csv",
                     "--lambda", "6", "--out", dir / "o"})
                .code,
            0);
  auto design = std::make_shared<const DesignMatrix>(read_design_csv(dir / "X.csv"));
  RegressionProblem problem(design, read_vector_csv(dir / "y.csv"));
  LassoFit fit = solve_at(problem, 6.0);
  EXPECT_EQ(slurp(dir.path() / "o" / "coefficients.csv"),
            to_csv(coefficients_table(fit.coefficients)));
}

TEST_F(OrthogonalFiles, UnknownFlagIsNamed) {
  Outcome o = run_cli({"solve", "--design", dir / "X.csv", "--response", dir / "y.csv",
                       "--lamda", "2"});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_NE(o.err.find("--lamda"), std::string::npos) << o.err;
}

TEST_F(OrthogonalFiles, UnknownConfigKeyIsNamed) {
  spit(dir.path() / "c.cfg", "lamda = 2\n");
  Outcome o = run_cli({"solve", "--design", dir / "X.csv", "--response", dir / "y.csv",
                       "--lambda", "2", "--config", dir / "c.cfg"});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_NE(o.err.find("lamda"), std::string::npos) << o.err;
}

TEST_F(OrthogonalFiles, ConfigSuppliesMissingFlags) {
  spit(dir.path() / "c.cfg", "# fixed penalty\nlambda = 6\ntol = 1e-10\nforce = true\n");
  Outcome o = run_cli({"solve", "--design", dir / "X.csv", "--response", dir / "y.csv",
                       "--config", dir / "c.cfg", "--out", dir / "o"});
  ASSERT_EQ(o.code, 0) << o.err;
  Json cfg = read_json(dir.path() / "o" / "run_config.json");
  EXPECT_EQ(cfg["lambda"].get<double>(), 6.0);
  EXPECT_EQ(cfg["tol"].get<double>(), 1e-10);
  EXPECT_EQ(cfg["force"], true);
}

TEST_F(OrthogonalFiles, FlagBeatsConfigBeatsDefault) {
  spit(dir.path() / "c.cfg", "seed = 7\n");
  std::vector<std::string> base = {"xi-path", "--design", dir / "X.csv", "--beta",
                                   dir / "beta.csv", "--lambda", "3", "--config",
                                   dir / "c.cfg"};
  auto with = [&](std::vector<std::string> extra, const std::string& out) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("--out");
    args.push_back(dir / out);
    Outcome o = run_cli(args);
    EXPECT_EQ(o.code, 0) << o.err;
    return read_json(dir.path() / out / "run_config.json");
  };
  EXPECT_EQ(with({"--seed", "9"}, "a")["seed"].get<std::uint64_t>(), 9u);
  EXPECT_EQ(with({}, "b")["seed"].get<std::uint64_t>(), 7u);
  EXPECT_EQ(with({"--seed=9"}, "c")["seed"].get<std::uint64_t>(), 9u);
  // Default sigma survives untouched.
  EXPECT_EQ(with({}, "d")["sigma"].get<double>(), 1.0);
  EXPECT_EQ(slurp(dir.path() / "a" / "xi_path.csv"), slurp(dir.path() / "c" / "xi_path.csv"));
  EXPECT_NE(slurp(dir.path() / "a" / "xi_path.csv"), slurp(dir.path() / "b" / "xi_path.csv"));
}

TEST_F(OrthogonalFiles, PathSegmentsCsv) {
  Outcome o = run_cli({"path", "--design", dir / "X.csv", "--response", dir / "y.csv",
                       "--lambda-min", "1", "--out", dir / "o"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(slurp(dir.path() / "o" / "segments.csv"),
            "lambda_high,lambda_low,event,active_size\n"
            "16,8,+1,1\n8,4,+2,2\n4,1,+3,3\n");
  Json r = read_json(dir.path() / "o" / "path.json");
  ASSERT_EQ(r["points"].size(), 4u);
  EXPECT_EQ(r["points"][3]["lambda"].get<double>(), 1.0);
  EXPECT_NEAR(r["points"][3]["coefficients"][2].get<double>(), 3.0 / 8.0, 1e-12);
}

TEST_F(OrthogonalFiles, PathAtRequestedLambdas) {
  Outcome o = run_cli({"path", "--design", dir / "X.csv", "--response", dir / "y.csv",
                       "--lambda-min", "1", "--at", "12,6"});
  ASSERT_EQ(o.code, 0) << o.err;
  Json r = Json::parse(o.out);
  ASSERT_EQ(r["points"].size(), 2u);
  EXPECT_NEAR(r["points"][0]["coefficients"][0].get<double>(), 0.5, 1e-12);
  EXPECT_EQ(r["points"][0]["support"], Json::array({1}));
  EXPECT_NEAR(r["points"][1]["coefficients"][1].get<double>(), -0.25, 1e-12);
}

TEST_F(OrthogonalFiles, TwoStepReportsSignMatch) {
  Outcome o = run_cli({"two-step", "--design", dir / "X.csv", "--response", dir / "y.csv",
                       "--beta", dir / "beta.csv", "--lambda", "5", "--sigma", "1",
                       "--t", "1"});
  ASSERT_EQ(o.code, 0) << o.err;
  Json r = Json::parse(o.out);
  // Lasso keeps columns 1 and 2 (16 > 5, 8 > 5); cutoff sqrt(log 3 / 3) ~ 0.605
  // removes column 2 whose estimate is 3/8.
  EXPECT_EQ(r["support_before"], Json::array({1, 2}));
  EXPECT_EQ(r["support_after"], Json::array({1}));
  EXPECT_EQ(r["lasso_sign_match"], true);
  EXPECT_EQ(r["sign_match"], false);
}

TEST_F(OrthogonalFiles, DiagnoseIrrepresentable) {
  spit(dir.path() / "D.csv", "1,0,0\n0,1,0\n0,0,1\n1,1,0\n");
  Outcome o = run_cli({"diagnose", "--design", dir / "D.csv", "--support", "3,1",
                       "--signs", "-,+", "--sparse-eig-max", "2", "--mode", "exact"});
  ASSERT_EQ(o.code, 0) << o.err;
  Json r = Json::parse(o.out);
  // C = [[2,1,0],[1,2,0],[0,0,1]] / 4; C_21 C_11^{-1} = 1/2 on column 1.
  EXPECT_EQ(r["irrepresentable"]["support"], Json::array({1, 3}));
  EXPECT_EQ(r["irrepresentable"]["signs"], Json::array({1, -1}));
  EXPECT_NEAR(r["irrepresentable"]["value"].get<double>(), 0.5, 1e-12);
  EXPECT_EQ(r["irrepresentable"]["worst_column"], 2);
  ASSERT_EQ(r["sparse_eigenvalues"].size(), 2u);
  EXPECT_NEAR(r["sparse_eigenvalues"][1]["phi_max"].get<double>(), 0.75, 1e-12);
}

TEST_F(OrthogonalFiles, DiagnoseRejectsBadSupport) {
  Outcome o = run_cli({"diagnose", "--design", dir / "X.csv", "--support", "1,4"});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_NE(o.err.find("4"), std::string::npos);
}

TEST_F(OrthogonalFiles, ExitCodes) {
  EXPECT_EQ(run_cli({"solve", "--design", dir / "none.csv", "--response", dir / "y.csv",
                     "--lambda", "1"})
                .code,
            cli::kExitIo);
  EXPECT_EQ(run_cli({"solve", "--design", dir / "X.csv", "--response", dir / "y.csv",
                     "--lambda", "-1"})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  spit(dir.path() / "dup.csv", "1,2\n2,4\n1,2\n");
  spit(dir.path() / "y3.csv", "1\n2\n3\n");
  EXPECT_EQ(run_cli({"solve", "--design", dir / "dup.csv", "--response", dir / "y3.csv",
                     "--lambda", "1"})
                .code,
            cli::kExitNumerical);
  EXPECT_EQ(run_cli({"solve", "--design", dir / "dup.csv", "--response", dir / "y3.csv",
                     "--lambda", "1", "--force"})
                .code,
            cli::kExitOk);
  spit(dir.path() / "blocker", "");
  EXPECT_EQ(run_cli({"solve", "--design", dir / "X.csv", "--response", dir / "y.csv",
                     "--lambda", "1", "--out", dir / "blocker"})
                .code,
            cli::kExitIo);
}

TEST(CliExperiment, OutputTreeIndependentOfThreads) {
  TempDir dir;
  spit(dir.path() / "f.cfg", "replications = 2\nsigmas = 0.2\nlambda_points = 6\n");
  for (const char* t : {"1", "2"}) {
    Outcome o = run_cli({"experiment", "freq", "--config", dir / "f.cfg", "--threads", t,
                         "--out", dir / (std::string("t") + t)});
    ASSERT_EQ(o.code, 0) << o.err;
  }
  for (const char* f : {"replications.csv", "aggregate.json", "periodogram.csv"})
    EXPECT_EQ(slurp(dir.path() / "t1" / f), slurp(dir.path() / "t2" / f)) << f;
  Json cfg = read_json(dir.path() / "t2" / "run_config.json");
  EXPECT_EQ(cfg["subcommand"], "experiment freq");
  EXPECT_EQ(cfg["threads"], 2);
  EXPECT_EQ(cfg["sigmas"], Json::array({0.2}));
}

TEST(CliExperiment, RerunIsByteIdentical) {
  TempDir dir;
  std::vector<std::string> args = {"experiment", "active-set", "--n", "20", "--p", "30",
                                   "--s", "2", "--replications", "3", "--seed", "5",
                                   "--out", dir / "a"};
  ASSERT_EQ(run_cli(args).code, 0);
  std::string first = slurp(dir.path() / "a" / "replications.csv");
  std::string agg = slurp(dir.path() / "a" / "aggregate.json");
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(slurp(dir.path() / "a" / "replications.csv"), first);
  EXPECT_EQ(slurp(dir.path() / "a" / "aggregate.json"), agg);
}

TEST(CliExperiment, OutIsRequired) {
  Outcome o = run_cli({"experiment", "scaling", "--replications", "1"});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_NE(o.err.find("--out"), std::string::npos) << o.err;
}

}  // namespace
}  // namespace lassorec
