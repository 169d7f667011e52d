#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "opineq/cli.hpp"

using namespace opineq;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("opineq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
    write("s.json", R"({"rows":2,"cols":2,"data":[[2,0],[0,0],[0,0],[0,0]]})");
    write("t.json", R"({"rows":2,"cols":2,"data":[[0,0],[0,0],[0,0],[3,0]]})");
    write("shift.json", R"({"rows":2,"cols":2,"data":[[0,0],[1,0],[0,0],[0,0]]})");
    write("eye.json", R"({"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[1,0]]})");
  }
  void TearDown() override { fs::remove_all(dir); }

  void write(const std::string& name, const std::string& text) const { write_text(path(name), text); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

bool shows_synopsis(const Run& r) { return r.err.find("usage:") != std::string::npos; }

}  // namespace

TEST_F(CliTest, ComputeHornOnDiagonals) {
  const auto r = run({"compute", "--bound", "horn", "--S", path("s.json"), "--T", path("t.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = report_from_json(Json::parse(r.out));
  EXPECT_EQ(rep.bound_id, "horn");
  EXPECT_NEAR(rep.lhs, 3.0, 1e-12);
  EXPECT_NEAR(rep.rhs, 3.0, 1e-12);
  EXPECT_EQ(rep.verdict, Verdict::verified);
}

TEST_F(CliTest, ComputeWithPairAndCsv) {
  const auto r = run({"compute", "--bound", "main", "--S", path("eye.json"), "--T", path("eye.json"), "--pair",
                      "pow:0.3", "--pair-g", "pow:0.6", "--csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "bound,lhs,rhs,slack,verdict");
  const std::string row = r.out.substr(r.out.find('\n') + 1);
  EXPECT_EQ(row.substr(0, 5), "main,");
  EXPECT_NE(row.find(",verified"), std::string::npos) << r.out;
}

TEST_F(CliTest, ComputeSingleOperandAndExponents) {
  auto r = run({"compute", "--bound", "yamazaki", "--S", path("shift.json"), "--t", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(report_from_json(Json::parse(r.out)).slack, 0.0, 1e-9);
  r = run({"compute", "--bound", "w_classic", "--S", path("shift.json"), "--T", path("shift.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(shows_synopsis(r));
}

TEST_F(CliTest, ComputeStrictHypothesisFailure) {
  write("j.json", R"({"rows":2,"cols":2,"data":[[0,0],[2,0],[0,0],[0,0]]})");
  const auto r = run({"compute", "--bound", "horn", "--S", path("j.json"), "--T", path("s.json"), "--strict"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, ComputeOutputFile) {
  const auto r = run({"compute", "--bound", "horn", "--S", path("s.json"), "--T", path("t.json"), "--out",
                      path("rep.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(load_bound_report(path("rep.json")).bound_id, "horn");
}

TEST_F(CliTest, ComputeErrors) {
  EXPECT_EQ(run({"compute", "--S", path("s.json"), "--T", path("t.json")}).code, 1);  // no silent default bound
  EXPECT_EQ(run({"compute", "--bound", "nope", "--S", path("s.json"), "--T", path("t.json")}).code, 1);
  EXPECT_EQ(run({"compute", "--bound", "horn", "--S", path("missing.json"), "--T", path("t.json")}).code, 1);
  EXPECT_EQ(run({"compute", "--bound", "main", "--S", path("s.json"), "--T", path("t.json"), "--pair", "log"}).code, 1);
  write("bad.json", R"({"rows":2,"cols":2,"data":[[0,0]]})");
  const auto r = run({"compute", "--bound", "horn", "--S", path("bad.json"), "--T", path("t.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("expected 4"), std::string::npos);
  EXPECT_EQ(run({"compute", "--bound", "horn", "--S", path("s.json"), "--T", path("t.json"), "--json", "--csv"}).code, 1);
}

TEST_F(CliTest, RadiusOfShift) {
  const auto r = run({"radius", "--S", path("shift.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j["estimate"].get<double>(), 0.5, 1e-12);
  EXPECT_LE(j["width"].get<double>(), 1e-3);
  EXPECT_EQ(run({"radius", "--S", path("shift.json"), "--grid", "3"}).code, 1);
  EXPECT_EQ(run({"radius"}).code, 1);
}

TEST_F(CliTest, VerifyHornTenRows) {
  const auto r = run({"verify", "--bounds", "horn", "--trials", "10", "--dims", "2", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 11);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "bound,dim,trial,lhs,rhs,slack,verdict");
}

TEST_F(CliTest, VerifyFromConfigMatchesFlags) {
  write("cfg.json", R"({"masterSeed":7,"dims":[2,3],"trialsPerBoundPerDim":4,"bounds":["horn","w_classic"]})");
  const auto a = run({"verify", "--config", path("cfg.json")});
  const auto b = run({"verify", "--bounds", "horn,w_classic", "--dims", "2,3", "--trials", "4", "--seed", "7"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = run({"verify", "--config", path("cfg.json"), "--json", "--workers", "3"});
  EXPECT_EQ(campaign_csv(campaign_from_json(Json::parse(j.out))), a.out);
}

TEST_F(CliTest, VerifyUsageErrors) {
  auto r = run({"verify"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(shows_synopsis(r));
  EXPECT_EQ(run({"verify", "--config", path("cfg.json"), "--bounds", "horn"}).code, 1);
  EXPECT_EQ(run({"verify", "--bounds", "horn", "--trials", "0"}).code, 1);
  EXPECT_EQ(run({"verify", "--bounds", "horn,bogus"}).code, 1);
  EXPECT_EQ(run({"verify", "--config", path("none.json")}).code, 1);
  EXPECT_EQ(run({"verify", "--bounds", "horn", "--trials", "x"}).code, 1);
}

TEST_F(CliTest, Compare) {
  auto r = run({"compare", "--bounds", "main,shi", "--class", "normal", "--trials", "6", "--seed", "3", "--t", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "trial,main,shi");
  EXPECT_NE(r.err.find("main <= shi"), std::string::npos);
  r = run({"compare", "--bounds", "horn,davidson_power", "--class", "ginibre"});
  EXPECT_EQ(r.code, 1);
  r = run({"compare", "--bounds", "horn", "--trials", "2", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["class"], "normal");
  EXPECT_EQ(run({"compare", "--class", "normal"}).code, 1);
}

TEST_F(CliTest, Search) {
  const auto r = run({"search", "--bound", "horn", "--restarts", "2", "--steps", "5", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = search_from_json(Json::parse(r.out));
  EXPECT_EQ(res.evaluations, 12);
  EXPECT_NEAR(evaluate(BoundId::horn, res.best_operands).slack, res.best_slack, 1e-10);
  EXPECT_EQ(run({"search", "--restarts", "2"}).code, 1);
  EXPECT_EQ(run({"search", "--bound", "horn", "--restarts", "0"}).code, 1);
}

TEST_F(CliTest, UnknownSubcommandAndHelp) {
  auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(shows_synopsis(r));
  r = run({});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(shows_synopsis(r));
  r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("usage:"), std::string::npos);
}

TEST_F(CliTest, ArgvOverload) {
  const char* argv[] = {"opineq", "radius", "--S", nullptr};
  const std::string p = path("shift.json");
  argv[3] = p.c_str();
  std::ostringstream out, err;
  EXPECT_EQ(cli::dispatch(4, argv, out, err), 0);
}
