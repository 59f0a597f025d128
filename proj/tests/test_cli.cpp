#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "crnric/cli.hpp"
#include "test_support.hpp"

using namespace testing_support;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "crnric");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("crnric_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ReachMatchesLibrary) {
  auto r = cli({"reach", "--crn", samples_path("catalysis.crn"), "--from", samples_path("catalysis_from.st"), "--to",
                samples_path("catalysis_to.st"), "--witness", tmp("w.path"), "--expect", "reachable"});
  EXPECT_EQ(r.code, 0);
  Crn crn = catalysis_crn();
  State c = parse_state(read_file(samples_path("catalysis_from.st")), crn);
  State d = parse_state(read_file(samples_path("catalysis_to.st")), crn);
  auto v = decide_reachable(crn, c, d);
  EXPECT_EQ(r.out, "reachable (" + std::to_string(v.witness->segments.size()) + " segments)\n");
  Path w = parse_path(read_file(tmp("w.path")), crn);
  EXPECT_EQ(verify_path(crn, w), d);

  auto u = cli({"reach", "--crn", samples_path("limit.crn"), "--from", samples_path("limit_from.st"), "--to",
                samples_path("limit_to.st"), "--expect", "reachable"});
  EXPECT_EQ(u.code, 1);
  EXPECT_EQ(u.out, "unreachable\n");
  auto b = cli({"reach", "--bruteforce", "--crn", samples_path("limit.crn"), "--from", samples_path("limit_from.st"),
                "--to", samples_path("limit_to.st"), "--expect", "unreachable"});
  EXPECT_EQ(b.code, 0);
}

TEST_F(Cli, CompileThenVerify) {
  auto c = cli({"compile", "--spec", samples_path("summin_maxmin.pwl"), "-o", tmp("s.crn")});
  ASSERT_EQ(c.code, 0) << c.err;
  auto cc = compile_maxmin(load_pwl("summin_maxmin.pwl").to_maxmin());
  EXPECT_EQ(read_file(tmp("s.crn")), serialize_crc(cc.crc));
  EXPECT_EQ(read_file(tmp("s.crn.schedule")), serialize_schedule(cc));
  EXPECT_EQ(c.out, "compiled " + std::to_string(cc.crc.crn.num_species()) + " species, " +
                       std::to_string(cc.crc.crn.num_reactions()) + " reactions\n");

  auto v = cli({"verify", "--crc", tmp("s.crn"), "--spec", samples_path("summin_maxmin.pwl"), "--trials", "15",
                "--report", tmp("r.json")});
  EXPECT_EQ(v.code, 0) << v.out << v.err;
  EXPECT_EQ(v.out, "15/15 trials passed\n");
  auto j = nlohmann::json::parse(read_file(tmp("r.json")));
  EXPECT_EQ(j["passed"], 15);

  auto regional = cli({"verify", "--crc", tmp("s.crn"), "--spec", samples_path("summin.pwl"), "--trials", "5"});
  EXPECT_EQ(regional.code, 0) << regional.out;

  auto mismatch = cli({"verify", "--crc", tmp("s.crn"), "--spec", samples_path("max.pwl")});
  EXPECT_EQ(mismatch.code, 2);
}

TEST_F(Cli, VerifyDetectsWrongNetwork) {
  ASSERT_EQ(cli({"compile", "--spec", samples_path("min.pwl"), "-o", tmp("m.crn")}).code, 0);
  auto v = cli({"verify", "--crc", tmp("m.crn"), "--spec", samples_path("max.pwl"), "--trials", "10"});
  EXPECT_EQ(v.code, 1);
  EXPECT_NE(v.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, DirectCompileAndOde) {
  ASSERT_EQ(cli({"compile", "--spec", samples_path("direct.pwl"), "--encoding", "direct", "-o", tmp("d.crn")}).code,
            0);
  auto v = cli({"verify", "--crc", tmp("d.crn"), "--spec", samples_path("direct.pwl"), "--trials", "4", "--ode"});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_EQ(v.out, "4/4 trials passed, ode 4/4\n");
}

TEST_F(Cli, SiphonsStableFeedforward) {
  auto s = cli({"siphons", "--crn", samples_path("two_siphons.crn")});
  EXPECT_EQ(s.code, 0);
  EXPECT_EQ(s.out, "X1\nX2\n");

  write_file(tmp("busy.st"), "X1 = 1\nX2 = 1\n");
  auto st = cli({"stable", "--crc", samples_path("two_siphons.crn"), "--state", tmp("busy.st"), "--expect", "stable"});
  EXPECT_EQ(st.code, 1);
  EXPECT_NE(st.out.find("state: not output stable"), std::string::npos);

  auto ff = cli({"feedforward", "--crn", samples_path("oscillating.crn")});
  EXPECT_EQ(ff.code, 1);
  EXPECT_EQ(ff.out, "not feedforward\n");
  auto ok = cli({"feedforward", "--crn", samples_path("max_direct.crn")});
  EXPECT_EQ(ok.code, 0);
}

TEST_F(Cli, SimulateWritesCsvAndPlot) {
  auto r = cli({"simulate", "--crn", samples_path("oscillating.crn"), "--state", samples_path("oscillating.st"),
                "--rates", "1:1,2:1", "--horizon", "50", "-o", tmp("t.csv"), "--plot", tmp("t.svg")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string csv = read_file(tmp("t.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,X,Y,flux1,flux2");
  EXPECT_NE(read_file(tmp("t.svg")).find("<svg"), std::string::npos);
  double x = std::stod(r.out.substr(r.out.find("X = ") + 4));
  EXPECT_NEAR(x, 1.0 / 3, 1e-6);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"reach", "--crn", samples_path("catalysis.crn")}).code, 2);
  EXPECT_EQ(cli({"siphons", "--crn", tmp("missing.crn")}).code, 2);
  write_file(tmp("bad.crn"), "X -> Y\nX => Z\n");
  auto bad = cli({"siphons", "--crn", tmp("bad.crn")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;
  EXPECT_EQ(cli({"simulate", "--crn", samples_path("oscillating.crn"), "--state", samples_path("oscillating.st"),
                 "--rates", "9:1"})
                .code,
            2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(CliBinary, ExitCodes) {
  std::string bin = CRNRIC_CLI;
  auto run = [&](const std::string& args) {
    int status = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("siphons --crn " + samples_path("two_siphons.crn")), 0);
  EXPECT_EQ(run("feedforward --crn " + samples_path("oscillating.crn")), 1);
  EXPECT_EQ(run("frobnicate"), 2);
}
