#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "capplan/cli.hpp"
#include "test_support.hpp"

using capplan::testing::fixture_path;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "capplan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = capplan::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kSolver = CAPPLAN_SOLVER_COMMAND;

}  // namespace

TEST(Cli, PlanFound) {
  CliRun r = run({"plan", "--domain", fixture_path("transport_domain.json"), "--problem",
               fixture_path("transport_problem.json"), "--max-happenings", "3", "--solver-cmd", kSolver});
  ASSERT_EQ(r.code, capplan::cli::kOk) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "plan");
  EXPECT_EQ(j["plan"]["happenings"].size(), 1u);
  EXPECT_EQ(j["plan"]["happenings"][0]["applied"], json::array({"Transport"}));
}

TEST(Cli, NoPlan) {
  CliRun r = run({"plan", "--model", fixture_path("unreachable.json"), "--max-happenings", "2", "--solver-cmd", kSolver});
  ASSERT_EQ(r.code, capplan::cli::kNoPlan) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "noPlan");
  EXPECT_EQ(j["outcomes"].size(), 3u);
  EXPECT_FALSE(j["explanation"]["core"].empty());
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, capplan::cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, capplan::cli::kUsage);
  EXPECT_EQ(run({"plan", "--model", fixture_path("clamp.json"), "--max-happenings", "2"}).code, capplan::cli::kUsage);
  EXPECT_EQ(run({"validate"}).code, capplan::cli::kUsage);
}

TEST(Cli, MissingFileIsIoError) {
  EXPECT_EQ(run({"validate", "--model", "/nonexistent/model.json"}).code, capplan::cli::kIoError);
}

TEST(Cli, InvalidModel) {
  std::string path = ::testing::TempDir() + "capplan_bad_model.json";
  {
    std::ofstream f(path);
    f << R"({"capabilities": []})";
  }
  EXPECT_EQ(run({"validate", "--model", path}).code, capplan::cli::kInvalidModel);
  {
    std::ofstream f(path);
    f << "{ not json";
  }
  EXPECT_EQ(run({"validate", "--model", path}).code, capplan::cli::kInvalidModel);
}

TEST(Cli, ValidateAndSynonymy) {
  CliRun r = run({"validate", "--model", fixture_path("clamp.json")});
  ASSERT_EQ(r.code, capplan::cli::kOk) << r.err;
  CliRun s = run({"explain-synonymy", "--model", fixture_path("clamp.json"), "--format", "text"});
  ASSERT_EQ(s.code, capplan::cli::kOk) << s.err;
  EXPECT_NE(s.out.find("ClampedAfter"), std::string::npos);
}

TEST(Cli, DumpSmt) {
  CliRun r = run({"dump-smt", "--model", fixture_path("transport_bare.json"), "--bound", "0"});
  ASSERT_EQ(r.code, capplan::cli::kOk) << r.err;
  EXPECT_NE(r.out.find("(declare-const |ProductPositionAfter#t0#l1| Real)"), std::string::npos);
  std::string path = ::testing::TempDir() + "capplan_empty_model.json";
  {
    std::ofstream f(path);
    f << R"({"capabilities": [{"id": "Req", "kind": "required"}]})";
  }
  CliRun e = run({"dump-smt", "--model", path, "--bound", "2"});
  ASSERT_EQ(e.code, capplan::cli::kOk) << e.err;
  EXPECT_EQ(e.out.find("declare-const"), std::string::npos);
  EXPECT_NE(e.out.find("(check-sat)"), std::string::npos);
}

TEST(Cli, CheckAcceptsAndRejects) {
  CliRun planned = run({"plan", "--domain", fixture_path("chained_domain.json"), "--problem",
                     fixture_path("transport_problem.json"), "--max-happenings", "3", "--solver-cmd", kSolver});
  ASSERT_EQ(planned.code, capplan::cli::kOk) << planned.err;
  std::string path = ::testing::TempDir() + "capplan_plan.json";
  {
    std::ofstream f(path);
    f << planned.out;
  }
  CliRun ok = run({"check", "--domain", fixture_path("chained_domain.json"), "--problem",
                fixture_path("transport_problem.json"), "--plan", path});
  EXPECT_EQ(ok.code, capplan::cli::kOk) << ok.out << ok.err;

  json doc = json::parse(planned.out)["plan"];
  doc["happenings"][0]["layer1"]["AGVPosition"] = "99";
  {
    std::ofstream f(path);
    f << doc.dump();
  }
  CliRun bad = run({"check", "--domain", fixture_path("chained_domain.json"), "--problem",
                 fixture_path("transport_problem.json"), "--plan", path});
  EXPECT_EQ(bad.code, capplan::cli::kViolations) << bad.out << bad.err;
}
