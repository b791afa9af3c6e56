#include "rectpcp/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "rectpcp/f2_linalg.hpp"

using namespace rectpcp;
using rectpcp::cli::Json;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("rectpcp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name, const std::string& text = {}) const {
    const auto p = (path_ / name).string();
    if (!text.empty()) std::ofstream(p) << text;
    return p;
  }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

std::string matrix_text(const BitMatrix& m) {
  std::ostringstream os;
  write_text(os, m);
  return os.str();
}

}  // namespace

TEST(CliCheck, BlrRectangularAndSmooth) {
  const Outcome r = run({"--json", "check", "--verifier", "blr", "--m", "4", "--props", "rectangular,smooth"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  const Json j = r.json();
  EXPECT_EQ(j["schema"], "rectpcp.check/1");
  EXPECT_TRUE(j["ok"].get<bool>());
  ASSERT_EQ(j["checks"].size(), 2u);
  EXPECT_EQ(j["checks"][1]["min"]["probability"], "1/16");
}

TEST(CliCheck, LineRnlOverGf2) {
  const Outcome r = run({"check", "--verifier", "line", "--m", "7", "--field", "2", "--props", "rnl"});
  EXPECT_EQ(r.code, cli::kPass) << r.err;
  EXPECT_NE(r.out.find("rnl: pass"), std::string::npos);
}

TEST(CliCheck, BlrHasNoListingAgents) {
  const Outcome r = run({"--json", "check", "--verifier", "blr", "--m", "4", "--props", "rnl"});
  EXPECT_EQ(r.code, cli::kCheckFailed);
  EXPECT_FALSE(r.json()["checks"][0]["witness"].is_null());
}

TEST(CliCheck, SmoothifyBlrFailsWithEvidence) {
  const Outcome r = run({"--json", "check", "--verifier", "blr", "--m", "4", "--transform", "smoothify", "--props", "smooth"});
  EXPECT_EQ(r.code, cli::kCheckFailed);
  const Json j = r.json();
  EXPECT_EQ(j["kind"], "precondition");
  EXPECT_EQ(j["evidence"]["property"], "rnl");
}

TEST(CliCheck, SmoothifiedShiftToyPassesRecheck) {
  const Outcome r = run({"--json", "check", "--verifier", "shift", "--param", "q=2", "--transform", "smoothify", "--props",
                     "smooth,rectangular,rop"});
  ASSERT_EQ(r.code, cli::kPass) << r.err << r.out;
  EXPECT_TRUE(r.json()["verifier"]["smooth"].get<bool>());
  // The smoothified verifier comes without listing agents.
  EXPECT_EQ(r.json()["agents"], "none");
}

TEST(CliCheck, AddRopThenRop) {
  const Outcome r = run({"--json", "check", "--verifier", "shift", "--param", "q=4", "--param", "predicate=random", "--transform",
                     "add_rop", "--props", "rop,zero-rop,rnl"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  EXPECT_EQ(r.json()["verifier"]["p"], 4);
}

TEST(CliCheck, RobustHistogramCoversEveryCoin) {
  const Outcome r = run({"--json", "check", "--verifier", "blr", "--m", "4", "--props", "robust"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  const Json j = r.json();
  std::uint64_t total = 0;
  for (const auto& e : j["checks"][0]["histogram"]) total += e["count"].get<std::uint64_t>();
  EXPECT_EQ(total, 256u);
}

TEST(CliPlan, MalformedPlansExitTwoWithPath) {
  TempDir dir;
  const std::vector<std::pair<std::string, std::string>> cases{
      {R"({"verifier":{"kind":"blr","params":{"m":4,"mm":2}}})", "/verifier/params/mm"},
      {R"({"verifier":{"kind":"blr","params":{"m":"4"}}})", "/verifier/params/m"},
      {R"({"verifier":{"kind":"blr"}})", "/verifier/params/m"},
      {R"({"verifier":{"kind":"nope"}})", "/verifier/kind"},
      {R"({"verifier":{"kind":"blr","params":{"m":4}},"extra":1})", "/extra"},
      {R"({"verifier":{"kind":"blr","params":{"m":4}},"transforms":[{"name":"smoothify","params":{"mu":"x"}}]})",
       "/transforms/0/params/mu"},
      {R"({"verifier":{"kind":"blr","params":{"m":4}},"checks":["rectangular","bogus"]})", "/checks/1"},
      {R"({"verifier":{"kind":"blr","params":{"m":4}},"outputs":{"log":"x"}})", "/outputs/log"},
  };
  for (const auto& [doc, path] : cases) {
    const Outcome r = run({"check", "--plan", dir.file("plan.json", doc)});
    EXPECT_EQ(r.code, cli::kUsage) << doc;
    EXPECT_NE(r.err.find("schema error at " + path + ":"), std::string::npos) << r.err;
  }
  const Outcome bad = run({"check", "--plan", dir.file("bad.json", "{not json")});
  EXPECT_EQ(bad.code, cli::kUsage);
}

TEST(CliPlan, PlanFileRunsTransformsChecksAndOutputs) {
  TempDir dir;
  const std::string report = dir.file("report.json");
  const std::string plan = dir.file("plan.json", R"({"verifier":{"kind":"shift","params":{"q":4,"predicate":"equal"}},)"
                                                 R"("transforms":[{"name":"add_rop","params":{"seed":3}}],)"
                                                 R"("checks":["rop","rectangular"],"outputs":{"report":")" +
                                                     report + R"("}})");
  const Outcome r = run({"--json", "check", "--plan", plan});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  std::ifstream is(report);
  std::stringstream ss;
  ss << is.rdbuf();
  EXPECT_EQ(ss.str(), r.out);
}

TEST(CliTransform, IdentityPlanRoundtrips) {
  TempDir dir;
  const std::string t1 = dir.file("t1.json"), t2 = dir.file("t2.json");
  const Outcome a = run({"--json", "transform", "--verifier", "blr", "--m", "4", "--transform", "identity", "--out", t1});
  ASSERT_EQ(a.code, cli::kPass) << a.err;
  EXPECT_EQ(a.json()["honest_acceptance"], "1");
  const Outcome b = run({"--json", "transform", "--verifier", "table", "--param", "path=" + t1, "--out", t2});
  ASSERT_EQ(b.code, cli::kPass) << b.err;
  EXPECT_EQ(a.json()["table_digest"], b.json()["table_digest"]);
  std::ifstream x(t1), y(t2);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(x), {}), std::string(std::istreambuf_iterator<char>(y), {}));
}

TEST(CliTransform, SmoothifyCarriesHonestProof) {
  const Outcome r = run({"--json", "transform", "--verifier", "shift", "--param", "q=2", "--param", "predicate=equal", "--transform",
                     "smoothify"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  EXPECT_EQ(r.json()["honest_acceptance"], "1");
  EXPECT_EQ(r.json()["steps"][0]["name"], "smoothify");
}

TEST(CliCount, BackendsAgreeAndIdentity) {
  TempDir dir;
  BitMatrix a(5, 3), b(3, 6);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) a.set(i, j, (i * 7 + j * 3) % 4 < 2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 6; ++j) b.set(i, j, (i + 2 * j) % 3 == 0);
  const Outcome r = run({"--json", "count", "--a", dir.file("a.txt", matrix_text(a)), "--b", dir.file("b.txt", matrix_text(b))});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  EXPECT_EQ(r.json()["naive"], matmul(a, b).weight());
  EXPECT_TRUE(r.json()["agree"].get<bool>());
  EXPECT_FALSE(r.json().contains("timing_ns"));

  const std::string id = dir.file("id.txt", matrix_text(BitMatrix::identity(8)));
  const Outcome i = run({"--json", "count", "--a", id, "--b", id, "--backend", "bucketed"});
  EXPECT_EQ(i.json()["bucketed"], 8);

  const Outcome bad = run({"count", "--a", dir.file("a.txt"), "--b", dir.file("a.txt")});
  EXPECT_EQ(bad.code, cli::kUsage);
}

TEST(CliMaxcut, ThreeRoutesAgreeAndReportsRepeat) {
  const std::vector<std::string> args{"--json", "--seed", "9", "maxcut", "--random", "6,10,5,9", "--rank", "3"};
  const Outcome a = run(args), b = run(args);
  ASSERT_EQ(a.code, cli::kPass) << a.err;
  EXPECT_TRUE(a.json()["agree"].get<bool>());
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run({"--json", "--seed", "10", "maxcut", "--random", "6,10,5,9", "--rank", "3"}).out);
}

TEST(CliMaxcut, GraphFiles) {
  TempDir dir;
  const std::string g = dir.file("g.txt", "2 2\n0 1\n1 0\n");
  const Outcome r = run({"--json", "maxcut", "--g1", g, "--g2", g, "--rank", "1"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  EXPECT_EQ(r.json()["g1"]["m"], 2);
  EXPECT_EQ(run({"maxcut", "--g1", g}).code, cli::kUsage);
  EXPECT_EQ(run({"maxcut", "--g1", dir.file("bad.txt", "2 1\n0 5\n"), "--g2", g}).code, cli::kUsage);
}

TEST(CliPipeline, RefuterMatchesEmulateIndependentOfThreads) {
  const std::vector<std::string> base{"pipeline", "--verifier", "shift", "--param", "q=4", "--param", "predicate=random",
                                      "--param", "shared_row=1", "--param", "shared_col=1", "--transform", "add_rop", "--rho", "2"};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), base.begin(), base.end());
    return run(head);
  };
  const Outcome one = with({"--json", "--threads", "1"}), three = with({"--json", "--threads", "3"});
  ASSERT_EQ(one.code, cli::kPass) << one.err;
  EXPECT_TRUE(one.json()["exact_match"].get<bool>());
  EXPECT_EQ(one.out, three.out);
}

TEST(CliPipeline, ExtractAndDecideOnIdentityToy) {
  const Outcome e = run({"--json", "pipeline", "--verifier", "identity", "--param", "a=2", "--param", "soundness=7/8", "--mode", "extract"});
  ASSERT_EQ(e.code, cli::kPass) << e.err;
  EXPECT_EQ(e.json()["extract"]["outcome"], "all-rigid");
  const Outcome d = run({"--json", "pipeline", "--verifier", "identity", "--param", "a=1", "--param", "soundness=1", "--mode", "decide", "--rho", "2"});
  ASSERT_EQ(d.code, cli::kPass) << d.err;
  EXPECT_TRUE(d.json()["decide"]["accept"].get<bool>());
}

TEST(CliRigidity, IdentityFourScan) {
  const Outcome r = run({"--json", "rigidity", "--identity", "4", "--max-rho", "3"});
  ASSERT_EQ(r.code, cli::kPass) << r.err;
  const Json j = r.json();
  EXPECT_EQ(j["schema"], "rectpcp.rigidity/1");
  std::vector<std::size_t> d;
  for (const auto& row : j["table"]) d.push_back(row["distance"].get<std::size_t>());
  EXPECT_EQ(d, (std::vector<std::size_t>{4, 3, 2, 1}));
  EXPECT_EQ(run({"rigidity"}).code, cli::kUsage);
}

TEST(CliExitCodes, UsageGuardAndHelp) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"check", "--verifier", "blr", "--m", "5"}).code, cli::kUsage);
  EXPECT_EQ(run({"check", "--verifier", "shift", "--param", "a_row=13", "--param", "a_col=13"}).code, cli::kGuard);
  EXPECT_EQ(run({"--help"}).code, cli::kPass);
  const Outcome quiet = run({"--quiet", "check", "--verifier", "blr", "--m", "2"});
  EXPECT_EQ(quiet.code, cli::kPass);
  EXPECT_TRUE(quiet.out.empty());
}

TEST(CliSeed, EnvironmentDefault) {
  const std::vector<std::string> args{"--json", "maxcut", "--random", "4,6,4,6"};
  ::setenv("RECTPCP_SEED", "9", 1);
  const Outcome env = run(args);
  ::setenv("RECTPCP_SEED", "abc", 1);
  const Outcome bad = run(args);
  ::unsetenv("RECTPCP_SEED");
  EXPECT_EQ(env.json()["seed"], 9);
  EXPECT_EQ(env.out, run({"--json", "--seed", "9", "maxcut", "--random", "4,6,4,6"}).out);
  EXPECT_EQ(bad.code, cli::kUsage);
}
