#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "factlink/corpus_store.hpp"
#include "test_support.hpp"

namespace factlink {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  CliTest() { testing::copy_fixtures(data()); }

  std::filesystem::path data() const { return tmp_ / "data"; }

  Outcome run(std::vector<std::string> args, bool with_data = true) {
    std::vector<std::string> full = {"factlink"};
    if (with_data) {
      full.push_back("--data");
      full.push_back(data().string());
    }
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
  }

  testing::TempDir tmp_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"match", "--method", "magic"}).code, cli::kUsage);
  EXPECT_EQ(run({"monitor", "run"}).code, cli::kUsage);
  auto r = run({"eval", "presence", "--assert", "overall_acc ~ 3"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("error: "), std::string::npos);
}

TEST_F(CliTest, HelpForEverySubcommand) {
  for (std::vector<std::string> cmd :
       {std::vector<std::string>{}, {"import"}, {"monitor", "run"}, {"index", "build"}, {"match"}, {"stance", "train"},
        {"stance", "finetune"}, {"stance", "predict"}, {"aggregate", "veracity"}, {"eval", "presence"},
        {"eval", "stance"}, {"eval", "cv"}, {"serve"}, {"report"}}) {
    cmd.push_back("--help");
    auto r = run(cmd);
    EXPECT_EQ(r.code, 0) << cmd.front();
    EXPECT_NE(r.out.find("Usage"), std::string::npos) << cmd.front();
  }
}

TEST_F(CliTest, DataErrors) {
  auto r = run({"--data", (tmp_ / "missing").string(), "match"}, false);
  EXPECT_EQ(r.code, cli::kDataError);
  testing::write_text(tmp_ / "bad.jsonl", "{\"id\":\"c1\"}\n");
  r = run({"import", "claims", (tmp_ / "bad.jsonl").string()});
  EXPECT_EQ(r.code, cli::kDataError);
  EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST_F(CliTest, ImportIsIdempotent) {
  testing::write_text(tmp_ / "new.jsonl", R"({"id":"c99","statement":"Onions cure flu.","rating":"false","fact_checker_id":"fc-healthcheck"})"
                                          "\n");
  ASSERT_EQ(run({"import", "claims", (tmp_ / "new.jsonl").string()}).code, 0);
  ASSERT_EQ(run({"import", "claims", (tmp_ / "new.jsonl").string()}).code, 0);
  CorpusStore store;
  store.load(data());
  EXPECT_TRUE(store.claim("c99"));
  CorpusStore fixture;
  fixture.load(testing::fixture_dir());
  EXPECT_EQ(store.size(RecordKind::Claims), fixture.size(RecordKind::Claims) + 1);
}

TEST_F(CliTest, EvalPresenceAssertions) {
  auto r = run({"eval", "presence", "--method", "irse", "--assert", "overall_acc>=ir,se"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("assert overall_acc>=ir"), std::string::npos);
  r = run({"eval", "presence", "--method", "se", "--assert", "overall_acc>=irse"});
  EXPECT_EQ(r.code, cli::kAssertFailed) << r.out;
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  r = run({"eval", "presence", "--method", "ir", "--assert", "overall_acc>0.5"});
  EXPECT_EQ(r.code, 0);
}

TEST_F(CliTest, EvalPresenceWritesMetricsAndRoc) {
  auto r = run({"eval", "presence", "--method", "ir", "--metrics-out", (tmp_ / "m.json").string(), "--roc-out",
                (tmp_ / "roc.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto metrics = Json::parse(testing::read_text(tmp_ / "m.json"));
  EXPECT_TRUE(metrics["ir"]["splits"].contains("overall"));
  auto roc = testing::read_text(tmp_ / "roc.csv");
  EXPECT_EQ(roc.rfind("threshold,fpr,tpr\ninf,0,0\n", 0), 0u);
}

TEST_F(CliTest, CalibratedThresholdReachesRecall) {
  auto r = run({"eval", "presence", "--method", "ir", "--target-recall", "0.4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("calibrated threshold"), std::string::npos);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  testing::write_text(tmp_ / "cfg.ini", "# defaults\nmethod = ir\npresence.threshold = 0.99\n");
  auto r = run({"--config", (tmp_ / "cfg.ini").string(), "eval", "presence"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("method ir, threshold 0.990"), std::string::npos) << r.out;
  // Command-line values win over the file.
  r = run({"--config", (tmp_ / "cfg.ini").string(), "eval", "presence", "--threshold", "0.5"});
  EXPECT_NE(r.out.find("threshold 0.500"), std::string::npos) << r.out;
  testing::write_text(tmp_ / "bad.ini", "colour = red\n");
  EXPECT_EQ(run({"--config", (tmp_ / "bad.ini").string(), "eval", "presence"}).code, cli::kUsage);
}

TEST_F(CliTest, MatchIsReproducible) {
  auto a = run({"match", "--method", "irse", "--jobs", "4"});
  auto b = run({"match", "--method", "irse", "--jobs", "1"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(a.out.empty());
}

TEST_F(CliTest, StanceTrainPredictAndReport) {
  auto model = (tmp_ / "model.txt").string();
  auto t1 = run({"stance", "train", "--epochs", "50", "--out", model});
  ASSERT_EQ(t1.code, 0) << t1.err;
  auto first = testing::read_text(model);
  ASSERT_EQ(run({"stance", "train", "--epochs", "50", "--out", model}).code, 0);
  EXPECT_EQ(testing::read_text(model), first);

  auto fnc = (testing::fixture_dir() / "fnc").string();
  auto pre = (tmp_ / "pre.txt").string();
  ASSERT_EQ(run({"stance", "train", "--fnc-stances", fnc + "/stances.csv", "--fnc-bodies", fnc + "/bodies.csv",
                 "--epochs", "20", "--out", pre})
                .code,
            0);
  auto ft = run({"stance", "finetune", "--model", pre, "--epochs", "20", "--out", model});
  ASSERT_EQ(ft.code, 0) << ft.err;
  EXPECT_NE(ft.out.find("-> finetune:"), std::string::npos);

  ASSERT_EQ(run({"match", "--method", "irse", "--save"}).code, 0);
  auto pr = run({"stance", "predict", "--model", model, "--save"});
  ASSERT_EQ(pr.code, 0) << pr.err;
  ASSERT_EQ(run({"aggregate", "veracity", "--save"}).code, 0);
  auto rep = run({"report", "--out", (tmp_ / "report.json").string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("pair veracity"), std::string::npos);
  EXPECT_TRUE(Json::parse(testing::read_text(tmp_ / "report.json")).contains("stance"));
}

TEST_F(CliTest, EvalCrossValidation) {
  auto r = run({"eval", "cv", "--k", "3", "--repeats", "2", "--epochs", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("folds 6"), std::string::npos) << r.out;
  auto again = run({"eval", "cv", "--k", "3", "--repeats", "2", "--epochs", "20", "--jobs", "3"});
  EXPECT_EQ(r.out, again.out);
}

TEST_F(CliTest, MonitorRunIngestsFeeds) {
  auto ingest = (data() / "ingest").string();
  auto r = run({"monitor", "run", "--now", "1665000000", "--monitors", ingest + "/monitors.json", "--ratings",
                ingest + "/rating_map.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = Json::parse(r.out);
  ASSERT_EQ(report["runs"].size(), 2u);
  EXPECT_EQ(report["runs"][0]["new"], 3);
  auto again = run({"monitor", "run", "--now", "1665000100", "--monitors", ingest + "/monitors.json"});
  EXPECT_EQ(Json::parse(again.out)["runs"].size(), 0u);
}

TEST_F(CliTest, IndexBuild) {
  auto r = run({"index", "build"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto stats = Json::parse(testing::read_text(data() / "index.json"));
  EXPECT_FALSE(stats.empty());
}

}  // namespace
}  // namespace factlink
