#include <gtest/gtest.h>

#include "factlink/errors.hpp"
#include "factlink/ingestion.hpp"
#include "factlink/xml.hpp"
#include "test_support.hpp"

namespace factlink {
namespace {

std::filesystem::path ingest_dir() { return testing::fixture_dir() / "ingest"; }

TEST(NormalizeUrl, DropsNoise) {
  EXPECT_EQ(normalize_url("HTTPS://Example.ORG:443/a/B?utm_source=x&id=3&fbclid=9#top"), "https://example.org/a/B?id=3");
  EXPECT_EQ(normalize_url("http://example.org:80"), "http://example.org/");
  EXPECT_EQ(normalize_url("http://example.org:8080/x"), "http://example.org:8080/x");
  EXPECT_EQ(normalize_url("https://x.org/p?utm_medium=a&UTM_CAMPAIGN=b"), "https://x.org/p");
}

TEST(NormalizeUrl, Idempotent) {
  for (const char* u : {"HTTPS://Example.ORG:443/a?utm_source=x&id=3#f", "http://x.org", "x.org/a?b=1&gclid=2",
                        "https://a.b/c?&&d=1"}) {
    auto once = normalize_url(u);
    EXPECT_EQ(normalize_url(once), once) << u;
  }
}

TEST(Ids, StableAndSharedAcrossTrackingVariants) {
  EXPECT_EQ(article_id_for_url("https://x.org/a?utm_source=rss"), article_id_for_url("https://X.org/a"));
  EXPECT_NE(article_id_for_url("https://x.org/a"), article_id_for_url("https://x.org/b"));
  // FNV-1a 64 of the empty string.
  EXPECT_EQ(claim_id_for_key(""), "claim-cbf29ce484222325");
  EXPECT_EQ(claim_id_for_key("a"), "claim-af63dc4c8601ec8c");
}

TEST(RssProvider, ParsesFixtureFeed) {
  auto payload = testing::read_text(ingest_dir() / "feeds" / "healthnews.rss");
  ProviderContext ctx;
  ctx.source_id = "src-healthnews";
  auto recs = RssProvider{}.parse(payload, ctx);
  ASSERT_EQ(recs.articles.size(), 3u);
  for (const auto& a : recs.articles) {
    EXPECT_EQ(a.source_id, "src-healthnews");
    EXPECT_FALSE(a.body.empty());
    EXPECT_EQ(a.body.find('<'), std::string::npos);
    EXPECT_EQ(a.id, article_id_for_url(a.url));
  }
  EXPECT_FALSE(recs.articles[0].authors.empty());
  EXPECT_TRUE(recs.articles[0].published_at);
  EXPECT_EQ(recs.articles[1].body.find("script"), std::string::npos);
  EXPECT_FALSE(recs.articles[2].published_at);
  ASSERT_EQ(recs.warnings.size(), 1u);
  EXPECT_NE(recs.warnings[0].find("sometime last week"), std::string::npos);
}

TEST(RssProvider, DeterministicAndRejectsNonRss) {
  auto payload = testing::read_text(ingest_dir() / "feeds" / "healthnews.rss");
  auto a = RssProvider{}.parse(payload, {});
  auto b = RssProvider{}.parse(payload, {});
  EXPECT_EQ(a.articles, b.articles);
  EXPECT_THROW(RssProvider{}.parse("<feed></feed>", {}), ParseError);
  EXPECT_THROW(RssProvider{}.parse("<rss><channel>", {}), ParseError);
}

TEST(RssProvider, OffsetDatesConvertToUtc) {
  auto recs = RssProvider{}.parse(
      "<rss><channel><item><title>T</title><link>https://x.org/1</link><description>B.</description>"
      "<pubDate>Tue, 04 Oct 2022 16:30:00 +0200</pubDate></item></channel></rss>",
      {});
  ASSERT_EQ(recs.articles.size(), 1u);
  EXPECT_EQ(recs.articles[0].published_at, parse_rfc3339("2022-10-04T14:30:00Z"));
}

TEST(ClaimFeedProvider, UnifiesRatingsPerChecker) {
  auto ratings = RatingMap::load(ingest_dir() / "rating_map.json");
  ProviderContext ctx;
  ctx.checker = "fc-healthcheck";
  ctx.ratings = &ratings;
  auto recs = ClaimFeedProvider{}.parse(testing::read_text(ingest_dir() / "feeds" / "claims.jsonl"), ctx);
  ASSERT_EQ(recs.claims.size(), 3u);
  EXPECT_EQ(recs.claims[0].rating, VeracityRating::MostlyFalse);
  EXPECT_EQ(recs.claims[1].rating, VeracityRating::Unknown);
  EXPECT_EQ(recs.claims[2].rating, VeracityRating::False);
  EXPECT_EQ(recs.claims[2].fact_checker_id, "fc-metafacts");
  EXPECT_EQ(recs.claims[0].id, claim_id_for_key("https://healthcheck.example/claims/turmeric"));
}

TEST(ClaimFeedProvider, Errors) {
  ProviderContext ctx;
  ctx.checker = "fc";
  EXPECT_THROW(ClaimFeedProvider{}.parse(R"({"statement":"x","rating":"four pinocchios"})", ctx),
               UnmappedLabelError);
  try {
    ClaimFeedProvider{}.parse("{\"statement\":\"x\",\"rating\":\"false\"}\n{\"rating\":\"false\"}\n", ctx);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "statement");
  }
}

TEST(FullTextProvider, PrefersArticleElement) {
  Article trigger = testing::article("a", "t", "teaser");
  ProviderContext ctx;
  ctx.trigger = &trigger;
  auto recs = FullTextProvider{}.parse(
      "<html><body><nav>Menu</nav><ARTICLE class='x'><p>Full story.</p></ARTICLE></body></html>", ctx);
  ASSERT_EQ(recs.articles.size(), 1u);
  EXPECT_EQ(recs.articles[0].body, "Full story.");
  EXPECT_EQ(recs.articles[0].id, "a");
  recs = FullTextProvider{}.parse("<html><body><p>Only body.</p></body></html>", ctx);
  EXPECT_EQ(recs.articles[0].body, "Only body.");
  EXPECT_TRUE(FullTextProvider{}.parse("<html><body></body></html>", ctx).articles.empty());
  EXPECT_THROW(FullTextProvider{}.parse("<p>x</p>", {}), ValidationError);
}

class IngestorTest : public ::testing::Test {
 protected:
  IngestorTest() : ingestor_(store_, RatingMap::load(ingest_dir() / "rating_map.json"), ingest_dir()) {
    ingestor_.load_config(ingest_dir() / "monitors.json");
  }
  CorpusStore store_;
  Ingestor ingestor_;
};

TEST_F(IngestorTest, FirstRunIngestsAndChains) {
  auto report = ingestor_.run_due_monitors(1'665'000'000);
  ASSERT_EQ(report.runs.size(), 2u);
  const auto& rss = report.runs[0];
  EXPECT_TRUE(rss.errors.empty());
  EXPECT_EQ(rss.new_records, 3u);
  EXPECT_EQ(rss.chained, 3u);
  EXPECT_EQ(report.runs[1].new_records, 3u);
  EXPECT_EQ(store_.size(RecordKind::Articles), 3u);
  EXPECT_EQ(store_.size(RecordKind::Claims), 3u);

  auto turmeric = store_.article(article_id_for_url("https://healthnews.example/2022/10/turmeric-joints"));
  ASSERT_TRUE(turmeric);
  auto page = strip_html(testing::read_text(ingest_dir() / "pages" / "turmeric.html"));
  EXPECT_GT(turmeric->body.size(), 40u);
  EXPECT_NE(page.find(turmeric->body.substr(0, 20)), std::string::npos);
}

TEST_F(IngestorTest, SchedulingRespectsIntervals) {
  const Timestamp t0 = 1'665'000'000;
  ingestor_.run_due_monitors(t0);
  EXPECT_TRUE(ingestor_.run_due_monitors(t0 + 100).runs.empty());
  auto hourly = ingestor_.run_due_monitors(t0 + 3600);
  ASSERT_EQ(hourly.runs.size(), 1u);
  EXPECT_EQ(hourly.runs[0].monitor_id, "healthnews-rss");
  EXPECT_EQ(hourly.runs[0].new_records, 0u);
  EXPECT_EQ(hourly.runs[0].updated, 0u);
  EXPECT_EQ(ingestor_.run_due_monitors(t0 + 86400).runs.size(), 2u);
}

TEST_F(IngestorTest, ReRunKeepsEnrichedBodiesAcrossRestarts) {
  const Timestamp t0 = 1'665'000'000;
  ingestor_.run_due_monitors(t0);
  auto before = store_.articles();
  testing::TempDir dir;
  ingestor_.save_state(dir / "state.json");

  Ingestor again(store_, RatingMap::load(ingest_dir() / "rating_map.json"), ingest_dir());
  again.load_config(ingest_dir() / "monitors.json");
  again.load_state(dir / "state.json");
  EXPECT_TRUE(again.run_due_monitors(t0 + 10).runs.empty());
  auto later = again.run_due_monitors(t0 + 100000);
  for (const auto& r : later.runs) {
    EXPECT_EQ(r.new_records, 0u) << r.monitor_id;
    EXPECT_EQ(r.updated, 0u) << r.monitor_id;
  }
  EXPECT_EQ(store_.articles(), before);
}

TEST_F(IngestorTest, BadFeedStaysInsideItsMonitor) {
  CorpusStore store;
  Ingestor ing(store, RatingMap::defaults(), ".", [](const std::string& loc) -> std::string {
    if (loc == "bad.rss") return "<rss><channel><item>";
    if (loc == "claims.jsonl") return R"({"statement":"S","rating":"false","url":"https://c.org/1"})";
    throw DataError("no such location " + loc);
  });
  Monitor bad{"bad", "rss", 60, Json{{"feeds", {"bad.rss"}}}, {}};
  Monitor good{"good", "claim_feed", 60, Json{{"feeds", {"claims.jsonl"}}, {"checker", "fc"}}, {}};
  ing.add_monitor(bad);
  ing.add_monitor(good);
  auto report = ing.run_due_monitors(0);
  ASSERT_EQ(report.runs.size(), 2u);
  EXPECT_EQ(report.runs[0].errors.size(), 1u);
  EXPECT_NE(report.runs[0].errors[0].find("bad.rss"), std::string::npos);
  EXPECT_TRUE(report.runs[1].errors.empty());
  EXPECT_EQ(store.size(RecordKind::Claims), 1u);
  EXPECT_EQ(store.size(RecordKind::Articles), 0u);
}

TEST_F(IngestorTest, MissingPageIsAWarning) {
  CorpusStore store;
  Ingestor ing(store, RatingMap::defaults(), ".", [](const std::string&) -> std::string {
    return "<rss><channel><item><title>T</title><link>https://x.org/1</link><description>B.</description>"
           "</item></channel></rss>";
  });
  ing.add_monitor(Monitor{"m", "rss", 60, Json{{"feeds", {"f"}}}, {"full_text"}});
  auto run = ing.run_due_monitors(0).runs.at(0);
  EXPECT_TRUE(run.errors.empty());
  EXPECT_EQ(run.chained, 1u);
  ASSERT_EQ(run.warnings.size(), 1u);
  EXPECT_NE(run.warnings[0].find("full_text: no page for"), std::string::npos);
  EXPECT_EQ(store.articles().at(0).body, "B.");
}

TEST_F(IngestorTest, MonitorValidation) {
  EXPECT_THROW(ingestor_.add_monitor(Monitor{"x", "rss", 0, Json::object(), {}}), ValidationError);
  EXPECT_THROW(ingestor_.add_monitor(Monitor{"y", "atom", 60, Json::object(), {}}), ValidationError);
  EXPECT_THROW(ingestor_.add_monitor(Monitor{"z", "rss", 60, Json::object(), {"rss"}}), ValidationError);
  EXPECT_THROW(ingestor_.add_monitor(Monitor{"healthnews-rss", "rss", 60, Json::object(), {}}), ValidationError);
  EXPECT_THROW(Monitor::from_json(Json::parse(R"({"id":"x"})")), ValidationError);
  auto m = Monitor::from_json(ingestor_.monitors()[0].to_json());
  EXPECT_EQ(m.chain, std::vector<std::string>{"full_text"});
}

}  // namespace
}  // namespace factlink
