#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "factlink/errors.hpp"
#include "factlink/veracity.hpp"
#include "test_support.hpp"

namespace factlink {
namespace {

using R = VeracityRating;

TEST(Combine, FullTable) {
  struct Row {
    R rating;
    R supporting, contradicting, neutral;
  };
  const Row table[] = {
      {R::False, R::False, R::True, R::Unknown},
      {R::MostlyFalse, R::MostlyFalse, R::MostlyTrue, R::Unknown},
      {R::Mixture, R::Mixture, R::Mixture, R::Unknown},
      {R::MostlyTrue, R::MostlyTrue, R::MostlyFalse, R::Unknown},
      {R::True, R::True, R::False, R::Unknown},
      {R::Unknown, R::Unknown, R::Unknown, R::Unknown},
  };
  for (const auto& row : table) {
    EXPECT_EQ(combine(Stance::Supporting, row.rating), row.supporting) << to_string(row.rating);
    EXPECT_EQ(combine(Stance::Contradicting, row.rating), row.contradicting) << to_string(row.rating);
    EXPECT_EQ(combine(Stance::Neutral, row.rating), row.neutral) << to_string(row.rating);
  }
}

TEST(Combine, OppositeIsAnInvolution) {
  for (auto r : kAllRatings) EXPECT_EQ(opposite(opposite(r)), r);
}

TEST(Percent, RoundsHalfUp) {
  EXPECT_EQ(percent(1, 8, 1), 12.5);
  EXPECT_EQ(percent(1, 16, 1), 6.3);  // 6.25
  EXPECT_EQ(percent(1, 3, 2), 33.33);
  EXPECT_EQ(percent(2, 3, 0), 67.0);
  EXPECT_EQ(percent(0, 0, 1), 0.0);
  EXPECT_EQ(percent(5, 5, 3), 100.0);
}

TEST(Percent, WithinHalfAUnitOfExact) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 5000; ++trial) {
    std::size_t total = 1 + rng() % 1000, count = rng() % (total + 1);
    int d = static_cast<int>(rng() % 4);
    const double exact = 100.0 * static_cast<double>(count) / static_cast<double>(total);
    ASSERT_LE(std::abs(percent(count, total, d) - exact), 0.5 * std::pow(10.0, -d) + 1e-9);
  }
}

TEST(Rollup, Categories) {
  EXPECT_EQ(rollup(std::vector<R>{R::True, R::MostlyTrue}), ArticleRollup::OnlyTrue);
  EXPECT_EQ(rollup(std::vector<R>{R::True, R::Unknown}), ArticleRollup::OnlyTrue);
  EXPECT_EQ(rollup(std::vector<R>{R::MostlyFalse}), ArticleRollup::OnlyFalse);
  EXPECT_EQ(rollup(std::vector<R>{R::True, R::False}), ArticleRollup::Mixed);
  EXPECT_EQ(rollup(std::vector<R>{R::Mixture, R::Unknown}), ArticleRollup::UnknownOnly);
  EXPECT_EQ(rollup(std::vector<R>{}), ArticleRollup::UnknownOnly);
}

TEST(PairVeracities, RecomputedAndFiltered) {
  std::vector<Claim> claims = {testing::claim("c1", "x", R::False), testing::claim("c2", "y", R::MostlyTrue)};
  std::vector<PairLabel> labels = {
      {"a1", "c1", Presence::Present, Stance::Contradicting, Origin::Manual, {}, R::False},
      {"a1", "c2", Presence::Suggestive, Stance::Supporting, Origin::Manual, {}, {}},
      {"a2", "c1", Presence::NotPresent, std::nullopt, Origin::Manual, {}, {}},
      {"a2", "c9", Presence::Present, Stance::Supporting, Origin::Manual, {}, {}},
  };
  auto v = pair_veracities(labels, claims);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].value, R::True);
  EXPECT_EQ(v[1].value, R::MostlyTrue);
}

TEST(LabelReport, CountsAndPercentages) {
  std::vector<Source> sources = {{"good", "G", "", Reliability::Reliable, SourceKind::NewsOrBlog},
                                 {"bad", "B", "", Reliability::Unreliable, SourceKind::NewsOrBlog}};
  std::vector<Article> articles = {testing::article("a1", "t", "b."), testing::article("a2", "t", "b."),
                                   testing::article("a3", "t", "b.")};
  articles[0].source_id = "good";
  articles[1].source_id = "bad";
  articles[2].source_id = "bad";
  std::vector<Claim> claims = {testing::claim("c1", "x", R::False), testing::claim("c2", "y", R::True)};
  std::vector<PairLabel> labels = {
      {"a1", "c1", Presence::Present, Stance::Contradicting, Origin::Manual, {}, {}},  // true
      {"a2", "c1", Presence::Present, Stance::Supporting, Origin::Manual, {}, {}},     // false
      {"a2", "c2", Presence::Present, Stance::Supporting, Origin::Manual, {}, {}},     // true
      {"a3", "c2", Presence::Present, Stance::Neutral, Origin::Predicted, {}, {}},     // unknown
      {"a3", "c1", Presence::NotPresent, std::nullopt, Origin::Manual, {}, {}},
  };
  auto rep = label_report(labels, claims, articles, sources);
  EXPECT_EQ(rep.stance.total(), 4u);
  EXPECT_EQ(rep.stance.count("supporting"), 2u);
  EXPECT_EQ(rep.stance.percent("supporting", 1), 50.0);
  EXPECT_EQ(rep.veracity.count("true"), 2u);
  EXPECT_EQ(rep.veracity.count("false"), 1u);
  EXPECT_EQ(rep.veracity.count("unknown"), 1u);
  EXPECT_EQ(rep.articles.count("only_true"), 1u);
  EXPECT_EQ(rep.articles.count("mixed"), 1u);
  EXPECT_EQ(rep.articles.count("unknown_only"), 1u);
  EXPECT_EQ(rep.reliability.count("unreliable"), 3u);
  EXPECT_EQ(rep.veracity_by_reliability.at(Reliability::Unreliable).count("false"), 1u);
  EXPECT_THROW(rep.stance.count("bogus"), NotFoundError);

  ReportOptions manual_only;
  manual_only.origin = Origin::Manual;
  EXPECT_EQ(label_report(labels, claims, articles, sources, manual_only).stance.total(), 3u);

  auto j = rep.to_json();
  EXPECT_EQ(j["stance"]["total"], 4);
  EXPECT_NE(rep.to_text().find("pair veracity"), std::string::npos);
}

TEST(LabelReport, PercentagesSumNearHundred) {
  std::mt19937 rng(6);
  std::vector<Claim> claims;
  for (int c = 0; c < 6; ++c) claims.push_back(testing::claim("c" + std::to_string(c), "x", kAllRatings[c]));
  std::vector<Article> articles;
  for (int a = 0; a < 20; ++a) articles.push_back(testing::article("a" + std::to_string(a), "t", "b."));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PairLabel> labels;
    for (int a = 0; a < 20; ++a)
      for (int c = 0; c < 6; ++c)
        if (rng() % 3 == 0)
          labels.push_back({"a" + std::to_string(a), "c" + std::to_string(c), Presence::Present,
                            kAllStances[rng() % 3], Origin::Manual, {}, {}});
    if (labels.empty()) continue;
    ReportOptions opts;
    opts.decimals = 1;
    auto rep = label_report(labels, claims, articles, {}, opts);
    double sum = 0;
    for (const auto& cat : rep.veracity.categories) sum += rep.veracity.percent(cat, 1);
    ASSERT_NEAR(sum, 100.0, 0.05 * static_cast<double>(rep.veracity.categories.size()));
    ASSERT_EQ(rep.veracity.total(), labels.size());
  }
}

}  // namespace
}  // namespace factlink
