#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "factlink/errors.hpp"
#include "factlink/presence.hpp"
#include "test_support.hpp"

namespace factlink {
namespace {

// Embeds a token sequence as the vector registered for its first token.
class KeyedEmbedder final : public SentenceEmbedder {
 public:
  explicit KeyedEmbedder(std::map<std::string, std::vector<double>> table, std::size_t dim = 2)
      : table_(std::move(table)), dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed_tokens(std::span<const std::string> tokens) const override {
    if (!tokens.empty())
      if (auto it = table_.find(tokens[0]); it != table_.end()) return EmbeddingVector{it->second};
    return EmbeddingVector{std::vector<double>(dim_, 0.0)};
  }

 private:
  std::map<std::string, std::vector<double>> table_;
  std::size_t dim_;
};

std::vector<double> at_cos(double c) { return {c, std::sqrt(1.0 - c * c)}; }

// Independent IR score: brute-force over claim n-grams.
double ir_oracle(const std::vector<std::string>& claim, const std::vector<std::vector<std::string>>& sentences,
                 const CorpusStats& stats,
                 const std::map<std::string, std::set<std::string>>& alternatives = {},
                 const std::vector<double>* sentence_weight = nullptr) {
  double sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= 3 && n <= claim.size(); ++n) {
    std::vector<std::vector<std::string>> grams;
    for (std::size_t i = 0; i + n <= claim.size(); ++i) {
      std::vector<std::string> g(claim.begin() + static_cast<long>(i), claim.begin() + static_cast<long>(i + n));
      if (std::find(grams.begin(), grams.end(), g) == grams.end()) grams.push_back(g);
    }
    double total = 0.0, hit = 0.0;
    for (const auto& g : grams) {
      std::size_t tf = 0;
      for (std::size_t i = 0; i + n <= claim.size(); ++i)
        if (std::equal(g.begin(), g.end(), claim.begin() + static_cast<long>(i))) ++tf;
      std::string key;
      for (const auto& t : g) key += (key.empty() ? "" : " ") + t;
      const double N = static_cast<double>(stats.document_count());
      const double w = static_cast<double>(tf) * (std::log((N + 1.0) / (static_cast<double>(stats.doc_freq(key)) + 1.0)) + 1.0);
      total += w;
      double best = -1.0;
      for (std::size_t s = 0; s < sentences.size(); ++s) {
        double sw = sentence_weight ? (*sentence_weight)[s] : 1.0;
        if (sw < 0) continue;
        bool all = std::all_of(g.begin(), g.end(), [&](const std::string& term) {
          if (std::find(sentences[s].begin(), sentences[s].end(), term) != sentences[s].end()) return true;
          auto it = alternatives.find(term);
          if (it == alternatives.end()) return false;
          return std::any_of(it->second.begin(), it->second.end(), [&](const std::string& alt) {
            return std::find(sentences[s].begin(), sentences[s].end(), alt) != sentences[s].end();
          });
        });
        if (all) best = std::max(best, sw);
      }
      if (best >= 0) hit += w * best;
    }
    sum += hit / total;
    ++orders;
  }
  return sum / orders;
}

CorpusStats fixture_like_stats() {
  return CorpusStats::from_counts(20, 40.0,
                                  {{"garlic", 3}, {"cures", 2}, {"cancer", 4}, {"tumors", 2}, {"garlic cures", 1},
                                   {"cures cancer", 1}, {"garlic cures cancer", 1}});
}

TEST(ScoreIr, VerbatimIsOneAndDisjointIsZero) {
  auto stats = fixture_like_stats();
  auto claim = PreparedClaim::from_tokens("c", {"garlic", "cures", "cancer"}, nullptr);
  auto verbatim = PreparedArticle::from_sentences("a", {}, {{"some", "intro"}, {"garlic", "cures", "cancer"}}, nullptr);
  EXPECT_DOUBLE_EQ(score_ir(claim, verbatim, stats).score, 1.0);
  EXPECT_EQ(score_ir(claim, verbatim, stats).matched_sentences, std::vector<std::size_t>{1});
  auto disjoint = PreparedArticle::from_sentences("a", {}, {{"football", "scores"}}, nullptr);
  EXPECT_EQ(score_ir(claim, disjoint, stats).score, 0.0);
}

TEST(ScoreIr, PartialMatchAgainstOracle) {
  auto stats = fixture_like_stats();
  auto claim = PreparedClaim::from_tokens("c", {"garlic", "cures", "cancer"}, nullptr);
  auto art = PreparedArticle::from_sentences("a", {}, {{"garlic", "and", "cancer", "studied"}}, nullptr);
  const double g = std::log(21.0 / 4.0) + 1, cu = std::log(21.0 / 3.0) + 1, ca = std::log(21.0 / 5.0) + 1;
  const double expected = (g + ca) / (g + cu + ca) / 3.0;
  EXPECT_NEAR(score_ir(claim, art, stats).score, expected, 1e-12);
  EXPECT_NEAR(expected, ir_oracle({"garlic", "cures", "cancer"}, {{"garlic", "and", "cancer", "studied"}}, stats),
              1e-12);
}

TEST(ScoreIr, SynonymsCountAsMatches) {
  auto stats = fixture_like_stats();
  auto lex = testing::make_lexicon({{"cancer", {1, 0}}, {"tumors", {0.99, std::sqrt(1 - 0.9801)}}, {"garlic", {0, 1}}});
  SynonymConfig cfg;
  cfg.medical_terms = {"cancer"};
  auto claim = PreparedClaim::from_tokens("c", {"garlic", "cures", "cancer"}, nullptr, &cfg, lex.get());
  ASSERT_EQ(claim.alternatives.at("cancer"), std::vector<std::string>{"tumors"});
  auto art = PreparedArticle::from_sentences("a", {}, {{"garlic", "cures", "tumors"}}, nullptr);
  EXPECT_DOUBLE_EQ(score_ir(claim, art, stats).score, 1.0);
  auto plain = PreparedClaim::from_tokens("c", {"garlic", "cures", "cancer"}, nullptr);
  EXPECT_LT(score_ir(plain, art, stats).score, 1.0);
}

TEST(ScoreIr, RandomCasesMatchOracle) {
  std::mt19937 rng(21);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g"};
  for (int trial = 0; trial < 500; ++trial) {
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& w : vocab) df[w] = rng() % 8;
    std::vector<std::string> claim;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 5); i < n; ++i) claim.push_back(vocab[rng() % vocab.size()]);
    for (std::size_t i = 0; i + 1 < claim.size(); ++i) df[claim[i] + " " + claim[i + 1]] = rng() % 3;
    auto stats = CorpusStats::from_counts(10, 10.0, df);
    std::vector<std::vector<std::string>> sentences;
    for (int s = 0, n = 1 + static_cast<int>(rng() % 4); s < n; ++s) {
      std::vector<std::string> sent;
      for (int i = 0, m = 1 + static_cast<int>(rng() % 5); i < m; ++i) sent.push_back(vocab[rng() % vocab.size()]);
      sentences.push_back(sent);
    }
    auto pc = PreparedClaim::from_tokens("c", claim, nullptr);
    auto pa = PreparedArticle::from_sentences("a", {}, sentences, nullptr);
    ASSERT_NEAR(score_ir(pc, pa, stats).score, ir_oracle(claim, sentences, stats), 1e-12);
  }
}

TEST(ScoreSe, HandSetVectors) {
  KeyedEmbedder emb({{"claim", {1, 0}}, {"title", at_cos(0.8)}, {"s1", at_cos(0.6)}, {"s2", at_cos(0.2)}});
  auto claim = PreparedClaim::from_tokens("c", {"claim"}, &emb);
  auto art = PreparedArticle::from_sentences("a", {"title"}, {{"s1"}, {"s2"}}, &emb);
  EXPECT_NEAR(score_se(claim, art, 5).score, 0.5 * 0.8 + 0.5 * 0.4, 1e-12);
  EXPECT_NEAR(score_se(claim, art, 1).score, 0.5 * 0.8 + 0.5 * 0.6, 1e-12);
}

TEST(ScoreSe, IdenticalAndOrthogonal) {
  KeyedEmbedder emb({{"claim", {1, 0}}, {"ortho", {0, 1}}});
  auto claim = PreparedClaim::from_tokens("c", {"claim"}, &emb);
  auto same = PreparedArticle::from_sentences("a", {"claim"}, {{"claim"}, {"claim"}}, &emb);
  EXPECT_NEAR(score_se(claim, same, 5).score, 1.0, 1e-12);
  auto ortho = PreparedArticle::from_sentences("a", {"ortho"}, {{"ortho"}, {"ortho"}}, &emb);
  EXPECT_NEAR(score_se(claim, ortho, 5).score, 0.0, 1e-12);
  auto empty = PreparedArticle::from_sentences("a", {"ortho"}, {}, &emb);
  EXPECT_THROW(score_se(claim, empty, 5), ValidationError);
}

TEST(ScoreIrse, VerbatimWithIdenticalEmbeddingIsOne) {
  KeyedEmbedder emb({{"garlic", {1, 0}}});
  auto stats = fixture_like_stats();
  auto claim = PreparedClaim::from_tokens("c", {"garlic", "cures", "cancer"}, &emb);
  auto art = PreparedArticle::from_sentences("a", {"garlic"}, {{"garlic", "cures", "cancer"}}, &emb);
  EXPECT_NEAR(score_irse(claim, art, stats, PresenceConfig::defaults(PresenceMethod::IRSE)).score, 1.0, 1e-12);
}

TEST(ScoreIrse, PrefilterExcludesEverything) {
  KeyedEmbedder emb({{"garlic", {1, 0}}, {"low", at_cos(0.2)}});
  auto stats = fixture_like_stats();
  auto claim = PreparedClaim::from_tokens("c", {"garlic", "cures", "cancer"}, &emb);
  auto art = PreparedArticle::from_sentences("a", {"low"}, {{"low", "garlic", "cures", "cancer"}}, &emb);
  EXPECT_EQ(score_irse(claim, art, stats, PresenceConfig::defaults(PresenceMethod::IRSE)).score, 0.0);
  EXPECT_DOUBLE_EQ(score_ir(claim, art, stats).score, 1.0);
}

TEST(ScoreIrse, SingleMatchingSentenceScalesIr) {
  KeyedEmbedder emb({{"garlic", {1, 0}}, {"m", at_cos(0.5)}});
  auto stats = fixture_like_stats();
  auto claim = PreparedClaim::from_tokens("c", {"garlic", "cures", "cancer"}, &emb);
  auto art = PreparedArticle::from_sentences("a", {"t"}, {{"m", "garlic", "and", "cancer"}}, &emb);
  const double ir = score_ir(claim, art, stats).score;
  EXPECT_GT(ir, 0.0);
  EXPECT_NEAR(score_irse(claim, art, stats, PresenceConfig::defaults(PresenceMethod::IRSE)).score, 0.5 * ir, 1e-12);
}

TEST(ScoreIrse, OracleWithCutoff) {
  // Sentence cosines 0.9, 0.3, 0.6; title cosine 0.1; K=5 -> cutoff = max(0.05 + 0.3, 0.25) = 0.35.
  KeyedEmbedder emb({{"q", {1, 0}}, {"t", at_cos(0.1)}, {"s0", at_cos(0.9)}, {"s1", at_cos(0.3)}, {"s2", at_cos(0.6)}});
  auto stats = CorpusStats::from_counts(10, 10, {{"x", 2}, {"y", 3}, {"z", 1}});
  std::vector<std::vector<std::string>> sents = {{"s0", "x"}, {"s1", "y", "z"}, {"s2", "y"}};
  auto claim = PreparedClaim::from_tokens("c", {"q", "x", "y", "z"}, &emb);
  auto art = PreparedArticle::from_sentences("a", {"t"}, sents, &emb);
  std::vector<double> weights = {0.9, -1.0, 0.6};
  const double expected = ir_oracle({"q", "x", "y", "z"}, sents, stats, {}, &weights);
  EXPECT_NEAR(score_irse(claim, art, stats, PresenceConfig::defaults(PresenceMethod::IRSE)).score, expected, 1e-12);
}

struct RandomPair {
  std::vector<std::string> claim;
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> title;
};

RandomPair random_pair(std::mt19937& rng, const std::vector<std::string>& vocab) {
  RandomPair p;
  for (int i = 0, n = 1 + static_cast<int>(rng() % 5); i < n; ++i) p.claim.push_back(vocab[rng() % vocab.size()]);
  for (int s = 0, n = 1 + static_cast<int>(rng() % 7); s < n; ++s) {
    std::vector<std::string> sent;
    for (int i = 0, m = 1 + static_cast<int>(rng() % 8); i < m; ++i) sent.push_back(vocab[rng() % vocab.size()]);
    p.sentences.push_back(sent);
  }
  for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) p.title.push_back(vocab[rng() % vocab.size()]);
  return p;
}

class ScoreProperties : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937 rng(99);
    std::normal_distribution<double> n(0, 1);
    auto lex = std::make_shared<Lexicon>();
    for (int i = 0; i < 12; ++i) {
      vocab.push_back("w" + std::to_string(i));
      std::vector<double> v(6);
      for (auto& x : v) x = n(rng);
      lex->add(vocab.back(), v);
    }
    vocab.push_back("oov");
    embedder = std::make_shared<WordAverageEmbedder>(lex);
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& w : vocab) df[w] = rng() % 30;
    stats = CorpusStats::from_counts(30, 20, df);
  }
  std::vector<std::string> vocab;
  std::shared_ptr<WordAverageEmbedder> embedder;
  CorpusStats stats;
};

TEST_F(ScoreProperties, BoundsOrderingAndReorderInvariance) {
  std::mt19937 rng(5);
  const auto cfg = PresenceConfig::defaults(PresenceMethod::IRSE);
  for (int trial = 0; trial < 400; ++trial) {
    auto p = random_pair(rng, vocab);
    auto claim = PreparedClaim::from_tokens("c", p.claim, embedder.get());
    auto art = PreparedArticle::from_sentences("a", p.title, p.sentences, embedder.get());
    const double ir = score_ir(claim, art, stats).score, irse = score_irse(claim, art, stats, cfg).score,
                 se = score_se(claim, art, cfg.top_sentences).score;
    ASSERT_GE(ir, 0.0);
    ASSERT_LE(ir, 1.0);
    ASSERT_GE(irse, 0.0);
    ASSERT_LE(irse, ir + 1e-12);

    auto shuffled = p.sentences;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto art2 = PreparedArticle::from_sentences("a", p.title, shuffled, embedder.get());
    ASSERT_NEAR(score_ir(claim, art2, stats).score, ir, 1e-12);
    ASSERT_NEAR(score_irse(claim, art2, stats, cfg).score, irse, 1e-12);
    ASSERT_NEAR(score_se(claim, art2, cfg.top_sentences).score, se, 1e-12);
  }
}

TEST_F(ScoreProperties, AppendingClaimNeverLowersScores) {
  std::mt19937 rng(6);
  const auto cfg = PresenceConfig::defaults(PresenceMethod::IRSE);
  for (int trial = 0; trial < 400; ++trial) {
    auto p = random_pair(rng, vocab);
    auto claim = PreparedClaim::from_tokens("c", p.claim, embedder.get());
    auto before = PreparedArticle::from_sentences("a", p.title, p.sentences, embedder.get());
    auto with = p.sentences;
    with.push_back(p.claim);
    auto after = PreparedArticle::from_sentences("a", p.title, with, embedder.get());
    ASSERT_GE(score_ir(claim, after, stats).score, score_ir(claim, before, stats).score - 1e-12);
    ASSERT_GE(score_se(claim, after, 5).score, score_se(claim, before, 5).score - 1e-12);
    ASSERT_GE(score_irse(claim, after, stats, cfg).score, score_irse(claim, before, stats, cfg).score - 1e-12);
  }
}

TEST(Classify, InclusiveThreshold) {
  auto cfg = PresenceConfig::defaults(PresenceMethod::IRSE);
  EXPECT_EQ(classify({0.45, {}}, cfg).decision, Decision::Present);
  EXPECT_EQ(classify({0.449, {}}, cfg).decision, Decision::NotPresent);
  for (auto m : {PresenceMethod::IR, PresenceMethod::SE, PresenceMethod::IRSE})
    EXPECT_EQ(classify({1.0, {}}, PresenceConfig::defaults(m)).decision, Decision::Present);
  EXPECT_EQ(default_threshold(PresenceMethod::IR), 0.5);
  EXPECT_EQ(default_threshold(PresenceMethod::SE), 0.5);
  EXPECT_EQ(default_threshold(PresenceMethod::IRSE), 0.45);
  EXPECT_EQ(cfg.prefilter_threshold, 0.25);
}

TEST(Classify, MonotoneInScore) {
  auto cfg = PresenceConfig::defaults(PresenceMethod::IR);
  bool seen_present = false;
  for (int i = 0; i <= 1000; ++i) {
    bool present = classify({i / 1000.0, {}}, cfg).decision == Decision::Present;
    if (seen_present) EXPECT_TRUE(present);
    seen_present = seen_present || present;
  }
}

TEST(PresenceConfig, Validation) {
  PresenceConfig c;
  c.threshold = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.top_sentences = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_THROW(parse_presence_method("bm25"), ValidationError);
  EXPECT_EQ(parse_presence_method("irse"), PresenceMethod::IRSE);
}

TEST(Candidates, TwoThirdsCutoff) {
  auto kept = two_thirds_cutoff({{"a", 10}, {"b", 7}, {"c", 6.5}, {"d", 2}});
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].first, "a");
  EXPECT_EQ(kept[1].first, "b");
  EXPECT_EQ(two_thirds_cutoff({{"only", 3}}).size(), 1u);
  EXPECT_TRUE(two_thirds_cutoff({}).empty());
}

TEST(Candidates, TopScoringAlwaysKept) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.01, 50);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::pair<std::string, double>> ranked;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 10); i < n; ++i) ranked.emplace_back("a" + std::to_string(i), u(rng));
    auto best = *std::max_element(ranked.begin(), ranked.end(), [](auto& x, auto& y) { return x.second < y.second; });
    auto kept = two_thirds_cutoff(ranked);
    ASSERT_FALSE(kept.empty());
    ASSERT_EQ(kept[0], best);
  }
}

TEST(Candidates, RetrievalFromIndex) {
  std::vector<Article> arts = {testing::article("a1", "Garlic", "Garlic cures cancer, they say."),
                               testing::article("a2", "Soup", "A garlic soup recipe."),
                               testing::article("a3", "Sport", "The match ended in a draw."),
                               testing::article("a4", "Weather", "Rain all week."),
                               testing::article("blank", "Nothing", "  ")};
  auto index = Bm25Index::build(arts);
  EXPECT_EQ(index.size(), 4u);
  auto hits = retrieve_candidates(testing::claim("c", "Garlic cures cancer"), index);
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0].first, "a1");
  EXPECT_TRUE(retrieve_candidates(testing::claim("c", "Quantum chromodynamics"), index).empty());
}

TEST(Calibration, Examples) {
  std::vector<ScoredPair> pairs = {{0.9, true}, {0.6, true}, {0.3, true}, {0.95, false}};
  EXPECT_DOUBLE_EQ(calibrate_threshold(pairs, 0.66), 0.6);
  EXPECT_DOUBLE_EQ(calibrate_threshold(pairs, 0.0), 0.9);
  std::vector<ScoredPair> ones = {{1.0, true}, {1.0, true}};
  EXPECT_DOUBLE_EQ(calibrate_threshold(ones, 1.0), 1.0);
  std::vector<ScoredPair> none = {{0.5, false}};
  EXPECT_THROW(calibrate_threshold(none, 0.4), ValidationError);
  EXPECT_THROW(calibrate_threshold(pairs, 1.2), ValidationError);
}

TEST(Calibration, LargestThresholdReachingTarget) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ScoredPair> pairs;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 25); i < n; ++i)
      pairs.push_back({std::round(u(rng) * 20) / 20, rng() % 2 == 0});
    pairs.push_back({u(rng), true});
    const double target = u(rng);
    const double t = calibrate_threshold(pairs, target);
    ASSERT_GE(recall_at(pairs, t), target);
    // Any strictly larger candidate threshold misses the target.
    for (const auto& p : pairs)
      if (p.gold_present && p.score > t) ASSERT_LT(recall_at(pairs, p.score), target);
  }
}

}  // namespace
}  // namespace factlink
