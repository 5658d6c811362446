#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "factlink/embedding.hpp"
#include "factlink/errors.hpp"
#include "test_support.hpp"

namespace factlink {
namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector{std::move(v)}; }

TEST(Embed, AverageThenNormalize) {
  auto lex = testing::make_lexicon({{"a", {1, 0}}, {"b", {0, 1}}});
  auto e = embed("a b", *lex);
  ASSERT_EQ(e.dim(), 2u);
  EXPECT_NEAR(e.components[0], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(e.components[1], 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_EQ(embed("a", *lex), vec({1, 0}));
  EXPECT_EQ(embed("zzz", *lex), vec({0, 0}));
}

TEST(Embed, NormIsZeroOrOne) {
  std::mt19937 rng(2);
  std::normal_distribution<double> n(0, 1);
  auto lex = std::make_shared<Lexicon>();
  const std::vector<std::string> words = {"w0", "w1", "w2", "w3", "w4"};
  for (const auto& w : words) lex->add(w, std::vector<double>{n(rng), n(rng), n(rng)});
  WordAverageEmbedder embedder(lex);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    for (int i = 0, k = static_cast<int>(rng() % 5); i < k; ++i)
      text += (rng() % 3 ? words[rng() % words.size()] : std::string("oov")) + " ";
    auto e = embedder.embed(text);
    const double norm = e.norm();
    ASSERT_TRUE(norm == 0.0 || std::abs(norm - 1.0) < 1e-12) << norm;
  }
}

TEST(Cosine, Basics) {
  EXPECT_NEAR(cosine(vec({0.6, 0.8}), vec({0.6, 0.8})), 1.0, 1e-15);
  EXPECT_EQ(cosine(vec({1, 0}), vec({0, 3})), 0.0);
  EXPECT_EQ(cosine(vec({0, 0}), vec({1, 2})), 0.0);
  EXPECT_THROW(cosine(vec({1, 0}), vec({1, 0, 0})), ValidationError);
}

TEST(Cosine, SymmetricAndSelfOne) {
  std::mt19937 rng(9);
  std::normal_distribution<double> n(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> u(4), v(4);
    for (auto& x : u) x = n(rng);
    for (auto& x : v) x = n(rng);
    ASSERT_EQ(cosine(vec(u), vec(v)), cosine(vec(v), vec(u)));
    ASSERT_NEAR(cosine(vec(u), vec(u)), 1.0, 1e-12);
    double c = cosine(vec(u), vec(v));
    ASSERT_LE(c, 1.0);
    ASSERT_GE(c, -1.0);
  }
}

TEST(Lexicon, ParsesHeaderAndRejectsRaggedRows) {
  std::istringstream ok("3 2\nGarlic 1 0\ncancer 0 1\ngarlic 5 5\n");
  auto lex = Lexicon::parse(ok);
  EXPECT_EQ(lex.dim(), 2u);
  EXPECT_EQ(lex.size(), 2u);
  ASSERT_TRUE(lex.contains("garlic"));
  EXPECT_EQ(lex.vector("garlic")[0], 1.0);
  EXPECT_TRUE(lex.vector("onion").empty());

  std::istringstream bad("a 1 0\nb 1 0 0\n");
  EXPECT_THROW(Lexicon::parse(bad), DataError);
}

TEST(Lexicon, FixtureVectorsLoad) {
  auto lex = Lexicon::load(testing::fixture_dir() / "vectors.txt");
  EXPECT_EQ(lex.dim(), 32u);
  EXPECT_TRUE(lex.contains("garlic"));
}

TEST(Synonyms, MedicalTermGate) {
  auto lex = testing::make_lexicon({{"vaccine", {1, 0, 0}},
                                    {"vaccination", {0.9, std::sqrt(1 - 0.81), 0}},
                                    {"banana", {0, 0, 1}},
                                    {"cat", {0, 1, 0}}});
  SynonymConfig cfg;
  cfg.medical_terms = {"vaccine"};
  EXPECT_EQ(synonyms("vaccine", cfg, *lex), std::vector<std::string>{"vaccination"});
  EXPECT_TRUE(synonyms("cat", cfg, *lex).empty());
  cfg.top_k = 0;
  EXPECT_TRUE(synonyms("vaccine", cfg, *lex).empty());
}

TEST(Synonyms, OrderedByCosineThenName) {
  auto lex = testing::make_lexicon(
      {{"t", {1, 0}}, {"b", {0.8, 0.6}}, {"a", {0.8, 0.6}}, {"c", {0.95, std::sqrt(1 - 0.9025)}}, {"d", {0.6, 0.8}}});
  SynonymConfig cfg;
  cfg.medical_terms = {"t"};
  EXPECT_EQ(synonyms("t", cfg, *lex), (std::vector<std::string>{"c", "a", "b"}));
  cfg.min_cosine = 0.9;
  EXPECT_EQ(synonyms("t", cfg, *lex), (std::vector<std::string>{"c"}));
}

TEST(Synonyms, TermFileSkipsCommentsAndBlanks) {
  testing::TempDir dir;
  testing::write_text(dir / "terms.txt", "# medical\nCancer\n\n  autism \n");
  auto terms = SynonymConfig::load_terms(dir / "terms.txt");
  EXPECT_EQ(terms, (std::unordered_set<std::string>{"cancer", "autism"}));
}

}  // namespace
}  // namespace factlink
