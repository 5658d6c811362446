#pragma once

// Claim presence detection: BM25 candidate retrieval and the IR, SE and IRSE
// presence scorers.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "factlink/embedding.hpp"
#include "factlink/records.hpp"
#include "factlink/text.hpp"

namespace factlink {

enum class PresenceMethod { IR, SE, IRSE };

std::string to_string(PresenceMethod m);
PresenceMethod parse_presence_method(std::string_view s);  // "ir" | "se" | "irse"

/// Thresholds chosen so every method reaches roughly the same recall.
double default_threshold(PresenceMethod m);
inline constexpr double kDefaultPrefilter = 0.25;
inline constexpr std::size_t kDefaultTopSentences = 5;

struct PresenceConfig {
  PresenceMethod method = PresenceMethod::IRSE;
  double threshold = 0.45;
  double prefilter_threshold = kDefaultPrefilter;  ///< IRSE only
  std::size_t top_sentences = kDefaultTopSentences;

  static PresenceConfig defaults(PresenceMethod m);
  void validate() const;
};

enum class Decision { Present, NotPresent };
std::string to_string(Decision d);

struct PresenceResult {
  std::string article_id;
  std::string claim_id;
  PresenceMethod method = PresenceMethod::IRSE;
  double score = 0.0;
  Decision decision = Decision::NotPresent;
  std::vector<std::size_t> matched_sentences;

  /// origin=Predicted record with presence_score set.
  PairLabel to_pair_label() const;
};

/// Article text tokenized once, with one embedding per body sentence.
struct PreparedArticle {
  std::string id;
  TokenizedText title;
  TokenizedText body;
  EmbeddingVector title_embedding;
  std::vector<EmbeddingVector> sentence_embeddings;
  std::vector<std::unordered_set<std::string>> sentence_terms;

  /// `embedder` may be null when only the IR method is used.
  static PreparedArticle prepare(const Article& article, const SentenceEmbedder* embedder);
  /// Built from pre-split sentences (each a list of normalized tokens).
  static PreparedArticle from_sentences(std::string id, std::vector<std::string> title,
                                        const std::vector<std::vector<std::string>>& sentences,
                                        const SentenceEmbedder* embedder);

  std::size_t sentence_count() const { return body.sentence_count(); }
};

/// Claim tokens, n-grams, embedding and the accepted spellings of each term
/// (the term itself plus synonyms of medical terms).
struct PreparedClaim {
  std::string id;
  TokenizedText text;
  ClaimNGrams ngrams;
  EmbeddingVector embedding;
  std::unordered_map<std::string, std::vector<std::string>> alternatives;

  /// Throws ValidationError if the statement has no tokens. `synonym_cfg`
  /// and `lexicon` may be null, which disables synonym expansion.
  static PreparedClaim prepare(const Claim& claim, const SentenceEmbedder* embedder,
                               const SynonymConfig* synonym_cfg = nullptr,
                               const Lexicon* lexicon = nullptr);
  static PreparedClaim from_tokens(std::string id, std::vector<std::string> tokens,
                                   const SentenceEmbedder* embedder,
                                   const SynonymConfig* synonym_cfg = nullptr,
                                   const Lexicon* lexicon = nullptr);
};

struct ScoreDetail {
  double score = 0.0;
  std::vector<std::size_t> matched_sentences;  ///< ascending
};

/// Mean over the claim's n-gram orders of the tf-idf mass matched by single
/// sentences. Result in [0,1].
ScoreDetail score_ir(const PreparedClaim& claim, const PreparedArticle& article,
                     const CorpusStats& stats);

/// Half title cosine plus half the mean cosine of the `top_k` most similar
/// sentences. Throws ValidationError for an article without sentences.
ScoreDetail score_se(const PreparedClaim& claim, const PreparedArticle& article,
                     std::size_t top_k);

/// IR matching restricted to sentences at or above the similarity cutoff,
/// each matched n-gram weighted by the (non-negative) cosine of its best
/// matching sentence. Result in [0,1].
ScoreDetail score_irse(const PreparedClaim& claim, const PreparedArticle& article,
                       const CorpusStats& stats, const PresenceConfig& cfg);

/// Present iff score >= threshold.
PresenceResult classify(const ScoreDetail& detail, const PresenceConfig& cfg,
                        std::string article_id = {}, std::string claim_id = {});

/// Dispatches to the method named in `cfg`.
PresenceResult score_pair(const PreparedClaim& claim, const PreparedArticle& article,
                          const CorpusStats& stats, const PresenceConfig& cfg);

/// BM25 index over article titles and bodies.
class Bm25Index {
 public:
  Bm25Index() = default;
  /// Articles that are not scorable are left out.
  static Bm25Index build(std::span<const Article> articles, std::span<const NGram> claim_ngrams = {},
                         Bm25Params params = {});

  const CorpusStats& stats() const { return stats_; }
  std::size_t size() const { return ids_.size(); }
  /// Every indexed article with a positive score, best first (ties by id).
  std::vector<std::pair<std::string, double>> search(const TokenizedText& query) const;

 private:
  std::vector<std::string> ids_;
  std::vector<TokenizedText> docs_;
  CorpusStats stats_;
  Bm25Params params_;
};

/// Keeps the articles whose BM25 score exceeds two thirds of the best score.
std::vector<std::pair<std::string, double>> two_thirds_cutoff(
    std::vector<std::pair<std::string, double>> ranked);

std::vector<std::pair<std::string, double>> retrieve_candidates(const Claim& claim,
                                                                const Bm25Index& index);

struct ScoredPair {
  double score = 0.0;
  bool gold_present = false;
};

/// Largest threshold whose recall on gold-present pairs is >= target_recall.
/// Throws ValidationError without positives or for a target above 1.
double calibrate_threshold(std::span<const ScoredPair> pairs, double target_recall);

/// Recall on the gold-present pairs at `threshold` (score >= threshold).
double recall_at(std::span<const ScoredPair> pairs, double threshold);

}  // namespace factlink
