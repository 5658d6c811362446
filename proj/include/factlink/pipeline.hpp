#pragma once

// Corpus-level presence matching and stance dataset assembly.

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factlink/embedding.hpp"
#include "factlink/evaluation.hpp"
#include "factlink/presence.hpp"
#include "factlink/stance.hpp"

namespace factlink {

enum class CandidateMode { All, Bm25 };
CandidateMode parse_candidate_mode(std::string_view s);  // "all" | "bm25"

/// Articles and claims prepared once for repeated scoring. Corpus statistics
/// cover the scorable articles (title and body) plus every claim n-gram.
class PresenceEngine {
 public:
  /// `lexicon` may be null (IR only). Synonym expansion needs both a lexicon
  /// and `synonyms`.
  PresenceEngine(std::span<const Article> articles, std::span<const Claim> claims,
                 std::shared_ptr<const Lexicon> lexicon, std::optional<SynonymConfig> synonyms = std::nullopt);

  const CorpusStats& stats() const { return index_.stats(); }
  const Bm25Index& index() const { return index_; }
  bool has_embedder() const { return embedder_ != nullptr; }

  /// Throws NotFoundError for unknown or unscorable articles and unknown claims.
  PresenceResult score(const std::string& article_id, const std::string& claim_id,
                       const PresenceConfig& cfg) const;

  /// Every claim against its candidate articles, ordered by claim then article id.
  std::vector<PresenceResult> match(const PresenceConfig& cfg, CandidateMode mode, std::size_t jobs = 1) const;

  PresenceEvaluation evaluate(const PresenceConfig& cfg, std::span<const PresenceCase> cases,
                              std::optional<Split> split_filter = std::nullopt, std::size_t jobs = 1) const;

  std::vector<ScoredPair> scored_pairs(const PresenceConfig& cfg, std::span<const PresenceCase> cases,
                                       std::size_t jobs = 1) const;

 private:
  std::shared_ptr<const Lexicon> lexicon_;
  std::shared_ptr<const SentenceEmbedder> embedder_;
  Bm25Index index_;
  std::map<std::string, PreparedArticle> articles_;
  std::map<std::string, PreparedClaim> claims_;
  std::map<std::string, Claim> raw_claims_;
};

/// Stance examples for (claim, article, stance) triples, featurized over the
/// similarity window. Pairs referencing unknown records throw DataError.
std::vector<StanceExample> stance_examples(std::span<const StanceRecord> records, std::span<const Article> articles,
                                           std::span<const Claim> claims, const SentenceEmbedder& embedder);

/// Manual labels with a stance, as stance records.
std::vector<StanceRecord> stance_records(std::span<const PairLabel> labels);

/// FNC pairs featurized with the headline as the claim.
std::vector<StanceExample> stance_examples(std::span<const FncPair> pairs, const SentenceEmbedder& embedder);

}  // namespace factlink
