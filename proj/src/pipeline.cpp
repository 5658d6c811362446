#include "factlink/pipeline.hpp"

#include <unordered_map>

#include "factlink/errors.hpp"

namespace factlink {

CandidateMode parse_candidate_mode(std::string_view s) {
  if (s == "all") return CandidateMode::All;
  if (s == "bm25") return CandidateMode::Bm25;
  throw ValidationError("unknown candidate mode '" + std::string(s) + "' (expected all or bm25)");
}

PresenceEngine::PresenceEngine(std::span<const Article> articles, std::span<const Claim> claims,
                               std::shared_ptr<const Lexicon> lexicon, std::optional<SynonymConfig> synonyms)
    : lexicon_(std::move(lexicon)) {
  if (lexicon_) embedder_ = std::make_shared<WordAverageEmbedder>(lexicon_);
  if (synonyms) synonyms->validate();
  const SynonymConfig* syn = synonyms && lexicon_ ? &*synonyms : nullptr;

  std::vector<NGram> ngrams;
  for (const auto& c : claims) {
    auto prepared = PreparedClaim::prepare(c, embedder_.get(), syn, lexicon_.get());
    auto all = prepared.ngrams.all();
    ngrams.insert(ngrams.end(), all.begin(), all.end());
    claims_.emplace(c.id, std::move(prepared));
    raw_claims_.emplace(c.id, c);
  }
  index_ = Bm25Index::build(articles, ngrams);
  for (const auto& a : articles)
    if (a.scorable()) articles_.emplace(a.id, PreparedArticle::prepare(a, embedder_.get()));
}

PresenceResult PresenceEngine::score(const std::string& article_id, const std::string& claim_id,
                                     const PresenceConfig& cfg) const {
  auto a = articles_.find(article_id);
  if (a == articles_.end()) throw NotFoundError("no scorable article '" + article_id + "'");
  auto c = claims_.find(claim_id);
  if (c == claims_.end()) throw NotFoundError("unknown claim '" + claim_id + "'");
  return score_pair(c->second, a->second, stats(), cfg);
}

std::vector<PresenceResult> PresenceEngine::match(const PresenceConfig& cfg, CandidateMode mode,
                                                  std::size_t jobs) const {
  cfg.validate();
  std::vector<std::pair<const std::string*, const std::string*>> work;
  std::vector<std::vector<std::string>> candidate_ids;
  for (const auto& [claim_id, claim] : raw_claims_) {
    std::vector<std::string> ids;
    if (mode == CandidateMode::Bm25) {
      for (auto& [id, _] : retrieve_candidates(claim, index_)) ids.push_back(id);
      std::sort(ids.begin(), ids.end());
    } else {
      for (const auto& [id, _] : articles_) ids.push_back(id);
    }
    candidate_ids.push_back(std::move(ids));
  }
  std::size_t ci = 0;
  for (const auto& [claim_id, _] : raw_claims_) {
    for (const auto& id : candidate_ids[ci]) work.emplace_back(&claim_id, &id);
    ++ci;
  }
  std::vector<PresenceResult> out(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t i) { out[i] = score(*work[i].second, *work[i].first, cfg); });
  return out;
}

PresenceEvaluation PresenceEngine::evaluate(const PresenceConfig& cfg, std::span<const PresenceCase> cases,
                                            std::optional<Split> split_filter, std::size_t jobs) const {
  cfg.validate();
  return evaluate_presence(
      cases, [&](const PresenceCase& c) { return score(c.article_id, c.claim_id, cfg).score; }, cfg.threshold,
      split_filter, jobs, to_string(cfg.method));
}

std::vector<ScoredPair> PresenceEngine::scored_pairs(const PresenceConfig& cfg, std::span<const PresenceCase> cases,
                                                     std::size_t jobs) const {
  std::vector<ScoredPair> out(cases.size());
  parallel_for(cases.size(), jobs, [&](std::size_t i) {
    out[i] = {score(cases[i].article_id, cases[i].claim_id, cfg).score, cases[i].gold_present};
  });
  return out;
}

std::vector<StanceExample> stance_examples(std::span<const StanceRecord> records, std::span<const Article> articles,
                                           std::span<const Claim> claims, const SentenceEmbedder& embedder) {
  std::unordered_map<std::string, const Article*> by_article;
  for (const auto& a : articles) by_article.emplace(a.id, &a);
  std::unordered_map<std::string, const Claim*> by_claim;
  for (const auto& c : claims) by_claim.emplace(c.id, &c);

  std::vector<StanceExample> out;
  for (const auto& r : records) {
    auto a = by_article.find(r.article_id);
    if (a == by_article.end()) throw DataError("stance record references unknown article '" + r.article_id + "'");
    auto c = by_claim.find(r.claim_id);
    if (c == by_claim.end()) throw DataError("stance record references unknown claim '" + r.claim_id + "'");
    const auto claim = tokenize(c->second->statement);
    const auto body = tokenize(a->second->body);
    auto window = build_window(claim, body, embedder);
    out.push_back({featurize(claim, body, window.sentence_indices, embedder), r.stance});
  }
  return out;
}

std::vector<StanceRecord> stance_records(std::span<const PairLabel> labels) {
  std::vector<StanceRecord> out;
  for (const auto& l : labels)
    if (l.origin == Origin::Manual && l.stance && l.presence != Presence::NotPresent)
      out.push_back({l.claim_id, l.article_id, *l.stance});
  return out;
}

std::vector<StanceExample> stance_examples(std::span<const FncPair> pairs, const SentenceEmbedder& embedder) {
  std::vector<StanceExample> out;
  for (const auto& p : pairs) {
    const auto claim = tokenize(p.headline);
    const auto body = tokenize(p.body);
    if (body.sentence_count() == 0) continue;
    auto window = build_window(claim, body, embedder);
    out.push_back({featurize(claim, body, window.sentence_indices, embedder), p.stance});
  }
  return out;
}

}  // namespace factlink
