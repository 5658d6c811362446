#include "factlink/presence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

// Cosine ties at the eligibility cutoff are decided inclusively despite rounding.
constexpr double kCutoffSlack = 1e-12;

std::vector<std::size_t> by_similarity(const std::vector<double>& cosines) {
  std::vector<std::size_t> order(cosines.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cosines[a] > cosines[b]; });
  return order;
}

std::vector<double> sentence_cosines(const PreparedClaim& claim, const PreparedArticle& article) {
  std::vector<double> out;
  out.reserve(article.sentence_embeddings.size());
  for (const auto& e : article.sentence_embeddings) out.push_back(cosine(claim.embedding, e));
  return out;
}

bool sentence_contains(const PreparedClaim& claim, const std::unordered_set<std::string>& terms,
                       const NGram& g) {
  for (const auto& t : g.terms) {
    auto alt = claim.alternatives.find(t);
    bool found = terms.contains(t);
    if (!found && alt != claim.alternatives.end())
      found = std::any_of(alt->second.begin(), alt->second.end(),
                          [&](const std::string& s) { return terms.contains(s); });
    if (!found) return false;
  }
  return true;
}

struct TopK {
  double mean = 0.0;
  std::vector<std::size_t> indices;
};

TopK top_k_mean(const std::vector<double>& cosines, std::size_t k) {
  TopK out;
  auto order = by_similarity(cosines);
  const std::size_t n = std::min(k, order.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += cosines[order[i]];
    out.indices.push_back(order[i]);
  }
  out.mean = n == 0 ? 0.0 : sum / static_cast<double>(n);
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

void require_embeddings(const PreparedClaim& claim, const PreparedArticle& article) {
  if (claim.embedding.dim() == 0 || article.sentence_embeddings.size() != article.sentence_count())
    throw ValidationError("embedding-based scoring needs claim and article prepared with an embedder");
}

// Shared body of IR and IRSE. A negative weight(sentence) marks the sentence ineligible.
template <typename Weight>
ScoreDetail weighted_match(const PreparedClaim& claim, const PreparedArticle& article,
                           const CorpusStats& stats, Weight&& weight) {
  ScoreDetail out;
  std::vector<bool> matched(article.sentence_count(), false);
  double order_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= kMaxNGramOrder; ++n) {
    const auto& grams = claim.ngrams.of_order(n);
    if (grams.empty()) continue;
    double total = 0.0, hit = 0.0;
    for (const auto& g : grams) {
      const double w = tfidf(g, claim.text, stats);
      total += w;
      double best = -1.0;
      for (std::size_t s = 0; s < article.sentence_count(); ++s) {
        const double sw = weight(s);
        if (sw < 0.0 || !sentence_contains(claim, article.sentence_terms[s], g)) continue;
        matched[s] = true;
        best = std::max(best, sw);
      }
      if (best >= 0.0) hit += w * best;
    }
    ++orders;
    order_sum += total > 0.0 ? hit / total : 0.0;
  }
  out.score = orders == 0 ? 0.0 : std::clamp(order_sum / static_cast<double>(orders), 0.0, 1.0);
  for (std::size_t s = 0; s < matched.size(); ++s)
    if (matched[s]) out.matched_sentences.push_back(s);
  return out;
}

}  // namespace

std::string to_string(PresenceMethod m) {
  switch (m) {
    case PresenceMethod::IR: return "ir";
    case PresenceMethod::SE: return "se";
    case PresenceMethod::IRSE: return "irse";
  }
  return "?";
}

PresenceMethod parse_presence_method(std::string_view s) {
  if (s == "ir" || s == "IR") return PresenceMethod::IR;
  if (s == "se" || s == "SE") return PresenceMethod::SE;
  if (s == "irse" || s == "IRSE") return PresenceMethod::IRSE;
  throw ValidationError("unknown presence method '" + std::string(s) + "' (expected ir, se or irse)");
}

double default_threshold(PresenceMethod m) {
  switch (m) {
    case PresenceMethod::IR: return 0.5;
    case PresenceMethod::SE: return 0.5;
    case PresenceMethod::IRSE: return 0.45;
  }
  return 0.5;
}

PresenceConfig PresenceConfig::defaults(PresenceMethod m) {
  PresenceConfig c;
  c.method = m;
  c.threshold = default_threshold(m);
  return c;
}

void PresenceConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in [0, 1]");
  if (!(prefilter_threshold >= 0.0 && prefilter_threshold <= 1.0))
    throw ValidationError("prefilter threshold must lie in [0, 1]");
  if (top_sentences < 1) throw ValidationError("top_sentences must be at least 1");
}

std::string to_string(Decision d) { return d == Decision::Present ? "present" : "not_present"; }

PairLabel PresenceResult::to_pair_label() const {
  PairLabel p;
  p.article_id = article_id;
  p.claim_id = claim_id;
  p.presence = decision == Decision::Present ? Presence::Present : Presence::NotPresent;
  p.origin = Origin::Predicted;
  p.presence_score = score;
  return p;
}

// ---------------------------------------------------------------------------

namespace {

void embed_article(PreparedArticle& p, const SentenceEmbedder* embedder) {
  if (embedder) {
    p.title_embedding = embedder->embed_tokens(p.title.tokens);
    for (std::size_t s = 0; s < p.body.sentence_count(); ++s)
      p.sentence_embeddings.push_back(embedder->embed_tokens(p.body.sentence(s)));
  }
  for (std::size_t s = 0; s < p.body.sentence_count(); ++s) {
    auto sent = p.body.sentence(s);
    p.sentence_terms.emplace_back(sent.begin(), sent.end());
  }
}

}  // namespace

PreparedArticle PreparedArticle::prepare(const Article& article, const SentenceEmbedder* embedder) {
  PreparedArticle p;
  p.id = article.id;
  p.title = tokenize(article.title);
  p.body = tokenize(article.body);
  embed_article(p, embedder);
  return p;
}

PreparedArticle PreparedArticle::from_sentences(std::string id, std::vector<std::string> title,
                                                const std::vector<std::vector<std::string>>& sentences,
                                                const SentenceEmbedder* embedder) {
  PreparedArticle p;
  p.id = std::move(id);
  p.title = from_tokens(std::move(title));
  for (const auto& s : sentences)
    if (!s.empty()) p.body = concat(p.body, from_tokens(s));
  embed_article(p, embedder);
  return p;
}

namespace {

PreparedClaim finish_claim(std::string id, TokenizedText text, const SentenceEmbedder* embedder,
                           const SynonymConfig* synonym_cfg, const Lexicon* lexicon) {
  if (text.empty()) throw ValidationError("claim '" + id + "' has no tokens");
  PreparedClaim p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.ngrams = extract_ngrams(p.text);
  if (embedder) p.embedding = embedder->embed_tokens(p.text.tokens);
  if (synonym_cfg && lexicon) {
    for (const auto& t : p.text.tokens) {
      if (p.alternatives.contains(t)) continue;
      auto syn = synonyms(t, *synonym_cfg, *lexicon);
      if (!syn.empty()) p.alternatives.emplace(t, std::move(syn));
    }
  }
  return p;
}

}  // namespace

PreparedClaim PreparedClaim::prepare(const Claim& claim, const SentenceEmbedder* embedder,
                                     const SynonymConfig* synonym_cfg, const Lexicon* lexicon) {
  return finish_claim(claim.id, tokenize(claim.statement), embedder, synonym_cfg, lexicon);
}

PreparedClaim PreparedClaim::from_tokens(std::string id, std::vector<std::string> tokens,
                                         const SentenceEmbedder* embedder,
                                         const SynonymConfig* synonym_cfg, const Lexicon* lexicon) {
  return finish_claim(std::move(id), factlink::from_tokens(std::move(tokens)), embedder, synonym_cfg,
                      lexicon);
}

// ---------------------------------------------------------------------------

ScoreDetail score_ir(const PreparedClaim& claim, const PreparedArticle& article,
                     const CorpusStats& stats) {
  return weighted_match(claim, article, stats, [](std::size_t) { return 1.0; });
}

ScoreDetail score_se(const PreparedClaim& claim, const PreparedArticle& article, std::size_t top_k) {
  if (article.sentence_count() == 0)
    throw ValidationError("article '" + article.id + "' has no sentences");
  require_embeddings(claim, article);
  auto top = top_k_mean(sentence_cosines(claim, article), top_k);
  ScoreDetail out;
  out.score = 0.5 * cosine(article.title_embedding, claim.embedding) + 0.5 * top.mean;
  out.matched_sentences = std::move(top.indices);
  return out;
}

ScoreDetail score_irse(const PreparedClaim& claim, const PreparedArticle& article,
                       const CorpusStats& stats, const PresenceConfig& cfg) {
  if (article.sentence_count() == 0) return {};
  require_embeddings(claim, article);
  const auto cosines = sentence_cosines(claim, article);
  const auto top = top_k_mean(cosines, cfg.top_sentences);
  const double similarity_cutoff = 0.5 * cosine(claim.embedding, article.title_embedding) + 0.5 * top.mean;
  const double cutoff = std::max(similarity_cutoff, cfg.prefilter_threshold) - kCutoffSlack;
  return weighted_match(claim, article, stats, [&](std::size_t s) {
    if (cosines[s] < cutoff) return -1.0;
    return std::max(0.0, cosines[s]);
  });
}

PresenceResult classify(const ScoreDetail& detail, const PresenceConfig& cfg, std::string article_id,
                        std::string claim_id) {
  PresenceResult r;
  r.article_id = std::move(article_id);
  r.claim_id = std::move(claim_id);
  r.method = cfg.method;
  r.score = detail.score;
  r.decision = detail.score >= cfg.threshold ? Decision::Present : Decision::NotPresent;
  r.matched_sentences = detail.matched_sentences;
  return r;
}

PresenceResult score_pair(const PreparedClaim& claim, const PreparedArticle& article,
                          const CorpusStats& stats, const PresenceConfig& cfg) {
  ScoreDetail d;
  switch (cfg.method) {
    case PresenceMethod::IR: d = score_ir(claim, article, stats); break;
    case PresenceMethod::SE: d = score_se(claim, article, cfg.top_sentences); break;
    case PresenceMethod::IRSE: d = score_irse(claim, article, stats, cfg); break;
  }
  return classify(d, cfg, article.id, claim.id);
}

// ---------------------------------------------------------------------------

Bm25Index Bm25Index::build(std::span<const Article> articles, std::span<const NGram> claim_ngrams,
                           Bm25Params params) {
  Bm25Index idx;
  idx.params_ = params;
  for (const auto& a : articles) {
    if (!a.scorable()) continue;
    idx.ids_.push_back(a.id);
    idx.docs_.push_back(concat(tokenize(a.title), tokenize(a.body)));
  }
  idx.stats_ = CorpusStats::build(idx.docs_, claim_ngrams);
  return idx;
}

std::vector<std::pair<std::string, double>> Bm25Index::search(const TokenizedText& query) const {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    double s = bm25_score(query, docs_[i], stats_, params_);
    if (s > 0.0) out.emplace_back(ids_[i], s);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::vector<std::pair<std::string, double>> two_thirds_cutoff(
    std::vector<std::pair<std::string, double>> ranked) {
  double best = 0.0;
  for (const auto& [_, s] : ranked) best = std::max(best, s);
  if (best <= 0.0) return {};
  const double cutoff = 2.0 / 3.0 * best;
  std::erase_if(ranked, [&](const auto& e) { return !(e.second > cutoff); });
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

std::vector<std::pair<std::string, double>> retrieve_candidates(const Claim& claim,
                                                                const Bm25Index& index) {
  return two_thirds_cutoff(index.search(tokenize(claim.statement)));
}

// ---------------------------------------------------------------------------

double recall_at(std::span<const ScoredPair> pairs, double threshold) {
  std::size_t pos = 0, hit = 0;
  for (const auto& p : pairs) {
    if (!p.gold_present) continue;
    ++pos;
    if (p.score >= threshold) ++hit;
  }
  return pos == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(pos);
}

double calibrate_threshold(std::span<const ScoredPair> pairs, double target_recall) {
  std::vector<double> positives;
  for (const auto& p : pairs)
    if (p.gold_present) positives.push_back(p.score);
  if (positives.empty()) throw ValidationError("calibration needs at least one gold-present pair");
  if (target_recall > 1.0)
    throw ValidationError("target recall " + std::to_string(target_recall) + " is unachievable");
  std::sort(positives.begin(), positives.end(), std::greater<>());
  const double count = static_cast<double>(positives.size());
  for (std::size_t j = 1; j <= positives.size(); ++j)
    if (static_cast<double>(j) / count >= target_recall) return positives[j - 1];
  throw ValidationError("target recall " + std::to_string(target_recall) + " is unachievable");
}

}  // namespace factlink
