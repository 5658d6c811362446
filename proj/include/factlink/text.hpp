#pragma once

// Tokenization, claim n-grams and the corpus statistics behind TF-IDF and BM25.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "factlink/records.hpp"

namespace factlink {

/// Half-open token range [begin, end) of one sentence.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const SentenceSpan&) const = default;
};

/// Half-open byte range of one sentence in the source text.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const ByteSpan&) const = default;
};

struct TokenizedText {
  std::vector<std::string> tokens;             ///< lowercase, punctuation stripped
  std::vector<SentenceSpan> sentence_spans;    ///< ordered, contiguous, covering all tokens
  std::vector<ByteSpan> sentence_bytes;        ///< parallel to sentence_spans

  std::size_t sentence_count() const { return sentence_spans.size(); }
  std::span<const std::string> sentence(std::size_t i) const {
    const auto& s = sentence_spans.at(i);
    return std::span<const std::string>(tokens).subspan(s.begin, s.size());
  }
  bool empty() const { return tokens.empty(); }
};

/// Splits `text` into sentences and lowercase tokens.
///
/// A sentence ends at a word ending in '.', '!' or '?' (closing quotes and
/// brackets allowed after it) when the next word starts with a capital letter
/// or the text ends. Common abbreviations and single-letter initials never
/// end a sentence.
TokenizedText tokenize(std::string_view text);

/// Builds a single-sentence text from already normalized tokens.
TokenizedText from_tokens(std::vector<std::string> tokens);

/// Joins several texts; sentence spans are rebased, byte spans dropped.
TokenizedText concat(const TokenizedText& a, const TokenizedText& b);

struct NGram {
  std::vector<std::string> terms;

  std::size_t order() const { return terms.size(); }
  /// Terms joined by single spaces; the key used in frequency tables.
  std::string key() const;
  bool operator==(const NGram&) const = default;
  auto operator<=>(const NGram&) const = default;
};

inline constexpr std::size_t kMaxNGramOrder = 3;

/// Claim n-grams of orders 1..3; index 0 holds unigrams.
struct ClaimNGrams {
  std::array<std::vector<NGram>, kMaxNGramOrder> by_order;

  const std::vector<NGram>& of_order(std::size_t n) const { return by_order.at(n - 1); }
  std::vector<NGram> all() const;
};

/// Contiguous n-grams inside each sentence, duplicates collapsed per order in
/// first-occurrence order. Throws ValidationError for a text without tokens.
ClaimNGrams extract_ngrams(const TokenizedText& claim);

/// Number of contiguous occurrences of `g` within sentences of `text`.
std::size_t count_occurrences(const NGram& g, const TokenizedText& text);

/// Document statistics over the article corpus.
///
/// Unigram document frequencies are collected for every term. Higher-order
/// n-grams are only counted when passed to build(), which is how claim
/// bigrams and trigrams get their frequencies. Immutable after construction.
class CorpusStats {
 public:
  CorpusStats() = default;

  static CorpusStats build(std::span<const TokenizedText> documents,
                           std::span<const NGram> extra_ngrams = {});

  std::size_t document_count() const { return document_count_; }
  double average_length() const { return average_length_; }
  /// 0 for n-grams never seen.
  std::size_t doc_freq(const NGram& g) const;
  std::size_t doc_freq(std::string_view term) const;

  Json to_json() const;
  static CorpusStats from_json(const Json& j);

  /// Direct construction, used by tests and deserialization.
  static CorpusStats from_counts(std::size_t document_count, double average_length,
                                 std::unordered_map<std::string, std::size_t> doc_freq);

 private:
  std::size_t document_count_ = 0;
  double average_length_ = 0.0;
  std::unordered_map<std::string, std::size_t> doc_freq_;
};

/// Smoothed inverse document frequency: ln((N+1)/(df+1)) + 1.
double smoothed_idf(std::size_t document_count, std::size_t doc_freq);

/// tf(g in claim) * smoothed idf.
double tfidf(const NGram& g, const TokenizedText& claim, const CorpusStats& stats);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// BM25 idf floored at zero: max(0, ln((N - df + 0.5)/(df + 0.5))).
double bm25_idf(std::size_t document_count, std::size_t doc_freq);

/// Okapi BM25 over distinct non-stopword query unigrams. Document length
/// counts every token of the document.
double bm25_score(const TokenizedText& query, const TokenizedText& doc, const CorpusStats& stats,
                  Bm25Params params = {});

/// Small English stopword list applied to BM25 query terms only.
const std::unordered_set<std::string>& english_stopwords();

}  // namespace factlink
