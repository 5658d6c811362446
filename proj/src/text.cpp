#include "factlink/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// ASCII letters and digits plus every non-ASCII byte (UTF-8 letters stay intact).
bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }
bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '[' || c == '{'; }

const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> kAbbrev{
      "e.g.", "i.e.", "dr.",  "mr.",  "mrs.", "ms.",   "prof.", "sr.",  "jr.",  "st.",
      "vs.",  "etc.", "fig.", "no.",  "inc.", "ltd.",  "co.",   "u.s.", "u.k.", "a.m.",
      "p.m.", "approx.", "cf.", "al.", "jan.", "feb.", "mar.", "apr.", "aug.", "sep.",
      "sept.", "oct.", "nov.", "dec.", "gen.", "gov.", "sen.", "rep.", "dept.", "univ."};
  return kAbbrev;
}

struct RawWord {
  std::size_t begin;
  std::size_t end;
};

// True if the raw word closes a sentence, given what follows it.
bool ends_sentence(std::string_view word, const std::string_view* next) {
  std::size_t e = word.size();
  while (e > 0 && is_closer(word[e - 1])) --e;
  if (e == 0) return false;
  char last = word[e - 1];
  if (last != '.' && last != '!' && last != '?') return false;

  if (last == '.') {
    std::size_t b = 0;
    while (b < e && is_opener(word[b])) ++b;
    std::string core;
    for (std::size_t i = b; i < e; ++i)
      core += static_cast<char>(std::tolower(static_cast<unsigned char>(word[i])));
    if (abbreviations().contains(core)) return false;
    // Single-letter initial such as "J."
    if (core.size() == 2 && std::isalpha(static_cast<unsigned char>(core[0]))) return false;
  }

  if (next == nullptr) return true;
  std::size_t i = 0;
  while (i < next->size() && is_opener((*next)[i])) ++i;
  return i < next->size() && std::isupper(static_cast<unsigned char>((*next)[i]));
}

std::string normalize_word(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word)
    if (is_word_byte(c)) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool matches_at(const std::vector<std::string>& tokens, std::size_t pos, const NGram& g) {
  for (std::size_t k = 0; k < g.terms.size(); ++k)
    if (tokens[pos + k] != g.terms[k]) return false;
  return true;
}

}  // namespace

TokenizedText tokenize(std::string_view text) {
  std::vector<RawWord> words;
  for (std::size_t i = 0; i < text.size();) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t b = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    words.push_back({b, i});
  }

  TokenizedText out;
  std::size_t sentence_start_token = 0;
  std::size_t sentence_start_byte = 0;
  bool sentence_open = false;
  std::size_t last_end_byte = 0;

  auto close_sentence = [&] {
    if (out.tokens.size() > sentence_start_token) {
      out.sentence_spans.push_back({sentence_start_token, out.tokens.size()});
      out.sentence_bytes.push_back({sentence_start_byte, last_end_byte});
    }
    sentence_start_token = out.tokens.size();
    sentence_open = false;
  };

  for (std::size_t w = 0; w < words.size(); ++w) {
    std::string_view word = text.substr(words[w].begin, words[w].end - words[w].begin);
    std::string token = normalize_word(word);
    if (!token.empty()) {
      if (!sentence_open) {
        sentence_start_byte = words[w].begin;
        sentence_open = true;
      }
      out.tokens.push_back(std::move(token));
      last_end_byte = words[w].end;
    }
    std::string_view next_view;
    const std::string_view* next = nullptr;
    if (w + 1 < words.size()) {
      next_view = text.substr(words[w + 1].begin, words[w + 1].end - words[w + 1].begin);
      next = &next_view;
    }
    if (ends_sentence(word, next)) {
      last_end_byte = words[w].end;
      close_sentence();
    }
  }
  close_sentence();
  return out;
}

TokenizedText from_tokens(std::vector<std::string> tokens) {
  TokenizedText out;
  out.tokens = std::move(tokens);
  if (!out.tokens.empty()) out.sentence_spans.push_back({0, out.tokens.size()});
  return out;
}

TokenizedText concat(const TokenizedText& a, const TokenizedText& b) {
  TokenizedText out;
  out.tokens = a.tokens;
  out.tokens.insert(out.tokens.end(), b.tokens.begin(), b.tokens.end());
  out.sentence_spans = a.sentence_spans;
  for (auto s : b.sentence_spans)
    out.sentence_spans.push_back({s.begin + a.tokens.size(), s.end + a.tokens.size()});
  return out;
}

std::string NGram::key() const {
  std::string k;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) k += ' ';
    k += terms[i];
  }
  return k;
}

std::vector<NGram> ClaimNGrams::all() const {
  std::vector<NGram> out;
  for (const auto& v : by_order) out.insert(out.end(), v.begin(), v.end());
  return out;
}

ClaimNGrams extract_ngrams(const TokenizedText& claim) {
  if (claim.empty()) throw ValidationError("claim has no tokens");
  ClaimNGrams out;
  for (std::size_t n = 1; n <= kMaxNGramOrder; ++n) {
    std::set<std::vector<std::string>> seen;
    for (std::size_t s = 0; s < claim.sentence_count(); ++s) {
      auto sent = claim.sentence(s);
      for (std::size_t i = 0; i + n <= sent.size(); ++i) {
        std::vector<std::string> terms(sent.begin() + i, sent.begin() + i + n);
        if (seen.insert(terms).second) out.by_order[n - 1].push_back(NGram{std::move(terms)});
      }
    }
  }
  return out;
}

std::size_t count_occurrences(const NGram& g, const TokenizedText& text) {
  if (g.terms.empty()) return 0;
  std::size_t count = 0;
  for (const auto& s : text.sentence_spans)
    for (std::size_t i = s.begin; i + g.order() <= s.end; ++i)
      if (matches_at(text.tokens, i, g)) ++count;
  return count;
}

// ---------------------------------------------------------------------------

CorpusStats CorpusStats::build(std::span<const TokenizedText> documents,
                               std::span<const NGram> extra_ngrams) {
  CorpusStats stats;
  stats.document_count_ = documents.size();
  std::size_t total_len = 0;

  std::vector<const NGram*> higher;
  std::unordered_set<std::string> higher_keys;
  for (const auto& g : extra_ngrams)
    if (g.order() > 1 && higher_keys.insert(g.key()).second) higher.push_back(&g);

  for (const auto& doc : documents) {
    total_len += doc.tokens.size();
    std::unordered_set<std::string_view> terms(doc.tokens.begin(), doc.tokens.end());
    for (auto t : terms) ++stats.doc_freq_[std::string(t)];
    for (const NGram* g : higher)
      if (count_occurrences(*g, doc) > 0) ++stats.doc_freq_[g->key()];
  }
  stats.average_length_ =
      documents.empty() ? 0.0 : static_cast<double>(total_len) / static_cast<double>(documents.size());
  return stats;
}

std::size_t CorpusStats::doc_freq(const NGram& g) const { return doc_freq(g.key()); }

std::size_t CorpusStats::doc_freq(std::string_view term) const {
  auto it = doc_freq_.find(std::string(term));
  return it == doc_freq_.end() ? 0 : it->second;
}

Json CorpusStats::to_json() const {
  // Sorted keys keep the serialized index byte-stable.
  std::map<std::string, std::size_t> sorted(doc_freq_.begin(), doc_freq_.end());
  return Json{{"document_count", document_count_},
              {"average_length", average_length_},
              {"doc_freq", sorted}};
}

CorpusStats CorpusStats::from_json(const Json& j) {
  try {
    return from_counts(j.at("document_count").get<std::size_t>(), j.at("average_length").get<double>(),
                       j.at("doc_freq").get<std::unordered_map<std::string, std::size_t>>());
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed index: ") + e.what());
  }
}

CorpusStats CorpusStats::from_counts(std::size_t document_count, double average_length,
                                     std::unordered_map<std::string, std::size_t> doc_freq) {
  for (const auto& [k, df] : doc_freq)
    if (df > document_count) throw DataError("doc_freq exceeds document count for '" + k + "'");
  CorpusStats s;
  s.document_count_ = document_count;
  s.average_length_ = average_length;
  s.doc_freq_ = std::move(doc_freq);
  return s;
}

double smoothed_idf(std::size_t document_count, std::size_t doc_freq) {
  return std::log((static_cast<double>(document_count) + 1.0) / (static_cast<double>(doc_freq) + 1.0)) +
         1.0;
}

double tfidf(const NGram& g, const TokenizedText& claim, const CorpusStats& stats) {
  const std::size_t tf = count_occurrences(g, claim);
  if (tf == 0) return 0.0;
  return static_cast<double>(tf) * smoothed_idf(stats.document_count(), stats.doc_freq(g));
}

double bm25_idf(std::size_t document_count, std::size_t doc_freq) {
  const double n = static_cast<double>(document_count);
  const double df = static_cast<double>(doc_freq);
  return std::max(0.0, std::log((n - df + 0.5) / (df + 0.5)));
}

double bm25_score(const TokenizedText& query, const TokenizedText& doc, const CorpusStats& stats,
                  Bm25Params params) {
  if (doc.tokens.empty()) return 0.0;
  const auto& stop = english_stopwords();
  std::unordered_map<std::string_view, std::size_t> tf;
  for (const auto& t : doc.tokens) ++tf[t];

  const double len = static_cast<double>(doc.tokens.size());
  const double avgdl = stats.average_length() > 0 ? stats.average_length() : len;
  std::unordered_set<std::string_view> seen;
  double score = 0.0;
  for (const auto& term : query.tokens) {
    if (stop.contains(term) || !seen.insert(term).second) continue;
    auto it = tf.find(term);
    if (it == tf.end()) continue;
    const double f = static_cast<double>(it->second);
    const double norm = f + params.k1 * (1.0 - params.b + params.b * len / avgdl);
    score += bm25_idf(stats.document_count(), stats.doc_freq(term)) * f * (params.k1 + 1.0) / norm;
  }
  return score;
}

const std::unordered_set<std::string>& english_stopwords() {
  static const std::unordered_set<std::string> kStop{
      "a",     "an",    "and",   "are",  "as",    "at",    "be",    "been",  "but",   "by",
      "can",   "could", "did",   "do",   "does",  "for",   "from",  "had",   "has",   "have",
      "he",    "her",   "his",   "how",  "i",     "if",    "in",    "into",  "is",    "it",
      "its",   "may",   "more",  "most", "no",    "not",   "of",    "on",    "or",    "our",
      "she",   "so",    "some",  "such", "than",  "that",  "the",   "their", "them",  "then",
      "there", "these", "they",  "this", "those", "to",    "too",   "very",  "was",   "we",
      "were",  "what",  "when",  "where", "which", "while", "who",  "why",   "will",  "with",
      "would", "you",   "your"};
  return kStop;
}

}  // namespace factlink
