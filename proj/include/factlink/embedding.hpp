#pragma once

// Word vectors, sentence embeddings, cosine similarity and medical-term synonyms.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace factlink {

struct EmbeddingVector {
  std::vector<double> components;

  std::size_t dim() const { return components.size(); }
  double norm() const;
  bool is_zero() const;
  bool operator==(const EmbeddingVector&) const = default;
};

/// Word-vector table. Tokens are lowercased on load; the first occurrence of a
/// token wins.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::size_t dim) : dim_(dim) {}

  /// Plain-text vector file: optional "<count> <dim>" header, then
  /// "<token> <v1> ... <vdim>" per line. Inconsistent dimensions throw DataError.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon parse(std::istream& in);

  /// Throws DataError when the dimension differs from earlier entries.
  void add(std::string_view token, std::span<const double> values);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view token) const;
  /// Empty span for unknown tokens.
  std::span<const double> vector(std::string_view token) const;
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;  // row-major, words_.size() x dim_
  std::unordered_map<std::string, std::size_t> index_;
};

/// Anything that turns text into a fixed-dimension vector.
class SentenceEmbedder {
 public:
  virtual ~SentenceEmbedder() = default;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed_tokens(std::span<const std::string> tokens) const = 0;
  /// Tokenizes then embeds every token of `text`.
  EmbeddingVector embed(std::string_view text) const;
};

/// Mean of the in-lexicon word vectors, scaled to unit length. Texts without a
/// known word map to the zero vector.
class WordAverageEmbedder final : public SentenceEmbedder {
 public:
  explicit WordAverageEmbedder(std::shared_ptr<const Lexicon> lexicon);

  std::size_t dim() const override { return lexicon_->dim(); }
  EmbeddingVector embed_tokens(std::span<const std::string> tokens) const override;
  const Lexicon& lexicon() const { return *lexicon_; }

 private:
  std::shared_ptr<const Lexicon> lexicon_;
};

EmbeddingVector embed(std::string_view text, const Lexicon& lexicon);

/// dot(u,v)/(|u||v|) clamped to [-1,1]; 0 when either vector is zero.
/// Throws ValidationError on dimension mismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);
double cosine(std::span<const double> u, std::span<const double> v);

struct SynonymConfig {
  std::unordered_set<std::string> medical_terms;
  std::size_t top_k = 3;
  double min_cosine = 0.7;

  /// One lowercase term per line; blank lines and '#' comments ignored.
  static std::unordered_set<std::string> load_terms(const std::filesystem::path& path);
  void validate() const;
};

/// Nearest lexicon words to a medical term, by cosine (descending, then
/// lexicographic), limited to `top_k` and to similarity >= min_cosine.
std::vector<std::string> synonyms(std::string_view term, const SynonymConfig& cfg,
                                  const Lexicon& lexicon);

}  // namespace factlink
