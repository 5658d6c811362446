#include "factlink/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "factlink/errors.hpp"
#include "factlink/text.hpp"

namespace factlink {

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double c : components) s += c * c;
  return std::sqrt(s);
}

bool EmbeddingVector::is_zero() const {
  return std::all_of(components.begin(), components.end(), [](double c) { return c == 0.0; });
}

// ---------------------------------------------------------------------------

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word-vector file " + path.string());
  try {
    return parse(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Lexicon Lexicon::parse(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    values.clear();
    std::string num;
    while (fields >> num) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(num, &used));
        if (used != num.size()) throw std::invalid_argument(num);
      } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line_no) + ": bad number '" + num + "'");
      }
    }
    // "<count> <dim>" header
    if (line_no == 1 && values.size() == 1 &&
        std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      continue;
    if (values.empty()) throw DataError("line " + std::to_string(line_no) + ": no vector values");
    try {
      lex.add(token, values);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lex;
}

void Lexicon::add(std::string_view token, std::span<const double> values) {
  if (dim_ == 0 && words_.empty()) dim_ = values.size();
  if (values.size() != dim_)
    throw DataError("dimension mismatch: expected " + std::to_string(dim_) + ", got " +
                    std::to_string(values.size()));
  std::string key;
  for (char c : token) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (index_.contains(key)) return;
  index_.emplace(key, words_.size());
  words_.push_back(std::move(key));
  data_.insert(data_.end(), values.begin(), values.end());
}

bool Lexicon::contains(std::string_view token) const { return index_.contains(std::string(token)); }

std::span<const double> Lexicon::vector(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return std::span<const double>(data_).subspan(it->second * dim_, dim_);
}

// ---------------------------------------------------------------------------

EmbeddingVector SentenceEmbedder::embed(std::string_view text) const {
  return embed_tokens(tokenize(text).tokens);
}

WordAverageEmbedder::WordAverageEmbedder(std::shared_ptr<const Lexicon> lexicon)
    : lexicon_(std::move(lexicon)) {
  if (!lexicon_) throw ValidationError("embedder needs a lexicon");
}

EmbeddingVector WordAverageEmbedder::embed_tokens(std::span<const std::string> tokens) const {
  EmbeddingVector out{std::vector<double>(lexicon_->dim(), 0.0)};
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    auto v = lexicon_->vector(t);
    if (v.empty()) continue;
    for (std::size_t i = 0; i < v.size(); ++i) out.components[i] += v[i];
    ++hits;
  }
  if (hits == 0) return out;
  // The mean's scale cancels under normalization, so normalize the sum directly.
  const double n = out.norm();
  if (n == 0.0) {
    std::fill(out.components.begin(), out.components.end(), 0.0);
    return out;
  }
  for (double& c : out.components) c /= n;
  return out;
}

EmbeddingVector embed(std::string_view text, const Lexicon& lexicon) {
  // Non-owning view; the lexicon outlives this call.
  WordAverageEmbedder e(std::shared_ptr<const Lexicon>(&lexicon, [](const Lexicon*) {}));
  return e.embed(text);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw ValidationError("cosine of vectors with different dimensions (" + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()) + ")");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  return cosine(std::span<const double>(u.components), std::span<const double>(v.components));
}

// ---------------------------------------------------------------------------

std::unordered_set<std::string> SynonymConfig::load_terms(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open term list " + path.string());
  std::unordered_set<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    std::string term = line.substr(b, e - b + 1);
    for (char& c : term) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    terms.insert(std::move(term));
  }
  return terms;
}

void SynonymConfig::validate() const {
  if (!(min_cosine >= -1.0 && min_cosine <= 1.0))
    throw ValidationError("min_cosine must lie in [-1, 1]");
}

std::vector<std::string> synonyms(std::string_view term, const SynonymConfig& cfg,
                                  const Lexicon& lexicon) {
  if (cfg.top_k == 0 || !cfg.medical_terms.contains(std::string(term))) return {};
  auto base = lexicon.vector(term);
  if (base.empty()) return {};

  std::vector<std::pair<double, const std::string*>> scored;
  for (const auto& w : lexicon.words()) {
    if (w == term) continue;
    double c = cosine(base, lexicon.vector(w));
    if (c >= cfg.min_cosine) scored.emplace_back(c, &w);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < cfg.top_k; ++i) out.push_back(*scored[i].second);
  return out;
}

}  // namespace factlink
