#include "factlink/stance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

constexpr const char* kModelMagic = "factlink-stance-model";
constexpr int kModelVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::array<double, kStanceClasses> class_weights_for(std::span<const StanceExample> data, bool balance) {
  std::array<double, kStanceClasses> w{1.0, 1.0, 1.0};
  if (!balance) return w;
  std::array<std::size_t, kStanceClasses> counts{};
  for (const auto& e : data) ++counts[class_index(e.label)];
  for (std::size_t c = 0; c < kStanceClasses; ++c)
    w[c] = counts[c] == 0 ? 0.0
                          : static_cast<double>(data.size()) /
                                (static_cast<double>(kStanceClasses) * static_cast<double>(counts[c]));
  return w;
}

void check_features(const StanceModel& model, std::span<const StanceExample> data) {
  for (const auto& e : data)
    if (e.features.size() != model.feature_dim)
      throw ValidationError("feature dimension " + std::to_string(e.features.size()) +
                            " does not match model dimension " + std::to_string(model.feature_dim));
}

// Runs `epochs` passes of shuffled mini-batch gradient descent in place.
void descend(StanceModel& model, std::span<const StanceExample> data, const TrainConfig& cfg,
             TrainResult& result) {
  const auto class_w = class_weights_for(data, cfg.balance_classes);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, data.size()));
  std::vector<StanceExample> chunk;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      chunk.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + batch); ++i)
        chunk.push_back(data[order[i]]);
      auto g = loss_and_gradient(model, chunk, cfg.l2, class_w);
      for (std::size_t i = 0; i < model.weights.size(); ++i)
        model.weights[i] -= cfg.learning_rate * g.weights[i];
      for (std::size_t c = 0; c < kStanceClasses; ++c) model.bias[c] -= cfg.learning_rate * g.bias[c];
    }
    result.epoch_loss.push_back(loss_and_gradient(model, data, cfg.l2, class_w).loss);
  }
  for (double w : model.weights)
    if (!std::isfinite(w)) throw Error("training diverged (non-finite weight); lower the learning rate");
}

std::string join_sentence_tokens(const TokenizedText& body, std::span<const std::size_t> idx) {
  std::string out;
  for (auto i : idx) {
    for (const auto& t : body.sentence(i)) {
      if (!out.empty()) out += ' ';
      out += t;
    }
  }
  return out;
}

}  // namespace

std::size_t class_index(Stance s) {
  for (std::size_t i = 0; i < kStanceClassOrder.size(); ++i)
    if (kStanceClassOrder[i] == s) return i;
  return 0;
}

// ---------------------------------------------------------------------------
// Windows and features

std::vector<std::size_t> window_indices(std::span<const double> similarities, std::size_t most_similar,
                                        std::size_t context) {
  const std::size_t n = similarities.size();
  if (n == 0) throw ValidationError("article has no sentences");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return similarities[a] > similarities[b]; });
  std::vector<bool> keep(n, false);
  for (std::size_t k = 0; k < std::min(most_similar, n); ++k) {
    const std::size_t c = order[k];
    const std::size_t lo = c >= context ? c - context : 0;
    const std::size_t hi = std::min(n - 1, c + context);
    for (std::size_t i = lo; i <= hi; ++i) keep[i] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.push_back(i);
  return out;
}

StanceWindow build_window(const TokenizedText& claim, const TokenizedText& body,
                          const SentenceEmbedder& embedder, std::size_t most_similar, std::size_t context) {
  if (body.sentence_count() == 0) throw ValidationError("article has no sentences");
  const auto claim_vec = embedder.embed_tokens(claim.tokens);
  std::vector<double> sims;
  for (std::size_t s = 0; s < body.sentence_count(); ++s)
    sims.push_back(cosine(claim_vec, embedder.embed_tokens(body.sentence(s))));
  StanceWindow w;
  w.sentence_indices = window_indices(sims, most_similar, context);
  w.window_text = join_sentence_tokens(body, w.sentence_indices);
  return w;
}

StanceWindow build_window(const Claim& claim, const Article& article, const SentenceEmbedder& embedder,
                          std::size_t most_similar, std::size_t context) {
  const auto body = tokenize(article.body);
  if (body.sentence_count() == 0)
    throw ValidationError("article '" + article.id + "' has an empty body");
  auto w = build_window(tokenize(claim.statement), body, embedder, most_similar, context);
  w.claim_id = claim.id;
  w.article_id = article.id;
  w.window_text.clear();
  for (auto i : w.sentence_indices) {
    const auto& b = body.sentence_bytes[i];
    if (!w.window_text.empty()) w.window_text += ' ';
    w.window_text.append(article.body, b.begin, b.end - b.begin);
  }
  return w;
}

std::vector<double> featurize(const EmbeddingVector& claim, std::span<const EmbeddingVector> window_sentences) {
  const std::size_t d = claim.dim();
  std::vector<double> mean(d, 0.0);
  for (const auto& s : window_sentences) {
    if (s.dim() != d) throw ValidationError("window embedding dimension differs from claim embedding");
    for (std::size_t i = 0; i < d; ++i) mean[i] += s.components[i];
  }
  if (!window_sentences.empty())
    for (double& m : mean) m /= static_cast<double>(window_sentences.size());

  std::vector<double> out;
  out.reserve(3 * d);
  out.insert(out.end(), claim.components.begin(), claim.components.end());
  out.insert(out.end(), mean.begin(), mean.end());
  for (std::size_t i = 0; i < d; ++i) out.push_back(std::abs(claim.components[i] - mean[i]));
  return out;
}

std::vector<double> featurize(const TokenizedText& claim, const TokenizedText& body,
                              std::span<const std::size_t> window, const SentenceEmbedder& embedder) {
  std::vector<EmbeddingVector> sents;
  for (auto i : window) sents.push_back(embedder.embed_tokens(body.sentence(i)));
  return featurize(embedder.embed_tokens(claim.tokens), sents);
}

// ---------------------------------------------------------------------------
// Model

std::array<double, kStanceClasses> StanceModel::logits(std::span<const double> x) const {
  if (x.size() != feature_dim)
    throw ValidationError("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                          std::to_string(feature_dim));
  std::array<double, kStanceClasses> z = bias;
  for (std::size_t c = 0; c < kStanceClasses; ++c) {
    const double* row = weights.data() + c * feature_dim;
    for (std::size_t j = 0; j < feature_dim; ++j) z[c] += row[j] * x[j];
  }
  return z;
}

std::array<double, kStanceClasses> softmax(const std::array<double, kStanceClasses>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::array<double, kStanceClasses> p{};
  double sum = 0.0;
  for (std::size_t c = 0; c < kStanceClasses; ++c) {
    p[c] = std::exp(logits[c] - m);
    sum += p[c];
  }
  for (auto& v : p) v = std::max(v / sum, std::numeric_limits<double>::min());
  return p;
}

LossGradient loss_and_gradient(const StanceModel& model, std::span<const StanceExample> batch, double l2,
                               const std::array<double, kStanceClasses>& class_weights) {
  LossGradient g;
  g.weights.assign(model.weights.size(), 0.0);
  const std::size_t d = model.feature_dim;
  for (const auto& ex : batch) {
    const auto z = model.logits(ex.features);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const double log_norm = m + std::log(sum);
    const std::size_t y = class_index(ex.label);
    const double cw = class_weights[y];
    g.loss += cw * (log_norm - z[y]);
    for (std::size_t c = 0; c < kStanceClasses; ++c) {
      const double delta = cw * (std::exp(z[c] - log_norm) - (c == y ? 1.0 : 0.0));
      g.bias[c] += delta;
      double* row = g.weights.data() + c * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += delta * ex.features[j];
    }
  }
  const double n = batch.empty() ? 1.0 : static_cast<double>(batch.size());
  g.loss /= n;
  for (double& v : g.weights) v /= n;
  for (double& v : g.bias) v /= n;
  double sq = 0.0;
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    sq += model.weights[i] * model.weights[i];
    g.weights[i] += l2 * model.weights[i];
  }
  g.loss += 0.5 * l2 * sq;
  return g;
}

void TrainConfig::validate(bool allow_zero_epochs) const {
  if (!allow_zero_epochs && epochs < 1) throw ValidationError("epochs must be at least 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("learning rate must be a finite non-negative number");
  if (batch_size < 1) throw ValidationError("batch size must be at least 1");
  if (!(l2 >= 0.0)) throw ValidationError("l2 must be non-negative");
}

TrainResult train(std::span<const StanceExample> data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw ValidationError("training set is empty");
  const std::size_t d = data.front().features.size();

  TrainResult result;
  StanceModel& model = result.model;
  model.feature_dim = d;
  model.weights.resize(kStanceClasses * d);
  std::mt19937_64 init_rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-0.01, 0.01);
  for (double& w : model.weights) w = uniform(init_rng);
  model.bias = {0.0, 0.0, 0.0};
  model.trained_on = "train:" + cfg.data_tag;
  check_features(model, data);

  std::array<std::size_t, kStanceClasses> counts{};
  for (const auto& e : data) ++counts[class_index(e.label)];
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    result.warnings.push_back("degenerate training data: only one stance class present");

  // Shuffling uses a stream independent from initialization.
  TrainConfig shuffled = cfg;
  shuffled.seed = cfg.seed ^ 0x9E3779B97F4A7C15ULL;
  descend(model, data, shuffled, result);
  return result;
}

TrainResult fine_tune(const StanceModel& model, std::span<const StanceExample> data, const TrainConfig& cfg) {
  cfg.validate(/*allow_zero_epochs=*/true);
  check_features(model, data);
  TrainResult result;
  result.model = model;
  if (cfg.epochs == 0) return result;
  if (data.empty()) throw ValidationError("fine-tuning set is empty");
  result.model.trained_on = model.trained_on + " -> finetune:" + cfg.data_tag;
  descend(result.model, data, cfg, result);
  return result;
}

StancePrediction predict(const StanceModel& model, std::span<const double> features) {
  StancePrediction p;
  p.probabilities = softmax(model.logits(features));
  std::size_t best = 0;
  for (std::size_t c = 1; c < kStanceClasses; ++c)
    if (p.probabilities[c] > p.probabilities[best]) best = c;
  p.label = kStanceClassOrder[best];
  return p;
}

StancePrediction predict(const StanceModel& model, const Claim& claim, const Article& article,
                         const SentenceEmbedder& embedder) {
  const auto claim_text = tokenize(claim.statement);
  const auto body = tokenize(article.body);
  const auto window = build_window(claim_text, body, embedder);
  return predict(model, featurize(claim_text, body, window.sentence_indices, embedder));
}

double accuracy(const StanceModel& model, std::span<const StanceExample> data) {
  if (data.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& e : data)
    if (predict(model, e.features).label == e.label) ++hit;
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Model file

void StanceModel::save(std::ostream& out) const {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "feature_dim " << feature_dim << '\n';
  out << "classes";
  for (auto s : kStanceClassOrder) out << ' ' << to_string(s);
  out << '\n';
  out << "trained_on " << trained_on << '\n';
  out << "weights\n";
  for (std::size_t c = 0; c < kStanceClasses; ++c) {
    for (std::size_t j = 0; j < feature_dim; ++j) out << (j ? " " : "") << format_double(weight(c, j));
    out << '\n';
  }
  out << "bias";
  for (double b : bias) out << ' ' << format_double(b);
  out << '\n';
}

void StanceModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path.string());
  save(out);
}

StanceModel StanceModel::load(std::istream& in) {
  auto fail = [](const std::string& what) { throw DataError("model file: " + what); };
  StanceModel m;
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != kModelMagic) fail("missing header");
  if (version != kModelVersion) fail("unsupported version " + std::to_string(version));
  if (!(in >> word >> m.feature_dim) || word != "feature_dim") fail("missing feature_dim");
  if (!(in >> word) || word != "classes") fail("missing class order");
  for (auto s : kStanceClassOrder)
    if (!(in >> word) || word != to_string(s)) fail("unexpected class order");
  if (!(in >> word) || word != "trained_on") fail("missing trained_on");
  std::getline(in, m.trained_on);
  if (!m.trained_on.empty() && m.trained_on.front() == ' ') m.trained_on.erase(0, 1);
  if (!(in >> word) || word != "weights") fail("missing weights");
  m.weights.resize(kStanceClasses * m.feature_dim);
  for (double& w : m.weights)
    if (!(in >> w) || !std::isfinite(w)) fail("bad weight value");
  if (!(in >> word) || word != "bias") fail("missing bias");
  for (double& b : m.bias)
    if (!(in >> b) || !std::isfinite(b)) fail("bad bias value");
  return m;
}

StanceModel StanceModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load(in);
}

// ---------------------------------------------------------------------------
// Data files

std::vector<StanceRecord> load_stance_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<StanceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = Json::parse(line);
      StanceRecord r;
      for (const char* f : {"claim_id", "article_id", "stance"})
        if (!j.contains(f) || !j[f].is_string()) throw DataError("missing or not a string", f, line_no);
      r.claim_id = j["claim_id"].get<std::string>();
      r.article_id = j["article_id"].get<std::string>();
      try {
        r.stance = parse_stance(j["stance"].get<std::string>());
      } catch (const DataError& e) {
        throw DataError(e.what(), "stance", line_no);
      }
      out.push_back(std::move(r));
    } catch (const Json::parse_error& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), "<record>", line_no);
    }
  }
  return out;
}

std::optional<Stance> map_fnc_stance(std::string_view name) {
  if (name == "agree") return Stance::Supporting;
  if (name == "disagree") return Stance::Contradicting;
  if (name == "discuss") return Stance::Neutral;
  if (name == "unrelated") return std::nullopt;
  throw DataError("unknown FNC stance '" + std::string(name) + "'");
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get();
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError("CSV ends inside a quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FncPair> load_fnc(const std::filesystem::path& stances_csv, const std::filesystem::path& bodies_csv) {
  auto read = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open " + p.string());
    auto rows = parse_csv(in);
    if (rows.empty()) throw DataError(p.string() + ": empty CSV");
    return rows;
  };
  auto column = [](const std::vector<std::string>& header, std::string_view name, const std::filesystem::path& p) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DataError(p.string() + ": missing column '" + std::string(name) + "'");
  };

  const auto body_rows = read(bodies_csv);
  const auto body_id_col = column(body_rows[0], "Body ID", bodies_csv);
  const auto body_text_col = column(body_rows[0], "articleBody", bodies_csv);
  std::map<std::string, std::string> bodies;
  for (std::size_t r = 1; r < body_rows.size(); ++r) {
    const auto& row = body_rows[r];
    if (row.size() <= std::max(body_id_col, body_text_col)) continue;
    bodies[row[body_id_col]] = row[body_text_col];
  }

  const auto stance_rows = read(stances_csv);
  const auto head_col = column(stance_rows[0], "Headline", stances_csv);
  const auto id_col = column(stance_rows[0], "Body ID", stances_csv);
  const auto stance_col = column(stance_rows[0], "Stance", stances_csv);
  std::vector<FncPair> out;
  for (std::size_t r = 1; r < stance_rows.size(); ++r) {
    const auto& row = stance_rows[r];
    if (row.size() <= std::max({head_col, id_col, stance_col})) continue;
    auto stance = map_fnc_stance(row[stance_col]);
    if (!stance) continue;
    auto body = bodies.find(row[id_col]);
    if (body == bodies.end())
      throw DataError(stances_csv.string() + ": row " + std::to_string(r + 1) + " references unknown body " + row[id_col]);
    out.push_back({row[head_col], body->second, *stance});
  }
  return out;
}

}  // namespace factlink
