#pragma once

// Stance classification: similarity windows over the article, pooled
// embedding features and a softmax regression head with pretrain/fine-tune.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factlink/embedding.hpp"
#include "factlink/records.hpp"
#include "factlink/text.hpp"

namespace factlink {

inline constexpr std::size_t kStanceClasses = 3;
/// Row order of the weight matrix; also the argmax tie-break order.
inline constexpr std::array<Stance, kStanceClasses> kStanceClassOrder = {
    Stance::Supporting, Stance::Contradicting, Stance::Neutral};

std::size_t class_index(Stance s);

struct StanceWindow {
  std::string claim_id;
  std::string article_id;
  std::vector<std::size_t> sentence_indices;  ///< strictly increasing
  std::string window_text;
};

/// Picks the `most_similar` sentences closest to the claim, extends each by
/// `context` sentences on both sides, merges overlaps and returns the union in
/// document order. Throws ValidationError for an article without sentences.
StanceWindow build_window(const TokenizedText& claim, const TokenizedText& body,
                          const SentenceEmbedder& embedder, std::size_t most_similar = 3,
                          std::size_t context = 1);

/// Same selection from precomputed similarities (one per sentence).
std::vector<std::size_t> window_indices(std::span<const double> similarities,
                                        std::size_t most_similar = 3, std::size_t context = 1);

StanceWindow build_window(const Claim& claim, const Article& article, const SentenceEmbedder& embedder,
                          std::size_t most_similar = 3, std::size_t context = 1);

/// [claim; mean window sentence embedding; |claim - mean|], length 3*dim.
std::vector<double> featurize(const EmbeddingVector& claim,
                              std::span<const EmbeddingVector> window_sentences);
std::vector<double> featurize(const TokenizedText& claim, const TokenizedText& body,
                              std::span<const std::size_t> window, const SentenceEmbedder& embedder);

struct StanceExample {
  std::vector<double> features;
  Stance label = Stance::Neutral;
};

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.1;
  std::size_t batch_size = 16;
  std::uint64_t seed = 42;
  double l2 = 1e-4;
  /// Inverse-frequency class weights in the loss.
  bool balance_classes = false;
  /// Recorded in the model provenance.
  std::string data_tag = "data";

  void validate(bool allow_zero_epochs = false) const;
};

struct StanceModel {
  std::size_t feature_dim = 0;
  std::vector<double> weights;  ///< row-major kStanceClasses x feature_dim
  std::array<double, kStanceClasses> bias{};
  std::string trained_on;

  double weight(std::size_t cls, std::size_t j) const { return weights[cls * feature_dim + j]; }
  std::array<double, kStanceClasses> logits(std::span<const double> x) const;
  bool operator==(const StanceModel&) const = default;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static StanceModel load(std::istream& in);
  static StanceModel load(const std::filesystem::path& path);
};

/// Numerically stable softmax.
std::array<double, kStanceClasses> softmax(const std::array<double, kStanceClasses>& logits);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> weights;  ///< same layout as StanceModel::weights
  std::array<double, kStanceClasses> bias{};
};

/// Weighted mean cross-entropy plus (l2/2)*|W|^2 and its exact gradient.
/// `class_weights` defaults to all ones.
LossGradient loss_and_gradient(const StanceModel& model, std::span<const StanceExample> batch,
                               double l2,
                               const std::array<double, kStanceClasses>& class_weights = {1.0, 1.0, 1.0});

struct TrainResult {
  StanceModel model;
  std::vector<double> epoch_loss;  ///< full-data loss after each epoch
  std::vector<std::string> warnings;
};

/// Mini-batch gradient descent from a seeded uniform [-0.01, 0.01] start.
TrainResult train(std::span<const StanceExample> data, const TrainConfig& cfg);

/// Continues gradient descent from `model`'s weights. Zero epochs returns the
/// model unchanged. Throws ValidationError on a feature-dimension mismatch.
TrainResult fine_tune(const StanceModel& model, std::span<const StanceExample> data,
                      const TrainConfig& cfg);

struct StancePrediction {
  Stance label = Stance::Supporting;
  std::array<double, kStanceClasses> probabilities{};
};

StancePrediction predict(const StanceModel& model, std::span<const double> features);
StancePrediction predict(const StanceModel& model, const Claim& claim, const Article& article,
                         const SentenceEmbedder& embedder);

/// Plain accuracy of `model` on `data`.
double accuracy(const StanceModel& model, std::span<const StanceExample> data);

// Training data files.

struct StanceRecord {
  std::string claim_id;
  std::string article_id;
  Stance stance = Stance::Neutral;
};

/// `stance_train.jsonl`: one {claim_id, article_id, stance} per line.
std::vector<StanceRecord> load_stance_records(const std::filesystem::path& path);

struct FncPair {
  std::string headline;
  std::string body;
  Stance stance = Stance::Neutral;
};

/// FNC-style pair of CSV files: stances (Headline, Body ID, Stance) and bodies
/// (Body ID, articleBody). Unrelated pairs are dropped; agree, disagree and
/// discuss map to supporting, contradicting and neutral.
std::vector<FncPair> load_fnc(const std::filesystem::path& stances_csv,
                              const std::filesystem::path& bodies_csv);

/// Maps an FNC stance name; nullopt for "unrelated". Unknown names throw DataError.
std::optional<Stance> map_fnc_stance(std::string_view name);

/// Parses RFC 4180 CSV (quoted fields, embedded newlines and doubled quotes).
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

}  // namespace factlink
