#pragma once

// Classification metrics, ROC points, per-split presence evaluation and
// repeated stratified cross-validation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factlink/records.hpp"

namespace factlink {

/// Rows are gold classes, columns predictions.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> class_order);
  static ConfusionMatrix from_labels(std::vector<std::string> class_order, std::span<const std::size_t> gold,
                                     std::span<const std::size_t> predicted);

  void add(std::size_t gold, std::size_t predicted, std::size_t n = 1);
  std::size_t total() const;
  Json to_json() const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Metrics {
  std::vector<std::string> classes;
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  std::size_t total = 0;

  const ClassMetrics& of(const std::string& cls) const;
  Json to_json() const;
};

/// 0/0 counts as 0. Throws ValidationError for an empty matrix.
Metrics prf1(const ConfusionMatrix& m);

struct RocPoint {
  double threshold = std::numeric_limits<double>::infinity();  ///< score >= threshold is positive
  double fpr = 0.0;
  double tpr = 0.0;
};

/// (0,0), then one point per distinct score in descending order, ending at
/// (1,1). Throws ValidationError unless gold holds both classes.
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> gold);

/// threshold,fpr,tpr lines with a header; the opening threshold is "inf".
std::string roc_csv(std::span<const RocPoint> points);

double auc(std::span<const RocPoint> points);

// Presence evaluation.

struct PresenceCase {
  std::string article_id;
  std::string claim_id;
  Split split = Split::Unsplit;
  bool gold_present = false;  ///< Suggestive counts as present
};

/// Gold presence labels as evaluation cases; Suggestive maps to present.
std::vector<PresenceCase> presence_cases(std::span<const PairLabel> labels, std::span<const Article> articles,
                                         std::optional<Origin> origin = Origin::Manual);

struct SplitResult {
  std::string split;
  ConfusionMatrix confusion;
  Metrics metrics;
};

struct PresenceEvaluation {
  std::string method;
  double threshold = 0.0;
  std::vector<SplitResult> splits;  ///< sample1, sample2 when non-empty, then overall
  std::vector<double> scores;       ///< pooled, aligned with `gold`
  std::vector<int> gold;
  std::vector<RocPoint> roc;        ///< empty when gold holds one class only
  std::vector<std::string> warnings;

  const SplitResult* split(const std::string& name) const;
  Json to_json() const;
};

inline const std::vector<std::string> kPresenceClasses = {"present", "not_present"};

using PresenceScorer = std::function<double(const PresenceCase&)>;

/// Scores every case (in parallel when jobs > 1), thresholds at `threshold`
/// and fills a confusion matrix per split and overall. `split_filter` keeps
/// only one split.
PresenceEvaluation evaluate_presence(std::span<const PresenceCase> cases, const PresenceScorer& scorer,
                                     double threshold, std::optional<Split> split_filter = std::nullopt,
                                     std::size_t jobs = 1, std::string method = {});

// Cross-validation.

struct CVPlan {
  std::size_t k = 5;
  std::size_t repeats = 10;
  std::uint64_t seed = 42;
  std::vector<std::string> class_names;  ///< optional, for warnings

  void validate() const;
};

struct FoldResult {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double accuracy = 0.0;
};

struct CVResult {
  std::vector<FoldResult> folds;  ///< ordered by (repeat, fold)
  double mean_accuracy = 0.0;
  double stddev = 0.0;  ///< sample standard deviation of the fold accuracies
  bool stratified = true;
  std::vector<std::string> warnings;

  Json to_json() const;
};

/// Fold index of every example for one repeat. Stratified: each class's
/// shuffled members are dealt round-robin, continuing across classes.
std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed,
                                      bool stratified);

/// Receives the training indices and returns a predictor over example indices.
using Trainer = std::function<std::function<int(std::size_t)>(std::span<const std::size_t> train)>;

/// k-fold cross-validation repeated `plan.repeats` times; repeat r shuffles
/// with seed plan.seed + r. Falls back to unstratified folds (with a warning)
/// when some class has fewer than k members. Throws ValidationError when the
/// dataset has fewer than k examples.
CVResult cross_validate(std::span<const int> labels, const Trainer& trainer, const CVPlan& plan,
                        std::size_t jobs = 1);

/// Runs fn(0..n-1) on up to `jobs` threads; exceptions are rethrown.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace factlink
