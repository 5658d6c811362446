#pragma once

// Article-claim pair veracity and corpus label distributions.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factlink/records.hpp"

namespace factlink {

/// False<->True, MostlyFalse<->MostlyTrue; Mixture and Unknown map to themselves.
VeracityRating opposite(VeracityRating r);

/// Supporting keeps the claim rating, Contradicting flips it, Neutral gives
/// Unknown, and an Unknown claim rating stays Unknown.
VeracityRating combine(Stance stance, VeracityRating claim_rating);

struct PairVeracity {
  std::string article_id;
  std::string claim_id;
  VeracityRating value = VeracityRating::Unknown;
};

/// Veracities of the labels that carry a stance and reference a known claim.
/// Labels already holding a pair_veracity are recomputed, not trusted.
std::vector<PairVeracity> pair_veracities(std::span<const PairLabel> labels, std::span<const Claim> claims);

/// count * 100 / total rounded half-up to `decimals` places; 0 for total 0.
double percent(std::size_t count, std::size_t total, int decimals);

struct Distribution {
  std::vector<std::string> categories;
  std::vector<std::size_t> counts;
  std::size_t total() const;
  std::size_t count(const std::string& category) const;
  double percent(const std::string& category, int decimals) const;
  Json to_json(int decimals) const;
};

enum class ArticleRollup { OnlyTrue, OnlyFalse, Mixed, UnknownOnly };
std::string to_string(ArticleRollup r);

/// True and MostlyTrue count as true, False and MostlyFalse as false.
ArticleRollup rollup(std::span<const VeracityRating> article_veracities);

struct LabelReport {
  int decimals = 1;
  Distribution stance;
  Distribution veracity;
  Distribution articles;  ///< per-article rollups
  /// Share of pair veracities by source reliability.
  Distribution reliability;
  /// Veracity distribution within each reliability class.
  std::map<Reliability, Distribution> veracity_by_reliability;

  Json to_json() const;
  std::string to_text() const;
};

struct ReportOptions {
  int decimals = 1;
  /// Only labels of this origin; all when empty.
  std::optional<Origin> origin;
};

/// Counts over positive-presence labels with a stance.
LabelReport label_report(std::span<const PairLabel> labels, std::span<const Claim> claims,
                         std::span<const Article> articles, std::span<const Source> sources,
                         const ReportOptions& opts = {});

}  // namespace factlink
