#pragma once

// Canonical data model shared by every module, with the JSON line formats
// used for persistence.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace factlink {

using Json = nlohmann::json;

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

enum class Reliability { Reliable, Unreliable, Unknown };
enum class SourceKind { NewsOrBlog, FactChecker };
enum class Split { Sample1, Sample2, Unsplit };
enum class VeracityRating { False, MostlyFalse, Mixture, MostlyTrue, True, Unknown };
enum class Presence { Present, Suggestive, NotPresent };
enum class Stance { Supporting, Contradicting, Neutral };
enum class Origin { Manual, Predicted };

inline constexpr VeracityRating kAllRatings[] = {
    VeracityRating::False,      VeracityRating::MostlyFalse, VeracityRating::Mixture,
    VeracityRating::MostlyTrue, VeracityRating::True,        VeracityRating::Unknown};
inline constexpr Stance kAllStances[] = {Stance::Supporting, Stance::Contradicting,
                                         Stance::Neutral};

std::string to_string(Reliability v);
std::string to_string(SourceKind v);
std::string to_string(Split v);
std::string to_string(VeracityRating v);
std::string to_string(Presence v);
std::string to_string(Stance v);
std::string to_string(Origin v);

// Parsers accept exactly the strings produced by to_string; anything else throws DataError.
Reliability parse_reliability(std::string_view s);
SourceKind parse_source_kind(std::string_view s);
Split parse_split(std::string_view s);
VeracityRating parse_rating(std::string_view s);
Presence parse_presence(std::string_view s);
Stance parse_stance(std::string_view s);
Origin parse_origin(std::string_view s);

struct Source {
  std::string id;
  std::string name;
  std::string base_url;
  Reliability reliability = Reliability::Unknown;
  SourceKind kind = SourceKind::NewsOrBlog;

  bool operator==(const Source&) const = default;
};

struct Article {
  std::string id;
  std::string source_id;
  std::string url;
  std::string title;
  std::string body;
  std::optional<Timestamp> published_at;
  std::vector<std::string> authors;
  Split split = Split::Unsplit;

  /// Articles whose body is blank are kept in the store but never scored.
  bool scorable() const;

  bool operator==(const Article&) const = default;
};

struct Claim {
  std::string id;
  std::string statement;
  VeracityRating rating = VeracityRating::Unknown;
  std::string fact_checker_id;
  std::string fact_check_url;

  bool operator==(const Claim&) const = default;
};

struct PairLabel {
  std::string article_id;
  std::string claim_id;
  Presence presence = Presence::NotPresent;
  std::optional<Stance> stance;
  Origin origin = Origin::Manual;
  std::optional<double> presence_score;
  std::optional<VeracityRating> pair_veracity;

  bool operator==(const PairLabel&) const = default;
};

// JSON conversion. from_json throws DataError naming the offending field.
Json to_json(const Source& s);
Json to_json(const Article& a);
Json to_json(const Claim& c);
Json to_json(const PairLabel& p);
Source source_from_json(const Json& j);
Article article_from_json(const Json& j);
Claim claim_from_json(const Json& j);
PairLabel pair_label_from_json(const Json& j);

/// RFC 3339 in UTC with a trailing Z.
std::string format_rfc3339(Timestamp t);
/// Accepts RFC 3339 with Z or a numeric offset, and fractional seconds.
std::optional<Timestamp> parse_rfc3339(std::string_view s);
/// RFC 822/1123 dates as found in RSS pubDate ("Tue, 10 Jun 2003 04:00:00 GMT").
std::optional<Timestamp> parse_rfc822(std::string_view s);

}  // namespace factlink
