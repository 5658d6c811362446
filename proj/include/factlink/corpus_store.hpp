#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "factlink/records.hpp"

namespace factlink {

enum class RecordKind { Articles, Claims, Sources, PairLabels };

RecordKind parse_record_kind(std::string_view s);
std::string to_string(RecordKind k);
/// Canonical file name inside a data directory, e.g. "articles.jsonl".
std::string file_name(RecordKind k);

/// Checker-specific raw rating vocabularies mapped onto the six unified values.
///
/// The table is keyed by checker id; the "*" entry applies to every checker and
/// is consulted after the checker's own entry. Raw labels are matched after
/// trimming, lowercasing and collapsing internal whitespace.
class RatingMap {
 public:
  static constexpr std::string_view kAnyChecker = "*";

  /// The six unified names, valid for every checker.
  static RatingMap defaults();
  /// JSON object: {"<checker>": {"<raw label>": "<unified value>", ...}, ...}.
  static RatingMap from_json(const Json& j);
  static RatingMap load(const std::filesystem::path& path);

  void add(std::string_view checker, std::string_view raw_label, VeracityRating value);
  VeracityRating unify(std::string_view raw_label, std::string_view checker) const;
  Json to_json() const;

  static std::string normalize(std::string_view raw_label);

 private:
  std::map<std::string, std::map<std::string, VeracityRating>, std::less<>> table_;
};

/// Throws UnmappedLabelError when neither the checker nor the "*" table knows the label.
VeracityRating unify_rating(std::string_view raw_label, std::string_view checker,
                            const RatingMap& map);

struct FieldFilter {
  std::string field;
  std::string value;  ///< compared against the field's serialized form
};

struct PageRequest {
  std::size_t offset = 0;
  std::size_t limit = 50;
};

struct Page {
  std::vector<Json> records;
  std::size_t total = 0;
};

enum class UpsertOutcome { Created, Updated, Unchanged };

/// File-backed corpus of sources, articles, claims and pair labels.
///
/// Readers may run concurrently; writers are serialized. Every record kind is
/// kept ordered by id so listings and exports are stable.
class CorpusStore {
 public:
  using LabelKey = std::tuple<std::string, std::string, Origin>;

  CorpusStore() = default;
  CorpusStore(const CorpusStore&) = delete;
  CorpusStore& operator=(const CorpusStore&) = delete;

  /// Reads one JSON record per line and upserts by id. The whole file is
  /// validated before anything is applied. Returns the number of records read.
  std::size_t import_records(const std::filesystem::path& path, RecordKind kind);
  std::size_t import_stream(std::istream& in, RecordKind kind);

  UpsertOutcome upsert(const Source& s);
  UpsertOutcome upsert(const Article& a);
  UpsertOutcome upsert(const Claim& c);
  /// Throws DataError unless both referenced ids exist.
  UpsertOutcome upsert(const PairLabel& p);

  std::optional<Source> source(std::string_view id) const;
  std::optional<Article> article(std::string_view id) const;
  std::optional<Claim> claim(std::string_view id) const;

  std::vector<Source> sources() const;
  std::vector<Article> articles() const;
  std::vector<Claim> claims() const;
  std::vector<PairLabel> pair_labels() const;

  std::size_t size(RecordKind kind) const;

  /// Equality filters over the serialized record fields. Unknown field -> ValidationError.
  Page query(RecordKind kind, const std::vector<FieldFilter>& filter, PageRequest page) const;

  /// Writes all four files into `dir`, each via a temporary file and rename.
  void save(const std::filesystem::path& dir) const;
  /// Imports whichever of the four files exist in `dir`.
  void load(const std::filesystem::path& dir);

  /// Record-set equality.
  bool same_records(const CorpusStore& other) const;

 private:
  std::vector<Json> serialized(RecordKind kind) const;
  UpsertOutcome upsert_label_locked(const PairLabel& p);

  mutable std::shared_mutex mutex_;
  std::map<std::string, Source, std::less<>> sources_;
  std::map<std::string, Article, std::less<>> articles_;
  std::map<std::string, Claim, std::less<>> claims_;
  std::map<LabelKey, PairLabel> labels_;
};

/// Writes `contents` to `path` through a sibling temporary file and an atomic rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace factlink
