#pragma once

// Data providers that turn feed payloads into corpus records, and monitors
// that run them on a schedule.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "factlink/corpus_store.hpp"
#include "factlink/records.hpp"

namespace factlink {

/// Lowercases scheme and host, drops the fragment, default ports and tracking
/// parameters (utm_*, fbclid, gclid, mc_cid, mc_eid).
std::string normalize_url(std::string_view url);

/// "art-" followed by the FNV-1a 64-bit hash of the normalized URL, in hex.
std::string article_id_for_url(std::string_view url);
std::string claim_id_for_key(std::string_view key);

enum class ContentKind { ArticleFeed, FactCheckFeed, ArticlePage };
std::string to_string(ContentKind k);

struct ParsedRecords {
  std::vector<Article> articles;
  std::vector<Claim> claims;
  std::vector<std::string> warnings;
};

struct ProviderContext {
  std::string source_id;
  std::string checker;           ///< fact-checker id for claim feeds
  const RatingMap* ratings = nullptr;
  const Article* trigger = nullptr;  ///< the new record a chained provider runs for
};

class DataProvider {
 public:
  virtual ~DataProvider() = default;
  virtual std::string id() const = 0;
  virtual ContentKind accepts() const = 0;
  /// Deterministic for a fixed payload and context.
  virtual ParsedRecords parse(std::string_view payload, const ProviderContext& ctx) const = 0;
};

/// RSS 2.0: one Article per <item>. The body is content:encoded, falling back
/// to description, with markup stripped. Bad pubDate values leave the date null
/// and add a warning.
class RssProvider : public DataProvider {
 public:
  std::string id() const override { return "rss"; }
  ContentKind accepts() const override { return ContentKind::ArticleFeed; }
  ParsedRecords parse(std::string_view payload, const ProviderContext& ctx) const override;
};

/// Line-delimited claims: {"statement", "rating", "url", optional "id" and
/// "checker"}. Raw ratings are unified through the context's RatingMap.
class ClaimFeedProvider : public DataProvider {
 public:
  std::string id() const override { return "claim_feed"; }
  ContentKind accepts() const override { return ContentKind::FactCheckFeed; }
  ParsedRecords parse(std::string_view payload, const ProviderContext& ctx) const override;
};

/// Chained after a feed: replaces the trigger article's body with the text of
/// its page (<article> element when present, else <body>).
class FullTextProvider : public DataProvider {
 public:
  std::string id() const override { return "full_text"; }
  ContentKind accepts() const override { return ContentKind::ArticlePage; }
  ParsedRecords parse(std::string_view payload, const ProviderContext& ctx) const override;
};

/// rss, claim_feed and full_text, parsed straight from a payload.
ParsedRecords parse_feed(std::string_view payload, const DataProvider& provider, const ProviderContext& ctx = {});

struct Monitor {
  std::string id;
  std::string provider;
  long long interval_seconds = 3600;
  /// feeds: list of locations; source_id; checker; url_map: location of a
  /// {"<url>": "<location>"} object used to resolve chained page fetches.
  Json params = Json::object();
  std::vector<std::string> chain;

  static Monitor from_json(const Json& j);
  Json to_json() const;
};

struct MonitorRun {
  std::string monitor_id;
  std::size_t new_records = 0;
  std::size_t updated = 0;
  std::size_t chained = 0;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  Json to_json() const;
};

struct RunReport {
  std::vector<MonitorRun> runs;  ///< only monitors that were due
  Json to_json() const;
};

/// Runs monitors against a store. Locations are resolved by the fetcher;
/// the default reads files relative to `base_dir`.
class Ingestor {
 public:
  using Fetcher = std::function<std::string(const std::string& location)>;

  Ingestor(CorpusStore& store, RatingMap ratings, std::filesystem::path base_dir = ".", Fetcher fetch = {});

  void register_provider(std::unique_ptr<DataProvider> provider);
  const DataProvider* provider(std::string_view id) const;

  /// Throws ValidationError for a non-positive interval, an unknown provider or
  /// chained provider, or a duplicate id.
  void add_monitor(Monitor m);
  /// {"monitors": [...]}
  void load_config(const std::filesystem::path& path);
  const std::vector<Monitor>& monitors() const { return monitors_; }

  /// Runs every monitor whose last run plus interval is at most `now` (or that
  /// never ran). Failures stay inside that monitor's report.
  RunReport run_due_monitors(Timestamp now);

  /// Last run times and enriched article ids.
  Json state() const;
  void restore_state(const Json& j);
  void save_state(const std::filesystem::path& path) const;
  void load_state(const std::filesystem::path& path);

 private:
  MonitorRun run_monitor(const Monitor& m);
  std::size_t run_chain(const Monitor& m, const Article& trigger, MonitorRun& run,
                        const std::map<std::string, std::string>& url_map);
  UpsertOutcome store_article(Article a);

  CorpusStore& store_;
  RatingMap ratings_;
  std::filesystem::path base_dir_;
  Fetcher fetch_;
  std::map<std::string, std::unique_ptr<DataProvider>, std::less<>> providers_;
  std::vector<Monitor> monitors_;
  std::map<std::string, Timestamp> last_run_;
  /// Articles whose body came from a chained page fetch; feed re-reads keep it.
  std::set<std::string> enriched_;
};

}  // namespace factlink
