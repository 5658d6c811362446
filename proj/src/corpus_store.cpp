#include "factlink/corpus_store.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <unistd.h>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

template <typename Map, typename Key, typename Record>
UpsertOutcome upsert_into(Map& map, const Key& key, const Record& r) {
  auto it = map.find(key);
  if (it == map.end()) {
    map.emplace(key, r);
    return UpsertOutcome::Created;
  }
  if (it->second == r) return UpsertOutcome::Unchanged;
  it->second = r;
  return UpsertOutcome::Updated;
}

template <typename Map>
auto values_of(const Map& map) {
  std::vector<typename Map::mapped_type> out;
  out.reserve(map.size());
  for (const auto& [_, v] : map) out.push_back(v);
  return out;
}

// Fields accepted by query() for each record kind.
const std::set<std::string>& known_fields(RecordKind kind) {
  static const std::set<std::string> kArticle{"id",    "source_id", "url",     "title",
                                              "body",  "published_at", "authors", "split"};
  static const std::set<std::string> kClaim{"id", "statement", "rating", "fact_checker_id",
                                            "fact_check_url"};
  static const std::set<std::string> kSource{"id", "name", "base_url", "reliability", "kind"};
  static const std::set<std::string> kLabel{"article_id", "claim_id",       "presence",
                                            "stance",     "origin",         "presence_score",
                                            "pair_veracity"};
  switch (kind) {
    case RecordKind::Articles: return kArticle;
    case RecordKind::Claims: return kClaim;
    case RecordKind::Sources: return kSource;
    case RecordKind::PairLabels: return kLabel;
  }
  return kArticle;
}

std::string field_text(const Json& v) {
  if (v.is_null()) return "null";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string label_key_text(const PairLabel& p) {
  return p.article_id + "\x1f" + p.claim_id + "\x1f" + to_string(p.origin);
}

}  // namespace

RecordKind parse_record_kind(std::string_view s) {
  if (s == "articles") return RecordKind::Articles;
  if (s == "claims") return RecordKind::Claims;
  if (s == "sources") return RecordKind::Sources;
  if (s == "pair_labels") return RecordKind::PairLabels;
  throw ValidationError("unknown record kind '" + std::string(s) + "'");
}

std::string to_string(RecordKind k) {
  switch (k) {
    case RecordKind::Articles: return "articles";
    case RecordKind::Claims: return "claims";
    case RecordKind::Sources: return "sources";
    case RecordKind::PairLabels: return "pair_labels";
  }
  return "?";
}

std::string file_name(RecordKind k) { return to_string(k) + ".jsonl"; }

// ---------------------------------------------------------------------------
// RatingMap

std::string RatingMap::normalize(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

RatingMap RatingMap::defaults() {
  RatingMap m;
  for (auto r : kAllRatings) m.add(kAnyChecker, to_string(r), r);
  return m;
}

RatingMap RatingMap::from_json(const Json& j) {
  if (!j.is_object()) throw DataError("rating map must be a JSON object");
  RatingMap m;
  for (const auto& [checker, table] : j.items()) {
    if (!table.is_object()) throw DataError("expected object of raw labels", checker);
    for (const auto& [raw, value] : table.items()) {
      if (!value.is_string()) throw DataError("expected unified rating name", checker + "." + raw);
      try {
        m.add(checker, raw, parse_rating(value.get<std::string>()));
      } catch (const DataError& e) {
        throw DataError(e.what(), checker + "." + raw);
      }
    }
  }
  return m;
}

RatingMap RatingMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rating map " + path.string());
  try {
    return from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw DataError("rating map " + path.string() + ": " + e.what());
  }
}

void RatingMap::add(std::string_view checker, std::string_view raw_label, VeracityRating value) {
  table_[std::string(checker)][normalize(raw_label)] = value;
}

VeracityRating RatingMap::unify(std::string_view raw_label, std::string_view checker) const {
  const std::string key = normalize(raw_label);
  for (std::string_view table_id : {checker, kAnyChecker}) {
    auto t = table_.find(table_id);
    if (t == table_.end()) continue;
    if (auto hit = t->second.find(key); hit != t->second.end()) return hit->second;
  }
  throw UnmappedLabelError(std::string(raw_label), std::string(checker));
}

Json RatingMap::to_json() const {
  Json j = Json::object();
  for (const auto& [checker, table] : table_)
    for (const auto& [raw, value] : table) j[checker][raw] = to_string(value);
  return j;
}

VeracityRating unify_rating(std::string_view raw_label, std::string_view checker,
                            const RatingMap& map) {
  return map.unify(raw_label, checker);
}

// ---------------------------------------------------------------------------
// CorpusStore

std::size_t CorpusStore::import_records(const std::filesystem::path& path, RecordKind kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return import_stream(in, kind);
}

std::size_t CorpusStore::import_stream(std::istream& in, RecordKind kind) {
  std::vector<Source> sources;
  std::vector<Article> articles;
  std::vector<Claim> claims;
  std::vector<PairLabel> labels;
  std::map<std::string, Json> seen;  // key -> serialized record, for in-file conflicts

  std::string line;
  std::size_t line_no = 0;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), "<record>", line_no);
    }
    std::string key;
    Json canonical;
    try {
      switch (kind) {
        case RecordKind::Sources:
          sources.push_back(source_from_json(j));
          key = sources.back().id;
          canonical = to_json(sources.back());
          break;
        case RecordKind::Articles:
          articles.push_back(article_from_json(j));
          key = articles.back().id;
          canonical = to_json(articles.back());
          break;
        case RecordKind::Claims:
          claims.push_back(claim_from_json(j));
          key = claims.back().id;
          canonical = to_json(claims.back());
          break;
        case RecordKind::PairLabels:
          labels.push_back(pair_label_from_json(j));
          key = label_key_text(labels.back());
          canonical = to_json(labels.back());
          break;
      }
    } catch (const DataError& e) {
      throw DataError(e.detail(), e.field().empty() ? "<record>" : e.field(), line_no);
    }
    auto [it, inserted] = seen.emplace(key, canonical);
    if (!inserted && it->second != canonical)
      throw DataError("duplicate id with conflicting content", "id", line_no);
    ++count;
  }

  std::unique_lock lock(mutex_);
  if (kind == RecordKind::PairLabels) {
    for (const auto& p : labels) {
      if (!articles_.contains(p.article_id))
        throw DataError("unknown article '" + p.article_id + "'", "article_id");
      if (!claims_.contains(p.claim_id))
        throw DataError("unknown claim '" + p.claim_id + "'", "claim_id");
    }
  }
  for (const auto& s : sources) upsert_into(sources_, s.id, s);
  for (const auto& a : articles) upsert_into(articles_, a.id, a);
  for (const auto& c : claims) upsert_into(claims_, c.id, c);
  for (const auto& p : labels) upsert_label_locked(p);
  return count;
}

UpsertOutcome CorpusStore::upsert(const Source& s) {
  if (s.id.empty()) throw DataError("must be non-empty", "id");
  std::unique_lock lock(mutex_);
  return upsert_into(sources_, s.id, s);
}

UpsertOutcome CorpusStore::upsert(const Article& a) {
  if (a.id.empty()) throw DataError("must be non-empty", "id");
  std::unique_lock lock(mutex_);
  return upsert_into(articles_, a.id, a);
}

UpsertOutcome CorpusStore::upsert(const Claim& c) {
  if (c.id.empty()) throw DataError("must be non-empty", "id");
  if (c.statement.find_first_not_of(" \t\r\n") == std::string::npos)
    throw DataError("must be non-empty", "statement");
  std::unique_lock lock(mutex_);
  return upsert_into(claims_, c.id, c);
}

UpsertOutcome CorpusStore::upsert(const PairLabel& p) {
  if (p.stance && p.presence == Presence::NotPresent)
    throw DataError("stance given for a not_present pair", "stance");
  std::unique_lock lock(mutex_);
  if (!articles_.contains(p.article_id))
    throw DataError("unknown article '" + p.article_id + "'", "article_id");
  if (!claims_.contains(p.claim_id))
    throw DataError("unknown claim '" + p.claim_id + "'", "claim_id");
  return upsert_label_locked(p);
}

UpsertOutcome CorpusStore::upsert_label_locked(const PairLabel& p) {
  return upsert_into(labels_, LabelKey{p.article_id, p.claim_id, p.origin}, p);
}

std::optional<Source> CorpusStore::source(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = sources_.find(id);
  if (it == sources_.end()) return std::nullopt;
  return it->second;
}

std::optional<Article> CorpusStore::article(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = articles_.find(id);
  if (it == articles_.end()) return std::nullopt;
  return it->second;
}

std::optional<Claim> CorpusStore::claim(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = claims_.find(id);
  if (it == claims_.end()) return std::nullopt;
  return it->second;
}

std::vector<Source> CorpusStore::sources() const {
  std::shared_lock lock(mutex_);
  return values_of(sources_);
}

std::vector<Article> CorpusStore::articles() const {
  std::shared_lock lock(mutex_);
  return values_of(articles_);
}

std::vector<Claim> CorpusStore::claims() const {
  std::shared_lock lock(mutex_);
  return values_of(claims_);
}

std::vector<PairLabel> CorpusStore::pair_labels() const {
  std::shared_lock lock(mutex_);
  return values_of(labels_);
}

std::size_t CorpusStore::size(RecordKind kind) const {
  std::shared_lock lock(mutex_);
  switch (kind) {
    case RecordKind::Articles: return articles_.size();
    case RecordKind::Claims: return claims_.size();
    case RecordKind::Sources: return sources_.size();
    case RecordKind::PairLabels: return labels_.size();
  }
  return 0;
}

std::vector<Json> CorpusStore::serialized(RecordKind kind) const {
  std::shared_lock lock(mutex_);
  std::vector<Json> out;
  auto dump_all = [&out](const auto& map) {
    out.reserve(map.size());
    for (const auto& [_, v] : map) out.push_back(to_json(v));
  };
  switch (kind) {
    case RecordKind::Articles: dump_all(articles_); break;
    case RecordKind::Claims: dump_all(claims_); break;
    case RecordKind::Sources: dump_all(sources_); break;
    case RecordKind::PairLabels: dump_all(labels_); break;
  }
  return out;
}

Page CorpusStore::query(RecordKind kind, const std::vector<FieldFilter>& filter,
                        PageRequest page) const {
  const auto& fields = known_fields(kind);
  for (const auto& f : filter)
    if (!fields.contains(f.field))
      throw ValidationError("unknown field '" + f.field + "' for " + to_string(kind));

  Page result;
  for (auto& rec : serialized(kind)) {
    bool keep = std::all_of(filter.begin(), filter.end(), [&](const FieldFilter& f) {
      return field_text(rec.at(f.field)) == f.value;
    });
    if (!keep) continue;
    if (result.total >= page.offset && result.records.size() < page.limit)
      result.records.push_back(std::move(rec));
    ++result.total;
  }
  return result;
}

void CorpusStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (auto kind : {RecordKind::Sources, RecordKind::Articles, RecordKind::Claims,
                    RecordKind::PairLabels}) {
    std::string text;
    for (const auto& rec : serialized(kind)) {
      text += rec.dump();
      text += '\n';
    }
    write_file_atomic(dir / file_name(kind), text);
  }
}

void CorpusStore::load(const std::filesystem::path& dir) {
  // Labels last: they reference articles and claims.
  for (auto kind : {RecordKind::Sources, RecordKind::Articles, RecordKind::Claims,
                    RecordKind::PairLabels}) {
    auto path = dir / file_name(kind);
    if (std::filesystem::exists(path)) {
      try {
        import_records(path, kind);
      } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
      }
    }
  }
}

bool CorpusStore::same_records(const CorpusStore& other) const {
  for (auto kind : {RecordKind::Sources, RecordKind::Articles, RecordKind::Claims,
                    RecordKind::PairLabels})
    if (serialized(kind) != other.serialized(kind)) return false;
  return true;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace factlink
