#include "factlink/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "factlink/errors.hpp"
#include "factlink/xml.hpp"

namespace factlink {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool tracking_param(std::string_view key) {
  std::string k = lower(key);
  return k.starts_with("utm_") || k == "fbclid" || k == "gclid" || k == "mc_cid" || k == "mc_eid";
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string string_param(const Json& params, const char* key) {
  auto it = params.find(key);
  if (it == params.end() || it->is_null()) return {};
  if (!it->is_string()) throw ValidationError(std::string("monitor param '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> feeds_param(const Json& params) {
  auto it = params.find("feeds");
  if (it == params.end()) return {};
  if (it->is_string()) return {it->get<std::string>()};
  if (!it->is_array()) throw ValidationError("monitor param 'feeds' must be a list");
  std::vector<std::string> out;
  for (const auto& f : *it) {
    if (!f.is_string()) throw ValidationError("monitor param 'feeds' must hold strings");
    out.push_back(f.get<std::string>());
  }
  return out;
}

// Case-insensitive search for an element's inner content in loose HTML.
std::optional<std::string_view> html_element(std::string_view html, std::string_view tag) {
  std::string lowered = lower(html);
  std::string open = "<" + std::string(tag);
  std::size_t at = 0;
  while ((at = lowered.find(open, at)) != std::string::npos) {
    char next = at + open.size() < lowered.size() ? lowered[at + open.size()] : '\0';
    if (next == '>' || std::isspace(static_cast<unsigned char>(next))) break;
    at += open.size();
  }
  if (at == std::string::npos) return std::nullopt;
  auto start = lowered.find('>', at);
  if (start == std::string::npos) return std::nullopt;
  ++start;
  auto end = lowered.find("</" + std::string(tag), start);
  if (end == std::string::npos) end = lowered.size();
  return html.substr(start, end - start);
}

}  // namespace

std::string normalize_url(std::string_view url) {
  std::string u = trim(url);
  if (auto hash = u.find('#'); hash != std::string::npos) u.erase(hash);

  std::string scheme;
  std::string rest = u;
  if (auto sep = u.find("://"); sep != std::string::npos) {
    scheme = lower(u.substr(0, sep));
    rest = u.substr(sep + 3);
  }
  auto path_at = rest.find_first_of("/?");
  std::string host = lower(rest.substr(0, path_at));
  std::string tail = path_at == std::string::npos ? "" : rest.substr(path_at);
  if ((scheme == "http" && host.ends_with(":80")) || (scheme == "https" && host.ends_with(":443")))
    host.erase(host.rfind(':'));

  std::string path = tail, query;
  if (auto q = tail.find('?'); q != std::string::npos) {
    path = tail.substr(0, q);
    query = tail.substr(q + 1);
  }
  std::string kept;
  std::size_t start = 0;
  while (start <= query.size() && !query.empty()) {
    auto amp = query.find('&', start);
    std::string part = query.substr(start, amp == std::string::npos ? std::string::npos : amp - start);
    std::string key = part.substr(0, part.find('='));
    if (!part.empty() && !tracking_param(key)) {
      if (!kept.empty()) kept += '&';
      kept += part;
    }
    if (amp == std::string::npos) break;
    start = amp + 1;
  }
  if (path.empty() && !host.empty()) path = "/";

  std::string out = scheme.empty() ? host : scheme + "://" + host;
  out += path;
  if (!kept.empty()) out += "?" + kept;
  return out;
}

std::string article_id_for_url(std::string_view url) { return "art-" + fnv1a_hex(normalize_url(url)); }
std::string claim_id_for_key(std::string_view key) { return "claim-" + fnv1a_hex(key); }

std::string to_string(ContentKind k) {
  switch (k) {
    case ContentKind::ArticleFeed: return "article_feed";
    case ContentKind::FactCheckFeed: return "fact_check_feed";
    case ContentKind::ArticlePage: return "article_page";
  }
  return "?";
}

ParsedRecords RssProvider::parse(std::string_view payload, const ProviderContext& ctx) const {
  XmlNode root = parse_xml(payload);
  if (root.name != "rss") throw ParseError("root element is <" + root.name + ">, expected <rss>", 0);
  const XmlNode* channel = root.child("channel");
  if (!channel) throw ParseError("<rss> without <channel>", 0);

  ParsedRecords out;
  for (const XmlNode* item : channel->children_named("item")) {
    Article a;
    a.source_id = ctx.source_id;
    a.title = strip_html(item->child_text("title"));
    a.url = trim(item->child_text("link"));
    std::string content = item->child_text("content:encoded");
    if (trim(content).empty()) content = item->child_text("description");
    a.body = strip_html(content);
    for (const char* tag : {"author", "dc:creator"})
      for (const XmlNode* n : item->children_named(tag))
        if (auto name = trim(n->text); !name.empty()) a.authors.push_back(name);

    std::string key = a.url;
    if (key.empty()) key = trim(item->child_text("guid"));
    if (key.empty()) key = a.title;
    a.id = article_id_for_url(key);

    if (std::string date = trim(item->child_text("pubDate")); !date.empty()) {
      a.published_at = parse_rfc822(date);
      if (!a.published_at) out.warnings.push_back("item '" + a.title + "': unparseable pubDate '" + date + "'");
    }
    out.articles.push_back(std::move(a));
  }
  return out;
}

ParsedRecords ClaimFeedProvider::parse(std::string_view payload, const ProviderContext& ctx) const {
  const RatingMap defaults = RatingMap::defaults();
  const RatingMap& ratings = ctx.ratings ? *ctx.ratings : defaults;
  ParsedRecords out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(payload)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), "<record>", line_no);
    }
    auto field = [&](const char* name, bool required) -> std::string {
      auto it = j.find(name);
      if (it == j.end() || it->is_null()) {
        if (required) throw DataError("missing", name, line_no);
        return {};
      }
      if (!it->is_string()) throw DataError("must be a string", name, line_no);
      return it->get<std::string>();
    };
    Claim c;
    c.statement = trim(field("statement", true));
    if (c.statement.empty()) throw DataError("empty", "statement", line_no);
    c.fact_check_url = field("url", false);
    c.fact_checker_id = field("checker", false);
    if (c.fact_checker_id.empty()) c.fact_checker_id = ctx.checker;
    c.rating = unify_rating(field("rating", true), c.fact_checker_id, ratings);
    c.id = field("id", false);
    if (c.id.empty())
      c.id = claim_id_for_key(c.fact_check_url.empty() ? c.statement : normalize_url(c.fact_check_url));
    out.claims.push_back(std::move(c));
  }
  return out;
}

ParsedRecords FullTextProvider::parse(std::string_view payload, const ProviderContext& ctx) const {
  if (!ctx.trigger) throw ValidationError("full_text runs only as a chained provider");
  auto content = html_element(payload, "article");
  if (!content) content = html_element(payload, "body");
  ParsedRecords out;
  Article a = *ctx.trigger;
  std::string text = strip_html(content ? *content : payload);
  if (text.empty()) {
    out.warnings.push_back("page for " + a.url + " has no text");
    return out;
  }
  a.body = std::move(text);
  out.articles.push_back(std::move(a));
  return out;
}

ParsedRecords parse_feed(std::string_view payload, const DataProvider& provider, const ProviderContext& ctx) {
  return provider.parse(payload, ctx);
}

// ---------------------------------------------------------------------------

Monitor Monitor::from_json(const Json& j) {
  try {
    Monitor m;
    m.id = j.at("id").get<std::string>();
    m.provider = j.at("provider").get<std::string>();
    m.interval_seconds = j.at("interval_seconds").get<long long>();
    if (auto it = j.find("params"); it != j.end()) {
      if (!it->is_object()) throw ValidationError("monitor '" + m.id + "': params must be an object");
      m.params = *it;
    }
    if (auto it = j.find("chain"); it != j.end()) m.chain = it->get<std::vector<std::string>>();
    return m;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed monitor entry: ") + e.what());
  }
}

Json Monitor::to_json() const {
  return Json{{"id", id}, {"provider", provider}, {"interval_seconds", interval_seconds}, {"params", params},
              {"chain", chain}};
}

Json MonitorRun::to_json() const {
  return Json{{"monitor", monitor_id}, {"new", new_records}, {"updated", updated},
              {"chained", chained},     {"errors", errors},    {"warnings", warnings}};
}

Json RunReport::to_json() const {
  Json out = Json::array();
  for (const auto& r : runs) out.push_back(r.to_json());
  return Json{{"runs", out}};
}

Ingestor::Ingestor(CorpusStore& store, RatingMap ratings, std::filesystem::path base_dir, Fetcher fetch)
    : store_(store), ratings_(std::move(ratings)), base_dir_(std::move(base_dir)), fetch_(std::move(fetch)) {
  if (!fetch_)
    fetch_ = [this](const std::string& location) {
      std::filesystem::path p(location);
      return read_file(p.is_absolute() ? p : base_dir_ / p);
    };
  register_provider(std::make_unique<RssProvider>());
  register_provider(std::make_unique<ClaimFeedProvider>());
  register_provider(std::make_unique<FullTextProvider>());
}

void Ingestor::register_provider(std::unique_ptr<DataProvider> provider) {
  std::string id = provider->id();
  providers_[id] = std::move(provider);
}

const DataProvider* Ingestor::provider(std::string_view id) const {
  auto it = providers_.find(id);
  return it == providers_.end() ? nullptr : it->second.get();
}

void Ingestor::add_monitor(Monitor m) {
  if (m.id.empty()) throw ValidationError("monitor without id");
  if (m.interval_seconds <= 0) throw ValidationError("monitor '" + m.id + "': interval_seconds must be positive");
  if (!provider(m.provider)) throw ValidationError("monitor '" + m.id + "': unknown provider '" + m.provider + "'");
  for (const auto& c : m.chain) {
    const DataProvider* p = provider(c);
    if (!p) throw ValidationError("monitor '" + m.id + "': unknown chained provider '" + c + "'");
    if (p->accepts() != ContentKind::ArticlePage)
      throw ValidationError("monitor '" + m.id + "': provider '" + c + "' cannot be chained");
  }
  for (const auto& existing : monitors_)
    if (existing.id == m.id) throw ValidationError("duplicate monitor id '" + m.id + "'");
  monitors_.push_back(std::move(m));
}

void Ingestor::load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!j.contains("monitors") || !j["monitors"].is_array())
    throw ValidationError(path.string() + ": expected {\"monitors\": [...]}");
  for (const auto& m : j["monitors"]) add_monitor(Monitor::from_json(m));
}

UpsertOutcome Ingestor::store_article(Article a) {
  if (enriched_.contains(a.id))
    if (auto existing = store_.article(a.id)) a.body = existing->body;
  return store_.upsert(a);
}

std::size_t Ingestor::run_chain(const Monitor& m, const Article& trigger, MonitorRun& run,
                                const std::map<std::string, std::string>& url_map) {
  std::size_t fired = 0;
  for (const auto& provider_id : m.chain) {
    ++fired;
    auto it = url_map.find(trigger.url);
    if (it == url_map.end()) {
      run.warnings.push_back(provider_id + ": no page for " + trigger.url);
      continue;
    }
    ProviderContext ctx{m.params.value("source_id", std::string()), {}, &ratings_, &trigger};
    ParsedRecords recs = provider(provider_id)->parse(fetch_(it->second), ctx);
    run.warnings.insert(run.warnings.end(), recs.warnings.begin(), recs.warnings.end());
    for (auto& a : recs.articles) {
      enriched_.insert(a.id);
      store_.upsert(a);
    }
  }
  return fired;
}

MonitorRun Ingestor::run_monitor(const Monitor& m) {
  MonitorRun run;
  run.monitor_id = m.id;
  try {
    std::map<std::string, std::string> url_map;
    if (std::string loc = string_param(m.params, "url_map"); !loc.empty()) {
      Json j = Json::parse(fetch_(loc));
      for (const auto& [url, target] : j.items()) url_map[url] = target.get<std::string>();
    }
    ProviderContext ctx{string_param(m.params, "source_id"), string_param(m.params, "checker"), &ratings_, nullptr};
    const DataProvider* p = provider(m.provider);

    // Parse every feed before touching the store so a bad feed leaves no partial state.
    std::vector<ParsedRecords> parsed;
    for (const auto& feed : feeds_param(m.params)) {
      try {
        parsed.push_back(p->parse(fetch_(feed), ctx));
      } catch (const ParseError& e) {
        throw DataError(feed + ": " + e.what());
      }
    }
    for (auto& recs : parsed) {
      run.warnings.insert(run.warnings.end(), recs.warnings.begin(), recs.warnings.end());
      for (auto& c : recs.claims) {
        auto outcome = store_.upsert(c);
        run.new_records += outcome == UpsertOutcome::Created;
        run.updated += outcome == UpsertOutcome::Updated;
      }
      for (auto& a : recs.articles) {
        auto outcome = store_article(a);
        run.new_records += outcome == UpsertOutcome::Created;
        run.updated += outcome == UpsertOutcome::Updated;
        if (outcome == UpsertOutcome::Created) run.chained += run_chain(m, a, run, url_map);
      }
    }
  } catch (const std::exception& e) {
    run.errors.push_back(e.what());
  }
  return run;
}

RunReport Ingestor::run_due_monitors(Timestamp now) {
  RunReport report;
  for (const auto& m : monitors_) {
    auto it = last_run_.find(m.id);
    if (it != last_run_.end() && it->second + m.interval_seconds > now) continue;
    report.runs.push_back(run_monitor(m));
    last_run_[m.id] = now;
  }
  return report;
}

Json Ingestor::state() const {
  return Json{{"last_run", last_run_}, {"enriched", enriched_}};
}

void Ingestor::restore_state(const Json& j) {
  try {
    last_run_ = j.value("last_run", Json::object()).get<std::map<std::string, Timestamp>>();
    enriched_ = j.value("enriched", Json::array()).get<std::set<std::string>>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed monitor state: ") + e.what());
  }
}

void Ingestor::save_state(const std::filesystem::path& path) const { write_file_atomic(path, state().dump(2) + "\n"); }

void Ingestor::load_state(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return;
  try {
    restore_state(Json::parse(read_file(path)));
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

}  // namespace factlink
