#include "factlink/records.hpp"

#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <utility>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table,
             const char* what) {
  for (const auto& [name, value] : table)
    if (name == s) return value;
  throw DataError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string name_of(E v, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, value] : table)
    if (value == v) return std::string(name);
  return "?";
}

constexpr std::array<std::pair<std::string_view, Reliability>, 3> kReliability{{
    {"reliable", Reliability::Reliable},
    {"unreliable", Reliability::Unreliable},
    {"unknown", Reliability::Unknown},
}};
constexpr std::array<std::pair<std::string_view, SourceKind>, 2> kSourceKind{{
    {"news_or_blog", SourceKind::NewsOrBlog},
    {"fact_checker", SourceKind::FactChecker},
}};
constexpr std::array<std::pair<std::string_view, Split>, 3> kSplit{{
    {"sample1", Split::Sample1},
    {"sample2", Split::Sample2},
    {"unsplit", Split::Unsplit},
}};
constexpr std::array<std::pair<std::string_view, VeracityRating>, 6> kRating{{
    {"false", VeracityRating::False},
    {"mostly false", VeracityRating::MostlyFalse},
    {"mixture", VeracityRating::Mixture},
    {"mostly true", VeracityRating::MostlyTrue},
    {"true", VeracityRating::True},
    {"unknown", VeracityRating::Unknown},
}};
constexpr std::array<std::pair<std::string_view, Presence>, 3> kPresence{{
    {"present", Presence::Present},
    {"suggestive", Presence::Suggestive},
    {"not_present", Presence::NotPresent},
}};
constexpr std::array<std::pair<std::string_view, Stance>, 3> kStance{{
    {"supporting", Stance::Supporting},
    {"contradicting", Stance::Contradicting},
    {"neutral", Stance::Neutral},
}};
constexpr std::array<std::pair<std::string_view, Origin>, 2> kOrigin{{
    {"manual", Origin::Manual},
    {"predicted", Origin::Predicted},
}};

// Field accessors. Every failure names the field.

const Json& require(const Json& j, const char* field) {
  if (!j.is_object()) throw DataError("record is not a JSON object", "<record>");
  auto it = j.find(field);
  if (it == j.end()) throw DataError("missing", field);
  return *it;
}

std::string require_string(const Json& j, const char* field, bool allow_empty = true) {
  const Json& v = require(j, field);
  if (!v.is_string()) throw DataError("expected string", field);
  auto s = v.get<std::string>();
  if (!allow_empty && s.find_first_not_of(" \t\r\n") == std::string::npos)
    throw DataError("must be non-empty", field);
  return s;
}

std::string optional_string(const Json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw DataError("expected string", field);
  return it->get<std::string>();
}

template <typename F>
auto parse_field(const Json& j, const char* field, F&& parse) {
  auto s = require_string(j, field);
  try {
    return parse(s);
  } catch (const DataError& e) {
    throw DataError(e.what(), field);
  }
}

template <typename F>
auto parse_nullable(const Json& j, const char* field, F&& parse)
    -> std::optional<decltype(parse(std::string_view{}))> {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError("expected string or null", field);
  try {
    return parse(it->get<std::string>());
  } catch (const DataError& e) {
    throw DataError(e.what(), field);
  }
}

// days_from_civil / civil_from_days after H. Hinnant's date algorithms.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool valid_date(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int limit = kDays[m - 1];
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) limit = 29;
  return d <= limit;
}

std::optional<Timestamp> make_time(int y, int mo, int d, int h, int mi, int s, int offset_sec) {
  if (!valid_date(y, mo, d) || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
    return std::nullopt;
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + s - offset_sec;
}

bool read_int(std::string_view s, std::size_t& pos, std::size_t digits, int& out) {
  if (pos + digits > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < digits; ++i) {
    char c = s[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
  }
  pos += digits;
  out = v;
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string to_string(Reliability v) { return name_of(v, kReliability); }
std::string to_string(SourceKind v) { return name_of(v, kSourceKind); }
std::string to_string(Split v) { return name_of(v, kSplit); }
std::string to_string(VeracityRating v) { return name_of(v, kRating); }
std::string to_string(Presence v) { return name_of(v, kPresence); }
std::string to_string(Stance v) { return name_of(v, kStance); }
std::string to_string(Origin v) { return name_of(v, kOrigin); }

Reliability parse_reliability(std::string_view s) { return parse_enum(s, kReliability, "reliability"); }
SourceKind parse_source_kind(std::string_view s) { return parse_enum(s, kSourceKind, "source kind"); }
Split parse_split(std::string_view s) { return parse_enum(s, kSplit, "split"); }
VeracityRating parse_rating(std::string_view s) { return parse_enum(s, kRating, "rating"); }
Presence parse_presence(std::string_view s) { return parse_enum(s, kPresence, "presence"); }
Stance parse_stance(std::string_view s) { return parse_enum(s, kStance, "stance"); }
Origin parse_origin(std::string_view s) { return parse_enum(s, kOrigin, "origin"); }

bool Article::scorable() const { return body.find_first_not_of(" \t\r\n") != std::string::npos; }

Json to_json(const Source& s) {
  return Json{{"id", s.id},
              {"name", s.name},
              {"base_url", s.base_url},
              {"reliability", to_string(s.reliability)},
              {"kind", to_string(s.kind)}};
}

Json to_json(const Article& a) {
  Json j{{"id", a.id},       {"source_id", a.source_id}, {"url", a.url},
         {"title", a.title}, {"body", a.body},           {"published_at", nullptr},
         {"authors", a.authors}, {"split", to_string(a.split)}};
  if (a.published_at) j["published_at"] = format_rfc3339(*a.published_at);
  return j;
}

Json to_json(const Claim& c) {
  return Json{{"id", c.id},
              {"statement", c.statement},
              {"rating", to_string(c.rating)},
              {"fact_checker_id", c.fact_checker_id},
              {"fact_check_url", c.fact_check_url}};
}

Json to_json(const PairLabel& p) {
  Json j{{"article_id", p.article_id}, {"claim_id", p.claim_id},
         {"presence", to_string(p.presence)}, {"stance", nullptr},
         {"origin", to_string(p.origin)},     {"presence_score", nullptr},
         {"pair_veracity", nullptr}};
  if (p.stance) j["stance"] = to_string(*p.stance);
  if (p.presence_score) j["presence_score"] = *p.presence_score;
  if (p.pair_veracity) j["pair_veracity"] = to_string(*p.pair_veracity);
  return j;
}

Source source_from_json(const Json& j) {
  Source s;
  s.id = require_string(j, "id", false);
  s.name = require_string(j, "name");
  s.base_url = optional_string(j, "base_url");
  s.reliability = parse_nullable(j, "reliability", parse_reliability).value_or(Reliability::Unknown);
  s.kind = parse_nullable(j, "kind", parse_source_kind).value_or(SourceKind::NewsOrBlog);
  return s;
}

Article article_from_json(const Json& j) {
  Article a;
  a.id = require_string(j, "id", false);
  a.source_id = require_string(j, "source_id");
  a.url = optional_string(j, "url");
  a.title = require_string(j, "title");
  a.body = require_string(j, "body");
  a.published_at = parse_nullable(j, "published_at", [](std::string_view s) {
    auto t = parse_rfc3339(s);
    if (!t) throw DataError("not an RFC 3339 timestamp");
    return *t;
  });
  if (auto it = j.find("authors"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError("expected array of strings", "authors");
    for (const auto& v : *it) {
      if (!v.is_string()) throw DataError("expected array of strings", "authors");
      a.authors.push_back(v.get<std::string>());
    }
  }
  a.split = parse_nullable(j, "split", parse_split).value_or(Split::Unsplit);
  return a;
}

Claim claim_from_json(const Json& j) {
  Claim c;
  c.id = require_string(j, "id", false);
  c.statement = require_string(j, "statement", false);
  c.rating = parse_field(j, "rating", parse_rating);
  c.fact_checker_id = require_string(j, "fact_checker_id");
  c.fact_check_url = optional_string(j, "fact_check_url");
  return c;
}

PairLabel pair_label_from_json(const Json& j) {
  PairLabel p;
  p.article_id = require_string(j, "article_id", false);
  p.claim_id = require_string(j, "claim_id", false);
  p.presence = parse_field(j, "presence", parse_presence);
  p.stance = parse_nullable(j, "stance", parse_stance);
  p.origin = parse_field(j, "origin", parse_origin);
  if (auto it = j.find("presence_score"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw DataError("expected number or null", "presence_score");
    p.presence_score = it->get<double>();
  }
  p.pair_veracity = parse_nullable(j, "pair_veracity", parse_rating);
  if (p.stance && p.presence == Presence::NotPresent)
    throw DataError("stance given for a not_present pair", "stance");
  if (p.presence_score && p.origin != Origin::Predicted)
    throw DataError("presence_score is only valid for predicted labels", "presence_score");
  return p;
}

std::string format_rfc3339(Timestamp t) {
  std::int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
  std::int64_t secs = t - days * 86400;
  // civil_from_days
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d, static_cast<long long>(secs / 3600),
                static_cast<long long>(secs / 60 % 60), static_cast<long long>(secs % 60));
  return buf;
}

std::optional<Timestamp> parse_rfc3339(std::string_view in) {
  std::string_view s = trim(in);
  std::size_t pos = 0;
  int y, mo, d, h, mi, sec;
  if (!read_int(s, pos, 4, y) || pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!read_int(s, pos, 2, mo) || pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!read_int(s, pos, 2, d) || pos >= s.size()) return std::nullopt;
  char sep = s[pos++];
  if (sep != 'T' && sep != 't' && sep != ' ') return std::nullopt;
  if (!read_int(s, pos, 2, h) || pos >= s.size() || s[pos++] != ':') return std::nullopt;
  if (!read_int(s, pos, 2, mi) || pos >= s.size() || s[pos++] != ':') return std::nullopt;
  if (!read_int(s, pos, 2, sec)) return std::nullopt;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;
  int offset = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int sign = s[pos++] == '-' ? -1 : 1;
    int oh, om;
    if (!read_int(s, pos, 2, oh) || pos >= s.size() || s[pos++] != ':') return std::nullopt;
    if (!read_int(s, pos, 2, om)) return std::nullopt;
    offset = sign * (oh * 3600 + om * 60);
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  return make_time(y, mo, d, h, mi, sec, offset);
}

std::optional<Timestamp> parse_rfc822(std::string_view in) {
  std::string_view s = trim(in);
  // Optional day-of-week prefix.
  if (auto comma = s.find(','); comma != std::string_view::npos) s = trim(s.substr(comma + 1));

  std::vector<std::string_view> parts;
  while (!s.empty()) {
    auto sp = s.find_first_of(" \t");
    parts.push_back(s.substr(0, sp));
    if (sp == std::string_view::npos) break;
    s = trim(s.substr(sp));
  }
  if (parts.size() < 4) return std::nullopt;

  auto to_int = [](std::string_view v, int& out) {
    if (v.empty() || v.size() > 4) return false;
    out = 0;
    for (char c : v) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
      out = out * 10 + (c - '0');
    }
    return true;
  };
  static constexpr std::string_view kMonths[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                                 "jul", "aug", "sep", "oct", "nov", "dec"};
  int d, y, mo = 0;
  if (!to_int(parts[0], d) || !to_int(parts[2], y)) return std::nullopt;
  if (parts[2].size() == 2) y += y < 50 ? 2000 : 1900;
  if (parts[1].size() < 3) return std::nullopt;
  std::string mon;
  for (char c : parts[1].substr(0, 3)) mon += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (int i = 0; i < 12; ++i)
    if (kMonths[i] == mon) mo = i + 1;
  if (mo == 0) return std::nullopt;

  int h, mi, sec = 0;
  std::string_view hms = parts[3];
  std::size_t pos = 0;
  if (!read_int(hms, pos, 2, h) || pos >= hms.size() || hms[pos++] != ':') return std::nullopt;
  if (!read_int(hms, pos, 2, mi)) return std::nullopt;
  if (pos < hms.size()) {
    if (hms[pos++] != ':' || !read_int(hms, pos, 2, sec) || pos != hms.size()) return std::nullopt;
  }

  int offset = 0;
  if (parts.size() >= 5) {
    std::string_view z = parts[4];
    if (z == "GMT" || z == "UT" || z == "UTC" || z == "Z") {
      offset = 0;
    } else if ((z[0] == '+' || z[0] == '-') && z.size() == 5) {
      int hhmm;
      if (!to_int(z.substr(1), hhmm)) return std::nullopt;
      offset = (z[0] == '-' ? -1 : 1) * ((hhmm / 100) * 3600 + (hhmm % 100) * 60);
    } else if (z == "EST") {
      offset = -5 * 3600;
    } else if (z == "EDT") {
      offset = -4 * 3600;
    } else if (z == "CST") {
      offset = -6 * 3600;
    } else if (z == "CDT") {
      offset = -5 * 3600;
    } else if (z == "MST") {
      offset = -7 * 3600;
    } else if (z == "MDT") {
      offset = -6 * 3600;
    } else if (z == "PST") {
      offset = -8 * 3600;
    } else if (z == "PDT") {
      offset = -7 * 3600;
    } else {
      return std::nullopt;
    }
  }
  return make_time(y, mo, d, h, mi, sec, offset);
}

}  // namespace factlink
