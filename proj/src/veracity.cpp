#include "factlink/veracity.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "factlink/errors.hpp"

namespace factlink {

VeracityRating opposite(VeracityRating r) {
  switch (r) {
    case VeracityRating::False: return VeracityRating::True;
    case VeracityRating::MostlyFalse: return VeracityRating::MostlyTrue;
    case VeracityRating::MostlyTrue: return VeracityRating::MostlyFalse;
    case VeracityRating::True: return VeracityRating::False;
    case VeracityRating::Mixture: return VeracityRating::Mixture;
    case VeracityRating::Unknown: return VeracityRating::Unknown;
  }
  return VeracityRating::Unknown;
}

VeracityRating combine(Stance stance, VeracityRating claim_rating) {
  if (claim_rating == VeracityRating::Unknown) return VeracityRating::Unknown;
  switch (stance) {
    case Stance::Supporting: return claim_rating;
    case Stance::Contradicting: return opposite(claim_rating);
    case Stance::Neutral: return VeracityRating::Unknown;
  }
  return VeracityRating::Unknown;
}

std::vector<PairVeracity> pair_veracities(std::span<const PairLabel> labels, std::span<const Claim> claims) {
  std::unordered_map<std::string, VeracityRating> rating;
  for (const auto& c : claims) rating.emplace(c.id, c.rating);
  std::vector<PairVeracity> out;
  for (const auto& l : labels) {
    if (!l.stance || l.presence == Presence::NotPresent) continue;
    auto it = rating.find(l.claim_id);
    if (it == rating.end()) continue;
    out.push_back({l.article_id, l.claim_id, combine(*l.stance, it->second)});
  }
  return out;
}

double percent(std::size_t count, std::size_t total, int decimals) {
  if (total == 0) return 0.0;
  unsigned long long scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  // Integer arithmetic so that exact halves round up.
  const unsigned long long scaled = static_cast<unsigned long long>(count) * 100ULL * scale;
  unsigned long long q = scaled / total;
  if (2 * (scaled % total) >= total) ++q;
  return static_cast<double>(q) / static_cast<double>(scale);
}

std::size_t Distribution::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::size_t Distribution::count(const std::string& category) const {
  for (std::size_t i = 0; i < categories.size(); ++i)
    if (categories[i] == category) return counts[i];
  throw NotFoundError("unknown category '" + category + "'");
}

double Distribution::percent(const std::string& category, int decimals) const {
  return factlink::percent(count(category), total(), decimals);
}

Json Distribution::to_json(int decimals) const {
  Json items = Json::array();
  const auto t = total();
  for (std::size_t i = 0; i < categories.size(); ++i)
    items.push_back({{"category", categories[i]},
                     {"count", counts[i]},
                     {"percent", factlink::percent(counts[i], t, decimals)}});
  return Json{{"total", t}, {"items", items}};
}

std::string to_string(ArticleRollup r) {
  switch (r) {
    case ArticleRollup::OnlyTrue: return "only_true";
    case ArticleRollup::OnlyFalse: return "only_false";
    case ArticleRollup::Mixed: return "mixed";
    case ArticleRollup::UnknownOnly: return "unknown_only";
  }
  return "?";
}

ArticleRollup rollup(std::span<const VeracityRating> article_veracities) {
  bool any_true = false, any_false = false;
  for (auto v : article_veracities) {
    any_true |= v == VeracityRating::True || v == VeracityRating::MostlyTrue;
    any_false |= v == VeracityRating::False || v == VeracityRating::MostlyFalse;
  }
  if (any_true && any_false) return ArticleRollup::Mixed;
  if (any_true) return ArticleRollup::OnlyTrue;
  if (any_false) return ArticleRollup::OnlyFalse;
  return ArticleRollup::UnknownOnly;
}

namespace {

template <typename Enum, std::size_t N>
Distribution empty_distribution(const Enum (&values)[N]) {
  Distribution d;
  for (auto v : values) d.categories.push_back(to_string(v));
  d.counts.assign(N, 0);
  return d;
}

constexpr Reliability kReliabilities[] = {Reliability::Reliable, Reliability::Unreliable, Reliability::Unknown};
constexpr ArticleRollup kRollups[] = {ArticleRollup::OnlyTrue, ArticleRollup::OnlyFalse, ArticleRollup::Mixed,
                                      ArticleRollup::UnknownOnly};

std::size_t index_of(VeracityRating r) { return static_cast<std::size_t>(r); }

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void print(std::ostringstream& out, const std::string& heading, const Distribution& d, int decimals) {
  out << heading << " (n=" << d.total() << ")\n";
  const auto t = d.total();
  for (std::size_t i = 0; i < d.categories.size(); ++i) {
    std::string label = d.categories[i];
    label.resize(std::max<std::size_t>(label.size(), 14), ' ');
    std::string pct = fixed(factlink::percent(d.counts[i], t, decimals), decimals) + "%";
    out << "  " << label << std::setw(6) << d.counts[i] << std::setw(static_cast<int>(decimals) + 8) << pct << "\n";
  }
}

}  // namespace

LabelReport label_report(std::span<const PairLabel> labels, std::span<const Claim> claims,
                         std::span<const Article> articles, std::span<const Source> sources,
                         const ReportOptions& opts) {
  LabelReport rep;
  rep.decimals = opts.decimals;
  rep.stance = empty_distribution(kAllStances);
  rep.veracity = empty_distribution(kAllRatings);
  rep.articles = empty_distribution(kRollups);
  rep.reliability = empty_distribution(kReliabilities);
  for (auto r : kReliabilities) rep.veracity_by_reliability[r] = empty_distribution(kAllRatings);

  std::vector<PairLabel> selected;
  for (const auto& l : labels) {
    if (opts.origin && l.origin != *opts.origin) continue;
    if (l.presence == Presence::NotPresent || !l.stance) continue;
    selected.push_back(l);
  }
  for (const auto& l : selected) ++rep.stance.counts[static_cast<std::size_t>(*l.stance)];

  std::unordered_map<std::string, Reliability> source_reliability;
  for (const auto& s : sources) source_reliability.emplace(s.id, s.reliability);
  std::unordered_map<std::string, Reliability> article_reliability;
  for (const auto& a : articles) {
    auto it = source_reliability.find(a.source_id);
    article_reliability.emplace(a.id, it == source_reliability.end() ? Reliability::Unknown : it->second);
  }

  std::map<std::string, std::vector<VeracityRating>> per_article;
  for (const auto& v : pair_veracities(selected, claims)) {
    ++rep.veracity.counts[index_of(v.value)];
    per_article[v.article_id].push_back(v.value);
    auto it = article_reliability.find(v.article_id);
    const Reliability rel = it == article_reliability.end() ? Reliability::Unknown : it->second;
    ++rep.reliability.counts[static_cast<std::size_t>(rel)];
    ++rep.veracity_by_reliability[rel].counts[index_of(v.value)];
  }
  for (const auto& [_, values] : per_article) ++rep.articles.counts[static_cast<std::size_t>(rollup(values))];
  return rep;
}

Json LabelReport::to_json() const {
  Json by_rel = Json::object();
  for (const auto& [rel, d] : veracity_by_reliability) by_rel[to_string(rel)] = d.to_json(decimals);
  return Json{{"decimals", decimals},
              {"stance", stance.to_json(decimals)},
              {"pair_veracity", veracity.to_json(decimals)},
              {"article_rollups", articles.to_json(decimals)},
              {"reliability", reliability.to_json(decimals)},
              {"veracity_by_reliability", by_rel}};
}

std::string LabelReport::to_text() const {
  std::ostringstream out;
  print(out, "article stance", stance, decimals);
  print(out, "pair veracity", veracity, decimals);
  print(out, "articles by pair veracity", articles, decimals);
  print(out, "pair veracity by source reliability", reliability, decimals);
  for (const auto& [rel, d] : veracity_by_reliability) print(out, "  within " + to_string(rel), d, decimals);
  return out.str();
}

}  // namespace factlink
