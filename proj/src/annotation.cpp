#include "factlink/annotation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <tuple>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

// First label, in submission order, whose running count reaches `agreement`.
template <typename Label, typename Range>
std::optional<Label> first_to_reach(const Range& labels, std::size_t agreement) {
  std::map<Label, std::size_t> counts;
  for (const Label& l : labels)
    if (++counts[l] >= agreement) return l;
  return std::nullopt;
}

bool marks_present(PresenceVote v) { return v == PresenceVote::Present || v == PresenceVote::Suggestive; }

Presence to_presence(PresenceVote v) {
  switch (v) {
    case PresenceVote::Present: return Presence::Present;
    case PresenceVote::Suggestive: return Presence::Suggestive;
    default: return Presence::NotPresent;
  }
}

Stance to_stance(StanceVote v) {
  switch (v) {
    case StanceVote::Supporting: return Stance::Supporting;
    case StanceVote::Contradicting: return Stance::Contradicting;
    default: return Stance::Neutral;
  }
}

}  // namespace

std::string to_string(PresenceVote v) {
  switch (v) {
    case PresenceVote::Present: return "present";
    case PresenceVote::Suggestive: return "suggestive";
    case PresenceVote::NotPresent: return "not_present";
    case PresenceVote::CantTell: return "cant_tell";
  }
  return "?";
}

std::string to_string(StanceVote v) {
  switch (v) {
    case StanceVote::Supporting: return "supporting";
    case StanceVote::Contradicting: return "contradicting";
    case StanceVote::Neutral: return "neutral";
    case StanceVote::CantTell: return "cant_tell";
  }
  return "?";
}

PresenceVote parse_presence_vote(std::string_view s) {
  for (auto v : kAllPresenceVotes)
    if (to_string(v) == s) return v;
  throw ValidationError("unknown presence label '" + std::string(s) + "'");
}

StanceVote parse_stance_vote(std::string_view s) {
  for (auto v : kAllStanceVotes)
    if (to_string(v) == s) return v;
  throw ValidationError("unknown stance label '" + std::string(s) + "'");
}

std::string to_string(PairStatus s) {
  switch (s) {
    case PairStatus::Open: return "open";
    case PairStatus::Agreed: return "agreed";
    case PairStatus::Discarded: return "discarded";
  }
  return "?";
}

void Annotation::validate() const {
  if (pair_id.empty()) throw ValidationError("annotation without pair_id");
  if (annotator_id.empty()) throw ValidationError("annotation without annotator");
  if (marks_present(presence) && !stance)
    throw ValidationError("stance is required when presence is " + to_string(presence));
  if (!marks_present(presence) && stance)
    throw ValidationError("stance is only allowed when presence is present or suggestive");
}

Json Annotation::to_json() const {
  Json j{{"pair_id", pair_id},
         {"annotator", annotator_id},
         {"presence", to_string(presence)},
         {"stance", nullptr},
         {"submitted_at", submitted_at}};
  if (stance) j["stance"] = to_string(*stance);
  return j;
}

Annotation Annotation::from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("annotation must be a JSON object");
  auto str = [&](const char* f) {
    auto it = j.find(f);
    if (it == j.end() || !it->is_string()) throw ValidationError(std::string("missing or non-string field '") + f + "'");
    return it->get<std::string>();
  };
  Annotation a;
  a.pair_id = str("pair_id");
  a.annotator_id = str("annotator");
  a.presence = parse_presence_vote(str("presence"));
  if (auto it = j.find("stance"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("field 'stance' must be a string or null");
    a.stance = parse_stance_vote(it->get<std::string>());
  }
  if (auto it = j.find("submitted_at"); it != j.end() && it->is_number_integer())
    a.submitted_at = it->get<Timestamp>();
  return a;
}

bool AggregationOutcome::complete() const {
  if (!presence) return false;
  return *presence == Presence::NotPresent || stance.has_value();
}

AggregationOutcome aggregate(std::span<const Annotation> annotations, std::size_t agreement) {
  AggregationOutcome out;
  std::vector<PresenceVote> presence;
  for (const auto& a : annotations)
    if (a.presence != PresenceVote::CantTell) presence.push_back(a.presence);

  if (auto winner = first_to_reach<PresenceVote>(presence, agreement)) {
    out.presence = to_presence(*winner);
  } else {
    auto pooled = std::count_if(presence.begin(), presence.end(), marks_present);
    if (static_cast<std::size_t>(pooled) >= agreement) out.presence = Presence::Suggestive;
  }

  if (out.presence && *out.presence != Presence::NotPresent) {
    std::vector<StanceVote> stances;
    for (const auto& a : annotations)
      if (marks_present(a.presence) && a.stance && *a.stance != StanceVote::CantTell) stances.push_back(*a.stance);
    if (auto winner = first_to_reach<StanceVote>(stances, agreement)) out.stance = to_stance(*winner);
  }
  return out;
}

std::optional<AggregatedLabel> PairState::label() const {
  if (status != PairStatus::Agreed || !outcome.presence) return std::nullopt;
  return AggregatedLabel{pair_id, *outcome.presence, outcome.stance};
}

Json PairState::to_json() const {
  Json anns = Json::array();
  for (const auto& a : annotations) anns.push_back(a.to_json());
  Json j{{"pair_id", pair_id},
         {"article_id", article_id},
         {"claim_id", claim_id},
         {"status", to_string(status)},
         {"annotations", anns},
         {"max_annotators", max_annotators},
         {"agreement", agreement},
         {"presence", nullptr},
         {"stance", nullptr}};
  if (outcome.presence) j["presence"] = to_string(*outcome.presence);
  if (outcome.stance) j["stance"] = to_string(*outcome.stance);
  return j;
}

std::vector<std::size_t> highlights(const TokenizedText& claim, const TokenizedText& body,
                                    const SentenceEmbedder& embedder, std::size_t top_k) {
  const auto claim_vec = embedder.embed_tokens(claim.tokens);
  std::vector<double> sims;
  for (std::size_t s = 0; s < body.sentence_count(); ++s)
    sims.push_back(cosine(claim_vec, embedder.embed_tokens(body.sentence(s))));
  std::vector<std::size_t> order(sims.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
  if (order.size() > top_k) order.resize(top_k);
  return order;
}

Json Assignment::to_json() const {
  Json hl = Json::array();
  for (const auto& h : highlights) hl.push_back({{"sentence", h.sentence}, {"start", h.begin}, {"end", h.end}});
  return Json{{"pair_id", pair_id},
              {"claim", {{"id", claim.id}, {"statement", claim.statement}}},
              {"article", {{"id", article.id}, {"title", article.title}, {"body", article.body}}},
              {"highlights", hl}};
}

void ServiceConfig::validate() const {
  if (agreement < 1) throw ValidationError("agreement must be at least 1");
  if (max_annotators < agreement) throw ValidationError("max_annotators must be at least the agreement level");
  if (lease_seconds <= 0) throw ValidationError("lease_seconds must be positive");
}

// ---------------------------------------------------------------------------

AnnotationService::AnnotationService(ServiceConfig cfg, std::shared_ptr<const SentenceEmbedder> embedder)
    : cfg_(std::move(cfg)), embedder_(std::move(embedder)) {
  cfg_.validate();
}

void AnnotationService::register_annotator(const std::string& annotator_id) {
  if (annotator_id.empty()) throw ValidationError("empty annotator id");
  std::lock_guard lock(mutex_);
  annotators_.insert(annotator_id);
}

bool AnnotationService::has_annotator(const std::string& annotator_id) const {
  std::lock_guard lock(mutex_);
  return annotators_.contains(annotator_id);
}

std::string AnnotationService::add_pair(const Article& article, const Claim& claim, std::string pair_id) {
  if (pair_id.empty()) pair_id = article.id + "::" + claim.id;
  std::lock_guard lock(mutex_);
  if (pairs_.contains(pair_id)) return pair_id;
  PairEntry e;
  e.state.pair_id = pair_id;
  e.state.article_id = article.id;
  e.state.claim_id = claim.id;
  e.state.max_annotators = cfg_.max_annotators;
  e.state.agreement = cfg_.agreement;
  e.article = article;
  e.claim = claim;
  pairs_.emplace(pair_id, std::move(e));
  return pair_id;
}

bool AnnotationService::eligible_locked(const PairEntry& e, const std::string& annotator, Timestamp now) const {
  if (e.state.status != PairStatus::Open) return false;
  if (cfg_.claim_blocklist.contains(e.state.claim_id)) return false;
  for (const auto& a : e.state.annotations)
    if (a.annotator_id == annotator) return false;
  std::size_t held = 0;
  for (const auto& [who, expiry] : e.leases)
    if (who != annotator && expiry > now) ++held;
  return e.state.annotations.size() + held < e.state.max_annotators;
}

std::size_t AnnotationService::remaining_needed(const PairState& s) const {
  std::map<PresenceVote, std::size_t> presence;
  std::size_t pooled = 0;
  std::map<StanceVote, std::size_t> stance;
  for (const auto& a : s.annotations) {
    if (a.presence == PresenceVote::CantTell) continue;
    ++presence[a.presence];
    if (marks_present(a.presence)) {
      ++pooled;
      if (a.stance && *a.stance != StanceVote::CantTell) ++stance[*a.stance];
    }
  }
  std::size_t best = pooled;
  for (const auto& [_, c] : presence) best = std::max(best, c);
  if (s.outcome.presence && !s.outcome.stance) {
    best = 0;
    for (const auto& [_, c] : stance) best = std::max(best, c);
  }
  return best >= s.agreement ? 1 : s.agreement - best;
}

std::vector<Highlight> AnnotationService::highlights_for(const PairEntry& e) const {
  if (!embedder_ || cfg_.highlight_top_k == 0) return {};
  const auto body = tokenize(e.article.body);
  std::vector<Highlight> out;
  for (auto i : highlights(tokenize(e.claim.statement), body, *embedder_, cfg_.highlight_top_k))
    out.push_back({i, body.sentence_bytes[i].begin, body.sentence_bytes[i].end});
  return out;
}

std::optional<Assignment> AnnotationService::next_pair(const std::string& annotator_id, Timestamp now) {
  std::lock_guard lock(mutex_);
  if (!annotators_.contains(annotator_id)) {
    if (!cfg_.open_registration) throw NotFoundError("unknown annotator '" + annotator_id + "'");
    if (annotator_id.empty()) throw ValidationError("empty annotator id");
    annotators_.insert(annotator_id);
  }

  PairEntry* chosen = nullptr;
  // An unexpired assignment is handed out again rather than a new one.
  for (auto& [_, e] : pairs_) {
    auto lease = e.leases.find(annotator_id);
    if (lease != e.leases.end() && lease->second > now && eligible_locked(e, annotator_id, now)) {
      chosen = &e;
      break;
    }
  }
  if (!chosen) {
    std::tuple<int, std::size_t, std::string> best_key;
    for (auto& [id, e] : pairs_) {
      if (!eligible_locked(e, annotator_id, now)) continue;
      std::tuple<int, std::size_t, std::string> key{e.state.annotations.empty() ? 1 : 0,
                                                    remaining_needed(e.state), id};
      if (!chosen || key < best_key) {
        chosen = &e;
        best_key = std::move(key);
      }
    }
  }
  if (!chosen) return std::nullopt;

  std::erase_if(chosen->leases, [&](const auto& l) { return l.second <= now; });
  chosen->leases[annotator_id] = now + cfg_.lease_seconds;
  return Assignment{chosen->state.pair_id, chosen->article, chosen->claim, highlights_for(*chosen)};
}

PairState AnnotationService::submit(const Annotation& annotation) {
  std::lock_guard lock(mutex_);
  return submit_locked(annotation);
}

PairState AnnotationService::submit_locked(const Annotation& annotation) {
  annotation.validate();
  auto it = pairs_.find(annotation.pair_id);
  if (it == pairs_.end()) throw NotFoundError("unknown pair '" + annotation.pair_id + "'");
  if (!annotators_.contains(annotation.annotator_id)) {
    if (!cfg_.open_registration) throw NotFoundError("unknown annotator '" + annotation.annotator_id + "'");
    annotators_.insert(annotation.annotator_id);
  }
  PairEntry& e = it->second;
  for (const auto& a : e.state.annotations)
    if (a.annotator_id == annotation.annotator_id)
      throw DuplicateError("annotator '" + annotation.annotator_id + "' already labelled pair '" +
                           annotation.pair_id + "'");
  if (e.state.status != PairStatus::Open)
    throw ConflictError("pair '" + annotation.pair_id + "' is " + to_string(e.state.status));

  e.state.annotations.push_back(annotation);
  e.leases.erase(annotation.annotator_id);
  e.state.outcome = aggregate(e.state.annotations, e.state.agreement);
  if (e.state.outcome.complete())
    e.state.status = PairStatus::Agreed;
  else if (e.state.annotations.size() >= e.state.max_annotators)
    e.state.status = PairStatus::Discarded;
  return e.state;
}

PairState AnnotationService::pair(const std::string& pair_id) const {
  std::lock_guard lock(mutex_);
  auto it = pairs_.find(pair_id);
  if (it == pairs_.end()) throw NotFoundError("unknown pair '" + pair_id + "'");
  return it->second.state;
}

std::vector<PairState> AnnotationService::pairs() const {
  std::lock_guard lock(mutex_);
  std::vector<PairState> out;
  for (const auto& [_, e] : pairs_) out.push_back(e.state);
  return out;
}

std::size_t AnnotationService::pair_count() const {
  std::lock_guard lock(mutex_);
  return pairs_.size();
}

std::vector<PairLabel> AnnotationService::export_labels() const {
  std::lock_guard lock(mutex_);
  std::vector<PairLabel> out;
  for (const auto& [_, e] : pairs_) {
    auto l = e.state.label();
    if (!l) continue;
    PairLabel p;
    p.article_id = e.state.article_id;
    p.claim_id = e.state.claim_id;
    p.presence = l->presence;
    p.stance = l->stance;
    p.origin = Origin::Manual;
    out.push_back(std::move(p));
  }
  return out;
}

void AnnotationService::save_annotations(const std::filesystem::path& path) const {
  std::vector<Annotation> all;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [_, e] : pairs_) all.insert(all.end(), e.state.annotations.begin(), e.state.annotations.end());
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Annotation& a, const Annotation& b) { return a.submitted_at < b.submitted_at; });
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& a : all) out << a.to_json().dump() << '\n';
}

std::size_t AnnotationService::replay_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t n = 0, line_no = 0;
  std::lock_guard lock(mutex_);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      submit_locked(Annotation::from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), "<record>", line_no);
    }
    ++n;
  }
  return n;
}

}  // namespace factlink
