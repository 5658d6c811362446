#pragma once

// Human annotation workflow: serving article-claim pairs to annotators,
// collecting their labels and aggregating them into ground truth.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "factlink/embedding.hpp"
#include "factlink/records.hpp"
#include "factlink/text.hpp"

namespace factlink {

/// What an annotator may answer; CantTell never survives aggregation.
enum class PresenceVote { Present, Suggestive, NotPresent, CantTell };
enum class StanceVote { Supporting, Contradicting, Neutral, CantTell };

std::string to_string(PresenceVote v);
std::string to_string(StanceVote v);
PresenceVote parse_presence_vote(std::string_view s);
StanceVote parse_stance_vote(std::string_view s);

inline constexpr PresenceVote kAllPresenceVotes[] = {PresenceVote::Present, PresenceVote::Suggestive,
                                                     PresenceVote::NotPresent, PresenceVote::CantTell};
inline constexpr StanceVote kAllStanceVotes[] = {StanceVote::Supporting, StanceVote::Contradicting,
                                                 StanceVote::Neutral, StanceVote::CantTell};

struct Annotation {
  std::string pair_id;
  std::string annotator_id;
  PresenceVote presence = PresenceVote::NotPresent;
  std::optional<StanceVote> stance;
  Timestamp submitted_at = 0;

  /// Stance must be given exactly when presence is Present or Suggestive.
  void validate() const;
  Json to_json() const;
  static Annotation from_json(const Json& j);
};

/// Aggregated labels; an empty optional means no agreement (yet).
struct AggregationOutcome {
  std::optional<Presence> presence;
  std::optional<Stance> stance;

  bool presence_agreed() const { return presence.has_value(); }
  /// A finished label: NotPresent, or Present/Suggestive with an agreed stance.
  bool complete() const;
  bool operator==(const AggregationOutcome&) const = default;
};

/// Aggregates annotations given in submission order.
///
/// CantTell presence labels are dropped. A presence label chosen by at least
/// `agreement` annotators wins (the first one to get there, if two do). Failing
/// that, Present and Suggestive are pooled and a pooled match yields
/// Suggestive. Stance is aggregated the same way, without pooling, over the
/// non-CantTell stances of annotations that marked the claim Present or
/// Suggestive, and only when the aggregated presence is one of those.
AggregationOutcome aggregate(std::span<const Annotation> annotations, std::size_t agreement = 2);

struct AggregatedLabel {
  std::string pair_id;
  Presence presence = Presence::NotPresent;
  std::optional<Stance> stance;
};

enum class PairStatus { Open, Agreed, Discarded };
std::string to_string(PairStatus s);

struct PairState {
  std::string pair_id;
  std::string article_id;
  std::string claim_id;
  std::vector<Annotation> annotations;
  PairStatus status = PairStatus::Open;
  std::size_t max_annotators = 5;
  std::size_t agreement = 2;
  AggregationOutcome outcome;

  std::optional<AggregatedLabel> label() const;
  Json to_json() const;
};

/// Sentences ranked by cosine to the claim, best first (ties by index).
std::vector<std::size_t> highlights(const TokenizedText& claim, const TokenizedText& body,
                                    const SentenceEmbedder& embedder, std::size_t top_k);

struct Highlight {
  std::size_t sentence = 0;
  std::size_t begin = 0;  ///< byte offset in the article body
  std::size_t end = 0;
};

struct Assignment {
  std::string pair_id;
  Article article;
  Claim claim;
  std::vector<Highlight> highlights;

  Json to_json() const;
};

struct ServiceConfig {
  std::size_t max_annotators = 5;
  std::size_t agreement = 2;
  /// Seconds an unanswered assignment holds a slot before returning to the pool.
  Timestamp lease_seconds = 1800;
  /// Unknown annotators are registered on first contact.
  bool open_registration = false;
  std::size_t highlight_top_k = 3;
  /// Over-generic claims that must never be served.
  std::unordered_set<std::string> claim_blocklist;

  void validate() const;
};

/// Serves pairs and records annotations. All operations are serialized
/// internally and safe to call from several threads.
class AnnotationService {
 public:
  explicit AnnotationService(ServiceConfig cfg = {}, std::shared_ptr<const SentenceEmbedder> embedder = nullptr);

  void register_annotator(const std::string& annotator_id);
  bool has_annotator(const std::string& annotator_id) const;

  /// Adds a pair to the pool. The id defaults to "<article_id>::<claim_id>".
  /// Re-adding an existing pair id is a no-op; returns the id.
  std::string add_pair(const Article& article, const Claim& claim, std::string pair_id = {});

  /// The next pair for this annotator, or nullopt when nothing is eligible.
  /// Throws NotFoundError for an unknown annotator when registration is closed.
  std::optional<Assignment> next_pair(const std::string& annotator_id, Timestamp now);

  /// Stores the annotation and updates the pair status.
  /// ValidationError: bad label combination. NotFoundError: unknown pair or
  /// annotator. DuplicateError: second annotation by the same annotator.
  /// ConflictError: pair no longer open.
  PairState submit(const Annotation& annotation);

  PairState pair(const std::string& pair_id) const;
  std::vector<PairState> pairs() const;
  std::size_t pair_count() const;

  /// One origin=Manual record per Agreed pair.
  std::vector<PairLabel> export_labels() const;

  /// Appends every stored annotation, one JSON object per line.
  void save_annotations(const std::filesystem::path& path) const;
  /// Replays annotations from a file written by save_annotations.
  std::size_t replay_annotations(const std::filesystem::path& path);

  const ServiceConfig& config() const { return cfg_; }

 private:
  struct PairEntry {
    PairState state;
    Article article;
    Claim claim;
    std::map<std::string, Timestamp> leases;  // annotator -> expiry
  };

  bool eligible_locked(const PairEntry& e, const std::string& annotator, Timestamp now) const;
  std::size_t remaining_needed(const PairState& s) const;
  PairState submit_locked(const Annotation& annotation);
  std::vector<Highlight> highlights_for(const PairEntry& e) const;

  ServiceConfig cfg_;
  std::shared_ptr<const SentenceEmbedder> embedder_;
  mutable std::mutex mutex_;
  std::map<std::string, PairEntry> pairs_;
  std::set<std::string> annotators_;
};

}  // namespace factlink
