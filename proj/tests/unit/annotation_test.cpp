#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "factlink/annotation.hpp"
#include "factlink/errors.hpp"
#include "test_support.hpp"

namespace factlink {
namespace {

using PV = PresenceVote;
using SV = StanceVote;

Annotation ann(std::string annotator, PV p, std::optional<SV> s = std::nullopt, std::string pair = "p") {
  return Annotation{std::move(pair), std::move(annotator), p, s, 0};
}

std::vector<Annotation> votes(std::initializer_list<std::pair<PV, std::optional<SV>>> vs) {
  std::vector<Annotation> out;
  int i = 0;
  for (auto [p, s] : vs) out.push_back(ann("u" + std::to_string(i++), p, s));
  return out;
}

// Recounts every prefix from scratch; the winner is whatever first reaches k.
template <typename T>
std::optional<T> prefix_winner(const std::vector<T>& seq, std::size_t k) {
  for (std::size_t n = 1; n <= seq.size(); ++n) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c += seq[i] == seq[n - 1];
    if (c >= k) return seq[n - 1];
  }
  return std::nullopt;
}

AggregationOutcome oracle(const std::vector<Annotation>& as, std::size_t k) {
  std::vector<PV> pres;
  for (const auto& a : as)
    if (a.presence != PV::CantTell) pres.push_back(a.presence);
  AggregationOutcome out;
  if (auto w = prefix_winner(pres, k)) {
    out.presence = *w == PV::Present ? Presence::Present
                   : *w == PV::Suggestive ? Presence::Suggestive
                                          : Presence::NotPresent;
  } else {
    std::size_t pooled = 0;
    for (auto p : pres) pooled += p == PV::Present || p == PV::Suggestive;
    if (pooled >= k) out.presence = Presence::Suggestive;
  }
  if (!out.presence || *out.presence == Presence::NotPresent) return out;
  std::vector<SV> st;
  for (const auto& a : as)
    if ((a.presence == PV::Present || a.presence == PV::Suggestive) && a.stance && *a.stance != SV::CantTell)
      st.push_back(*a.stance);
  if (auto w = prefix_winner(st, k))
    out.stance = *w == SV::Supporting ? Stance::Supporting
                 : *w == SV::Contradicting ? Stance::Contradicting
                                           : Stance::Neutral;
  return out;
}

TEST(Aggregate, Examples) {
  auto r = aggregate(votes({{PV::Present, SV::Supporting}, {PV::Present, SV::Supporting}}));
  EXPECT_EQ(r.presence, Presence::Present);
  EXPECT_EQ(r.stance, Stance::Supporting);

  r = aggregate(votes({{PV::Present, SV::Neutral}, {PV::Suggestive, SV::Neutral}}));
  EXPECT_EQ(r.presence, Presence::Suggestive);
  EXPECT_EQ(r.stance, Stance::Neutral);

  r = aggregate(votes({{PV::Present, SV::Supporting}, {PV::NotPresent, std::nullopt}, {PV::CantTell, std::nullopt}}));
  EXPECT_FALSE(r.presence);

  r = aggregate(votes({{PV::NotPresent, std::nullopt}, {PV::NotPresent, std::nullopt}}));
  EXPECT_EQ(r.presence, Presence::NotPresent);
  EXPECT_FALSE(r.stance);
  EXPECT_TRUE(r.complete());

  r = aggregate(votes({{PV::Present, SV::Supporting}, {PV::Present, SV::Contradicting}}));
  EXPECT_EQ(r.presence, Presence::Present);
  EXPECT_FALSE(r.stance);
  EXPECT_FALSE(r.complete());

  EXPECT_FALSE(aggregate(std::vector<Annotation>{}).presence);
}

TEST(Aggregate, FirstToReachAgreementWins) {
  auto r = aggregate(votes({{PV::NotPresent, std::nullopt},
                            {PV::Present, SV::Neutral},
                            {PV::Present, SV::Neutral},
                            {PV::NotPresent, std::nullopt}}));
  EXPECT_EQ(r.presence, Presence::Present);
}

TEST(Aggregate, MatchesOracleOnAllShortSequences) {
  std::vector<std::pair<PV, std::optional<SV>>> choices;
  for (auto p : kAllPresenceVotes) {
    if (p == PV::Present || p == PV::Suggestive)
      for (auto s : kAllStanceVotes) choices.push_back({p, s});
    else
      choices.push_back({p, std::nullopt});
  }
  std::size_t checked = 0;
  for (std::size_t len = 0; len <= 4; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= choices.size();
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<Annotation> as;
      for (std::size_t i = 0, c = code; i < len; ++i, c /= choices.size())
        as.push_back(ann("u" + std::to_string(i), choices[c % choices.size()].first, choices[c % choices.size()].second));
      for (std::size_t k : {1u, 2u, 3u}) {
        ASSERT_EQ(aggregate(as, k), oracle(as, k)) << "len " << len << " code " << code << " k " << k;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10000u);
}

TEST(Annotation, ValidatesStanceCombination) {
  EXPECT_THROW(ann("u", PV::Present).validate(), ValidationError);
  EXPECT_THROW(ann("u", PV::NotPresent, SV::Neutral).validate(), ValidationError);
  EXPECT_THROW(ann("u", PV::CantTell, SV::Neutral).validate(), ValidationError);
  EXPECT_NO_THROW(ann("u", PV::Suggestive, SV::CantTell).validate());
  EXPECT_NO_THROW(ann("u", PV::CantTell).validate());
}

TEST(Annotation, JsonRoundTrip) {
  auto a = ann("alice", PV::Suggestive, SV::Contradicting);
  a.submitted_at = 1665000000;
  auto back = Annotation::from_json(a.to_json());
  EXPECT_EQ(back.annotator_id, "alice");
  EXPECT_EQ(back.presence, PV::Suggestive);
  EXPECT_EQ(back.stance, SV::Contradicting);
  EXPECT_EQ(back.submitted_at, 1665000000);
  EXPECT_THROW(Annotation::from_json(Json::parse(R"({"pair_id":"p","annotator":"a","presence":"maybe"})")),
               ValidationError);
}

// Service with annotators u1..u6 registered.
struct Svc : AnnotationService {
  explicit Svc(ServiceConfig cfg = {}) : AnnotationService(std::move(cfg)) {
    for (const char* u : {"u1", "u2", "u3", "u4", "u5", "u6"}) register_annotator(u);
  }
};

class ServiceTest : public ::testing::Test {
 protected:
  void add(AnnotationService& s, const std::string& a, const std::string& c) {
    s.add_pair(testing::article(a, "t", "Body one. Body two."), testing::claim(c, "stmt"));
  }
};

TEST_F(ServiceTest, PairIdDefaultsAndReAddIsNoop) {
  Svc s;
  EXPECT_EQ(s.add_pair(testing::article("a1", "t", "b."), testing::claim("c1", "x")), "a1::c1");
  EXPECT_EQ(s.add_pair(testing::article("a1", "t", "b."), testing::claim("c1", "x")), "a1::c1");
  EXPECT_EQ(s.pair_count(), 1u);
}

TEST_F(ServiceTest, UnknownAnnotatorWhenRegistrationClosed) {
  Svc s;
  add(s, "a1", "c1");
  EXPECT_THROW(s.next_pair("stranger", 0), NotFoundError);
  ServiceConfig open;
  open.open_registration = true;
  Svc o(open);
  add(o, "a1", "c1");
  EXPECT_TRUE(o.next_pair("stranger", 0));
  EXPECT_TRUE(o.has_annotator("stranger"));
}

TEST_F(ServiceTest, TwoAgreeingAnnotatorsFinishPair) {
  Svc s;
  add(s, "a1", "c1");
  auto st = s.submit(ann("u1", PV::Present, SV::Supporting, "a1::c1"));
  EXPECT_EQ(st.status, PairStatus::Open);
  st = s.submit(ann("u2", PV::Present, SV::Supporting, "a1::c1"));
  EXPECT_EQ(st.status, PairStatus::Agreed);
  auto labels = s.export_labels();
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].presence, Presence::Present);
  EXPECT_EQ(labels[0].stance, Stance::Supporting);
  EXPECT_EQ(labels[0].origin, Origin::Manual);
  EXPECT_THROW(s.submit(ann("u3", PV::NotPresent, std::nullopt, "a1::c1")), ConflictError);
}

TEST_F(ServiceTest, FiveDisagreeingAnnotatorsDiscardPair) {
  Svc s;
  add(s, "a1", "c1");
  const std::vector<Annotation> seq = {ann("u1", PV::Present, SV::Supporting, "a1::c1"),
                                       ann("u2", PV::NotPresent, std::nullopt, "a1::c1"),
                                       ann("u3", PV::CantTell, std::nullopt, "a1::c1"),
                                       ann("u4", PV::CantTell, std::nullopt, "a1::c1"),
                                       ann("u5", PV::CantTell, std::nullopt, "a1::c1")};
  PairState st;
  for (const auto& a : seq) st = s.submit(a);
  EXPECT_EQ(st.status, PairStatus::Discarded);
  EXPECT_TRUE(s.export_labels().empty());
}

TEST_F(ServiceTest, StanceDisagreementIsDiscardedAndNotExported) {
  Svc s;
  add(s, "a1", "c1");
  const SV stances[] = {SV::Supporting, SV::Contradicting, SV::Neutral, SV::CantTell, SV::CantTell};
  PairState st;
  for (int i = 0; i < 5; ++i)
    st = s.submit(ann("u" + std::to_string(i + 1), PV::Present, stances[i], "a1::c1"));
  EXPECT_EQ(st.outcome.presence, Presence::Present);
  EXPECT_EQ(st.status, PairStatus::Discarded);
  EXPECT_TRUE(s.export_labels().empty());
}

TEST_F(ServiceTest, SubmitErrorOrder) {
  Svc s;
  add(s, "a1", "c1");
  EXPECT_THROW(s.submit(ann("u1", PV::Present, std::nullopt, "nope")), ValidationError);
  EXPECT_THROW(s.submit(ann("u1", PV::NotPresent, std::nullopt, "nope")), NotFoundError);
  EXPECT_THROW(s.submit(ann("ghost", PV::NotPresent, std::nullopt, "a1::c1")), NotFoundError);
  s.submit(ann("u1", PV::NotPresent, std::nullopt, "a1::c1"));
  EXPECT_THROW(s.submit(ann("u1", PV::NotPresent, std::nullopt, "a1::c1")), DuplicateError);
  EXPECT_EQ(s.pair("a1::c1").annotations.size(), 1u);
}

TEST_F(ServiceTest, NeverServesSamePairTwiceToAnnotator) {
  Svc s;
  add(s, "a1", "c1");
  add(s, "a2", "c1");
  auto first = s.next_pair("u1", 0);
  ASSERT_TRUE(first);
  s.submit(ann("u1", PV::NotPresent, std::nullopt, first->pair_id));
  auto second = s.next_pair("u1", 1);
  ASSERT_TRUE(second);
  EXPECT_NE(second->pair_id, first->pair_id);
  s.submit(ann("u1", PV::NotPresent, std::nullopt, second->pair_id));
  EXPECT_FALSE(s.next_pair("u1", 2));
}

TEST_F(ServiceTest, PrefersStartedPairsClosestToAgreement) {
  Svc s;
  add(s, "a1", "c1");
  add(s, "a2", "c1");
  add(s, "a3", "c1");
  s.submit(ann("u1", PV::NotPresent, std::nullopt, "a3::c1"));
  auto next = s.next_pair("u2", 0);
  ASSERT_TRUE(next);
  EXPECT_EQ(next->pair_id, "a3::c1");
  // Untouched pairs come in id order.
  EXPECT_EQ(s.next_pair("u1", 0)->pair_id, "a1::c1");
}

TEST_F(ServiceTest, ReservedSlotsAreLeasedAndExpire) {
  ServiceConfig cfg;
  cfg.max_annotators = 2;
  cfg.lease_seconds = 100;
  Svc s(cfg);
  add(s, "a1", "c1");
  EXPECT_TRUE(s.next_pair("u1", 0));
  EXPECT_TRUE(s.next_pair("u2", 0));
  EXPECT_FALSE(s.next_pair("u3", 50));
  EXPECT_EQ(s.next_pair("u1", 60)->pair_id, "a1::c1");
  EXPECT_TRUE(s.next_pair("u3", 200));
}

TEST_F(ServiceTest, BlocklistedClaimsAreNeverServed) {
  ServiceConfig cfg;
  cfg.claim_blocklist = {"c1"};
  Svc s(cfg);
  add(s, "a1", "c1");
  EXPECT_FALSE(s.next_pair("u1", 0));
  add(s, "a1", "c2");
  EXPECT_EQ(s.next_pair("u1", 0)->pair_id, "a1::c2");
}

TEST_F(ServiceTest, ConfigValidation) {
  ServiceConfig cfg;
  cfg.agreement = 0;
  EXPECT_THROW(AnnotationService{cfg}, ValidationError);
  cfg = {};
  cfg.max_annotators = 1;
  EXPECT_THROW(AnnotationService{cfg}, ValidationError);
}

TEST_F(ServiceTest, SaveAndReplayReproduceState) {
  Svc s;
  add(s, "a1", "c1");
  add(s, "a2", "c1");
  int t = 0;
  for (const auto& a : {ann("u1", PV::Present, SV::Neutral, "a1::c1"), ann("u2", PV::Suggestive, SV::Neutral, "a1::c1"),
                        ann("u1", PV::NotPresent, std::nullopt, "a2::c1")}) {
    auto copy = a;
    copy.submitted_at = ++t;
    s.submit(copy);
  }
  testing::TempDir dir;
  s.save_annotations(dir / "ann.jsonl");

  Svc r;
  add(r, "a1", "c1");
  add(r, "a2", "c1");
  EXPECT_EQ(r.replay_annotations(dir / "ann.jsonl"), 3u);
  EXPECT_EQ(r.pair("a1::c1").status, PairStatus::Agreed);
  EXPECT_EQ(r.pair("a1::c1").outcome, s.pair("a1::c1").outcome);
  EXPECT_EQ(r.pair("a2::c1").annotations.size(), 1u);
}

TEST_F(ServiceTest, ConcurrentSubmissionsNeverDuplicate) {
  ServiceConfig cfg;
  cfg.open_registration = true;
  cfg.max_annotators = 50;
  cfg.agreement = 50;
  AnnotationService s(cfg);
  s.add_pair(testing::article("a1", "t", "b."), testing::claim("c1", "x"));
  std::vector<std::thread> ts;
  std::atomic<int> dup{0};
  for (int t = 0; t < 8; ++t)
    ts.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        try {
          s.submit(ann("u" + std::to_string(i), PV::NotPresent, std::nullopt, "a1::c1"));
        } catch (const DuplicateError&) {
          ++dup;
        } catch (const ConflictError&) {
        }
      }
      (void)t;
    });
  for (auto& th : ts) th.join();
  EXPECT_EQ(s.pair("a1::c1").annotations.size(), 10u);
  EXPECT_EQ(dup.load(), 70);
}

TEST(Highlights, RankedByCosine) {
  auto lex = testing::make_lexicon({{"garlic", {1, 0}}, {"cancer", {0.6, 0.8}}, {"sport", {0, 1}}});
  WordAverageEmbedder emb(lex);
  auto claim = tokenize("garlic");
  auto body = tokenize("Sport today. Cancer rates. Garlic prices.");
  EXPECT_EQ(highlights(claim, body, emb, 2), (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(highlights(claim, body, emb, 10).size(), 3u);
}

TEST(Highlights, AssignmentCarriesByteOffsets) {
  auto lex = testing::make_lexicon({{"garlic", {1, 0}}, {"sport", {0, 1}}});
  auto emb = std::make_shared<WordAverageEmbedder>(lex);
  ServiceConfig cfg;
  cfg.open_registration = true;
  cfg.highlight_top_k = 1;
  AnnotationService s(cfg, emb);
  const std::string body = "Sport today. Garlic prices rose.";
  s.add_pair(testing::article("a1", "t", body), testing::claim("c1", "garlic"));
  auto a = s.next_pair("u", 0);
  ASSERT_TRUE(a);
  ASSERT_EQ(a->highlights.size(), 1u);
  const auto& h = a->highlights[0];
  EXPECT_EQ(body.substr(h.begin, h.end - h.begin), "Garlic prices rose.");
}

}  // namespace
}  // namespace factlink
