#include "factlink/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_map>

#include "factlink/errors.hpp"

namespace factlink {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_order)
    : classes(std::move(class_order)), counts(classes.size(), std::vector<std::size_t>(classes.size(), 0)) {}

ConfusionMatrix ConfusionMatrix::from_labels(std::vector<std::string> class_order, std::span<const std::size_t> gold,
                                             std::span<const std::size_t> predicted) {
  if (gold.size() != predicted.size()) throw ValidationError("gold and predicted lengths differ");
  ConfusionMatrix m(std::move(class_order));
  for (std::size_t i = 0; i < gold.size(); ++i) m.add(gold[i], predicted[i]);
  return m;
}

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted, std::size_t n) {
  if (gold >= classes.size() || predicted >= classes.size()) throw ValidationError("class index out of range");
  counts[gold][predicted] += n;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

Json ConfusionMatrix::to_json() const { return Json{{"classes", classes}, {"counts", counts}}; }

const ClassMetrics& Metrics::of(const std::string& cls) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == cls) return per_class[i];
  throw NotFoundError("unknown class '" + cls + "'");
}

Json Metrics::to_json() const {
  Json per = Json::object();
  for (std::size_t i = 0; i < classes.size(); ++i)
    per[classes[i]] = {{"precision", per_class[i].precision},
                       {"recall", per_class[i].recall},
                       {"f1", per_class[i].f1},
                       {"support", per_class[i].support}};
  return Json{{"accuracy", accuracy}, {"total", total}, {"per_class", per}};
}

Metrics prf1(const ConfusionMatrix& m) {
  const std::size_t n = m.classes.size();
  const std::size_t total = m.total();
  if (n == 0 || total == 0) throw ValidationError("confusion matrix is empty");
  Metrics out;
  out.classes = m.classes;
  out.total = total;
  std::size_t trace = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t tp = m.counts[c][c];
    std::size_t gold = 0, predicted = 0;
    for (std::size_t j = 0; j < n; ++j) {
      gold += m.counts[c][j];
      predicted += m.counts[j][c];
    }
    ClassMetrics cm;
    cm.precision = ratio(tp, predicted);
    cm.recall = ratio(tp, gold);
    cm.f1 = cm.precision + cm.recall > 0 ? 2 * cm.precision * cm.recall / (cm.precision + cm.recall) : 0.0;
    cm.support = gold;
    out.per_class.push_back(cm);
    trace += tp;
  }
  out.accuracy = ratio(trace, total);
  return out;
}

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> gold) {
  if (scores.size() != gold.size()) throw ValidationError("scores and gold lengths differ");
  std::size_t pos = 0, neg = 0;
  for (int g : gold) (g ? pos : neg)++;
  if (pos == 0 || neg == 0) throw ValidationError("ROC needs both positive and negative gold labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> out{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      (gold[order[i]] ? tp : fp)++;
      ++i;
    }
    out.push_back({t, ratio(fp, neg), ratio(tp, pos)});
  }
  if (out.back().fpr != 1.0 || out.back().tpr != 1.0)
    out.push_back({-std::numeric_limits<double>::infinity(), 1.0, 1.0});
  return out;
}

std::string roc_csv(std::span<const RocPoint> points) {
  std::string out = "threshold,fpr,tpr\n";
  char buf[128];
  for (const auto& p : points) {
    if (std::isinf(p.threshold))
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", p.threshold > 0 ? "inf" : "-inf", p.fpr, p.tpr);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.fpr, p.tpr);
    out += buf;
  }
  return out;
}

double auc(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  return area;
}

// ---------------------------------------------------------------------------

std::vector<PresenceCase> presence_cases(std::span<const PairLabel> labels, std::span<const Article> articles,
                                         std::optional<Origin> origin) {
  std::unordered_map<std::string, Split> split_of;
  for (const auto& a : articles) split_of.emplace(a.id, a.split);
  std::vector<PresenceCase> out;
  for (const auto& l : labels) {
    if (origin && l.origin != *origin) continue;
    auto it = split_of.find(l.article_id);
    if (it == split_of.end()) throw DataError("label references unknown article '" + l.article_id + "'");
    out.push_back({l.article_id, l.claim_id, it->second, l.presence != Presence::NotPresent});
  }
  return out;
}

const SplitResult* PresenceEvaluation::split(const std::string& name) const {
  for (const auto& s : splits)
    if (s.split == name) return &s;
  return nullptr;
}

Json PresenceEvaluation::to_json() const {
  Json sp = Json::object();
  for (const auto& s : splits) sp[s.split] = {{"metrics", s.metrics.to_json()}, {"confusion", s.confusion.to_json()}};
  Json j{{"method", method}, {"threshold", threshold}, {"splits", sp}, {"warnings", warnings}};
  if (!roc.empty()) j["auc"] = auc(roc);
  return j;
}

PresenceEvaluation evaluate_presence(std::span<const PresenceCase> cases, const PresenceScorer& scorer,
                                     double threshold, std::optional<Split> split_filter, std::size_t jobs,
                                     std::string method) {
  std::vector<const PresenceCase*> kept;
  for (const auto& c : cases)
    if (!split_filter || c.split == *split_filter) kept.push_back(&c);

  PresenceEvaluation ev;
  ev.method = std::move(method);
  ev.threshold = threshold;
  ev.scores.assign(kept.size(), 0.0);
  parallel_for(kept.size(), jobs, [&](std::size_t i) { ev.scores[i] = scorer(*kept[i]); });
  for (const auto* c : kept) ev.gold.push_back(c->gold_present ? 1 : 0);

  std::map<Split, ConfusionMatrix> per_split;
  ConfusionMatrix overall(kPresenceClasses);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const std::size_t g = kept[i]->gold_present ? 0 : 1;
    const std::size_t p = ev.scores[i] >= threshold ? 0 : 1;
    per_split.try_emplace(kept[i]->split, kPresenceClasses).first->second.add(g, p);
    overall.add(g, p);
  }
  for (Split s : {Split::Sample1, Split::Sample2}) {
    auto it = per_split.find(s);
    if (it == per_split.end()) {
      if (!split_filter || *split_filter == s) ev.warnings.push_back("split " + to_string(s) + " has no pairs");
      continue;
    }
    ev.splits.push_back({to_string(s), it->second, prf1(it->second)});
  }
  if (overall.total() == 0) {
    ev.warnings.push_back("no pairs to evaluate");
    return ev;
  }
  ev.splits.push_back({"overall", overall, prf1(overall)});

  const bool both = std::count(ev.gold.begin(), ev.gold.end(), 1) > 0 && std::count(ev.gold.begin(), ev.gold.end(), 0) > 0;
  if (both)
    ev.roc = roc_points(ev.scores, ev.gold);
  else
    ev.warnings.push_back("gold labels hold a single class; no ROC curve");
  return ev;
}

// ---------------------------------------------------------------------------

void CVPlan::validate() const {
  if (k < 2) throw ValidationError("k must be at least 2");
  if (repeats < 1) throw ValidationError("repeats must be at least 1");
}

Json CVResult::to_json() const {
  Json folds_json = Json::array();
  for (const auto& f : folds)
    folds_json.push_back({{"repeat", f.repeat},
                          {"fold", f.fold},
                          {"train_size", f.train_size},
                          {"test_size", f.test_size},
                          {"accuracy", f.accuracy}});
  return Json{{"mean_accuracy", mean_accuracy},
              {"stddev", stddev},
              {"stratified", stratified},
              {"folds", folds_json},
              {"warnings", warnings}};
}

std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed,
                                      bool stratified) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  if (stratified) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (auto i : order) by_class[labels[i]].push_back(i);
    order.clear();
    for (auto& [_, members] : by_class) order.insert(order.end(), members.begin(), members.end());
  }
  std::vector<std::size_t> fold(labels.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold[order[pos]] = pos % k;
  return fold;
}

CVResult cross_validate(std::span<const int> labels, const Trainer& trainer, const CVPlan& plan, std::size_t jobs) {
  plan.validate();
  if (labels.size() < plan.k)
    throw ValidationError("dataset has " + std::to_string(labels.size()) + " examples, fewer than k=" +
                          std::to_string(plan.k));
  CVResult result;
  std::map<int, std::size_t> class_counts;
  for (int l : labels) ++class_counts[l];
  for (const auto& [cls, n] : class_counts)
    if (n < plan.k) {
      result.stratified = false;
      std::string name = cls >= 0 && static_cast<std::size_t>(cls) < plan.class_names.size()
                             ? plan.class_names[static_cast<std::size_t>(cls)]
                             : std::to_string(cls);
      result.warnings.push_back("class " + name + " has " + std::to_string(n) +
                                " members, fewer than k; using unstratified folds");
      break;
    }

  std::vector<std::vector<std::size_t>> fold_of(plan.repeats);
  for (std::size_t r = 0; r < plan.repeats; ++r)
    fold_of[r] = assign_folds(labels, plan.k, plan.seed + r, result.stratified);

  result.folds.resize(plan.repeats * plan.k);
  parallel_for(result.folds.size(), jobs, [&](std::size_t task) {
    const std::size_t r = task / plan.k, f = task % plan.k;
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold_of[r][i] == f ? test : train).push_back(i);
    auto predictor = trainer(train);
    std::size_t correct = 0;
    for (auto i : test) correct += predictor(i) == labels[i];
    result.folds[task] = {r, f, train.size(), test.size(), ratio(correct, test.size())};
  });

  double sum = 0.0;
  for (const auto& f : result.folds) sum += f.accuracy;
  const double n = static_cast<double>(result.folds.size());
  result.mean_accuracy = sum / n;
  double ss = 0.0;
  for (const auto& f : result.folds) ss += (f.accuracy - result.mean_accuracy) * (f.accuracy - result.mean_accuracy);
  result.stddev = result.folds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return result;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < std::min(jobs, n); ++w)
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace factlink
