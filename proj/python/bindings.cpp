#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "factlink/annotation.hpp"
#include "factlink/corpus_store.hpp"
#include "factlink/errors.hpp"
#include "factlink/evaluation.hpp"
#include "factlink/pipeline.hpp"
#include "factlink/presence.hpp"
#include "factlink/stance.hpp"
#include "factlink/text.hpp"
#include "factlink/veracity.hpp"

namespace py = pybind11;
using namespace factlink;

namespace {

py::object to_python(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return py::none();
    case Json::value_t::boolean: return py::bool_(j.get<bool>());
    case Json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float: return py::float_(j.get<double>());
    case Json::value_t::string: return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_python(v));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
      return out;
    }
    default: return py::none();
  }
}

Annotation annotation_from(const py::dict& d) {
  Annotation a;
  a.pair_id = d.contains("pair_id") ? d["pair_id"].cast<std::string>() : std::string("pair");
  a.annotator_id = d["annotator"].cast<std::string>();
  a.presence = parse_presence_vote(d["presence"].cast<std::string>());
  if (d.contains("stance") && !d["stance"].is_none()) a.stance = parse_stance_vote(d["stance"].cast<std::string>());
  if (d.contains("submitted_at")) a.submitted_at = d["submitted_at"].cast<Timestamp>();
  return a;
}

py::dict outcome_dict(const AggregationOutcome& o) {
  py::dict d;
  d["presence"] = o.presence ? py::object(py::str(to_string(*o.presence))) : py::none();
  d["stance"] = o.stance ? py::object(py::str(to_string(*o.stance))) : py::none();
  return d;
}

// Corpus loaded from a data directory, ready for presence scoring.
class Corpus {
 public:
  Corpus(const std::filesystem::path& data_dir, std::optional<std::filesystem::path> vectors,
         std::optional<std::filesystem::path> medical_terms) {
    store_.load(data_dir);
    std::shared_ptr<const Lexicon> lexicon;
    if (vectors) lexicon = std::make_shared<const Lexicon>(Lexicon::load(*vectors));
    std::optional<SynonymConfig> syn;
    if (medical_terms) {
      syn.emplace();
      syn->medical_terms = SynonymConfig::load_terms(*medical_terms);
    }
    auto articles = store_.articles();
    auto claims = store_.claims();
    engine_ = std::make_unique<PresenceEngine>(articles, claims, lexicon, syn);
  }

  std::size_t size(const std::string& kind) const { return store_.size(parse_record_kind(kind)); }

  py::dict score(const std::string& article_id, const std::string& claim_id, const std::string& method,
                 std::optional<double> threshold) const {
    auto cfg = config(method, threshold);
    auto r = engine_->score(article_id, claim_id, cfg);
    py::dict d;
    d["score"] = r.score;
    d["present"] = r.decision == Decision::Present;
    d["matched_sentences"] = r.matched_sentences;
    return d;
  }

  py::object evaluate(const std::string& method, std::optional<double> threshold) const {
    auto labels = store_.pair_labels();
    auto articles = store_.articles();
    auto cases = presence_cases(labels, articles);
    return to_python(engine_->evaluate(config(method, threshold), cases).to_json());
  }

  double calibrate(const std::string& method, double target_recall) const {
    auto labels = store_.pair_labels();
    auto articles = store_.articles();
    auto cases = presence_cases(labels, articles);
    auto scored = engine_->scored_pairs(config(method, std::nullopt), cases);
    return calibrate_threshold(scored, target_recall);
  }

  py::object report(int decimals) const {
    ReportOptions opts;
    opts.decimals = decimals;
    auto labels = store_.pair_labels();
    auto claims = store_.claims();
    auto articles = store_.articles();
    auto sources = store_.sources();
    return to_python(label_report(labels, claims, articles, sources, opts).to_json());
  }

 private:
  static PresenceConfig config(const std::string& method, std::optional<double> threshold) {
    auto cfg = PresenceConfig::defaults(parse_presence_method(method));
    if (threshold) cfg.threshold = *threshold;
    return cfg;
  }

  CorpusStore store_;
  std::unique_ptr<PresenceEngine> engine_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Claim presence, stance and veracity toolkit";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_KeyError);
  py::register_exception<ConflictError>(m, "ConflictError");

  m.def(
      "tokenize",
      [](const std::string& text) {
        auto t = tokenize(text);
        std::vector<std::vector<std::string>> sentences;
        for (std::size_t i = 0; i < t.sentence_count(); ++i) {
          auto s = t.sentence(i);
          sentences.emplace_back(s.begin(), s.end());
        }
        return sentences;
      },
      py::arg("text"), "Sentences as lists of normalized tokens.");

  m.def(
      "ngrams",
      [](const std::string& claim) {
        std::vector<std::vector<std::string>> out;
        for (const auto& g : extract_ngrams(tokenize(claim)).all()) out.push_back(g.terms);
        return out;
      },
      py::arg("claim"));

  m.def("smoothed_idf", &smoothed_idf, py::arg("document_count"), py::arg("doc_freq"));
  m.def("bm25_idf", &bm25_idf, py::arg("document_count"), py::arg("doc_freq"));
  m.def(
      "bm25_scores",
      [](const std::vector<std::string>& documents, const std::string& query, double k1, double b) {
        std::vector<TokenizedText> docs;
        for (const auto& d : documents) docs.push_back(tokenize(d));
        auto stats = CorpusStats::build(docs);
        auto q = tokenize(query);
        std::vector<double> out;
        for (const auto& d : docs) out.push_back(bm25_score(q, d, stats, {k1, b}));
        return out;
      },
      py::arg("documents"), py::arg("query"), py::arg("k1") = 1.2, py::arg("b") = 0.75);

  m.def(
      "cosine", [](const std::vector<double>& u, const std::vector<double>& v) { return cosine(u, v); },
      py::arg("u"), py::arg("v"));

  m.def(
      "aggregate",
      [](const std::vector<py::dict>& annotations, std::size_t agreement) {
        std::vector<Annotation> anns;
        for (const auto& d : annotations) anns.push_back(annotation_from(d));
        return outcome_dict(aggregate(anns, agreement));
      },
      py::arg("annotations"), py::arg("agreement") = 2,
      "Aggregates {annotator, presence, stance} dicts given in submission order.");

  m.def(
      "combine",
      [](const std::string& stance, const std::string& rating) {
        return to_string(combine(parse_stance(stance), parse_rating(rating)));
      },
      py::arg("stance"), py::arg("claim_rating"));

  m.def(
      "prf1",
      [](const std::vector<std::string>& classes, const std::vector<std::vector<std::size_t>>& counts) {
        ConfusionMatrix cm(classes);
        if (counts.size() != classes.size()) throw ValidationError("matrix size does not match classes");
        for (std::size_t i = 0; i < counts.size(); ++i) {
          if (counts[i].size() != classes.size()) throw ValidationError("matrix must be square");
          for (std::size_t j = 0; j < counts[i].size(); ++j) cm.add(i, j, counts[i][j]);
        }
        return to_python(prf1(cm).to_json());
      },
      py::arg("classes"), py::arg("counts"));

  m.def(
      "roc_points",
      [](const std::vector<double>& scores, const std::vector<int>& gold) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : roc_points(scores, gold)) out.emplace_back(p.fpr, p.tpr);
        return out;
      },
      py::arg("scores"), py::arg("gold"));

  m.def(
      "cross_validate",
      [](const std::vector<int>& labels, const std::function<int(std::vector<std::size_t>, std::size_t)>& predict_fn,
         std::size_t k, std::size_t repeats, std::uint64_t seed) {
        CVPlan plan{k, repeats, seed};
        Trainer trainer = [&](std::span<const std::size_t> train) -> std::function<int(std::size_t)> {
          std::vector<std::size_t> idx(train.begin(), train.end());
          return [idx, &predict_fn](std::size_t i) { return predict_fn(idx, i); };
        };
        return to_python(cross_validate(labels, trainer, plan).to_json());
      },
      py::arg("labels"), py::arg("predict"), py::arg("k") = 5, py::arg("repeats") = 10, py::arg("seed") = 42,
      "predict(train_indices, test_index) -> label");

  m.def(
      "train_stance",
      [](const std::vector<std::vector<double>>& features, const std::vector<std::string>& labels,
         std::size_t epochs, double learning_rate, std::uint64_t seed) {
        if (features.size() != labels.size()) throw ValidationError("features and labels differ in length");
        std::vector<StanceExample> data;
        for (std::size_t i = 0; i < features.size(); ++i) data.push_back({features[i], parse_stance(labels[i])});
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.learning_rate = learning_rate;
        cfg.seed = seed;
        auto model = train(data, cfg).model;
        std::vector<std::string> predicted;
        for (const auto& ex : data) predicted.push_back(to_string(predict(model, ex.features).label));
        return predicted;
      },
      py::arg("features"), py::arg("labels"), py::arg("epochs") = 200, py::arg("learning_rate") = 0.1,
      py::arg("seed") = 42, "Trains a stance model and returns its predictions on the training features.");

  py::class_<AnnotationService>(m, "AnnotationService")
      .def(py::init([](std::size_t max_annotators, std::size_t agreement, bool open_registration) {
             ServiceConfig cfg;
             cfg.max_annotators = max_annotators;
             cfg.agreement = agreement;
             cfg.open_registration = open_registration;
             return std::make_unique<AnnotationService>(cfg);
           }),
           py::arg("max_annotators") = 5, py::arg("agreement") = 2, py::arg("open_registration") = true)
      .def(
          "add_pair",
          [](AnnotationService& s, const std::string& article_id, const std::string& body, const std::string& claim_id,
             const std::string& statement) {
            Article a;
            a.id = article_id;
            a.body = body;
            Claim c;
            c.id = claim_id;
            c.statement = statement;
            return s.add_pair(a, c);
          },
          py::arg("article_id"), py::arg("body"), py::arg("claim_id"), py::arg("statement"))
      .def(
          "next_pair",
          [](AnnotationService& s, const std::string& annotator, Timestamp now) -> py::object {
            auto a = s.next_pair(annotator, now);
            if (!a) return py::none();
            return py::str(a->pair_id);
          },
          py::arg("annotator"), py::arg("now") = 0)
      .def(
          "submit",
          [](AnnotationService& s, const py::dict& d) { return to_string(s.submit(annotation_from(d)).status); },
          py::arg("annotation"))
      .def("status", [](const AnnotationService& s, const std::string& id) { return to_string(s.pair(id).status); })
      .def("export_labels", [](const AnnotationService& s) {
        py::list out;
        for (const auto& l : s.export_labels()) out.append(to_python(to_json(l)));
        return out;
      });

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<const std::filesystem::path&, std::optional<std::filesystem::path>,
                    std::optional<std::filesystem::path>>(),
           py::arg("data_dir"), py::arg("vectors") = std::nullopt, py::arg("medical_terms") = std::nullopt)
      .def("size", &Corpus::size, py::arg("kind"))
      .def("score", &Corpus::score, py::arg("article_id"), py::arg("claim_id"), py::arg("method") = "irse",
           py::arg("threshold") = std::nullopt)
      .def("evaluate", &Corpus::evaluate, py::arg("method") = "irse", py::arg("threshold") = std::nullopt)
      .def("calibrate", &Corpus::calibrate, py::arg("method"), py::arg("target_recall"))
      .def("report", &Corpus::report, py::arg("decimals") = 1);
}
