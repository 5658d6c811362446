#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "factlink/annotation.hpp"
#include "factlink/annotation_server.hpp"
#include "factlink/corpus_store.hpp"
#include "factlink/errors.hpp"
#include "factlink/evaluation.hpp"
#include "factlink/ingestion.hpp"
#include "factlink/pipeline.hpp"
#include "factlink/presence.hpp"
#include "factlink/stance.hpp"
#include "factlink/veracity.hpp"

namespace fs = std::filesystem;

namespace factlink::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AssertionFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string data_dir = "data";
  std::string config;
};

struct PresenceOpts {
  std::string method = "irse";
  std::optional<double> threshold;
  std::optional<double> prefilter;
  std::size_t top_sentences = kDefaultTopSentences;
  std::string vectors;
  std::string medical_terms;
  std::size_t jobs = 1;
};

struct StanceData {
  std::string records;
  std::string fnc_stances;
  std::string fnc_bodies;
  std::string vectors;
};

struct TrainOpts {
  std::size_t epochs = 200;
  double learning_rate = 0.1;
  std::size_t batch_size = 16;
  std::uint64_t seed = 42;
  double l2 = 1e-4;
  bool balance = false;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file_atomic(p, text);
}

// `explicit_path` when given, else `name` inside the data dir if it exists.
std::string data_file(const Global& g, const std::string& explicit_path, const std::string& name) {
  if (!explicit_path.empty()) return explicit_path;
  fs::path p = fs::path(g.data_dir) / name;
  return fs::exists(p) ? p.string() : std::string();
}

void load_store(CorpusStore& store, const Global& g) {
  if (!fs::is_directory(g.data_dir)) throw DataError("data directory " + g.data_dir + " does not exist");
  store.load(g.data_dir);
}

std::shared_ptr<const Lexicon> load_lexicon(const std::string& path, bool required) {
  if (path.empty()) {
    if (required) throw UsageError("word vectors are required (--vectors or vectors.txt in the data directory)");
    return nullptr;
  }
  return std::make_shared<const Lexicon>(Lexicon::load(path));
}

std::optional<SynonymConfig> load_synonyms(const std::string& path) {
  if (path.empty()) return std::nullopt;
  SynonymConfig cfg;
  cfg.medical_terms = SynonymConfig::load_terms(path);
  return cfg;
}

PresenceConfig presence_config(const PresenceOpts& o) {
  PresenceConfig cfg;
  try {
    cfg = PresenceConfig::defaults(parse_presence_method(o.method));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (o.threshold) cfg.threshold = *o.threshold;
  if (o.prefilter) cfg.prefilter_threshold = *o.prefilter;
  cfg.top_sentences = o.top_sentences;
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

PresenceEngine make_engine(const CorpusStore& store, const Global& g, const PresenceOpts& o, bool need_vectors) {
  auto lexicon = load_lexicon(data_file(g, o.vectors, "vectors.txt"), need_vectors);
  auto synonyms = load_synonyms(data_file(g, o.medical_terms, "medical_terms.txt"));
  auto articles = store.articles();
  auto claims = store.claims();
  return PresenceEngine(articles, claims, lexicon, synonyms);
}

std::string fixed(double v, int decimals = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(decimals) << v;
  return s.str();
}

void add_presence_options(CLI::App* cmd, PresenceOpts& o) {
  cmd->add_option("--method", o.method, "Scoring method: ir, se or irse")
      ->check(CLI::IsMember({"ir", "se", "irse"}))
      ->capture_default_str();
  cmd->add_option("--threshold", o.threshold, "Decision threshold (default 0.5 for ir and se, 0.45 for irse)");
  cmd->add_option("--prefilter", o.prefilter, "Sentence similarity floor for irse (default 0.25)");
  cmd->add_option("--top-sentences", o.top_sentences, "Sentences averaged by the se score")->capture_default_str();
  cmd->add_option("--vectors", o.vectors, "Word vector file (default: <data>/vectors.txt)");
  cmd->add_option("--medical-terms", o.medical_terms, "Medical term list enabling synonym matching "
                                                       "(default: <data>/medical_terms.txt)");
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_stance_data_options(CLI::App* cmd, StanceData& d) {
  cmd->add_option("--records", d.records, "stance records file ({claim_id, article_id, stance} per line); "
                                          "default: manual labels in the store");
  auto* s = cmd->add_option("--fnc-stances", d.fnc_stances, "FNC stances CSV (Headline, Body ID, Stance)");
  auto* b = cmd->add_option("--fnc-bodies", d.fnc_bodies, "FNC bodies CSV (Body ID, articleBody)");
  s->needs(b);
  b->needs(s);
  cmd->add_option("--vectors", d.vectors, "Word vector file (default: <data>/vectors.txt)");
}

void add_train_options(CLI::App* cmd, TrainOpts& t) {
  cmd->add_option("--epochs", t.epochs, "Passes over the data")->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--batch-size", t.batch_size, "Mini-batch size")->capture_default_str();
  cmd->add_option("--seed", t.seed, "Initialization and shuffling seed")->capture_default_str();
  cmd->add_option("--l2", t.l2, "L2 penalty on the weights")->capture_default_str();
  cmd->add_flag("--balance", t.balance, "Weight classes by inverse frequency");
}

TrainConfig train_config(const TrainOpts& t, std::string tag) {
  TrainConfig c;
  c.epochs = t.epochs;
  c.learning_rate = t.learning_rate;
  c.batch_size = t.batch_size;
  c.seed = t.seed;
  c.l2 = t.l2;
  c.balance_classes = t.balance;
  c.data_tag = std::move(tag);
  return c;
}

struct LoadedStance {
  std::vector<StanceExample> examples;
  std::string tag;
};

LoadedStance load_stance_data(const Global& g, const StanceData& d) {
  auto lexicon = load_lexicon(data_file(g, d.vectors, "vectors.txt"), true);
  WordAverageEmbedder embedder(lexicon);
  if (!d.fnc_stances.empty()) {
    auto pairs = load_fnc(d.fnc_stances, d.fnc_bodies);
    return {stance_examples(pairs, embedder), "fnc:" + fs::path(d.fnc_stances).filename().string()};
  }
  CorpusStore store;
  load_store(store, g);
  auto articles = store.articles();
  auto claims = store.claims();
  if (!d.records.empty()) {
    auto records = load_stance_records(d.records);
    return {stance_examples(records, articles, claims, embedder), "records:" + fs::path(d.records).filename().string()};
  }
  auto labels = store.pair_labels();
  auto records = stance_records(labels);
  return {stance_examples(records, articles, claims, embedder), "manual_labels"};
}

void report_training(std::ostream& out, const TrainResult& r, std::span<const StanceExample> data,
                     const std::string& model_path, std::ostream& err) {
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  out << "examples: " << data.size() << "\n";
  if (!r.epoch_loss.empty()) out << "final loss: " << fixed(r.epoch_loss.back(), 6) << "\n";
  out << "training accuracy: " << fixed(accuracy(r.model, data)) << "\n";
  out << "model: " << model_path << " (" << r.model.trained_on << ")\n";
}


double split_accuracy(const PresenceEvaluation& ev, const std::string& metric) {
  if (metric == "auc") {
    if (ev.roc.empty()) throw DataError("auc undefined: gold labels hold a single class");
    return auc(ev.roc);
  }
  std::string split = metric.substr(0, metric.size() - 4);
  const SplitResult* s = ev.split(split);
  if (!s) throw DataError("split " + split + " has no pairs");
  return s->metrics.accuracy;
}

bool compare(double lhs, const std::string& op, double rhs) {
  if (op == ">=") return lhs >= rhs;
  if (op == ">") return lhs > rhs;
  if (op == "<=") return lhs <= rhs;
  if (op == "<") return lhs < rhs;
  return lhs == rhs;
}

void print_presence(std::ostream& out, const PresenceEvaluation& ev) {
  out << "method " << ev.method << ", threshold " << fixed(ev.threshold) << "\n";
  out << "split      n    accuracy  P(present)  R(present)  F1(present)  P(not)  R(not)  F1(not)\n";
  for (const auto& s : ev.splits) {
    const auto& p = s.metrics.of("present");
    const auto& n = s.metrics.of("not_present");
    std::string name = s.split;
    name.resize(10, ' ');
    out << name << ' ' << std::setw(4) << s.metrics.total << "  " << fixed(s.metrics.accuracy) << "    "
        << fixed(p.precision) << "      " << fixed(p.recall) << "      " << fixed(p.f1) << "       "
        << fixed(n.precision) << "  " << fixed(n.recall) << "  " << fixed(n.f1) << "\n";
  }
  if (!ev.roc.empty()) out << "auc " << fixed(auc(ev.roc)) << "\n";
}

std::atomic<AnnotationServer*> g_server{nullptr};

extern "C" void handle_stop_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

// Flat key=value config. "sub.key" targets one subcommand; bare keys apply to
// whichever of the selected subcommand or the main command defines them.
void apply_config(CLI::App& app, CLI::App* leaf, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::set<std::string> known;
  std::function<void(CLI::App*)> collect = [&](CLI::App* a) {
    for (const auto* opt : a->get_options())
      for (const auto& n : opt->get_lnames()) known.insert(n);
    for (auto* sub : a->get_subcommands([](CLI::App*) { return true; })) collect(sub);
  };
  collect(&app);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

    std::string scope;
    if (auto dot = key.rfind('.'); dot != std::string::npos) {
      scope = key.substr(0, dot);
      key = key.substr(dot + 1);
    }
    if (key == "config") continue;
    if (!known.contains(key)) throw UsageError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!scope.empty() && (!leaf || leaf->get_name() != scope)) continue;

    CLI::Option* opt = nullptr;
    if (leaf) opt = leaf->get_option_no_throw("--" + key);
    if (!opt && scope.empty()) opt = app.get_option_no_throw("--" + key);
    if (!opt || opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"factlink: match articles to fact-checked claims, label stance and veracity", "factlink"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Global g;
  if (const char* env = std::getenv("FACTLINK_DATA_DIR"); env && *env) g.data_dir = env;
  app.add_option("--data", g.data_dir, "Data directory holding the corpus files (env FACTLINK_DATA_DIR)")
      ->capture_default_str();
  app.add_option("--config", g.config, "Flat key = value file with option defaults");

  // import
  auto* import_cmd = app.add_subcommand("import", "Import JSON-lines records into the data directory");
  std::string import_kind;
  std::vector<std::string> import_files;
  import_cmd->add_option("kind", import_kind, "articles, claims, sources or pair_labels")
      ->required()
      ->check(CLI::IsMember({"articles", "claims", "sources", "pair_labels"}));
  import_cmd->add_option("files", import_files, "Files to import")->required()->check(CLI::ExistingFile);

  // monitor run
  auto* monitor_cmd = app.add_subcommand("monitor", "Scheduled feed ingestion");
  monitor_cmd->require_subcommand(1);
  auto* monitor_run = monitor_cmd->add_subcommand("run", "Run every monitor that is due");
  Timestamp now = 0;
  std::string monitors_path, state_path, ratings_path;
  monitor_run->add_option("--now", now, "Current time, seconds since the epoch")->required();
  monitor_run->add_option("--monitors", monitors_path, "Monitor config (default: <data>/monitors.json)");
  monitor_run->add_option("--state", state_path, "Run state file (default: <data>/monitor_state.json)");
  monitor_run->add_option("--ratings", ratings_path, "Rating map (default: <data>/rating_map.json when present)");

  // index build
  auto* index_cmd = app.add_subcommand("index", "Corpus statistics");
  index_cmd->require_subcommand(1);
  auto* index_build = index_cmd->add_subcommand("build", "Write document frequencies and lengths");
  std::string index_out;
  index_build->add_option("--out", index_out, "Output file (default: <data>/index.json)");

  // match
  auto* match_cmd = app.add_subcommand("match", "Detect claim presence in articles");
  PresenceOpts match_opts;
  std::string candidates = "all", match_out;
  bool match_save = false;
  add_presence_options(match_cmd, match_opts);
  match_cmd->add_option("--candidates", candidates, "Articles scored per claim: all, or bm25 top group")
      ->check(CLI::IsMember({"all", "bm25"}))
      ->capture_default_str();
  match_cmd->add_option("--out", match_out, "Write predicted pair labels here (default: standard output)");
  match_cmd->add_flag("--save", match_save, "Store predicted labels in the data directory");

  // stance
  auto* stance_cmd = app.add_subcommand("stance", "Article stance model");
  stance_cmd->require_subcommand(1);
  StanceData stance_data;
  TrainOpts train_opts;
  std::string model_in, model_out;
  auto* stance_train = stance_cmd->add_subcommand("train", "Train a stance model from scratch");
  add_stance_data_options(stance_train, stance_data);
  add_train_options(stance_train, train_opts);
  stance_train->add_option("--out", model_out, "Model file (default: <data>/stance_model.txt)");
  auto* stance_finetune = stance_cmd->add_subcommand("finetune", "Continue training an existing model");
  add_stance_data_options(stance_finetune, stance_data);
  add_train_options(stance_finetune, train_opts);
  stance_finetune->add_option("--model", model_in, "Model to start from")->required()->check(CLI::ExistingFile);
  stance_finetune->add_option("--out", model_out, "Model file (default: <data>/stance_model.txt)");
  auto* stance_predict = stance_cmd->add_subcommand("predict", "Predict stance for present pairs");
  std::string pairs_file, predict_out, predict_vectors;
  bool predict_save = false;
  stance_predict->add_option("--model", model_in, "Model file")->required()->check(CLI::ExistingFile);
  stance_predict->add_option("--pairs", pairs_file,
                             "{article_id, claim_id} per line (default: predicted present labels in the store)");
  stance_predict->add_option("--vectors", predict_vectors, "Word vector file (default: <data>/vectors.txt)");
  stance_predict->add_option("--out", predict_out, "Output file (default: standard output)");
  stance_predict->add_flag("--save", predict_save, "Write the stances into the stored predicted labels");

  // aggregate veracity
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Label aggregation");
  aggregate_cmd->require_subcommand(1);
  auto* aggregate_veracity = aggregate_cmd->add_subcommand("veracity", "Pair veracity from stance and claim rating");
  std::string veracity_out;
  bool veracity_save = false;
  aggregate_veracity->add_option("--out", veracity_out, "Output file (default: standard output)");
  aggregate_veracity->add_flag("--save", veracity_save, "Write pair_veracity into the stored labels");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluation");
  eval_cmd->require_subcommand(1);
  auto* eval_presence = eval_cmd->add_subcommand("presence", "Presence detection against manual labels");
  PresenceOpts eval_opts;
  std::string split_name, metrics_out, roc_out;
  std::vector<std::string> assertions;
  std::optional<double> target_recall;
  add_presence_options(eval_presence, eval_opts);
  eval_presence->add_option("--split", split_name, "Only this split")->check(CLI::IsMember({"sample1", "sample2"}));
  eval_presence->add_option("--target-recall", target_recall,
                            "Calibrate the threshold to reach this recall on present pairs");
  eval_presence->add_option("--assert", assertions,
                            "Check such as \"overall_acc>=ir,se\" or \"sample1_acc>=0.6\"; exit 3 on failure");
  eval_presence->add_option("--metrics-out", metrics_out, "Write metrics.json here");
  eval_presence->add_option("--roc-out", roc_out, "Write roc.csv here");

  auto* eval_stance = eval_cmd->add_subcommand("stance", "Stance model accuracy and per-class metrics");
  StanceData eval_stance_data;
  std::string eval_model;
  add_stance_data_options(eval_stance, eval_stance_data);
  eval_stance->add_option("--model", eval_model, "Model file")->required()->check(CLI::ExistingFile);
  eval_stance->add_option("--metrics-out", metrics_out, "Write metrics.json here");

  auto* eval_cv = eval_cmd->add_subcommand("cv", "Repeated stratified k-fold cross-validation of the stance model");
  StanceData cv_data;
  TrainOpts cv_train;
  CVPlan plan;
  std::string trainer_name = "softmax";
  std::string pretrained;
  std::size_t cv_jobs = 1;
  add_stance_data_options(eval_cv, cv_data);
  add_train_options(eval_cv, cv_train);
  eval_cv->add_option("--k", plan.k, "Folds")->capture_default_str();
  eval_cv->add_option("--repeats", plan.repeats, "Repetitions")->capture_default_str();
  eval_cv->add_option("--cv-seed", plan.seed, "Fold shuffling seed")->capture_default_str();
  eval_cv->add_option("--trainer", trainer_name, "softmax or majority")
      ->check(CLI::IsMember({"softmax", "majority"}))
      ->capture_default_str();
  eval_cv->add_option("--pretrained", pretrained, "Fine-tune this model in every fold instead of training anew")
      ->check(CLI::ExistingFile);
  eval_cv->add_option("--jobs", cv_jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  eval_cv->add_option("--metrics-out", metrics_out, "Write the fold results here");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation HTTP API");
  std::string host = "127.0.0.1", blocklist, annotations_log, serve_vectors;
  int port = 8080;
  ServiceConfig service_cfg;
  bool closed_registration = false, serve_save = false;
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port, 0 for any free port")->capture_default_str();
  serve_cmd->add_option("--pairs", pairs_file, "{article_id, claim_id} per line (default: predicted present labels)");
  serve_cmd->add_option("--max-annotators", service_cfg.max_annotators, "Annotators per pair before discarding")
      ->capture_default_str();
  serve_cmd->add_option("--agreement", service_cfg.agreement, "Matching labels needed")->capture_default_str();
  serve_cmd->add_option("--lease-seconds", service_cfg.lease_seconds, "Idle time before an assignment lapses")
      ->capture_default_str();
  serve_cmd->add_option("--blocklist", blocklist, "Claim ids never served, one per line")->check(CLI::ExistingFile);
  serve_cmd->add_option("--annotations", annotations_log, "Annotation log replayed at start and written at exit");
  serve_cmd->add_option("--vectors", serve_vectors, "Word vectors for highlights (default: <data>/vectors.txt)");
  serve_cmd->add_flag("--closed-registration", closed_registration, "Reject annotators not registered beforehand");
  serve_cmd->add_flag("--save", serve_save, "Store agreed labels in the data directory at exit");

  // report
  auto* report_cmd = app.add_subcommand("report", "Stance and veracity distributions");
  std::string report_out, origin_name = "all";
  int decimals = 1;
  report_cmd->add_option("--out", report_out, "Write report.json here");
  report_cmd->add_option("--decimals", decimals, "Percentage precision")->check(CLI::Range(0, 6))->capture_default_str();
  report_cmd->add_option("--origin", origin_name, "manual, predicted or all")
      ->check(CLI::IsMember({"manual", "predicted", "all"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kUsage;
  }

  CLI::App* leaf = &app;
  while (true) {
    auto subs = leaf->get_subcommands();
    if (subs.empty()) break;
    leaf = subs.front();
  }

  try {
    if (!g.config.empty()) apply_config(app, leaf, g.config);

    if (*import_cmd) {
      CorpusStore store;
      if (fs::is_directory(g.data_dir)) store.load(g.data_dir);
      RecordKind kind = parse_record_kind(import_kind);
      for (const auto& f : import_files) out << f << ": " << store.import_records(f, kind) << " records\n";
      fs::create_directories(g.data_dir);
      store.save(g.data_dir);
      return kOk;
    }

    if (*monitor_run) {
      CorpusStore store;
      if (fs::is_directory(g.data_dir)) store.load(g.data_dir);
      std::string config = data_file(g, monitors_path, "monitors.json");
      if (config.empty()) throw UsageError("no monitor config (--monitors or monitors.json in the data directory)");
      std::string ratings_file = data_file(g, ratings_path, "rating_map.json");
      RatingMap ratings = ratings_file.empty() ? RatingMap::defaults() : RatingMap::load(ratings_file);
      std::string state = state_path.empty() ? (fs::path(g.data_dir) / "monitor_state.json").string() : state_path;
      Ingestor ingestor(store, ratings, fs::path(config).parent_path());
      ingestor.load_config(config);
      ingestor.load_state(state);
      RunReport report = ingestor.run_due_monitors(now);
      fs::create_directories(g.data_dir);
      store.save(g.data_dir);
      ingestor.save_state(state);
      out << report.to_json().dump(2) << "\n";
      bool failed = false;
      for (const auto& r : report.runs) {
        for (const auto& w : r.warnings) err << "warning: " << r.monitor_id << ": " << w << "\n";
        for (const auto& e : r.errors) {
          err << "error: " << r.monitor_id << ": " << e << "\n";
          failed = true;
        }
      }
      return failed ? kDataError : kOk;
    }

    if (*index_build) {
      CorpusStore store;
      load_store(store, g);
      auto articles = store.articles();
      std::vector<NGram> ngrams;
      for (const auto& c : store.claims()) {
        auto tokens = tokenize(c.statement);
        if (tokens.empty()) continue;
        auto all = extract_ngrams(tokens).all();
        ngrams.insert(ngrams.end(), all.begin(), all.end());
      }
      auto index = Bm25Index::build(articles, ngrams);
      std::string path = index_out.empty() ? (fs::path(g.data_dir) / "index.json").string() : index_out;
      write_text(path, index.stats().to_json().dump(2) + "\n");
      out << "indexed " << index.size() << " articles into " << path << "\n";
      return kOk;
    }

    if (*match_cmd) {
      PresenceConfig cfg = presence_config(match_opts);
      CorpusStore store;
      load_store(store, g);
      auto engine = make_engine(store, g, match_opts, cfg.method != PresenceMethod::IR);
      auto results = engine.match(cfg, parse_candidate_mode(candidates), match_opts.jobs);
      std::ostringstream lines;
      std::size_t present = 0;
      for (const auto& r : results) {
        lines << to_json(r.to_pair_label()).dump() << "\n";
        present += r.decision == Decision::Present;
        if (match_save) store.upsert(r.to_pair_label());
      }
      if (match_out.empty()) out << lines.str();
      else write_text(match_out, lines.str());
      if (match_save) store.save(g.data_dir);
      err << "scored " << results.size() << " pairs, " << present << " present\n";
      return kOk;
    }

    if (*stance_train || *stance_finetune) {
      auto data = load_stance_data(g, stance_data);
      if (data.examples.empty()) throw DataError("no stance examples");
      std::string path = model_out.empty() ? (fs::path(g.data_dir) / "stance_model.txt").string() : model_out;
      TrainResult result;
      if (*stance_train) {
        result = train(data.examples, train_config(train_opts, data.tag));
      } else {
        result = fine_tune(StanceModel::load(fs::path(model_in)), data.examples, train_config(train_opts, data.tag));
      }
      if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
      result.model.save(fs::path(path));
      report_training(out, result, data.examples, path, err);
      return kOk;
    }

    if (*stance_predict) {
      CorpusStore store;
      load_store(store, g);
      auto model = StanceModel::load(fs::path(model_in));
      auto lexicon = load_lexicon(data_file(g, predict_vectors, "vectors.txt"), true);
      WordAverageEmbedder embedder(lexicon);

      std::vector<std::pair<std::string, std::string>> pairs;
      if (!pairs_file.empty()) {
        std::istringstream in(read_file(pairs_file));
        std::string line;
        while (std::getline(in, line)) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          auto j = Json::parse(line);
          pairs.emplace_back(j.at("article_id").get<std::string>(), j.at("claim_id").get<std::string>());
        }
      } else {
        for (const auto& l : store.pair_labels())
          if (l.origin == Origin::Predicted && l.presence != Presence::NotPresent)
            pairs.emplace_back(l.article_id, l.claim_id);
      }
      std::ostringstream lines;
      for (const auto& [article_id, claim_id] : pairs) {
        auto article = store.article(article_id);
        auto claim = store.claim(claim_id);
        if (!article || !claim) throw DataError("unknown pair " + article_id + " / " + claim_id);
        auto p = predict(model, *claim, *article, embedder);
        Json j{{"article_id", article_id}, {"claim_id", claim_id}, {"stance", to_string(p.label)},
               {"probabilities", p.probabilities}};
        lines << j.dump() << "\n";
        if (predict_save) {
          for (auto l : store.pair_labels())
            if (l.article_id == article_id && l.claim_id == claim_id && l.origin == Origin::Predicted &&
                l.presence != Presence::NotPresent) {
              l.stance = p.label;
              store.upsert(l);
            }
        }
      }
      if (predict_out.empty()) out << lines.str();
      else write_text(predict_out, lines.str());
      if (predict_save) store.save(g.data_dir);
      return kOk;
    }

    if (*aggregate_veracity) {
      CorpusStore store;
      load_store(store, g);
      auto labels = store.pair_labels();
      auto claims = store.claims();
      std::ostringstream lines;
      std::size_t n = 0;
      for (auto& l : labels) {
        if (!l.stance || l.presence == Presence::NotPresent) continue;
        auto claim = store.claim(l.claim_id);
        if (!claim) continue;
        l.pair_veracity = combine(*l.stance, claim->rating);
        lines << Json{{"article_id", l.article_id}, {"claim_id", l.claim_id}, {"origin", to_string(l.origin)},
                      {"stance", to_string(*l.stance)}, {"claim_rating", to_string(claim->rating)},
                      {"pair_veracity", to_string(*l.pair_veracity)}}
                     .dump()
              << "\n";
        ++n;
        if (veracity_save) store.upsert(l);
      }
      if (veracity_out.empty()) out << lines.str();
      else write_text(veracity_out, lines.str());
      if (veracity_save) store.save(g.data_dir);
      err << n << " pair veracities\n";
      return kOk;
    }

    if (*eval_presence) {
      PresenceConfig cfg = presence_config(eval_opts);
      std::vector<std::tuple<std::string, std::string, std::string>> checks;
      static const std::regex kAssert(R"(^\s*((?:overall|sample1|sample2)_acc|auc)\s*(>=|<=|==|>|<)\s*(.+?)\s*$)");
      for (const auto& a : assertions) {
        std::smatch m;
        if (!std::regex_match(a, m, kAssert)) throw UsageError("cannot parse --assert \"" + a + "\"");
        checks.emplace_back(m[1], m[2], m[3]);
      }
      std::optional<Split> split;
      if (!split_name.empty()) split = parse_split(split_name);

      CorpusStore store;
      load_store(store, g);
      bool need_vectors = cfg.method != PresenceMethod::IR;
      for (const auto& [_, __, rhs] : checks)
        if (rhs.find("se") != std::string::npos) need_vectors = true;
      auto engine = make_engine(store, g, eval_opts, need_vectors);
      auto labels = store.pair_labels();
      auto articles = store.articles();
      auto cases = presence_cases(labels, articles);
      if (cases.empty()) throw DataError("no manual pair labels to evaluate against");

      if (target_recall) {
        std::vector<PresenceCase> kept;
        for (const auto& c : cases)
          if (!split || c.split == *split) kept.push_back(c);
        auto scored = engine.scored_pairs(cfg, kept, eval_opts.jobs);
        cfg.threshold = calibrate_threshold(scored, *target_recall);
        out << "calibrated threshold " << fixed(cfg.threshold, 6) << " (recall " << fixed(recall_at(scored, cfg.threshold))
            << ")\n";
      }
      auto ev = engine.evaluate(cfg, cases, split, eval_opts.jobs);
      for (const auto& w : ev.warnings) err << "warning: " << w << "\n";
      print_presence(out, ev);

      Json metrics = Json::object();
      metrics[ev.method] = ev.to_json();
      int status = kOk;
      std::map<std::string, PresenceEvaluation> others;
      for (const auto& [metric, op, rhs] : checks) {
        const double lhs = split_accuracy(ev, metric);
        std::vector<std::pair<std::string, double>> targets;
        char* end = nullptr;
        double number = std::strtod(rhs.c_str(), &end);
        if (end && *end == '\0') {
          targets.emplace_back(rhs, number);
        } else {
          std::stringstream ss(rhs);
          std::string name;
          while (std::getline(ss, name, ',')) {
            auto method = parse_presence_method(name);
            auto it = others.find(name);
            if (it == others.end()) {
              auto other_cfg = PresenceConfig::defaults(method);
              other_cfg.top_sentences = cfg.top_sentences;
              it = others.emplace(name, engine.evaluate(other_cfg, cases, split, eval_opts.jobs)).first;
              metrics[name] = it->second.to_json();
            }
            targets.emplace_back(name, split_accuracy(it->second, metric));
          }
        }
        for (const auto& [name, value] : targets) {
          bool ok = compare(lhs, op, value);
          out << "assert " << metric << op << name << ": " << fixed(lhs) << " vs " << fixed(value) << " "
              << (ok ? "pass" : "FAIL") << "\n";
          if (!ok) status = kAssertFailed;
        }
      }
      if (!metrics_out.empty()) write_text(metrics_out, metrics.dump(2) + "\n");
      if (!roc_out.empty()) {
        if (ev.roc.empty()) throw DataError("no ROC curve: gold labels hold a single class");
        write_text(roc_out, roc_csv(ev.roc));
      }
      if (status == kAssertFailed) err << "error: assertion failed\n";
      return status;
    }

    if (*eval_stance) {
      auto data = load_stance_data(g, eval_stance_data);
      if (data.examples.empty()) throw DataError("no stance examples");
      auto model = StanceModel::load(fs::path(eval_model));
      std::vector<std::string> classes;
      for (auto s : kStanceClassOrder) classes.push_back(to_string(s));
      ConfusionMatrix cm(classes);
      for (const auto& ex : data.examples) cm.add(class_index(ex.label), class_index(predict(model, ex.features).label));
      auto m = prf1(cm);
      out << "examples " << m.total << ", accuracy " << fixed(m.accuracy) << "\n";
      for (std::size_t i = 0; i < classes.size(); ++i)
        out << "  " << classes[i] << ": precision " << fixed(m.per_class[i].precision) << ", recall "
            << fixed(m.per_class[i].recall) << ", f1 " << fixed(m.per_class[i].f1) << "\n";
      if (!metrics_out.empty())
        write_text(metrics_out, Json{{"metrics", m.to_json()}, {"confusion", cm.to_json()}}.dump(2) + "\n");
      return kOk;
    }

    if (*eval_cv) {
      auto data = load_stance_data(g, cv_data);
      try {
        plan.validate();
      } catch (const ValidationError& e) {
        throw UsageError(e.what());
      }
      for (auto st : kStanceClassOrder) plan.class_names.push_back(to_string(st));
      std::vector<int> labels;
      for (const auto& ex : data.examples) labels.push_back(static_cast<int>(class_index(ex.label)));
      std::optional<StanceModel> base;
      if (!pretrained.empty()) base = StanceModel::load(fs::path(pretrained));
      const auto tcfg = train_config(cv_train, data.tag);

      Trainer trainer = [&](std::span<const std::size_t> train_idx) -> std::function<int(std::size_t)> {
        if (trainer_name == "majority") {
          std::array<std::size_t, kStanceClasses> counts{};
          for (auto i : train_idx) ++counts[static_cast<std::size_t>(labels[i])];
          int best = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
          return [best](std::size_t) { return best; };
        }
        std::vector<StanceExample> subset;
        for (auto i : train_idx) subset.push_back(data.examples[i]);
        auto model = base ? fine_tune(*base, subset, tcfg).model : train(subset, tcfg).model;
        return [model, &data](std::size_t i) {
          return static_cast<int>(class_index(predict(model, data.examples[i].features).label));
        };
      };
      auto result = cross_validate(labels, trainer, plan, cv_jobs);
      for (const auto& w : result.warnings) err << "warning: " << w << "\n";
      out << "folds " << result.folds.size() << ", mean accuracy " << fixed(result.mean_accuracy) << ", stddev "
          << fixed(result.stddev) << (result.stratified ? "" : " (unstratified)") << "\n";
      if (!metrics_out.empty()) write_text(metrics_out, result.to_json().dump(2) + "\n");
      return kOk;
    }

    if (*serve_cmd) {
      CorpusStore store;
      load_store(store, g);
      service_cfg.open_registration = !closed_registration;
      if (!blocklist.empty()) {
        std::istringstream in(read_file(blocklist));
        std::string id;
        while (in >> id) service_cfg.claim_blocklist.insert(id);
      }
      std::shared_ptr<const SentenceEmbedder> embedder;
      if (auto path = data_file(g, serve_vectors, "vectors.txt"); !path.empty())
        embedder = std::make_shared<WordAverageEmbedder>(load_lexicon(path, true));
      AnnotationService service(service_cfg, embedder);

      std::vector<std::pair<std::string, std::string>> pairs;
      if (!pairs_file.empty()) {
        std::istringstream in(read_file(pairs_file));
        std::string line;
        while (std::getline(in, line)) {
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          auto j = Json::parse(line);
          pairs.emplace_back(j.at("article_id").get<std::string>(), j.at("claim_id").get<std::string>());
        }
      } else {
        for (const auto& l : store.pair_labels())
          if (l.origin == Origin::Predicted && l.presence != Presence::NotPresent)
            pairs.emplace_back(l.article_id, l.claim_id);
      }
      for (const auto& [a, c] : pairs) {
        auto article = store.article(a);
        auto claim = store.claim(c);
        if (!article || !claim) throw DataError("unknown pair " + a + " / " + c);
        service.add_pair(*article, *claim);
      }
      if (!annotations_log.empty() && fs::exists(annotations_log))
        out << "replayed " << service.replay_annotations(annotations_log) << " annotations\n";

      AnnotationServer server(service);
      int bound = server.bind(host, port);
      if (bound < 0) throw DataError("cannot bind " + host + ":" + std::to_string(port));
      out << "serving " << service.pair_count() << " pairs on http://" << host << ":" << bound << std::endl;
      g_server = &server;
      auto old_int = std::signal(SIGINT, handle_stop_signal);
      auto old_term = std::signal(SIGTERM, handle_stop_signal);
      server.serve();
      std::signal(SIGINT, old_int);
      std::signal(SIGTERM, old_term);
      g_server = nullptr;

      if (!annotations_log.empty()) service.save_annotations(annotations_log);
      if (serve_save) {
        for (const auto& l : service.export_labels()) store.upsert(l);
        store.save(g.data_dir);
      }
      out << "stopped\n";
      return kOk;
    }

    if (*report_cmd) {
      CorpusStore store;
      load_store(store, g);
      ReportOptions opts;
      opts.decimals = decimals;
      if (origin_name != "all") opts.origin = parse_origin(origin_name);
      auto labels = store.pair_labels();
      auto claims = store.claims();
      auto articles = store.articles();
      auto sources = store.sources();
      auto rep = label_report(labels, claims, articles, sources, opts);
      out << rep.to_text();
      if (!report_out.empty()) write_text(report_out, rep.to_json().dump(2) + "\n");
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  err << "error: no command\n";
  return kUsage;
}

}  // namespace factlink::cli
