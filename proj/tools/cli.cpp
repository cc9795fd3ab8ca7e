#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cskit/atomic_file.hpp"
#include "cskit/concepts.hpp"
#include "cskit/corpus.hpp"
#include "cskit/evaluation.hpp"
#include "cskit/features.hpp"
#include "cskit/kg_store.hpp"
#include "cskit/lm_bridge.hpp"
#include "cskit/mlp.hpp"
#include "cskit/prompts.hpp"
#include "cskit/rng.hpp"
#include "cskit/text_util.hpp"

namespace cskit::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Bad flag combinations found after parsing; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  bool verbose = false;
};

struct ScorerOpts {
  std::string endpoint;
  bool null_scorer = false;
  long timeout_ms = 30'000;
  int retries = 2;
  std::string separator = "\\n";
};

struct DataOpts {
  std::string annotations;
  std::string features;
  std::string kg;
  bool average = false;
  std::string history_scope = "all";
  std::uint64_t two_hop_cap = kDefaultTwoHopCap;
  ScorerOpts scorer;
};

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      char c = s[++i];
      out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::unique_ptr<LmScorer> open_scorer(const ScorerOpts& o) {
  ScorerEndpoint ep = o.null_scorer ? parse_endpoint("null")
                      : o.endpoint.empty() ? default_endpoint()
                                           : parse_endpoint(o.endpoint);
  ep.timeout = std::chrono::milliseconds(o.timeout_ms);
  ep.retries = o.retries;
  return make_scorer(ep);
}

void add_scorer_options(CLI::App* sub, ScorerOpts& o) {
  auto* ep = sub->add_option("--scorer", o.endpoint,
                             "LM scorer endpoint: null, echo, stdio:<command> or http://host:port[/path] "
                             "(default: $CSKIT_SCORER, else null)");
  sub->add_flag("--null-scorer", o.null_scorer, "Use the null scorer (LM features are 0)")->excludes(ep);
  sub->add_option("--scorer-timeout-ms", o.timeout_ms, "Per-request scorer timeout in milliseconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--scorer-retries", o.retries, "Scorer retries after a transport failure")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--separator", o.separator, "Turn separator when concatenating history and response")
      ->capture_default_str();
}

void add_data_options(CLI::App* sub, DataOpts& o) {
  auto* ann = sub->add_option("--annotations", o.annotations, "Annotated dataset (JSONL)");
  auto* feat = sub->add_option("--features", o.features, "Featurized dataset (JSONL), instead of --annotations");
  ann->excludes(feat);
  sub->add_option("--kg", o.kg, "Knowledge graph file (with --annotations)");
  sub->add_flag("--average-annotators", o.average, "Average scores of rows sharing dialogue, history and response");
  sub->add_option("--history-scope", o.history_scope, "History concepts from all prior turns or the last one")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "last"}));
  sub->add_option("--two-hop-cap", o.two_hop_cap, "Stop counting two-hop paths at this many")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_scorer_options(sub, o.scorer);
}

void add_hyper_options(CLI::App* sub, Hyper& h) {
  sub->add_option("--hidden", h.hidden, "Units per hidden layer")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--lr", h.learning_rate, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--batch-size", h.batch_size, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--epochs", h.max_epochs, "Maximum training epochs")->capture_default_str();
  sub->add_option("--patience", h.patience, "Early-stopping patience in epochs")->capture_default_str()
      ->check(CLI::PositiveNumber);
}

ConceptGraph load_graph(const std::string& path, const Globals& g, std::ostream& err) {
  auto r = ingest_assertions(std::filesystem::path(path));
  if (g.verbose) {
    err << "loaded " << path << ": " << r.summary.kept << " triples, " << r.graph.num_concepts() << " concepts\n";
  }
  return std::move(r.graph);
}

void validate_data(const DataOpts& o) {
  if (!o.features.empty()) {
    if (!o.kg.empty()) throw UsageError("--kg is only used with --annotations");
    return;
  }
  if (o.annotations.empty()) throw UsageError("one of --annotations or --features is required");
  if (o.kg.empty()) throw UsageError("--annotations requires --kg");
}

std::vector<FeaturizedExample> load_dataset(const DataOpts& o, const Globals& g, std::ostream& err,
                                            std::vector<AnnotatedExample>* annotated = nullptr) {
  validate_data(o);
  if (!o.features.empty()) return read_featurized(std::filesystem::path(o.features));
  auto scorer = open_scorer(o.scorer);
  auto rows = read_annotations(std::filesystem::path(o.annotations));
  if (o.average) rows = average_annotations(rows);
  const ConceptGraph graph = load_graph(o.kg, g, err);
  FeaturizeOptions fo;
  fo.scope = o.history_scope == "last" ? HistoryScope::last_turn : HistoryScope::all_turns;
  fo.two_hop_cap = o.two_hop_cap;
  fo.separator = unescape(o.scorer.separator);
  fo.jobs = g.jobs;
  auto feats = featurize_all(graph, default_extractor(), *scorer, rows, fo);
  std::vector<FeaturizedExample> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.push_back({rows[i].dialogue_id, feats[i], rows[i].human_score});
  if (annotated) *annotated = std::move(rows);
  return out;
}

ordered_json ingest_summary_json(const IngestResult& r) {
  const IngestSummary& s = r.summary;
  ordered_json j;
  j["lines_read"] = s.lines_read;
  j["skipped"] = s.skipped;
  j["kept"] = s.kept;
  j["dropped"] = ordered_json{{"malformed", s.dropped_malformed}, {"language", s.dropped_language},
                              {"multiword", s.dropped_multiword}, {"self_loop", s.dropped_self_loop},
                              {"duplicate", s.dropped_duplicate}};
  j["dropped_total"] = s.dropped_total();
  j["truncated"] = s.truncated;
  j["concepts"] = r.graph.num_concepts();
  j["relations"] = r.graph.num_relations();
  return j;
}

// ---- subcommands ----

struct IngestOpts {
  std::string kg;
  std::string language = "en";
  std::size_t max_triples = 0;
  std::string summary;
};

int cmd_ingest(const IngestOpts& o, std::ostream& out) {
  IngestConfig cfg;
  cfg.language = o.language;
  if (o.max_triples > 0) cfg.max_triples = o.max_triples;
  auto r = ingest_assertions(std::filesystem::path(o.kg), cfg);
  const std::string text = ingest_summary_json(r).dump() + "\n";
  if (!o.summary.empty()) write_file_atomic(o.summary, text);
  out << text;
  return 0;
}

struct ExtractOpts {
  std::vector<std::string> texts;
  std::string input;
  std::string output;
  bool tokens = false;
};

int cmd_extract(const ExtractOpts& o, std::ostream& out) {
  std::vector<std::string> texts = o.texts;
  if (!o.input.empty()) {
    std::istringstream in(read_file(o.input));
    for (std::string line; std::getline(in, line);) {
      if (!trim(line).empty()) texts.push_back(line);
    }
  } else if (texts.empty()) {
    for (std::string line; std::getline(std::cin, line);) {
      if (!trim(line).empty()) texts.push_back(line);
    }
  }
  const ConceptExtractor& ex = default_extractor();
  std::ostringstream buf;
  for (const std::string& t : texts) {
    ordered_json j;
    j["text"] = t;
    j["concepts"] = ex.extract(t);
    if (o.tokens) {
      auto toks = tokenize(t);
      auto tagged = tag_pos(ex.tagger(), toks);
      j["tokens"] = ordered_json::array();
      for (const auto& tt : tagged) {
        j["tokens"].push_back(ordered_json{{"surface", tt.token.surface},
                                           {"pos", to_string(tt.pos)},
                                           {"lemma", ex.lemmatizer().lemmatize(tt.token.surface, tt.pos)}});
      }
    }
    buf << j.dump() << '\n';
  }
  if (o.output.empty()) {
    out << buf.str();
  } else {
    write_file_atomic(o.output, buf.str());
  }
  return 0;
}

struct FilterOpts {
  std::string kg;
  std::string corpus;
  std::string format = "jsonl";
  std::string out_kept;
  std::string out_reports;
  std::string out_stats;
  std::size_t progress_every = 0;
};

int cmd_filter(const FilterOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  const CorpusFormat fmt = parse_corpus_format(o.format);
  const ConceptGraph graph = load_graph(o.kg, g, err);
  auto reader = CorpusReader::open(o.corpus, fmt);

  AtomicFile kept(o.out_kept);
  AtomicFile reports(o.out_reports);
  AtomicFile stats_file(o.out_stats);
  CorpusWriter writer(kept.stream(), fmt);

  FilterOptions fo;
  fo.jobs = g.jobs;
  fo.progress_every = o.progress_every;
  fo.progress = [&](std::uint64_t processed, std::uint64_t n_kept) {
    err << "filter: " << processed << " dialogues processed, " << n_kept << " kept\n";
  };
  CorpusStats stats = filter_corpus(
      graph, default_extractor(), [&] { return reader.next(); },
      [&](const Dialogue& d, const DialogueMatchReport& r) {
        if (r.has_match) writer.write(d);
        reports.stream() << report_to_json(r).dump() << '\n';
      },
      fo);
  writer.finish();
  stats.skipped_empty = reader.skipped_empty();
  stats_file.stream() << stats_to_json(stats).dump(2) << '\n';

  kept.commit();
  reports.commit();
  stats_file.commit();
  if (g.verbose) err << stats_table(stats);
  out << ordered_json{{"total", stats.total}, {"kept", stats.kept}, {"kept_fraction", stats.kept_fraction},
                      {"kept_percent", format_percent(stats.kept_fraction)}}
             .dump()
      << '\n';
  return 0;
}

struct SelectOpts {
  std::string input;
  std::string out_kept;
  std::string out_rejected;
  std::string names;
};

int cmd_select(const SelectOpts& o, std::ostream& out) {
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw IoError("cannot open " + o.input);
  auto rows = read_contexts_tsv(in, o.input);
  PromptSelector selector = o.names.empty() ? PromptSelector() : PromptSelector(read_file(o.names));
  auto sel = select_prompts(rows, selector);

  AtomicFile kept(o.out_kept);
  AtomicFile rejected(o.out_rejected);
  write_kept_tsv(kept.stream(), sel.kept);
  write_rejected_tsv(rejected.stream(), sel.rejected);
  kept.commit();
  rejected.commit();

  std::size_t too_short = 0;
  for (const auto& r : sel.rejected) too_short += r.reason == PromptRejection::too_short;
  out << ordered_json{{"total", rows.size()},
                      {"kept", sel.kept.size()},
                      {"rejected", sel.rejected.size()},
                      {"too_short", too_short},
                      {"no_name", sel.rejected.size() - too_short}}
             .dump()
      << '\n';
  return 0;
}

struct FeaturizeOpts {
  DataOpts data;
  std::string output;
};

int cmd_featurize(const FeaturizeOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  auto rows = load_dataset(o.data, g, err);
  AtomicFile file(o.output);
  for (const auto& r : rows) file.stream() << featurized_to_json(r).dump() << '\n';
  file.commit();
  out << ordered_json{{"examples", rows.size()}, {"output", o.output}}.dump() << '\n';
  return 0;
}

struct TrainOpts {
  DataOpts data;
  std::string mask = "all";
  std::string model;
  double dev_fraction = 0.1;
  Hyper hyper;
};

int cmd_train(const TrainOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  const FeatureMask mask = parse_mask(o.mask);
  auto rows = load_dataset(o.data, g, err);
  auto data = to_train_examples(rows);
  // Seeded split: the last dev_fraction of a shuffled order is the dev set.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(g.seed);
  rng.shuffle(order);
  const auto n_dev = static_cast<std::size_t>(static_cast<double>(data.size()) * o.dev_fraction);
  std::vector<TrainExample> train_set, dev_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i + n_dev >= order.size() ? dev_set : train_set).push_back(data[order[i]]);
  }
  if (train_set.size() < 2) {
    throw std::invalid_argument("training needs at least 2 examples after the dev split, got " +
                                std::to_string(train_set.size()));
  }
  TrainReport rep;
  const RegressorModel model = train(train_set, dev_set, mask, o.hyper, g.seed, &rep);
  model.save(o.model);
  out << ordered_json{{"model", o.model},
                      {"mask", to_string(mask)},
                      {"train_examples", train_set.size()},
                      {"dev_examples", dev_set.size()},
                      {"initial_train_loss", rep.initial_train_loss},
                      {"final_train_loss", rep.final_train_loss},
                      {"best_epoch", rep.best_epoch},
                      {"epochs_run", rep.epochs_run}}
             .dump()
      << '\n';
  return 0;
}

struct ScoreOpts {
  DataOpts data;
  std::string model;
  std::string output;
};

int cmd_score(const ScoreOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  const RegressorModel model = RegressorModel::load(o.model);
  std::vector<AnnotatedExample> annotated;
  auto rows = load_dataset(o.data, g, err, &annotated);
  AtomicFile file(o.output);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ordered_json j = annotated.empty() ? featurized_to_json(rows[i]) : annotation_to_json(annotated[i]);
    j["predicted_score"] = model.predict(rows[i].features);
    file.stream() << j.dump() << '\n';
  }
  file.commit();
  out << ordered_json{{"scored", rows.size()}, {"output", o.output}}.dump() << '\n';
  return 0;
}

struct EvaluateOpts {
  DataOpts data;
  std::vector<std::string> masks;
  std::size_t folds = 10;
  std::string report;
  Hyper hyper;
};

int cmd_evaluate(const EvaluateOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
  std::vector<FeatureMask> masks;
  for (const auto& m : o.masks) masks.push_back(parse_mask(m));
  if (masks.empty()) masks.push_back(FeatureMask::all);
  auto rows = load_dataset(o.data, g, err);
  const auto data = to_train_examples(rows);
  if (data.size() < min_dataset_size(o.folds)) {
    throw std::invalid_argument("dataset too small: " + std::to_string(data.size()) + " examples, " +
                                std::to_string(o.folds) + " folds need at least " +
                                std::to_string(min_dataset_size(o.folds)));
  }
  CvOptions cv;
  cv.folds = o.folds;
  cv.hyper = o.hyper;
  cv.seed = g.seed;
  cv.jobs = g.jobs;
  ordered_json all = ordered_json::array();
  std::ostringstream lines;
  for (FeatureMask m : masks) {
    const EvaluationReport rep = cross_validate(data, m, cv);
    all.push_back(report_to_json(rep));
    char buf[160];
    std::snprintf(buf, sizeof buf, "mask=%s pooled_rho=%.6f p=%.3g n=%zu\n", std::string(to_string(m)).c_str(),
                  rep.pooled.rho, rep.pooled.p, rep.pooled.n);
    lines << buf;
  }
  write_file_atomic(o.report, (all.size() == 1 ? all[0] : all).dump(2) + "\n");
  out << lines.str();
  return 0;
}

struct StatsOpts {
  std::string reports;
  std::string stats;
  bool json_out = false;
};

int cmd_stats(const StatsOpts& o, std::ostream& out) {
  CorpusStats stats;
  if (!o.reports.empty()) {
    std::ifstream in(o.reports, std::ios::binary);
    if (!in) throw IoError("cannot open " + o.reports);
    StatsAccumulator acc;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        acc.add_json(json::parse(line));
      } catch (const json::exception& e) {
        throw CorpusError(o.reports + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    stats = acc.finish();
  } else {
    try {
      stats = stats_from_json(json::parse(read_file(o.stats)));
    } catch (const json::exception& e) {
      throw CorpusError(o.stats + ": " + e.what());
    }
  }
  if (o.json_out) {
    out << stats_to_json(stats).dump(2) << '\n';
  } else {
    out << stats_table(stats);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Commonsense-focused dialogue toolkit: knowledge-graph filtering of dialogue corpora and a "
               "learned commonsense plausibility metric.",
               "cskit"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_version_flag("--version", "cskit 0.1.0");

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads (0 = logical cores)")->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Diagnostics on standard error");

  IngestOpts ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Load a ConceptNet dump or triple TSV and report what was kept");
  s_ingest->add_option("kg", ingest.kg, "Assertions file")->required();
  s_ingest->add_option("--language", ingest.language, "Keep only concepts in this language")->capture_default_str();
  s_ingest->add_option("--max-triples", ingest.max_triples, "Stop after this many triples (0 = no limit)")
      ->capture_default_str();
  s_ingest->add_option("-o,--summary", ingest.summary, "Also write the summary JSON here");

  ExtractOpts extract;
  auto* s_extract = app.add_subcommand("extract-concepts", "Print the concept set of each input text as JSONL");
  auto* o_text = s_extract->add_option("-t,--text", extract.texts, "Text to analyze (repeatable)");
  s_extract->add_option("-i,--input", extract.input, "File with one text per line (default: standard input)")
      ->excludes(o_text);
  s_extract->add_option("-o,--output", extract.output, "Write JSONL here instead of standard output");
  s_extract->add_flag("--tokens", extract.tokens, "Include tokens with POS tags and lemmas");

  FilterOpts filter;
  auto* s_filter = app.add_subcommand("filter", "Keep dialogues with a knowledge-graph match between adjacent turns");
  s_filter->add_option("--kg", filter.kg, "Knowledge graph file")->required();
  s_filter->add_option("--corpus", filter.corpus, "Dialogue corpus")->required();
  s_filter->add_option("--format", filter.format, "Corpus format")
      ->capture_default_str()
      ->check(CLI::IsMember({"keyed-json", "jsonl"}));
  s_filter->add_option("--out-kept", filter.out_kept, "Kept dialogues, in the input format")->required();
  s_filter->add_option("--out-reports", filter.out_reports, "Per-dialogue match reports (JSONL)")->required();
  s_filter->add_option("--out-stats", filter.out_stats, "Corpus statistics (JSON)")->required();
  s_filter->add_option("--progress-every", filter.progress_every,
                       "Report progress on standard error every N dialogues (0 = never)")
      ->capture_default_str();

  SelectOpts select;
  auto* s_select = app.add_subcommand("select-prompts", "Split story contexts into usable prompts and rejects");
  s_select->add_option("contexts", select.input, "TSV of id<TAB>context")->required();
  s_select->add_option("--out-kept", select.out_kept, "Kept contexts (TSV)")->required();
  s_select->add_option("--out-rejected", select.out_rejected, "Rejected contexts with a reason column (TSV)")
      ->required();
  s_select->add_option("--names", select.names, "First-name list replacing the bundled one");

  FeaturizeOpts featurize_o;
  auto* s_featurize = app.add_subcommand("featurize", "Compute metric features for an annotated dataset");
  add_data_options(s_featurize, featurize_o.data);
  s_featurize->add_option("-o,--output", featurize_o.output, "Featurized dataset (JSONL)")->required();

  TrainOpts train_o;
  auto* s_train = app.add_subcommand("train", "Train the regressor on human scores and save the model");
  add_data_options(s_train, train_o.data);
  s_train->add_option("--mask", train_o.mask, "Feature subset")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "symbolic", "neural"}));
  s_train->add_option("--model", train_o.model, "Output model file (JSON)")->required();
  s_train->add_option("--dev-fraction", train_o.dev_fraction, "Share of examples held out for early stopping")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.9));
  add_hyper_options(s_train, train_o.hyper);

  ScoreOpts score_o;
  auto* s_score = app.add_subcommand("score", "Predict scores with a trained model");
  add_data_options(s_score, score_o.data);
  s_score->add_option("--model", score_o.model, "Model file")->required();
  s_score->add_option("-o,--output", score_o.output, "Input rows with predicted_score added (JSONL)")->required();

  EvaluateOpts eval_o;
  auto* s_eval = app.add_subcommand("evaluate", "Cross-validate the regressor and report Spearman correlation");
  add_data_options(s_eval, eval_o.data);
  s_eval->add_option("--mask", eval_o.masks, "Feature subset, repeatable (default: all)")
      ->check(CLI::IsMember({"all", "symbolic", "neural"}));
  s_eval->add_option("--folds", eval_o.folds, "Cross-validation rotations")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000));
  s_eval->add_option("--report", eval_o.report, "Evaluation report (JSON)")->required();
  add_hyper_options(s_eval, eval_o.hyper);

  StatsOpts stats_o;
  auto* s_stats = app.add_subcommand("stats", "Summarize filter results");
  auto* o_reports = s_stats->add_option("--reports", stats_o.reports, "Match reports (JSONL) to aggregate");
  auto* o_stats = s_stats->add_option("--stats", stats_o.stats, "Statistics JSON to render");
  o_reports->excludes(o_stats);
  s_stats->add_flag("--json", stats_o.json_out, "Print JSON instead of a table");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("cskit");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (s_stats->parsed() && stats_o.reports.empty() && stats_o.stats.empty()) {
      throw UsageError("one of --reports or --stats is required");
    }
    for (auto [sub, data] : {std::pair{s_featurize, &featurize_o.data}, std::pair{s_train, &train_o.data},
                             std::pair{s_score, &score_o.data}, std::pair{s_eval, &eval_o.data}}) {
      if (sub->parsed()) validate_data(*data);
    }
    if (s_featurize->parsed() && !featurize_o.data.features.empty()) {
      throw UsageError("featurize reads --annotations, not --features");
    }
    if (s_ingest->parsed()) return cmd_ingest(ingest, out);
    if (s_extract->parsed()) return cmd_extract(extract, out);
    if (s_filter->parsed()) return cmd_filter(filter, g, out, err);
    if (s_select->parsed()) return cmd_select(select, out);
    if (s_featurize->parsed()) return cmd_featurize(featurize_o, g, out, err);
    if (s_train->parsed()) return cmd_train(train_o, g, out, err);
    if (s_score->parsed()) return cmd_score(score_o, g, out, err);
    if (s_eval->parsed()) return cmd_evaluate(eval_o, g, out, err);
    if (s_stats->parsed()) return cmd_stats(stats_o, out);
  } catch (const UsageError& e) {
    err << "cskit: usage error: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  } catch (const std::exception& e) {
    err << "cskit: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace cskit::cli
