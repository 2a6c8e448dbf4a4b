#include "relchain/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "io_util.hpp"
#include "relchain/concept_graph.hpp"
#include "relchain/condenser.hpp"
#include "relchain/config.hpp"
#include "relchain/embedding_store.hpp"
#include "relchain/format_check.hpp"
#include "relchain/harness.hpp"
#include "relchain/informativeness.hpp"
#include "relchain/solver.hpp"

namespace relchain {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataFlags {
  std::string relations, classifier, graph, smoothing_vectors, condenser;
  std::vector<std::string> vectors;
};

void add_data_flags(CLI::App* sub, DataFlags& f, bool vectors, bool condenser) {
  sub->add_option("--relations", f.relations, "RELC relation store");
  sub->add_option("--classifier", f.classifier, "INFC informativeness classifier");
  sub->add_option("--graph", f.graph, "Concept graph TSV");
  sub->add_option("--smoothing-vectors", f.smoothing_vectors, "Word vectors for intermediate smoothing");
  if (vectors) sub->add_option("--vectors", f.vectors, "Word vector tables for link prediction");
  if (condenser) sub->add_option("--condenser", f.condenser, "COND checkpoint");
}

/// Loads inputs on first use; command-line paths win over the config's.
class Resources {
 public:
  Resources(const AppConfig& cfg, const DataFlags& flags, std::ostream& err) : cfg_(cfg), flags_(flags), err_(err) {}

  const RelationStore& store() {
    if (!store_) store_ = load_relations(path(flags_.relations, cfg_.data.relations, "--relations"));
    return *store_;
  }
  bool has_classifier() const { return !pick(flags_.classifier, cfg_.data.classifier).empty(); }
  const InformativenessClassifier& classifier() {
    if (!clf_) clf_ = load_classifier(path(flags_.classifier, cfg_.data.classifier, "--classifier"));
    return *clf_;
  }
  const ConceptGraph& graph() {
    if (!graph_) graph_ = load_graph(path(flags_.graph, cfg_.data.graph, "--graph"));
    return *graph_;
  }
  const CondenserModelf& condenser() {
    if (!model_) model_ = load_condenser(path(flags_.condenser, cfg_.data.condenser, "--condenser"));
    return *model_;
  }
  std::vector<const WordVectorTable*> tables() {
    if (tables_.empty()) {
      const auto& paths = flags_.vectors.empty() ? cfg_.data.vectors : flags_.vectors;
      if (paths.empty()) throw UsageError("--vectors is required");
      for (const auto& p : paths) tables_.push_back(std::make_unique<WordVectorTable>(load_word_vectors(p)));
    }
    std::vector<const WordVectorTable*> out;
    for (const auto& t : tables_) out.push_back(t.get());
    return out;
  }
  const WordVectorTable* smoothing_table() {
    if (!cfg_.intermediates.smoothing) return nullptr;
    const std::string p = pick(flags_.smoothing_vectors, cfg_.data.smoothing_vectors);
    if (p.empty()) {
      if (!smoothing_warned_) err_ << "note: no smoothing vectors given; intermediates use direct neighbors only\n";
      smoothing_warned_ = true;
      return nullptr;
    }
    if (!smoothing_) smoothing_ = load_word_vectors(p);
    return &*smoothing_;
  }
  ChainSource chain_source() {
    ChainSource s;
    s.graph = &graph();
    s.store = &store();
    s.smoothing_table = smoothing_table();
    s.ranker = has_classifier() ? &classifier() : nullptr;
    s.options = cfg_.intermediates;
    return s;
  }

 private:
  static std::string pick(const std::string& flag, const std::string& configured) {
    return flag.empty() ? configured : flag;
  }
  static std::string path(const std::string& flag, const std::string& configured, const char* name) {
    std::string p = pick(flag, configured);
    if (p.empty()) throw UsageError(std::string(name) + " is required");
    return p;
  }

  const AppConfig& cfg_;
  const DataFlags& flags_;
  std::ostream& err_;
  bool smoothing_warned_ = false;
  std::optional<RelationStore> store_;
  std::optional<InformativenessClassifier> clf_;
  std::optional<ConceptGraph> graph_;
  std::optional<CondenserModelf> model_;
  std::vector<std::unique_ptr<WordVectorTable>> tables_;
  std::optional<WordVectorTable> smoothing_;
};

/// `a<TAB>b` per line; extra columns are ignored.
std::vector<ConceptPair> load_pairs(const std::string& file) {
  auto in = detail::open_input(file);
  std::vector<ConceptPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line) || line.front() == '#') continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() < 2) throw ParseError(file, line_no, "expected at least two tab-separated fields");
    pairs.push_back({Concept(fields[0]), Concept(fields[1])});
  }
  return pairs;
}

std::set<Concept> load_words(const std::string& file) {
  auto in = detail::open_input(file);
  std::set<Concept> words;
  std::string line;
  while (std::getline(in, line))
    if (!detail::is_blank(line)) words.insert(Concept(line));
  return words;
}

int cmd_ingest_kg(AppConfig& cfg, const std::string& input, const std::string& output,
                  const std::optional<std::string>& language, const std::vector<std::string>& exclude,
                  std::ostream& out) {
  KgIngestOptions opts = cfg.kg;
  if (language) opts.language = *language;
  if (!exclude.empty()) opts.exclusions = {exclude.begin(), exclude.end()};
  KgIngestStats stats;
  const auto graph = ingest_kg(input, opts, &stats);
  save_graph(graph, output);
  out << "rows " << stats.rows << "\nkept " << stats.kept << "\nexcluded " << stats.excluded << "\nother_language "
      << stats.other_language << "\nself_loops " << stats.self_loops << "\nduplicates " << stats.duplicates
      << "\nconcepts " << graph.concept_count() << '\n';
  return 0;
}

int cmd_export_check(const std::vector<std::string>& files, std::ostream& out) {
  int status = 0;
  for (const auto& f : files) {
    const auto r = check_file(f);
    if (r.ok) {
      out << "OK   " << to_string(r.kind) << " dim=" << r.dim << " count=" << r.count << "  " << f << '\n';
    } else {
      out << "FAIL " << to_string(r.kind) << "  " << r.error << '\n';
      status = 2;
    }
  }
  return status;
}

int cmd_train_inf(const AppConfig& cfg, Resources& res, const std::string& pairs_file, bool corrupt,
                  const std::string& output, std::ostream& out) {
  auto data = load_labeled_pairs(pairs_file);
  if (corrupt) {
    std::vector<LabeledPair> positives;
    for (const auto& p : data)
      if (p.label == 1) positives.push_back(p);
    std::size_t skipped = 0;
    auto negatives = corrupt_negatives(positives, cfg.seed, &skipped);
    out << "corrupted negatives " << negatives.size() << " (skipped " << skipped << ")\n";
    data.insert(data.end(), negatives.begin(), negatives.end());
  }
  const auto trained = train_classifier(data, res.store(), cfg.informativeness);
  save_classifier(trained.classifier, output);
  out << "examples " << data.size() << "\nloss " << trained.loss.front() << " -> " << trained.loss.back() << '\n';
  return 0;
}

int cmd_augment(const AppConfig& cfg, Resources& res, const std::vector<std::string>& datasets,
                const std::string& words_file, const std::string& output, const std::string& needed_file,
                std::ostream& out) {
  std::set<Concept> words;
  std::vector<Dataset> loaded;
  for (const auto& d : datasets) {
    loaded.push_back(load_dataset(d));
    words.merge(dataset_words(loaded.back()));
  }
  if (!words_file.empty()) words.merge(load_words(words_file));
  if (words.empty()) throw UsageError("augment needs --dataset or --words");

  ConceptGraph graph = res.graph();
  const auto tables = res.tables();
  const auto report = augment_graph(graph, words, tables, res.store(), res.classifier(), cfg.augment);
  save_graph(graph, output);
  out << "words " << report.words << "\nwords_without_vectors " << report.words_without_vectors << "\nedges_added "
      << report.edges_added << "\nmissing_link_pairs " << report.missing.size() << '\n';

  if (!needed_file.empty()) {
    std::set<ConceptPair> needed(report.missing.begin(), report.missing.end());
    const auto& store = res.store();
    const WordVectorTable* smoothing = res.smoothing_table();
    auto add_legs = [&](const ConceptPair& p) {
      if (!store.contains(p.first, p.second)) needed.insert(p);
      for (const auto& x : intermediate_candidates(p.first, p.second, graph, smoothing, cfg.intermediates)) {
        if (!store.contains(p.first, x)) needed.insert({p.first, x});
        if (!store.contains(x, p.second)) needed.insert({x, p.second});
      }
    };
    for (const auto& ds : loaded)
      for (const auto& q : ds.questions) {
        add_legs(q.query);
        for (const auto& c : q.candidates) add_legs(c);
      }
    auto f = detail::open_output(needed_file);
    for (const auto& p : needed) f << p.first << '\t' << p.second << '\n';
    detail::finish_output(f, needed_file);
    out << "needed_pairs " << needed.size() << '\n';
  }
  return 0;
}

int cmd_train_cond(const AppConfig& cfg, Resources& res, const std::string& pairs_file, const std::string& output,
                   std::ostream& out) {
  std::vector<ConceptPair> pairs;
  if (!pairs_file.empty()) {
    pairs = load_pairs(pairs_file);
  } else {
    const auto& store = res.store();
    for (std::size_t i = 0; i < store.size(); ++i) pairs.push_back(store.key_at(i));
  }
  TrainingSetStats stats;
  const auto trained = train_condenser<float>(pairs, res.chain_source(), res.classifier(), cfg.condenser, &stats);
  save_condenser(trained.model, output);
  save_condenser_sidecar(output, cfg.condenser, trained.log, &stats);
  out << "candidates " << stats.candidates << "\nretained " << stats.retained << "\ntrain_pairs "
      << trained.log.train_pairs << "\nvalidation_pairs " << trained.log.validation_pairs << '\n';
  if (!trained.log.train_loss.empty()) out << "final_train_loss " << trained.log.train_loss.back() << '\n';
  if (!trained.log.validation_loss.empty())
    out << "final_validation_loss " << trained.log.validation_loss.back() << '\n';
  return 0;
}

SolveFn make_solver(const std::string& method, const AppConfig& cfg, Resources& res) {
  if (method == "relbert") {
    const auto& store = res.store();
    return [&store](const AnalogyQuestion& q) { return solve_relbert(q, store); };
  }
  if (method == "cn-types") {
    const auto& graph = res.graph();
    return [&graph](const AnalogyQuestion& q) { return solve_cn_types(q, graph); };
  }
  const ChainSource source = res.chain_source();
  if (method == "condensed") {
    const auto& model = res.condenser();
    return [source, &model](const AnalogyQuestion& q) { return solve_condensed(q, source, model); };
  }
  if (method.starts_with("direct-")) {
    const ChainSimilarity kind = parse_chain_similarity(method.substr(7));
    const CondenserModelf* model = kind == ChainSimilarity::sim2 ? &res.condenser() : nullptr;
    return [source, kind, model](const AnalogyQuestion& q) { return solve_direct(q, source, kind, model); };
  }
  if (method == "hybrid") {
    const HybridOptions opts = cfg.hybrid;
    const bool needs_model = opts.chain_method == ChainMethod::condensed || opts.similarity == ChainSimilarity::sim2;
    const CondenserModelf* model = needs_model ? &res.condenser() : nullptr;
    const auto& clf = res.classifier();
    return [opts, source, &clf, model](const AnalogyQuestion& q) { return solve_hybrid(q, opts, source, clf, model); };
  }
  throw UsageError("unknown method: " + method);
}

SolveFn with_explanation(SolveFn solve, ChainSource source) {
  return [solve = std::move(solve), source](const AnalogyQuestion& q) {
    SolverVerdict v = solve(q);
    try {
      v.explanation = explain(q, v, source);
    } catch (const Error&) {
    }
    return v;
  };
}

std::vector<EvalRun> run_methods(const AppConfig& cfg, Resources& res, const std::string& method,
                                 const std::vector<std::string>& datasets, bool explanations) {
  SolveFn solve = make_solver(method, cfg, res);
  if (explanations) solve = with_explanation(std::move(solve), res.chain_source());
  ConfidenceFn conf;
  if (method != "cn-types" && res.has_classifier()) conf = relbert_confidence(res.store(), res.classifier());
  std::vector<EvalRun> runs;
  for (const auto& d : datasets)
    runs.push_back(evaluate(load_dataset(d), method, solve, conf, cfg.buckets, cfg.threads));
  return runs;
}

void write_records(const std::vector<EvalRun>& runs, const std::string& file, std::ostream& out) {
  std::vector<VerdictRecord> all;
  for (const auto& r : runs) all.insert(all.end(), r.records.begin(), r.records.end());
  if (file.empty() || file == "-") {
    write_verdicts(all, out);
    return;
  }
  auto f = detail::open_output(file);
  write_verdicts(all, f);
  detail::finish_output(f, file);
}

void render(const std::vector<EvalReport>& reports, bool csv, std::ostream& out) {
  if (csv) {
    render_csv(reports, out);
  } else {
    render_table(reports, out);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relation embedding chains for word analogy questions", "relchain"};
  app.fallthrough();
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "JSON config (default: $RELCHAIN_CONFIG)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--threads", threads, "Evaluation threads")->check(CLI::PositiveNumber);

  DataFlags data;

  std::string kg_input, kg_output;
  std::optional<std::string> kg_language;
  std::vector<std::string> kg_exclude;
  auto* ingest = app.add_subcommand("ingest-kg", "Filter a relation<TAB>head<TAB>tail dump into a concept graph");
  ingest->add_option("--input", kg_input, "Assertions TSV")->required();
  ingest->add_option("--output", kg_output, "Graph TSV to write")->required();
  ingest->add_option("--language", kg_language, "Language tag to keep");
  ingest->add_option("--exclude", kg_exclude, "Relations to drop (replaces the configured list)");

  std::vector<std::string> check_files;
  auto* check = app.add_subcommand("export-check", "Validate WVEC/RELC/INFC/COND files");
  check->add_option("files", check_files, "Files to validate")->required();

  std::string inf_pairs, inf_output;
  bool inf_corrupt = false;
  auto* train_inf = app.add_subcommand("train-inf", "Train the informativeness classifier");
  train_inf->add_option("--pairs", inf_pairs, "Labeled pairs TSV (a, b, 0|1)")->required();
  train_inf->add_flag("--corrupt", inf_corrupt, "Add negatives by re-pairing the positives");
  train_inf->add_option("--output", inf_output, "INFC file to write")->required();
  train_inf->add_option("--relations", data.relations, "RELC relation store");

  std::vector<std::string> aug_datasets;
  std::string aug_words, aug_output, aug_needed;
  auto* augment = app.add_subcommand("augment", "Add predicted links around dataset words");
  add_data_flags(augment, data, true, false);
  augment->add_option("--dataset", aug_datasets, "Dataset JSONL whose words are expanded");
  augment->add_option("--words", aug_words, "Extra words, one per line");
  augment->add_option("--output", aug_output, "Augmented graph TSV")->required();
  augment->add_option("--needed-pairs", aug_needed, "Write the pairs still missing from the relation store");

  std::string cond_pairs, cond_output;
  std::optional<std::size_t> cond_latent;
  std::optional<int> cond_epochs;
  auto* train_cond = app.add_subcommand("train-cond", "Train the chain condenser");
  add_data_flags(train_cond, data, false, false);
  train_cond->add_option("--pairs", cond_pairs, "Training pairs TSV (default: every stored pair)");
  train_cond->add_option("--latent-dim", cond_latent, "Latent size m");
  train_cond->add_option("--epochs", cond_epochs, "Training epochs");
  train_cond->add_option("--output", cond_output, "COND checkpoint to write")->required();

  std::string method = "relbert", verdicts_file;
  std::vector<std::string> eval_datasets;
  bool explanations = false, csv = false;
  auto* solve = app.add_subcommand("solve", "Answer dataset questions and emit verdict JSONL");
  add_data_flags(solve, data, false, true);
  solve->add_option("--method", method, "relbert|condensed|direct-sim1|direct-sim2|direct-sim3|cn-types|hybrid");
  solve->add_option("--dataset", eval_datasets, "Dataset JSONL")->required();
  solve->add_option("--output", verdicts_file, "Verdict JSONL (default: stdout)");
  solve->add_flag("--explain", explanations, "Attach the best-matching intermediates");

  auto* eval = app.add_subcommand("eval", "Solve datasets and print accuracy by confidence bucket");
  add_data_flags(eval, data, false, true);
  eval->add_option("--method", method, "relbert|condensed|direct-sim1|direct-sim2|direct-sim3|cn-types|hybrid");
  eval->add_option("--dataset", eval_datasets, "Dataset JSONL")->required();
  eval->add_option("--verdicts", verdicts_file, "Also write verdict JSONL here");
  eval->add_flag("--csv", csv, "CSV instead of a text table");

  std::vector<std::string> report_files;
  auto* report = app.add_subcommand("report", "Summarize stored verdict JSONL");
  report->add_option("verdicts", report_files, "Verdict JSONL files")->required();
  report->add_flag("--csv", csv, "CSV instead of a text table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    AppConfig cfg = resolve_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
    if (seed) {
      cfg.seed = *seed;
      cfg.informativeness.seed = *seed;
      cfg.condenser.seed = *seed;
    }
    if (threads) cfg.threads = *threads;
    if (cond_latent) cfg.condenser.latent_dim = *cond_latent;
    if (cond_epochs) cfg.condenser.epochs = *cond_epochs;
    Resources res(cfg, data, err);

    if (*ingest) return cmd_ingest_kg(cfg, kg_input, kg_output, kg_language, kg_exclude, out);
    if (*check) return cmd_export_check(check_files, out);
    if (*train_inf) return cmd_train_inf(cfg, res, inf_pairs, inf_corrupt, inf_output, out);
    if (*augment) return cmd_augment(cfg, res, aug_datasets, aug_words, aug_output, aug_needed, out);
    if (*train_cond) return cmd_train_cond(cfg, res, cond_pairs, cond_output, out);
    if (*solve) {
      write_records(run_methods(cfg, res, method, eval_datasets, explanations), verdicts_file, out);
      return 0;
    }
    if (*eval) {
      const auto runs = run_methods(cfg, res, method, eval_datasets, explanations);
      if (!verdicts_file.empty()) write_records(runs, verdicts_file, out);
      std::vector<EvalReport> reports;
      for (const auto& r : runs) reports.push_back(r.report);
      render(reports, csv, out);
      return 0;
    }
    if (*report) {
      std::vector<VerdictRecord> records;
      for (const auto& f : report_files) {
        auto in = detail::open_input(f);
        auto part = read_verdicts(in, f);
        records.insert(records.end(), part.begin(), part.end());
      }
      render(reports_from_verdicts(records, cfg.buckets), csv, out);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace relchain
