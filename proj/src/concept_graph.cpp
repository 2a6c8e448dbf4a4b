#include "relchain/concept_graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "io_util.hpp"

namespace relchain {

namespace {

const std::set<Concept> kNoNeighbors;
const std::set<std::string> kNoTypes;

ConceptPair unordered_key(const Concept& x, const Concept& y) { return x < y ? ConceptPair{x, y} : ConceptPair{y, x}; }

std::string edge_key(const GraphEdge& e) {
  if (e.provenance == Provenance::mlp) {
    const auto k = unordered_key(e.head, e.tail);
    return "m\t" + k.first.str() + "\t" + k.second.str();
  }
  return "k\t" + e.relation.value_or("") + "\t" + e.head.str() + "\t" + e.tail.str();
}

// Parses a KG node field. Returns nullopt when the node belongs to another language.
std::optional<Concept> parse_node(std::string_view field, const std::string& language) {
  if (field.starts_with("/c/")) {
    field.remove_prefix(3);
    const auto slash = field.find('/');
    if (slash == std::string_view::npos) throw Error("concept URI without a term");
    if (field.substr(0, slash) != language) return std::nullopt;
    field.remove_prefix(slash + 1);
    field = field.substr(0, field.find('/'));
    if (field.empty()) throw Error("concept URI without a term");
  }
  return Concept(field);
}

}  // namespace

std::string_view to_string(Provenance p) { return p == Provenance::kg ? "kg" : "mlp"; }

bool ConceptGraph::add_edge(GraphEdge edge) {
  if (edge.head == edge.tail) throw Error("self-loop on " + edge.head.str());
  if (edge.provenance == Provenance::mlp) edge.relation.reset();
  if (!edge_keys_.insert(edge_key(edge)).second) return false;
  adjacency_[edge.head].insert(edge.tail);
  adjacency_[edge.tail].insert(edge.head);
  if (edge.relation) types_[unordered_key(edge.head, edge.tail)].insert(*edge.relation);
  edges_.push_back(std::move(edge));
  return true;
}

bool ConceptGraph::adjacent(const Concept& x, const Concept& y) const { return neighbors(x).contains(y); }

const std::set<Concept>& ConceptGraph::neighbors(const Concept& c) const {
  auto it = adjacency_.find(c);
  return it == adjacency_.end() ? kNoNeighbors : it->second;
}

const std::set<std::string>& ConceptGraph::relation_types(const Concept& x, const Concept& y) const {
  auto it = types_.find(unordered_key(x, y));
  return it == types_.end() ? kNoTypes : it->second;
}

ConceptGraph ConceptGraph::filtered(bool keep_kg, bool keep_mlp) const {
  ConceptGraph out;
  for (const auto& e : edges_) {
    if ((e.provenance == Provenance::kg && keep_kg) || (e.provenance == Provenance::mlp && keep_mlp)) out.add_edge(e);
  }
  return out;
}

ConceptGraph read_kg(std::istream& in, const KgIngestOptions& options, KgIngestStats* stats,
                     const std::string& source) {
  ConceptGraph graph;
  KgIngestStats local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line) || line.front() == '#') continue;
    ++local.rows;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4) throw ParseError(source, line_no, "expected 3 or 4 tab-separated columns");
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) throw ParseError(source, line_no, "empty field");
    const std::string relation(fields[0]);
    std::optional<Concept> head, tail;
    try {
      head = parse_node(fields[1], options.language);
      tail = parse_node(fields[2], options.language);
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (options.exclusions.contains(relation)) {
      ++local.excluded;
      continue;
    }
    if (!head || !tail) {
      ++local.other_language;
      continue;
    }
    if (*head == *tail) {
      ++local.self_loops;
      continue;
    }
    if (graph.add_edge({std::move(*head), std::move(*tail), relation, Provenance::kg})) {
      ++local.kept;
    } else {
      ++local.duplicates;
    }
  }
  if (stats) *stats = local;
  return graph;
}

ConceptGraph ingest_kg(const std::filesystem::path& path, const KgIngestOptions& options, KgIngestStats* stats) {
  auto in = detail::open_input(path);
  return read_kg(in, options, stats, path.string());
}

void write_graph(const ConceptGraph& graph, std::ostream& out) {
  for (const auto& e : graph.edges()) {
    out << e.head << '\t' << e.tail << '\t' << (e.relation ? *e.relation : std::string("_")) << '\t'
        << to_string(e.provenance) << '\n';
  }
}

ConceptGraph read_graph(std::istream& in, const std::string& source) {
  ConceptGraph graph;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line) || line.front() == '#') continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 4) throw ParseError(source, line_no, "expected 4 tab-separated columns");
    Provenance prov;
    if (fields[3] == "kg") {
      prov = Provenance::kg;
    } else if (fields[3] == "mlp") {
      prov = Provenance::mlp;
    } else {
      throw ParseError(source, line_no, "provenance must be kg or mlp");
    }
    std::optional<std::string> relation;
    if (fields[2] != "_") relation = std::string(fields[2]);
    if (prov == Provenance::kg && !relation) throw ParseError(source, line_no, "kg edge without relation label");
    try {
      graph.add_edge({Concept(fields[0]), Concept(fields[1]), relation, prov});
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return graph;
}

void save_graph(const ConceptGraph& graph, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_graph(graph, out);
  detail::finish_output(out, path);
}

ConceptGraph load_graph(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_graph(in, path.string());
}

LinkPrediction predict_missing_links(const Concept& word, std::span<const WordVectorTable* const> tables,
                                     const RelationStore& store, const InformativenessClassifier& clf,
                                     const LinkPredictionOptions& options) {
  if (std::none_of(tables.begin(), tables.end(), [&](const auto* t) { return t->contains(word); }))
    throw NotFoundError("no word vector for " + word.str());
  LinkPrediction out;
  for (const auto& y : merged_neighbors(word, options.k, tables)) {
    if (y == word) continue;
    const auto r = store.find(word, y);
    if (!r) {
      out.missing.push_back({word, y});
      continue;
    }
    if (clf.inf(*r) > options.threshold) out.edges.push_back({word, y, std::nullopt, Provenance::mlp});
  }
  return out;
}

AugmentReport augment_graph(ConceptGraph& graph, const std::set<Concept>& words,
                            std::span<const WordVectorTable* const> tables, const RelationStore& store,
                            const InformativenessClassifier& clf, const LinkPredictionOptions& options) {
  AugmentReport report;
  for (const auto& w : words) {
    ++report.words;
    const bool known = std::any_of(tables.begin(), tables.end(), [&](const auto* t) { return t->contains(w); });
    if (!known) {
      ++report.words_without_vectors;
      continue;
    }
    auto links = predict_missing_links(w, tables, store, clf, options);
    for (auto& e : links.edges) report.edges_added += graph.add_edge(std::move(e)) ? 1 : 0;
    report.missing.insert(report.missing.end(), links.missing.begin(), links.missing.end());
  }
  return report;
}

std::set<Concept> intermediate_candidates(const Concept& a, const Concept& b, const ConceptGraph& graph,
                                          const WordVectorTable* table, const IntermediateOptions& options) {
  std::set<Concept> smoothing_words;
  auto sources = [&](const Concept& w) {
    std::vector<Concept> out{w};
    if (options.smoothing && table && table->contains(w)) {
      for (auto& n : top_k_neighbors(w, options.smoothing_k, *table)) {
        smoothing_words.insert(n.token);
        out.push_back(std::move(n.token));
      }
    }
    return out;
  };
  auto reach = [&](const std::vector<Concept>& from) {
    std::set<Concept> out;
    for (const auto& s : from) {
      const auto& adj = graph.neighbors(s);
      out.insert(adj.begin(), adj.end());
    }
    return out;
  };

  const auto reach_a = reach(sources(a));
  const auto reach_b = reach(sources(b));
  std::set<Concept> out;
  std::set_intersection(reach_a.begin(), reach_a.end(), reach_b.begin(), reach_b.end(),
                        std::inserter(out, out.end()));
  out.erase(a);
  out.erase(b);
  std::erase_if(out, [&](const Concept& x) {
    return smoothing_words.contains(x) && !(graph.adjacent(a, x) && graph.adjacent(x, b));
  });
  return out;
}

IntermediateSet intermediates(const Concept& a, const Concept& b, const ConceptGraph& graph,
                              const WordVectorTable* table, const IntermediateOptions& options,
                              const RelationStore* store, const InformativenessClassifier* clf) {
  const auto candidates = intermediate_candidates(a, b, graph, table, options);
  std::vector<std::pair<double, Concept>> ranked;
  ranked.reserve(candidates.size());
  for (const auto& x : candidates) {
    double score = -1.0;  // below every probability
    if (store && clf) {
      const auto r_ax = store->find(a, x);
      const auto r_xb = store->find(x, b);
      if (r_ax && r_xb) score = std::min(clf->inf(*r_ax), clf->inf(*r_xb));
    }
    ranked.emplace_back(score, x);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  if (options.cap > 0 && ranked.size() > options.cap) ranked.resize(options.cap);

  IntermediateSet out{{a, b}, {}};
  out.intermediates.reserve(ranked.size());
  for (auto& [score, x] : ranked) out.intermediates.push_back(std::move(x));
  return out;
}

}  // namespace relchain
