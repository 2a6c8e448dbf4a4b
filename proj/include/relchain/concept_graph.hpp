#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "relchain/concept.hpp"
#include "relchain/embedding_store.hpp"
#include "relchain/informativeness.hpp"

namespace relchain {

enum class Provenance { kg, mlp };

std::string_view to_string(Provenance p);

/// A KG edge carries its relation label; predicted links have none.
struct GraphEdge {
  Concept head;
  Concept tail;
  std::optional<std::string> relation;
  Provenance provenance = Provenance::kg;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Concept graph used for 2-path search. Adjacency is undirected; relation
/// labels are kept per unordered concept pair.
class ConceptGraph {
 public:
  /// Adds `edge` and both adjacency directions. Returns false when an identical
  /// edge exists (same label and orientation for KG edges, same unordered pair
  /// for predicted links). Throws on self-loops.
  bool add_edge(GraphEdge edge);

  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::size_t concept_count() const noexcept { return adjacency_.size(); }

  bool contains(const Concept& c) const { return adjacency_.contains(c); }
  bool adjacent(const Concept& x, const Concept& y) const;

  /// Sorted neighbor set; empty for unknown concepts.
  const std::set<Concept>& neighbors(const Concept& c) const;

  /// KG relation labels on the undirected edge {x, y}, empty if none.
  const std::set<std::string>& relation_types(const Concept& x, const Concept& y) const;

  /// Copy restricted to edges of the selected provenances.
  ConceptGraph filtered(bool keep_kg, bool keep_mlp) const;

 private:
  std::vector<GraphEdge> edges_;
  std::unordered_set<std::string> edge_keys_;
  std::unordered_map<Concept, std::set<Concept>> adjacency_;
  std::unordered_map<ConceptPair, std::set<std::string>> types_;
};

struct KgIngestOptions {
  std::string language = "en";
  std::set<std::string> exclusions = {"/r/NotCapableOf", "/r/NotDesires", "/r/NotHasProperty"};
};

struct KgIngestStats {
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t excluded = 0;
  std::size_t self_loops = 0;
  std::size_t other_language = 0;
  std::size_t duplicates = 0;
};

/// Reads `relation<TAB>head<TAB>tail[<TAB>weight]`. ConceptNet URIs
/// (/c/<lang>/<term>[/...]) are filtered by language and reduced to the term.
ConceptGraph read_kg(std::istream& in, const KgIngestOptions& options, KgIngestStats* stats = nullptr,
                     const std::string& source = "<kg>");
ConceptGraph ingest_kg(const std::filesystem::path& path, const KgIngestOptions& options = {},
                       KgIngestStats* stats = nullptr);

/// TSV `head<TAB>tail<TAB>relation-or-_<TAB>kg|mlp`.
void write_graph(const ConceptGraph& graph, std::ostream& out);
ConceptGraph read_graph(std::istream& in, const std::string& source = "<graph>");
void save_graph(const ConceptGraph& graph, const std::filesystem::path& path);
ConceptGraph load_graph(const std::filesystem::path& path);

struct LinkPredictionOptions {
  std::size_t k = 250;
  double threshold = 0.75;
};

struct LinkPrediction {
  std::vector<GraphEdge> edges;
  /// Neighbor pairs (word, y) skipped because r_wy is not in the store.
  std::vector<ConceptPair> missing;
};

/// Untyped edge (word, y) for every merged neighbor y with inf(r_word,y) > threshold.
/// Throws NotFoundError when no table has `word`.
LinkPrediction predict_missing_links(const Concept& word, std::span<const WordVectorTable* const> tables,
                                     const RelationStore& store, const InformativenessClassifier& clf,
                                     const LinkPredictionOptions& options = {});

struct AugmentReport {
  std::size_t words = 0;
  std::size_t words_without_vectors = 0;
  std::size_t edges_added = 0;
  std::vector<ConceptPair> missing;
};

/// Runs link prediction from every word in `words` and adds the links to `graph`.
AugmentReport augment_graph(ConceptGraph& graph, const std::set<Concept>& words,
                            std::span<const WordVectorTable* const> tables, const RelationStore& store,
                            const InformativenessClassifier& clf, const LinkPredictionOptions& options = {});

struct IntermediateOptions {
  bool smoothing = true;
  std::size_t smoothing_k = 5;
  std::size_t cap = 50;  // 0 = unlimited
};

struct IntermediateSet {
  ConceptPair pair;
  std::vector<Concept> intermediates;
};

/// Every admissible intermediate for (a, b), before ranking and capping.
/// Without smoothing: common neighbors of a and b. With smoothing: concepts
/// adjacent to some member of {a} + N(a) and some member of {b} + N(b), where
/// N is the smoothing_k-NN set from `table`; a smoothing neighbor itself only
/// qualifies when it is adjacent to both a and b.
std::set<Concept> intermediate_candidates(const Concept& a, const Concept& b, const ConceptGraph& graph,
                                          const WordVectorTable* table, const IntermediateOptions& options);

/// Candidates ranked by min(inf(r_ax), inf(r_xb)) (missing embeddings last,
/// ties by concept) and truncated to `options.cap`. Without a store and
/// classifier the ranking is purely lexicographic.
IntermediateSet intermediates(const Concept& a, const Concept& b, const ConceptGraph& graph,
                              const WordVectorTable* table, const IntermediateOptions& options,
                              const RelationStore* store = nullptr, const InformativenessClassifier* clf = nullptr);

}  // namespace relchain
