#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relchain/chain.hpp"
#include "relchain/concept_graph.hpp"
#include "relchain/condenser.hpp"
#include "relchain/embedding_store.hpp"
#include "relchain/informativeness.hpp"

namespace relchain {

/// Multiple-choice analogy: which candidate relates like `query`?
struct AnalogyQuestion {
  std::string id;
  ConceptPair query;
  std::vector<ConceptPair> candidates;
  std::size_t gold = 0;
};

/// Throws Error unless there are >= 2 distinct candidates and `gold` is in range.
void validate(const AnalogyQuestion& q);

struct Explanation {
  Concept query_intermediate;
  Concept candidate_intermediate;
  double score = 0.0;
};

struct SolverVerdict {
  std::size_t chosen = 0;
  std::string method;
  /// min(inf(r_query), inf(r_chosen-by-relbert)); unset when not computed.
  std::optional<double> confidence;
  std::vector<double> scores;
  /// The method could not use its primary route for the query.
  bool fallback_used = false;
  /// Per candidate: scored through a fallback (no chains / raw embedding).
  std::vector<bool> candidate_fallback;
  /// Every score equal (nothing discriminates the candidates).
  bool degenerate = false;
  /// Hybrid routing: which method produced the answer.
  std::string branch;
  std::optional<Explanation> explanation;
};

enum class ChainSimilarity { sim1, sim2, sim3 };
enum class ChainMethod { condensed, direct };

std::string_view to_string(ChainSimilarity s);
ChainSimilarity parse_chain_similarity(std::string_view s);

/// First index of the maximum; 0 when every score is -inf.
std::size_t argmax_lowest_index(std::span<const double> scores);

/// cos(r_query, r_candidate); candidates without an embedding score -inf.
/// Throws MissingPairError if the query embedding is missing.
SolverVerdict solve_relbert(const AnalogyQuestion& q, const RelationStore& store);

/// min(inf(r_query), inf(r_chosen)) for the candidate `relbert` selected. A
/// chosen candidate without an embedding contributes 0.
double confidence(const AnalogyQuestion& q, const SolverVerdict& relbert, const RelationStore& store,
                  const InformativenessClassifier& clf);
double confidence(const AnalogyQuestion& q, const RelationStore& store, const InformativenessClassifier& clf);

/// min(cos(r_ac, r_xz), cos(r_cb, r_zy)).
double sim1(const Chain& c1, const Chain& c2);
/// cos(r_ac + r_cb, r_xz + r_zy).
double sim3(const Chain& c1, const Chain& c2);
/// cos(psi(phi(c1)), psi(phi(c2))).
template <typename Scalar>
double sim2(const Chain& c1, const Chain& c2, const CondenserModel<Scalar>& model);

/// psi(phi(r_ax, r_xb)) in double precision.
template <typename Scalar>
Eigen::VectorXd encode_chain(const Chain& chain, const CondenserModel<Scalar>& model);

/// u x v matrix of chain similarities; `model` is required for sim2.
template <typename Scalar>
Eigen::MatrixXd chain_similarity(std::span<const Chain> query, std::span<const Chain> candidate,
                                 ChainSimilarity kind, const CondenserModel<Scalar>* model);
Eigen::MatrixXd chain_similarity(std::span<const Chain> query, std::span<const Chain> candidate,
                                 ChainSimilarity kind);

/// sum_i max_j S(i, j); 0 when there are no candidate chains.
double comp(const Eigen::MatrixXd& similarity);

template <typename Scalar>
double comp(std::span<const Chain> query, std::span<const Chain> candidate, ChainSimilarity kind,
            const CondenserModel<Scalar>* model) {
  return comp(chain_similarity(query, candidate, kind, model));
}

/// Scores candidates by comp(query chains, candidate chains). Falls back to
/// solve_relbert (fallback_used) when the query has no usable chain.
template <typename Scalar>
SolverVerdict solve_direct(const AnalogyQuestion& q, const ChainSource& source, ChainSimilarity kind,
                           const CondenserModel<Scalar>* model);
SolverVerdict solve_direct(const AnalogyQuestion& q, const ChainSource& source, ChainSimilarity kind);

/// cos(s_query, s_candidate) with s = condense(chains); a chainless pair uses
/// its stored embedding. Throws if the query has neither.
template <typename Scalar>
SolverVerdict solve_condensed(const AnalogyQuestion& q, const ChainSource& source, const CondenserModel<Scalar>& model);

struct HybridOptions {
  double threshold = 0.25;
  ChainMethod chain_method = ChainMethod::condensed;
  ChainSimilarity similarity = ChainSimilarity::sim1;
};

/// RelBERT verdict when confidence >= threshold, chain-method verdict otherwise.
template <typename Scalar>
SolverVerdict solve_hybrid(const AnalogyQuestion& q, const HybridOptions& options, const ChainSource& source,
                           const InformativenessClassifier& clf, const CondenserModel<Scalar>* model);

/// Chain matching on KG relation labels only: sum_i max_j [labels of both legs match].
SolverVerdict solve_cn_types(const AnalogyQuestion& q, const ConceptGraph& graph);

/// The (query intermediate, chosen-candidate intermediate) pair maximizing sim1;
/// ties go to the lexicographically smallest pair. Throws if either side has no chain.
Explanation explain(const AnalogyQuestion& q, const SolverVerdict& verdict, const ChainSource& source);

}  // namespace relchain
