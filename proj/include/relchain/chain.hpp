#pragma once

#include <span>
#include <vector>

#include "relchain/concept.hpp"
#include "relchain/concept_graph.hpp"
#include "relchain/embedding_store.hpp"
#include "relchain/informativeness.hpp"

namespace relchain {

/// A 2-hop path a -> x -> b labelled with r_ax and r_xb. The views point into
/// a RelationStore (or other caller-owned storage) that must outlive the chain.
struct Chain {
  ConceptPair pair;
  Concept intermediate;
  VectorView first;
  VectorView second;

  Chain(ConceptPair p, Concept x, VectorView r_ax, VectorView r_xb)
      : pair(std::move(p)), intermediate(std::move(x)), first(r_ax), second(r_xb) {}
  Chain(const Chain&) = default;

  Chain& operator=(const Chain& other) {
    pair = other.pair;
    intermediate = other.intermediate;
    rebind(first, other.first);
    rebind(second, other.second);
    return *this;
  }
};

/// Everything needed to turn a word pair into relation embedding chains.
struct ChainSource {
  const ConceptGraph* graph = nullptr;
  const RelationStore* store = nullptr;
  const WordVectorTable* smoothing_table = nullptr;
  const InformativenessClassifier* ranker = nullptr;
  IntermediateOptions options{};
};

/// Chains through the ranked, capped intermediates of (a, b); intermediates
/// whose r_ax or r_xb is missing are dropped.
std::vector<Chain> build_chains(const Concept& a, const Concept& b, const ChainSource& source);

/// Indices of `chains` ordered by intermediate, then by the embedding values.
std::vector<std::size_t> canonical_chain_order(std::span<const Chain> chains);

}  // namespace relchain
