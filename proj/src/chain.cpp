#include "relchain/chain.hpp"

#include <algorithm>
#include <numeric>

namespace relchain {

std::vector<Chain> build_chains(const Concept& a, const Concept& b, const ChainSource& source) {
  if (!source.graph || !source.store) throw Error("chain source needs a graph and a relation store");
  const auto set = intermediates(a, b, *source.graph, source.smoothing_table, source.options, source.store,
                                 source.ranker);
  std::vector<Chain> chains;
  chains.reserve(set.intermediates.size());
  for (const auto& x : set.intermediates) {
    auto r_ax = source.store->find(a, x);
    auto r_xb = source.store->find(x, b);
    if (r_ax && r_xb) chains.emplace_back(ConceptPair{a, b}, x, *r_ax, *r_xb);
  }
  return chains;
}

std::vector<std::size_t> canonical_chain_order(std::span<const Chain> chains) {
  std::vector<std::size_t> order(chains.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto values_less = [](const VectorView& l, const VectorView& r) {
    return std::lexicographical_compare(l.begin(), l.end(), r.begin(), r.end());
  };
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& ci = chains[i];
    const auto& cj = chains[j];
    if (ci.intermediate != cj.intermediate) return ci.intermediate < cj.intermediate;
    if (values_less(ci.first, cj.first)) return true;
    if (values_less(cj.first, ci.first)) return false;
    return values_less(ci.second, cj.second);
  });
  return order;
}

}  // namespace relchain
