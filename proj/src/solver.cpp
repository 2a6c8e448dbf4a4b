#include "relchain/solver.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace relchain {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

bool all_equal(std::span<const double> scores) {
  return std::adjacent_find(scores.begin(), scores.end(), std::not_equal_to<>()) == scores.end();
}

void finish(SolverVerdict& v) {
  v.chosen = argmax_lowest_index(v.scores);
  v.degenerate = all_equal(v.scores);
  if (v.candidate_fallback.empty()) v.candidate_fallback.assign(v.scores.size(), false);
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

struct TypedPath {
  const std::set<std::string>* first;
  const std::set<std::string>* second;
};

std::vector<TypedPath> typed_paths(const ConceptPair& pair, const ConceptGraph& graph) {
  std::vector<TypedPath> out;
  const auto& na = graph.neighbors(pair.first);
  const auto& nb = graph.neighbors(pair.second);
  for (const auto& x : na) {
    if (x == pair.second || !nb.contains(x)) continue;
    const auto& t1 = graph.relation_types(pair.first, x);
    const auto& t2 = graph.relation_types(x, pair.second);
    if (!t1.empty() && !t2.empty()) out.push_back({&t1, &t2});
  }
  return out;
}

std::string direct_label(ChainSimilarity kind) { return "direct-" + std::string(to_string(kind)); }

}  // namespace

void validate(const AnalogyQuestion& q) {
  if (q.candidates.size() < 2) throw Error("question " + q.id + " needs at least two candidates");
  if (q.gold >= q.candidates.size()) throw Error("question " + q.id + " has an out-of-range answer index");
  std::set<ConceptPair> seen(q.candidates.begin(), q.candidates.end());
  if (seen.size() != q.candidates.size()) throw Error("question " + q.id + " has duplicate candidates");
}

std::string_view to_string(ChainSimilarity s) {
  switch (s) {
    case ChainSimilarity::sim1: return "sim1";
    case ChainSimilarity::sim2: return "sim2";
    case ChainSimilarity::sim3: return "sim3";
  }
  return "sim1";
}

ChainSimilarity parse_chain_similarity(std::string_view s) {
  if (s == "sim1") return ChainSimilarity::sim1;
  if (s == "sim2") return ChainSimilarity::sim2;
  if (s == "sim3") return ChainSimilarity::sim3;
  throw Error("unknown chain similarity: " + std::string(s));
}

std::size_t argmax_lowest_index(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

SolverVerdict solve_relbert(const AnalogyQuestion& q, const RelationStore& store) {
  const auto query = store.get(q.query.first, q.query.second);
  SolverVerdict v;
  v.method = "relbert";
  v.scores.reserve(q.candidates.size());
  for (const auto& c : q.candidates) {
    const auto r = store.find(c.first, c.second);
    v.scores.push_back(r ? cosine(query, *r) : kMinusInf);
    v.candidate_fallback.push_back(!r);
  }
  finish(v);
  return v;
}

double confidence(const AnalogyQuestion& q, const SolverVerdict& relbert, const RelationStore& store,
                  const InformativenessClassifier& clf) {
  const double query_inf = clf.inf(store.get(q.query.first, q.query.second));
  const auto& chosen = q.candidates.at(relbert.chosen);
  const auto r = store.find(chosen.first, chosen.second);
  return std::min(query_inf, r ? clf.inf(*r) : 0.0);
}

double confidence(const AnalogyQuestion& q, const RelationStore& store, const InformativenessClassifier& clf) {
  return confidence(q, solve_relbert(q, store), store, clf);
}

double sim1(const Chain& c1, const Chain& c2) {
  return std::min(cosine(c1.first, c2.first), cosine(c1.second, c2.second));
}

double sim3(const Chain& c1, const Chain& c2) {
  const Eigen::VectorXd u = c1.first.cast<double>() + c1.second.cast<double>();
  const Eigen::VectorXd v = c2.first.cast<double>() + c2.second.cast<double>();
  return cosine(u, v);
}

template <typename Scalar>
Eigen::VectorXd encode_chain(const Chain& chain, const CondenserModel<Scalar>& model) {
  return decode(compose(chain.first, chain.second, model), model).template cast<double>();
}

template <typename Scalar>
double sim2(const Chain& c1, const Chain& c2, const CondenserModel<Scalar>& model) {
  return cosine(encode_chain(c1, model), encode_chain(c2, model));
}

template <typename Scalar>
Eigen::MatrixXd chain_similarity(std::span<const Chain> query, std::span<const Chain> candidate,
                                 ChainSimilarity kind, const CondenserModel<Scalar>* model) {
  const auto u = static_cast<Eigen::Index>(query.size());
  const auto v = static_cast<Eigen::Index>(candidate.size());
  Eigen::MatrixXd out(u, v);
  if (kind == ChainSimilarity::sim2) {
    if (!model) throw Error("sim2 needs a condenser model");
    std::vector<Eigen::VectorXd> enc_q, enc_c;
    for (const auto& c : query) enc_q.push_back(encode_chain(c, *model));
    for (const auto& c : candidate) enc_c.push_back(encode_chain(c, *model));
    for (Eigen::Index i = 0; i < u; ++i)
      for (Eigen::Index j = 0; j < v; ++j)
        out(i, j) = cosine(enc_q[static_cast<std::size_t>(i)], enc_c[static_cast<std::size_t>(j)]);
    return out;
  }
  for (Eigen::Index i = 0; i < u; ++i) {
    for (Eigen::Index j = 0; j < v; ++j) {
      const auto& a = query[static_cast<std::size_t>(i)];
      const auto& b = candidate[static_cast<std::size_t>(j)];
      out(i, j) = kind == ChainSimilarity::sim1 ? sim1(a, b) : sim3(a, b);
    }
  }
  return out;
}

Eigen::MatrixXd chain_similarity(std::span<const Chain> query, std::span<const Chain> candidate,
                                 ChainSimilarity kind) {
  return chain_similarity<double>(query, candidate, kind, nullptr);
}

double comp(const Eigen::MatrixXd& similarity) {
  if (similarity.cols() == 0 || similarity.rows() == 0) return 0.0;
  return similarity.rowwise().maxCoeff().sum();
}

template <typename Scalar>
SolverVerdict solve_direct(const AnalogyQuestion& q, const ChainSource& source, ChainSimilarity kind,
                           const CondenserModel<Scalar>* model) {
  const auto query_chains = build_chains(q.query.first, q.query.second, source);
  if (query_chains.empty()) {
    auto v = solve_relbert(q, *source.store);
    v.method = direct_label(kind);
    v.fallback_used = true;
    return v;
  }
  SolverVerdict v;
  v.method = direct_label(kind);
  for (const auto& c : q.candidates) {
    const auto chains = build_chains(c.first, c.second, source);
    v.scores.push_back(comp(chain_similarity(query_chains, chains, kind, model)));
    v.candidate_fallback.push_back(chains.empty());
  }
  finish(v);
  return v;
}

SolverVerdict solve_direct(const AnalogyQuestion& q, const ChainSource& source, ChainSimilarity kind) {
  return solve_direct<double>(q, source, kind, nullptr);
}

template <typename Scalar>
SolverVerdict solve_condensed(const AnalogyQuestion& q, const ChainSource& source, const CondenserModel<Scalar>& model) {
  auto condensed = [&](const ConceptPair& p, bool& fallback) -> std::optional<Eigen::VectorXd> {
    const auto chains = build_chains(p.first, p.second, source);
    fallback = chains.empty();
    if (!chains.empty()) return condense(std::span<const Chain>(chains), model).template cast<double>();
    if (auto r = source.store->find(p.first, p.second)) return r->cast<double>();
    return std::nullopt;
  };

  SolverVerdict v;
  v.method = "condensed";
  bool query_fallback = false;
  const auto s_query = condensed(q.query, query_fallback);
  if (!s_query) throw MissingPairError(q.query.first.str(), q.query.second.str());
  v.fallback_used = query_fallback;
  for (const auto& c : q.candidates) {
    bool fallback = false;
    const auto s = condensed(c, fallback);
    v.scores.push_back(s ? cosine(*s_query, *s) : kMinusInf);
    v.candidate_fallback.push_back(fallback);
  }
  finish(v);
  return v;
}

template <typename Scalar>
SolverVerdict solve_hybrid(const AnalogyQuestion& q, const HybridOptions& options, const ChainSource& source,
                           const InformativenessClassifier& clf, const CondenserModel<Scalar>* model) {
  auto relbert = solve_relbert(q, *source.store);
  const double conf = confidence(q, relbert, *source.store, clf);
  SolverVerdict v;
  if (conf < options.threshold) {
    if (options.chain_method == ChainMethod::condensed) {
      if (!model) throw Error("condensed routing needs a condenser model");
      v = solve_condensed(q, source, *model);
    } else {
      v = solve_direct(q, source, options.similarity, model);
    }
    v.branch = v.method;
  } else {
    v = std::move(relbert);
    v.branch = "relbert";
  }
  v.method = "hybrid-" +
             (options.chain_method == ChainMethod::condensed ? std::string("condensed") : direct_label(options.similarity));
  v.confidence = conf;
  return v;
}

SolverVerdict solve_cn_types(const AnalogyQuestion& q, const ConceptGraph& graph) {
  SolverVerdict v;
  v.method = "cn-types";
  const auto query_paths = typed_paths(q.query, graph);
  v.fallback_used = query_paths.empty();
  for (const auto& c : q.candidates) {
    const auto paths = typed_paths(c, graph);
    double score = 0.0;
    for (const auto& qp : query_paths) {
      const bool hit = std::any_of(paths.begin(), paths.end(), [&](const TypedPath& cp) {
        return intersects(*qp.first, *cp.first) && intersects(*qp.second, *cp.second);
      });
      score += hit ? 1.0 : 0.0;
    }
    v.scores.push_back(score);
    v.candidate_fallback.push_back(paths.empty());
  }
  finish(v);
  return v;
}

Explanation explain(const AnalogyQuestion& q, const SolverVerdict& verdict, const ChainSource& source) {
  const auto& chosen = q.candidates.at(verdict.chosen);
  const auto query_chains = build_chains(q.query.first, q.query.second, source);
  const auto cand_chains = build_chains(chosen.first, chosen.second, source);
  if (query_chains.empty() || cand_chains.empty()) throw Error("no chains to explain question " + q.id);
  std::optional<Explanation> best;
  for (const auto& qc : query_chains) {
    for (const auto& cc : cand_chains) {
      const double s = sim1(qc, cc);
      const bool better =
          !best || s > best->score ||
          (s == best->score && std::tie(qc.intermediate, cc.intermediate) <
                                   std::tie(best->query_intermediate, best->candidate_intermediate));
      if (better) best = Explanation{qc.intermediate, cc.intermediate, s};
    }
  }
  return *best;
}

#define RELCHAIN_INSTANTIATE_SOLVER(Scalar)                                                                       \
  template Eigen::VectorXd encode_chain<Scalar>(const Chain&, const CondenserModel<Scalar>&);                     \
  template double sim2<Scalar>(const Chain&, const Chain&, const CondenserModel<Scalar>&);                         \
  template Eigen::MatrixXd chain_similarity<Scalar>(std::span<const Chain>, std::span<const Chain>,               \
                                                    ChainSimilarity, const CondenserModel<Scalar>*);              \
  template SolverVerdict solve_direct<Scalar>(const AnalogyQuestion&, const ChainSource&, ChainSimilarity,       \
                                              const CondenserModel<Scalar>*);                                     \
  template SolverVerdict solve_condensed<Scalar>(const AnalogyQuestion&, const ChainSource&,                     \
                                                 const CondenserModel<Scalar>&);                                  \
  template SolverVerdict solve_hybrid<Scalar>(const AnalogyQuestion&, const HybridOptions&, const ChainSource&,  \
                                              const InformativenessClassifier&, const CondenserModel<Scalar>*);

RELCHAIN_INSTANTIATE_SOLVER(float)
RELCHAIN_INSTANTIATE_SOLVER(double)

}  // namespace relchain
