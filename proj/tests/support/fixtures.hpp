#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "relchain/concept_graph.hpp"
#include "relchain/condenser.hpp"
#include "relchain/embedding_store.hpp"
#include "relchain/solver.hpp"

namespace fixtures {

using relchain::Concept;
using relchain::ConceptPair;

inline Concept C(const std::string& s) { return Concept(s); }
inline ConceptPair P(const std::string& a, const std::string& b) { return {Concept(a), Concept(b)}; }

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim, double scale = 1.0);
oracle::Vec widen(const std::vector<float>& v);

/// Keeps a library store/graph and the oracle's plain copy in lockstep.
class WorldBuilder {
 public:
  explicit WorldBuilder(std::size_t dim) : store_(dim), dim_(dim) {}

  void relation(const std::string& a, const std::string& b, const std::vector<float>& v);
  void kg_edge(const std::string& head, const std::string& tail, const std::string& label);
  void mlp_edge(const std::string& x, const std::string& y);

  std::size_t dim() const { return dim_; }
  relchain::RelationStore& store() { return store_; }
  relchain::ConceptGraph& graph() { return graph_; }
  oracle::World& world() { return world_; }

 private:
  relchain::RelationStore store_;
  relchain::ConceptGraph graph_;
  oracle::World world_;
  std::size_t dim_;
};

struct QuestionSet {
  std::vector<relchain::AnalogyQuestion> questions;
  std::vector<oracle::Question> plain;
};

struct RandomQuestionOptions {
  std::size_t count = 200;
  std::size_t max_candidates = 6;
  std::size_t max_chains = 8;
  double leg_present = 0.9;
  double pair_present = 0.85;
  double typed_edge = 0.8;
  std::size_t label_count = 3;
};

/// Questions whose pairs use fresh words, each pair with 0..max_chains
/// intermediates. Query embeddings are always stored.
QuestionSet random_questions(WorldBuilder& w, std::mt19937_64& rng, const RandomQuestionOptions& opts);

oracle::Model to_oracle(const relchain::CondenserModeld& m);
oracle::ChainRef to_oracle(const relchain::Chain& c);
std::vector<oracle::ChainRef> to_oracle(const std::vector<relchain::Chain>& cs);

/// Owns a list of standalone chains whose views point into its own storage.
class ChainPool {
 public:
  ChainPool(std::size_t dim, std::size_t capacity);
  relchain::Chain make(const std::string& a, const std::string& x, const std::string& b, std::mt19937_64& rng);
  relchain::Chain make(const std::string& a, const std::string& x, const std::string& b, const std::vector<float>& r1,
                       const std::vector<float>& r2);
  /// Copies `v` into the pool and returns a view of the copy.
  relchain::VectorView push(const std::vector<float>& v);

 private:
  std::size_t dim_;
  std::vector<float> storage_;
};

struct PlantedOptions {
  std::size_t dim = 16;
  std::size_t types = 8;
  std::size_t training_pairs = 500;
  std::size_t questions = 200;
  std::size_t candidates = 5;
  std::size_t max_chains = 3;
  double indirect_fraction = 0.5;
  std::uint64_t seed = 7;
};

/// Each pair has a planted type t and r_ab = tau_t. Its chains run through
/// fresh intermediates whose legs carry types (t1, t2) with t1 + t2 = t mod T.
/// Indirect pairs keep their chains but have no stored r_ab.
struct PlantedWorld {
  std::unique_ptr<WorldBuilder> builder;
  std::vector<ConceptPair> training_pairs;
  std::vector<relchain::AnalogyQuestion> questions;
  std::set<ConceptPair> indirect;
};

PlantedWorld planted_world(const PlantedOptions& opts);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

}  // namespace fixtures
