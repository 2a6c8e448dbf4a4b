#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <new>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "relchain/concept.hpp"
#include "relchain/errors.hpp"

namespace relchain {

/// Read-only view of one stored f32 vector.
using VectorView = Eigen::Map<const Eigen::VectorXf>;

/// Points `view` at the storage `other` refers to (Map itself is not assignable).
inline void rebind(VectorView& view, const VectorView& other) { new (&view) VectorView(other.data(), other.size()); }

/// Cosine similarity evaluated in double precision on the raw vectors.
/// A zero-norm argument yields 0.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  if (u.size() != v.size()) throw DimensionError(static_cast<std::size_t>(u.size()), static_cast<std::size_t>(v.size()));
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u.derived().coeff(i));
    const double b = static_cast<double>(v.derived().coeff(i));
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  return dot / (std::sqrt(uu) * std::sqrt(vv));
}

/// Token -> static word vector. Immutable once loaded.
class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dim);

  /// Adds a vector for `token`. Returns false (and counts a duplicate) when the
  /// token is already present. Throws on wrong length, non-finite or all-zero input.
  bool insert(const Concept& token, std::span<const float> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t duplicates() const noexcept { return duplicates_; }

  bool contains(const Concept& token) const { return index_.contains(token); }
  std::optional<std::size_t> index_of(const Concept& token) const;

  /// Throws NotFoundError if absent.
  VectorView vector(const Concept& token) const;
  VectorView vector_at(std::size_t i) const { return VectorView(data_.data() + i * dim_, static_cast<Eigen::Index>(dim_)); }
  double norm_at(std::size_t i) const { return norms_[i]; }

  const Concept& token_at(std::size_t i) const { return tokens_[i]; }
  const std::vector<Concept>& tokens() const noexcept { return tokens_; }

 private:
  std::size_t dim_;
  std::size_t duplicates_ = 0;
  std::vector<Concept> tokens_;
  std::unordered_map<Concept, std::size_t> index_;
  std::vector<float> data_;
  std::vector<double> norms_;
};

/// Ordered word pair -> relation embedding. Immutable once loaded.
class RelationStore {
 public:
  explicit RelationStore(std::size_t dim);

  /// Same contract as WordVectorTable::insert, keyed by the ordered pair (a, b).
  bool insert(const Concept& a, const Concept& b, std::span<const float> values);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return keys_.size(); }
  std::size_t duplicates() const noexcept { return duplicates_; }

  bool contains(const Concept& a, const Concept& b) const { return index_.contains(ConceptPair{a, b}); }
  std::optional<VectorView> find(const Concept& a, const Concept& b) const;

  /// Throws MissingPairError if the ordered pair is absent.
  VectorView get(const Concept& a, const Concept& b) const;

  const ConceptPair& key_at(std::size_t i) const { return keys_[i]; }
  VectorView vector_at(std::size_t i) const { return VectorView(data_.data() + i * dim_, static_cast<Eigen::Index>(dim_)); }

 private:
  std::size_t dim_;
  std::size_t duplicates_ = 0;
  std::vector<ConceptPair> keys_;
  std::unordered_map<ConceptPair, std::size_t> index_;
  std::vector<float> data_;
};

enum class VectorFormat { text, binary };

WordVectorTable read_word_vectors_text(std::istream& in, const std::string& source = "<text>");
WordVectorTable read_word_vectors_binary(std::istream& in, const std::string& source = "<wvec>");
void write_word_vectors_binary(const WordVectorTable& table, std::ostream& out);

WordVectorTable load_word_vectors(const std::filesystem::path& path, VectorFormat format);
/// Picks the binary reader when the file starts with the WVEC magic, text otherwise.
WordVectorTable load_word_vectors(const std::filesystem::path& path);
void save_word_vectors(const WordVectorTable& table, const std::filesystem::path& path);

RelationStore read_relations_binary(std::istream& in, const std::string& source = "<relc>");
void write_relations_binary(const RelationStore& store, std::ostream& out);
RelationStore load_relations(const std::filesystem::path& path);
void save_relations(const RelationStore& store, const std::filesystem::path& path);

struct Neighbor {
  Concept token;
  double score;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact cosine k-NN. Excludes `word` itself; sorted by descending score,
/// ties by ascending concept. Returns min(k, |vocab| - 1) entries.
std::vector<Neighbor> top_k_neighbors(const Concept& word, std::size_t k, const WordVectorTable& table);

/// Union of top_k_neighbors over every table that contains `word`.
std::set<Concept> merged_neighbors(const Concept& word, std::size_t k,
                                   std::span<const WordVectorTable* const> tables);

}  // namespace relchain
