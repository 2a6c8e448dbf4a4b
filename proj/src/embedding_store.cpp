#include "relchain/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <system_error>

#include "io_util.hpp"
#include "relchain/detail/binary_io.hpp"

namespace relchain {

namespace {

constexpr std::string_view kWordMagic = "WVEC";
constexpr std::string_view kRelationMagic = "RELC";
constexpr std::uint32_t kFormatVersion = 1;

// Throws relchain::Error describing the first violated vector invariant.
void check_vector(std::span<const float> values, std::size_t dim) {
  if (values.size() != dim) throw DimensionError(dim, values.size());
  bool nonzero = false;
  for (float v : values) {
    if (!std::isfinite(v)) throw Error("non-finite component");
    nonzero = nonzero || v != 0.0f;
  }
  if (!nonzero) throw Error("all-zero vector");
}

bool parse_float(std::string_view field, float& out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

bool is_unsigned_integer(std::string_view field) {
  return !field.empty() && std::all_of(field.begin(), field.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::uint32_t read_header(detail::BinaryReader& reader, std::string_view magic, std::uint64_t& count) {
  reader.expect_magic(magic);
  auto version = reader.uint<std::uint32_t>("version");
  if (version != kFormatVersion) reader.fail("unsupported version " + std::to_string(version));
  auto dim = reader.uint<std::uint32_t>("dim");
  if (dim == 0) reader.fail("dim must be positive");
  count = reader.uint<std::uint64_t>("count");
  return dim;
}

}  // namespace

WordVectorTable::WordVectorTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error("word vector dimension must be positive");
}

bool WordVectorTable::insert(const Concept& token, std::span<const float> values) {
  check_vector(values, dim_);
  if (index_.contains(token)) {
    ++duplicates_;
    return false;
  }
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  data_.insert(data_.end(), values.begin(), values.end());
  double sq = 0.0;
  for (float v : values) sq += static_cast<double>(v) * static_cast<double>(v);
  norms_.push_back(std::sqrt(sq));
  return true;
}

std::optional<std::size_t> WordVectorTable::index_of(const Concept& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VectorView WordVectorTable::vector(const Concept& token) const {
  auto idx = index_of(token);
  if (!idx) throw NotFoundError("word not in vocabulary: " + token.str());
  return vector_at(*idx);
}

RelationStore::RelationStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error("relation embedding dimension must be positive");
}

bool RelationStore::insert(const Concept& a, const Concept& b, std::span<const float> values) {
  check_vector(values, dim_);
  ConceptPair key{a, b};
  if (index_.contains(key)) {
    ++duplicates_;
    return false;
  }
  index_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

std::optional<VectorView> RelationStore::find(const Concept& a, const Concept& b) const {
  auto it = index_.find(ConceptPair{a, b});
  if (it == index_.end()) return std::nullopt;
  return vector_at(it->second);
}

VectorView RelationStore::get(const Concept& a, const Concept& b) const {
  auto v = find(a, b);
  if (!v) throw MissingPairError(a.str(), b.str());
  return *v;
}

WordVectorTable read_word_vectors_text(std::istream& in, const std::string& source) {
  std::optional<WordVectorTable> table;
  std::vector<float> values;
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    auto fields = detail::split_whitespace(line);
    // word2vec/Numberbatch dumps open with "<count> <dim>".
    if (first_row && fields.size() == 2 && is_unsigned_integer(fields[0]) && is_unsigned_integer(fields[1])) {
      first_row = false;
      continue;
    }
    first_row = false;
    if (fields.size() < 2) throw ParseError(source, line_no, "row has no vector components");
    values.clear();
    for (std::size_t i = 1; i < fields.size(); ++i) {
      float v;
      if (!parse_float(fields[i], v)) throw ParseError(source, line_no, "malformed component '" + std::string(fields[i]) + "'");
      values.push_back(v);
    }
    if (!table) table.emplace(values.size());
    try {
      table->insert(Concept(fields[0]), values);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (!table) throw ParseError(source, line_no, "no vectors found");
  return std::move(*table);
}

WordVectorTable read_word_vectors_binary(std::istream& in, const std::string& source) {
  detail::BinaryReader reader(in, source);
  std::uint64_t count = 0;
  const std::uint32_t dim = read_header(reader, kWordMagic, count);
  WordVectorTable table(dim);
  std::vector<float> values(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::string token = reader.short_string("token");
    for (auto& v : values) v = reader.f32("component");
    try {
      table.insert(Concept(token), values);
    } catch (const Error& e) {
      reader.fail("record " + std::to_string(r) + ": " + e.what());
    }
  }
  reader.expect_end();
  return table;
}

void write_word_vectors_binary(const WordVectorTable& table, std::ostream& out) {
  detail::BinaryWriter w(out);
  w.magic(kWordMagic);
  w.uint(kFormatVersion);
  w.uint(static_cast<std::uint32_t>(table.dim()));
  w.uint(static_cast<std::uint64_t>(table.size()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    w.short_string(table.token_at(i).str());
    for (float v : table.vector_at(i)) w.f32(v);
  }
}

WordVectorTable load_word_vectors(const std::filesystem::path& path, VectorFormat format) {
  auto in = detail::open_input(path, format == VectorFormat::binary);
  return format == VectorFormat::binary ? read_word_vectors_binary(in, path.string())
                                        : read_word_vectors_text(in, path.string());
}

WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  char magic[4] = {};
  {
    auto in = detail::open_input(path, true);
    in.read(magic, 4);
  }
  const bool binary = std::string_view(magic, 4) == kWordMagic;
  return load_word_vectors(path, binary ? VectorFormat::binary : VectorFormat::text);
}

void save_word_vectors(const WordVectorTable& table, const std::filesystem::path& path) {
  auto out = detail::open_output(path, true);
  write_word_vectors_binary(table, out);
  detail::finish_output(out, path);
}

RelationStore read_relations_binary(std::istream& in, const std::string& source) {
  detail::BinaryReader reader(in, source);
  std::uint64_t count = 0;
  const std::uint32_t dim = read_header(reader, kRelationMagic, count);
  RelationStore store(dim);
  std::vector<float> values(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::string a = reader.short_string("head token");
    std::string b = reader.short_string("tail token");
    for (auto& v : values) v = reader.f32("component");
    try {
      store.insert(Concept(a), Concept(b), values);
    } catch (const Error& e) {
      reader.fail("record " + std::to_string(r) + ": " + e.what());
    }
  }
  reader.expect_end();
  return store;
}

void write_relations_binary(const RelationStore& store, std::ostream& out) {
  detail::BinaryWriter w(out);
  w.magic(kRelationMagic);
  w.uint(kFormatVersion);
  w.uint(static_cast<std::uint32_t>(store.dim()));
  w.uint(static_cast<std::uint64_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& key = store.key_at(i);
    w.short_string(key.first.str());
    w.short_string(key.second.str());
    for (float v : store.vector_at(i)) w.f32(v);
  }
}

RelationStore load_relations(const std::filesystem::path& path) {
  auto in = detail::open_input(path, true);
  return read_relations_binary(in, path.string());
}

void save_relations(const RelationStore& store, const std::filesystem::path& path) {
  auto out = detail::open_output(path, true);
  write_relations_binary(store, out);
  detail::finish_output(out, path);
}

std::vector<Neighbor> top_k_neighbors(const Concept& word, std::size_t k, const WordVectorTable& table) {
  auto self = table.index_of(word);
  if (!self) throw NotFoundError("word not in vocabulary: " + word.str());
  const Eigen::VectorXd query = table.vector_at(*self).cast<double>();
  const double query_norm = table.norm_at(*self);

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i == *self) continue;
    const auto row = table.vector_at(i);
    double dot = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) dot += static_cast<double>(row[j]) * query[j];
    scored.emplace_back(dot / (query_norm * table.norm_at(i)), i);
  }
  auto better = [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return table.token_at(x.second) < table.token_at(y.second);
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);

  std::vector<Neighbor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({table.token_at(scored[i].second), scored[i].first});
  return out;
}

std::set<Concept> merged_neighbors(const Concept& word, std::size_t k,
                                   std::span<const WordVectorTable* const> tables) {
  std::set<Concept> merged;
  bool found = false;
  for (const auto* table : tables) {
    if (!table->contains(word)) continue;
    found = true;
    for (auto& n : top_k_neighbors(word, k, *table)) merged.insert(std::move(n.token));
  }
  if (!found) throw NotFoundError("word not in any vector table: " + word.str());
  return merged;
}

}  // namespace relchain
