#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fixtures {

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(normal(rng));
  return v;
}

oracle::Vec widen(const std::vector<float>& v) { return {v.begin(), v.end()}; }

void WorldBuilder::relation(const std::string& a, const std::string& b, const std::vector<float>& v) {
  store_.insert(C(a), C(b), v);
  world_.relations[{a, b}] = widen(v);
}

void WorldBuilder::kg_edge(const std::string& head, const std::string& tail, const std::string& label) {
  graph_.add_edge({C(head), C(tail), label, relchain::Provenance::kg});
  world_.adjacency[head].insert(tail);
  world_.adjacency[tail].insert(head);
  world_.labels[head < tail ? oracle::Key{head, tail} : oracle::Key{tail, head}].insert(label);
}

void WorldBuilder::mlp_edge(const std::string& x, const std::string& y) {
  graph_.add_edge({C(x), C(y), std::nullopt, relchain::Provenance::mlp});
  world_.adjacency[x].insert(y);
  world_.adjacency[y].insert(x);
}

QuestionSet random_questions(WorldBuilder& w, std::mt19937_64& rng, const RandomQuestionOptions& opts) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> n_cand(2, opts.max_candidates);
  std::uniform_int_distribution<std::size_t> n_chain(0, opts.max_chains);
  std::uniform_int_distribution<std::size_t> label(0, opts.label_count - 1);
  auto label_name = [](std::size_t i) { return "/r/L" + std::to_string(i); };
  static std::atomic<int> world_id{0};
  const std::string tag = "w" + std::to_string(world_id++);

  QuestionSet out;
  for (std::size_t qi = 0; qi < opts.count; ++qi) {
    const std::size_t candidates = n_cand(rng);
    relchain::AnalogyQuestion q;
    oracle::Question plain;
    q.id = tag + ":" + std::to_string(qi);
    for (std::size_t p = 0; p <= candidates; ++p) {
      const std::string base = tag + "q" + std::to_string(qi) + "p" + std::to_string(p);
      const std::string a = base + "a", b = base + "b";
      if (p == 0 || unit(rng) < opts.pair_present) w.relation(a, b, random_vector(rng, w.dim()));
      const std::size_t chains = n_chain(rng);
      for (std::size_t i = 0; i < chains; ++i) {
        const std::string x = base + "x" + std::to_string(i);
        for (const auto& [u, v] : {std::pair{a, x}, std::pair{x, b}}) {
          if (unit(rng) < opts.typed_edge) {
            w.kg_edge(u, v, label_name(label(rng)));
            if (unit(rng) < 0.3) w.kg_edge(v, u, label_name(label(rng)));
          } else {
            w.mlp_edge(u, v);
          }
          if (unit(rng) < opts.leg_present) w.relation(u, v, random_vector(rng, w.dim()));
        }
      }
      if (p == 0) {
        q.query = P(a, b);
        plain.query = {a, b};
      } else {
        q.candidates.push_back(P(a, b));
        plain.candidates.push_back({a, b});
      }
    }
    q.gold = std::uniform_int_distribution<std::size_t>(0, candidates - 1)(rng);
    out.questions.push_back(std::move(q));
    out.plain.push_back(std::move(plain));
  }
  return out;
}

namespace {

oracle::Mat rows(const Eigen::MatrixXd& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

oracle::Vec entries(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

oracle::Vec widen(const relchain::VectorView& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

oracle::Model to_oracle(const relchain::CondenserModeld& m) {
  return {rows(m.composition), entries(m.composition_bias), rows(m.decoder), entries(m.decoder_bias)};
}

oracle::ChainRef to_oracle(const relchain::Chain& c) {
  return {c.intermediate.str(), widen(c.first), widen(c.second)};
}

std::vector<oracle::ChainRef> to_oracle(const std::vector<relchain::Chain>& cs) {
  std::vector<oracle::ChainRef> out;
  for (const auto& c : cs) out.push_back(to_oracle(c));
  return out;
}

ChainPool::ChainPool(std::size_t dim, std::size_t capacity) : dim_(dim) { storage_.reserve(2 * dim * capacity); }

relchain::VectorView ChainPool::push(const std::vector<float>& v) {
  if (storage_.size() + v.size() > storage_.capacity()) throw std::logic_error("ChainPool capacity exceeded");
  const float* start = storage_.data() + storage_.size();
  storage_.insert(storage_.end(), v.begin(), v.end());
  return relchain::VectorView(start, static_cast<Eigen::Index>(v.size()));
}

relchain::Chain ChainPool::make(const std::string& a, const std::string& x, const std::string& b,
                                std::mt19937_64& rng) {
  return make(a, x, b, random_vector(rng, dim_), random_vector(rng, dim_));
}

relchain::Chain ChainPool::make(const std::string& a, const std::string& x, const std::string& b,
                                const std::vector<float>& r1, const std::vector<float>& r2) {
  const auto v1 = push(r1);
  const auto v2 = push(r2);
  return relchain::Chain(P(a, b), C(x), v1, v2);
}

PlantedWorld planted_world(const PlantedOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  PlantedWorld out;
  out.builder = std::make_unique<WorldBuilder>(opts.dim);
  auto& w = *out.builder;

  std::vector<std::vector<float>> tau;
  for (std::size_t t = 0; t < opts.types; ++t) {
    auto v = random_vector(rng, opts.dim);
    double norm = 0.0;
    for (float x : v) norm += double(x) * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x = static_cast<float>(x / norm);
    tau.push_back(std::move(v));
  }

  std::uniform_int_distribution<std::size_t> type_dist(0, opts.types - 1);
  std::uniform_int_distribution<std::size_t> chain_dist(1, opts.max_chains);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t serial = 0;

  auto make_pair = [&](std::size_t t, bool allow_indirect) {
    const std::string base = "pl" + std::to_string(serial++);
    const std::string a = base + "a", b = base + "b";
    const std::size_t chains = chain_dist(rng);
    for (std::size_t i = 0; i < chains; ++i) {
      const std::string x = base + "x" + std::to_string(i);
      const std::size_t t1 = type_dist(rng);
      const std::size_t t2 = (t + opts.types - t1) % opts.types;
      w.kg_edge(a, x, "/r/RelatedTo");
      w.kg_edge(x, b, "/r/RelatedTo");
      w.relation(a, x, tau[t1]);
      w.relation(x, b, tau[t2]);
    }
    const auto pair = P(a, b);
    if (allow_indirect && unit(rng) < opts.indirect_fraction) {
      out.indirect.insert(pair);
    } else {
      w.relation(a, b, tau[t]);
    }
    return pair;
  };

  for (std::size_t i = 0; i < opts.training_pairs; ++i) out.training_pairs.push_back(make_pair(type_dist(rng), false));

  for (std::size_t qi = 0; qi < opts.questions; ++qi) {
    relchain::AnalogyQuestion q;
    q.id = "planted:" + std::to_string(qi);
    const std::size_t t = type_dist(rng);
    q.query = make_pair(t, true);
    std::vector<std::size_t> types(opts.types);
    for (std::size_t i = 0; i < opts.types; ++i) types[i] = i;
    std::shuffle(types.begin(), types.end(), rng);
    std::vector<std::size_t> chosen{t};
    for (std::size_t u : types)
      if (u != t && chosen.size() < opts.candidates) chosen.push_back(u);
    std::shuffle(chosen.begin(), chosen.end(), rng);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      if (chosen[i] == t) q.gold = i;
      q.candidates.push_back(make_pair(chosen[i], true));
    }
    out.questions.push_back(std::move(q));
  }
  return out;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("relchain-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace fixtures
