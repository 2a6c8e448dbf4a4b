#include "relchain/condenser.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "io_util.hpp"
#include "relchain/detail/binary_io.hpp"

namespace relchain {

namespace {

constexpr std::string_view kCondenserMagic = "COND";
constexpr std::uint32_t kFormatVersion = 1;

template <typename Matrix, typename Fn>
void for_each_row_major(Matrix& mat, Fn&& fn) {
  for (Eigen::Index i = 0; i < mat.rows(); ++i)
    for (Eigen::Index j = 0; j < mat.cols(); ++j) fn(mat(i, j));
}

// Loss and gradient accumulation for a chunk of examples whose chains are
// evaluated together as one 2d x C matrix.
template <typename Scalar>
double chunk_loss(std::span<const CondenserExample> chunk, const CondenserModel<Scalar>& model,
                  CondenserModel<Scalar>* gradient) {
  using Matrix = typename CondenserModel<Scalar>::Matrix;
  const Eigen::Index d = model.relation_dim();
  const Eigen::Index m = model.latent_dim();
  const auto pairs = static_cast<Eigen::Index>(chunk.size());

  Eigen::Index total_chains = 0;
  for (const auto& ex : chunk) {
    if (ex.chains.empty()) throw Error("training pair without chains: " + ex.pair.first.str() + ":" + ex.pair.second.str());
    if (ex.target.size() != d) throw DimensionError(static_cast<std::size_t>(d), static_cast<std::size_t>(ex.target.size()));
    total_chains += static_cast<Eigen::Index>(ex.chains.size());
  }

  Matrix inputs(2 * d, total_chains);
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(total_chains));
  Eigen::Index col = 0;
  for (Eigen::Index p = 0; p < pairs; ++p) {
    for (const auto& chain : chunk[static_cast<std::size_t>(p)].chains) {
      if (chain.first.size() != d || chain.second.size() != d)
        throw DimensionError(static_cast<std::size_t>(d), static_cast<std::size_t>(chain.first.size()));
      inputs.col(col).head(d) = chain.first.template cast<Scalar>();
      inputs.col(col).tail(d) = chain.second.template cast<Scalar>();
      owner[static_cast<std::size_t>(col)] = p;
      ++col;
    }
  }

  Matrix pre = model.composition * inputs;
  pre.colwise() += model.composition_bias;
  const Matrix latent = pre.unaryExpr([](Scalar v) { return gelu(v); });
  Matrix pooled = Matrix::Zero(m, pairs);
  for (Eigen::Index c = 0; c < total_chains; ++c) pooled.col(owner[static_cast<std::size_t>(c)]) += latent.col(c);
  Matrix predicted = model.decoder * pooled;
  predicted.colwise() += model.decoder_bias;

  double loss = 0.0;
  Matrix grad_pred(d, pairs);
  for (Eigen::Index p = 0; p < pairs; ++p) {
    const Eigen::VectorXd s = predicted.col(p).template cast<double>();
    const Eigen::VectorXd r = chunk[static_cast<std::size_t>(p)].target.template cast<double>();
    const double s_norm = s.norm();
    const double r_norm = r.norm();
    if (s_norm == 0.0 || r_norm == 0.0) {
      grad_pred.col(p).setZero();
      continue;
    }
    const double cos = s.dot(r) / (s_norm * r_norm);
    loss -= cos;
    const Eigen::VectorXd dcos = r / (s_norm * r_norm) - cos * s / (s_norm * s_norm);
    grad_pred.col(p) = (-dcos).template cast<Scalar>();
  }
  if (!gradient) return loss;

  gradient->decoder.noalias() += grad_pred * pooled.transpose();
  gradient->decoder_bias += grad_pred.rowwise().sum();
  const Matrix grad_pooled = model.decoder.transpose() * grad_pred;
  Matrix grad_pre = pre.unaryExpr([](Scalar v) { return gelu_derivative(v); });
  for (Eigen::Index c = 0; c < total_chains; ++c)
    grad_pre.col(c).array() *= grad_pooled.col(owner[static_cast<std::size_t>(c)]).array();
  gradient->composition.noalias() += grad_pre * inputs.transpose();
  gradient->composition_bias += grad_pre.rowwise().sum();
  return loss;
}

template <typename Scalar>
class Adam {
 public:
  Adam(const CondenserModel<Scalar>& like, const CondenserTrainConfig& cfg)
      : first_(CondenserModel<Scalar>::zeros(like.relation_dim(), like.latent_dim())),
        second_(first_),
        cfg_(cfg) {}

  void step(CondenserModel<Scalar>& params, const CondenserModel<Scalar>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    update(params.composition, grad.composition, first_.composition, second_.composition, c1, c2);
    update(params.composition_bias, grad.composition_bias, first_.composition_bias, second_.composition_bias, c1, c2);
    update(params.decoder, grad.decoder, first_.decoder, second_.decoder, c1, c2);
    update(params.decoder_bias, grad.decoder_bias, first_.decoder_bias, second_.decoder_bias, c1, c2);
  }

 private:
  template <typename T>
  void update(T& p, const T& g, T& m, T& v, double c1, double c2) const {
    const auto b1 = static_cast<Scalar>(cfg_.beta1);
    const auto b2 = static_cast<Scalar>(cfg_.beta2);
    m.array() = b1 * m.array() + (Scalar(1) - b1) * g.array();
    v.array() = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
    const auto lr = static_cast<Scalar>(cfg_.lr);
    p.array() -= lr * (m.array() / static_cast<Scalar>(c1)) /
                 ((v.array() / static_cast<Scalar>(c2)).sqrt() + static_cast<Scalar>(cfg_.epsilon));
  }

  CondenserModel<Scalar> first_;
  CondenserModel<Scalar> second_;
  CondenserTrainConfig cfg_;
  int t_ = 0;
};

}  // namespace

template <typename Scalar>
CondenserModel<Scalar> CondenserModel<Scalar>::random(Eigen::Index d, Eigen::Index m, std::uint64_t seed) {
  if (d <= 0 || m <= 0) throw Error("condenser dimensions must be positive");
  auto model = zeros(d, m);
  std::mt19937_64 rng(seed);
  const double enc_bound = 1.0 / std::sqrt(static_cast<double>(2 * d));
  const double dec_bound = 1.0 / std::sqrt(static_cast<double>(m));
  std::uniform_real_distribution<double> enc(-enc_bound, enc_bound);
  std::uniform_real_distribution<double> dec(-dec_bound, dec_bound);
  for_each_row_major(model.composition, [&](Scalar& v) { v = static_cast<Scalar>(enc(rng)); });
  for (auto& v : model.composition_bias) v = static_cast<Scalar>(enc(rng));
  for_each_row_major(model.decoder, [&](Scalar& v) { v = static_cast<Scalar>(dec(rng)); });
  for (auto& v : model.decoder_bias) v = static_cast<Scalar>(dec(rng));
  return model;
}

template <typename Scalar>
double condenser_loss(std::span<const CondenserExample> examples, const CondenserModel<Scalar>& model,
                      CondenserModel<Scalar>* gradient, std::size_t max_chains_per_chunk) {
  if (gradient) *gradient = CondenserModel<Scalar>::zeros(model.relation_dim(), model.latent_dim());
  double total = 0.0;
  std::size_t start = 0;
  while (start < examples.size()) {
    std::size_t end = start;
    std::size_t chains = 0;
    do {
      chains += examples[end].chains.size();
      ++end;
    } while (end < examples.size() && chains + examples[end].chains.size() <= max_chains_per_chunk);
    total += chunk_loss(examples.subspan(start, end - start), model, gradient);
    start = end;
  }
  return total;
}

template <typename Scalar>
TrainedCondenser<Scalar> train_condenser(std::vector<CondenserExample> examples, CondenserModel<Scalar> init,
                                         const CondenserTrainConfig& cfg) {
  if (examples.empty()) throw Error("no training pairs retained for the condenser");
  if (!(cfg.lr >= 0.0)) throw Error("learning rate must be non-negative");
  if (cfg.batch_size == 0) throw Error("batch size must be positive");
  if (cfg.informativeness_threshold < 0.0 || cfg.informativeness_threshold > 1.0)
    throw Error("informativeness threshold must lie in [0, 1]");

  std::mt19937_64 rng(cfg.seed);
  std::shuffle(examples.begin(), examples.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(examples.size()) * cfg.validation_fraction));
  n_val = std::min(n_val, examples.size() - 1);
  std::vector<CondenserExample> validation(std::make_move_iterator(examples.end() - static_cast<std::ptrdiff_t>(n_val)),
                                           std::make_move_iterator(examples.end()));
  examples.erase(examples.end() - static_cast<std::ptrdiff_t>(n_val), examples.end());

  TrainedCondenser<Scalar> out{std::move(init), {}};
  out.log.train_pairs = examples.size();
  out.log.validation_pairs = validation.size();
  Adam<Scalar> adam(out.model, cfg);
  CondenserModel<Scalar> grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(examples.begin(), examples.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < examples.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, examples.size() - start);
      const std::span<const CondenserExample> batch(examples.data() + start, len);
      epoch_loss += condenser_loss(batch, out.model, &grad);
      const auto scale = static_cast<Scalar>(1.0 / static_cast<double>(len));
      grad.composition *= scale;
      grad.composition_bias *= scale;
      grad.decoder *= scale;
      grad.decoder_bias *= scale;
      adam.step(out.model, grad);
    }
    out.log.train_loss.push_back(epoch_loss / static_cast<double>(examples.size()));
    if (!validation.empty())
      out.log.validation_loss.push_back(condenser_loss(std::span<const CondenserExample>(validation), out.model) /
                                        static_cast<double>(validation.size()));
  }
  return out;
}

template <typename Scalar>
TrainedCondenser<Scalar> train_condenser(std::vector<CondenserExample> examples, Eigen::Index relation_dim,
                                         const CondenserTrainConfig& cfg) {
  auto init = CondenserModel<Scalar>::random(relation_dim, static_cast<Eigen::Index>(cfg.latent_dim), cfg.seed);
  return train_condenser<Scalar>(std::move(examples), std::move(init), cfg);
}

std::vector<CondenserExample> build_training_set(std::span<const ConceptPair> pairs, const ChainSource& source,
                                                 const InformativenessClassifier& clf, double threshold,
                                                 TrainingSetStats* stats) {
  if (!source.store) throw Error("chain source needs a relation store");
  TrainingSetStats local;
  std::vector<CondenserExample> out;
  for (const auto& pair : pairs) {
    ++local.candidates;
    const auto target = source.store->find(pair.first, pair.second);
    if (!target) {
      ++local.missing_embedding;
      continue;
    }
    if (!(clf.inf(*target) > threshold)) {
      ++local.uninformative;
      continue;
    }
    auto chains = build_chains(pair.first, pair.second, source);
    if (chains.empty()) {
      ++local.chainless;
      continue;
    }
    out.push_back({pair, std::move(chains), *target});
  }
  local.retained = out.size();
  if (stats) *stats = local;
  return out;
}

template <typename Scalar>
TrainedCondenser<Scalar> train_condenser(std::span<const ConceptPair> pairs, const ChainSource& source,
                                         const InformativenessClassifier& clf, const CondenserTrainConfig& cfg,
                                         TrainingSetStats* stats) {
  auto examples = build_training_set(pairs, source, clf, cfg.informativeness_threshold, stats);
  return train_condenser<Scalar>(std::move(examples), static_cast<Eigen::Index>(source.store->dim()), cfg);
}

template <typename Scalar>
void write_condenser(const CondenserModel<Scalar>& model, std::ostream& out) {
  detail::BinaryWriter w(out);
  w.magic(kCondenserMagic);
  w.uint(kFormatVersion);
  w.uint(static_cast<std::uint32_t>(model.relation_dim()));
  w.uint(static_cast<std::uint32_t>(model.latent_dim()));
  auto put = [&](const auto& v) { w.f32(static_cast<float>(v)); };
  for_each_row_major(model.composition, put);
  for (auto v : model.composition_bias) put(v);
  for_each_row_major(model.decoder, put);
  for (auto v : model.decoder_bias) put(v);
}

CondenserModelf read_condenser(std::istream& in, const std::string& source) {
  detail::BinaryReader reader(in, source);
  reader.expect_magic(kCondenserMagic);
  auto version = reader.uint<std::uint32_t>("version");
  if (version != kFormatVersion) reader.fail("unsupported version " + std::to_string(version));
  const auto d = reader.uint<std::uint32_t>("d");
  const auto m = reader.uint<std::uint32_t>("m");
  if (d == 0 || m == 0) reader.fail("dimensions must be positive");
  auto model = CondenserModelf::zeros(d, m);
  auto get = [&](float& v) { v = reader.f32("parameter"); };
  for_each_row_major(model.composition, get);
  for (auto& v : model.composition_bias) get(v);
  for_each_row_major(model.decoder, get);
  for (auto& v : model.decoder_bias) get(v);
  reader.expect_end();
  if (!model.all_finite()) reader.fail("non-finite parameter");
  return model;
}

template <typename Scalar>
void save_condenser(const CondenserModel<Scalar>& model, const std::filesystem::path& path) {
  auto out = detail::open_output(path, true);
  write_condenser(model, out);
  detail::finish_output(out, path);
}

CondenserModelf load_condenser(const std::filesystem::path& path) {
  auto in = detail::open_input(path, true);
  return read_condenser(in, path.string());
}

void save_condenser_sidecar(const std::filesystem::path& checkpoint, const CondenserTrainConfig& cfg,
                            const CondenserTrainLog& log, const TrainingSetStats* stats) {
  nlohmann::json j;
  j["config"] = {{"latent_dim", cfg.latent_dim}, {"lr", cfg.lr},
                 {"epochs", cfg.epochs},         {"batch_size", cfg.batch_size},
                 {"seed", cfg.seed},             {"informativeness_threshold", cfg.informativeness_threshold},
                 {"beta1", cfg.beta1},           {"beta2", cfg.beta2},
                 {"epsilon", cfg.epsilon},       {"validation_fraction", cfg.validation_fraction}};
  j["log"] = {{"train_pairs", log.train_pairs},
              {"validation_pairs", log.validation_pairs},
              {"train_loss", log.train_loss},
              {"validation_loss", log.validation_loss}};
  if (stats) {
    j["training_set"] = {{"candidates", stats->candidates}, {"missing_embedding", stats->missing_embedding},
                         {"uninformative", stats->uninformative}, {"chainless", stats->chainless},
                         {"retained", stats->retained}};
  }
  auto path = checkpoint;
  path += ".json";
  auto out = detail::open_output(path);
  out << j.dump(2) << '\n';
  detail::finish_output(out, path);
}

template struct CondenserModel<float>;
template struct CondenserModel<double>;

#define RELCHAIN_INSTANTIATE_CONDENSER(Scalar)                                                                  \
  template double condenser_loss<Scalar>(std::span<const CondenserExample>, const CondenserModel<Scalar>&,      \
                                         CondenserModel<Scalar>*, std::size_t);                                  \
  template TrainedCondenser<Scalar> train_condenser<Scalar>(std::vector<CondenserExample>, Eigen::Index,         \
                                                            const CondenserTrainConfig&);                        \
  template TrainedCondenser<Scalar> train_condenser<Scalar>(std::vector<CondenserExample>,                     \
                                                            CondenserModel<Scalar>, const CondenserTrainConfig&); \
  template TrainedCondenser<Scalar> train_condenser<Scalar>(std::span<const ConceptPair>, const ChainSource&,   \
                                                            const InformativenessClassifier&,                  \
                                                            const CondenserTrainConfig&, TrainingSetStats*);     \
  template void write_condenser<Scalar>(const CondenserModel<Scalar>&, std::ostream&);                          \
  template void save_condenser<Scalar>(const CondenserModel<Scalar>&, const std::filesystem::path&);

RELCHAIN_INSTANTIATE_CONDENSER(float)
RELCHAIN_INSTANTIATE_CONDENSER(double)

}  // namespace relchain
