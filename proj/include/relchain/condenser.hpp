#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relchain/chain.hpp"
#include "relchain/errors.hpp"

namespace relchain {

/// Exact (erf-based) GeLU: x * Phi(x).
template <typename Scalar>
Scalar gelu(Scalar x) {
  return Scalar(0.5) * x * (Scalar(1) + std::erf(x * Scalar(M_SQRT1_2)));
}

/// d/dx GeLU(x) = Phi(x) + x * phi(x).
template <typename Scalar>
Scalar gelu_derivative(Scalar x) {
  const Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(x * Scalar(M_SQRT1_2)));
  const Scalar pdf = std::exp(Scalar(-0.5) * x * x) * Scalar(0.3989422804014327);
  return cdf + x * pdf;
}

/// Chain condenser s_ab = decoder(sum_i GeLU(A [r_ax_i ; r_x_ib] + b)).
///
/// `composition` is m x 2d: its left d columns act on the first leg, the right
/// d columns on the second. `decoder` (d x m) and `decoder_bias` form the
/// linear decoder.
template <typename Scalar>
struct CondenserModel {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix composition;
  Vector composition_bias;
  Matrix decoder;
  Vector decoder_bias;

  Eigen::Index relation_dim() const { return decoder.rows(); }
  Eigen::Index latent_dim() const { return composition.rows(); }

  static CondenserModel zeros(Eigen::Index d, Eigen::Index m) {
    return {Matrix::Zero(m, 2 * d), Vector::Zero(m), Matrix::Zero(d, m), Vector::Zero(d)};
  }

  /// Uniform in +-1/sqrt(fan_in) for every tensor, seeded.
  static CondenserModel random(Eigen::Index d, Eigen::Index m, std::uint64_t seed);

  template <typename T>
  CondenserModel<T> cast() const {
    return {composition.template cast<T>(), composition_bias.template cast<T>(), decoder.template cast<T>(),
            decoder_bias.template cast<T>()};
  }

  bool all_finite() const {
    return composition.allFinite() && composition_bias.allFinite() && decoder.allFinite() && decoder_bias.allFinite();
  }

  void set_zero() {
    composition.setZero();
    composition_bias.setZero();
    decoder.setZero();
    decoder_bias.setZero();
  }

  friend bool operator==(const CondenserModel& l, const CondenserModel& r) {
    return l.composition == r.composition && l.composition_bias == r.composition_bias && l.decoder == r.decoder &&
           l.decoder_bias == r.decoder_bias;
  }
};

using CondenserModelf = CondenserModel<float>;
using CondenserModeld = CondenserModel<double>;

/// phi(r1, r2) = GeLU(A (r1 (+) r2) + b); returns the m-dimensional latent.
template <typename Scalar, typename D1, typename D2>
typename CondenserModel<Scalar>::Vector compose(const Eigen::MatrixBase<D1>& r1, const Eigen::MatrixBase<D2>& r2,
                                                const CondenserModel<Scalar>& model) {
  const Eigen::Index d = model.relation_dim();
  if (r1.size() != d) throw DimensionError(static_cast<std::size_t>(d), static_cast<std::size_t>(r1.size()));
  if (r2.size() != d) throw DimensionError(static_cast<std::size_t>(d), static_cast<std::size_t>(r2.size()));
  typename CondenserModel<Scalar>::Vector z = model.composition.leftCols(d) * r1.template cast<Scalar>();
  z.noalias() += model.composition.rightCols(d) * r2.template cast<Scalar>();
  z += model.composition_bias;
  return z.unaryExpr([](Scalar v) { return gelu(v); });
}

/// psi(h) = W h + c.
template <typename Scalar, typename Derived>
typename CondenserModel<Scalar>::Vector decode(const Eigen::MatrixBase<Derived>& latent,
                                               const CondenserModel<Scalar>& model) {
  return model.decoder * latent + model.decoder_bias;
}

/// Sum of compose() over the chains, accumulated in canonical chain order.
template <typename Scalar>
typename CondenserModel<Scalar>::Vector pooled_latent(std::span<const Chain> chains,
                                                      const CondenserModel<Scalar>& model) {
  if (chains.empty()) throw Error("cannot condense an empty chain set");
  typename CondenserModel<Scalar>::Vector h = CondenserModel<Scalar>::Vector::Zero(model.latent_dim());
  for (std::size_t i : canonical_chain_order(chains)) h += compose(chains[i].first, chains[i].second, model);
  return h;
}

/// Predicted relation embedding s_ab for the pair the chains connect.
template <typename Scalar>
typename CondenserModel<Scalar>::Vector condense(std::span<const Chain> chains, const CondenserModel<Scalar>& model) {
  return decode(pooled_latent(chains, model), model);
}

/// One supervised pair: its chains and the stored embedding r_ab to predict.
struct CondenserExample {
  ConceptPair pair;
  std::vector<Chain> chains;
  VectorView target;

  CondenserExample(ConceptPair p, std::vector<Chain> c, VectorView r_ab)
      : pair(std::move(p)), chains(std::move(c)), target(r_ab) {}
  CondenserExample(const CondenserExample&) = default;
  CondenserExample(CondenserExample&&) = default;

  CondenserExample& operator=(const CondenserExample& other) {
    pair = other.pair;
    chains = other.chains;
    rebind(target, other.target);
    return *this;
  }
  CondenserExample& operator=(CondenserExample&& other) noexcept {
    pair = std::move(other.pair);
    chains = std::move(other.chains);
    rebind(target, other.target);
    return *this;
  }
};

/// Negative cosine objective summed over `examples`: sum of -cos(s_ab, r_ab).
/// When `gradient` is non-null it is resized and receives d(loss)/d(params).
/// `max_chains_per_chunk` bounds the latent activations held in memory.
template <typename Scalar>
double condenser_loss(std::span<const CondenserExample> examples, const CondenserModel<Scalar>& model,
                      CondenserModel<Scalar>* gradient = nullptr, std::size_t max_chains_per_chunk = 4096);

struct CondenserTrainConfig {
  /// Latent size preset for full-scale training.
  static constexpr std::size_t kLargeLatentDim = 81920;

  std::size_t latent_dim = 8192;
  double lr = 0.0025;
  int epochs = 10;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  double informativeness_threshold = 0.75;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.1;
};

struct CondenserTrainLog {
  std::size_t train_pairs = 0;
  std::size_t validation_pairs = 0;
  /// Mean -cos over the training pairs, as seen during each epoch.
  std::vector<double> train_loss;
  /// Mean -cos over the validation pairs at the end of each epoch.
  std::vector<double> validation_loss;
};

template <typename Scalar>
struct TrainedCondenser {
  CondenserModel<Scalar> model;
  CondenserTrainLog log;
};

/// Adam on minibatches of the mean negative-cosine loss. A seeded shuffle puts
/// the last `validation_fraction` of the examples aside for validation; the
/// training part is reshuffled every epoch.
template <typename Scalar>
TrainedCondenser<Scalar> train_condenser(std::vector<CondenserExample> examples, Eigen::Index relation_dim,
                                         const CondenserTrainConfig& cfg);

/// Same, starting from a given model instead of the seeded initialization.
template <typename Scalar>
TrainedCondenser<Scalar> train_condenser(std::vector<CondenserExample> examples, CondenserModel<Scalar> init,
                                         const CondenserTrainConfig& cfg);

struct TrainingSetStats {
  std::size_t candidates = 0;
  std::size_t missing_embedding = 0;
  std::size_t uninformative = 0;
  std::size_t chainless = 0;
  std::size_t retained = 0;
};

/// Keeps the pairs with a stored r_ab, inf(r_ab) > threshold and at least one chain.
std::vector<CondenserExample> build_training_set(std::span<const ConceptPair> pairs, const ChainSource& source,
                                                 const InformativenessClassifier& clf, double threshold,
                                                 TrainingSetStats* stats = nullptr);

/// build_training_set followed by training. Throws if no pair survives.
template <typename Scalar>
TrainedCondenser<Scalar> train_condenser(std::span<const ConceptPair> pairs, const ChainSource& source,
                                         const InformativenessClassifier& clf, const CondenserTrainConfig& cfg,
                                         TrainingSetStats* stats = nullptr);

/// COND checkpoint: parameters stored as f32 regardless of Scalar.
template <typename Scalar>
void write_condenser(const CondenserModel<Scalar>& model, std::ostream& out);
CondenserModelf read_condenser(std::istream& in, const std::string& source = "<cond>");
template <typename Scalar>
void save_condenser(const CondenserModel<Scalar>& model, const std::filesystem::path& path);
CondenserModelf load_condenser(const std::filesystem::path& path);

/// JSON sidecar (`<checkpoint>.json`) with the training config and loss log.
void save_condenser_sidecar(const std::filesystem::path& checkpoint, const CondenserTrainConfig& cfg,
                            const CondenserTrainLog& log, const TrainingSetStats* stats = nullptr);

extern template struct CondenserModel<float>;
extern template struct CondenserModel<double>;

}  // namespace relchain
