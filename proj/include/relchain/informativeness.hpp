#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "relchain/concept.hpp"
#include "relchain/embedding_store.hpp"
#include "relchain/errors.hpp"

namespace relchain {

struct LabeledPair {
  Concept a;
  Concept b;
  int label = 1;  // 1 = related, 0 = unrelated

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

/// Numerically stable logistic function.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Logistic regression over relation embeddings; `inf` is the probability that
/// an embedding encodes a specific relationship.
struct InformativenessClassifier {
  Eigen::VectorXd weights;
  double bias = 0.0;

  InformativenessClassifier() = default;
  explicit InformativenessClassifier(std::size_t dim) : weights(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))) {}

  std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.size()); }

  template <typename Derived>
  double logit(const Eigen::MatrixBase<Derived>& r) const {
    if (r.size() != weights.size()) throw DimensionError(dim(), static_cast<std::size_t>(r.size()));
    return weights.dot(r.template cast<double>()) + bias;
  }

  template <typename Derived>
  double inf(const Eigen::MatrixBase<Derived>& r) const {
    return sigmoid(logit(r));
  }
};

struct ClassifierTrainConfig {
  double lr = 0.05;
  int epochs = 500;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
};

struct TrainedClassifier {
  InformativenessClassifier classifier;
  /// loss[t] is the regularized loss after t epochs; loss[0] is the initial loss.
  std::vector<double> loss;
};

/// Re-pairs each positive's left word with the right word of a different,
/// uniformly drawn positive. Candidates recreating a positive pair (or a
/// self-pair) are redrawn; a slot is skipped after 100 rejections.
std::vector<LabeledPair> corrupt_negatives(std::span<const LabeledPair> positives, std::uint64_t seed,
                                           std::size_t* skipped = nullptr);

/// Design matrix (one row per example) and labels.
struct ClassifierData {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
};

/// Looks every pair up in `store`; throws Error listing all missing pairs.
ClassifierData gather_features(std::span<const LabeledPair> data, const RelationStore& store);

/// Mean log loss plus (l2 / 2) * |w|^2; the bias is not regularized.
double regularized_log_loss(const InformativenessClassifier& clf, const ClassifierData& data, double l2);

/// Gradient of regularized_log_loss; the last component is d/d bias.
Eigen::VectorXd log_loss_gradient(const InformativenessClassifier& clf, const ClassifierData& data, double l2);

/// Full-batch gradient descent from an all-zero initialization.
TrainedClassifier train_classifier(const ClassifierData& data, const ClassifierTrainConfig& cfg);
TrainedClassifier train_classifier(std::span<const LabeledPair> data, const RelationStore& store,
                                   const ClassifierTrainConfig& cfg);

/// TSV `word_a<TAB>word_b<TAB>label`, `#` comments skipped.
std::vector<LabeledPair> read_labeled_pairs(std::istream& in, const std::string& source = "<pairs>");
std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path);

void write_classifier(const InformativenessClassifier& clf, std::ostream& out);
InformativenessClassifier read_classifier(std::istream& in, const std::string& source = "<infc>");
void save_classifier(const InformativenessClassifier& clf, const std::filesystem::path& path);
InformativenessClassifier load_classifier(const std::filesystem::path& path);

}  // namespace relchain
