#include "relchain/informativeness.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>

#include "io_util.hpp"
#include "relchain/detail/binary_io.hpp"

namespace relchain {

namespace {

constexpr std::string_view kClassifierMagic = "INFC";
constexpr std::uint32_t kFormatVersion = 1;
constexpr int kMaxRejections = 100;

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

}  // namespace

std::vector<LabeledPair> corrupt_negatives(std::span<const LabeledPair> positives, std::uint64_t seed,
                                           std::size_t* skipped) {
  if (positives.size() < 2) throw Error("negative corruption needs at least two positive pairs");
  std::unordered_set<ConceptPair> positive_set;
  for (const auto& p : positives) positive_set.insert({p.a, p.b});

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> other(0, positives.size() - 2);
  std::vector<LabeledPair> negatives;
  negatives.reserve(positives.size());
  std::size_t skip_count = 0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    bool placed = false;
    for (int attempt = 0; attempt <= kMaxRejections; ++attempt) {
      std::size_t j = other(rng);
      if (j >= i) ++j;
      const Concept& left = positives[i].a;
      const Concept& right = positives[j].b;
      if (left == right || positive_set.contains({left, right})) continue;
      negatives.push_back({left, right, 0});
      placed = true;
      break;
    }
    if (!placed) ++skip_count;
  }
  if (skipped) *skipped = skip_count;
  return negatives;
}

ClassifierData gather_features(std::span<const LabeledPair> data, const RelationStore& store) {
  ClassifierData out;
  out.features.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(store.dim()));
  out.labels.resize(static_cast<Eigen::Index>(data.size()));
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = store.find(data[i].a, data[i].b);
    if (!r) {
      missing.push_back("(" + data[i].a.str() + ", " + data[i].b.str() + ")");
      continue;
    }
    out.features.row(static_cast<Eigen::Index>(i)) = r->cast<double>().transpose();
    out.labels[static_cast<Eigen::Index>(i)] = data[i].label;
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " training pair(s) missing from the relation store:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg << ' ' << missing[i];
    if (missing.size() > 20) msg << " ...";
    throw Error(msg.str());
  }
  return out;
}

double regularized_log_loss(const InformativenessClassifier& clf, const ClassifierData& data, double l2) {
  const Eigen::Index n = data.features.rows();
  if (n == 0) return 0.5 * l2 * clf.weights.squaredNorm();
  const Eigen::VectorXd z = (data.features * clf.weights).array() + clf.bias;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += softplus(z[i]) - data.labels[i] * z[i];
  return total / static_cast<double>(n) + 0.5 * l2 * clf.weights.squaredNorm();
}

Eigen::VectorXd log_loss_gradient(const InformativenessClassifier& clf, const ClassifierData& data, double l2) {
  const Eigen::Index n = data.features.rows();
  const Eigen::Index d = clf.weights.size();
  Eigen::VectorXd grad(d + 1);
  if (n == 0) {
    grad.head(d) = l2 * clf.weights;
    grad[d] = 0.0;
    return grad;
  }
  Eigen::VectorXd residual = (data.features * clf.weights).array() + clf.bias;
  residual = residual.unaryExpr([](double z) { return sigmoid(z); }) - data.labels;
  grad.head(d) = data.features.transpose() * residual / static_cast<double>(n) + l2 * clf.weights;
  grad[d] = residual.mean();
  return grad;
}

TrainedClassifier train_classifier(const ClassifierData& data, const ClassifierTrainConfig& cfg) {
  const bool has_pos = (data.labels.array() > 0.5).any();
  const bool has_neg = (data.labels.array() < 0.5).any();
  if (!has_pos || !has_neg) throw Error("classifier training data must contain both labels");
  if (cfg.epochs < 0) throw Error("epochs must be non-negative");

  TrainedClassifier out;
  out.classifier = InformativenessClassifier(static_cast<std::size_t>(data.features.cols()));
  auto& clf = out.classifier;
  const Eigen::Index d = clf.weights.size();
  out.loss.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
  out.loss.push_back(regularized_log_loss(clf, data, cfg.l2));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Eigen::VectorXd grad = log_loss_gradient(clf, data, cfg.l2);
    clf.weights -= cfg.lr * grad.head(d);
    clf.bias -= cfg.lr * grad[d];
    out.loss.push_back(regularized_log_loss(clf, data, cfg.l2));
  }
  return out;
}

TrainedClassifier train_classifier(std::span<const LabeledPair> data, const RelationStore& store,
                                   const ClassifierTrainConfig& cfg) {
  return train_classifier(gather_features(data, store), cfg);
}

std::vector<LabeledPair> read_labeled_pairs(std::istream& in, const std::string& source) {
  std::vector<LabeledPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line) || line.front() == '#') continue;
    auto fields = detail::split_tabs(line);
    if (fields.size() != 3) throw ParseError(source, line_no, "expected 3 tab-separated columns");
    if (fields[2] != "0" && fields[2] != "1") throw ParseError(source, line_no, "label must be 0 or 1");
    try {
      LabeledPair p{Concept(fields[0]), Concept(fields[1]), fields[2] == "1" ? 1 : 0};
      if (p.a == p.b) throw Error("pair words must differ");
      out.push_back(std::move(p));
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return out;
}

std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_labeled_pairs(in, path.string());
}

void write_classifier(const InformativenessClassifier& clf, std::ostream& out) {
  detail::BinaryWriter w(out);
  w.magic(kClassifierMagic);
  w.uint(kFormatVersion);
  w.uint(static_cast<std::uint32_t>(clf.dim()));
  w.f64(clf.bias);
  for (double v : clf.weights) w.f64(v);
}

InformativenessClassifier read_classifier(std::istream& in, const std::string& source) {
  detail::BinaryReader reader(in, source);
  reader.expect_magic(kClassifierMagic);
  auto version = reader.uint<std::uint32_t>("version");
  if (version != kFormatVersion) reader.fail("unsupported version " + std::to_string(version));
  auto dim = reader.uint<std::uint32_t>("dim");
  if (dim == 0) reader.fail("dim must be positive");
  InformativenessClassifier clf(dim);
  clf.bias = reader.f64("bias");
  for (auto& v : clf.weights) v = reader.f64("weight");
  reader.expect_end();
  if (!std::isfinite(clf.bias) || !clf.weights.allFinite()) reader.fail("non-finite classifier parameter");
  return clf;
}

void save_classifier(const InformativenessClassifier& clf, const std::filesystem::path& path) {
  auto out = detail::open_output(path, true);
  write_classifier(clf, out);
  detail::finish_output(out, path);
}

InformativenessClassifier load_classifier(const std::filesystem::path& path) {
  auto in = detail::open_input(path, true);
  return read_classifier(in, path.string());
}

}  // namespace relchain
