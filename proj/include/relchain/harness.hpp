#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "relchain/solver.hpp"

namespace relchain {

struct Dataset {
  std::string name;
  std::vector<AnalogyQuestion> questions;
};

/// JSON lines with `stem` (2 strings), `choice` (list of 2-string lists) and
/// `answer` (index). Question ids default to `<name>:<line>` unless an `id` field is given.
Dataset read_dataset(std::istream& in, const std::string& name, const std::string& source = "<dataset>");
/// Dataset named after the file stem.
Dataset load_dataset(const std::filesystem::path& path);

/// Every word occurring in the dataset's pairs.
std::set<Concept> dataset_words(const Dataset& ds);

inline const std::vector<double> kDefaultBucketBounds = {0.0, 0.25, 0.5, 0.75, 1.0};

/// Half-open buckets [b_i, b_{i+1}); the last bucket is closed above. Values
/// outside the range go to the nearest end bucket.
std::size_t bucket_index(double confidence, std::span<const double> bounds);

/// One persisted verdict (one JSONL record).
struct VerdictRecord {
  std::string dataset;
  std::string id;
  std::string method;
  std::size_t gold = 0;
  /// Unset when the solver raised an error for this question.
  std::optional<SolverVerdict> verdict;
  std::optional<double> confidence;
  std::string error;

  bool correct() const { return verdict && verdict->chosen == gold; }
};

struct BucketStats {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  std::size_t correct = 0;

  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct EvalReport {
  std::string dataset;
  std::string method;
  std::vector<BucketStats> buckets;
  /// Questions without a confidence (query embedding missing).
  BucketStats unscored;
  std::size_t total = 0;
  std::size_t correct = 0;

  double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

EvalReport summarize(const std::string& dataset, const std::string& method, std::span<const VerdictRecord> records,
                     std::span<const double> bounds = kDefaultBucketBounds);

struct AggregateRow {
  std::string label;
  std::size_t count = 0;
  double macro = 0.0;
  double micro = 0.0;
};

/// Per-bucket (plus "unscored" and "all") macro average over datasets with a
/// non-empty cell, and the pooled micro average.
std::vector<AggregateRow> aggregate(std::span<const EvalReport> reports);

using SolveFn = std::function<SolverVerdict(const AnalogyQuestion&)>;
using ConfidenceFn = std::function<std::optional<double>(const AnalogyQuestion&)>;

struct EvalRun {
  std::vector<VerdictRecord> records;
  EvalReport report;
};

/// Solves every question (in parallel when threads > 1; results are kept in
/// question order). A verdict's own confidence wins over `confidence_of`.
EvalRun evaluate(const Dataset& ds, const std::string& method, const SolveFn& solve, const ConfidenceFn& confidence_of,
                 std::span<const double> bounds = kDefaultBucketBounds, unsigned threads = 1);

/// Confidence from the RelBERT verdict; nullopt if the query embedding is missing.
ConfidenceFn relbert_confidence(const RelationStore& store, const InformativenessClassifier& clf);

void write_verdicts(std::span<const VerdictRecord> records, std::ostream& out);
std::vector<VerdictRecord> read_verdicts(std::istream& in, const std::string& source = "<verdicts>");

/// Groups records by (dataset, method) in first-seen order and summarizes each group.
std::vector<EvalReport> reports_from_verdicts(std::span<const VerdictRecord> records,
                                              std::span<const double> bounds = kDefaultBucketBounds);

std::string bucket_label(const BucketStats& b, bool last);

/// Aligned text table: one column per report, one row per bucket.
void render_table(std::span<const EvalReport> reports, std::ostream& out);
/// CSV with columns dataset,bucket,count,accuracy,method.
void render_csv(std::span<const EvalReport> reports, std::ostream& out);

}  // namespace relchain
