#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "relchain/harness.hpp"

using namespace relchain;
using fixtures::C;
using fixtures::P;

namespace {

const char* kTwoQuestions =
    R"({"stem": ["Ocean", "water"], "choice": [["desert", "sand"], ["tree", "leaf"], ["sky", "cloud"]], "answer": 0}
{"stem": ["hot", "cold"], "choice": [["up", "down"], ["big", "large"]], "answer": 0, "id": "antonym"}
)";

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in, "fixture");
}

AnalogyQuestion q(const std::string& id, std::size_t gold) {
  return {id, P("a" + id, "b" + id), {P("c" + id, "d" + id), P("e" + id, "f" + id)}, gold};
}

SolverVerdict picks(std::size_t chosen, std::optional<double> confidence) {
  SolverVerdict v;
  v.chosen = chosen;
  v.method = "fixed";
  v.confidence = confidence;
  v.scores = {chosen == 0 ? 1.0 : 0.0, chosen == 1 ? 1.0 : 0.0};
  v.candidate_fallback = {false, false};
  return v;
}

}  // namespace

TEST(ReadDataset, ParsesWellFormedLines) {
  const auto ds = parse(kTwoQuestions);
  ASSERT_EQ(ds.questions.size(), 2u);
  EXPECT_EQ(ds.name, "fixture");
  EXPECT_EQ(ds.questions[0].query, P("ocean", "water"));
  EXPECT_EQ(ds.questions[0].candidates.size(), 3u);
  EXPECT_EQ(ds.questions[0].id, "fixture:1");
  EXPECT_EQ(ds.questions[1].id, "antonym");
  EXPECT_EQ(dataset_words(ds).size(), 14u);
}

TEST(ReadDataset, RejectsOutOfRangeAnswerWithLine) {
  const std::string bad = std::string(kTwoQuestions) +
                          R"({"stem": ["a", "b"], "choice": [["c", "d"], ["e", "f"], ["g", "h"], ["i", "j"]], "answer": 7})";
  try {
    parse(bad);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ReadDataset, RejectsEmptyAndMalformedInput) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("{\"stem\": [\"a\"], \"choice\": [[\"c\", \"d\"], [\"e\", \"f\"]], \"answer\": 0}\n"), ParseError);
  EXPECT_THROW(parse("not json\n"), ParseError);
}

TEST(BucketIndex, HalfOpenWithClosedTop) {
  EXPECT_EQ(bucket_index(0.0, kDefaultBucketBounds), 0u);
  EXPECT_EQ(bucket_index(0.25, kDefaultBucketBounds), 1u);
  EXPECT_EQ(bucket_index(0.7499, kDefaultBucketBounds), 2u);
  EXPECT_EQ(bucket_index(0.75, kDefaultBucketBounds), 3u);
  EXPECT_EQ(bucket_index(1.0, kDefaultBucketBounds), 3u);
}

TEST(Evaluate, PlantedConfidencesFillOneBucketEach) {
  Dataset ds{"planted", {q("1", 0), q("2", 1), q("3", 0), q("4", 1)}};
  const std::vector<double> conf{0.1, 0.3, 0.6, 0.9};
  std::size_t i = 0;
  const auto run = evaluate(ds, "fixed", [&](const AnalogyQuestion& x) { return picks(x.gold, conf[i++]); }, nullptr);
  ASSERT_EQ(run.report.buckets.size(), 4u);
  for (const auto& b : run.report.buckets) {
    EXPECT_EQ(b.count, 1u);
    EXPECT_EQ(b.accuracy(), 1.0);
  }
  EXPECT_EQ(run.report.total, 4u);
  EXPECT_EQ(run.report.accuracy(), 1.0);
}

TEST(Evaluate, BucketsPartitionTheQuestions) {
  Dataset ds;
  ds.name = "many";
  for (int i = 0; i < 41; ++i) ds.questions.push_back(q(std::to_string(i), static_cast<std::size_t>(i % 2)));
  const auto run = evaluate(
      ds, "fixed",
      [](const AnalogyQuestion& x) {
        const int n = std::stoi(x.id);
        return picks(0, n % 7 == 0 ? std::optional<double>() : std::optional<double>(n / 40.0));
      },
      nullptr, kDefaultBucketBounds, 3);
  std::size_t sum = run.report.unscored.count;
  for (const auto& b : run.report.buckets) sum += b.count;
  EXPECT_EQ(sum, 41u);
  EXPECT_EQ(run.report.unscored.count, 6u);
  for (std::size_t i = 0; i < run.records.size(); ++i) EXPECT_EQ(run.records[i].id, std::to_string(i));
}

TEST(Evaluate, SolverErrorsCountAsWrong) {
  Dataset ds{"errs", {q("1", 0), q("2", 0)}};
  const auto run = evaluate(
      ds, "fixed",
      [](const AnalogyQuestion& x) {
        if (x.id == "2") throw MissingPairError("a", "b");
        return picks(0, 0.5);
      },
      nullptr);
  EXPECT_EQ(run.report.correct, 1u);
  EXPECT_EQ(run.report.total, 2u);
  EXPECT_FALSE(run.records[1].verdict.has_value());
  EXPECT_FALSE(run.records[1].error.empty());
  EXPECT_EQ(run.report.unscored.count, 1u);
}

TEST(Aggregate, SingleDatasetMacroEqualsMicro) {
  Dataset ds{"one", {q("1", 0), q("2", 1), q("3", 1)}};
  const auto run = evaluate(ds, "fixed", [](const AnalogyQuestion&) { return picks(1, 0.4); }, nullptr);
  const std::vector<EvalReport> reports{run.report};
  for (const auto& row : aggregate(reports)) EXPECT_DOUBLE_EQ(row.macro, row.micro) << row.label;
}

TEST(Aggregate, MacroIsUnweightedAcrossDatasets) {
  const Dataset small{"small", {q("1", 0)}};
  const Dataset large{"large", {q("1", 1), q("2", 1), q("3", 1)}};
  auto solve = [](const AnalogyQuestion&) { return picks(0, 0.9); };
  const std::vector<EvalReport> reports{evaluate(small, "m", solve, nullptr).report,
                                        evaluate(large, "m", solve, nullptr).report};
  for (const auto& row : aggregate(reports)) {
    if (row.label != "all") continue;
    EXPECT_DOUBLE_EQ(row.macro, 0.5);
    EXPECT_DOUBLE_EQ(row.micro, 0.25);
    EXPECT_EQ(row.count, 4u);
  }
}

TEST(Verdicts, ReportOverStoredVerdictsEqualsEval) {
  Dataset ds;
  ds.name = "mixed";
  for (int i = 0; i < 20; ++i) ds.questions.push_back(q(std::to_string(i), static_cast<std::size_t>(i % 2)));
  const auto run = evaluate(
      ds, "fixed",
      [](const AnalogyQuestion& x) {
        const int n = std::stoi(x.id);
        if (n == 5) throw Error("boom");
        auto v = picks(static_cast<std::size_t>(n % 3 == 0), n % 4 == 0 ? std::optional<double>() : n / 20.0);
        v.scores[0] = -std::numeric_limits<double>::infinity();
        return v;
      },
      nullptr);
  std::stringstream buf;
  write_verdicts(run.records, buf);
  const auto back = read_verdicts(buf);
  ASSERT_EQ(back.size(), run.records.size());
  EXPECT_EQ(back[3].verdict->scores[0], -std::numeric_limits<double>::infinity());
  const auto reports = reports_from_verdicts(back);
  ASSERT_EQ(reports.size(), 1u);
  const auto& r = reports[0];
  EXPECT_EQ(r.dataset, "mixed");
  EXPECT_EQ(r.method, "fixed");
  EXPECT_EQ(r.total, run.report.total);
  EXPECT_EQ(r.correct, run.report.correct);
  EXPECT_EQ(r.unscored.count, run.report.unscored.count);
  EXPECT_EQ(r.unscored.correct, run.report.unscored.correct);
  for (std::size_t i = 0; i < r.buckets.size(); ++i) {
    EXPECT_EQ(r.buckets[i].count, run.report.buckets[i].count);
    EXPECT_EQ(r.buckets[i].correct, run.report.buckets[i].correct);
  }
  std::ostringstream a, b;
  render_csv(reports, a);
  render_csv(std::vector<EvalReport>{run.report}, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Render, TableAndCsvShape) {
  Dataset ds{"tiny", {q("1", 0), q("2", 1)}};
  const auto run = evaluate(ds, "fixed", [](const AnalogyQuestion&) { return picks(0, 0.8); }, nullptr);
  const std::vector<EvalReport> reports{run.report};
  std::ostringstream table, csv;
  render_table(reports, table);
  render_csv(reports, csv);
  EXPECT_NE(table.str().find("unscored"), std::string::npos);
  EXPECT_NE(table.str().find("[0.75,1]"), std::string::npos);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "dataset,bucket,count,accuracy,method");
  EXPECT_NE(csv.str().find("tiny,\"all\",2,0.500000,fixed"), std::string::npos);
}
