#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "relchain/harness.hpp"

using namespace relchain;

// Opt-in checks against exported real embeddings. Set RELCHAIN_REAL_DATA to a
// directory holding sat.jsonl, relations.relc and classifier.infc.

namespace {

std::filesystem::path real_data_dir() {
  const char* dir = std::getenv("RELCHAIN_REAL_DATA");
  return dir ? std::filesystem::path(dir) : std::filesystem::path();
}

}  // namespace

TEST(RealData, SatRelbertBaselineAndDifficultyGradient) {
  const auto dir = real_data_dir();
  if (dir.empty()) GTEST_SKIP() << "RELCHAIN_REAL_DATA not set";
  const auto ds = load_dataset(dir / "sat.jsonl");
  const auto store = load_relations(dir / "relations.relc");
  const auto clf = load_classifier(dir / "classifier.infc");
  EXPECT_EQ(ds.questions.size(), 337u);
  const auto run = evaluate(
      ds, "relbert", [&](const AnalogyQuestion& q) { return solve_relbert(q, store); }, relbert_confidence(store, clf));
  EXPECT_NEAR(run.report.accuracy(), 0.736, 0.015);
  EXPECT_GE(run.report.buckets.back().accuracy() - run.report.buckets.front().accuracy(), 0.20);
}
