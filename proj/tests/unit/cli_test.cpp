#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "relchain/cli.hpp"
#include "relchain/concept_graph.hpp"
#include "relchain/embedding_store.hpp"
#include "relchain/informativeness.hpp"

using namespace relchain;
using fixtures::C;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "relchain");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// A small world on disk: relations, classifier, graph, vectors and a dataset.
class CliFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 rng(3);
    RelationStore store(4);
    WordVectorTable table(3);
    ConceptGraph graph;
    auto add = [&](const std::string& a, const std::string& b) {
      store.insert(C(a), C(b), fixtures::random_vector(rng, 4));
    };
    std::string dataset;
    for (int i = 0; i < 12; ++i) {
      const std::string n = std::to_string(i);
      std::string choices;
      for (int c = 0; c < 3; ++c) {
        const std::string a = "c" + n + "_" + std::to_string(c), b = "d" + n + "_" + std::to_string(c);
        add(a, b);
        add(a, "m" + n);
        add("m" + n, b);
        graph.add_edge({C(a), C("m" + n), std::string("/r/IsA"), Provenance::kg});
        graph.add_edge({C("m" + n), C(b), std::string(c == 0 ? "/r/PartOf" : "/r/UsedFor"), Provenance::kg});
        choices += std::string(c ? ", " : "") + "[\"" + a + "\", \"" + b + "\"]";
        table.insert(C(a), fixtures::random_vector(rng, 3));
      }
      add("a" + n, "b" + n);
      add("a" + n, "m" + n);
      add("m" + n, "b" + n);
      graph.add_edge({C("a" + n), C("m" + n), std::string("/r/IsA"), Provenance::kg});
      graph.add_edge({C("m" + n), C("b" + n), std::string("/r/PartOf"), Provenance::kg});
      table.insert(C("a" + n), fixtures::random_vector(rng, 3));
      dataset += "{\"stem\": [\"a" + n + "\", \"b" + n + "\"], \"choice\": [" + choices + "], \"answer\": 0}\n";
    }
    InformativenessClassifier clf(4);
    clf.bias = 2.0;
    save_relations(store, dir / "rel.relc");
    save_classifier(clf, dir / "clf.infc");
    save_graph(graph, dir / "graph.tsv");
    save_word_vectors(table, dir / "glove.wvec");
    fixtures::write_file(dir / "toy.jsonl", dataset);
    data = {"--relations", p("rel.relc"), "--classifier", p("clf.infc"), "--graph", p("graph.tsv")};
  }

  std::string p(const std::string& name) const { return (dir / name).string(); }

  std::vector<std::string> with_data(std::vector<std::string> args) const {
    args.insert(args.end(), data.begin(), data.end());
    return args;
  }

  fixtures::TempDir dir;
  std::vector<std::string> data;
};

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  const auto unknown = run({"frobnicate"});
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  const auto missing = run({"eval", "--method", "relbert"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("--dataset"), std::string::npos);
  EXPECT_EQ(run({"eval", "--dataset", "x.jsonl"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliFixture, EvalPrintsBucketTable) {
  const auto r = run(with_data({"eval", "--method", "relbert", "--dataset", p("toy.jsonl")}));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* label : {"[0,0.25)", "[0.25,0.5)", "[0.5,0.75)", "[0.75,1]", "unscored", "all"})
    EXPECT_NE(r.out.find(label), std::string::npos) << label;
}

TEST_F(CliFixture, MissingDataFileExitsTwo) {
  const auto r = run({"eval", "--method", "relbert", "--dataset", p("nope.jsonl"), "--relations", p("rel.relc")});
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliFixture, ReportReproducesEval) {
  for (const std::string method : {"relbert", "direct-sim1", "direct-sim3", "cn-types"}) {
    const auto eval = run(with_data({"eval", "--method", method, "--dataset", p("toy.jsonl"), "--csv", "--verdicts",
                                     p(method + ".jsonl")}));
    ASSERT_EQ(eval.code, 0) << eval.err;
    const auto report = run({"report", p(method + ".jsonl"), "--csv"});
    ASSERT_EQ(report.code, 0) << report.err;
    EXPECT_EQ(eval.out, report.out) << method;
  }
}

TEST_F(CliFixture, SolveIsDeterministicAndExplains) {
  const auto a = run(with_data({"solve", "--method", "direct-sim1", "--dataset", p("toy.jsonl"), "--explain"}));
  const auto b = run(with_data({"solve", "--method", "direct-sim1", "--dataset", p("toy.jsonl"), "--explain",
                                "--threads", "3"}));
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("\"explanation\""), std::string::npos);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 12);
}

TEST_F(CliFixture, TrainCondenserThenSolve) {
  const auto train = run(with_data({"train-cond", "--latent-dim", "8", "--epochs", "2", "--output", p("m.cond")}));
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("retained"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "m.cond.json"));
  for (const std::string method : {"condensed", "direct-sim2", "hybrid"}) {
    const auto r = run(with_data({"eval", "--method", method, "--dataset", p("toy.jsonl"), "--condenser", p("m.cond")}));
    EXPECT_EQ(r.code, 0) << method << ": " << r.err;
  }
  const auto check = run({"export-check", p("m.cond"), p("rel.relc"), p("clf.infc"), p("glove.wvec")});
  EXPECT_EQ(check.code, 0) << check.out;
}

TEST_F(CliFixture, TrainInformativeness) {
  std::string pairs;
  for (int i = 0; i < 12; ++i) pairs += "a" + std::to_string(i) + "\tb" + std::to_string(i) + "\t1\n";
  fixtures::write_file(dir / "pairs.tsv", pairs);
  std::mt19937_64 rng(5);
  RelationStore all(4);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      all.insert(C("a" + std::to_string(i)), C("b" + std::to_string(j)), fixtures::random_vector(rng, 4));
  save_relations(all, dir / "all.relc");
  const auto r = run({"train-inf", "--pairs", p("pairs.tsv"), "--corrupt", "--relations", p("all.relc"), "--output",
                      p("new.infc"), "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("corrupted negatives 12"), std::string::npos) << r.out;
  EXPECT_EQ(load_classifier(dir / "new.infc").dim(), 4u);
}

TEST_F(CliFixture, AugmentWritesGraphAndNeededPairs) {
  const auto r = run(with_data({"augment", "--vectors", p("glove.wvec"), "--dataset", p("toy.jsonl"), "--output",
                                p("aug.tsv"), "--needed-pairs", p("needed.tsv")}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(load_graph(dir / "aug.tsv").edge_count(), load_graph(dir / "graph.tsv").edge_count());
  EXPECT_TRUE(std::filesystem::exists(dir / "needed.tsv"));
  EXPECT_NE(r.out.find("needed_pairs"), std::string::npos);
}

TEST_F(CliFixture, IngestKg) {
  fixtures::write_file(dir / "kg.tsv",
                       "/r/IsA\t/c/en/dog\t/c/en/animal\n"
                       "/r/IsA\t/c/fr/chien\t/c/fr/animal\n"
                       "/r/NotDesires\t/c/en/cat\t/c/en/water\n"
                       "/r/PartOf\t/c/en/tail/n\t/c/en/dog\n");
  const auto r = run({"ingest-kg", "--input", p("kg.tsv"), "--output", p("kg_graph.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("kept 2"), std::string::npos) << r.out;
  const auto g = load_graph(dir / "kg_graph.tsv");
  EXPECT_TRUE(g.adjacent(C("dog"), C("animal")));
  EXPECT_TRUE(g.adjacent(C("tail"), C("dog")));
}

TEST_F(CliFixture, ConfigFileSuppliesDataPaths) {
  fixtures::write_file(dir / "cfg.json", "{\"data\": {\"relations\": \"" + p("rel.relc") + "\", \"classifier\": \"" +
                                             p("clf.infc") + "\"}}");
  const auto r = run({"--config", p("cfg.json"), "eval", "--method", "relbert", "--dataset", p("toy.jsonl")});
  EXPECT_EQ(r.code, 0) << r.err;
  fixtures::write_file(dir / "bad.json", "{\"unknown\": 1}");
  EXPECT_EQ(run({"--config", p("bad.json"), "report", p("none.jsonl")}).code, 2);
}
