#pragma once

// Brute-force reference implementations over plain containers. Nothing here
// calls into the library's numerics.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, Mat[row][col]
using Key = std::pair<std::string, std::string>;

struct World {
  std::map<Key, Vec> relations;
  std::map<std::string, std::set<std::string>> adjacency;
  /// KG labels keyed by the (smaller, larger) concept pair.
  std::map<Key, std::set<std::string>> labels;
  std::map<std::string, Vec> words;

  const Vec* relation(const std::string& a, const std::string& b) const;
  bool adjacent(const std::string& x, const std::string& y) const;
  std::set<std::string> labels_of(const std::string& x, const std::string& y) const;
};

struct Model {
  Mat A;  // m x 2d
  Vec b;  // m
  Mat W;  // d x m
  Vec c;  // d
};

struct ChainRef {
  std::string x;
  Vec first;
  Vec second;
};

struct Question {
  Key query;
  std::vector<Key> candidates;
};

struct Verdict {
  std::size_t chosen = 0;
  std::vector<double> scores;
  bool fallback = false;
};

double dot(const Vec& u, const Vec& v);
double cosine(const Vec& u, const Vec& v);
double gelu(double x);
double sigmoid(double z);
double logistic(const Vec& w, double bias, const Vec& r);

std::size_t argmax(const std::vector<double>& scores);

/// k nearest tokens by cosine, excluding `word`; ties by token.
std::vector<std::string> top_k(const std::string& word, std::size_t k, const std::map<std::string, Vec>& table);

/// Every x outside {a, b} adjacent to both, optionally widened by smoothing
/// neighbor sets of a and b.
std::set<std::string> intermediates(const World& w, const std::string& a, const std::string& b,
                                    const std::set<std::string>& smooth_a, const std::set<std::string>& smooth_b);

/// Chains (x, r_ax, r_xb) over the unsmoothed intermediates with both legs stored.
std::vector<ChainRef> chains(const World& w, const std::string& a, const std::string& b);

Vec compose(const Vec& r1, const Vec& r2, const Model& m);
Vec decode(const Vec& h, const Model& m);
Vec condense(const std::vector<ChainRef>& cs, const Model& m);

double sim1(const ChainRef& p, const ChainRef& q);
double sim2(const ChainRef& p, const ChainRef& q, const Model& m);
double sim3(const ChainRef& p, const ChainRef& q);

using Sim = std::function<double(const ChainRef&, const ChainRef&)>;
double comp(const std::vector<ChainRef>& query, const std::vector<ChainRef>& candidate, const Sim& sim);

/// nullopt when the query embedding is missing.
std::optional<Verdict> relbert(const World& w, const Question& q);
std::optional<Verdict> direct(const World& w, const Question& q, const Sim& sim);
std::optional<Verdict> condensed(const World& w, const Question& q, const Model& m);
Verdict cn_types(const World& w, const Question& q);

/// Negative-cosine loss summed over (chains, target) examples.
double condenser_loss(const std::vector<std::pair<std::vector<ChainRef>, Vec>>& examples, const Model& m);

}  // namespace oracle
