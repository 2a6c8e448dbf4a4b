#include "relchain/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "io_util.hpp"

namespace relchain {

using nlohmann::json;

namespace {

ConceptPair parse_pair(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
    throw Error(std::string(what) + " must be a list of two strings");
  return {Concept(j[0].get<std::string>()), Concept(j[1].get<std::string>())};
}

json score_to_json(double s) { return std::isfinite(s) ? json(s) : json(nullptr); }

double score_from_json(const json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

std::string format_bound(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string format_accuracy(double acc) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * acc);
  return buf;
}

}  // namespace

Dataset read_dataset(std::istream& in, const std::string& name, const std::string& source) {
  Dataset ds{name, {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    try {
      const json j = json::parse(line);
      AnalogyQuestion q;
      q.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                              : name + ":" + std::to_string(line_no);
      q.query = parse_pair(j.at("stem"), "stem");
      const auto& choice = j.at("choice");
      if (!choice.is_array()) throw Error("choice must be a list");
      for (const auto& c : choice) q.candidates.push_back(parse_pair(c, "choice entry"));
      const auto& answer = j.at("answer");
      if (!answer.is_number_integer() || answer.get<long long>() < 0) throw Error("answer must be a non-negative integer");
      q.gold = answer.get<std::size_t>();
      validate(q);
      ds.questions.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (ds.questions.empty()) throw ParseError(source, line_no, "dataset is empty");
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_dataset(in, path.stem().string(), path.string());
}

std::set<Concept> dataset_words(const Dataset& ds) {
  std::set<Concept> words;
  for (const auto& q : ds.questions) {
    words.insert(q.query.first);
    words.insert(q.query.second);
    for (const auto& c : q.candidates) {
      words.insert(c.first);
      words.insert(c.second);
    }
  }
  return words;
}

std::size_t bucket_index(double confidence, std::span<const double> bounds) {
  if (bounds.size() < 2) throw Error("need at least two bucket bounds");
  const std::size_t buckets = bounds.size() - 1;
  for (std::size_t i = 0; i + 1 < buckets; ++i)
    if (confidence < bounds[i + 1]) return i;
  return buckets - 1;
}

EvalReport summarize(const std::string& dataset, const std::string& method, std::span<const VerdictRecord> records,
                     std::span<const double> bounds) {
  EvalReport report;
  report.dataset = dataset;
  report.method = method;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) report.buckets.push_back({bounds[i], bounds[i + 1], 0, 0});
  for (const auto& r : records) {
    const bool ok = r.correct();
    BucketStats& cell = r.confidence ? report.buckets[bucket_index(*r.confidence, bounds)] : report.unscored;
    ++cell.count;
    cell.correct += ok ? 1 : 0;
    ++report.total;
    report.correct += ok ? 1 : 0;
  }
  return report;
}

std::vector<AggregateRow> aggregate(std::span<const EvalReport> reports) {
  std::vector<AggregateRow> rows;
  if (reports.empty()) return rows;
  auto add_row = [&](const std::string& label, auto&& cell_of) {
    AggregateRow row{label};
    std::size_t correct = 0, cells = 0;
    double macro_sum = 0.0;
    for (const auto& r : reports) {
      const BucketStats cell = cell_of(r);
      row.count += cell.count;
      correct += cell.correct;
      if (cell.count) {
        macro_sum += cell.accuracy();
        ++cells;
      }
    }
    row.macro = cells ? macro_sum / static_cast<double>(cells) : 0.0;
    row.micro = row.count ? static_cast<double>(correct) / static_cast<double>(row.count) : 0.0;
    rows.push_back(row);
  };
  const auto& first = reports.front();
  for (std::size_t b = 0; b < first.buckets.size(); ++b)
    add_row(bucket_label(first.buckets[b], b + 1 == first.buckets.size()),
            [b](const EvalReport& r) { return r.buckets.at(b); });
  add_row("unscored", [](const EvalReport& r) { return r.unscored; });
  add_row("all", [](const EvalReport& r) { return BucketStats{0.0, 1.0, r.total, r.correct}; });
  return rows;
}

ConfidenceFn relbert_confidence(const RelationStore& store, const InformativenessClassifier& clf) {
  return [&store, &clf](const AnalogyQuestion& q) -> std::optional<double> {
    if (!store.contains(q.query.first, q.query.second)) return std::nullopt;
    return confidence(q, store, clf);
  };
}

EvalRun evaluate(const Dataset& ds, const std::string& method, const SolveFn& solve, const ConfidenceFn& confidence_of,
                 std::span<const double> bounds, unsigned threads) {
  EvalRun run;
  run.records.resize(ds.questions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ds.questions.size(); i = next++) {
      const auto& q = ds.questions[i];
      auto& rec = run.records[i];
      rec.dataset = ds.name;
      rec.id = q.id;
      rec.method = method;
      rec.gold = q.gold;
      try {
        rec.verdict = solve(q);
        if (rec.verdict->confidence) rec.confidence = rec.verdict->confidence;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      if (!rec.confidence && confidence_of) {
        try {
          rec.confidence = confidence_of(q);
        } catch (const std::exception&) {
          rec.confidence.reset();
        }
      }
      if (rec.verdict && rec.confidence) rec.verdict->confidence = rec.confidence;
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(ds.questions.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  run.report = summarize(ds.name, method, run.records, bounds);
  return run;
}

void write_verdicts(std::span<const VerdictRecord> records, std::ostream& out) {
  for (const auto& r : records) {
    json j;
    j["dataset"] = r.dataset;
    j["id"] = r.id;
    j["method"] = r.method;
    j["gold"] = r.gold;
    j["confidence"] = r.confidence ? json(*r.confidence) : json(nullptr);
    if (r.verdict) {
      const auto& v = *r.verdict;
      j["chosen"] = v.chosen;
      json scores = json::array();
      for (double s : v.scores) scores.push_back(score_to_json(s));
      j["scores"] = std::move(scores);
      j["fallback"] = v.fallback_used;
      j["candidate_fallback"] = v.candidate_fallback;
      j["degenerate"] = v.degenerate;
      if (!v.branch.empty()) j["branch"] = v.branch;
      if (v.explanation) {
        j["explanation"] = {{"query", v.explanation->query_intermediate.str()},
                            {"candidate", v.explanation->candidate_intermediate.str()},
                            {"score", v.explanation->score}};
      }
    } else {
      j["chosen"] = nullptr;
      j["error"] = r.error;
    }
    out << j.dump() << '\n';
  }
}

std::vector<VerdictRecord> read_verdicts(std::istream& in, const std::string& source) {
  std::vector<VerdictRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    try {
      const json j = json::parse(line);
      VerdictRecord r;
      r.dataset = j.at("dataset").get<std::string>();
      r.id = j.at("id").get<std::string>();
      r.method = j.at("method").get<std::string>();
      r.gold = j.at("gold").get<std::size_t>();
      if (!j.at("confidence").is_null()) r.confidence = j["confidence"].get<double>();
      if (!j.at("chosen").is_null()) {
        SolverVerdict v;
        v.method = r.method;
        v.chosen = j["chosen"].get<std::size_t>();
        v.confidence = r.confidence;
        for (const auto& s : j.at("scores")) v.scores.push_back(score_from_json(s));
        v.fallback_used = j.value("fallback", false);
        v.candidate_fallback = j.value("candidate_fallback", std::vector<bool>{});
        v.degenerate = j.value("degenerate", false);
        v.branch = j.value("branch", std::string());
        if (j.contains("explanation")) {
          const auto& e = j["explanation"];
          v.explanation = Explanation{Concept(e.at("query").get<std::string>()),
                                      Concept(e.at("candidate").get<std::string>()), e.at("score").get<double>()};
        }
        r.verdict = std::move(v);
      } else {
        r.error = j.value("error", std::string());
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return out;
}

std::vector<EvalReport> reports_from_verdicts(std::span<const VerdictRecord> records, std::span<const double> bounds) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<VerdictRecord>> groups;
  for (const auto& r : records) {
    auto key = std::make_pair(r.dataset, r.method);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r);
  }
  std::vector<EvalReport> out;
  for (const auto& key : order) out.push_back(summarize(key.first, key.second, groups[key], bounds));
  return out;
}

std::string bucket_label(const BucketStats& b, bool last) {
  return "[" + format_bound(b.lower) + "," + format_bound(b.upper) + (last ? "]" : ")");
}

void render_table(std::span<const EvalReport> reports, std::ostream& out) {
  if (reports.empty()) return;
  std::vector<std::string> headers{"Conf"};
  for (const auto& r : reports) headers.push_back(r.dataset + "/" + r.method);
  const bool pooled = reports.size() > 1;
  if (pooled) {
    headers.emplace_back("macro");
    headers.emplace_back("micro");
  }
  const auto agg = aggregate(reports);

  std::vector<std::vector<std::string>> rows;
  auto cell = [](const BucketStats& b) { return b.count ? format_accuracy(b.accuracy()) + " (" + std::to_string(b.count) + ")" : "- (0)"; };
  const auto& first = reports.front();
  for (std::size_t b = 0; b < first.buckets.size(); ++b) {
    std::vector<std::string> row{bucket_label(first.buckets[b], b + 1 == first.buckets.size())};
    for (const auto& r : reports) row.push_back(cell(r.buckets[b]));
    if (pooled) {
      row.push_back(format_accuracy(agg[b].macro));
      row.push_back(format_accuracy(agg[b].micro));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> unscored{"unscored"}, overall{"all"};
  for (const auto& r : reports) {
    unscored.push_back(cell(r.unscored));
    overall.push_back(cell(BucketStats{0.0, 1.0, r.total, r.correct}));
  }
  if (pooled) {
    const auto& u = agg[first.buckets.size()];
    const auto& a = agg[first.buckets.size() + 1];
    unscored.push_back(format_accuracy(u.macro));
    unscored.push_back(format_accuracy(u.micro));
    overall.push_back(format_accuracy(a.macro));
    overall.push_back(format_accuracy(a.micro));
  }
  rows.push_back(std::move(unscored));
  rows.push_back(std::move(overall));

  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    width[c] = headers[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  auto print_row = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    out << '\n';
  };
  print_row(headers);
  std::size_t total_width = 0;
  for (auto w : width) total_width += w + 2;
  out << std::string(total_width - 2, '-') << '\n';
  for (const auto& row : rows) print_row(row);
  out << std::left;
}

void render_csv(std::span<const EvalReport> reports, std::ostream& out) {
  out << "dataset,bucket,count,accuracy,method\n";
  auto line = [&](const std::string& ds, const std::string& bucket, std::size_t count, double acc,
                  const std::string& method) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", acc);
    out << ds << ',' << '"' << bucket << '"' << ',' << count << ',' << buf << ',' << method << '\n';
  };
  for (const auto& r : reports) {
    for (std::size_t b = 0; b < r.buckets.size(); ++b)
      line(r.dataset, bucket_label(r.buckets[b], b + 1 == r.buckets.size()), r.buckets[b].count,
           r.buckets[b].accuracy(), r.method);
    line(r.dataset, "unscored", r.unscored.count, r.unscored.accuracy(), r.method);
    line(r.dataset, "all", r.total, r.accuracy(), r.method);
  }
  if (reports.size() > 1) {
    std::string method = reports.front().method;
    for (const auto& r : reports)
      if (r.method != method) method = "mixed";
    for (const auto& row : aggregate(reports)) {
      line("macro", row.label, row.count, row.macro, method);
      line("micro", row.label, row.count, row.micro, method);
    }
  }
}

}  // namespace relchain
