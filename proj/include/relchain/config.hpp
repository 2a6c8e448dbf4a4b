#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relchain/concept_graph.hpp"
#include "relchain/condenser.hpp"
#include "relchain/informativeness.hpp"
#include "relchain/solver.hpp"

namespace relchain {

/// Default input locations; any may be overridden on the command line.
struct DataPaths {
  std::string relations;
  std::string classifier;
  std::string graph;
  std::vector<std::string> vectors;
  std::string smoothing_vectors;
  std::string condenser;
};

/// Every tunable the pipeline uses, with its default.
struct AppConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<double> buckets = {0.0, 0.25, 0.5, 0.75, 1.0};
  ClassifierTrainConfig informativeness{};
  LinkPredictionOptions augment{};
  IntermediateOptions intermediates{};
  CondenserTrainConfig condenser{};
  HybridOptions hybrid{};
  KgIngestOptions kg{};
  DataPaths data{};
};

/// Overrides the fields present in the JSON document; unknown keys are errors.
void apply_config_json(AppConfig& cfg, std::istream& in, const std::string& source = "<config>");
AppConfig load_config(const std::filesystem::path& path);

/// Every field as JSON; feeding this back through apply_config_json is a no-op.
void write_config_json(const AppConfig& cfg, std::ostream& out);

/// `explicit_path` if given, else $RELCHAIN_CONFIG if set, else defaults.
AppConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace relchain
