#include "relchain/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "io_util.hpp"

namespace relchain {

using nlohmann::json;

namespace {

std::string_view method_name(ChainMethod m) { return m == ChainMethod::condensed ? "condensed" : "direct"; }

ChainMethod parse_method(const std::string& s) {
  if (s == "condensed") return ChainMethod::condensed;
  if (s == "direct") return ChainMethod::direct;
  throw Error("unknown chain method: " + s);
}

json to_json(const AppConfig& c) {
  const auto& inf = c.informativeness;
  const auto& cond = c.condenser;
  return {
      {"seed", c.seed},
      {"threads", c.threads},
      {"buckets", c.buckets},
      {"informativeness", {{"lr", inf.lr}, {"epochs", inf.epochs}, {"l2", inf.l2}}},
      {"augment", {{"k", c.augment.k}, {"threshold", c.augment.threshold}}},
      {"intermediates",
       {{"smoothing", c.intermediates.smoothing},
        {"smoothing_k", c.intermediates.smoothing_k},
        {"cap", c.intermediates.cap}}},
      {"condenser",
       {{"latent_dim", cond.latent_dim},
        {"lr", cond.lr},
        {"epochs", cond.epochs},
        {"batch_size", cond.batch_size},
        {"informativeness_threshold", cond.informativeness_threshold},
        {"beta1", cond.beta1},
        {"beta2", cond.beta2},
        {"epsilon", cond.epsilon},
        {"validation_fraction", cond.validation_fraction}}},
      {"hybrid",
       {{"threshold", c.hybrid.threshold},
        {"chain_method", method_name(c.hybrid.chain_method)},
        {"similarity", to_string(c.hybrid.similarity)}}},
      {"kg", {{"language", c.kg.language}, {"exclusions", c.kg.exclusions}}},
      {"data",
       {{"relations", c.data.relations},
        {"classifier", c.data.classifier},
        {"graph", c.data.graph},
        {"vectors", c.data.vectors},
        {"smoothing_vectors", c.data.smoothing_vectors},
        {"condenser", c.data.condenser}}},
  };
}

AppConfig from_json(const json& j) {
  AppConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.threads = j.at("threads").get<unsigned>();
  c.buckets = j.at("buckets").get<std::vector<double>>();
  const auto& inf = j.at("informativeness");
  c.informativeness.lr = inf.at("lr").get<double>();
  c.informativeness.epochs = inf.at("epochs").get<int>();
  c.informativeness.l2 = inf.at("l2").get<double>();
  c.augment.k = j.at("augment").at("k").get<std::size_t>();
  c.augment.threshold = j.at("augment").at("threshold").get<double>();
  const auto& im = j.at("intermediates");
  c.intermediates.smoothing = im.at("smoothing").get<bool>();
  c.intermediates.smoothing_k = im.at("smoothing_k").get<std::size_t>();
  c.intermediates.cap = im.at("cap").get<std::size_t>();
  const auto& cond = j.at("condenser");
  c.condenser.latent_dim = cond.at("latent_dim").get<std::size_t>();
  c.condenser.lr = cond.at("lr").get<double>();
  c.condenser.epochs = cond.at("epochs").get<int>();
  c.condenser.batch_size = cond.at("batch_size").get<std::size_t>();
  c.condenser.informativeness_threshold = cond.at("informativeness_threshold").get<double>();
  c.condenser.beta1 = cond.at("beta1").get<double>();
  c.condenser.beta2 = cond.at("beta2").get<double>();
  c.condenser.epsilon = cond.at("epsilon").get<double>();
  c.condenser.validation_fraction = cond.at("validation_fraction").get<double>();
  const auto& hy = j.at("hybrid");
  c.hybrid.threshold = hy.at("threshold").get<double>();
  c.hybrid.chain_method = parse_method(hy.at("chain_method").get<std::string>());
  c.hybrid.similarity = parse_chain_similarity(hy.at("similarity").get<std::string>());
  c.kg.language = j.at("kg").at("language").get<std::string>();
  c.kg.exclusions = j.at("kg").at("exclusions").get<std::set<std::string>>();
  const auto& d = j.at("data");
  c.data.relations = d.at("relations").get<std::string>();
  c.data.classifier = d.at("classifier").get<std::string>();
  c.data.graph = d.at("graph").get<std::string>();
  c.data.vectors = d.at("vectors").get<std::vector<std::string>>();
  c.data.smoothing_vectors = d.at("smoothing_vectors").get<std::string>();
  c.data.condenser = d.at("condenser").get<std::string>();

  c.informativeness.seed = c.seed;
  c.condenser.seed = c.seed;
  if (c.buckets.size() < 2) throw Error("buckets needs at least two bounds");
  for (std::size_t i = 1; i < c.buckets.size(); ++i)
    if (!(c.buckets[i] > c.buckets[i - 1])) throw Error("bucket bounds must be strictly increasing");
  if (c.threads == 0) throw Error("threads must be positive");
  return c;
}

void check_keys(const json& user, const json& defaults, const std::string& prefix) {
  if (!user.is_object()) throw Error(prefix.empty() ? "config must be a JSON object" : prefix + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!defaults.contains(key)) throw Error("unknown config key: " + path);
    if (defaults[key].is_object()) check_keys(value, defaults[key], path);
  }
}

}  // namespace

void apply_config_json(AppConfig& cfg, std::istream& in, const std::string& source) {
  json user;
  try {
    user = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  }
  json merged = to_json(cfg);
  try {
    check_keys(user, merged, "");
    merged.merge_patch(user);
    cfg = from_json(merged);
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(source, 0, e.what());
  }
}

AppConfig load_config(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  AppConfig cfg;
  apply_config_json(cfg, in, path.string());
  return cfg;
}

void write_config_json(const AppConfig& cfg, std::ostream& out) { out << to_json(cfg).dump(2) << '\n'; }

AppConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv("RELCHAIN_CONFIG"); env && *env) return load_config(env);
  return AppConfig{};
}

}  // namespace relchain
