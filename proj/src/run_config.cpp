#include "altbayes/run_config.hpp"

#include <fstream>
#include <istream>
#include <set>

#include "altbayes/numerics.hpp"
#include "json.hpp"

namespace altbayes {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {
    "label",       "model",     "priors",        "v_transform", "n_chains",   "burn_in",
    "n_keep",      "thin",      "seed",          "adapt_window", "target_accept", "init",
    "init_point",  "proposal",  "estimators",    "simple_mc_draws", "output_dir"};

GammaPrior parse_gamma(const json& j, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected {\"shape\": .., \"rate\": ..}");
  for (const auto& [k, v] : j.items()) {
    if (k != "shape" && k != "rate") throw UsageError(where + ": unknown key '" + k + "'");
  }
  if (!j.contains("shape") || !j.contains("rate") || !j["shape"].is_number() ||
      !j["rate"].is_number()) {
    throw UsageError(where + ": shape and rate must both be numbers");
  }
  return {j["shape"].get<double>(), j["rate"].get<double>()};
}

std::size_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_unsigned()) throw UsageError(key + " must be a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace

SamplerConfig RunConfig::default_sampler() {
  SamplerConfig s;
  s.n_chains = 1;
  s.burn_in = 50000;
  s.n_keep = 200000;
  s.thin = 1;
  s.init = InitMode::posterior_mode;
  s.proposal = ProposalKind::block;
  return s;
}

void validate(const RunConfig& config) {
  validate(config.prior);
  validate(config.sampler);
  if (config.estimators.empty()) throw UsageError("at least one estimator is required");
  for (std::size_t a = 0; a < config.estimators.size(); ++a) {
    for (std::size_t b = a + 1; b < config.estimators.size(); ++b) {
      if (config.estimators[a] == config.estimators[b]) {
        throw UsageError("estimator listed twice: " + std::string(to_string(config.estimators[a])));
      }
    }
  }
  if (config.simple_mc_draws == 0) throw UsageError("simple_mc_draws must be >= 1");
}

RunConfig parse_run_config(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) throw UsageError("config: unknown key '" + k + "'");
  }
  if (!j.contains("model")) throw UsageError("config: 'model' is required");

  RunConfig c;
  try {
    c.model = parse_model(j["model"].get<std::string>());
    c.label = j.value("label", std::string(to_string(c.model)));
    if (j.contains("priors")) {
      const json& p = j["priors"];
      if (p.is_array()) {
        if (p.size() != kParamDim) throw UsageError("config: priors must list 5 entries");
        for (std::size_t k = 0; k < kParamDim; ++k) {
          c.prior.params[k] = parse_gamma(p[k], "priors[" + std::to_string(k) + "]");
        }
      } else {
        const GammaPrior g = parse_gamma(p, "priors");
        c.prior = PriorSpec::uniform(g.shape, g.rate);
      }
    }
    if (j.contains("v_transform")) c.v_transform = parse_v_transform(j["v_transform"].get<std::string>());
    SamplerConfig& s = c.sampler;
    if (j.contains("n_chains")) s.n_chains = get_count(j["n_chains"], "n_chains");
    if (j.contains("burn_in")) s.burn_in = get_count(j["burn_in"], "burn_in");
    if (j.contains("n_keep")) s.n_keep = get_count(j["n_keep"], "n_keep");
    if (j.contains("thin")) s.thin = get_count(j["thin"], "thin");
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("adapt_window")) s.adapt_window = get_count(j["adapt_window"], "adapt_window");
    if (j.contains("target_accept")) s.target_accept = j["target_accept"].get<double>();
    if (j.contains("init")) s.init = parse_init_mode(j["init"].get<std::string>());
    if (j.contains("init_point")) s.init_point = j["init_point"].get<std::vector<double>>();
    if (j.contains("proposal")) s.proposal = parse_proposal_kind(j["proposal"].get<std::string>());
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const json& e : j["estimators"]) c.estimators.push_back(parse_estimator(e.get<std::string>()));
    }
    if (j.contains("simple_mc_draws")) {
      c.simple_mc_draws = get_count(j["simple_mc_draws"], "simple_mc_draws");
    }
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: wrong value type: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open " + path.string());
  try {
    return parse_run_config(is);
  } catch (const UsageError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

std::string run_config_to_json(const RunConfig& c, int indent) {
  json j;
  j["label"] = c.label;
  j["model"] = to_string(c.model);
  j["priors"] = json::array();
  for (const GammaPrior& g : c.prior.params) j["priors"].push_back({{"shape", g.shape}, {"rate", g.rate}});
  j["v_transform"] = to_string(c.v_transform);
  j["n_chains"] = c.sampler.n_chains;
  j["burn_in"] = c.sampler.burn_in;
  j["n_keep"] = c.sampler.n_keep;
  j["thin"] = c.sampler.thin;
  j["seed"] = c.sampler.seed;
  j["adapt_window"] = c.sampler.adapt_window;
  j["target_accept"] = c.sampler.target_accept;
  j["init"] = to_string(c.sampler.init);
  if (!c.sampler.init_point.empty()) j["init_point"] = c.sampler.init_point;
  j["proposal"] = to_string(c.sampler.proposal);
  j["estimators"] = json::array();
  for (Estimator e : c.estimators) j["estimators"].push_back(to_string(e));
  j["simple_mc_draws"] = c.simple_mc_draws;
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
  return j.dump(indent);
}

RunConfig reference_config(Model model, int setting) {
  static const GammaPrior gew[3] = {{1.0, 0.001}, {5.0, 1.0}, {125.0, 25.0}};
  static const GammaPrior gebs[3] = {{1.0, 0.001}, {2.5, 0.5}, {5.0, 1.0}};
  if (setting < 1 || setting > 3) throw UsageError("reference prior setting must be 1, 2 or 3");
  RunConfig c;
  c.model = model;
  const GammaPrior g = (model == Model::gew ? gew : gebs)[setting - 1];
  c.prior = PriorSpec::uniform(g.shape, g.rate);
  c.label = std::string(model == Model::gew ? "GEW" : "GEBS") + "_BF" + std::to_string(setting);
  return c;
}

std::vector<RunConfig> reference_configs() {
  std::vector<RunConfig> out;
  for (Model m : {Model::gew, Model::gebs}) {
    for (int s = 1; s <= 3; ++s) out.push_back(reference_config(m, s));
  }
  return out;
}

}  // namespace altbayes
