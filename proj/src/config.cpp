#include "regcot/config.hpp"

#include "regcot/errors.hpp"
#include "regcot/fsio.hpp"

#include <json.hpp>

#include <set>

namespace regcot {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void RunConfig::validate() const {
  if (timesteps < 1) throw ConfigError("timesteps must be positive");
  if (pairs_per_step < 1) throw ConfigError("pairs_per_step must be positive");
  if (rounds < 1) throw ConfigError("rounds must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0,1)");
  if (min_area < 1) throw ConfigError("min_area must be positive");
  if (j_samples < 1) throw ConfigError("j_samples must be positive");
  regcot::validate(loss_config());
}

ScoringConfig RunConfig::scoring_config() const {
  return {timesteps, effective_gamma(), j_samples, ablations.single_evaluator};
}

LossConfig RunConfig::loss_config() const {
  return {beta, margin_scale, learning_rate, epochs, batch_size, ablations.naive_dpo};
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config field '" + where + key + "'");
  }
}

void read_path(const json& j, const char* key, const fs::path& base, fs::path& out) {
  std::string s;
  read_field(j, key, s);
  if (s.empty()) return;
  fs::path p(s);
  out = (p.is_absolute() ? p : base / p).lexically_normal();
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"timesteps", "pairs_per_step", "rounds", "gamma", "beta", "margin_scale", "tau", "min_area",
                  "j_samples", "batch_size", "epochs", "learning_rate", "seed", "pinned_reference", "ablations",
                  "paths"},
                 "");
  RunConfig cfg;
  read_field(j, "timesteps", cfg.timesteps);
  read_field(j, "pairs_per_step", cfg.pairs_per_step);
  read_field(j, "rounds", cfg.rounds);
  read_field(j, "gamma", cfg.gamma);
  read_field(j, "beta", cfg.beta);
  read_field(j, "margin_scale", cfg.margin_scale);
  read_field(j, "tau", cfg.tau);
  read_field(j, "min_area", cfg.min_area);
  read_field(j, "j_samples", cfg.j_samples);
  read_field(j, "batch_size", cfg.batch_size);
  read_field(j, "epochs", cfg.epochs);
  read_field(j, "learning_rate", cfg.learning_rate);
  read_field(j, "seed", cfg.seed);
  read_field(j, "pinned_reference", cfg.pinned_reference);
  if (j.contains("ablations")) {
    const auto& a = j.at("ablations");
    if (!a.is_object()) throw ConfigError("'ablations' must be an object");
    reject_unknown(a, {"naive_dpo", "no_iteration", "gamma_zero", "single_evaluator"}, "ablations.");
    read_field(a, "naive_dpo", cfg.ablations.naive_dpo);
    read_field(a, "no_iteration", cfg.ablations.no_iteration);
    read_field(a, "gamma_zero", cfg.ablations.gamma_zero);
    read_field(a, "single_evaluator", cfg.ablations.single_evaluator);
  }
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    if (!p.is_object()) throw ConfigError("'paths' must be an object");
    reject_unknown(p,
                   {"hypotheses", "inputs", "heatmaps_dir", "images_dir", "fixture_bank", "output_dir",
                    "initial_checkpoint"},
                   "paths.");
    read_path(p, "hypotheses", base_dir, cfg.paths.hypotheses);
    read_path(p, "inputs", base_dir, cfg.paths.inputs);
    read_path(p, "heatmaps_dir", base_dir, cfg.paths.heatmaps_dir);
    read_path(p, "images_dir", base_dir, cfg.paths.images_dir);
    read_path(p, "fixture_bank", base_dir, cfg.paths.fixture_bank);
    read_path(p, "output_dir", base_dir, cfg.paths.output_dir);
    read_path(p, "initial_checkpoint", base_dir, cfg.paths.initial_checkpoint);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, fs::absolute(path).parent_path());
}

std::string dump_config(const RunConfig& cfg) {
  ordered_json j;
  j["timesteps"] = cfg.timesteps;
  j["pairs_per_step"] = cfg.pairs_per_step;
  j["rounds"] = cfg.rounds;
  j["gamma"] = cfg.gamma;
  j["beta"] = cfg.beta;
  j["margin_scale"] = cfg.margin_scale;
  j["tau"] = cfg.tau;
  j["min_area"] = cfg.min_area;
  j["j_samples"] = cfg.j_samples;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  j["pinned_reference"] = cfg.pinned_reference;
  j["ablations"] = {{"naive_dpo", cfg.ablations.naive_dpo},
                    {"no_iteration", cfg.ablations.no_iteration},
                    {"gamma_zero", cfg.ablations.gamma_zero},
                    {"single_evaluator", cfg.ablations.single_evaluator}};
  const auto abs = [](const fs::path& p) { return p.empty() ? std::string() : fs::absolute(p).lexically_normal().string(); };
  ordered_json paths;
  paths["hypotheses"] = abs(cfg.paths.hypotheses);
  paths["inputs"] = abs(cfg.paths.inputs);
  paths["heatmaps_dir"] = abs(cfg.paths.heatmaps_dir);
  paths["images_dir"] = abs(cfg.paths.images_dir);
  paths["fixture_bank"] = abs(cfg.paths.fixture_bank);
  paths["output_dir"] = abs(cfg.paths.output_dir);
  paths["initial_checkpoint"] = abs(cfg.paths.initial_checkpoint);
  j["paths"] = paths;
  return j.dump(2) + "\n";
}

std::string config_digest(const RunConfig& cfg) { return to_hex(fnv1a(dump_config(cfg))); }

}  // namespace regcot
