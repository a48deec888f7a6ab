#include "nats/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nats/errors.hpp"

namespace nats {

using nlohmann::json;

double DelaySpec::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::Constant:
      return a;
    case Kind::Uniform:
      return std::uniform_real_distribution<double>(a, b)(rng);
    case Kind::Exponential:
      return a <= 0.0 ? 0.0
                      : std::exponential_distribution<double>(1.0 / a)(rng);
  }
  return 0.0;
}

double SensingDuration::sample(std::mt19937_64& rng) const {
  double extra =
      jitter > 0.0 ? std::uniform_real_distribution<double>(0.0, jitter)(rng) : 0.0;
  return base + extra;
}

namespace {

json noise_to_json(const DepthNoiseModel& noise) {
  return json{{"distances", noise.distances()}, {"variances", noise.variances()}};
}

DepthNoiseModel noise_from_json(const json& j) {
  return DepthNoiseModel(j.at("distances").get<std::vector<double>>(),
                         j.at("variances").get<std::vector<double>>());
}

json delay_to_json(const DelaySpec& d) {
  switch (d.kind) {
    case DelaySpec::Kind::Constant:
      return json{{"kind", "constant"}, {"value", d.a}};
    case DelaySpec::Kind::Uniform:
      return json{{"kind", "uniform"}, {"low", d.a}, {"high", d.b}};
    case DelaySpec::Kind::Exponential:
      return json{{"kind", "exponential"}, {"mean", d.a}};
  }
  return json{};
}

DelaySpec delay_from_json(const json& j) {
  DelaySpec d;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    d.kind = DelaySpec::Kind::Constant;
    d.a = j.at("value").get<double>();
  } else if (kind == "uniform") {
    d.kind = DelaySpec::Kind::Uniform;
    d.a = j.at("low").get<double>();
    d.b = j.at("high").get<double>();
  } else if (kind == "exponential") {
    d.kind = DelaySpec::Kind::Exponential;
    d.a = j.at("mean").get<double>();
  } else {
    throw ConfigError("unknown delay kind '" + kind + "'");
  }
  return d;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (agents < 1) throw ConfigError("need at least one agent");
  if (num_objects < 0 || num_objects > grid.cells()) {
    throw ConfigError("object count outside [0, cells]");
  }
  if (policies.empty() ||
      (policies.size() != 1 && static_cast<int>(policies.size()) != agents)) {
    throw ConfigError("policies must list one entry or one per agent");
  }
  if (travel_weight < 0.0) throw ConfigError("travel weight must be >= 0");
  if (!(recovery_threshold > 0.0 && recovery_threshold < 1.0)) {
    throw ConfigError("recovery threshold must lie in (0,1)");
  }
  if (comm.drop_probability < 0.0 || comm.drop_probability > 1.0) {
    throw ConfigError("drop probability must lie in [0,1]");
  }
  if (budget < 0) throw ConfigError("budget must be >= 0");
  if (trials < 1) throw ConfigError("need at least one trial");
  if (sbl.em_iterations < 0) throw ConfigError("em_iterations must be >= 0");
  if (sbl.a < 0.0 || sbl.b < 0.0 || sbl.jitter < 0.0) {
    throw ConfigError("sbl hyperparameters must be non-negative");
  }
  if (action_radius && *action_radius < 0) {
    throw ConfigError("action radius must be >= 0");
  }
  if (duration.base < 0.0 || duration.jitter < 0.0) {
    throw ConfigError("sensing duration must be non-negative");
  }
  if (start_cell && (*start_cell < 0 || *start_cell >= grid.cells())) {
    throw ConfigError("start cell outside grid");
  }
  if (dem) {
    if (dem->spacing <= 0.0) throw ConfigError("dem spacing must be positive");
    if (dem->visible_fraction_threshold < 0.0 ||
        dem->visible_fraction_threshold > 1.0) {
      throw ConfigError("visible fraction threshold must lie in [0,1]");
    }
    if (dem->block_stride < 1) throw ConfigError("dem block stride must be >= 1");
  }
}

PolicyKind ExperimentConfig::policy_for(int agent_id) const {
  return policies.size() == 1 ? policies.front()
                              : policies[static_cast<std::size_t>(agent_id)];
}

int ExperimentConfig::resolved_start_cell() const {
  if (start_cell) return *start_cell;
  return grid.flatten(grid.rows / 2, grid.cols / 2);
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["grid"] = {{"rows", grid.rows}, {"cols", grid.cols}, {"cell_size", grid.cell_size}};
  j["objects"] = num_objects;
  j["agents"] = agents;
  json pol = json::array();
  for (PolicyKind p : policies) pol.push_back(to_string(p));
  j["policies"] = pol;
  j["noise"] = noise_to_json(noise);
  if (model_noise) j["model_noise"] = noise_to_json(*model_noise);
  j["action_radius"] = action_radius ? json(*action_radius) : json(nullptr);
  j["travel_weight"] = travel_weight;
  j["sbl"] = {{"a", sbl.a},
              {"b", sbl.b},
              {"em_iterations", sbl.em_iterations},
              {"jitter", sbl.jitter},
              {"prior_var_floor", sbl.prior_var_floor}};
  j["recovery_threshold"] = recovery_threshold;
  j["budget"] = budget;
  j["seed"] = seed;
  j["trials"] = trials;
  j["comm"] = {{"drop_probability", comm.drop_probability},
               {"delay", delay_to_json(comm.delay)}};
  j["duration"] = {{"base", duration.base}, {"jitter", duration.jitter}};
  j["start_cell"] = start_cell ? json(*start_cell) : json(nullptr);
  j["snapshot_beliefs"] = snapshot_beliefs;
  if (dem) {
    j["dem"] = {{"file", dem->file},
                {"spacing", dem->spacing},
                {"observer_height", dem->observer_height},
                {"visible_fraction_threshold", dem->visible_fraction_threshold},
                {"block_stride", dem->block_stride},
                {"nodata_fill",
                 dem->nodata_fill ? json(*dem->nodata_fill) : json(nullptr)}};
  }
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    int version = j.at("schema_version").get<int>();
    if (version != kConfigSchemaVersion) {
      throw ConfigError("unsupported config schema version " +
                        std::to_string(version));
    }
    ExperimentConfig cfg;
    const json& g = j.at("grid");
    cfg.grid = GridEnvironment(g.at("rows").get<int>(), g.at("cols").get<int>(),
                               g.value("cell_size", 1.0));
    cfg.num_objects = j.at("objects").get<int>();
    cfg.agents = j.at("agents").get<int>();
    cfg.policies.clear();
    if (j.at("policies").is_string()) {
      cfg.policies.push_back(policy_from_string(j.at("policies").get<std::string>()));
    } else {
      for (const auto& p : j.at("policies")) {
        cfg.policies.push_back(policy_from_string(p.get<std::string>()));
      }
    }
    cfg.noise = noise_from_json(j.at("noise"));
    if (j.contains("model_noise") && !j.at("model_noise").is_null()) {
      cfg.model_noise = noise_from_json(j.at("model_noise"));
    }
    if (j.contains("action_radius") && !j.at("action_radius").is_null()) {
      cfg.action_radius = j.at("action_radius").get<int>();
    }
    cfg.travel_weight = j.value("travel_weight", 0.0);
    if (j.contains("sbl")) {
      const json& s = j.at("sbl");
      cfg.sbl.a = s.value("a", 0.0);
      cfg.sbl.b = s.value("b", 0.0);
      cfg.sbl.em_iterations = s.value("em_iterations", 1);
      cfg.sbl.jitter = s.value("jitter", 1e-9);
      cfg.sbl.prior_var_floor = s.value("prior_var_floor", 1e-8);
    }
    cfg.recovery_threshold = j.value("recovery_threshold", 0.5);
    cfg.budget = j.at("budget").get<long>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.trials = j.value("trials", 1);
    if (j.contains("comm")) {
      const json& c = j.at("comm");
      cfg.comm.drop_probability = c.value("drop_probability", 0.0);
      if (c.contains("delay")) cfg.comm.delay = delay_from_json(c.at("delay"));
    }
    if (j.contains("duration")) {
      cfg.duration.base = j.at("duration").value("base", 1.0);
      cfg.duration.jitter = j.at("duration").value("jitter", 0.2);
    }
    if (j.contains("start_cell") && !j.at("start_cell").is_null()) {
      cfg.start_cell = j.at("start_cell").get<int>();
    }
    cfg.snapshot_beliefs = j.value("snapshot_beliefs", false);
    if (j.contains("dem") && !j.at("dem").is_null()) {
      const json& d = j.at("dem");
      DemScenario scenario;
      scenario.file = d.at("file").get<std::string>();
      scenario.spacing = d.value("spacing", 30.0);
      scenario.observer_height = d.value("observer_height", 2.0);
      scenario.visible_fraction_threshold =
          d.value("visible_fraction_threshold", 0.5);
      scenario.block_stride = d.value("block_stride", 1);
      if (d.contains("nodata_fill") && !d.at("nodata_fill").is_null()) {
        scenario.nodata_fill = d.at("nodata_fill").get<double>();
      }
      cfg.dem = scenario;
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write config file '" + path + "'");
  }
  out << to_json() << '\n';
}

ExperimentConfig ExperimentConfig::benchmark_preset() {
  ExperimentConfig cfg;
  cfg.grid = GridEnvironment(16, 16, 1.0);
  cfg.num_objects = 1;
  cfg.agents = 4;
  cfg.policies = {PolicyKind::Nats};
  cfg.noise = DepthNoiseModel::benchmark();
  cfg.action_radius = std::nullopt;
  cfg.travel_weight = 0.0;
  cfg.sbl = SblConfig{};
  cfg.recovery_threshold = 0.5;
  cfg.budget = 300;
  cfg.seed = 1;
  cfg.trials = 40;
  cfg.comm = CommConfig{};
  cfg.duration = SensingDuration{};
  return cfg;
}

}  // namespace nats
