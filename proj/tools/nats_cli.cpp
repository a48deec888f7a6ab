// Command-line harness: run single simulations, sweep budgets/agents/
// sparsity, calibrate a depth-noise table from detection logs, and export
// viewshed fraction maps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nats/errors.hpp"
#include "nats/experiments.hpp"
#include "nats/runtime.hpp"
#include "nats/viewshed.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> policy;
  std::optional<int> agents;
  std::optional<int> objects;
  std::optional<long> budget;
  std::optional<double> drop;
  std::optional<double> delay;
  std::optional<int> radius;  // negative = unbounded
  std::optional<double> alpha;
  std::optional<double> threshold;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--trials", o.trials, "trials per configuration");
  cmd->add_option("--policy", o.policy, "policy for all agents "
                  "(nats|bints|ig|rnd|point)");
  cmd->add_option("--agents", o.agents, "number of agents");
  cmd->add_option("--k", o.objects, "number of hidden objects");
  cmd->add_option("--budget", o.budget, "total measurement budget");
  cmd->add_option("--drop", o.drop, "message drop probability");
  cmd->add_option("--delay", o.delay, "constant message delay");
  cmd->add_option("--radius", o.radius,
                  "action radius in cells (negative = whole map)");
  cmd->add_option("--alpha", o.alpha, "travel cost weight");
  cmd->add_option("--threshold", o.threshold, "recovery threshold");
}

nats::ExperimentConfig make_config(const std::string& config_path,
                                   const Overrides& o) {
  nats::ExperimentConfig cfg = config_path.empty()
                                   ? nats::ExperimentConfig::benchmark_preset()
                                   : nats::ExperimentConfig::load(config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.policy) cfg.policies = {nats::policy_from_string(*o.policy)};
  if (o.agents) cfg.agents = *o.agents;
  if (o.objects) cfg.num_objects = *o.objects;
  if (o.budget) cfg.budget = *o.budget;
  if (o.drop) cfg.comm.drop_probability = *o.drop;
  if (o.delay) {
    cfg.comm.delay = {nats::DelaySpec::Kind::Constant, *o.delay, 0.0};
  }
  if (o.radius) {
    if (*o.radius < 0) cfg.action_radius.reset();
    else cfg.action_radius = *o.radius;
  }
  if (o.alpha) cfg.travel_weight = *o.alpha;
  if (o.threshold) cfg.recovery_threshold = *o.threshold;
  cfg.validate();
  return cfg;
}

std::vector<long> parse_longs(const std::string& csv) {
  std::vector<long> values;
  std::istringstream in(csv);
  std::string field;
  while (std::getline(in, field, ',')) {
    if (field.empty()) continue;
    values.push_back(std::stol(field));
  }
  if (values.empty()) throw nats::ConfigError("empty value list '" + csv + "'");
  return values;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> values;
  std::istringstream in(csv);
  std::string field;
  while (std::getline(in, field, ',')) {
    if (field.empty()) continue;
    values.push_back(std::stod(field));
  }
  if (values.empty()) throw nats::ConfigError("empty value list '" + csv + "'");
  return values;
}

int run_command(const std::string& config_path, const Overrides& overrides,
                const std::string& out_dir, bool dump_config) {
  nats::ExperimentConfig cfg = make_config(config_path, overrides);
  if (dump_config) {
    std::cout << cfg.to_json() << '\n';
    return 0;
  }
  nats::SimTrace trace = nats::run_simulation(cfg);
  nats::MetricsRecord record =
      nats::metrics(trace, trace.truth, cfg.recovery_threshold);

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/trace.ndjson", std::ios::binary);
    if (!out) throw nats::ConfigError("cannot write to '" + out_dir + "'");
    trace.write_ndjson(out);
  }
  nats::write_text_file(out_dir + "/metrics.json", record.to_json() + "\n");

  std::cout << "measurements=" << trace.total_measurements
            << " recovered=" << (trace.recovered ? "true" : "false");
  if (trace.first_recovery) {
    std::cout << " first_recovery=" << *trace.first_recovery;
  }
  std::cout << '\n';
  return 0;
}

int sweep_command(const std::string& config_path, const Overrides& overrides,
                  const std::string& mode_name, const std::string& values_csv,
                  double level, const std::string& out_path) {
  nats::SweepSpec sweep;
  sweep.base = make_config(config_path, overrides);
  sweep.mode = nats::sweep_mode_from_string(mode_name);
  sweep.values = parse_longs(values_csv);
  sweep.level = level;

  std::string csv;
  if (sweep.mode == nats::SweepSpec::Mode::Budget) {
    csv = nats::recovery_curve(sweep).to_csv();
  } else {
    csv = nats::time_to_recovery(sweep).to_csv();
  }
  nats::write_text_file(out_path, csv);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int calibrate_command(const std::string& samples_path, const std::string& edges_csv,
                      double ideal, const std::string& label,
                      const std::string& out_path) {
  auto samples = nats::load_calibration_csv(samples_path);
  std::optional<std::string> filter;
  if (!label.empty()) filter = label;
  nats::DepthNoiseModel model = nats::calibrate_noise(
      samples, parse_doubles(edges_csv), ideal, filter);
  nats::write_text_file(out_path, nats::noise_table_csv(model));
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int viewshed_command(const std::string& dem_path, double spacing,
                     const std::string& observer, double height, int stride,
                     std::optional<double> nodata_fill,
                     const std::string& out_path) {
  nats::Dem dem = nats::load_dem(dem_path, nodata_fill);
  nats::CoarseGrid grid = nats::coarsen(dem, spacing);
  auto coords = parse_longs(observer);
  if (coords.size() != 2) {
    throw nats::ConfigError("observer must be 'row,col'");
  }
  int node = grid.env.flatten(static_cast<int>(coords[0]),
                              static_cast<int>(coords[1]));
  auto fractions = nats::viewshed_mask(dem, grid, node, height, stride);
  nats::write_text_file(out_path, nats::viewshed_csv(fractions, grid.env));
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized multi-agent active search simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  Overrides overrides;
  bool dump_config = false;

  CLI::App* run = app.add_subcommand("run", "run one simulation, write trace "
                                            "and metrics");
  run->add_option("--config", config_path, "config JSON (omit for the built-in "
                                           "16x16 benchmark)");
  run->add_option("--out", out_path, "output directory")->default_val("out");
  run->add_flag("--dump-config", dump_config,
                "print the effective config and exit");
  add_override_flags(run, overrides);

  std::string mode_name = "budget", values_csv;
  double level = 0.5;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep budget, agent count or "
                                                "sparsity over trials");
  sweep->add_option("--config", config_path, "config JSON (omit for preset)");
  sweep->add_option("--mode", mode_name, "budget|agents|sparsity")->required();
  sweep->add_option("--values", values_csv, "comma-separated swept values")
      ->required();
  sweep->add_option("--level", level, "target recovery rate");
  sweep->add_option("--out", out_path, "output CSV")->required();
  add_override_flags(sweep, overrides);

  std::string samples_path, edges_csv, label;
  double ideal = 1.0;
  CLI::App* calibrate = app.add_subcommand("calibrate", "fit a depth-noise "
                                                        "table from detection logs");
  calibrate->add_option("--samples", samples_path, "CSV of distance,confidence,label")
      ->required();
  calibrate->add_option("--edges", edges_csv, "distance bin edges")->required();
  calibrate->add_option("--ideal", ideal, "ideal confidence (1 = detections of "
                                          "real objects, 0 = background)");
  calibrate->add_option("--label", label, "only use samples with this label");
  calibrate->add_option("--out", out_path, "output CSV")->required();

  std::string dem_path, observer;
  double spacing = 30.0, height = 2.0;
  int stride = 1;
  std::optional<double> nodata_fill;
  CLI::App* viewshed = app.add_subcommand("viewshed", "visible fraction of every "
                                                      "coarse node from an observer");
  viewshed->add_option("--dem", dem_path, "ESRI ASCII grid")->required();
  viewshed->add_option("--spacing", spacing, "coarse node spacing in meters");
  viewshed->add_option("--observer", observer, "observer node 'row,col'")
      ->required();
  viewshed->add_option("--height", height, "observer eye height in meters");
  viewshed->add_option("--stride", stride, "pixel subsampling inside blocks");
  viewshed->add_option("--nodata-fill", nodata_fill, "replace nodata cells");
  viewshed->add_option("--out", out_path, "output CSV")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) {
      return run_command(config_path, overrides, out_path, dump_config);
    }
    if (sweep->parsed()) {
      return sweep_command(config_path, overrides, mode_name, values_csv, level,
                           out_path);
    }
    if (calibrate->parsed()) {
      return calibrate_command(samples_path, edges_csv, ideal, label, out_path);
    }
    if (viewshed->parsed()) {
      return viewshed_command(dem_path, spacing, observer, height, stride,
                              nodata_fill, out_path);
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const nats::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
