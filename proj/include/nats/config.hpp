#ifndef NATS_CONFIG_HPP
#define NATS_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nats/grid.hpp"
#include "nats/inference.hpp"
#include "nats/policy.hpp"

namespace nats {

constexpr int kConfigSchemaVersion = 1;

struct DelaySpec {
  enum class Kind { Constant, Uniform, Exponential };
  Kind kind = Kind::Constant;
  double a = 0.0;  // constant value, uniform lower bound, or exponential mean
  double b = 0.0;  // uniform upper bound

  double sample(std::mt19937_64& rng) const;
};

struct CommConfig {
  double drop_probability = 0.0;
  DelaySpec delay;
};

struct SensingDuration {
  double base = 1.0;
  double jitter = 0.2;  // uniform in [0, jitter) added per action

  double sample(std::mt19937_64& rng) const;
};

/// Terrain scenario: the waypoint grid is derived from a DEM and FOV cells
/// hidden by terrain are discarded.
struct DemScenario {
  std::string file;
  double spacing = 30.0;
  double observer_height = 2.0;
  double visible_fraction_threshold = 0.5;
  int block_stride = 1;
  std::optional<double> nodata_fill;
};

/// Everything one experiment needs; serialized as versioned JSON.
struct ExperimentConfig {
  GridEnvironment grid{16, 16, 1.0};
  int num_objects = 1;
  int agents = 4;
  std::vector<PolicyKind> policies{PolicyKind::Nats};  // per agent; single
                                                       // entry applies to all
  DepthNoiseModel noise = DepthNoiseModel::benchmark();  // what the world does
  std::optional<DepthNoiseModel> model_noise;  // what inference assumes
  std::optional<int> action_radius;            // empty = whole map
  double travel_weight = 0.0;
  SblConfig sbl;
  double recovery_threshold = 0.5;
  long budget = 300;
  std::uint64_t seed = 1;
  int trials = 40;
  CommConfig comm;
  SensingDuration duration;
  std::optional<int> start_cell;  // empty = grid center
  bool snapshot_beliefs = false;
  std::optional<DemScenario> dem;

  void validate() const;
  PolicyKind policy_for(int agent_id) const;
  int resolved_start_cell() const;
  const DepthNoiseModel& inference_noise() const {
    return model_noise ? *model_noise : noise;
  }

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;

  /// 16x16 benchmark: 4 agents, all-NATS, pyramid FOV with variances
  /// {0.005, 0.02, 0.045}, unconstrained actions, no travel cost, lossless
  /// immediate sharing, 40 trials.
  static ExperimentConfig benchmark_preset();
};

}  // namespace nats

#endif  // NATS_CONFIG_HPP
