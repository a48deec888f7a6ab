#ifndef NATS_RUNTIME_HPP
#define NATS_RUNTIME_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nats/config.hpp"
#include "nats/grid.hpp"
#include "nats/sensing.hpp"
#include "nats/viewshed.hpp"

namespace nats {

constexpr int kTraceSchemaVersion = 1;

/// Read-only per-experiment context, shared by all trials of a sweep.
/// For DEM scenarios the waypoint grid and the visibility table are derived
/// from the elevation file; otherwise the configured grid is used as-is.
struct Scenario {
  GridEnvironment env;
  DepthNoiseModel world_noise;
  DepthNoiseModel model_noise;
  std::shared_ptr<const DemVisibility> visibility;  // null = open terrain
  int start_cell = 0;

  static Scenario resolve(const ExperimentConfig& config);
};

struct TraceEvent {
  enum class Kind {
    Action,      // agent committed to a sensing pose
    Observation, // sensing completed, confidences available
    Sent,        // broadcast copy scheduled for a peer
    Dropped,     // broadcast copy lost
    Delivered,   // peer received the measurement
    Belief,      // posterior snapshot at selection time
    Recovery     // pooled-estimate-vs-truth check after a completion
  };

  Kind kind;
  double t = 0.0;
  int agent = -1;  // actor; recipient for Delivered
  int peer = -1;   // recipient for Sent/Dropped
  long task = -1;  // measurement id
  SensingAction action;              // Action
  std::vector<double> confidences;   // Observation
  long completed = -1;               // Recovery: measurements completed so far
  bool recovered = false;            // Recovery
  Eigen::VectorXd mean, var, prior_var;  // Belief
};

/// Time-ordered event log of one simulation run plus its summary.
/// Serializes to newline-delimited JSON (one record per event, bracketed by
/// header and end records).
struct SimTrace {
  ExperimentConfig config;
  GridEnvironment env;  // resolved grid (differs from config.grid under a DEM)
  GroundTruth truth;
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;

  long total_measurements = 0;
  bool recovered = false;
  std::optional<long> first_recovery;     // measurement count, 0 = before any
  std::vector<int> own_counts;            // per agent
  std::vector<int> dataset_sizes;         // per agent, |D| at the end

  void write_ndjson(std::ostream& out) const;
  std::string to_ndjson() const;
};

/// Algorithm outer loop as an event-driven simulation: the earliest-free
/// agent refits its belief from whatever measurements it holds, selects an
/// action, senses for a sampled duration, then appends and broadcasts the
/// result. Agents never wait on one another. Stops issuing at the
/// measurement budget or at full recovery of the hidden vector (checked
/// against ground truth by the harness only). Deterministic given the seed.
SimTrace run_simulation(const ExperimentConfig& config);
SimTrace run_simulation(const ExperimentConfig& config, const Scenario& scenario,
                        std::uint64_t seed);

struct MetricsRecord {
  long total_measurements = 0;
  std::optional<long> first_recovery;
  double measurements_per_agent = 0.0;  // total / agents
  std::vector<double> travel_distance;  // per agent, meters
  std::vector<std::uint8_t> recovery_by_count;  // index = completed count

  std::string to_json() const;
};

/// Recompute recovery indicators (pooled estimate vs truth at `threshold`
/// after each completed measurement) and travel totals from a trace.
MetricsRecord metrics(const SimTrace& trace, const GroundTruth& truth,
                      double threshold);

}  // namespace nats

#endif  // NATS_RUNTIME_HPP
