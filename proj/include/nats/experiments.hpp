#ifndef NATS_EXPERIMENTS_HPP
#define NATS_EXPERIMENTS_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nats/config.hpp"
#include "nats/runtime.hpp"

namespace nats {

/// A family of runs: the base experiment with one parameter swept.
struct SweepSpec {
  enum class Mode { Budget, Agents, Sparsity };

  ExperimentConfig base;
  Mode mode = Mode::Budget;
  std::vector<long> values;  // measurement budgets, agent counts, or object counts
  double level = 0.5;        // target recovery rate for time-to-recovery

  void validate() const;
};

SweepSpec::Mode sweep_mode_from_string(const std::string& name);

/// First-recovery measurement count per trial (empty = never recovered
/// within the budget). Trials use independent derived seeds and may run
/// concurrently; results are ordered by trial index.
std::vector<std::optional<long>> run_trials(const ExperimentConfig& config,
                                            const Scenario& scenario,
                                            std::uint64_t value_index);

/// Mean full-recovery rate and binomial standard error per budget.
struct RecoveryCurve {
  std::vector<long> budgets;
  std::vector<double> rate;
  std::vector<double> standard_error;

  std::string to_csv() const;  // budget,recovery_rate,standard_error
};

RecoveryCurve recovery_curve(const SweepSpec& sweep);

/// Smallest measurement count at which the recovery-rate estimate reaches
/// the target level, per swept value.
struct TimeToRecovery {
  struct Row {
    long value = 0;
    std::optional<long> measurements;      // empty = level never reached
    std::optional<double> per_agent;       // measurements / agents
  };
  std::vector<Row> rows;

  std::string to_csv() const;  // value,measurements,measurements_per_agent,reached
};

TimeToRecovery time_to_recovery(const SweepSpec& sweep);

/// One detector log entry: how confident the detector was at what range.
struct CalibrationSample {
  double distance = 0.0;
  double confidence = 0.0;
  std::string label;
};

/// Parse "distance,confidence,label" CSV (header required).
std::vector<CalibrationSample> load_calibration_csv(std::istream& in);
std::vector<CalibrationSample> load_calibration_csv(const std::string& path);

/// Estimate a depth-noise table from detection logs. Samples are binned by
/// distance using the given edges; each bin's variance is the mean squared
/// deviation of confidence from the ideal score (the half-normal scale
/// estimate). Isotonic regression across bins enforces the variance's
/// monotone growth with distance. Each bin needs at least two samples.
/// The returned table is keyed by bin upper edges.
DepthNoiseModel calibrate_noise(std::span<const CalibrationSample> samples,
                                const std::vector<double>& bin_edges,
                                double ideal_score = 1.0,
                                const std::optional<std::string>& label_filter =
                                    std::nullopt);

/// Weighted pool-adjacent-violators: least-squares non-decreasing fit.
std::vector<double> isotonic_non_decreasing(std::vector<double> values,
                                            std::vector<double> weights);

std::string viewshed_csv(const std::vector<double>& fractions,
                         const GridEnvironment& node_grid);
std::string noise_table_csv(const DepthNoiseModel& model);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace nats

#endif  // NATS_EXPERIMENTS_HPP
