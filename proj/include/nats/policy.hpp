#ifndef NATS_POLICY_HPP
#define NATS_POLICY_HPP

#include <Eigen/Core>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nats/inference.hpp"
#include "nats/sensing.hpp"

namespace nats {

enum class PolicyKind { Nats, BinTs, InfoGain, Random, PointSweep };

const char* to_string(PolicyKind kind);
PolicyKind policy_from_string(const std::string& name);

/// Candidate sensing actions for one decision step. Enumeration order is
/// position-major (flattened cell ascending) with headings N,S,E,W inside
/// each position; selectors break ties by this order.
struct ActionSet {
  std::vector<SensingAction> actions;

  bool empty() const { return actions.empty(); }
  std::size_t size() const { return actions.size(); }
};

/// All poses within Chebyshev distance `radius` of the agent (no radius =
/// the whole map), four headings each, FOVs occlusion-pruned.
ActionSet enumerate_action_set(int agent_cell, std::optional<int> radius,
                               const GridEnvironment& env,
                               const DepthNoiseModel& noise,
                               const VisibilityOracle* viewshed = nullptr);

/// One-step-lookahead value of a candidate action: the negative expected
/// squared distance between the hypothesis world and the posterior mean
/// after also taking the candidate,
///   -E_{y ~ N(X_c h, Sigma_c)} || h - mean(data + (X_c, y)) ||^2,
/// in closed form. The expectation over the unseen outcome splits into a
/// bias term and the trace of the refreshed posterior's sensitivity to y.
/// Prior variances are taken from `posterior`; `data` supplies the stacked
/// rows the posterior was fitted to.
double nats_reward(const Eigen::VectorXd& hypothesis,
                   const SblPosterior& posterior,
                   const SensingAction& candidate,
                   const MeasurementStack& data);

/// Euclidean travel distance (meters) the candidate asks of the agent.
double travel_cost(int from_cell, const SensingAction& candidate,
                   const GridEnvironment& env);

/// Thompson-sampling selection: draw a hypothesis world from the posterior,
/// then argmax of nats_reward - travel_weight * travel_cost. First-in-order
/// candidate wins ties.
const SensingAction& nats_select(const SblPosterior& posterior,
                                 const MeasurementStack& data,
                                 const ActionSet& actions, int agent_cell,
                                 double travel_weight,
                                 const GridEnvironment& env,
                                 std::mt19937_64& rng);

/// Deterministic information-gain selection: argmax of
/// (log det V - log det V_plus) / 2 over candidates.
const SensingAction& info_gain_select(const SblPosterior& posterior,
                                      const ActionSet& actions);

/// Independent per-cell Bernoulli beliefs over object presence, updated by
/// two-hypothesis Gaussian likelihood ratios. Log-odds kept for stability.
struct BinTsBeliefs {
  Eigen::VectorXd log_odds;

  static BinTsBeliefs uniform_prior(int total_cells, int expected_objects);
  void update(const Measurement& measurement);
  void update_row(int cell, double confidence, double variance);
  double probability(int cell) const;
  Eigen::VectorXd sample_world(std::mt19937_64& rng) const;
};

/// Thompson sampling over the Bernoulli beliefs: a binary world is drawn
/// and scored with the same expected-MSE reward, using a unit-variance
/// Gaussian surrogate belief as the predictor.
const SensingAction& binary_ts_select(const BinTsBeliefs& beliefs,
                                      const ActionSet& actions,
                                      const MeasurementStack& data,
                                      std::mt19937_64& rng);

const SensingAction& random_select(const ActionSet& actions,
                                   std::mt19937_64& rng);

/// Exhaustive single-cell sweep. Agent `agent_id` of `total_agents` visits
/// cells agent_id, agent_id + J, ... in raster order (wrapping), observing
/// the cell it stands on at the nearest calibrated variance.
SensingAction point_sweep_next(long& cursor, int agent_id, int total_agents,
                               const GridEnvironment& env,
                               const DepthNoiseModel& noise);

}  // namespace nats

#endif  // NATS_POLICY_HPP
