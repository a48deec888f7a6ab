#include "nats/policy.hpp"

#include <algorithm>
#include <cmath>

#include "nats/errors.hpp"

namespace nats {

namespace {

constexpr Heading kHeadings[] = {Heading::North, Heading::South, Heading::East,
                                 Heading::West};

// Expected squared error at one cell after the candidate adds precision
// delta there, for hypothesis value h:
//   v+ = 1 / (1/gamma + s + delta)
//   E[mean+] = v+ (w + delta h)
//   (h - E[mean+])^2 + v+^2 delta
double cell_term(double gamma, double s, double w, double delta, double h,
                 double prior_var_floor) {
  double v_plus = 1.0 / (1.0 / std::max(gamma, prior_var_floor) + s + delta);
  double bias = h - v_plus * (w + delta * h);
  return bias * bias + v_plus * v_plus * delta;
}

// Per-selection cache: the no-candidate expected squared error, adjusted
// per candidate on its FOV cells only.
struct RewardContext {
  const Eigen::VectorXd& hypothesis;
  const Eigen::VectorXd& prior_var;
  const MeasurementStack& data;
  double prior_var_floor;
  double base = 0.0;
  std::vector<double> base_term;

  RewardContext(const Eigen::VectorXd& hypothesis_,
                const Eigen::VectorXd& prior_var_, const MeasurementStack& data_,
                double floor_)
      : hypothesis(hypothesis_),
        prior_var(prior_var_),
        data(data_),
        prior_var_floor(floor_),
        base_term(static_cast<std::size_t>(data_.cells())) {
    for (int m = 0; m < data.cells(); ++m) {
      double term = cell_term(prior_var[m], data.precision[m], data.weighted[m],
                              0.0, hypothesis[m], prior_var_floor);
      base_term[static_cast<std::size_t>(m)] = term;
      base += term;
    }
  }

  double reward(const SensingAction& candidate) const {
    double total = base;
    for (const FovCell& fc : candidate.fov) {
      double delta = 1.0 / std::max(fc.variance, data.variance_floor);
      total -= base_term[static_cast<std::size_t>(fc.cell)];
      total += cell_term(prior_var[fc.cell], data.precision[fc.cell],
                         data.weighted[fc.cell], delta, hypothesis[fc.cell],
                         prior_var_floor);
    }
    return -total;
  }
};

template <typename Score>
const SensingAction& argmax_action(const ActionSet& actions, Score&& score) {
  if (actions.empty()) {
    throw ConfigError("action set is empty");
  }
  std::size_t best = 0;
  double best_score = score(actions.actions[0]);
  for (std::size_t i = 1; i < actions.size(); ++i) {
    double s = score(actions.actions[i]);
    if (s > best_score) {  // strict: earliest candidate keeps ties
      best_score = s;
      best = i;
    }
  }
  return actions.actions[best];
}

}  // namespace

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Nats: return "nats";
    case PolicyKind::BinTs: return "bints";
    case PolicyKind::InfoGain: return "ig";
    case PolicyKind::Random: return "rnd";
    case PolicyKind::PointSweep: return "point";
  }
  return "?";
}

PolicyKind policy_from_string(const std::string& name) {
  if (name == "nats") return PolicyKind::Nats;
  if (name == "bints") return PolicyKind::BinTs;
  if (name == "ig") return PolicyKind::InfoGain;
  if (name == "rnd") return PolicyKind::Random;
  if (name == "point") return PolicyKind::PointSweep;
  throw ConfigError("unknown policy '" + name + "'");
}

ActionSet enumerate_action_set(int agent_cell, std::optional<int> radius,
                               const GridEnvironment& env,
                               const DepthNoiseModel& noise,
                               const VisibilityOracle* viewshed) {
  auto [arow, acol] = env.unflatten(agent_cell);
  ActionSet set;
  for (int cell = 0; cell < env.cells(); ++cell) {
    if (radius) {
      auto [r, c] = env.unflatten(cell);
      int chebyshev = std::max(std::abs(r - arow), std::abs(c - acol));
      if (chebyshev > *radius) continue;
    }
    for (Heading h : kHeadings) {
      set.actions.push_back(make_action(cell, h, env, noise, viewshed));
    }
  }
  return set;
}

double nats_reward(const Eigen::VectorXd& hypothesis,
                   const SblPosterior& posterior,
                   const SensingAction& candidate,
                   const MeasurementStack& data) {
  RewardContext ctx(hypothesis, posterior.prior_var, data, 1e-8);
  return ctx.reward(candidate);
}

double travel_cost(int from_cell, const SensingAction& candidate,
                   const GridEnvironment& env) {
  return env.distance(from_cell, candidate.agent_cell);
}

const SensingAction& nats_select(const SblPosterior& posterior,
                                 const MeasurementStack& data,
                                 const ActionSet& actions, int agent_cell,
                                 double travel_weight,
                                 const GridEnvironment& env,
                                 std::mt19937_64& rng) {
  Eigen::VectorXd hypothesis = sample_posterior(posterior, rng);
  RewardContext ctx(hypothesis, posterior.prior_var, data, 1e-8);
  return argmax_action(actions, [&](const SensingAction& a) {
    return ctx.reward(a) - travel_weight * travel_cost(agent_cell, a, env);
  });
}

const SensingAction& info_gain_select(const SblPosterior& posterior,
                                      const ActionSet& actions) {
  // V+^-1 = V^-1 + X_c^T Sigma_c^-1 X_c, all diagonal, so
  // log det V - log det V+ telescopes over the candidate's cells.
  return argmax_action(actions, [&](const SensingAction& a) {
    double gain = 0.0;
    for (const FovCell& fc : a.fov) {
      double delta = 1.0 / std::max(fc.variance, 1e-12);
      gain += 0.5 * std::log1p(delta * posterior.var[fc.cell]);
    }
    return gain;
  });
}

BinTsBeliefs BinTsBeliefs::uniform_prior(int total_cells, int expected_objects) {
  double p = std::clamp(static_cast<double>(expected_objects) /
                            static_cast<double>(total_cells),
                        1e-12, 1.0 - 1e-12);
  BinTsBeliefs beliefs;
  beliefs.log_odds = Eigen::VectorXd::Constant(total_cells, std::log(p / (1.0 - p)));
  return beliefs;
}

void BinTsBeliefs::update_row(int cell, double confidence, double variance) {
  // log N(y; 1, s^2) - log N(y; 0, s^2) = (2y - 1) / (2 s^2)
  log_odds[cell] += (2.0 * confidence - 1.0) / (2.0 * std::max(variance, 1e-12));
}

void BinTsBeliefs::update(const Measurement& measurement) {
  for (std::size_t i = 0; i < measurement.action.fov.size(); ++i) {
    update_row(measurement.action.fov[i].cell, measurement.confidences[i],
               measurement.action.fov[i].variance);
  }
}

double BinTsBeliefs::probability(int cell) const {
  double lo = log_odds[cell];
  if (lo > 0) return 1.0 / (1.0 + std::exp(-lo));
  double e = std::exp(lo);
  return e / (1.0 + e);
}

Eigen::VectorXd BinTsBeliefs::sample_world(std::mt19937_64& rng) const {
  Eigen::VectorXd world(log_odds.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int m = 0; m < log_odds.size(); ++m) {
    world[m] = unit(rng) < probability(m) ? 1.0 : 0.0;
  }
  return world;
}

const SensingAction& binary_ts_select(const BinTsBeliefs& beliefs,
                                      const ActionSet& actions,
                                      const MeasurementStack& data,
                                      std::mt19937_64& rng) {
  Eigen::VectorXd world = beliefs.sample_world(rng);
  Eigen::VectorXd unit_prior = Eigen::VectorXd::Ones(data.cells());
  RewardContext ctx(world, unit_prior, data, 1e-8);
  return argmax_action(actions,
                       [&](const SensingAction& a) { return ctx.reward(a); });
}

const SensingAction& random_select(const ActionSet& actions,
                                   std::mt19937_64& rng) {
  if (actions.empty()) {
    throw ConfigError("action set is empty");
  }
  std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
  return actions.actions[pick(rng)];
}

SensingAction point_sweep_next(long& cursor, int agent_id, int total_agents,
                               const GridEnvironment& env,
                               const DepthNoiseModel& noise) {
  long cell = (agent_id + cursor * total_agents) % env.cells();
  ++cursor;
  SensingAction action;
  action.agent_cell = static_cast<int>(cell);
  action.heading = Heading::North;
  action.fov.push_back({static_cast<int>(cell), 0.0, noise.variance_at(0.0)});
  return action;
}

}  // namespace nats
