#ifndef NATS_INFERENCE_HPP
#define NATS_INFERENCE_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nats/sensing.hpp"

namespace nats {

/// Sparse-Bayesian-learning hyperparameters: inverse-gamma prior (shape a,
/// scale b) on the per-cell prior variances, EM rounds per fit, and the
/// regularizers that keep the precision algebra finite.
struct SblConfig {
  double a = 0.0;  // 0,0 = noninformative prior on the variances
  double b = 0.0;
  int em_iterations = 1;
  double jitter = 1e-9;          // variance floor for sensing rows
  double prior_var_floor = 1e-8; // keeps prior precision finite
};

/// All sensing rows seen so far, vertically stacked. Every row is one-hot
/// at its cell, so the stack reduces to per-cell sufficient statistics:
///   precision[m] = sum of 1/sigma^2 over rows observing cell m
///   weighted[m]  = sum of y/sigma^2 over the same rows
struct MeasurementStack {
  explicit MeasurementStack(int total_cells, double variance_floor = 1e-9);

  void add_row(int cell, double confidence, double variance);
  void add(const Measurement& measurement);

  int cells() const { return static_cast<int>(precision.size()); }

  Eigen::VectorXd precision;
  Eigen::VectorXd weighted;
  long rows = 0;
  double variance_floor;
};

/// Gaussian belief over the presence vector. One-hot sensing rows make the
/// posterior precision diagonal, so the covariance is stored as its
/// diagonal; prior_var holds the per-cell prior variances the belief was
/// built from (EM refreshes them).
struct SblPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;        // diagonal of the posterior covariance
  Eigen::VectorXd prior_var;

  int cells() const { return static_cast<int>(mean.size()); }

  /// Belief with no data: zero mean, covariance = prior variances.
  static SblPosterior prior(const Eigen::VectorXd& prior_var);
};

/// Closed-form Gaussian posterior
///   V  = (Gamma^-1 + X^T Sigma^-1 X)^-1,  mu = V X^T Sigma^-1 y
/// over the stacked rows, with Gamma = diag(prior_var).
/// Throws NumericalError if the result is not finite.
SblPosterior compute_posterior(const MeasurementStack& data,
                               const Eigen::VectorXd& prior_var,
                               const SblConfig& config = {});

/// Draw mean + L z with L L^T = V (diagonal: L = sqrt(var)). A negative
/// diagonal entry is retried once with jitter added, then reported.
Eigen::VectorXd sample_posterior(const SblPosterior& posterior,
                                 std::mt19937_64& rng,
                                 double jitter = 1e-9);

/// EM M-step for the prior variances:
///   gamma_m = (V_mm + mu_m^2 + 2 b) / (1 + 2 a),
/// floored at config.prior_var_floor.
Eigen::VectorXd update_prior_variances(const SblPosterior& posterior,
                                       const SblConfig& config);

/// Alternate posterior / prior-variance updates for em_iterations rounds
/// starting from unit prior variances. Zero rounds returns the unit prior
/// untouched by the data.
SblPosterior fit(const MeasurementStack& data, const SblConfig& config);
SblPosterior fit(std::span<const Measurement> measurements, int total_cells,
                 const SblConfig& config);

/// Presence estimate: cell m declared occupied iff mean_m > threshold.
std::vector<std::uint8_t> threshold_estimate(const SblPosterior& posterior,
                                             double threshold);

}  // namespace nats

#endif  // NATS_INFERENCE_HPP
