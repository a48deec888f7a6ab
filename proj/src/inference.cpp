#include "nats/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nats/errors.hpp"

namespace nats {

MeasurementStack::MeasurementStack(int total_cells, double variance_floor_)
    : precision(Eigen::VectorXd::Zero(total_cells)),
      weighted(Eigen::VectorXd::Zero(total_cells)),
      variance_floor(variance_floor_) {}

void MeasurementStack::add_row(int cell, double confidence, double variance) {
  if (cell < 0 || cell >= cells()) {
    throw std::out_of_range("sensing row references cell " +
                            std::to_string(cell) + " outside grid of " +
                            std::to_string(cells()));
  }
  const double inv = 1.0 / std::max(variance, variance_floor);
  precision[cell] += inv;
  weighted[cell] += confidence * inv;
  ++rows;
}

void MeasurementStack::add(const Measurement& measurement) {
  for (std::size_t i = 0; i < measurement.action.fov.size(); ++i) {
    add_row(measurement.action.fov[i].cell, measurement.confidences[i],
            measurement.action.fov[i].variance);
  }
}

SblPosterior SblPosterior::prior(const Eigen::VectorXd& prior_var) {
  return {Eigen::VectorXd::Zero(prior_var.size()), prior_var, prior_var};
}

SblPosterior compute_posterior(const MeasurementStack& data,
                               const Eigen::VectorXd& prior_var,
                               const SblConfig& config) {
  if (prior_var.size() != data.precision.size()) {
    throw ConfigError("prior variance length does not match the grid");
  }
  SblPosterior post;
  const Eigen::ArrayXd prior_precision =
      prior_var.array().max(config.prior_var_floor).inverse();
  const Eigen::ArrayXd total_precision = prior_precision + data.precision.array();
  post.var = total_precision.inverse().matrix();
  post.mean = (post.var.array() * data.weighted.array()).matrix();
  post.prior_var = prior_var;

  if (!post.var.allFinite() || !post.mean.allFinite()) {
    double cond = total_precision.maxCoeff() / total_precision.minCoeff();
    throw NumericalError(
        "posterior update produced non-finite values (precision condition "
        "estimate " + std::to_string(cond) + ")");
  }
  return post;
}

Eigen::VectorXd sample_posterior(const SblPosterior& posterior,
                                 std::mt19937_64& rng, double jitter) {
  Eigen::VectorXd draw(posterior.cells());
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int m = 0; m < posterior.cells(); ++m) {
    double v = posterior.var[m];
    if (v < 0.0) v += jitter;  // retry once with jitter
    if (v < 0.0) {
      throw NumericalError("posterior variance " + std::to_string(v) +
                           " at cell " + std::to_string(m) +
                           " not factorizable");
    }
    draw[m] = posterior.mean[m] + std::sqrt(v) * gauss(rng);
  }
  return draw;
}

Eigen::VectorXd update_prior_variances(const SblPosterior& posterior,
                                       const SblConfig& config) {
  Eigen::VectorXd next(posterior.cells());
  for (int m = 0; m < posterior.cells(); ++m) {
    double g = (posterior.var[m] + posterior.mean[m] * posterior.mean[m] +
                2.0 * config.b) /
               (1.0 + 2.0 * config.a);
    next[m] = std::max(g, config.prior_var_floor);
  }
  return next;
}

SblPosterior fit(const MeasurementStack& data, const SblConfig& config) {
  Eigen::VectorXd prior_var = Eigen::VectorXd::Ones(data.cells());
  SblPosterior post = SblPosterior::prior(prior_var);
  for (int round = 0; round < config.em_iterations; ++round) {
    post = compute_posterior(data, prior_var, config);
    prior_var = update_prior_variances(post, config);
    post.prior_var = prior_var;
  }
  return post;
}

SblPosterior fit(std::span<const Measurement> measurements, int total_cells,
                 const SblConfig& config) {
  MeasurementStack stack(total_cells, config.jitter);
  for (const Measurement& m : measurements) stack.add(m);
  return fit(stack, config);
}

std::vector<std::uint8_t> threshold_estimate(const SblPosterior& posterior,
                                             double threshold) {
  std::vector<std::uint8_t> estimate(static_cast<std::size_t>(posterior.cells()));
  for (int m = 0; m < posterior.cells(); ++m) {
    estimate[static_cast<std::size_t>(m)] = posterior.mean[m] > threshold ? 1 : 0;
  }
  return estimate;
}

}  // namespace nats
