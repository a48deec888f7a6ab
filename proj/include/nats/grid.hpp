#ifndef NATS_GRID_HPP
#define NATS_GRID_HPP

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace nats {

/// Rectangular search area discretized into waypoint cells. Flattened
/// indices are row-major. Immutable after construction; shared read-only
/// across concurrent trials.
struct GridEnvironment {
  int rows = 0;
  int cols = 0;
  double cell_size = 1.0;  // meters per grid step; 1 = dimensionless benchmark

  GridEnvironment() = default;
  GridEnvironment(int rows, int cols, double cell_size = 1.0);

  int cells() const { return rows * cols; }
  bool contains(int row, int col) const {
    return row >= 0 && row < rows && col >= 0 && col < cols;
  }

  /// Row-major flattened index; throws std::out_of_range off the map.
  int flatten(int row, int col) const;
  std::pair<int, int> unflatten(int cell) const;

  /// Euclidean distance between cell centers, in meters.
  double distance(int cell_a, int cell_b) const;
};

/// Hidden world state: one object of interest per occupied cell.
struct GroundTruth {
  std::vector<std::uint8_t> presence;  // length rows*cols, values in {0,1}
  int num_objects = 0;

  std::vector<int> support() const;
};

/// num_objects distinct cells chosen uniformly without replacement.
GroundTruth generate_ground_truth(const GridEnvironment& env, int num_objects,
                                  std::mt19937_64& rng);

/// Detector confidence variance as a function of observation distance.
/// Tabulated step function: a query resolves to the nearest calibrated
/// distance at or above it, clamping past the table to the farthest (most
/// uncertain) entry. Variances must be non-decreasing with distance.
class DepthNoiseModel {
 public:
  DepthNoiseModel() = default;
  DepthNoiseModel(std::vector<double> distances, std::vector<double> variances);

  double variance_at(double distance) const;

  /// Same table with every entry replaced by the near-field variance;
  /// used to run inference that ignores depth-dependent uncertainty.
  DepthNoiseModel flattened() const;

  const std::vector<double>& distances() const { return distances_; }
  const std::vector<double>& variances() const { return variances_; }

  /// Benchmark detector model: variances {1,4,9} x 0.005 at depth rows 1,2,3.
  static DepthNoiseModel benchmark();

 private:
  std::vector<double> distances_;
  std::vector<double> variances_;
};

}  // namespace nats

#endif  // NATS_GRID_HPP
