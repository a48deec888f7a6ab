#include "nats/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nats/errors.hpp"

namespace nats {

GridEnvironment::GridEnvironment(int rows_, int cols_, double cell_size_)
    : rows(rows_), cols(cols_), cell_size(cell_size_) {
  if (rows < 1 || cols < 1) {
    throw ConfigError("grid must have at least one row and one column");
  }
  if (cell_size <= 0.0) {
    throw ConfigError("grid cell_size must be positive");
  }
}

int GridEnvironment::flatten(int row, int col) const {
  if (!contains(row, col)) {
    throw std::out_of_range("cell (" + std::to_string(row) + "," +
                            std::to_string(col) + ") outside " +
                            std::to_string(rows) + "x" + std::to_string(cols) +
                            " grid");
  }
  return row * cols + col;
}

std::pair<int, int> GridEnvironment::unflatten(int cell) const {
  if (cell < 0 || cell >= cells()) {
    throw std::out_of_range("cell index " + std::to_string(cell) +
                            " outside grid of " + std::to_string(cells()));
  }
  return {cell / cols, cell % cols};
}

double GridEnvironment::distance(int cell_a, int cell_b) const {
  auto [ra, ca] = unflatten(cell_a);
  auto [rb, cb] = unflatten(cell_b);
  double dr = static_cast<double>(ra - rb);
  double dc = static_cast<double>(ca - cb);
  return std::sqrt(dr * dr + dc * dc) * cell_size;
}

std::vector<int> GroundTruth::support() const {
  std::vector<int> cells;
  for (int m = 0; m < static_cast<int>(presence.size()); ++m) {
    if (presence[m]) cells.push_back(m);
  }
  return cells;
}

GroundTruth generate_ground_truth(const GridEnvironment& env, int num_objects,
                                  std::mt19937_64& rng) {
  const int total = env.cells();
  if (num_objects < 0 || num_objects > total) {
    throw ConfigError("object count " + std::to_string(num_objects) +
                      " outside [0, " + std::to_string(total) + "]");
  }
  GroundTruth truth;
  truth.presence.assign(total, 0);
  truth.num_objects = num_objects;

  // Partial Fisher-Yates: first num_objects entries are a uniform
  // without-replacement sample.
  std::vector<int> cells(total);
  std::iota(cells.begin(), cells.end(), 0);
  for (int i = 0; i < num_objects; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(cells[i], cells[pick(rng)]);
    truth.presence[cells[i]] = 1;
  }
  return truth;
}

DepthNoiseModel::DepthNoiseModel(std::vector<double> distances,
                                 std::vector<double> variances)
    : distances_(std::move(distances)), variances_(std::move(variances)) {
  if (distances_.empty() || distances_.size() != variances_.size()) {
    throw ConfigError("noise table needs matching, non-empty distance and "
                      "variance lists");
  }
  for (std::size_t i = 0; i < distances_.size(); ++i) {
    if (!(variances_[i] >= 0.0)) {
      throw ConfigError("noise variance must be non-negative");
    }
    if (i > 0 && distances_[i] <= distances_[i - 1]) {
      throw ConfigError("noise table distances must be strictly increasing");
    }
    if (i > 0 && variances_[i] < variances_[i - 1]) {
      throw ConfigError("noise variance must be non-decreasing with distance");
    }
  }
}

double DepthNoiseModel::variance_at(double distance) const {
  if (distances_.empty()) {
    throw ConfigError("noise table is empty");
  }
  auto it = std::lower_bound(distances_.begin(), distances_.end(), distance);
  if (it == distances_.end()) return variances_.back();
  return variances_[static_cast<std::size_t>(it - distances_.begin())];
}

DepthNoiseModel DepthNoiseModel::flattened() const {
  return DepthNoiseModel(distances_,
                         std::vector<double>(variances_.size(), variances_.front()));
}

DepthNoiseModel DepthNoiseModel::benchmark() {
  return DepthNoiseModel({1.0, 2.0, 3.0}, {0.005, 0.020, 0.045});
}

}  // namespace nats
