#ifndef NATS_SENSING_HPP
#define NATS_SENSING_HPP

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nats/grid.hpp"

namespace nats {

enum class Heading : int { North = 0, South = 1, East = 2, West = 3 };

const char* to_string(Heading h);
Heading heading_from_string(const std::string& name);

/// Answers whether the terrain lets a sensor at one cell see another.
/// Implementations are read-only and safe to share across trials.
class VisibilityOracle {
 public:
  virtual ~VisibilityOracle() = default;
  virtual bool visible(int from_cell, int to_cell) const = 0;
};

struct FovCell {
  int cell = 0;
  double depth = 0.0;     // observation distance, same units as the noise table
  double variance = 0.0;  // confidence variance the observer assumes at depth
};

/// An agent pose plus the field-of-view cells it senses. Each visible cell
/// contributes one one-hot sensing row with the matching noise variance.
struct SensingAction {
  int agent_cell = 0;
  Heading heading = Heading::North;
  std::vector<FovCell> fov;

  int rows() const { return static_cast<int>(fov.size()); }
};

/// One completed sensing operation: the action, the confidence scores the
/// detector reported per FOV cell, and when it ran.
struct Measurement {
  SensingAction action;
  std::vector<double> confidences;  // length action.rows(), each in [0,1]
  int agent_id = 0;
  long task_id = 0;  // global issue order, unique per run
  double issue_time = 0.0;
  double completion_time = 0.0;
};

/// Camera-like footprint in the heading direction: depth rows 1..3 with
/// widths 2/4/6 across the heading axis (perpendicular offsets -d..d-1),
/// clipped at map borders and pruned by the visibility oracle. Depths are
/// returned in row units; scale by env.cell_size for metric tables.
/// Ordered near-to-far, offsets ascending.
std::vector<std::pair<int, int>> enumerate_fov_cells(
    int agent_cell, Heading heading, const GridEnvironment& env,
    const VisibilityOracle* viewshed = nullptr);

/// Attach noise variances to a footprint to form the full action.
SensingAction make_action(int agent_cell, Heading heading,
                          const GridEnvironment& env,
                          const DepthNoiseModel& noise,
                          const VisibilityOracle* viewshed = nullptr);

/// Dense sensing matrix (one one-hot row per FOV cell) and the matching
/// variance diagonal. Used by oracles and exports; the solver itself works
/// on the sparse cell list.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_sensing(
    const SensingAction& action, int total_cells);

/// Simulate the imperfect detector over one action. Per visible cell the
/// confidence is pushed toward the wrong label by half-normal noise of the
/// cell's variance, then clamped to [0,1]:
///   empty cell: y = |n|,  occupied cell: y = 1 - |n|.
/// world_noise, when given, overrides the variance magnitudes the world
/// draws from (the action's variances still describe the observer's model).
Measurement observe(const GroundTruth& truth, const SensingAction& action,
                    std::mt19937_64& rng,
                    const DepthNoiseModel* world_noise = nullptr);

}  // namespace nats

#endif  // NATS_SENSING_HPP
