#include "nats/sensing.hpp"

#include <algorithm>
#include <stdexcept>

#include "nats/errors.hpp"
#include "nats/rng.hpp"

namespace nats {

namespace {

constexpr int kDepthRows = 3;

struct Offsets {
  int dr, dc;  // heading direction
  int pr, pc;  // perpendicular, heading rotated 90 degrees clockwise
};

Offsets offsets_for(Heading h) {
  switch (h) {
    case Heading::North: return {-1, 0, 0, 1};
    case Heading::South: return {1, 0, 0, -1};
    case Heading::East: return {0, 1, 1, 0};
    case Heading::West: return {0, -1, -1, 0};
  }
  throw std::invalid_argument("unknown heading");
}

}  // namespace

const char* to_string(Heading h) {
  switch (h) {
    case Heading::North: return "N";
    case Heading::South: return "S";
    case Heading::East: return "E";
    case Heading::West: return "W";
  }
  return "?";
}

Heading heading_from_string(const std::string& name) {
  if (name == "N") return Heading::North;
  if (name == "S") return Heading::South;
  if (name == "E") return Heading::East;
  if (name == "W") return Heading::West;
  throw ConfigError("unknown heading '" + name + "'");
}

std::vector<std::pair<int, int>> enumerate_fov_cells(
    int agent_cell, Heading heading, const GridEnvironment& env,
    const VisibilityOracle* viewshed) {
  auto [row, col] = env.unflatten(agent_cell);
  const Offsets o = offsets_for(heading);

  std::vector<std::pair<int, int>> cells;
  cells.reserve(12);
  for (int depth = 1; depth <= kDepthRows; ++depth) {
    for (int p = -depth; p < depth; ++p) {
      int r = row + depth * o.dr + p * o.pr;
      int c = col + depth * o.dc + p * o.pc;
      if (!env.contains(r, c)) continue;
      int cell = env.flatten(r, c);
      if (viewshed != nullptr && !viewshed->visible(agent_cell, cell)) continue;
      cells.emplace_back(cell, depth);
    }
  }
  return cells;
}

SensingAction make_action(int agent_cell, Heading heading,
                          const GridEnvironment& env,
                          const DepthNoiseModel& noise,
                          const VisibilityOracle* viewshed) {
  SensingAction action;
  action.agent_cell = agent_cell;
  action.heading = heading;
  for (auto [cell, depth_rows] : enumerate_fov_cells(agent_cell, heading, env, viewshed)) {
    double depth = depth_rows * env.cell_size;
    action.fov.push_back({cell, depth, noise.variance_at(depth)});
  }
  return action;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_sensing(
    const SensingAction& action, int total_cells) {
  const int q = action.rows();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(q, total_cells);
  Eigen::VectorXd variances(q);
  for (int i = 0; i < q; ++i) {
    const FovCell& fc = action.fov[static_cast<std::size_t>(i)];
    if (fc.cell < 0 || fc.cell >= total_cells) {
      throw std::out_of_range("sensing row references cell outside grid");
    }
    rows(i, fc.cell) = 1.0;
    variances(i) = fc.variance;
  }
  return {std::move(rows), std::move(variances)};
}

Measurement observe(const GroundTruth& truth, const SensingAction& action,
                    std::mt19937_64& rng, const DepthNoiseModel* world_noise) {
  Measurement meas;
  meas.action = action;
  meas.confidences.reserve(action.fov.size());
  for (const FovCell& fc : action.fov) {
    double variance =
        world_noise != nullptr ? world_noise->variance_at(fc.depth) : fc.variance;
    double n = half_normal(variance, rng);
    double y = truth.presence[static_cast<std::size_t>(fc.cell)] ? 1.0 - n : n;
    meas.confidences.push_back(std::clamp(y, 0.0, 1.0));
  }
  return meas;
}

}  // namespace nats
