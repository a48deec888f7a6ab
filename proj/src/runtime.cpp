#include "nats/runtime.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "nats/errors.hpp"
#include "nats/inference.hpp"
#include "nats/policy.hpp"
#include "nats/rng.hpp"

namespace nats {

using nlohmann::json;

Scenario Scenario::resolve(const ExperimentConfig& config) {
  config.validate();
  Scenario s;
  if (config.dem) {
    Dem dem = load_dem(config.dem->file, config.dem->nodata_fill);
    CoarseGrid coarse = coarsen(dem, config.dem->spacing);
    s.env = coarse.env;
    s.visibility = std::make_shared<DemVisibility>(
        dem, coarse, config.dem->observer_height,
        config.dem->visible_fraction_threshold, config.dem->block_stride);
  } else {
    s.env = config.grid;
  }
  if (config.num_objects > s.env.cells()) {
    throw ConfigError("object count exceeds resolved grid size");
  }
  s.world_noise = config.noise;
  s.model_noise = config.inference_noise();
  s.start_cell = config.start_cell
                     ? *config.start_cell
                     : s.env.flatten(s.env.rows / 2, s.env.cols / 2);
  if (s.start_cell < 0 || s.start_cell >= s.env.cells()) {
    throw ConfigError("start cell outside resolved grid");
  }
  return s;
}

namespace {

struct Agent {
  int id = 0;
  int position = 0;
  PolicyKind policy = PolicyKind::Nats;
  std::vector<std::shared_ptr<const Measurement>> data;
  int own_count = 0;
  long point_cursor = 0;
  std::mt19937_64 rng;
};

struct Event {
  double t = 0.0;
  long seq = 0;
  int agent = 0;
  std::shared_ptr<const Measurement> measurement;  // finishing task, if any

  bool operator>(const Event& other) const {
    if (t != other.t) return t > other.t;
    return seq > other.seq;
  }
};

MeasurementStack stack_of(const Agent& agent, int cells, double jitter) {
  MeasurementStack stack(cells, jitter);
  for (const auto& m : agent.data) stack.add(*m);
  return stack;
}

}  // namespace

SimTrace run_simulation(const ExperimentConfig& config) {
  return run_simulation(config, Scenario::resolve(config), config.seed);
}

SimTrace run_simulation(const ExperimentConfig& config, const Scenario& scenario,
                        std::uint64_t seed) {
  config.validate();
  const GridEnvironment& env = scenario.env;
  const int total_cells = env.cells();
  const VisibilityOracle* viewshed = scenario.visibility.get();

  SimTrace trace;
  trace.config = config;
  trace.env = env;
  trace.seed = seed;

  std::mt19937_64 world_rng = make_engine(seed, kStreamWorld);
  std::mt19937_64 bus_rng = make_engine(seed, kStreamBus);
  trace.truth = generate_ground_truth(env, config.num_objects, world_rng);

  std::vector<Agent> agents(static_cast<std::size_t>(config.agents));
  for (int j = 0; j < config.agents; ++j) {
    Agent& a = agents[static_cast<std::size_t>(j)];
    a.id = j;
    a.position = scenario.start_cell;
    a.policy = config.policy_for(j);
    a.rng = make_engine(seed, kStreamAgent0 + static_cast<std::uint64_t>(j));
  }

  // Pooled data for the harness-side recovery check; agents never see it.
  MeasurementStack pooled(total_cells, config.sbl.jitter);
  long issued = 0;
  long completed = 0;
  bool recovered = false;

  auto check_recovery = [&](double t) {
    SblPosterior belief = fit(pooled, config.sbl);
    auto estimate = threshold_estimate(belief, config.recovery_threshold);
    bool match = estimate == trace.truth.presence;
    TraceEvent ev;
    ev.kind = TraceEvent::Kind::Recovery;
    ev.t = t;
    ev.completed = completed;
    ev.recovered = match;
    trace.events.push_back(std::move(ev));
    if (match && !trace.first_recovery) {
      trace.first_recovery = completed;
      recovered = true;
    }
  };
  check_recovery(0.0);

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  long seq = 0;
  if (!recovered && config.budget > 0) {
    for (int j = 0; j < config.agents; ++j) {
      queue.push(Event{0.0, seq++, j, nullptr});
    }
  }

  // Deliveries are events for the recipient that only extend its dataset;
  // nothing ever blocks on them.
  auto broadcast = [&](const std::shared_ptr<const Measurement>& meas, double t) {
    for (int peer = 0; peer < config.agents; ++peer) {
      if (peer == meas->agent_id) continue;
      TraceEvent ev;
      ev.agent = meas->agent_id;
      ev.peer = peer;
      ev.task = meas->task_id;
      ev.t = t;
      bool dropped = std::uniform_real_distribution<double>(0.0, 1.0)(bus_rng) <
                     config.comm.drop_probability;
      if (dropped) {
        ev.kind = TraceEvent::Kind::Dropped;
        trace.events.push_back(std::move(ev));
        continue;
      }
      double delay = config.comm.delay.sample(bus_rng);
      ev.kind = TraceEvent::Kind::Sent;
      trace.events.push_back(std::move(ev));
      queue.push(Event{t + delay, seq++, peer, meas});
    }
  };

  while (!queue.empty()) {
    Event ev = queue.top();
    queue.pop();
    Agent& agent = agents[static_cast<std::size_t>(ev.agent)];

    if (ev.measurement && ev.measurement->agent_id != agent.id) {
      // Delivery of a peer's measurement.
      agent.data.push_back(ev.measurement);
      TraceEvent tev;
      tev.kind = TraceEvent::Kind::Delivered;
      tev.t = ev.t;
      tev.agent = agent.id;
      tev.task = ev.measurement->task_id;
      trace.events.push_back(std::move(tev));
      continue;
    }

    if (ev.measurement) {
      // The agent's own task just finished.
      agent.data.push_back(ev.measurement);
      ++agent.own_count;
      ++completed;
      pooled.add(*ev.measurement);

      TraceEvent tev;
      tev.kind = TraceEvent::Kind::Observation;
      tev.t = ev.t;
      tev.agent = agent.id;
      tev.task = ev.measurement->task_id;
      tev.confidences = ev.measurement->confidences;
      trace.events.push_back(std::move(tev));

      check_recovery(ev.t);
      broadcast(ev.measurement, ev.t);
    }

    if (recovered || issued >= config.budget) continue;  // agent idles

    // Selection: refit from whatever this agent currently holds.
    MeasurementStack stack = stack_of(agent, total_cells, config.sbl.jitter);
    SensingAction action;
    bool needs_posterior = agent.policy == PolicyKind::Nats ||
                           agent.policy == PolicyKind::InfoGain ||
                           config.snapshot_beliefs;
    SblPosterior posterior;
    if (needs_posterior) posterior = fit(stack, config.sbl);

    switch (agent.policy) {
      case PolicyKind::Nats: {
        ActionSet set = enumerate_action_set(agent.position, config.action_radius,
                                             env, scenario.model_noise, viewshed);
        action = nats_select(posterior, stack, set, agent.position,
                             config.travel_weight, env, agent.rng);
        break;
      }
      case PolicyKind::InfoGain: {
        ActionSet set = enumerate_action_set(agent.position, config.action_radius,
                                             env, scenario.model_noise, viewshed);
        action = info_gain_select(posterior, set);
        break;
      }
      case PolicyKind::BinTs: {
        BinTsBeliefs beliefs =
            BinTsBeliefs::uniform_prior(total_cells, config.num_objects);
        for (const auto& m : agent.data) beliefs.update(*m);
        ActionSet set = enumerate_action_set(agent.position, config.action_radius,
                                             env, scenario.model_noise, viewshed);
        action = binary_ts_select(beliefs, set, stack, agent.rng);
        break;
      }
      case PolicyKind::Random: {
        ActionSet set = enumerate_action_set(agent.position, config.action_radius,
                                             env, scenario.model_noise, viewshed);
        action = random_select(set, agent.rng);
        break;
      }
      case PolicyKind::PointSweep: {
        action = point_sweep_next(agent.point_cursor, agent.id, config.agents,
                                  env, scenario.model_noise);
        break;
      }
    }

    long task_id = issued++;
    agent.position = action.agent_cell;

    if (config.snapshot_beliefs) {
      TraceEvent bev;
      bev.kind = TraceEvent::Kind::Belief;
      bev.t = ev.t;
      bev.agent = agent.id;
      bev.mean = posterior.mean;
      bev.var = posterior.var;
      bev.prior_var = posterior.prior_var;
      trace.events.push_back(std::move(bev));
    }

    TraceEvent aev;
    aev.kind = TraceEvent::Kind::Action;
    aev.t = ev.t;
    aev.agent = agent.id;
    aev.task = task_id;
    aev.action = action;
    trace.events.push_back(std::move(aev));

    auto meas = std::make_shared<Measurement>(
        observe(trace.truth, action, agent.rng, &scenario.world_noise));
    meas->agent_id = agent.id;
    meas->task_id = task_id;
    meas->issue_time = ev.t;
    meas->completion_time = ev.t + config.duration.sample(agent.rng);
    queue.push(Event{meas->completion_time, seq++, agent.id, meas});
  }

  trace.total_measurements = completed;
  trace.recovered = trace.first_recovery.has_value();
  for (const Agent& a : agents) {
    trace.own_counts.push_back(a.own_count);
    trace.dataset_sizes.push_back(static_cast<int>(a.data.size()));
  }
  return trace;
}

namespace {

json action_to_json(const SensingAction& action) {
  json fov = json::array();
  for (const FovCell& fc : action.fov) {
    fov.push_back({{"cell", fc.cell}, {"depth", fc.depth}, {"var", fc.variance}});
  }
  return json{{"cell", action.agent_cell},
              {"heading", to_string(action.heading)},
              {"fov", std::move(fov)}};
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json event_to_json(const TraceEvent& ev) {
  json j;
  j["t"] = ev.t;
  switch (ev.kind) {
    case TraceEvent::Kind::Action:
      j["event"] = "action";
      j["agent"] = ev.agent;
      j["task"] = ev.task;
      j["action"] = action_to_json(ev.action);
      break;
    case TraceEvent::Kind::Observation:
      j["event"] = "observation";
      j["agent"] = ev.agent;
      j["task"] = ev.task;
      j["y"] = ev.confidences;
      break;
    case TraceEvent::Kind::Sent:
      j["event"] = "sent";
      j["agent"] = ev.agent;
      j["peer"] = ev.peer;
      j["task"] = ev.task;
      break;
    case TraceEvent::Kind::Dropped:
      j["event"] = "dropped";
      j["agent"] = ev.agent;
      j["peer"] = ev.peer;
      j["task"] = ev.task;
      break;
    case TraceEvent::Kind::Delivered:
      j["event"] = "delivered";
      j["agent"] = ev.agent;
      j["task"] = ev.task;
      break;
    case TraceEvent::Kind::Belief:
      j["event"] = "belief";
      j["agent"] = ev.agent;
      j["mean"] = vector_to_json(ev.mean);
      j["var"] = vector_to_json(ev.var);
      j["prior_var"] = vector_to_json(ev.prior_var);
      break;
    case TraceEvent::Kind::Recovery:
      j["event"] = "recovery";
      j["measurements"] = ev.completed;
      j["recovered"] = ev.recovered;
      break;
  }
  return j;
}

}  // namespace

void SimTrace::write_ndjson(std::ostream& out) const {
  json header;
  header["event"] = "header";
  header["schema"] = kTraceSchemaVersion;
  header["seed"] = seed;
  header["config"] = json::parse(config.to_json());
  header["grid"] = {{"rows", env.rows}, {"cols", env.cols},
                    {"cell_size", env.cell_size}};
  header["truth_cells"] = truth.support();
  out << header.dump() << '\n';
  for (const TraceEvent& ev : events) {
    out << event_to_json(ev).dump() << '\n';
  }
  json end;
  end["event"] = "end";
  end["measurements"] = total_measurements;
  end["recovered"] = recovered;
  end["first_recovery"] = first_recovery ? json(*first_recovery) : json(nullptr);
  end["own_counts"] = own_counts;
  end["dataset_sizes"] = dataset_sizes;
  out << end.dump() << '\n';
}

std::string SimTrace::to_ndjson() const {
  std::ostringstream out;
  write_ndjson(out);
  return out.str();
}

MetricsRecord metrics(const SimTrace& trace, const GroundTruth& truth,
                      double threshold) {
  MetricsRecord record;
  record.total_measurements = trace.total_measurements;
  record.measurements_per_agent =
      static_cast<double>(trace.total_measurements) /
      static_cast<double>(trace.config.agents);
  record.travel_distance.assign(static_cast<std::size_t>(trace.config.agents), 0.0);

  // Tasks indexed by id so completions can look their actions up.
  std::vector<const SensingAction*> actions(
      static_cast<std::size_t>(trace.total_measurements) + 1, nullptr);

  MeasurementStack pooled(trace.env.cells(), trace.config.sbl.jitter);
  auto indicator = [&]() {
    SblPosterior belief = fit(pooled, trace.config.sbl);
    return threshold_estimate(belief, threshold) == truth.presence;
  };
  record.recovery_by_count.push_back(indicator() ? 1 : 0);
  if (record.recovery_by_count.back() && !record.first_recovery) {
    record.first_recovery = 0;
  }

  int start = trace.config.start_cell
                  ? *trace.config.start_cell
                  : trace.env.flatten(trace.env.rows / 2, trace.env.cols / 2);
  std::vector<int> prev(static_cast<std::size_t>(trace.config.agents), start);

  for (const TraceEvent& ev : trace.events) {
    if (ev.kind == TraceEvent::Kind::Action) {
      if (ev.task >= 0 && ev.task < static_cast<long>(actions.size())) {
        actions[static_cast<std::size_t>(ev.task)] = &ev.action;
      }
      auto& at = prev[static_cast<std::size_t>(ev.agent)];
      record.travel_distance[static_cast<std::size_t>(ev.agent)] +=
          trace.env.distance(at, ev.action.agent_cell);
      at = ev.action.agent_cell;
    } else if (ev.kind == TraceEvent::Kind::Observation) {
      const SensingAction* action =
          ev.task >= 0 && ev.task < static_cast<long>(actions.size())
              ? actions[static_cast<std::size_t>(ev.task)]
              : nullptr;
      if (action == nullptr) {
        throw ConfigError("trace observation without a matching action");
      }
      for (std::size_t i = 0; i < action->fov.size(); ++i) {
        pooled.add_row(action->fov[i].cell, ev.confidences[i],
                       action->fov[i].variance);
      }
      bool rec = indicator();
      record.recovery_by_count.push_back(rec ? 1 : 0);
      if (rec && !record.first_recovery) {
        record.first_recovery =
            static_cast<long>(record.recovery_by_count.size()) - 1;
      }
    }
  }
  return record;
}

std::string MetricsRecord::to_json() const {
  json j;
  j["schema"] = kTraceSchemaVersion;
  j["measurements"] = total_measurements;
  j["first_recovery"] = first_recovery ? json(*first_recovery) : json(nullptr);
  j["measurements_per_agent"] = measurements_per_agent;
  j["travel_distance"] = travel_distance;
  json curve = json::array();
  for (std::size_t n = 0; n < recovery_by_count.size(); ++n) {
    curve.push_back(recovery_by_count[n] != 0);
  }
  j["recovery_by_count"] = std::move(curve);
  return j.dump(2);
}

}  // namespace nats
