#include "nats/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "nats/errors.hpp"
#include "nats/rng.hpp"

namespace nats {

namespace {

constexpr std::uint64_t kStreamSweep = 0x53574545u;  // seed-derivation tag

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

void parallel_for(int count, const std::function<void(int)>& body) {
  unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(count));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        body(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

void SweepSpec::validate() const {
  base.validate();
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<long> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("sweep values must be distinct");
  }
  if (!(level > 0.0 && level <= 1.0)) {
    throw ConfigError("recovery level must lie in (0,1]");
  }
}

SweepSpec::Mode sweep_mode_from_string(const std::string& name) {
  if (name == "budget") return SweepSpec::Mode::Budget;
  if (name == "agents") return SweepSpec::Mode::Agents;
  if (name == "sparsity") return SweepSpec::Mode::Sparsity;
  throw ConfigError("unknown sweep mode '" + name + "'");
}

std::vector<std::optional<long>> run_trials(const ExperimentConfig& config,
                                            const Scenario& scenario,
                                            std::uint64_t value_index) {
  std::vector<std::optional<long>> firsts(
      static_cast<std::size_t>(config.trials));
  parallel_for(config.trials, [&](int trial) {
    std::uint64_t trial_seed = derive_seed(
        derive_seed(config.seed, kStreamSweep + value_index),
        static_cast<std::uint64_t>(trial));
    SimTrace trace = run_simulation(config, scenario, trial_seed);
    firsts[static_cast<std::size_t>(trial)] = trace.first_recovery;
  });
  return firsts;
}

RecoveryCurve recovery_curve(const SweepSpec& sweep) {
  SweepSpec spec = sweep;
  spec.validate();
  if (spec.mode != SweepSpec::Mode::Budget) {
    throw ConfigError("recovery_curve expects a budget sweep");
  }
  std::sort(spec.values.begin(), spec.values.end());

  ExperimentConfig config = spec.base;
  config.budget = spec.values.back();
  Scenario scenario = Scenario::resolve(config);
  auto firsts = run_trials(config, scenario, 0);

  RecoveryCurve curve;
  const double n = static_cast<double>(config.trials);
  for (long budget : spec.values) {
    long hits = 0;
    for (const auto& f : firsts) {
      if (f && *f <= budget) ++hits;
    }
    double p = static_cast<double>(hits) / n;
    curve.budgets.push_back(budget);
    curve.rate.push_back(p);
    curve.standard_error.push_back(std::sqrt(p * (1.0 - p) / n));
  }
  return curve;
}

std::string RecoveryCurve::to_csv() const {
  std::ostringstream out;
  out << "budget,recovery_rate,standard_error\n";
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    out << budgets[i] << ',' << format_double(rate[i]) << ','
        << format_double(standard_error[i]) << '\n';
  }
  return out.str();
}

TimeToRecovery time_to_recovery(const SweepSpec& sweep) {
  SweepSpec spec = sweep;
  spec.validate();
  if (spec.mode == SweepSpec::Mode::Budget) {
    throw ConfigError("time_to_recovery expects an agents or sparsity sweep");
  }
  std::sort(spec.values.begin(), spec.values.end());

  TimeToRecovery result;
  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    long value = spec.values[vi];
    ExperimentConfig config = spec.base;
    if (spec.mode == SweepSpec::Mode::Agents) {
      config.agents = static_cast<int>(value);
      if (config.policies.size() > 1) {
        config.policies.resize(1);  // uniform policy across swept agent counts
      }
    } else {
      config.num_objects = static_cast<int>(value);
    }
    config.validate();
    Scenario scenario = Scenario::resolve(config);
    auto firsts = run_trials(config, scenario, vi + 1);

    // Smallest T with rate >= level: the ceil(level * n)-th order statistic.
    std::vector<long> sorted;
    sorted.reserve(firsts.size());
    constexpr long kNever = std::numeric_limits<long>::max();
    for (const auto& f : firsts) sorted.push_back(f ? *f : kNever);
    std::sort(sorted.begin(), sorted.end());
    auto quantile_index = static_cast<std::size_t>(
        std::ceil(spec.level * static_cast<double>(sorted.size()))) - 1;

    TimeToRecovery::Row row;
    row.value = value;
    if (sorted[quantile_index] != kNever) {
      row.measurements = sorted[quantile_index];
      row.per_agent = static_cast<double>(*row.measurements) /
                      static_cast<double>(config.agents);
    }
    result.rows.push_back(row);
  }
  return result;
}

std::string TimeToRecovery::to_csv() const {
  std::ostringstream out;
  out << "value,measurements,measurements_per_agent,reached\n";
  for (const Row& row : rows) {
    out << row.value << ',';
    if (row.measurements) {
      out << *row.measurements << ',' << format_double(*row.per_agent)
          << ",true\n";
    } else {
      out << ",,false\n";
    }
  }
  return out.str();
}

std::vector<CalibrationSample> load_calibration_csv(std::istream& in) {
  std::vector<CalibrationSample> samples;
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError("calibration file is empty", 1);
  }
  ++line_no;
  if (line.rfind("distance,confidence,label", 0) != 0) {
    throw ParseError("expected header 'distance,confidence,label'", line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    CalibrationSample s;
    std::string field;
    if (!std::getline(ls, field, ',')) {
      throw ParseError("missing distance", line_no);
    }
    try {
      s.distance = std::stod(field);
      if (!std::getline(ls, field, ',')) {
        throw ParseError("missing confidence", line_no);
      }
      s.confidence = std::stod(field);
    } catch (const std::invalid_argument&) {
      throw ParseError("non-numeric field '" + field + "'", line_no);
    }
    std::getline(ls, s.label, ',');
    if (!std::isfinite(s.distance) || !std::isfinite(s.confidence) ||
        s.confidence < 0.0 || s.confidence > 1.0 || s.distance < 0.0) {
      throw ParseError("sample out of range", line_no);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

std::vector<CalibrationSample> load_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open calibration file '" + path + "'");
  }
  return load_calibration_csv(in);
}

std::vector<double> isotonic_non_decreasing(std::vector<double> values,
                                            std::vector<double> weights) {
  // Pool adjacent violators, merging blocks into weighted means.
  struct Block {
    double mean, weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i], weights[i], 1});
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean > blocks.back().mean) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.count += top.count;
    }
  }
  std::vector<double> fitted;
  fitted.reserve(values.size());
  for (const Block& b : blocks) {
    fitted.insert(fitted.end(), b.count, b.mean);
  }
  return fitted;
}

DepthNoiseModel calibrate_noise(std::span<const CalibrationSample> samples,
                                const std::vector<double>& bin_edges,
                                double ideal_score,
                                const std::optional<std::string>& label_filter) {
  if (bin_edges.size() < 2) {
    throw ConfigError("need at least two bin edges");
  }
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (bin_edges[i] <= bin_edges[i - 1]) {
      throw ConfigError("bin edges must be strictly increasing");
    }
  }
  const std::size_t bins = bin_edges.size() - 1;
  std::vector<double> sum_sq(bins, 0.0);
  std::vector<double> count(bins, 0.0);
  for (const CalibrationSample& s : samples) {
    if (label_filter && s.label != *label_filter) continue;
    if (s.distance < bin_edges.front() || s.distance >= bin_edges.back()) continue;
    auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), s.distance);
    std::size_t bin = static_cast<std::size_t>(it - bin_edges.begin()) - 1;
    double dev = ideal_score - s.confidence;
    sum_sq[bin] += dev * dev;
    count[bin] += 1.0;
  }
  std::vector<double> variance(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] < 2.0) {
      std::ostringstream msg;
      msg << "calibration bin [" << bin_edges[b] << ", " << bin_edges[b + 1]
          << ") has " << static_cast<long>(count[b])
          << " samples; need at least 2";
      throw ConfigError(msg.str());
    }
    variance[b] = sum_sq[b] / count[b];
  }
  variance = isotonic_non_decreasing(std::move(variance), count);
  return DepthNoiseModel(
      std::vector<double>(bin_edges.begin() + 1, bin_edges.end()),
      std::move(variance));
}

std::string viewshed_csv(const std::vector<double>& fractions,
                         const GridEnvironment& node_grid) {
  std::ostringstream out;
  out << "node_row,node_col,visible_fraction\n";
  for (int node = 0; node < node_grid.cells(); ++node) {
    auto [r, c] = node_grid.unflatten(node);
    out << r << ',' << c << ','
        << format_double(fractions[static_cast<std::size_t>(node)]) << '\n';
  }
  return out.str();
}

std::string noise_table_csv(const DepthNoiseModel& model) {
  std::ostringstream out;
  out << "distance,variance\n";
  for (std::size_t i = 0; i < model.distances().size(); ++i) {
    out << format_double(model.distances()[i]) << ','
        << format_double(model.variances()[i]) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write file '" + path + "'");
  }
  out << content;
}

}  // namespace nats
