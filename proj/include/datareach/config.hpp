#pragma once

// JSON experiment configs. One document per experiment with the sections
// system, side_info, trajectory, reach and control; see configs/ and the
// README for the schema.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "datareach/inclusion.hpp"
#include "datareach/reach.hpp"
#include "datareach/sim.hpp"

namespace datareach {

/// Malformed or inconsistent configuration. Messages name the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrajectorySpec {
  /// Either a CSV file (resolved against the config directory) or generated.
  std::optional<std::filesystem::path> csv;
  Vec x0;
  std::size_t length = 10;
  double dt = 0.1;
  std::uint64_t seed = 0;
};

struct ReachSpec {
  double dt = 0.02;
  std::size_t steps = 200;
  int order = 2;
  std::shared_ptr<const ControlSignalEnvelope> signal;
  /// Unset: one data step past the last sample when the system is known,
  /// else the last sample itself.
  std::optional<Vec> start;
  std::optional<double> t_start;
  EnclosureOptions enclosure;
};

struct Experiment {
  std::string system;  // unicycle, quadrotor or custom
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<SystemModel> model;  // absent for custom systems
  IntervalVector X;
  IntervalVector U;
  SideInfo side;
  BuildOptions build;
  std::optional<TrajectorySpec> trajectory;
  std::optional<ReachSpec> reach;
  std::optional<ExperimentConfig> control;
};

/// Throws ConfigError; a missing file names the path.
Experiment load_experiment(const std::filesystem::path& path, std::optional<std::uint64_t> seed = std::nullopt);
Experiment parse_experiment(const std::string& json_text, const std::filesystem::path& base_dir = ".",
                            std::optional<std::uint64_t> seed = std::nullopt);

/// Reads or generates the configured trajectory.
Trajectory experiment_trajectory(const Experiment& e);

struct ReachRun {
  Vec start;
  double t_start = 0.0;
  ReachTube tube;
};

ReachRun run_reach(const Experiment& e, const Trajectory& data);

}  // namespace datareach
