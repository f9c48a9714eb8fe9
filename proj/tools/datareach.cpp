// datareach reach|control|traj --config <file> --out <dir> [--seed K] [--svg]
//
// Exit codes: 0 ok, 1 usage/config/IO error, 2 enclosure failure,
// 3 inconsistent data, 4 solver failure, 5 infeasible intersection,
// 70 unexpected internal error. Only the summary line goes to stdout.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "datareach/config.hpp"
#include "datareach/io.hpp"

namespace fs = std::filesystem;
using namespace datareach;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kEnclosure = 2,
  kInconsistent = 3,
  kSolver = 4,
  kInfeasible = 5,
  kInternal = 70,
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("datareach");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* v = std::getenv("DATAREACH_LOG")) {
    const auto lvl = spdlog::level::from_str(v);
    // from_str maps unknown names to off; only accept a real "off"
    if (lvl != spdlog::level::off || std::string(v) == "off") {
      spdlog::set_level(lvl);
    } else {
      spdlog::warn("ignoring unknown DATAREACH_LOG level '{}'", v);
    }
  }
}

struct Args {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

int cmd_traj(const Args& a) {
  const Experiment e = load_experiment(a.config, a.seed);
  spdlog::info("loaded {} (system {}, n={}, m={})", a.config, e.system, e.n, e.m);
  if (!e.trajectory) throw ConfigError("config: the traj command needs a 'trajectory' section");
  const Trajectory traj = experiment_trajectory(e);
  const fs::path out = fs::path(a.out) / "trajectory.csv";
  write_trajectory_csv(out, traj);
  spdlog::debug("wrote {}", out.string());
  if (a.svg) {
    std::vector<Vec> xs;
    for (const auto& p : traj) xs.push_back(p.x);
    write_svg(fs::path(a.out) / "trajectory.svg", {}, {state_path(xs)}, 0, 1, e.system + " trajectory");
  }
  fmt::print("traj system={} points={} t_end={:.6g} csv={}\n", e.system, traj.size(), traj.back().t, out.string());
  return kOk;
}

int cmd_reach(const Args& a) {
  const Experiment e = load_experiment(a.config, a.seed);
  spdlog::info("loaded {} (system {}, n={}, m={})", a.config, e.system, e.n, e.m);
  if (!e.reach) throw ConfigError("config: the reach command needs a 'reach' section");
  const Trajectory data = experiment_trajectory(e);
  spdlog::info("{} data points up to t={}", data.size(), data.back().t);
  const ReachRun run = run_reach(e, data);
  const fs::path out = fs::path(a.out) / "tube.csv";
  write_tube_csv(out, run.tube);
  spdlog::debug("wrote {}", out.string());
  const auto& last = run.tube.boxes.back();
  const double area = e.n >= 2 ? last[0].width() * last[1].width() : last[0].width();
  if (a.svg) {
    std::vector<Vec> xs;
    for (const auto& p : data) xs.push_back(p.x);
    xs.push_back(run.start);
    const std::size_t iy = e.n >= 2 ? 1 : 0;
    write_svg(fs::path(a.out) / "tube.svg", run.tube.boxes, {state_path(xs, 0, iy)}, 0, iy,
              e.system + " reach tube");
  }
  fmt::print("reach system={} steps={} t_end={:.6g} final_area={:.6g} fallbacks={} csv={}\n", e.system,
             run.tube.boxes.size(), run.tube.times.back(), area, run.tube.fallback_count(), out.string());
  return kOk;
}

int cmd_control(const Args& a) {
  const Experiment e = load_experiment(a.config, a.seed);
  spdlog::info("loaded {} (system {}, n={}, m={})", a.config, e.system, e.n, e.m);
  if (!e.control) throw ConfigError("config: the control command needs a 'control' section");
  const ClosedLoopResult res = run_closed_loop(*e.model, *e.control);
  const fs::path out = fs::path(a.out) / "decisions.csv";
  write_decision_log(out, res);
  spdlog::debug("wrote {}", out.string());
  write_trajectory_csv(fs::path(a.out) / "initial_trajectory.csv", res.initial);
  if (a.svg) {
    std::vector<Vec> init, loop;
    for (const auto& p : res.initial) init.push_back(p.x);
    for (const auto& s : res.steps) loop.push_back(s.x);
    loop.push_back(res.final_state);
    Polyline pi = state_path(init);
    pi.color = "#7f7f7f";
    write_svg(fs::path(a.out) / "control.svg", {}, {pi, state_path(loop)}, 0, 1, e.system + " closed loop");
  }
  const double final_cost = res.steps.empty() ? 0.0 : res.steps.back().true_cost;
  fmt::print("control system={} relaxation={} steps={} reached_at={} final_cost={:.6g} mean_solve_us={:.1f} "
             "max_bound={:.6g} csv={}\n",
             e.system, to_string(e.control->relaxation), res.steps.size(),
             res.reached_at ? std::to_string(*res.reached_at) : "none", final_cost, res.mean_solve_time_us(),
             res.max_bound(), out.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Data-driven reachability and control of unknown control-affine systems"};
  app.require_subcommand(1);
  Args args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "experiment JSON file")->required();
    sub->add_option("--out", args.out, "output directory")->capture_default_str();
    sub->add_option("--seed", args.seed, "override the configured random seed");
    sub->add_flag("--svg", args.svg, "also write an SVG plot");
  };
  auto* reach = app.add_subcommand("reach", "over-approximate the reachable set");
  auto* control = app.add_subcommand("control", "run the closed-loop controller");
  auto* traj = app.add_subcommand("traj", "generate a trajectory CSV");
  for (auto* s : {reach, control, traj}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    fs::create_directories(args.out);
    if (reach->parsed()) return cmd_reach(args);
    if (control->parsed()) return cmd_control(args);
    return cmd_traj(args);
  } catch (const EnclosureFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kEnclosure;
  } catch (const InconsistentData& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInconsistent;
  } catch (const SolverFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  } catch (const InfeasibleIntersection& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::runtime_error& e) {
    // CSV and file errors
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
