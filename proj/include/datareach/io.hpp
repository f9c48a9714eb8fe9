#pragma once

// CSV and SVG artifacts. Numbers are written with 17 significant digits so
// a write/read round trip is lossless.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "datareach/inclusion.hpp"
#include "datareach/reach.hpp"
#include "datareach/sim.hpp"

namespace datareach {

/// Header t,x_1..x_n,xdot_1..xdot_n,u_1..u_m.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Dimensions are taken from the header. Throws std::runtime_error with the
/// line number on malformed input.
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Header t,x1_lo,x1_hi,...; one row per tube box.
void write_tube_csv(std::ostream& os, const ReachTube& tube);
void write_tube_csv(const std::filesystem::path& path, const ReachTube& tube);

/// Header t,x_1..,u_1..,predicted_cost,true_cost,subopt_bound,solve_time_us.
void write_decision_log(std::ostream& os, const ClosedLoopResult& res);
void write_decision_log(const std::filesystem::path& path, const ClosedLoopResult& res);

struct Polyline {
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f77b4";
};

/// Standalone SVG of boxes projected on two state coordinates plus polylines.
void write_svg(std::ostream& os, const std::vector<IntervalVector>& boxes, const std::vector<Polyline>& lines,
               std::size_t ix = 0, std::size_t iy = 1, const std::string& title = "");
void write_svg(const std::filesystem::path& path, const std::vector<IntervalVector>& boxes,
               const std::vector<Polyline>& lines, std::size_t ix = 0, std::size_t iy = 1,
               const std::string& title = "");

/// Projection of a trajectory's states on (ix, iy).
Polyline state_path(const std::vector<Vec>& states, std::size_t ix = 0, std::size_t iy = 1);

}  // namespace datareach
