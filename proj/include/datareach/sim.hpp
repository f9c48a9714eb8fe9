#pragma once

// Benchmark systems, reference integration and the closed-loop harness.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "datareach/control.hpp"
#include "datareach/inclusion.hpp"

namespace datareach {

struct SystemModel {
  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> G;
  IntervalVector U;
  IntervalVector X;
  /// Side information shipped with the benchmark.
  SideInfo side;

  Vec xdot(const Vec& x, const Vec& u) const { return f(x) + G(x) * u; }
};

SystemModel unicycle();

struct QuadrotorParams {
  double CDv = 0.25;
  double CDphi = 0.02255;
  double g = 9.81;
  double mass = 1.25;
  double l = 0.5;
  double Iyy = 0.03;
};

/// State (px, vx, py, vy, phi, omega), control (T1, T2).
SystemModel quadrotor(const QuadrotorParams& p = {});

SystemModel make_system(const std::string& name);

/// Unicycle side information for the three reach ablation cases:
/// 'a' drops f(x) = f(theta), 'b' is the benchmark default, 'c' adds
/// known f = 0 and G_32 = 1.
SideInfo unicycle_side_info(char ablation_case);

/// Classical RK4 with dt / substeps internal steps and constant control.
Vec rk4_step(const SystemModel& model, const Vec& x, const Vec& u, double dt, int substeps = 10);
/// Time-varying control u(t) on [t0, t0 + dt].
Vec rk4_step(const SystemModel& model, const Vec& x, const std::function<Vec(double)>& u, double t0,
             double dt, int substeps = 10);

/// Piecewise-constant controls drawn uniformly from U; exact derivatives.
Trajectory gen_initial_trajectory(const SystemModel& model, const Vec& x0, std::size_t N, double dt,
                                  std::uint64_t seed, double t0 = 0.0, int substeps = 10);

struct StopRule {
  enum class Kind { CostThreshold, Setpoint };
  Kind kind = Kind::CostThreshold;
  double threshold = 0.1;
  std::size_t component = 0;
  double target = 0.0;
  double tol = 0.25;

  bool satisfied(const Vec& x_next, double true_cost) const;
};

struct ExperimentConfig {
  double dt = 0.1;
  std::size_t horizon_steps = 150;
  std::size_t init_traj_len = 10;
  std::uint64_t seed = 0;
  Vec x0;
  SideInfo side;
  QuadraticCost cost = QuadraticCost(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Zero(1, 1), Vec::Zero(1), Vec::Zero(1));
  Relaxation relaxation = Relaxation::Idealistic;
  double M = kDefaultM;
  /// Random extreme controls applied before the controller engages.
  std::size_t excitation_steps = 0;
  StopRule stop;
  bool stop_on_reach = true;
  std::size_t refine_every = 10;
  int substeps = 10;
  bool warm_start = false;
  EnclosureOptions enclosure;
};

struct StepRecord {
  double t = 0.0;
  Vec x;
  Vec u;
  double predicted_cost = 0.0;
  double true_cost = 0.0;
  double bound = 0.0;
  double solve_time_us = 0.0;
  AffineEnvelope envelope;
};

struct ClosedLoopResult {
  Trajectory initial{1, 1};
  std::vector<StepRecord> steps;
  Vec final_state;
  std::optional<std::size_t> reached_at;

  double mean_solve_time_us() const;
  double max_bound() const;
};

/// Per-step hook, called after the control is applied; used by tests.
using StepObserver = std::function<void(const StepRecord&, const KnowledgeBase&)>;

ClosedLoopResult run_closed_loop(const SystemModel& model, const ExperimentConfig& cfg,
                                 const StepObserver& observer = {});

}  // namespace datareach
