#include "datareach/sim.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace datareach {

namespace {

constexpr double kPi = std::numbers::pi;

IntervalVector box(std::initializer_list<std::pair<double, double>> b) {
  std::vector<Interval> v;
  for (auto [lo, hi] : b) v.emplace_back(lo, hi);
  return IntervalVector(std::move(v));
}

// Rethrows a library error with the closed-loop step prepended, keeping its type.
[[noreturn]] void rethrow_at_step(std::size_t step) {
  const std::string at = "closed-loop step " + std::to_string(step) + ": ";
  try {
    throw;
  } catch (const EnclosureFailure& e) {
    throw EnclosureFailure(at + e.what(), static_cast<std::ptrdiff_t>(step));
  } catch (const InconsistentData& e) {
    throw InconsistentData(at + e.what());
  } catch (const InfeasibleIntersection& e) {
    throw InfeasibleIntersection(at + e.what());
  } catch (const SolverFailure& e) {
    throw SolverFailure(at + e.what());
  }
}

}  // namespace

SideInfo unicycle_side_info(char ablation_case) {
  SideInfo s;
  s.lipschitz.L_f = Vec::Constant(3, 0.01);
  s.lipschitz.L_G = Mat::Zero(3, 2);
  s.lipschitz.L_G(0, 0) = 1.1;
  s.lipschitz.L_G(1, 0) = 1.1;
  s.lipschitz.L_G(2, 1) = 0.1;
  DependencyMask mask(3, 2);
  mask.restrict_G({2});
  if (ablation_case != 'a') mask.restrict_f({2});
  s.mask = mask;
  if (ablation_case == 'c') {
    Mat G0 = Mat::Zero(3, 2);
    G0(2, 1) = 1.0;
    std::vector<char> g_exact(6, 0);
    g_exact[2 * 2 + 1] = 1;
    s.known = KnownDynamics::affine(Mat::Zero(3, 3), Vec::Zero(3), G0, {1, 1, 1}, g_exact);
  } else if (ablation_case != 'a' && ablation_case != 'b') {
    throw std::invalid_argument(std::string("unknown unicycle side-information case '") + ablation_case + "'");
  }
  return s;
}

SystemModel unicycle() {
  SystemModel s;
  s.name = "unicycle";
  s.n = 3;
  s.m = 2;
  s.f = [](const Vec&) -> Vec { return Vec::Zero(3); };
  s.G = [](const Vec& x) -> Mat {
    Mat G = Mat::Zero(3, 2);
    G(0, 0) = std::cos(x[2]);
    G(1, 0) = std::sin(x[2]);
    G(2, 1) = 1.0;
    return G;
  };
  s.U = box({{-3.0, 3.0}, {-kPi, kPi}});
  s.X = box({{-5.0, 5.0}, {-5.0, 5.0}, {-4.5, 4.5}});
  s.side = unicycle_side_info('b');
  return s;
}

SystemModel quadrotor(const QuadrotorParams& p) {
  SystemModel s;
  s.name = "quadrotor";
  s.n = 6;
  s.m = 2;
  s.f = [p](const Vec& x) -> Vec {
    Vec f(6);
    f << x[1], -p.CDv * x[1] / p.mass, x[3], -(p.mass * p.g + p.CDv * x[3]) / p.mass, x[5],
        -p.CDphi * x[5] / (2.0 * p.Iyy);
    return f;
  };
  s.G = [p](const Vec& x) -> Mat {
    Mat G = Mat::Zero(6, 2);
    const double sp = std::sin(x[4]) / p.mass;
    const double cp = std::cos(x[4]) / p.mass;
    const double tq = p.l / (2.0 * p.Iyy);
    G(1, 0) = -sp;
    G(1, 1) = -sp;
    G(3, 0) = cp;
    G(3, 1) = cp;
    G(5, 0) = -tq;
    G(5, 1) = tq;
    return G;
  };
  s.U = box({{0.0, 18.4}, {0.0, 18.4}});
  s.X = box({{-50.0, 50.0}, {-20.0, 20.0}, {-50.0, 50.0}, {-20.0, 20.0}, {-2.0 * kPi, 2.0 * kPi}, {-20.0, 20.0}});

  SideInfo side;
  side.lipschitz.L_f = Vec::Zero(6);
  side.lipschitz.L_f[1] = 0.3;
  side.lipschitz.L_f[3] = 0.3;
  side.lipschitz.L_f[5] = 0.9;
  side.lipschitz.L_G = Mat::Zero(6, 2);
  side.lipschitz.L_G.row(1).setConstant(0.9);
  side.lipschitz.L_G.row(3).setConstant(0.9);
  side.lipschitz.L_G.row(5).setConstant(0.01);
  DependencyMask mask(6, 2);
  mask.restrict_f({1, 3, 5});
  mask.restrict_G({4});
  side.mask = mask;
  Mat A = Mat::Zero(6, 6);
  A(0, 1) = 1.0;
  A(2, 3) = 1.0;
  A(4, 5) = 1.0;
  std::vector<char> f_exact{1, 0, 1, 0, 1, 0};
  std::vector<char> g_exact{1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0};
  side.known = KnownDynamics::affine(A, Vec::Zero(6), Mat::Zero(6, 2), f_exact, g_exact);
  s.side = side;
  return s;
}

SystemModel make_system(const std::string& name) {
  if (name == "unicycle") return unicycle();
  if (name == "quadrotor") return quadrotor();
  throw std::invalid_argument("unknown system '" + name + "' (expected unicycle or quadrotor)");
}

Vec rk4_step(const SystemModel& model, const Vec& x, const std::function<Vec(double)>& u, double t0,
             double dt, int substeps) {
  if (substeps < 1) throw std::invalid_argument("rk4_step: substeps must be at least 1");
  const double h = dt / substeps;
  Vec y = x;
  for (int s = 0; s < substeps; ++s) {
    const double t = t0 + s * h;
    const Vec k1 = model.xdot(y, u(t));
    const Vec k2 = model.xdot(y + 0.5 * h * k1, u(t + 0.5 * h));
    const Vec k3 = model.xdot(y + 0.5 * h * k2, u(t + 0.5 * h));
    const Vec k4 = model.xdot(y + h * k3, u(t + h));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

Vec rk4_step(const SystemModel& model, const Vec& x, const Vec& u, double dt, int substeps) {
  return rk4_step(model, x, [&u](double) { return u; }, 0.0, dt, substeps);
}

namespace {

Vec uniform_in(const IntervalVector& U, std::mt19937_64& rng) {
  Vec u(static_cast<Eigen::Index>(U.size()));
  for (std::size_t l = 0; l < U.size(); ++l) {
    std::uniform_real_distribution<double> d(U[l].lo(), U[l].hi());
    u[static_cast<Eigen::Index>(l)] = d(rng);
  }
  return u;
}

}  // namespace

Trajectory gen_initial_trajectory(const SystemModel& model, const Vec& x0, std::size_t N, double dt,
                                  std::uint64_t seed, double t0, int substeps) {
  if (N == 0) throw std::invalid_argument("trajectory length must be at least 1");
  if (static_cast<std::size_t>(x0.size()) != model.n) throw DimensionMismatch("x0 has the wrong dimension");
  std::mt19937_64 rng(seed);
  Trajectory traj(model.n, model.m);
  Vec x = x0;
  for (std::size_t i = 0; i < N; ++i) {
    const Vec u = uniform_in(model.U, rng);
    traj.push_back({t0 + static_cast<double>(i) * dt, x, model.xdot(x, u), u});
    x = rk4_step(model, x, u, dt, substeps);
  }
  return traj;
}

bool StopRule::satisfied(const Vec& x_next, double true_cost) const {
  if (kind == Kind::CostThreshold) return true_cost <= threshold;
  return std::abs(x_next[static_cast<Eigen::Index>(component)] - target) <= tol;
}

double ClosedLoopResult::mean_solve_time_us() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : steps) s += r.solve_time_us;
  return s / static_cast<double>(steps.size());
}

double ClosedLoopResult::max_bound() const {
  double b = 0.0;
  for (const auto& r : steps) b = std::max(b, r.bound);
  return b;
}

ClosedLoopResult run_closed_loop(const SystemModel& model, const ExperimentConfig& cfg,
                                 const StepObserver& observer) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (cfg.horizon_steps == 0) throw std::invalid_argument("horizon must be at least one step");
  if (cfg.cost.n() != model.n || cfg.cost.m() != model.m) {
    throw DimensionMismatch("cost dimensions do not match the system");
  }
  ClosedLoopResult res;
  res.initial = gen_initial_trajectory(model, cfg.x0, cfg.init_traj_len, cfg.dt, cfg.seed, 0.0, cfg.substeps);
  Trajectory data = res.initial;
  Vec x = rk4_step(model, data.back().x, data.back().u, cfg.dt, cfg.substeps);
  double t = data.back().t + cfg.dt;

  // optional excitation with random corners of U
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t e = 0; e < cfg.excitation_steps; ++e) {
    Vec u(static_cast<Eigen::Index>(model.m));
    for (std::size_t l = 0; l < model.m; ++l) {
      u[static_cast<Eigen::Index>(l)] = (rng() & 1U) ? model.U[l].hi() : model.U[l].lo();
    }
    data.push_back({t, x, model.xdot(x, u), u});
    x = rk4_step(model, x, u, cfg.dt, cfg.substeps);
    t += cfg.dt;
  }

  BuildOptions bo;
  bo.M = cfg.M;
  KnowledgeBase kb = KnowledgeBase::build(data, cfg.side, model.X, bo);
  SolveOptions so;
  Vec prev_u;
  for (std::size_t i = 0; i < cfg.horizon_steps; ++i) {
    StepRecord rec;
    const auto t_start = std::chrono::steady_clock::now();
    try {
      if (cfg.warm_start && prev_u.size() > 0) so.warm_start = prev_u;
      const AffineEnvelope env = affine_envelope(kb, x, model.U, cfg.dt, cfg.enclosure);
      const ControlDecision d = cfg.relaxation == Relaxation::Idealistic
                                    ? solve_idealistic(env, cfg.cost, x, model.U, so)
                                    : solve_optimistic(env, cfg.cost, x, model.U, model.X, so);
      rec.u = d.u;
      rec.predicted_cost = d.predicted_cost;
      rec.bound = subopt_bound(env, cfg.cost, model.U, model.X);
      rec.envelope = env;
      rec.solve_time_us =
          std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t_start).count();
    } catch (const Error&) {
      rethrow_at_step(i);
    }
    rec.t = t;
    rec.x = x;
    const Vec x_next = rk4_step(model, x, rec.u, cfg.dt, cfg.substeps);
    rec.true_cost = cfg.cost(x_next, rec.u);
    prev_u = rec.u;

    // data for the next decision
    const DataPoint p{t, x, model.xdot(x, rec.u), rec.u};
    try {
      kb.append(p);
      if (cfg.refine_every > 0 && (i + 1) % cfg.refine_every == 0) kb.refine();
    } catch (const Error&) {
      rethrow_at_step(i);
    }
    x = x_next;
    t += cfg.dt;
    res.steps.push_back(std::move(rec));
    if (observer) observer(res.steps.back(), kb);
    if (!res.reached_at && cfg.stop.satisfied(x_next, res.steps.back().true_cost)) {
      res.reached_at = i;
      if (cfg.stop_on_reach) break;
    }
  }
  res.final_state = x;
  return res;
}

}  // namespace datareach
