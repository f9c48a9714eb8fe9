// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,3] [--expected-fail 5,6]
//
// Exit status is nonzero when a criterion fails that is neither listed in
// --expected-fail nor soft (criterion 9 only reports).

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "datareach/config.hpp"
#include "support.hpp"

using namespace datareach;
using testing::Rng;
using testing::vec;

namespace {

const std::string kConfigs = DATAREACH_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1: differential inclusion along a switched-input run

Outcome inclusion_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  const Experiment e = load_experiment(kConfigs + "/unicycle_fig3_b.json");
  const SystemModel& sys = *e.model;
  const Trajectory data = experiment_trajectory(e);
  const KnowledgeBase kb = KnowledgeBase::build(data, e.side, e.X, e.build);

  const double h = 0.01, t15 = 1.5;
  const int grid = 400;  // [0, 4]
  auto u_at = [&](int k) -> Vec {
    const double t = k * h;
    if (k < 150) return data[static_cast<std::size_t>(k / 10)].u;
    return vec({1.0, std::cos(6.0 * (t - t15))});
  };
  const auto cosine = [&](double t) { return vec({1.0, std::cos(6.0 * (t - t15))}); };

  Vec x = data[0].x;
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k <= grid; ++k) {
    const Vec u = u_at(k);
    const Vec xdot = sys.xdot(x, u);
    const IntervalVector env = kb.eval_f(x) + kb.eval_G(x) * IntervalVector::point(u);
    for (std::size_t i = 0; i < env.size(); ++i) {
      const double v = xdot[static_cast<Eigen::Index>(i)];
      if (!env[i].contains(v)) {
        ++violations;
        worst = std::max(worst, std::max(env[i].lo() - v, v - env[i].hi()));
      }
    }
    if (k == grid) break;
    x = k < 150 ? rk4_step(sys, x, u, h) : rk4_step(sys, x, cosine, k * h, h);
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 5.0,
          fmt::format("{} grid times, {} violations (worst {:.3g}), {:.2f} s (limit 5 s)", grid + 1, violations,
                      worst, secs)};
}

// ---- 2: tube containment for sampled cosine-family signals

Outcome tube_containment() {
  const auto t0 = std::chrono::steady_clock::now();
  const Experiment e = load_experiment(kConfigs + "/unicycle_fig3_b.json");
  const Trajectory data = experiment_trajectory(e);
  const ReachRun run = run_reach(e, data);
  const auto& fam = dynamic_cast<const ShiftedCosineFamily&>(*e.reach->signal);
  const Vec& d = fam.delta();

  Rng rng(2);
  int violations = 0;
  const int signals = 100;
  for (int s = 0; s < signals; ++s) {
    Vec a(d.size());
    for (Eigen::Index l = 0; l < d.size(); ++l) {
      // the first four are the corner offsets
      a[l] = s < 4 ? ((s >> l) & 1 ? d[l] : -d[l]) : rng.uniform(-d[l], d[l]);
    }
    const auto u = [&](double t) { return fam.member(t, a); };
    Vec x = run.start;
    double t = run.t_start;
    for (std::size_t i = 0; i < run.tube.boxes.size(); ++i) {
      x = rk4_step(*e.model, x, u, t, e.reach->dt);
      t = run.tube.times[i];
      if (!run.tube.boxes[i].contains(x)) ++violations;
    }
  }
  const double secs = seconds_since(t0);
  const bool full = run.tube.boxes.size() == 200;
  return {violations == 0 && full && secs < 60.0,
          fmt::format("{} signals x {} boxes, {} violations, {:.2f} s (limit 60 s)", signals, run.tube.boxes.size(),
                      violations, secs)};
}

// ---- 3: terminal area shrinks with side information

Outcome side_info_monotonicity() {
  std::map<char, double> area;
  for (char c : {'a', 'b', 'c'}) {
    const Experiment e = load_experiment(kConfigs + "/unicycle_fig3_" + c + ".json");
    const ReachRun run = run_reach(e, experiment_trajectory(e));
    const IntervalVector& last = run.tube.boxes.back();
    area[c] = last[0].width() * last[1].width();
  }
  const bool ok = area['a'] >= 1.05 * area['b'] && area['b'] >= 1.05 * area['c'];
  return {ok, fmt::format("areas a={:.4g} b={:.4g} c={:.4g}, ratios a/b={:.3f} b/c={:.3f} (need >= 1.05)", area['a'],
                          area['b'], area['c'], area['a'] / area['b'], area['b'] / area['c'])};
}

// ---- 4: contraction equals the exact feasible hull

Outcome contraction_optimality() {
  Rng rng(404);
  int mismatches = 0;
  double worst = 0.0;
  const int instances = 200;
  for (int trial = 0; trial < instances; ++trial) {
    const auto inst = testing::random_instance(rng);
    const auto [CF, CG] = contract_point(inst.p, inst.F, inst.G);
    for (std::size_t k = 0; k < inst.F.size(); ++k) {
      std::vector<Interval> Gk;
      for (std::size_t l = 0; l < inst.G.cols(); ++l) Gk.push_back(inst.G(k, l));
      const auto hull = testing::feasible_hull(inst.F[k], Gk, inst.p.xdot[static_cast<Eigen::Index>(k)], inst.p.u);
      if (!hull) {
        ++mismatches;
        continue;
      }
      double gap = std::max(std::abs(CF[k].lo() - hull->f.lo()), std::abs(CF[k].hi() - hull->f.hi()));
      for (std::size_t l = 0; l < Gk.size(); ++l) {
        gap = std::max({gap, std::abs(CG(k, l).lo() - hull->g[l].lo()), std::abs(CG(k, l).hi() - hull->g[l].hi())});
      }
      worst = std::max(worst, gap);
      if (gap > 1e-6) ++mismatches;
    }
  }
  return {mismatches == 0,
          fmt::format("{} instances, {} rows off by more than 1e-6, worst gap {:.3g}", instances, mismatches, worst)};
}

// ---- closed-loop sweeps

struct Sweep {
  int reached = 0;
  int errors = 0;
  double solve_us_sum = 0.0;
  std::size_t steps = 0;
};

Sweep sweep(const std::string& config, Relaxation rel, int seeds) {
  Sweep s;
  for (int seed = 0; seed < seeds; ++seed) {
    Experiment e = load_experiment(config, static_cast<std::uint64_t>(seed));
    e.control->relaxation = rel;
    try {
      const ClosedLoopResult res = run_closed_loop(*e.model, *e.control);
      s.reached += res.reached_at.has_value();
      for (const auto& r : res.steps) s.solve_us_sum += r.solve_time_us;
      s.steps += res.steps.size();
    } catch (const std::exception& ex) {
      spdlog::warn("{} seed {}: {}", config, seed, ex.what());
      ++s.errors;
    }
  }
  return s;
}

std::map<Relaxation, Sweep>& unicycle_sweeps() {
  static std::map<Relaxation, Sweep> cache;
  if (cache.empty()) {
    for (auto rel : {Relaxation::Idealistic, Relaxation::Optimistic}) {
      cache[rel] = sweep(kConfigs + "/unicycle_control.json", rel, 10);
    }
  }
  return cache;
}

// ---- 5: unicycle reaches the 0.1 sublevel set

Outcome unicycle_closed_loop() {
  auto& sw = unicycle_sweeps();
  const auto& id = sw[Relaxation::Idealistic];
  const auto& op = sw[Relaxation::Optimistic];
  return {id.reached >= 8 && op.reached >= 8,
          fmt::format("reached within 150 steps: idealistic {}/10, optimistic {}/10 (need 8; errors {}/{})",
                      id.reached, op.reached, id.errors, op.errors)};
}

// ---- 6: quadrotor setpoints

Outcome quadrotor_setpoints() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"vx", "py"}) {
    for (auto rel : {Relaxation::Idealistic, Relaxation::Optimistic}) {
      const Sweep s = sweep(kConfigs + "/quadrotor_" + name + ".json", rel, 10);
      ok = ok && s.reached >= 8;
      detail += fmt::format("{}{} {} {}/10", detail.empty() ? "" : ", ", name, to_string(rel), s.reached);
      if (s.errors) detail += fmt::format(" ({} errors)", s.errors);
    }
  }
  return {ok, "within 800 steps: " + detail + " (need 8)"};
}

// ---- 7: suboptimality bound against a grid oracle

// Unicycle successor under constant u, RK4 with the harness's substeps.
void unicycle_rk4(double& px, double& py, double& th, double v, double w, double dt, int substeps) {
  const double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    const double c1 = std::cos(th), s1 = std::sin(th);
    const double t2 = th + 0.5 * h * w, c2 = std::cos(t2), s2 = std::sin(t2);
    const double t4 = th + h * w, c4 = std::cos(t4), s4 = std::sin(t4);
    // stages 2 and 3 share theta
    px += h * v * (c1 + 4.0 * c2 + c4) / 6.0;
    py += h * v * (s1 + 4.0 * s2 + s4) / 6.0;
    th = t4;
  }
}

Outcome subopt_validity() {
  const int grid = 200;
  const int seeds = 2;
  std::size_t checked = 0;
  int violations = 0;
  double worst = -INFINITY;
  for (auto rel : {Relaxation::Idealistic, Relaxation::Optimistic}) {
    for (int seed = 0; seed < seeds; ++seed) {
      Experiment e = load_experiment(kConfigs + "/unicycle_control.json", static_cast<std::uint64_t>(seed));
      ExperimentConfig cfg = *e.control;
      cfg.relaxation = rel;
      const IntervalVector U = e.U;
      const auto observer = [&](const StepRecord& rec, const KnowledgeBase&) {
        double best = rec.true_cost;
        Vec y(3), u(2);
        for (int i = 0; i < grid; ++i) {
          const double v = U[0].lo() + U[0].width() * i / (grid - 1);
          for (int j = 0; j < grid; ++j) {
            const double w = U[1].lo() + U[1].width() * j / (grid - 1);
            double px = rec.x[0], py = rec.x[1], th = rec.x[2];
            unicycle_rk4(px, py, th, v, w, cfg.dt, cfg.substeps);
            y << px, py, th;
            u << v, w;
            best = std::min(best, cfg.cost(y, u));
          }
        }
        const double excess = std::abs(best - rec.predicted_cost) - rec.bound;
        worst = std::max(worst, excess);
        ++checked;
        if (excess > 1e-9 * (1.0 + std::abs(best))) ++violations;
      };
      try {
        run_closed_loop(*e.model, cfg, observer);
      } catch (const std::exception& ex) {
        return {false, fmt::format("seed {} {}: {}", seed, to_string(rel), ex.what())};
      }
    }
  }
  return {violations == 0 && checked > 0,
          fmt::format("{} steps checked, {} violations, max(|c*-c|-bound) = {:.3g}", checked, violations, worst)};
}

// ---- 8: exactness on a known affine system

Outcome degenerate_exactness() {
  // two double integrators with gains 1 and 2 and a constant drift
  Mat A = Mat::Zero(4, 4);
  A(0, 1) = 1.0;
  A(2, 3) = 1.0;
  Mat G0 = Mat::Zero(4, 2);
  G0(1, 0) = 1.0;
  G0(3, 1) = 2.0;
  const Vec c = vec({0.0, 0.5, 0.0, -0.3});
  const IntervalVector X = testing::cube(4, -100, 100);
  const KnowledgeBase kb = testing::exact_affine_kb(A, c, G0, X);
  const IntervalVector U = testing::cube(2, -1, 1);
  const auto cost = QuadraticCost::tracking(Vec::Ones(4), Vec::Zero(4), 2);

  Rng rng(8);
  double env_gap = 0.0, u_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec x = vec({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    const double dt = rng.uniform(0.05, 0.5);

    // x + f dt + (df/dx) f dt^2/2, and G dt + (df/dx) G dt^2/2
    const Vec f = A * x + c;
    const Vec B = x + f * dt + A * f * (dt * dt / 2);
    const Mat Am = G0 * dt + A * G0 * (dt * dt / 2);
    const AffineEnvelope env = affine_envelope(kb, x, U, dt);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto K = static_cast<Eigen::Index>(k);
      env_gap = std::max({env_gap, std::abs(env.B[k].lo() - B[K]), std::abs(env.B[k].hi() - B[K])});
      for (std::size_t l = 0; l < 2; ++l) {
        const double a = Am(K, static_cast<Eigen::Index>(l));
        for (const Interval& iv : {env.A_plus(k, l), env.A_minus(k, l)}) {
          env_gap = std::max({env_gap, std::abs(iv.lo() - a), std::abs(iv.hi() - a)});
        }
      }
    }

    // per axis: minimise (b0 + a0 u)^2 + (b1 + a1 u)^2 over [-1, 1]
    Vec expect(2);
    for (int j = 0; j < 2; ++j) {
      const double a0 = Am(2 * j, j), a1 = Am(2 * j + 1, j);
      const double b0 = B[2 * j], b1 = B[2 * j + 1];
      expect[j] = std::clamp(-(a0 * b0 + a1 * b1) / (a0 * a0 + a1 * a1), -1.0, 1.0);
    }
    for (auto rel : {Relaxation::Idealistic, Relaxation::Optimistic}) {
      const ControlDecision d = datacontrol_step(kb, x, cost, U, X, dt, rel);
      u_gap = std::max(u_gap, (d.u - expect).cwiseAbs().maxCoeff());
    }
  }
  return {env_gap <= 1e-9 && u_gap <= 1e-6,
          fmt::format("envelope gap {:.3g} (limit 1e-9), control gap {:.3g} (limit 1e-6)", env_gap, u_gap)};
}

// ---- 9: solve time

Outcome solve_time() {
  auto& sw = unicycle_sweeps();
  double sum = 0.0;
  std::size_t steps = 0;
  for (const auto& [rel, s] : sw) {
    sum += s.solve_us_sum;
    steps += s.steps;
  }
  const double mean_ms = steps ? sum / static_cast<double>(steps) / 1000.0 : 0.0;
  if (mean_ms > 50.0) spdlog::warn("mean datacontrol_step time {:.2f} ms exceeds 50 ms", mean_ms);
  return {steps > 0 && mean_ms <= 50.0, fmt::format("mean {:.3f} ms over {} unicycle steps (limit 50 ms)", mean_ms, steps)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only, expected_fail;
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_option("--expected-fail", expected_fail, "criteria whose failure does not fail the run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::err);
  if (const char* v = std::getenv("DATAREACH_LOG")) spdlog::set_level(spdlog::level::from_str(v));

  const std::vector<std::function<Outcome()>> criteria = {
      inclusion_soundness,  tube_containment,    side_info_monotonicity, contraction_optimality, unicycle_closed_loop,
      quadrotor_setpoints, subopt_validity,     degenerate_exactness,   solve_time,
  };
  const std::set<int> soft = {9};
  const std::set<int> tolerated(expected_fail.begin(), expected_fail.end());
  const std::set<int> selected(only.begin(), only.end());

  int hard_failures = 0;
  for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) {
    if (!selected.empty() && !selected.count(i)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(i - 1)]();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    std::string note;
    if (!o.pass && soft.count(i)) note = " [soft]";
    if (!o.pass && tolerated.count(i)) note = " [expected]";
    if (!o.pass && note.empty()) ++hard_failures;
    std::cout << fmt::format("criterion {}: {}{}  {}  ({:.1f} s)", i, o.pass ? "PASS" : "FAIL", note, o.detail,
                             seconds_since(t0))
              << std::endl;
  }
  return hard_failures == 0 ? 0 : 1;
}
