#pragma once

// Shared helpers for the test binaries: seeded sampling and small oracles.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>
#include <numbers>
#include <random>

#include "datareach/interval.hpp"
#include "datareach/sim.hpp"

namespace testing {

using datareach::Interval;
using datareach::IntervalMatrix;
using datareach::IntervalVector;
using datareach::Mat;
using datareach::Vec;

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen); }

  Interval interval(double span = 5.0) {
    const double a = uniform(-span, span);
    const double b = uniform(-span, span);
    return {std::min(a, b), std::max(a, b)};
  }
  // Occasionally degenerate, occasionally zero-straddling.
  Interval interval_mixed(double span = 5.0) {
    switch (integer(0, 3)) {
      case 0: return Interval::point(uniform(-span, span));
      case 1: return {-uniform(0.0, span), uniform(0.0, span)};
      default: return interval(span);
    }
  }
  double in(const Interval& a) { return a.is_point() ? a.lo() : uniform(a.lo(), a.hi()); }
  Vec in(const IntervalVector& a) {
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = in(a[i]);
    return v;
  }
  Mat in(const IntervalMatrix& a) {
    Mat v(static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = in(a(i, j));
    }
    return v;
  }
  IntervalVector box(std::size_t n, double span = 5.0) {
    IntervalVector b(n);
    for (auto& c : b) c = interval(span);
    return b;
  }
  // A random interval nested inside a.
  Interval inside(const Interval& a) {
    const double p = in(a), q = in(a);
    return {std::min(p, q), std::max(p, q)};
  }
};

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Interval with every component in [lo, hi].
inline IntervalVector cube(std::size_t n, double lo, double hi) { return IntervalVector(n, Interval(lo, hi)); }

// Start state of the unicycle benchmark runs.
inline Vec unicycle_x0() { return vec({-2.0, -2.5, std::numbers::pi / 2}); }

// Hull of {(f, g) : f in F, g in G, f + g u = xdot} for one row, computed by
// intersecting the hyperplane with every edge of the box (the polytope's
// vertices lie on box edges). Returns nullopt when the row is infeasible.
struct RowHull {
  Interval f;
  std::vector<Interval> g;
};

inline std::optional<RowHull> feasible_hull(const Interval& F, const std::vector<Interval>& G, double xdot,
                                            const Vec& u) {
  const std::size_t d = 1 + G.size();
  std::vector<Interval> box{F};
  box.insert(box.end(), G.begin(), G.end());
  std::vector<double> a(d, 1.0);
  for (std::size_t l = 0; l < G.size(); ++l) a[1 + l] = u[static_cast<Eigen::Index>(l)];

  std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
  std::vector<double> z(d);
  bool any = false;
  auto accept = [&] {
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], z[i]);
      hi[i] = std::max(hi[i], z[i]);
    }
    any = true;
  };
  for (std::size_t j = 0; j < d; ++j) {
    const unsigned corners = 1u << (d - 1);
    for (unsigned k = 0; k < corners; ++k) {
      double rest = 0.0, scale = std::abs(xdot);
      for (std::size_t i = 0, bit = 0; i < d; ++i) {
        if (i == j) continue;
        z[i] = (k >> bit++) & 1u ? box[i].hi() : box[i].lo();
        rest += a[i] * z[i];
        scale += std::abs(a[i] * z[i]);
      }
      const double tol = 1e-12 * (1.0 + scale);
      if (a[j] == 0.0) {
        if (std::abs(xdot - rest) > tol) continue;
        z[j] = box[j].lo();
        accept();
        z[j] = box[j].hi();
        accept();
        continue;
      }
      const double zj = (xdot - rest) / a[j];
      const double slack = tol / std::abs(a[j]);
      if (zj < box[j].lo() - slack || zj > box[j].hi() + slack) continue;
      z[j] = std::clamp(zj, box[j].lo(), box[j].hi());
      accept();
    }
  }
  if (!any) return std::nullopt;
  RowHull h{Interval(lo[0], hi[0]), {}};
  for (std::size_t l = 0; l < G.size(); ++l) h.g.emplace_back(lo[1 + l], hi[1 + l]);
  return h;
}

// A consistent contraction instance: true (f, G) drawn from the boxes, some
// controls exactly zero, xdot = f + G u.
struct ContractionInstance {
  datareach::DataPoint p;
  IntervalVector F;
  IntervalMatrix G;
};

inline ContractionInstance random_instance(Rng& rng) {
  const std::size_t n = rng.integer(1, 3), m = rng.integer(1, 2);
  ContractionInstance c{{}, IntervalVector(n), IntervalMatrix(n, m)};
  for (auto& e : c.F) e = rng.interval_mixed(3.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < m; ++l) c.G(k, l) = rng.interval_mixed(3.0);
  c.p.u.resize(static_cast<Eigen::Index>(m));
  for (auto& v : c.p.u) {
    v = rng.integer(0, 4) == 0 ? 0.0 : rng.uniform(0.05, 3.0) * (rng.integer(0, 1) ? 1.0 : -1.0);
  }
  c.p.x = Vec::Zero(static_cast<Eigen::Index>(n));
  c.p.xdot = rng.in(c.F) + rng.in(c.G) * c.p.u;
  return c;
}

// Knowledge base of the exactly known affine system xdot = A x + c + G0 u,
// zero Lipschitz bounds, built from one consistent sample at the domain centre.
inline datareach::KnowledgeBase exact_affine_kb(const Mat& A, const Vec& c, const Mat& G0, const IntervalVector& X) {
  using namespace datareach;
  const auto n = static_cast<std::size_t>(A.rows());
  const auto m = static_cast<std::size_t>(G0.cols());
  SideInfo s;
  s.lipschitz.L_f = Vec::Zero(A.rows());
  s.lipschitz.L_G = Mat::Zero(A.rows(), G0.cols());
  s.known = KnownDynamics::affine(A, c, G0, std::vector<char>(n, 1), std::vector<char>(n * m, 1));
  Trajectory traj(n, m);
  const Vec x = X.mid();
  traj.push_back({0.0, x, A * x + c, Vec::Zero(G0.cols())});
  return KnowledgeBase::build(traj, s, X);
}

}  // namespace testing
