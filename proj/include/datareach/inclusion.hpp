#pragma once

// Data ingestion, per-point contraction and the Lipschitz envelopes of f and G.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "datareach/interval.hpp"

namespace datareach {

inline constexpr double kDefaultM = 1e6;
inline constexpr double kZeroControlEps = 1e-8;
/// Relative gap tolerated between two intervals that should intersect but
/// miss each other by floating-point noise.
inline constexpr double kConsistencyTol = 1e-9;

struct DataPoint {
  double t = 0.0;
  Vec x;
  Vec xdot;
  Vec u;
};

class Trajectory {
 public:
  Trajectory(std::size_t n, std::size_t m);

  /// Validates dimensions, finiteness and strictly increasing time.
  void push_back(DataPoint p);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t size() const noexcept { return pts_.size(); }
  bool empty() const noexcept { return pts_.empty(); }
  const DataPoint& operator[](std::size_t i) const { return pts_[i]; }
  const DataPoint& back() const { return pts_.back(); }
  auto begin() const noexcept { return pts_.begin(); }
  auto end() const noexcept { return pts_.end(); }

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<DataPoint> pts_;
};

struct LipschitzBounds {
  Vec L_f;  // n
  Mat L_G;  // n x m

  void validate(std::size_t n, std::size_t m) const;
};

/// Known ranges of f and G over a region of the state space.
struct VectorFieldBounds {
  IntervalVector region;
  IntervalVector f_range;
  IntervalMatrix G_range;
};

struct GradientBounds {
  std::optional<IntervalMatrix> jf;   // n x n
  std::optional<IntervalTensor3> jG;  // n x m x n
};

/// false entries mean the component does not depend on that state coordinate.
class DependencyMask {
 public:
  DependencyMask() = default;
  DependencyMask(std::size_t n, std::size_t m, bool fill = true);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }

  bool f(std::size_t k, std::size_t p) const { return f_[k * n_ + p] != 0; }
  bool G(std::size_t k, std::size_t l, std::size_t p) const { return g_[(k * m_ + l) * n_ + p] != 0; }
  void set_f(std::size_t k, std::size_t p, bool v) { f_[k * n_ + p] = v; }
  void set_G(std::size_t k, std::size_t l, std::size_t p, bool v) { g_[(k * m_ + l) * n_ + p] = v; }

  /// Every f row (resp. every G entry) depends only on the listed coordinates.
  void restrict_f(const std::vector<std::size_t>& coords);
  void restrict_G(const std::vector<std::size_t>& coords);

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<char> f_;
  std::vector<char> g_;
};

/// The known part of the dynamics: f = f_kn + f_ukn, G = G_kn + G_ukn.
/// Entries flagged exact have an identically zero unknown residual.
struct KnownDynamics {
  std::function<Vec(const Vec&)> f;
  std::function<IntervalVector(const IntervalVector&)> f_ext;
  std::function<IntervalMatrix(const IntervalVector&)> jf_ext;
  std::function<Mat(const Vec&)> G;
  std::function<IntervalMatrix(const IntervalVector&)> G_ext;
  std::function<IntervalTensor3(const IntervalVector&)> jG_ext;
  std::vector<char> f_exact;  // n
  std::vector<char> G_exact;  // n * m, row-major

  bool is_f_exact(std::size_t k) const { return f_exact[k] != 0; }
  bool is_G_exact(std::size_t k, std::size_t l, std::size_t m) const {
    return G_exact[k * m + l] != 0;
  }

  /// f_kn(x) = A x + c, G_kn(x) = G0.
  static KnownDynamics affine(const Mat& A, const Vec& c, const Mat& G0,
                              std::vector<char> f_exact, std::vector<char> G_exact);
};

struct SideInfo {
  LipschitzBounds lipschitz;
  std::optional<VectorFieldBounds> ranges;
  std::optional<GradientBounds> gradients;
  std::optional<DependencyMask> mask;
  std::optional<KnownDynamics> known;

  void validate(std::size_t n, std::size_t m) const;
};

struct KnowledgePoint {
  Vec x;
  IntervalVector C_F;
  IntervalMatrix C_G;
};

/// Smallest enclosures of f(x) in F and G(x) in G compatible with
/// xdot = f(x) + G(x) u. Gaps up to tol * (1 + |v|) between intervals that
/// must intersect are closed instead of reported.
/// Throws InconsistentData on an empty intersection.
std::pair<IntervalVector, IntervalMatrix> contract_point(const DataPoint& p, const IntervalVector& F,
                                                         const IntervalMatrix& G,
                                                         double tol = kConsistencyTol,
                                                         double u_eps = kZeroControlEps);

struct BuildOptions {
  double M = kDefaultM;
  double invariance_tol = 1e-9;
  int max_sweeps = 100;
};

class KnowledgeBase {
 public:
  /// Runs the chronological contraction pass followed by full sweeps until
  /// the base stops moving. X is the state domain.
  static KnowledgeBase build(const Trajectory& traj, const SideInfo& side, const IntervalVector& X,
                             const BuildOptions& opts = {});

  /// Total envelopes (known part plus learned residual) of f and G over x.
  std::pair<IntervalVector, IntervalMatrix> eval(const IntervalVector& x) const;
  /// Envelopes of the unknown residual only.
  std::pair<IntervalVector, IntervalMatrix> eval_residual(const IntervalVector& x) const;

  IntervalVector eval_f(const IntervalVector& x) const { return eval(x).first; }
  IntervalMatrix eval_G(const IntervalVector& x) const { return eval(x).second; }
  IntervalVector eval_f(const Vec& x) const { return eval_f(IntervalVector::point(x)); }
  IntervalMatrix eval_G(const Vec& x) const { return eval_G(IntervalVector::point(x)); }

  /// Adds one data point: contracts it against the current base, then
  /// tightens every existing point with the new point's cone only.
  void append(const DataPoint& p);

  /// Full sweeps until invariance or max_sweeps. Returns the sweep count.
  int refine(int max_sweeps = -1);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t size() const noexcept { return pts_.size(); }
  const std::vector<KnowledgePoint>& points() const noexcept { return pts_; }
  const SideInfo& side() const noexcept { return side_; }
  const IntervalVector& domain() const noexcept { return X_; }
  /// Residual Lipschitz constants actually used (zero on exact entries).
  const LipschitzBounds& residual_lipschitz() const noexcept { return L_; }
  bool converged() const noexcept { return converged_; }
  int sweeps() const noexcept { return sweeps_; }

 private:
  KnowledgeBase() = default;

  // Distance patterns: each f row and G entry uses the norm over the state
  // coordinates it depends on. Identical coordinate sets share a pattern.
  struct Pattern {
    std::vector<std::size_t> coords;
  };

  DataPoint residual_point(const DataPoint& p) const;
  void setup_patterns();
  double point_distance(std::size_t pattern, const Vec& a, const Vec& b) const;
  double pair_distance(std::size_t pattern, std::size_t i, std::size_t j) const;
  void add_distances(const Vec& x);
  // lo/hi accumulators for the n + n*m residual entries
  struct Bounds {
    std::vector<double> lo, hi;
  };
  Bounds fictitious_bounds(const std::vector<double>& d0) const;
  void apply_cone(Bounds& b, std::size_t j, const std::vector<double>& d) const;
  void finish(Bounds& b, const IntervalVector* query, IntervalVector& F, IntervalMatrix& G) const;
  void envelope_at_point(std::size_t i, bool include_later, IntervalVector& F, IntervalMatrix& G) const;
  double contract_into(std::size_t i, const IntervalVector& F, const IntervalMatrix& G);
  double sweep();
  void fix_exact(IntervalVector& F, IntervalMatrix& G) const;

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  SideInfo side_;
  IntervalVector X_;
  BuildOptions opts_;
  LipschitzBounds L_;

  Vec x0_;
  IntervalVector C0_F_;
  IntervalMatrix C0_G_;
  std::optional<IntervalVector> f_res_range_;
  std::optional<IntervalMatrix> G_res_range_;

  std::vector<Pattern> patterns_;
  std::vector<std::size_t> f_pattern_;  // n
  std::vector<std::size_t> G_pattern_;  // n * m

  std::vector<KnowledgePoint> pts_;
  std::vector<DataPoint> residual_data_;
  // dist_[pattern][i][j] for j < i; dist0_[pattern][i] to the fictitious point
  std::vector<std::vector<std::vector<double>>> dist_;
  std::vector<std::vector<double>> dist0_;

  bool converged_ = false;
  int sweeps_ = 0;
};

}  // namespace datareach
