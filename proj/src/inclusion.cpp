#include "datareach/inclusion.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <spdlog/spdlog.h>

namespace datareach {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

// Intersection that closes floating-point sized gaps. Throws on real gaps.
Interval meet(const Interval& a, const Interval& b, double tol, const char* what) {
  if (auto c = intersect(a, b)) return *c;
  const double lo = std::max(a.lo(), b.lo());
  const double hi = std::min(a.hi(), b.hi());
  const double scale = 1.0 + std::max(std::abs(lo), std::abs(hi));
  if (lo - hi <= tol * scale) return Interval(hi, lo);
  throw InconsistentData(std::string(what) + ": empty intersection (gap " +
                         std::to_string(lo - hi) + ")");
}

}  // namespace

// ---------------------------------------------------------------------------

Trajectory::Trajectory(std::size_t n, std::size_t m) : n_(n), m_(m) {
  if (n == 0 || m == 0) throw DimensionMismatch("trajectory dimensions must be positive");
}

void Trajectory::push_back(DataPoint p) {
  if (static_cast<std::size_t>(p.x.size()) != n_ || static_cast<std::size_t>(p.xdot.size()) != n_ ||
      static_cast<std::size_t>(p.u.size()) != m_) {
    throw DimensionMismatch("data point dimensions do not match the trajectory");
  }
  if (!std::isfinite(p.t) || !all_finite(p.x) || !all_finite(p.xdot) || !all_finite(p.u)) {
    throw std::invalid_argument("data point has non-finite entries");
  }
  if (!pts_.empty() && !(p.t > pts_.back().t)) {
    throw std::invalid_argument("trajectory timestamps must be strictly increasing");
  }
  pts_.push_back(std::move(p));
}

void LipschitzBounds::validate(std::size_t n, std::size_t m) const {
  if (static_cast<std::size_t>(L_f.size()) != n || static_cast<std::size_t>(L_G.rows()) != n ||
      static_cast<std::size_t>(L_G.cols()) != m) {
    throw DimensionMismatch("Lipschitz bounds have the wrong shape");
  }
  if ((L_f.array() < 0.0).any() || (L_G.array() < 0.0).any() || !L_f.allFinite() ||
      !L_G.allFinite()) {
    throw std::invalid_argument("Lipschitz bounds must be finite and nonnegative");
  }
}

DependencyMask::DependencyMask(std::size_t n, std::size_t m, bool fill)
    : n_(n), m_(m), f_(n * n, fill), g_(n * m * n, fill) {}

void DependencyMask::restrict_f(const std::vector<std::size_t>& coords) {
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t p = 0; p < n_; ++p) set_f(k, p, false);
    for (auto p : coords) set_f(k, p, true);
  }
}

void DependencyMask::restrict_G(const std::vector<std::size_t>& coords) {
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t l = 0; l < m_; ++l) {
      for (std::size_t p = 0; p < n_; ++p) set_G(k, l, p, false);
      for (auto p : coords) set_G(k, l, p, true);
    }
  }
}

KnownDynamics KnownDynamics::affine(const Mat& A, const Vec& c, const Mat& G0,
                                    std::vector<char> f_exact, std::vector<char> G_exact) {
  const auto n = static_cast<std::size_t>(A.rows());
  const auto m = static_cast<std::size_t>(G0.cols());
  if (static_cast<std::size_t>(A.cols()) != n || static_cast<std::size_t>(c.size()) != n ||
      static_cast<std::size_t>(G0.rows()) != n || f_exact.size() != n || G_exact.size() != n * m) {
    throw DimensionMismatch("affine known dynamics: inconsistent shapes");
  }
  KnownDynamics kd;
  kd.f = [A, c](const Vec& x) -> Vec { return A * x + c; };
  kd.f_ext = [A, c](const IntervalVector& x) { return A * x + c; };
  kd.jf_ext = [A](const IntervalVector&) { return IntervalMatrix::point(A); };
  kd.G = [G0](const Vec&) -> Mat { return G0; };
  kd.G_ext = [G0](const IntervalVector&) { return IntervalMatrix::point(G0); };
  kd.jG_ext = [n, m](const IntervalVector&) { return IntervalTensor3(n, m, n); };
  kd.f_exact = std::move(f_exact);
  kd.G_exact = std::move(G_exact);
  return kd;
}

void SideInfo::validate(std::size_t n, std::size_t m) const {
  lipschitz.validate(n, m);
  if (ranges) {
    if (ranges->region.size() != n || ranges->f_range.size() != n ||
        ranges->G_range.rows() != n || ranges->G_range.cols() != m) {
      throw DimensionMismatch("vector field bounds have the wrong shape");
    }
  }
  if (gradients) {
    if (gradients->jf) {
      const auto& jf = *gradients->jf;
      if (jf.rows() != n || jf.cols() != n) throw DimensionMismatch("jf bounds have the wrong shape");
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t p = 0; p < n; ++p) {
          if (!intersect(jf(k, p), Interval::symmetric(lipschitz.L_f[static_cast<Eigen::Index>(k)]))) {
            throw InconsistentData("gradient bound on f misses its Lipschitz cone");
          }
        }
      }
    }
    if (gradients->jG) {
      const auto& jG = *gradients->jG;
      if (jG.dim0() != n || jG.dim1() != m || jG.dim2() != n) {
        throw DimensionMismatch("jG bounds have the wrong shape");
      }
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < m; ++l) {
          const double L = lipschitz.L_G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
          for (std::size_t p = 0; p < n; ++p) {
            if (!intersect(jG(k, l, p), Interval::symmetric(L))) {
              throw InconsistentData("gradient bound on G misses its Lipschitz cone");
            }
          }
        }
      }
    }
  }
  if (mask && (mask->n() != n || mask->m() != m)) {
    throw DimensionMismatch("dependency mask has the wrong shape");
  }
  if (known && (known->f_exact.size() != n || known->G_exact.size() != n * m)) {
    throw DimensionMismatch("known dynamics exactness flags have the wrong shape");
  }
}

// ---------------------------------------------------------------------------

std::pair<IntervalVector, IntervalMatrix> contract_point(const DataPoint& p, const IntervalVector& F,
                                                         const IntervalMatrix& G, double tol,
                                                         double u_eps) {
  const std::size_t n = F.size();
  const std::size_t m = G.cols();
  if (G.rows() != n || static_cast<std::size_t>(p.x.size()) != n ||
      static_cast<std::size_t>(p.xdot.size()) != n || static_cast<std::size_t>(p.u.size()) != m) {
    throw DimensionMismatch("contract_point: inconsistent shapes");
  }
  IntervalVector CF(n);
  IntervalMatrix CG(n, m);
  std::vector<Interval> tail(m + 1);  // tail[l] = sum_{q >= l} G_kq u_q
  for (std::size_t k = 0; k < n; ++k) {
    const double xd = p.xdot[static_cast<Eigen::Index>(k)];
    tail[m] = Interval::point(0.0);
    for (std::size_t l = m; l-- > 0;) tail[l] = tail[l + 1] + G(k, l) * p.u[static_cast<Eigen::Index>(l)];

    CF[k] = meet(F[k], xd - tail[0], tol, "contraction of f");
    Interval S = meet(xd - CF[k], tail[0], tol, "contraction of G u");
    for (std::size_t l = 0; l < m; ++l) {
      const double ul = p.u[static_cast<Eigen::Index>(l)];
      const Interval& rest = tail[l + 1];
      if (std::abs(ul) >= u_eps) {
        const Interval gu = meet(S - rest, G(k, l) * ul, tol, "contraction of G");
        CG(k, l) = meet(divide(gu, ul), G(k, l), tol, "contraction of G");
      } else {
        CG(k, l) = G(k, l);
      }
      S = meet(S - CG(k, l) * ul, rest, tol, "contraction of G u");
    }
  }
  return {CF, CG};
}

// ---------------------------------------------------------------------------

DataPoint KnowledgeBase::residual_point(const DataPoint& p) const {
  if (!side_.known) return p;
  const auto& kn = *side_.known;
  DataPoint r = p;
  r.xdot = p.xdot - (kn.f(p.x) + kn.G(p.x) * p.u);
  for (std::size_t k = 0; k < n_; ++k) {
    bool exact_row = kn.is_f_exact(k);
    for (std::size_t l = 0; l < m_; ++l) exact_row = exact_row && kn.is_G_exact(k, l, m_);
    if (exact_row) r.xdot[static_cast<Eigen::Index>(k)] = 0.0;
  }
  return r;
}

void KnowledgeBase::setup_patterns() {
  std::map<std::vector<std::size_t>, std::size_t> ids;
  auto id_of = [&](std::vector<std::size_t> coords) {
    auto [it, inserted] = ids.emplace(coords, patterns_.size());
    if (inserted) patterns_.push_back({std::move(coords)});
    return it->second;
  };
  f_pattern_.assign(n_, 0);
  G_pattern_.assign(n_ * m_, 0);
  for (std::size_t k = 0; k < n_; ++k) {
    std::vector<std::size_t> c;
    for (std::size_t p = 0; p < n_; ++p) {
      if (!side_.mask || side_.mask->f(k, p)) c.push_back(p);
    }
    f_pattern_[k] = id_of(std::move(c));
    for (std::size_t l = 0; l < m_; ++l) {
      std::vector<std::size_t> cg;
      for (std::size_t p = 0; p < n_; ++p) {
        if (!side_.mask || side_.mask->G(k, l, p)) cg.push_back(p);
      }
      G_pattern_[k * m_ + l] = id_of(std::move(cg));
    }
  }
  dist_.assign(patterns_.size(), {});
  dist0_.assign(patterns_.size(), {});
}

double KnowledgeBase::point_distance(std::size_t pattern, const Vec& a, const Vec& b) const {
  double s = 0.0;
  for (auto p : patterns_[pattern].coords) {
    const double d = a[static_cast<Eigen::Index>(p)] - b[static_cast<Eigen::Index>(p)];
    s += d * d;
  }
  return std::sqrt(s);
}

double KnowledgeBase::pair_distance(std::size_t pattern, std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  return i > j ? dist_[pattern][i][j] : dist_[pattern][j][i];
}

void KnowledgeBase::add_distances(const Vec& x) {
  for (std::size_t q = 0; q < patterns_.size(); ++q) {
    std::vector<double> row(pts_.size());
    for (std::size_t j = 0; j < pts_.size(); ++j) row[j] = point_distance(q, x, pts_[j].x);
    dist_[q].push_back(std::move(row));
    dist0_[q].push_back(point_distance(q, x, x0_));
  }
}

KnowledgeBase::Bounds KnowledgeBase::fictitious_bounds(const std::vector<double>& d0) const {
  Bounds b;
  b.lo.resize(n_ + n_ * m_);
  b.hi.resize(n_ + n_ * m_);
  for (std::size_t k = 0; k < n_; ++k) {
    const double r = L_.L_f[static_cast<Eigen::Index>(k)] * d0[f_pattern_[k]];
    b.lo[k] = C0_F_[k].lo() - r;
    b.hi[k] = C0_F_[k].hi() + r;
    for (std::size_t l = 0; l < m_; ++l) {
      const double rg =
          L_.L_G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * d0[G_pattern_[k * m_ + l]];
      const std::size_t e = n_ + k * m_ + l;
      b.lo[e] = C0_G_(k, l).lo() - rg;
      b.hi[e] = C0_G_(k, l).hi() + rg;
    }
  }
  return b;
}

void KnowledgeBase::apply_cone(Bounds& b, std::size_t j, const std::vector<double>& d) const {
  const auto& P = pts_[j];
  for (std::size_t k = 0; k < n_; ++k) {
    const double r = L_.L_f[static_cast<Eigen::Index>(k)] * d[f_pattern_[k]];
    b.lo[k] = std::max(b.lo[k], P.C_F[k].lo() - r);
    b.hi[k] = std::min(b.hi[k], P.C_F[k].hi() + r);
    for (std::size_t l = 0; l < m_; ++l) {
      const double rg =
          L_.L_G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * d[G_pattern_[k * m_ + l]];
      const std::size_t e = n_ + k * m_ + l;
      b.lo[e] = std::max(b.lo[e], P.C_G(k, l).lo() - rg);
      b.hi[e] = std::min(b.hi[e], P.C_G(k, l).hi() + rg);
    }
  }
}

void KnowledgeBase::finish(Bounds& b, const IntervalVector* query, IntervalVector& F,
                           IntervalMatrix& G) const {
  auto make = [&](std::size_t e) {
    const double lo = b.lo[e];
    const double hi = b.hi[e];
    if (lo <= hi) return Interval(lo, hi);
    const double scale = 1.0 + std::max(std::abs(lo), std::abs(hi));
    if (lo - hi <= kConsistencyTol * scale) return Interval(hi, lo);
    throw InconsistentData("Lipschitz envelopes do not intersect (gap " + std::to_string(lo - hi) +
                           "); the data contradict the side information");
  };
  F = IntervalVector(n_);
  G = IntervalMatrix(n_, m_);
  for (std::size_t k = 0; k < n_; ++k) {
    F[k] = make(k);
    for (std::size_t l = 0; l < m_; ++l) G(k, l) = make(n_ + k * m_ + l);
  }
  if (query && side_.ranges && query->subset_of(side_.ranges->region)) {
    for (std::size_t k = 0; k < n_; ++k) {
      F[k] = meet(F[k], (*f_res_range_)[k], kConsistencyTol, "vector field bound on f");
      for (std::size_t l = 0; l < m_; ++l) {
        G(k, l) = meet(G(k, l), (*G_res_range_)(k, l), kConsistencyTol, "vector field bound on G");
      }
    }
  }
  fix_exact(F, G);
}

void KnowledgeBase::fix_exact(IntervalVector& F, IntervalMatrix& G) const {
  if (!side_.known) return;
  for (std::size_t k = 0; k < n_; ++k) {
    if (side_.known->is_f_exact(k)) F[k] = Interval::point(0.0);
    for (std::size_t l = 0; l < m_; ++l) {
      if (side_.known->is_G_exact(k, l, m_)) G(k, l) = Interval::point(0.0);
    }
  }
}

void KnowledgeBase::envelope_at_point(std::size_t i, bool include_later, IntervalVector& F,
                                      IntervalMatrix& G) const {
  const std::size_t P = patterns_.size();
  std::vector<double> d(P);
  for (std::size_t q = 0; q < P; ++q) d[q] = dist0_[q][i];
  Bounds b = fictitious_bounds(d);
  const std::size_t end = include_later ? pts_.size() : i;
  for (std::size_t j = 0; j < end; ++j) {
    for (std::size_t q = 0; q < P; ++q) d[q] = pair_distance(q, i, j);
    apply_cone(b, j, d);
  }
  const IntervalVector xi = IntervalVector::point(pts_[i].x);
  finish(b, &xi, F, G);
}

double KnowledgeBase::contract_into(std::size_t i, const IntervalVector& F, const IntervalMatrix& G) {
  auto [CF, CG] = contract_point(residual_data_[i], F, G, kConsistencyTol);
  fix_exact(CF, CG);
  auto& P = pts_[i];
  double move = 0.0;
  if (!P.C_F.empty()) {
    for (std::size_t k = 0; k < n_; ++k) {
      move = std::max({move, std::abs(CF[k].lo() - P.C_F[k].lo()), std::abs(CF[k].hi() - P.C_F[k].hi())});
      for (std::size_t l = 0; l < m_; ++l) {
        move = std::max({move, std::abs(CG(k, l).lo() - P.C_G(k, l).lo()),
                         std::abs(CG(k, l).hi() - P.C_G(k, l).hi())});
      }
    }
  }
  P.C_F = std::move(CF);
  P.C_G = std::move(CG);
  return move;
}

double KnowledgeBase::sweep() {
  double move = 0.0;
  IntervalVector F;
  IntervalMatrix G;
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    envelope_at_point(i, true, F, G);
    move = std::max(move, contract_into(i, F, G));
  }
  return move;
}

KnowledgeBase KnowledgeBase::build(const Trajectory& traj, const SideInfo& side,
                                   const IntervalVector& X, const BuildOptions& opts) {
  const std::size_t n = traj.n();
  const std::size_t m = traj.m();
  if (traj.empty()) throw std::invalid_argument("knowledge base needs at least one data point");
  if (!(opts.M > 0.0)) throw std::invalid_argument("M must be positive");
  if (X.size() != n) throw DimensionMismatch("state domain has the wrong dimension");
  side.validate(n, m);

  KnowledgeBase kb;
  kb.n_ = n;
  kb.m_ = m;
  kb.side_ = side;
  kb.X_ = X;
  kb.opts_ = opts;
  kb.L_ = side.lipschitz;
  if (side.known) {
    for (std::size_t k = 0; k < n; ++k) {
      if (side.known->is_f_exact(k)) kb.L_.L_f[static_cast<Eigen::Index>(k)] = 0.0;
      for (std::size_t l = 0; l < m; ++l) {
        if (side.known->is_G_exact(k, l, m)) {
          kb.L_.L_G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = 0.0;
        }
      }
    }
  }

  if (side.ranges) {
    const auto& R = *side.ranges;
    kb.x0_ = R.region.mid();
    IntervalVector fr = R.f_range;
    IntervalMatrix gr = R.G_range;
    if (side.known) {
      fr = fr - side.known->f_ext(R.region);
      gr = gr - side.known->G_ext(R.region);
    }
    kb.f_res_range_ = fr;
    kb.G_res_range_ = gr;
    kb.C0_F_ = fr;
    kb.C0_G_ = gr;
  } else {
    kb.x0_ = X.mid();
    kb.C0_F_ = IntervalVector(n, Interval::symmetric(opts.M));
    kb.C0_G_ = IntervalMatrix(n, m, Interval::symmetric(opts.M));
  }
  kb.fix_exact(kb.C0_F_, kb.C0_G_);
  kb.setup_patterns();

  IntervalVector F;
  IntervalMatrix G;
  for (const auto& p : traj) {
    kb.add_distances(p.x);
    kb.pts_.push_back({p.x, IntervalVector(), IntervalMatrix()});
    kb.residual_data_.push_back(kb.residual_point(p));
    const std::size_t i = kb.pts_.size() - 1;
    kb.envelope_at_point(i, false, F, G);
    kb.contract_into(i, F, G);
  }
  kb.refine(opts.max_sweeps);
  if (!kb.converged_) {
    spdlog::warn("knowledge base not invariant after {} sweeps; envelopes remain sound but loose", kb.sweeps_);
  }
  return kb;
}

int KnowledgeBase::refine(int max_sweeps) {
  if (max_sweeps < 0) max_sweeps = opts_.max_sweeps;
  converged_ = false;
  int s = 0;
  while (s < max_sweeps) {
    ++s;
    if (sweep() < opts_.invariance_tol) {
      converged_ = true;
      break;
    }
  }
  sweeps_ = s;
  if (!converged_) spdlog::debug("knowledge base not invariant after {} sweeps", s);
  return s;
}

void KnowledgeBase::append(const DataPoint& p) {
  if (static_cast<std::size_t>(p.x.size()) != n_ || static_cast<std::size_t>(p.u.size()) != m_ ||
      static_cast<std::size_t>(p.xdot.size()) != n_) {
    throw DimensionMismatch("appended data point has the wrong dimensions");
  }
  add_distances(p.x);
  pts_.push_back({p.x, IntervalVector(), IntervalMatrix()});
  residual_data_.push_back(residual_point(p));
  const std::size_t j = pts_.size() - 1;
  IntervalVector F;
  IntervalMatrix G;
  envelope_at_point(j, false, F, G);
  contract_into(j, F, G);

  const std::size_t P = patterns_.size();
  std::vector<double> d(P);
  for (std::size_t i = 0; i < j; ++i) {
    Bounds b;
    b.lo.resize(n_ + n_ * m_);
    b.hi.resize(n_ + n_ * m_);
    for (std::size_t k = 0; k < n_; ++k) {
      b.lo[k] = pts_[i].C_F[k].lo();
      b.hi[k] = pts_[i].C_F[k].hi();
      for (std::size_t l = 0; l < m_; ++l) {
        b.lo[n_ + k * m_ + l] = pts_[i].C_G(k, l).lo();
        b.hi[n_ + k * m_ + l] = pts_[i].C_G(k, l).hi();
      }
    }
    for (std::size_t q = 0; q < P; ++q) d[q] = dist_[q][j][i];
    apply_cone(b, j, d);
    const IntervalVector xi = IntervalVector::point(pts_[i].x);
    finish(b, &xi, F, G);
    contract_into(i, F, G);
  }
  converged_ = false;
}

namespace {

// Upper end of the norm of (x - c) restricted to coords.
double box_distance_hi(const IntervalVector& x, const Vec& c, const std::vector<std::size_t>& coords) {
  double s = 0.0;
  for (auto p : coords) {
    const double ci = c[static_cast<Eigen::Index>(p)];
    const double a = std::abs(x[p].lo() - ci);
    const double b = std::abs(x[p].hi() - ci);
    const double mx = std::max(a, b);
    s += mx * mx;
  }
  return std::sqrt(s);
}

}  // namespace

std::pair<IntervalVector, IntervalMatrix> KnowledgeBase::eval_residual(const IntervalVector& x) const {
  if (x.size() != n_) throw DimensionMismatch("envelope query has the wrong dimension");
  const std::size_t P = patterns_.size();
  std::vector<double> d(P);
  for (std::size_t q = 0; q < P; ++q) d[q] = box_distance_hi(x, x0_, patterns_[q].coords);
  Bounds b = fictitious_bounds(d);
  for (std::size_t j = 0; j < pts_.size(); ++j) {
    for (std::size_t q = 0; q < P; ++q) d[q] = box_distance_hi(x, pts_[j].x, patterns_[q].coords);
    apply_cone(b, j, d);
  }
  std::pair<IntervalVector, IntervalMatrix> r;
  finish(b, &x, r.first, r.second);
  return r;
}

std::pair<IntervalVector, IntervalMatrix> KnowledgeBase::eval(const IntervalVector& x) const {
  auto r = eval_residual(x);
  if (!side_.known) return r;
  r.first = r.first + side_.known->f_ext(x);
  r.second = r.second + side_.known->G_ext(x);
  if (side_.ranges && x.subset_of(side_.ranges->region)) {
    for (std::size_t k = 0; k < n_; ++k) {
      r.first[k] = meet(r.first[k], side_.ranges->f_range[k], kConsistencyTol, "vector field bound on f");
      for (std::size_t l = 0; l < m_; ++l) {
        r.second(k, l) =
            meet(r.second(k, l), side_.ranges->G_range(k, l), kConsistencyTol, "vector field bound on G");
      }
    }
  }
  return r;
}

}  // namespace datareach
