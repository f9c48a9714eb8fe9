#include "datareach/control.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

namespace datareach {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kPsdFloor = -1e-9;

void require_psd(const Mat& H, const char* what) {
  if (H.rows() != H.cols()) throw DimensionMismatch(std::string(what) + ": matrix is not square");
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > kSymTol * std::max(1.0, H.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
  if (H.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kPsdFloor * std::max(1.0, H.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument(std::string(what) + ": matrix is not positive semidefinite");
  }
}

Vec clamp(const Vec& z, const Vec& lo, const Vec& hi) { return z.cwiseMax(lo).cwiseMin(hi); }

double quad(const Mat& H, const Vec& g, const Vec& z) { return 0.5 * z.dot(H * z) + g.dot(z); }

double elapsed_us(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

QuadraticCost::QuadraticCost(Mat Q, Mat R, Mat S, Vec q, Vec r, double constant)
    : Q_(std::move(Q)), R_(std::move(R)), S_(std::move(S)), q_(std::move(q)), r_(std::move(r)), c_(constant) {
  const auto n = Q_.rows();
  const auto m = R_.rows();
  if (Q_.cols() != n || R_.cols() != m || S_.rows() != n || S_.cols() != m || q_.size() != n ||
      r_.size() != m) {
    throw DimensionMismatch("quadratic cost blocks have inconsistent shapes");
  }
  Mat K(n + m, n + m);
  K << Q_, S_, S_.transpose(), R_;
  require_psd(K, "quadratic cost");
}

QuadraticCost QuadraticCost::tracking(const Vec& weights, const Vec& target, std::size_t m) {
  const auto n = weights.size();
  if (target.size() != n) throw DimensionMismatch("tracking cost: weights and target differ in size");
  Mat Q = (0.5 * weights).asDiagonal();
  Vec q = -(weights.array() * target.array()).matrix();
  const double c = 0.5 * (weights.array() * target.array().square()).sum();
  const auto mm = static_cast<Eigen::Index>(m);
  return QuadraticCost(Q, Mat::Zero(mm, mm), Mat::Zero(n, mm), q, Vec::Zero(mm), c);
}

double QuadraticCost::operator()(const Vec& y, const Vec& u) const {
  return y.dot(Q_ * y) + 2.0 * y.dot(S_ * u) + u.dot(R_ * u) + q_.dot(y) + r_.dot(u) + c_;
}

Relaxation parse_relaxation(const std::string& s) {
  if (s == "idealistic") return Relaxation::Idealistic;
  if (s == "optimistic") return Relaxation::Optimistic;
  throw std::invalid_argument("unknown relaxation '" + s + "' (expected idealistic or optimistic)");
}

std::string to_string(Relaxation r) { return r == Relaxation::Idealistic ? "idealistic" : "optimistic"; }

// ---------------------------------------------------------------------------

AffineEnvelope affine_envelope(const KnowledgeBase& kb, const Vec& x, const IntervalVector& U, double dt,
                               const JacobianExtensions& jac, const Enclosure& enc) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  if (static_cast<std::size_t>(x.size()) != kb.n() || U.size() != kb.m()) {
    throw DimensionMismatch("affine_envelope: state or control dimension mismatch");
  }
  const IntervalVector R = IntervalVector::point(x);
  const auto [Fx, Gx] = kb.eval(R);
  const auto [FS, GS] = kb.eval(enc.S);
  const double h2 = 0.5 * dt * dt;
  const IntervalTensor3 JGt = jac.JG.transposed();
  AffineEnvelope env;
  env.B = x + dt * Fx + h2 * (jac.Jf * FS);
  env.A_plus = dt * Gx + h2 * ((jac.Jf + contract_middle(jac.JG, U)) * GS + contract_middle(JGt, FS));
  env.A_minus = dt * Gx + h2 * (jac.Jf * GS + contract_middle(JGt, FS + GS * U));
  env.S = enc.S;
  env.U = U;
  env.fallback = enc.fallback;
  return env;
}

AffineEnvelope affine_envelope(const KnowledgeBase& kb, const Vec& x, const IntervalVector& U, double dt,
                               const EnclosureOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  const Enclosure enc = rough_enclosure(kb, IntervalVector::point(x), U, dt, opts);
  return affine_envelope(kb, x, U, dt, jacobian_extensions(kb, enc.S), enc);
}

// ---------------------------------------------------------------------------

double projected_gradient_residual(const Mat& H, const Vec& g, const IntervalVector& box, const Vec& u) {
  const Vec grad = H * u + g;
  return (u - clamp(u - grad, box.lo(), box.hi())).cwiseAbs().maxCoeff();
}

namespace {

bool qp_converged(const Mat& H, const Vec& g, const IntervalVector& box, const Vec& z, double tol) {
  const double scale = 1.0 + std::max(g.cwiseAbs().maxCoeff(), (H * z).cwiseAbs().maxCoeff());
  return projected_gradient_residual(H, g, box, z) <= tol * scale;
}

}  // namespace

Vec box_qp(const Mat& H, const Vec& g, const IntervalVector& box, const std::optional<Vec>& start,
           const QpOptions& opts) {
  const auto k = g.size();
  if (H.rows() != k || H.cols() != k || static_cast<Eigen::Index>(box.size()) != k) {
    throw DimensionMismatch("box_qp: inconsistent shapes");
  }
  require_psd(H, "box_qp Hessian");
  const Vec lo = box.lo();
  const Vec hi = box.hi();
  Vec z = clamp(start && start->size() == k ? *start : box.mid(), lo, hi);

  const double Lg = H.cwiseAbs().rowwise().sum().maxCoeff();
  if (Lg <= 0.0) {
    // linear objective: move each coordinate to the bound its gradient points away from
    for (Eigen::Index i = 0; i < k; ++i) {
      if (g[i] > 0.0) z[i] = lo[i];
      else if (g[i] < 0.0) z[i] = hi[i];
    }
    return z;
  }

  auto at_lo = [&](Eigen::Index i, const Vec& v) { return v[i] <= lo[i] + 1e-14 * (1.0 + std::abs(lo[i])); };
  auto at_hi = [&](Eigen::Index i, const Vec& v) { return v[i] >= hi[i] - 1e-14 * (1.0 + std::abs(hi[i])); };

  for (int it = 0; it < opts.max_iterations; ++it) {
    if (qp_converged(H, g, box, z, opts.tol)) return z;

    z = clamp(z - (H * z + g) / Lg, lo, hi);

    // Newton step on the face of free coordinates
    Vec grad = H * z + g;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < k; ++i) {
      const bool blocked = (at_lo(i, z) && grad[i] >= 0.0) || (at_hi(i, z) && grad[i] <= 0.0) ||
                           lo[i] == hi[i];
      if (!blocked) free.push_back(i);
    }
    if (free.empty()) continue;
    const auto nf = static_cast<Eigen::Index>(free.size());
    Mat Hf(nf, nf);
    Vec gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = grad[free[a]];
      for (Eigen::Index b = 0; b < nf; ++b) Hf(a, b) = H(free[a], free[b]);
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Hf);
    const Vec df = cod.solve(-gf);
    Vec d = Vec::Zero(k);
    for (Eigen::Index a = 0; a < nf; ++a) d[free[a]] = df[a];

    const double f0 = quad(H, g, z);
    double alpha = 1.0;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      const Vec zn = clamp(z + alpha * d, lo, hi);
      if (quad(H, g, zn) <= f0 + 1e-15 * std::abs(f0)) {
        z = zn;
        break;
      }
    }

    // On a singular face the gradient can keep a null-space part; the
    // objective is linear along it, so walk to the first bound.
    grad = H * z + g;
    for (Eigen::Index a = 0; a < nf; ++a) gf[a] = grad[free[a]];
    const Vec nullpart = gf - Hf * cod.solve(gf);
    if (nullpart.cwiseAbs().maxCoeff() > 1e-12 * (1.0 + gf.cwiseAbs().maxCoeff())) {
      double tmax = std::numeric_limits<double>::infinity();
      for (Eigen::Index a = 0; a < nf; ++a) {
        const Eigen::Index i = free[a];
        if (nullpart[a] > 0.0) tmax = std::min(tmax, (z[i] - lo[i]) / nullpart[a]);
        else if (nullpart[a] < 0.0) tmax = std::min(tmax, (hi[i] - z[i]) / -nullpart[a]);
      }
      if (std::isfinite(tmax) && tmax > 0.0) {
        Vec zn = z;
        for (Eigen::Index a = 0; a < nf; ++a) zn[free[a]] -= tmax * nullpart[a];
        zn = clamp(zn, lo, hi);
        if (quad(H, g, zn) <= quad(H, g, z)) z = zn;
      }
    }
  }
  if (qp_converged(H, g, box, z, opts.tol)) return z;
  throw SolverFailure("box-constrained QP did not reach tolerance in " +
                      std::to_string(opts.max_iterations) + " iterations (residual " +
                      std::to_string(projected_gradient_residual(H, g, box, z)) + ")");
}

// ---------------------------------------------------------------------------

namespace {

// Quadratic in u of c(y, u) along y = b + A u, as 0.5 u'Hu + g'u + c0.
struct ReducedCost {
  Mat H;
  Vec g;
};

ReducedCost reduce(const QuadraticCost& c, const Vec& b, const Mat& A) {
  const Mat& Q = c.Q();
  const Mat& S = c.S();
  ReducedCost rc;
  rc.H = 2.0 * (A.transpose() * Q * A + A.transpose() * S + S.transpose() * A + c.R());
  rc.H = 0.5 * (rc.H + rc.H.transpose());
  rc.g = 2.0 * A.transpose() * Q * b + 2.0 * S.transpose() * b + A.transpose() * c.q() + c.r();
  return rc;
}

Mat idealistic_matrix(const AffineEnvelope& env) {
  if (auto A = intersect(env.A_plus, env.A_minus)) return A->mid();
  // entrywise fallback: empty entries take the A+ midpoint
  Mat A = env.A_plus.mid();
  for (std::size_t i = 0; i < env.A_plus.rows(); ++i) {
    for (std::size_t j = 0; j < env.A_plus.cols(); ++j) {
      if (auto e = intersect(env.A_plus(i, j), env.A_minus(i, j))) {
        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e->mid();
      }
    }
  }
  return A;
}

void check_dims(const AffineEnvelope& env, const QuadraticCost& cost, const IntervalVector& U) {
  if (env.B.size() != cost.n() || env.A_plus.rows() != cost.n() || env.A_plus.cols() != cost.m() ||
      U.size() != cost.m()) {
    throw DimensionMismatch("envelope, cost and control box dimensions disagree");
  }
}

}  // namespace

ControlDecision solve_idealistic(const AffineEnvelope& env, const QuadraticCost& cost, const Vec& x,
                                 const IntervalVector& U, const SolveOptions& opts) {
  (void)x;
  check_dims(env, cost, U);
  const auto t0 = std::chrono::steady_clock::now();
  const Vec b = env.B.mid();
  const Mat A = idealistic_matrix(env);
  const ReducedCost rc = reduce(cost, b, A);
  ControlDecision d;
  d.u = box_qp(rc.H, rc.g, U, opts.warm_start, opts.qp);
  d.predicted_cost = cost(b + A * d.u, d.u);
  d.relaxation = Relaxation::Idealistic;
  d.solve_time_us = elapsed_us(t0);
  return d;
}

namespace {

// Primal active-set method for min 0.5 z'Pz + p'z subject to A z <= b, with
// P PSD, unit-norm rows and a bounded feasible set. z must start feasible.
// Singular reduced Hessians are handled by walking along zero-curvature
// descent rays to the next constraint.
Vec active_set_qp(const Mat& P, const Vec& p, const Mat& A, const Vec& b, Vec z, int max_iterations) {
  const auto nz = z.size();
  const auto rows = A.rows();
  const double gscale = 1.0 + std::max(P.cwiseAbs().maxCoeff() * (1.0 + z.cwiseAbs().maxCoeff()),
                                       p.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> W;
  std::vector<char> in_w(static_cast<std::size_t>(rows), 0);
  for (int it = 0; it < max_iterations; ++it) {
    const Vec g = P * z + p;
    const auto kw = static_cast<Eigen::Index>(W.size());
    Mat Aw(kw, nz);
    for (Eigen::Index a = 0; a < kw; ++a) Aw.row(a) = A.row(W[static_cast<std::size_t>(a)]);

    Mat Z = Mat::Identity(nz, nz);
    if (kw > 0) {
      Eigen::JacobiSVD<Mat> svd(Aw, Eigen::ComputeFullV);
      svd.setThreshold(1e-10);
      Z = svd.matrixV().rightCols(nz - svd.rank());
    }
    Vec dir = Vec::Zero(nz);
    bool ray = false;
    if (Z.cols() > 0) {
      const Mat Hr = Z.transpose() * P * Z;
      const Vec gr = Z.transpose() * g;
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(Hr);
      cod.setThreshold(1e-12);
      const Vec dr = cod.solve(-gr);
      const Vec res = Hr * dr + gr;
      if (res.norm() <= 1e-10 * gscale) {
        dir = Z * dr;
      } else {
        dir = -Z * res;
        ray = true;
      }
    }

    if (!ray && dir.norm() <= 1e-12 * (1.0 + z.norm())) {
      if (kw == 0) return z;
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(Aw.transpose());
      const Vec lambda = cod.solve(-g);
      Eigen::Index jmin = 0;
      const double lmin = lambda.minCoeff(&jmin);
      if (lmin >= -1e-10 * gscale) return z;
      in_w[static_cast<std::size_t>(W[static_cast<std::size_t>(jmin)])] = 0;
      W.erase(W.begin() + jmin);
      continue;
    }

    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    Eigen::Index block = -1;
    const double dn = dir.norm();
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (in_w[static_cast<std::size_t>(i)]) continue;
      const double ad = A.row(i).dot(dir);
      if (ad <= 1e-14 * dn) continue;
      const double step = std::max(0.0, (b[i] - A.row(i).dot(z)) / ad);
      if (step < alpha) {
        alpha = step;
        block = i;
      }
    }
    if (block < 0 && ray) throw SolverFailure("quadratic program is unbounded along a feasible ray");
    z += alpha * dir;
    if (block >= 0) {
      W.push_back(block);
      in_w[static_cast<std::size_t>(block)] = 1;
    }
  }
  throw SolverFailure("active-set QP did not terminate in " + std::to_string(max_iterations) + " iterations");
}

// Appends the rows of lo <= z <= hi to (A, b).
void add_box_rows(Mat& A, Vec& b, Eigen::Index& r, const IntervalVector& box, Eigen::Index offset) {
  for (std::size_t j = 0; j < box.size(); ++j) {
    const auto c = offset + static_cast<Eigen::Index>(j);
    A.row(r).setZero();
    A(r, c) = -1.0;
    b[r++] = -box[j].lo();
    A.row(r).setZero();
    A(r, c) = 1.0;
    b[r++] = box[j].hi();
  }
}

struct OrthantSolution {
  Vec u;
  Vec y;
  double cost;
};

// Minimizes c(y, u) over u in Uo (one sign orthant) and y in
// X cap (B + A+ u) cap (B + A- u). On an orthant the endpoint selection of
// each interval product is fixed, so this is one convex QP in (y, u).
std::optional<OrthantSolution> solve_orthant(const AffineEnvelope& env, const QuadraticCost& cost,
                                             const IntervalVector& Uo, const IntervalVector& X,
                                             const std::optional<Vec>& warm, const QpOptions& qp) {
  const auto n = static_cast<Eigen::Index>(cost.n());
  const auto m = static_cast<Eigen::Index>(cost.m());

  // y box: hulls over the orthant of both envelopes, within X
  auto ybox = intersect(X, env.B + env.A_plus * Uo);
  if (ybox) ybox = intersect(*ybox, env.B + env.A_minus * Uo);
  if (!ybox) {
    spdlog::debug("optimistic orthant misses the state domain");
    return std::nullopt;
  }

  // rows: for each envelope A and state k
  //   -y_k + a_lo(k) u <= -B_lo(k)     y_k - a_hi(k) u <= B_hi(k)
  const Eigen::Index rows = 4 * n;
  const Eigen::Index nz = n + m;
  Mat C = Mat::Zero(rows, nz);
  Vec d(rows);
  Eigen::Index r = 0;
  for (const IntervalMatrix* A : {&env.A_plus, &env.A_minus}) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      C(r, k) = -1.0;
      C(r + 1, k) = 1.0;
      for (Eigen::Index l = 0; l < m; ++l) {
        const auto ls = static_cast<std::size_t>(l);
        const bool pos = Uo[ls].lo() >= 0.0;
        const Interval& a = (*A)(ks, ls);
        C(r, n + l) = pos ? a.lo() : a.hi();
        C(r + 1, n + l) = -(pos ? a.hi() : a.lo());
      }
      d[r] = -env.B[ks].lo();
      d[r + 1] = env.B[ks].hi();
      r += 2;
    }
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double nrm = C.row(i).norm();
    C.row(i) /= nrm;
    d[i] /= nrm;
  }
  const double scale = 1.0 + d.cwiseAbs().maxCoeff();

  Vec z0(nz);
  z0.tail(m) = warm && warm->size() == m ? clamp(*warm, Uo.lo(), Uo.hi()) : Uo.mid();
  z0.head(n) = clamp((env.B.mid() + env.A_plus.mid() * z0.tail(m)), ybox->lo(), ybox->hi());

  // phase 1: min t  s.t.  C z - t <= d,  z in its box,  0 <= t <= t0
  const double t0 = std::max(0.0, (C * z0 - d).maxCoeff());
  const Eigen::Index rows1 = rows + 2 * nz + 2;
  Mat A1 = Mat::Zero(rows1, nz + 1);
  Vec b1(rows1);
  A1.topLeftCorner(rows, nz) = C;
  A1.block(0, nz, rows, 1).setConstant(-1.0 / std::sqrt(2.0));
  // keep rows unit norm: scale (C_i, -1) by 1/sqrt(2)
  A1.topLeftCorner(rows, nz) /= std::sqrt(2.0);
  b1.head(rows) = d / std::sqrt(2.0);
  Eigen::Index r1 = rows;
  add_box_rows(A1, b1, r1, *ybox, 0);
  add_box_rows(A1, b1, r1, Uo, n);
  add_box_rows(A1, b1, r1, IntervalVector{std::vector<Interval>{Interval(0.0, t0)}}, nz);
  Vec w0(nz + 1);
  w0 << z0, t0;
  Vec p1 = Vec::Zero(nz + 1);
  p1[nz] = 1.0;
  Vec w;
  try {
    w = active_set_qp(Mat::Zero(nz + 1, nz + 1), p1, A1, b1, w0, qp.max_iterations);
  } catch (const SolverFailure& e) {
    spdlog::debug("optimistic phase 1 failed: {}", e.what());
    return std::nullopt;
  }
  const double viol = std::max(0.0, (C * w.head(nz) - d).maxCoeff());
  if (viol > 1e-7 * scale) {
    spdlog::debug("optimistic orthant infeasible, violation {}", viol);
    return std::nullopt;
  }

  // phase 2 from the feasible point, with the residual violation absorbed
  const Eigen::Index rows2 = rows + 2 * nz;
  Mat A2(rows2, nz);
  Vec b2(rows2);
  A2.topRows(rows) = C;
  b2.head(rows) = d.array() + viol;
  Eigen::Index r2 = rows;
  add_box_rows(A2, b2, r2, *ybox, 0);
  add_box_rows(A2, b2, r2, Uo, n);
  Mat P = Mat::Zero(nz, nz);
  P.topLeftCorner(n, n) = 2.0 * cost.Q();
  P.block(0, n, n, m) = 2.0 * cost.S();
  P.block(n, 0, m, n) = 2.0 * cost.S().transpose();
  P.block(n, n, m, m) = 2.0 * cost.R();
  Vec p(nz);
  p << cost.q(), cost.r();
  const Vec z = active_set_qp(P, p, A2, b2, w.head(nz), qp.max_iterations);

  OrthantSolution sol;
  sol.y = z.head(n);
  sol.u = clamp(z.tail(m), Uo.lo(), Uo.hi());
  sol.cost = cost(sol.y, sol.u);
  return sol;
}

}  // namespace

ControlDecision solve_optimistic(const AffineEnvelope& env, const QuadraticCost& cost, const Vec& x,
                                 const IntervalVector& U, const IntervalVector& X,
                                 const SolveOptions& opts) {
  (void)x;
  check_dims(env, cost, U);
  if (X.size() != cost.n()) throw DimensionMismatch("state domain dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t m = U.size();

  // orthant list: each coordinate contributes its nonnegative and/or nonpositive part
  std::vector<IntervalVector> orthants{U};
  for (std::size_t l = 0; l < m; ++l) {
    std::vector<IntervalVector> next;
    for (const auto& o : orthants) {
      if (o[l].lo() >= 0.0 || o[l].hi() <= 0.0) {
        next.push_back(o);
        continue;
      }
      IntervalVector pos = o, neg = o;
      pos[l] = Interval(0.0, o[l].hi());
      neg[l] = Interval(o[l].lo(), 0.0);
      next.push_back(pos);
      next.push_back(neg);
    }
    orthants = std::move(next);
  }

  std::optional<OrthantSolution> best;
  for (const auto& o : orthants) {
    auto s = solve_orthant(env, cost, o, X, opts.warm_start, opts.qp);
    if (s && (!best || s->cost < best->cost)) best = std::move(s);
  }
  if (!best) {
    throw InfeasibleIntersection("the envelope misses the state domain for every admissible control");
  }
  ControlDecision d;
  d.u = best->u;
  d.predicted_cost = best->cost;
  d.relaxation = Relaxation::Optimistic;
  d.solve_time_us = elapsed_us(t0);
  return d;
}

double subopt_bound(const AffineEnvelope& env, const QuadraticCost& cost, const IntervalVector& U,
                    const IntervalVector& X) {
  const Vec Umag = U.mag();
  const Vec SU = (cost.S() * IntervalVector(U)).mag();
  const Vec qabs = cost.q().cwiseAbs();
  const double kx = (2.0 * SU + qabs + 2.0 * (cost.Q() * X).mag()).norm();
  auto branch = [&](const IntervalMatrix& A) {
    const double spread = (env.B.width() + A.width() * Umag).norm();
    const double ka = (2.0 * SU + qabs + 2.0 * (cost.Q() * (env.B + A * U)).mag()).norm();
    return spread * std::min(ka, kx);
  };
  return std::max(branch(env.A_plus), branch(env.A_minus));
}

ControlDecision datacontrol_step(const KnowledgeBase& kb, const Vec& x, const QuadraticCost& cost,
                                 const IntervalVector& U, const IntervalVector& X, double dt,
                                 Relaxation relaxation, const SolveOptions& opts,
                                 const EnclosureOptions& enc_opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const AffineEnvelope env = affine_envelope(kb, x, U, dt, enc_opts);
  ControlDecision d = relaxation == Relaxation::Idealistic ? solve_idealistic(env, cost, x, U, opts)
                                                           : solve_optimistic(env, cost, x, U, X, opts);
  d.bound = subopt_bound(env, cost, U, X);
  d.solve_time_us = elapsed_us(t0);
  return d;
}

}  // namespace datareach
