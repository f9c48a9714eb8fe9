#pragma once

// One-step control from the control-affine over-approximation of the next state.

#include <optional>
#include <string>

#include "datareach/inclusion.hpp"
#include "datareach/interval.hpp"
#include "datareach/reach.hpp"

namespace datareach {

/// c(y, u) = y'Qy + 2 y'Su + u'Ru + q'y + r'u + constant, where y is the
/// next state. The constant does not affect decisions; it keeps reported
/// costs equal to the user's objective.
class QuadraticCost {
 public:
  QuadraticCost(Mat Q, Mat R, Mat S, Vec q, Vec r, double constant = 0.0);

  /// sum_k 0.5 w_k (y_k - target_k)^2.
  static QuadraticCost tracking(const Vec& weights, const Vec& target, std::size_t m);

  double operator()(const Vec& y, const Vec& u) const;

  std::size_t n() const noexcept { return static_cast<std::size_t>(Q_.rows()); }
  std::size_t m() const noexcept { return static_cast<std::size_t>(R_.rows()); }
  const Mat& Q() const noexcept { return Q_; }
  const Mat& R() const noexcept { return R_; }
  const Mat& S() const noexcept { return S_; }
  const Vec& q() const noexcept { return q_; }
  const Vec& r() const noexcept { return r_; }
  double constant() const noexcept { return c_; }

 private:
  Mat Q_, R_, S_;
  Vec q_, r_;
  double c_;
};

struct AffineEnvelope {
  IntervalVector B;
  IntervalMatrix A_plus;
  IntervalMatrix A_minus;
  IntervalVector S;
  IntervalVector U;
  bool fallback = false;
};

AffineEnvelope affine_envelope(const KnowledgeBase& kb, const Vec& x, const IntervalVector& U, double dt,
                               const EnclosureOptions& opts = {});
AffineEnvelope affine_envelope(const KnowledgeBase& kb, const Vec& x, const IntervalVector& U, double dt,
                               const JacobianExtensions& jac, const Enclosure& enc);

enum class Relaxation { Idealistic, Optimistic };

Relaxation parse_relaxation(const std::string& s);
std::string to_string(Relaxation r);

struct ControlDecision {
  Vec u;
  double predicted_cost = 0.0;
  double bound = 0.0;
  Relaxation relaxation = Relaxation::Idealistic;
  double solve_time_us = 0.0;
};

struct QpOptions {
  double tol = 1e-8;
  int max_iterations = 500;
};

/// argmin of 0.5 u'Hu + g'u over a box, H symmetric PSD. Starts from the
/// box midpoint unless a start point is given. Converged when the
/// projected-gradient residual is at most tol * (1 + max(|g|, |Hu|));
/// throws SolverFailure otherwise.
Vec box_qp(const Mat& H, const Vec& g, const IntervalVector& box,
           const std::optional<Vec>& start = std::nullopt, const QpOptions& opts = {});

/// Infinity norm of u - P(u - (Hu + g)).
double projected_gradient_residual(const Mat& H, const Vec& g, const IntervalVector& box, const Vec& u);

struct SolveOptions {
  std::optional<Vec> warm_start;
  QpOptions qp;
};

ControlDecision solve_idealistic(const AffineEnvelope& env, const QuadraticCost& cost, const Vec& x,
                                 const IntervalVector& U, const SolveOptions& opts = {});

ControlDecision solve_optimistic(const AffineEnvelope& env, const QuadraticCost& cost, const Vec& x,
                                 const IntervalVector& U, const IntervalVector& X,
                                 const SolveOptions& opts = {});

/// Certified bound on the gap between the true one-step optimum and the
/// optimum of either relaxation.
double subopt_bound(const AffineEnvelope& env, const QuadraticCost& cost, const IntervalVector& U,
                    const IntervalVector& X);

ControlDecision datacontrol_step(const KnowledgeBase& kb, const Vec& x, const QuadraticCost& cost,
                                 const IntervalVector& U, const IntervalVector& X, double dt,
                                 Relaxation relaxation, const SolveOptions& opts = {},
                                 const EnclosureOptions& enc_opts = {});

}  // namespace datareach
