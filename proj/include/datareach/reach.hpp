#pragma once

// Reachable-set over-approximation of the learned differential inclusion.

#include <cstddef>
#include <vector>

#include "datareach/inclusion.hpp"
#include "datareach/interval.hpp"

namespace datareach {

/// A family of admissible control signals described by interval bounds on
/// their values and first derivatives.
class ControlSignalEnvelope {
 public:
  virtual ~ControlSignalEnvelope() = default;
  virtual std::size_t dim() const = 0;
  /// Values of all members at time t.
  virtual IntervalVector value_at(double t) const = 0;
  /// Values of all members over [t0, t1].
  virtual IntervalVector range_on(double t0, double t1) const = 0;
  /// First derivatives of all members over [t0, t1].
  virtual IntervalVector deriv_range_on(double t0, double t1) const = 0;
  virtual int smoothness_order() const = 0;
};

/// Signals constant on every step with values anywhere in a box. Within a
/// step the derivative is zero, so the order-2 step applies.
class PiecewiseConstantBox final : public ControlSignalEnvelope {
 public:
  explicit PiecewiseConstantBox(IntervalVector box) : box_(std::move(box)) {}
  std::size_t dim() const override { return box_.size(); }
  IntervalVector value_at(double) const override { return box_; }
  IntervalVector range_on(double, double) const override { return box_; }
  IntervalVector deriv_range_on(double, double) const override { return IntervalVector(box_.size()); }
  int smoothness_order() const override { return 1; }

 private:
  IntervalVector box_;
};

/// v_j(t) = base_j + amp_j cos(freq_j (t - t0)) + a_j with |a_j| <= delta_j.
class ShiftedCosineFamily final : public ControlSignalEnvelope {
 public:
  ShiftedCosineFamily(Vec base, Vec amp, Vec freq, Vec delta, double t0);

  std::size_t dim() const override { return static_cast<std::size_t>(base_.size()); }
  IntervalVector value_at(double t) const override { return range_on(t, t); }
  IntervalVector range_on(double t0, double t1) const override;
  IntervalVector deriv_range_on(double t0, double t1) const override;
  int smoothness_order() const override { return 1; }

  /// The member with offsets a.
  Vec member(double t, const Vec& a) const;
  const Vec& delta() const noexcept { return delta_; }

 private:
  Vec base_, amp_, freq_, delta_;
  double t0_;
};

/// Exact range of cos over [a, b].
Interval cos_range(double a, double b);

struct JacobianExtensions {
  IntervalMatrix Jf;   // n x n
  IntervalTensor3 JG;  // n x m x n
};

/// Lipschitz cones, zeroed where the dependency mask says so, intersected
/// with gradient bounds, plus the Jacobian of the known part over S.
JacobianExtensions jacobian_extensions(const KnowledgeBase& kb, const IntervalVector& S);

struct EnclosureOptions {
  double rel_inflation = 0.01;
  double abs_inflation = 1e-6;
  int max_iterations = 20;
  /// Throw EnclosureFailure instead of falling back to the state domain.
  bool strict = false;
};

struct Enclosure {
  IntervalVector S;
  bool fallback = false;
  int iterations = 0;
};

/// A box S with R + [0, dt] (f(S) + G(S) V) contained in S.
Enclosure rough_enclosure(const KnowledgeBase& kb, const IntervalVector& R, const IntervalVector& V,
                          double dt, const EnclosureOptions& opts = {});

struct StepResult {
  IntervalVector R_next;
  IntervalVector S;
  bool fallback = false;
};

StepResult taylor_step_order2(const KnowledgeBase& kb, const IntervalVector& R,
                              const ControlSignalEnvelope& env, double t, double dt,
                              const EnclosureOptions& opts = {});
StepResult taylor_step_order2(const KnowledgeBase& kb, const IntervalVector& R,
                              const ControlSignalEnvelope& env, double t, double dt,
                              const JacobianExtensions& jac, const Enclosure& enc);

StepResult taylor_step_order1(const KnowledgeBase& kb, const IntervalVector& R,
                              const ControlSignalEnvelope& env, double t, double dt,
                              const EnclosureOptions& opts = {});

/// boxes[i] encloses the reachable set at times[i] = t_start + (i + 1) dt;
/// enclosures[i] covers [times[i] - dt, times[i]].
struct ReachTube {
  std::vector<double> times;
  std::vector<IntervalVector> boxes;
  std::vector<IntervalVector> enclosures;
  std::vector<char> fallback;
  std::size_t fallback_count() const;
};

ReachTube datareach(const KnowledgeBase& kb, const Vec& x_start, const ControlSignalEnvelope& env,
                    double t_start, double dt, std::size_t steps, int order = 2,
                    const EnclosureOptions& opts = {});

}  // namespace datareach
