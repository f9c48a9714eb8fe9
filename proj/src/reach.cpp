#include "datareach/reach.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

namespace datareach {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

IntervalVector flow(const IntervalVector& F, const IntervalMatrix& G, const IntervalVector& V) {
  return F + G * V;
}

// Endpoints evaluated with sin itself: shifting the argument by pi/2 would
// move exact zeros of sin by an ulp.
Interval sin_range(double a, double b) {
  if (b - a >= kTwoPi) return Interval(-1.0, 1.0);
  const double sa = std::sin(a);
  const double sb = std::sin(b);
  double lo = std::min(sa, sb);
  double hi = std::max(sa, sb);
  const double h = 0.5 * std::numbers::pi;
  if (h + kTwoPi * std::ceil((a - h) / kTwoPi) <= b) hi = 1.0;
  if (-h + kTwoPi * std::ceil((a + h) / kTwoPi) <= b) lo = -1.0;
  return Interval(lo, hi);
}

}  // namespace

Interval cos_range(double a, double b) {
  if (b < a) throw std::invalid_argument("cos_range: reversed interval");
  if (b - a >= kTwoPi) return Interval(-1.0, 1.0);
  const double ca = std::cos(a);
  const double cb = std::cos(b);
  double lo = std::min(ca, cb);
  double hi = std::max(ca, cb);
  if (kTwoPi * std::ceil(a / kTwoPi) <= b) hi = 1.0;
  if (std::numbers::pi + kTwoPi * std::ceil((a - std::numbers::pi) / kTwoPi) <= b) lo = -1.0;
  return Interval(lo, hi);
}

ShiftedCosineFamily::ShiftedCosineFamily(Vec base, Vec amp, Vec freq, Vec delta, double t0)
    : base_(std::move(base)), amp_(std::move(amp)), freq_(std::move(freq)), delta_(std::move(delta)), t0_(t0) {
  const auto m = base_.size();
  if (m == 0 || amp_.size() != m || freq_.size() != m || delta_.size() != m) {
    throw DimensionMismatch("signal family parameters have inconsistent sizes");
  }
  if ((delta_.array() < 0.0).any()) throw std::invalid_argument("signal offsets must be nonnegative");
}

IntervalVector ShiftedCosineFamily::range_on(double t0, double t1) const {
  IntervalVector r(dim());
  for (Eigen::Index j = 0; j < base_.size(); ++j) {
    double a = freq_[j] * (t0 - t0_);
    double b = freq_[j] * (t1 - t0_);
    if (b < a) std::swap(a, b);
    r[static_cast<std::size_t>(j)] =
        base_[j] + amp_[j] * cos_range(a, b) + Interval::symmetric(delta_[j]);
  }
  return r;
}

IntervalVector ShiftedCosineFamily::deriv_range_on(double t0, double t1) const {
  IntervalVector r(dim());
  for (Eigen::Index j = 0; j < base_.size(); ++j) {
    double a = freq_[j] * (t0 - t0_);
    double b = freq_[j] * (t1 - t0_);
    if (b < a) std::swap(a, b);
    // d/dt cos(w s) = -w sin(w s)
    r[static_cast<std::size_t>(j)] = (-amp_[j] * freq_[j]) * sin_range(a, b);
  }
  return r;
}

Vec ShiftedCosineFamily::member(double t, const Vec& a) const {
  return base_ + (amp_.array() * (freq_.array() * (t - t0_)).cos()).matrix() + a;
}

// ---------------------------------------------------------------------------

JacobianExtensions jacobian_extensions(const KnowledgeBase& kb, const IntervalVector& S) {
  const std::size_t n = kb.n();
  const std::size_t m = kb.m();
  const auto& L = kb.residual_lipschitz();
  const auto& side = kb.side();
  JacobianExtensions J{IntervalMatrix(n, n), IntervalTensor3(n, m, n)};
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t p = 0; p < n; ++p) {
      Interval c = Interval::symmetric(L.L_f[static_cast<Eigen::Index>(k)]);
      if (side.mask && !side.mask->f(k, p)) c = Interval::point(0.0);
      if (side.gradients && side.gradients->jf) {
        if (auto r = intersect(c, (*side.gradients->jf)(k, p))) c = *r;
      }
      J.Jf(k, p) = c;
      for (std::size_t l = 0; l < m; ++l) {
        Interval g = Interval::symmetric(L.L_G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)));
        if (side.mask && !side.mask->G(k, l, p)) g = Interval::point(0.0);
        if (side.gradients && side.gradients->jG) {
          if (auto r = intersect(g, (*side.gradients->jG)(k, l, p))) g = *r;
        }
        J.JG(k, l, p) = g;
      }
    }
  }
  if (side.known) {
    const IntervalMatrix jf = side.known->jf_ext(S);
    const IntervalTensor3 jg = side.known->jG_ext(S);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t p = 0; p < n; ++p) {
        J.Jf(k, p) += jf(k, p);
        for (std::size_t l = 0; l < m; ++l) J.JG(k, l, p) += jg(k, l, p);
      }
    }
  }
  return J;
}

Enclosure rough_enclosure(const KnowledgeBase& kb, const IntervalVector& R, const IntervalVector& V,
                          double dt, const EnclosureOptions& opts) {
  if (dt < 0.0) throw std::invalid_argument("rough_enclosure: negative step");
  if (dt == 0.0) return {R, false, 0};
  const Interval span(0.0, dt);
  auto image = [&](const IntervalVector& S) {
    auto [F, G] = kb.eval(S);
    return R + span * flow(F, G, V);
  };
  IntervalVector S = R;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const IntervalVector Si = inflate(S, opts.rel_inflation, opts.abs_inflation);
    const IntervalVector next = image(Si);
    if (next.subset_of(Si)) {
      // next is a tighter candidate; keep it only if it passes the check itself
      if (image(next).subset_of(next)) return {next, false, it};
      return {Si, false, it};
    }
    S = next;
  }
  if (opts.strict) {
    throw EnclosureFailure("a priori enclosure did not converge in " +
                           std::to_string(opts.max_iterations) + " iterations");
  }
  spdlog::debug("rough enclosure fell back to the state domain");
  return {kb.domain(), true, opts.max_iterations};
}

StepResult taylor_step_order2(const KnowledgeBase& kb, const IntervalVector& R,
                              const ControlSignalEnvelope& env, double t, double dt,
                              const JacobianExtensions& jac, const Enclosure& enc) {
  if (env.smoothness_order() < 1) {
    throw std::invalid_argument("order-2 step needs signals with a bounded derivative");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  const IntervalVector V = env.range_on(t, t + dt);
  const IntervalVector V1 = env.deriv_range_on(t, t + dt);
  const IntervalVector v = env.value_at(t);
  const auto [FR, GR] = kb.eval(R);
  const auto [FS, GS] = kb.eval(enc.S);
  const double h2 = 0.5 * dt * dt;
  const IntervalMatrix J = jac.Jf + contract_middle(jac.JG, V);
  IntervalVector next = R + dt * flow(FR, GR, v) + h2 * (J * flow(FS, GS, V)) + h2 * (GS * V1);
  return {std::move(next), enc.S, enc.fallback};
}

StepResult taylor_step_order2(const KnowledgeBase& kb, const IntervalVector& R,
                              const ControlSignalEnvelope& env, double t, double dt,
                              const EnclosureOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  const Enclosure enc = rough_enclosure(kb, R, env.range_on(t, t + dt), dt, opts);
  return taylor_step_order2(kb, R, env, t, dt, jacobian_extensions(kb, enc.S), enc);
}

StepResult taylor_step_order1(const KnowledgeBase& kb, const IntervalVector& R,
                              const ControlSignalEnvelope& env, double t, double dt,
                              const EnclosureOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("step size must be positive");
  const IntervalVector V = env.range_on(t, t + dt);
  const Enclosure enc = rough_enclosure(kb, R, V, dt, opts);
  const auto [FS, GS] = kb.eval(enc.S);
  return {R + dt * flow(FS, GS, V), enc.S, enc.fallback};
}

std::size_t ReachTube::fallback_count() const {
  std::size_t c = 0;
  for (char f : fallback) c += f ? 1 : 0;
  return c;
}

ReachTube datareach(const KnowledgeBase& kb, const Vec& x_start, const ControlSignalEnvelope& env,
                    double t_start, double dt, std::size_t steps, int order,
                    const EnclosureOptions& opts) {
  if (steps == 0) throw std::invalid_argument("datareach needs at least one step");
  if (order != 1 && order != 2) throw std::invalid_argument("expansion order must be 1 or 2");
  if (static_cast<std::size_t>(x_start.size()) != kb.n() || env.dim() != kb.m()) {
    throw DimensionMismatch("datareach: start state or signal dimension mismatch");
  }
  ReachTube tube;
  IntervalVector R = IntervalVector::point(x_start);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t_start + static_cast<double>(i) * dt;
    StepResult s;
    try {
      s = order == 2 ? taylor_step_order2(kb, R, env, t, dt, opts)
                     : taylor_step_order1(kb, R, env, t, dt, opts);
    } catch (const EnclosureFailure& e) {
      throw EnclosureFailure(std::string(e.what()) + " at step " + std::to_string(i),
                             static_cast<std::ptrdiff_t>(i));
    }
    // both boxes contain the true state at the end of the step
    auto meet = intersect(s.R_next, s.S);
    R = meet ? *meet : s.R_next;
    tube.times.push_back(t_start + static_cast<double>(i + 1) * dt);
    tube.boxes.push_back(R);
    tube.enclosures.push_back(s.S);
    tube.fallback.push_back(s.fallback ? 1 : 0);
  }
  return tube;
}

}  // namespace datareach
