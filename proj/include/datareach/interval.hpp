#pragma once

// Closed real intervals and their vector, matrix and rank-3 tensor lifts.
//
// Arithmetic is plain round-to-nearest floating point (no directed rounding).
// An optional global slack widens the results of sqrt and division outward
// by kRoundingSlack relative to the bound magnitude.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "datareach/errors.hpp"

namespace datareach {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kRoundingSlack = 1e-12;

/// Enables or disables the outward slack applied to sqrt and division.
void set_rounding_slack(bool enabled) noexcept;
bool rounding_slack_enabled() noexcept;

class Interval {
 public:
  constexpr Interval() noexcept = default;

  /// Throws std::invalid_argument unless lo <= hi and both are finite.
  Interval(double lo, double hi);

  static Interval point(double x) { return Interval(x, x); }
  /// [-r, r]; r must be nonnegative.
  static Interval symmetric(double r) { return Interval(-r, r); }

  constexpr double lo() const noexcept { return lo_; }
  constexpr double hi() const noexcept { return hi_; }
  constexpr double width() const noexcept { return hi_ - lo_; }
  constexpr double mid() const noexcept { return 0.5 * (lo_ + hi_); }
  double mag() const noexcept { return std::max(std::abs(lo_), std::abs(hi_)); }

  constexpr bool contains(double x) const noexcept { return lo_ <= x && x <= hi_; }
  constexpr bool contains_zero() const noexcept { return contains(0.0); }
  constexpr bool subset_of(const Interval& o) const noexcept {
    return o.lo_ <= lo_ && hi_ <= o.hi_;
  }
  constexpr bool is_point() const noexcept { return lo_ == hi_; }

  friend constexpr bool operator==(const Interval&, const Interval&) noexcept = default;

  friend Interval operator+(const Interval& a, const Interval& b) noexcept {
    return {a.lo_ + b.lo_, a.hi_ + b.hi_, Unchecked{}};
  }
  friend Interval operator-(const Interval& a, const Interval& b) noexcept {
    return {a.lo_ - b.hi_, a.hi_ - b.lo_, Unchecked{}};
  }
  friend Interval operator-(const Interval& a) noexcept { return {-a.hi_, -a.lo_, Unchecked{}}; }
  friend Interval operator*(const Interval& a, const Interval& b) noexcept {
    const double p1 = a.lo_ * b.lo_;
    const double p2 = a.lo_ * b.hi_;
    const double p3 = a.hi_ * b.lo_;
    const double p4 = a.hi_ * b.hi_;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4)), Unchecked{}};
  }

  friend Interval operator+(const Interval& a, double s) noexcept {
    return {a.lo_ + s, a.hi_ + s, Unchecked{}};
  }
  friend Interval operator+(double s, const Interval& a) noexcept { return a + s; }
  friend Interval operator-(const Interval& a, double s) noexcept {
    return {a.lo_ - s, a.hi_ - s, Unchecked{}};
  }
  friend Interval operator-(double s, const Interval& a) noexcept {
    return {s - a.hi_, s - a.lo_, Unchecked{}};
  }
  friend Interval operator*(const Interval& a, double s) noexcept {
    return s >= 0.0 ? Interval{a.lo_ * s, a.hi_ * s, Unchecked{}}
                    : Interval{a.hi_ * s, a.lo_ * s, Unchecked{}};
  }
  friend Interval operator*(double s, const Interval& a) noexcept { return a * s; }

  Interval& operator+=(const Interval& b) noexcept { return *this = *this + b; }
  Interval& operator-=(const Interval& b) noexcept { return *this = *this - b; }
  Interval& operator*=(const Interval& b) noexcept { return *this = *this * b; }

  friend std::optional<Interval> intersect(const Interval& a, const Interval& b) noexcept {
    const double lo = std::max(a.lo_, b.lo_);
    const double hi = std::min(a.hi_, b.hi_);
    if (lo > hi) return std::nullopt;
    return Interval{lo, hi, Unchecked{}};
  }
  friend Interval hull(const Interval& a, const Interval& b) noexcept {
    return {std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_), Unchecked{}};
  }

 private:
  struct Unchecked {};
  constexpr Interval(double lo, double hi, Unchecked) noexcept : lo_(lo), hi_(hi) {}

  friend Interval sqr(const Interval& a) noexcept;
  friend Interval sqrt(const Interval& a);
  friend Interval divide(const Interval& a, double s);

  double lo_ = 0.0;
  double hi_ = 0.0;
};

std::ostream& operator<<(std::ostream& os, const Interval& a);

/// Interval extension of x^2 (exact range, split on whether 0 lies inside).
Interval sqr(const Interval& a) noexcept;

/// Interval extension of sqrt. Lower bounds in [-1e-12, 0) are clamped to 0;
/// anything more negative raises DomainError.
Interval sqrt(const Interval& a);

/// a / s for a nonzero scalar s.
Interval divide(const Interval& a, double s);

// ---------------------------------------------------------------------------

class IntervalVector {
 public:
  IntervalVector() = default;
  /// n must be positive.
  explicit IntervalVector(std::size_t n, Interval fill = {});
  IntervalVector(std::initializer_list<Interval> entries);
  explicit IntervalVector(std::vector<Interval> entries);

  static IntervalVector point(const Vec& x);
  static IntervalVector from_bounds(const Vec& lo, const Vec& hi);

  std::size_t size() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.empty(); }
  Interval& operator[](std::size_t i) noexcept { return v_[i]; }
  const Interval& operator[](std::size_t i) const noexcept { return v_[i]; }
  auto begin() noexcept { return v_.begin(); }
  auto end() noexcept { return v_.end(); }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }

  Vec lo() const;
  Vec hi() const;
  Vec mid() const;
  Vec width() const;
  Vec mag() const;
  double max_width() const noexcept;

  bool contains(const Vec& x) const;
  bool subset_of(const IntervalVector& o) const;
  bool contains_zero() const noexcept;

  friend bool operator==(const IntervalVector&, const IntervalVector&) = default;

 private:
  std::vector<Interval> v_;
};

std::ostream& operator<<(std::ostream& os, const IntervalVector& a);

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator-(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator+(const IntervalVector& a, const Vec& b);
IntervalVector operator+(const Vec& a, const IntervalVector& b);
IntervalVector operator-(const IntervalVector& a, const Vec& b);
IntervalVector operator-(const Vec& a, const IntervalVector& b);
IntervalVector operator-(const IntervalVector& a);
IntervalVector operator*(const Interval& s, const IntervalVector& a);
IntervalVector operator*(double s, const IntervalVector& a);

std::optional<IntervalVector> intersect(const IntervalVector& a, const IntervalVector& b);
IntervalVector hull(const IntervalVector& a, const IntervalVector& b);

/// Interval extension of the Euclidean norm: sqrt(sum_i sqr(s_i)).
Interval norm2(const IntervalVector& s);

/// Widens every component by rel * width + abs on each side.
IntervalVector inflate(const IntervalVector& a, double rel, double abs);

// ---------------------------------------------------------------------------

class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  IntervalMatrix(std::size_t rows, std::size_t cols, Interval fill = {});

  static IntervalMatrix point(const Mat& a);
  static IntervalMatrix from_bounds(const Mat& lo, const Mat& hi);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Interval& operator()(std::size_t i, std::size_t j) noexcept { return v_[i * cols_ + j]; }
  const Interval& operator()(std::size_t i, std::size_t j) const noexcept {
    return v_[i * cols_ + j];
  }

  Mat lo() const;
  Mat hi() const;
  Mat mid() const;
  Mat width() const;
  Mat mag() const;

  bool contains(const Mat& a) const;
  bool subset_of(const IntervalMatrix& o) const;

  friend bool operator==(const IntervalMatrix&, const IntervalMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Interval> v_;
};

std::ostream& operator<<(std::ostream& os, const IntervalMatrix& a);

IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator-(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator+(const IntervalMatrix& a, const Mat& b);
IntervalMatrix operator*(double s, const IntervalMatrix& a);
IntervalMatrix operator*(const Interval& s, const IntervalMatrix& a);

IntervalVector operator*(const IntervalMatrix& a, const IntervalVector& x);
IntervalVector operator*(const IntervalMatrix& a, const Vec& x);
IntervalVector operator*(const Mat& a, const IntervalVector& x);
IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator*(const Mat& a, const IntervalMatrix& b);

std::optional<IntervalMatrix> intersect(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix hull(const IntervalMatrix& a, const IntervalMatrix& b);

// ---------------------------------------------------------------------------

/// Rank-3 interval array indexed (a, b, c). Jacobians of G are stored as
/// (k, l, p) = d G_{k,l} / d x_p with shape n x m x n.
class IntervalTensor3 {
 public:
  IntervalTensor3() = default;
  IntervalTensor3(std::size_t d0, std::size_t d1, std::size_t d2, Interval fill = {});

  std::size_t dim0() const noexcept { return d0_; }
  std::size_t dim1() const noexcept { return d1_; }
  std::size_t dim2() const noexcept { return d2_; }

  Interval& operator()(std::size_t a, std::size_t b, std::size_t c) noexcept {
    return v_[(a * d1_ + b) * d2_ + c];
  }
  const Interval& operator()(std::size_t a, std::size_t b, std::size_t c) const noexcept {
    return v_[(a * d1_ + b) * d2_ + c];
  }

  /// Swaps the roles of the last two indices: T'(a, c, b) = T(a, b, c).
  IntervalTensor3 transposed() const;

  bool subset_of(const IntervalTensor3& o) const;

  friend bool operator==(const IntervalTensor3&, const IntervalTensor3&) = default;

 private:
  std::size_t d0_ = 0;
  std::size_t d1_ = 0;
  std::size_t d2_ = 0;
  std::vector<Interval> v_;
};

/// (T v)_{a,c} = sum_b T(a, b, c) v_b. For a Jacobian tensor J (n x m x n)
/// and a control box this is the n x n matrix J_G V; for the transpose
/// (n x n x m) and a state box it is the n x m matrix J_G^T w.
IntervalMatrix contract_middle(const IntervalTensor3& t, const IntervalVector& v);
IntervalMatrix contract_middle(const IntervalTensor3& t, const Vec& v);

}  // namespace datareach
