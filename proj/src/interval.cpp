#include "datareach/interval.hpp"

#include <atomic>
#include <ostream>
#include <stdexcept>
#include <string>

namespace datareach {

namespace {

std::atomic<bool> g_rounding_slack{false};

constexpr double kSqrtNegativeTolerance = 1e-12;

double slack_for(double bound) {
  return g_rounding_slack.load(std::memory_order_relaxed)
             ? kRoundingSlack * std::max(1.0, std::abs(bound))
             : 0.0;
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": size " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

}  // namespace

void set_rounding_slack(bool enabled) noexcept {
  g_rounding_slack.store(enabled, std::memory_order_relaxed);
}

bool rounding_slack_enabled() noexcept { return g_rounding_slack.load(std::memory_order_relaxed); }

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("Interval bounds must be finite");
  }
  if (lo > hi) {
    throw std::invalid_argument("Interval lower bound " + std::to_string(lo) +
                                " exceeds upper bound " + std::to_string(hi));
  }
}

std::ostream& operator<<(std::ostream& os, const Interval& a) {
  return os << '[' << a.lo() << ", " << a.hi() << ']';
}

Interval sqr(const Interval& a) noexcept {
  const double l2 = a.lo_ * a.lo_;
  const double h2 = a.hi_ * a.hi_;
  if (a.contains_zero()) return {0.0, std::max(l2, h2), Interval::Unchecked{}};
  return {std::min(l2, h2), std::max(l2, h2), Interval::Unchecked{}};
}

Interval sqrt(const Interval& a) {
  if (a.lo_ < -kSqrtNegativeTolerance) {
    throw DomainError("sqrt of an interval with negative lower bound " + std::to_string(a.lo_));
  }
  const double lo = std::sqrt(std::max(a.lo_, 0.0));
  const double hi = std::sqrt(std::max(a.hi_, 0.0));
  return {std::max(0.0, lo - slack_for(lo)), hi + slack_for(hi), Interval::Unchecked{}};
}

Interval divide(const Interval& a, double s) {
  if (s == 0.0 || !std::isfinite(s)) throw DomainError("division by a zero or non-finite scalar");
  Interval q = a * (1.0 / s);
  q.lo_ -= slack_for(q.lo_);
  q.hi_ += slack_for(q.hi_);
  return q;
}

// ---------------------------------------------------------------------------

IntervalVector::IntervalVector(std::size_t n, Interval fill) : v_(n, fill) {
  if (n == 0) throw DimensionMismatch("IntervalVector must have positive dimension");
}

IntervalVector::IntervalVector(std::initializer_list<Interval> entries) : v_(entries) {
  if (v_.empty()) throw DimensionMismatch("IntervalVector must have positive dimension");
}

IntervalVector::IntervalVector(std::vector<Interval> entries) : v_(std::move(entries)) {
  if (v_.empty()) throw DimensionMismatch("IntervalVector must have positive dimension");
}

IntervalVector IntervalVector::point(const Vec& x) {
  IntervalVector r(static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = Interval::point(x[static_cast<Eigen::Index>(i)]);
  return r;
}

IntervalVector IntervalVector::from_bounds(const Vec& lo, const Vec& hi) {
  require_same_size(static_cast<std::size_t>(lo.size()), static_cast<std::size_t>(hi.size()),
                    "IntervalVector::from_bounds");
  IntervalVector r(static_cast<std::size_t>(lo.size()));
  for (Eigen::Index i = 0; i < lo.size(); ++i) r[static_cast<std::size_t>(i)] = Interval(lo[i], hi[i]);
  return r;
}

#define DATAREACH_VEC_PROJECT(NAME, EXPR)                                      \
  Vec IntervalVector::NAME() const {                                           \
    Vec r(static_cast<Eigen::Index>(v_.size()));                               \
    for (std::size_t i = 0; i < v_.size(); ++i) r[static_cast<Eigen::Index>(i)] = v_[i].EXPR; \
    return r;                                                                  \
  }
DATAREACH_VEC_PROJECT(lo, lo())
DATAREACH_VEC_PROJECT(hi, hi())
DATAREACH_VEC_PROJECT(mid, mid())
DATAREACH_VEC_PROJECT(width, width())
DATAREACH_VEC_PROJECT(mag, mag())
#undef DATAREACH_VEC_PROJECT

double IntervalVector::max_width() const noexcept {
  double w = 0.0;
  for (const auto& a : v_) w = std::max(w, a.width());
  return w;
}

bool IntervalVector::contains(const Vec& x) const {
  require_same_size(v_.size(), static_cast<std::size_t>(x.size()), "IntervalVector::contains");
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!v_[i].contains(x[static_cast<Eigen::Index>(i)])) return false;
  }
  return true;
}

bool IntervalVector::subset_of(const IntervalVector& o) const {
  require_same_size(v_.size(), o.size(), "IntervalVector::subset_of");
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!v_[i].subset_of(o[i])) return false;
  }
  return true;
}

bool IntervalVector::contains_zero() const noexcept {
  for (const auto& a : v_) {
    if (!a.contains_zero()) return false;
  }
  return true;
}

std::ostream& operator<<(std::ostream& os, const IntervalVector& a) {
  os << '(';
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? ", " : "") << a[i];
  return os << ')';
}

namespace {

template <class Op>
IntervalVector zip(const IntervalVector& a, const IntervalVector& b, Op op, const char* what) {
  require_same_size(a.size(), b.size(), what);
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = op(a[i], b[i]);
  return r;
}

template <class Op>
IntervalVector zip(const IntervalVector& a, const Vec& b, Op op, const char* what) {
  require_same_size(a.size(), static_cast<std::size_t>(b.size()), what);
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = op(a[i], b[static_cast<Eigen::Index>(i)]);
  return r;
}

}  // namespace

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b) {
  return zip(a, b, [](const Interval& x, const Interval& y) { return x + y; }, "vector +");
}
IntervalVector operator-(const IntervalVector& a, const IntervalVector& b) {
  return zip(a, b, [](const Interval& x, const Interval& y) { return x - y; }, "vector -");
}
IntervalVector operator+(const IntervalVector& a, const Vec& b) {
  return zip(a, b, [](const Interval& x, double y) { return x + y; }, "vector +");
}
IntervalVector operator+(const Vec& a, const IntervalVector& b) { return b + a; }
IntervalVector operator-(const IntervalVector& a, const Vec& b) {
  return zip(a, b, [](const Interval& x, double y) { return x - y; }, "vector -");
}
IntervalVector operator-(const Vec& a, const IntervalVector& b) {
  return zip(b, a, [](const Interval& x, double y) { return y - x; }, "vector -");
}
IntervalVector operator-(const IntervalVector& a) {
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}
IntervalVector operator*(const Interval& s, const IntervalVector& a) {
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}
IntervalVector operator*(double s, const IntervalVector& a) {
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

std::optional<IntervalVector> intersect(const IntervalVector& a, const IntervalVector& b) {
  require_same_size(a.size(), b.size(), "vector intersect");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto c = intersect(a[i], b[i]);
    if (!c) return std::nullopt;
    r[i] = *c;
  }
  return r;
}

IntervalVector hull(const IntervalVector& a, const IntervalVector& b) {
  return zip(a, b, [](const Interval& x, const Interval& y) { return hull(x, y); }, "vector hull");
}

Interval norm2(const IntervalVector& s) {
  Interval acc = sqr(s[0]);
  for (std::size_t i = 1; i < s.size(); ++i) acc += sqr(s[i]);
  return sqrt(acc);
}

IntervalVector inflate(const IntervalVector& a, double rel, double abs) {
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double pad = rel * a[i].width() + abs;
    r[i] = Interval(a[i].lo() - pad, a[i].hi() + pad);
  }
  return r;
}

// ---------------------------------------------------------------------------

IntervalMatrix::IntervalMatrix(std::size_t rows, std::size_t cols, Interval fill)
    : rows_(rows), cols_(cols), v_(rows * cols, fill) {
  if (rows == 0 || cols == 0) throw DimensionMismatch("IntervalMatrix must be non-empty");
}

IntervalMatrix IntervalMatrix::point(const Mat& a) {
  IntervalMatrix r(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()));
  for (std::size_t i = 0; i < r.rows_; ++i) {
    for (std::size_t j = 0; j < r.cols_; ++j) {
      r(i, j) = Interval::point(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  return r;
}

IntervalMatrix IntervalMatrix::from_bounds(const Mat& lo, const Mat& hi) {
  if (lo.rows() != hi.rows() || lo.cols() != hi.cols()) {
    throw DimensionMismatch("IntervalMatrix::from_bounds: shape mismatch");
  }
  IntervalMatrix r(static_cast<std::size_t>(lo.rows()), static_cast<std::size_t>(lo.cols()));
  for (Eigen::Index i = 0; i < lo.rows(); ++i) {
    for (Eigen::Index j = 0; j < lo.cols(); ++j) {
      r(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = Interval(lo(i, j), hi(i, j));
    }
  }
  return r;
}

#define DATAREACH_MAT_PROJECT(NAME, EXPR)                                             \
  Mat IntervalMatrix::NAME() const {                                                  \
    Mat r(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));        \
    for (std::size_t i = 0; i < rows_; ++i)                                           \
      for (std::size_t j = 0; j < cols_; ++j)                                         \
        r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j).EXPR; \
    return r;                                                                         \
  }
DATAREACH_MAT_PROJECT(lo, lo())
DATAREACH_MAT_PROJECT(hi, hi())
DATAREACH_MAT_PROJECT(mid, mid())
DATAREACH_MAT_PROJECT(width, width())
DATAREACH_MAT_PROJECT(mag, mag())
#undef DATAREACH_MAT_PROJECT

bool IntervalMatrix::contains(const Mat& a) const {
  if (static_cast<std::size_t>(a.rows()) != rows_ || static_cast<std::size_t>(a.cols()) != cols_) {
    throw DimensionMismatch("IntervalMatrix::contains: shape mismatch");
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!(*this)(i, j).contains(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))) {
        return false;
      }
    }
  }
  return true;
}

bool IntervalMatrix::subset_of(const IntervalMatrix& o) const {
  if (o.rows_ != rows_ || o.cols_ != cols_) {
    throw DimensionMismatch("IntervalMatrix::subset_of: shape mismatch");
  }
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!v_[i].subset_of(o.v_[i])) return false;
  }
  return true;
}

std::ostream& operator<<(std::ostream& os, const IntervalMatrix& a) {
  os << '[';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < a.cols(); ++j) os << (j ? " " : "") << a(i, j);
  }
  return os << ']';
}

namespace {

void require_same_shape(const IntervalMatrix& a, std::size_t rows, std::size_t cols,
                        const char* what) {
  if (a.rows() != rows || a.cols() != cols) {
    throw DimensionMismatch(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  }
}

}  // namespace

IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a, b.rows(), b.cols(), "matrix +");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

IntervalMatrix operator-(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a, b.rows(), b.cols(), "matrix -");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

IntervalMatrix operator+(const IntervalMatrix& a, const Mat& b) {
  require_same_shape(a, static_cast<std::size_t>(b.rows()), static_cast<std::size_t>(b.cols()),
                     "matrix +");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      r(i, j) = a(i, j) + b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return r;
}

IntervalMatrix operator*(double s, const IntervalMatrix& a) {
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
  return r;
}

IntervalMatrix operator*(const Interval& s, const IntervalMatrix& a) {
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
  return r;
}

IntervalVector operator*(const IntervalMatrix& a, const IntervalVector& x) {
  require_same_size(a.cols(), x.size(), "matrix-vector product");
  IntervalVector r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Interval acc = a(i, 0) * x[0];
    for (std::size_t j = 1; j < a.cols(); ++j) acc += a(i, j) * x[j];
    r[i] = acc;
  }
  return r;
}

IntervalVector operator*(const IntervalMatrix& a, const Vec& x) {
  require_same_size(a.cols(), static_cast<std::size_t>(x.size()), "matrix-vector product");
  IntervalVector r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Interval acc = a(i, 0) * x[0];
    for (std::size_t j = 1; j < a.cols(); ++j) acc += a(i, j) * x[static_cast<Eigen::Index>(j)];
    r[i] = acc;
  }
  return r;
}

IntervalVector operator*(const Mat& a, const IntervalVector& x) {
  require_same_size(static_cast<std::size_t>(a.cols()), x.size(), "matrix-vector product");
  IntervalVector r(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Interval acc = a(i, 0) * x[0];
    for (Eigen::Index j = 1; j < a.cols(); ++j) acc += a(i, j) * x[static_cast<std::size_t>(j)];
    r[static_cast<std::size_t>(i)] = acc;
  }
  return r;
}

IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_size(a.cols(), b.rows(), "matrix-matrix product");
  IntervalMatrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      Interval acc = a(i, 0) * b(0, j);
      for (std::size_t k = 1; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      r(i, j) = acc;
    }
  }
  return r;
}

IntervalMatrix operator*(const Mat& a, const IntervalMatrix& b) {
  return IntervalMatrix::point(a) * b;
}

std::optional<IntervalMatrix> intersect(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a, b.rows(), b.cols(), "matrix intersect");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      auto c = intersect(a(i, j), b(i, j));
      if (!c) return std::nullopt;
      r(i, j) = *c;
    }
  }
  return r;
}

IntervalMatrix hull(const IntervalMatrix& a, const IntervalMatrix& b) {
  require_same_shape(a, b.rows(), b.cols(), "matrix hull");
  IntervalMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = hull(a(i, j), b(i, j));
  return r;
}

// ---------------------------------------------------------------------------

IntervalTensor3::IntervalTensor3(std::size_t d0, std::size_t d1, std::size_t d2, Interval fill)
    : d0_(d0), d1_(d1), d2_(d2), v_(d0 * d1 * d2, fill) {
  if (d0 == 0 || d1 == 0 || d2 == 0) throw DimensionMismatch("IntervalTensor3 must be non-empty");
}

IntervalTensor3 IntervalTensor3::transposed() const {
  IntervalTensor3 r(d0_, d2_, d1_);
  for (std::size_t a = 0; a < d0_; ++a)
    for (std::size_t b = 0; b < d1_; ++b)
      for (std::size_t c = 0; c < d2_; ++c) r(a, c, b) = (*this)(a, b, c);
  return r;
}

bool IntervalTensor3::subset_of(const IntervalTensor3& o) const {
  if (o.d0_ != d0_ || o.d1_ != d1_ || o.d2_ != d2_) {
    throw DimensionMismatch("IntervalTensor3::subset_of: shape mismatch");
  }
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!v_[i].subset_of(o.v_[i])) return false;
  }
  return true;
}

IntervalMatrix contract_middle(const IntervalTensor3& t, const IntervalVector& v) {
  require_same_size(t.dim1(), v.size(), "tensor contraction");
  IntervalMatrix r(t.dim0(), t.dim2());
  for (std::size_t a = 0; a < t.dim0(); ++a) {
    for (std::size_t c = 0; c < t.dim2(); ++c) {
      Interval acc = t(a, 0, c) * v[0];
      for (std::size_t b = 1; b < t.dim1(); ++b) acc += t(a, b, c) * v[b];
      r(a, c) = acc;
    }
  }
  return r;
}

IntervalMatrix contract_middle(const IntervalTensor3& t, const Vec& v) {
  return contract_middle(t, IntervalVector::point(v));
}

}  // namespace datareach
