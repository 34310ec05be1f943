#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace adasdbo {

using Vec = std::vector<double>;

// All reductions run in fixed index order so results are bitwise
// reproducible regardless of thread count.

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, Vec& x) {
  for (double& xi : x) xi *= alpha;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline bool all_finite(const Vec& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

// out = M * x with M row-major rows x cols.
inline void matvec(std::size_t rows, std::size_t cols, const Vec& m, const Vec& x, Vec& out) {
  out.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    const double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    out[r] = s;
  }
}

// out = M^T * x with M row-major rows x cols.
inline void matvec_t(std::size_t rows, std::size_t cols, const Vec& m, const Vec& x, Vec& out) {
  out.assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * x[r];
  }
}

// Row-wise mean of equally sized vectors, fixed summation order.
inline Vec mean_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) throw std::invalid_argument("mean_rows: empty input");
  Vec out(rows.front().size(), 0.0);
  for (const Vec& r : rows) axpy(1.0, r, out);
  scale(1.0 / static_cast<double>(rows.size()), out);
  return out;
}

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// Intended for small dense systems (construction-time closed forms).
inline Vec solve_dense(std::size_t n, Vec a, Vec b) {
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a[r * n + k]) > std::abs(a[piv * n + k])) piv = r;
    if (a[piv * n + k] == 0.0) throw std::runtime_error("solve_dense: singular matrix");
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
      std::swap(b[k], b[piv]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a[r * n + k] / a[k * n + k];
      for (std::size_t c = k; c < n; ++c) a[r * n + c] -= f * a[k * n + c];
      b[r] -= f * b[k];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return x;
}

}  // namespace adasdbo
