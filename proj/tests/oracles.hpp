#pragma once

// Independent reference computations. Deliberately naive: explicit loops,
// std::pow, no shared code with the library beyond plain data types.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat matmul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat identity(std::size_t n) {
  Mat m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

/// sum_{t=1}^T rho^(T-t) m_t by explicit powers.
inline double dffr_direct(const std::vector<double>& m, double rho) {
  const std::size_t T = m.size();
  double s = 0.0;
  for (std::size_t t = 1; t <= T; ++t) s += std::pow(rho, static_cast<double>(T - t)) * m[t - 1];
  return s;
}

/// Vertex of the box minimizing <g, v>, by enumerating all 2^d vertices.
inline double lmo_value_bruteforce(const std::vector<double>& lo, const std::vector<double>& hi,
                                   const std::vector<double>& g) {
  const std::size_t d = g.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    double v = 0.0;
    for (std::size_t k = 0; k < d; ++k) v += g[k] * ((mask >> k & 1u) ? hi[k] : lo[k]);
    best = std::min(best, v);
  }
  return best;
}

/// Central difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// min over a uniform grid with the given pitch, endpoints included.
inline std::pair<double, double> grid_min(const std::function<double(double)>& f, double lo, double hi, double pitch) {
  const auto steps = static_cast<long>(std::ceil((hi - lo) / pitch));
  double bx = lo, bf = f(lo);
  for (long k = 1; k <= steps; ++k) {
    const double x = std::min(hi, lo + static_cast<double>(k) * pitch);
    const double fx = f(x);
    if (fx < bf) {
      bf = fx;
      bx = x;
    }
  }
  return {bx, bf};
}

/// The tracking loss used throughout the tests: (a x - A / t^p)^2 in one dimension.
inline double tracking_loss(double a, double amplitude, double power, int t, double x) {
  const double c = amplitude / std::pow(static_cast<double>(t), power);
  return (a * x - c) * (a * x - c);
}

}  // namespace oracle
