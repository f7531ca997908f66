#pragma once

// Communication topologies for round-synchronous consensus.
//
// A WeightMatrix is a validated symmetric doubly stochastic matrix over a
// connected undirected graph. Its mixing constants bound how fast powers of
// W approach the uniform averaging matrix:
//
//   |[W^k]_ij - 1/n| <= gamma * lambda^k,
//   gamma  = (1 - omega / (4 n^2))^-2,
//   lambda = (1 - omega / (4 n^2))^(1/B).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "dffr/error.hpp"
#include "dffr/vector.hpp"

namespace dffr::network {

inline constexpr double kStochasticTol = 1e-9;
inline constexpr double kSymmetryTol = 1e-12;

class WeightMatrix {
 public:
  int n() const noexcept { return static_cast<int>(w_.rows()); }
  const Matrix& w() const noexcept { return w_; }
  double operator()(int i, int j) const { return w_(i, j); }
  /// Minimum strictly positive entry.
  double omega() const noexcept { return omega_; }
  int B() const noexcept { return b_; }

  friend WeightMatrix validate_weight_matrix(const Matrix& w, int B);

 private:
  WeightMatrix(Matrix w, double omega, int b) : w_(std::move(w)), omega_(omega), b_(b) {}

  Matrix w_;
  double omega_;
  int b_;
};

struct MixingConstants {
  double gamma;
  double lambda;
};

namespace detail {

inline bool connected(const Matrix& w) {
  const auto n = w.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<Eigen::Index> q;
  q.push(0);
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!q.empty()) {
    const auto i = q.front();
    q.pop();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && w(i, j) > 0.0 && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        ++reached;
        q.push(j);
      }
    }
  }
  return reached == n;
}

}  // namespace detail

/// Checks every clause of the topology assumption and computes omega.
/// A single agent (n = 1) is trivially connected.
inline WeightMatrix validate_weight_matrix(const Matrix& w, int B = 1) {
  if (w.rows() < 1 || w.rows() != w.cols())
    throw Error(ErrorCode::DimensionMismatch, "weight matrix must be square with n >= 1");
  if (B < 1) throw Error(ErrorCode::InvalidArgument, "connectivity window B must be >= 1");
  if (!w.allFinite()) throw Error(ErrorCode::NonFiniteInput, "weight matrix has non-finite entries");
  const auto n = w.rows();

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (w(i, j) < 0.0 || w(i, j) > 1.0)
        throw Error(ErrorCode::NotDoublyStochastic,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0,1]");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(w.row(i).sum() - 1.0) > kStochasticTol)
      throw Error(ErrorCode::NotDoublyStochastic, "row " + std::to_string(i) + " does not sum to 1");
    if (std::abs(w.col(i).sum() - 1.0) > kStochasticTol)
      throw Error(ErrorCode::NotDoublyStochastic, "column " + std::to_string(i) + " does not sum to 1");
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(w(i, j) - w(j, i)) > kSymmetryTol)
        throw Error(ErrorCode::NotSymmetric,
                    "w(" + std::to_string(i) + "," + std::to_string(j) + ") != w(" + std::to_string(j) + "," +
                        std::to_string(i) + ")");

  double omega = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (w(i, j) > 0.0) omega = std::min(omega, w(i, j));
  if (!(omega >= std::numeric_limits<double>::min()))
    throw Error(ErrorCode::NonPositiveWeightFloor, "smallest positive weight is subnormal");

  if (n > 1 && !detail::connected(w))
    throw Error(ErrorCode::Disconnected, "graph of positive off-diagonal weights is not connected");

  return WeightMatrix(w, omega, B);
}

inline MixingConstants mixing_constants(int n, double omega, int B) {
  const double base = 1.0 - omega / (4.0 * n * n);
  return {std::pow(base, -2.0), std::pow(base, 1.0 / B)};
}

inline MixingConstants mixing_constants(const WeightMatrix& wm) {
  return mixing_constants(wm.n(), wm.omega(), wm.B());
}

struct MixingBoundReport {
  bool pass = true;
  /// min over (k, i, j) of gamma * lambda^k - |[W^k]_ij - 1/n|; negative on failure.
  double min_slack = std::numeric_limits<double>::infinity();
  int worst_power = 0;
};

/// Brute-force check of the power bound for every gap t - s in [0, horizon - 1].
inline MixingBoundReport mixing_power_bound_check(const WeightMatrix& wm, const MixingConstants& mc, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  const int n = wm.n();
  MixingBoundReport rep;
  Matrix power = Matrix::Identity(n, n);
  double lam_k = 1.0;
  for (int k = 0; k < horizon; ++k) {
    const double dev = (power.array() - 1.0 / n).abs().maxCoeff();
    const double slack = mc.gamma * lam_k - dev;
    if (slack < rep.min_slack) {
      rep.min_slack = slack;
      rep.worst_power = k;
    }
    if (slack < 0.0) rep.pass = false;
    power = power * wm.w();
    lam_k *= mc.lambda;
  }
  return rep;
}

/// z_i = sum_j w_ij x_j. Accepts any square matrix so tests can probe
/// degenerate weights without validation.
inline AgentVectors gossip_average(const Matrix& w, const AgentVectors& states) {
  const auto n = static_cast<std::size_t>(w.rows());
  if (states.size() != n || w.cols() != w.rows())
    throw Error(ErrorCode::DimensionMismatch, "state count does not match weight matrix");
  const auto d = states.empty() ? 0 : states.front().size();
  for (const auto& s : states)
    if (s.size() != d) throw Error(ErrorCode::DimensionMismatch, "states differ in dimension");
  AgentVectors out(n, Vector::Zero(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double wij = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (wij != 0.0) out[i] += wij * states[j];
    }
  return out;
}

inline AgentVectors gossip_average(const WeightMatrix& wm, const AgentVectors& states) {
  return gossip_average(wm.w(), states);
}

// -- generators ------------------------------------------------------------

/// Ring over n agents with weight `edge` to each neighbour and the remainder
/// on the diagonal. For n = 2 the two neighbours coincide.
inline Matrix ring_matrix(int n, double edge) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "ring needs n >= 2");
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    w(i, (i + 1) % n) += edge;
    w(i, (i + n - 1) % n) += edge;
  }
  for (int i = 0; i < n; ++i) w(i, i) = 1.0 - (w.row(i).sum() - w(i, i));
  return w;
}

/// Complete graph with weight `edge` on every off-diagonal entry.
inline Matrix complete_matrix(int n, double edge) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "complete graph needs n >= 1");
  Matrix w = Matrix::Constant(n, n, edge);
  for (int i = 0; i < n; ++i) w(i, i) = 1.0 - (n - 1) * edge;
  return w;
}

/// Four-agent ring with self-loops: off-diagonal neighbour weight omega,
/// diagonal 1 - 2 omega. Minimum positive entry is omega for omega <= 1/3.
inline Matrix paper4_matrix(double omega = 0.22) {
  if (!(omega > 0.0 && omega <= 1.0 / 3.0))
    throw Error(ErrorCode::InvalidArgument, "paper4 generator requires omega in (0, 1/3]");
  return ring_matrix(4, omega);
}

}  // namespace dffr::network
