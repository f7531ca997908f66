#pragma once

// Forgetting-factor regret and companion metrics over traces.
//
//   R_T = sum_{t=1}^T rho^(T-t) m_t,   m_t = (1/n) sum_i [f_t(x_i^t) - f_t(x_*^t)]
//
// All discounted sums use the recurrence S_T = rho S_{T-1} + a_T.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dffr/error.hpp"
#include "dffr/trace.hpp"
#include "dffr/vector.hpp"

namespace dffr::metrics {

inline void check_rho(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::RhoOutOfRange, "rho must lie in (0, 1)");
}

/// m_t for t = 1..T.
inline std::vector<double> instantaneous_gaps(const Trace& trace) {
  std::vector<double> m;
  m.reserve(trace.rounds.size());
  for (const auto& r : trace.rounds) {
    double s = 0.0;
    for (double g : r.global_loss) s += g - r.f_star;
    m.push_back(s / static_cast<double>(r.global_loss.size()));
  }
  return m;
}

/// Running discounted sums S_1..S_T of `values`.
inline std::vector<double> discounted_sums(std::span<const double> values, double rho) {
  std::vector<double> out;
  out.reserve(values.size());
  double s = 0.0;
  for (double v : values) {
    s = rho * s + v;
    out.push_back(s);
  }
  return out;
}

/// R_1..R_T from the gap sequence.
inline std::vector<double> dffr_sequence(std::span<const double> gaps, double rho) {
  check_rho(rho);
  return discounted_sums(gaps, rho);
}

inline double dffr(std::span<const double> gaps, double rho) {
  check_rho(rho);
  double s = 0.0;
  for (double m : gaps) s = rho * s + m;
  return s;
}

inline double dffr(const Trace& trace, double rho) { return dffr(instantaneous_gaps(trace), rho); }

/// Unweighted dynamic regret sum_t m_t, per prefix.
inline std::vector<double> cumulative_regret(std::span<const double> gaps) {
  std::vector<double> out;
  out.reserve(gaps.size());
  double s = 0.0;
  for (double m : gaps) out.push_back(s += m);
  return out;
}

inline double final_round_gap(const Trace& trace) {
  if (trace.rounds.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  return instantaneous_gaps(trace).back();
}

/// max over coordinates of (max_i x_i - min_i x_i) at round t (1-based).
inline double consensus_diameter(const Trace& trace, int t) {
  if (t < 1 || t > trace.horizon()) throw Error(ErrorCode::IndexOutOfRange, "round " + std::to_string(t));
  const auto& x = trace.rounds[static_cast<std::size_t>(t - 1)].x;
  double diam = 0.0;
  for (Eigen::Index k = 0; k < x.front().size(); ++k) {
    double lo = x.front()[k], hi = x.front()[k];
    for (const auto& xi : x) {
      lo = std::min(lo, xi[k]);
      hi = std::max(hi, xi[k]);
    }
    diam = std::max(diam, hi - lo);
  }
  return diam;
}

/// First t such that pred holds at every t' >= t; nullopt if it fails at T.
template <class Pred>
std::optional<int> persistent_from(int T, Pred&& pred) {
  int first = T + 1;
  for (int t = T; t >= 1; --t) {
    if (!pred(t)) break;
    first = t;
  }
  if (first > T) return std::nullopt;
  return first;
}

inline std::optional<int> consensus_time(const Trace& trace, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  return persistent_from(trace.horizon(), [&](int t) { return consensus_diameter(trace, t) < threshold; });
}

/// max_i ||x_i^t - x_*^t|| per round.
inline std::vector<double> max_tracking_errors(const Trace& trace) {
  std::vector<double> out;
  for (const auto& r : trace.rounds) {
    double e = 0.0;
    for (const auto& xi : r.x) e = std::max(e, (xi - r.x_star).norm());
    out.push_back(e);
  }
  return out;
}

/// nu_t = (1/n) sum_i ||x_i^t - x_*^t|| per round.
inline std::vector<double> mean_tracking_errors(const Trace& trace) {
  std::vector<double> out;
  for (const auto& r : trace.rounds) {
    double e = 0.0;
    for (const auto& xi : r.x) e += (xi - r.x_star).norm();
    out.push_back(e / static_cast<double>(r.x.size()));
  }
  return out;
}

inline std::optional<int> tracking_time(const Trace& trace, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  const auto err = max_tracking_errors(trace);
  return persistent_from(trace.horizon(), [&](int t) { return err[static_cast<std::size_t>(t - 1)] < threshold; });
}

/// Forgetting-weighted mean of a per-round sequence, per prefix T:
///   sum rho^(T-t) a_t / sum rho^(T-t).
/// Without rho this is the plain running mean.
inline std::vector<double> forgetting_weighted_mean(std::span<const double> values, std::optional<double> rho) {
  std::vector<double> out;
  out.reserve(values.size());
  const double r = rho.value_or(1.0);
  if (rho) check_rho(*rho);
  double num = 0.0, den = 0.0;
  for (double v : values) {
    num = r * num + v;
    den = r * den + 1.0;
    out.push_back(num / den);
  }
  return out;
}

/// First round (1-based) with value < threshold.
inline std::optional<int> first_below(std::span<const double> values, double threshold) {
  for (std::size_t k = 0; k < values.size(); ++k)
    if (values[k] < threshold) return static_cast<int>(k + 1);
  return std::nullopt;
}

// -- synthetic traces ----------------------------------------------------------------

/// Single-agent scripted trace whose round gaps equal `gaps`: x_t = sqrt(m_t)
/// against f_t(x) = x^2, so x_*^t = 0.
inline Trace scripted_trace(std::span<const double> gaps) {
  Trace tr;
  tr.kind = AlgorithmKind::Scripted;
  tr.n = 1;
  tr.d = 1;
  int t = 0;
  for (double m : gaps) {
    if (m < 0.0) throw Error(ErrorCode::InvalidArgument, "scripted gaps must be non-negative");
    RoundRecord r;
    r.t = ++t;
    const Vector x = Vector::Constant(1, std::sqrt(m));
    r.x = {x};
    r.z = {x};
    r.eps_norm = {0.0};
    r.local_loss = {m};
    r.global_loss = {m};
    r.aux = {0.0};
    r.x_star = Vector::Zero(1);
    r.f_star = 0.0;
    tr.rounds.push_back(std::move(r));
  }
  tr.tail_eps = {0.0};
  return tr;
}

/// m_t = 1 when t = 3^k for some k >= 1, else 0. Starting at t = 3 keeps
/// sum m_t / T <= log_3(T) / T exact at every T.
inline std::vector<double> power_of_three_spikes(int T) {
  std::vector<double> m(static_cast<std::size_t>(std::max(T, 0)), 0.0);
  for (long p = 3; p <= T; p *= 3) m[static_cast<std::size_t>(p - 1)] = 1.0;
  return m;
}

inline Trace spike_trace(int T) {
  const auto m = power_of_three_spikes(T);
  return scripted_trace(m);
}

}  // namespace dffr::metrics
