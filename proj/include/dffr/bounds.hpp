#pragma once

// Evaluators for the DFFR upper bounds of the gradient-free algorithm
// (general and constant step) and the projection-free algorithm, plus the
// consensus-error decomposition check.
//
// Bounds are returned as sequences indexed by horizon T = 1..T_max, each
// evaluated from the measured per-round inputs of a trace.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "dffr/algorithms.hpp"
#include "dffr/error.hpp"
#include "dffr/geometry.hpp"
#include "dffr/metrics.hpp"
#include "dffr/network.hpp"
#include "dffr/objectives.hpp"
#include "dffr/trace.hpp"

namespace dffr::bounds {

using geometry::BoxSet;

struct BoundInputs {
  int n = 0;
  int d = 0;
  /// F[t-1][i] = | ||eps_{i,t}|| - ||eps_{i,t-1}|| |
  std::vector<std::vector<double>> F;
  /// eps[t-1][i] = ||eps_{i,t}|| = ||x_i^{t+1} - z_i^{t+1}||
  std::vector<std::vector<double>> eps;
  /// Path length of the per-round optimum over X_delta (gradient-free) or X.
  std::vector<double> theta;
  /// nu_t = (1/n) sum_i ||x_i^t - x_*^t||
  std::vector<double> nu;
  /// sum_j ||x_j^1||
  double x1_norm_sum = 0.0;

  double L = 0.0, Ls = 0.0, L1 = 0.0, M = 0.0, r = 0.0;
  double gamma = 1.0, lambda = 0.0, rho = 0.0, delta = 0.0;

  int horizon() const noexcept { return static_cast<int>(nu.size()); }

  /// sigma = (4 + 5d) L + 2 L (1 + d) rho^-2 / (1 - lambda / rho)
  double sigma() const {
    return (4.0 + 5.0 * d) * L + 2.0 * L * (1.0 + d) * std::pow(rho, -2.0) / (1.0 - lambda / rho);
  }
};

inline void check_rho_lambda(const BoundInputs& in) {
  metrics::check_rho(in.rho);
  if (!(in.rho > in.lambda))
    throw Error(ErrorCode::RhoNotGreaterThanLambda,
                "bounds need rho > lambda (rho=" + std::to_string(in.rho) + ", lambda=" + std::to_string(in.lambda) + ")");
}

/// Assembles the measured sequences. `delta` selects X_delta for the
/// optimum path length; pass nullopt to measure it over X. The stream must
/// cover round T + 1.
inline BoundInputs collect_bound_inputs(const Trace& trace, const objectives::ObjectiveStream& stream,
                                        const BoxSet& set, const network::MixingConstants& mc, double rho,
                                        std::optional<double> delta, const objectives::StreamConstants& k) {
  const int T = trace.horizon();
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "empty trace");
  if (stream.horizon() < T + 1)
    throw Error(ErrorCode::InvalidArgument, "stream must cover round T+1 for the optimum path length");
  BoundInputs in;
  in.n = trace.n;
  in.d = trace.d;
  in.L = k.L;
  in.Ls = k.Ls;
  in.L1 = k.L1;
  in.M = set.norm_bound();
  in.r = set.origin_interior() ? set.inradius() : 0.0;
  in.gamma = mc.gamma;
  in.lambda = mc.lambda;
  in.rho = rho;
  in.delta = delta.value_or(0.0);

  const auto n = static_cast<std::size_t>(trace.n);
  in.eps.assign(static_cast<std::size_t>(T), std::vector<double>(n, 0.0));
  in.F.assign(static_cast<std::size_t>(T), std::vector<double>(n, 0.0));
  for (int t = 1; t <= T; ++t) {
    const auto& cur = t < T ? trace.rounds[static_cast<std::size_t>(t)].eps_norm : trace.tail_eps;
    const auto& prev = trace.rounds[static_cast<std::size_t>(t - 1)].eps_norm;
    if (cur.size() != n) throw Error(ErrorCode::DimensionMismatch, "trace is missing consensus errors");
    for (std::size_t i = 0; i < n; ++i) {
      in.eps[static_cast<std::size_t>(t - 1)][i] = cur[i];
      in.F[static_cast<std::size_t>(t - 1)][i] = std::abs(cur[i] - prev[i]);
    }
  }

  const BoxSet opt_set = delta ? geometry::ShrunkSet(set, *delta).as_box() : set;
  Vector prev_opt = objectives::round_optimum(stream, 1, opt_set).x_star;
  for (int t = 1; t <= T; ++t) {
    Vector next_opt = objectives::round_optimum(stream, t + 1, opt_set).x_star;
    in.theta.push_back((prev_opt - next_opt).norm());
    prev_opt = std::move(next_opt);
  }
  in.nu = metrics::mean_tracking_errors(trace);
  for (const auto& x : trace.rounds.front().x) in.x1_norm_sum += x.norm();
  return in;
}

/// Element-wise mean of the measured sequences across seeds; constants come
/// from the first entry.
inline BoundInputs average_inputs(const std::vector<BoundInputs>& runs) {
  if (runs.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to average");
  BoundInputs out = runs.front();
  const double k = static_cast<double>(runs.size());
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const auto& b = runs[r];
    if (b.horizon() != out.horizon() || b.n != out.n) throw Error(ErrorCode::DimensionMismatch, "runs differ in shape");
    for (std::size_t t = 0; t < out.nu.size(); ++t) {
      out.nu[t] += b.nu[t];
      out.theta[t] += b.theta[t];
      for (std::size_t i = 0; i < out.F[t].size(); ++i) {
        out.F[t][i] += b.F[t][i];
        out.eps[t][i] += b.eps[t][i];
      }
    }
    out.x1_norm_sum += b.x1_norm_sum;
  }
  for (std::size_t t = 0; t < out.nu.size(); ++t) {
    out.nu[t] /= k;
    out.theta[t] /= k;
    for (std::size_t i = 0; i < out.F[t].size(); ++i) {
      out.F[t][i] /= k;
      out.eps[t][i] /= k;
    }
  }
  out.x1_norm_sum /= k;
  return out;
}

namespace detail {

inline double row_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

/// sum_{t=1}^T rho^(T-t) lambda^(t-2), per T.
inline std::vector<double> initial_mixing_weights(int T, double rho, double lambda) {
  std::vector<double> out;
  double s = 0.0;
  double lam_pow = 1.0 / lambda;  // lambda^(t-2) at t = 1
  for (int t = 1; t <= T; ++t) {
    s = rho * s + lam_pow;
    out.push_back(s);
    lam_pow *= lambda;
  }
  return out;
}

inline void check_delta(const BoundInputs& in) {
  if (!(in.delta > 0.0 && in.delta < in.r)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, r)");
}

/// Shared body of the gradient-free bounds; `alpha(t)` gives the step.
template <class StepFn>
std::vector<double> gradient_free_bound(const BoundInputs& in, StepFn&& alpha) {
  check_rho_lambda(in);
  check_delta(in);
  const int T = in.horizon();
  const double rho = in.rho;
  const double sigma2 = in.sigma() * in.sigma();
  const double n = in.n;
  const double d = in.d;
  const auto init = initial_mixing_weights(T, rho, in.lambda);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(T));
  double sF = 0.0, sStep = 0.0, sGeo = 0.0, sTheta = 0.0;
  for (int t = 1; t <= T; ++t) {
    const auto ut = static_cast<std::size_t>(t - 1);
    const double a = alpha(t);
    sF = rho * sF + row_sum(in.F[ut]);
    sStep = rho * sStep + 0.5 * a * n * sigma2;
    sGeo = rho * sGeo + 1.0;
    sTheta = rho * sTheta + in.theta[ut] / a;
    out.push_back(2.0 * in.L * (1.0 + d) * in.gamma * in.x1_norm_sum * init[ut] +
                  4.0 * in.L * (1.0 + d) / n * sF + sStep + (in.delta / in.r) * in.L1 * sGeo + 2.0 * in.M * sTheta +
                  2.0 * in.M * in.M / a);
  }
  return out;
}

}  // namespace detail

/// Constant-step bound, one value per horizon.
inline std::vector<double> constant_step_bound(const BoundInputs& in, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  return detail::gradient_free_bound(in, [alpha](int) { return alpha; });
}

/// Gradient-free bound for a non-increasing schedule. Constant schedules go
/// to constant_step_bound.
inline std::vector<double> gradient_free_bound(const BoundInputs& in, const algorithms::StepSchedule& schedule) {
  if (schedule.constant()) return constant_step_bound(in, schedule.scale);
  return detail::gradient_free_bound(in, [&](int t) { return schedule.at(t); });
}

/// Limit of the constant-step bound when F and theta vanish:
///   alpha sigma^2 n / (2 (1 - rho)) + delta L1 / (r (1 - rho)) + 2 M^2 / alpha
inline double constant_step_asymptote(const BoundInputs& in, double alpha) {
  check_rho_lambda(in);
  const double s = in.sigma();
  return alpha * s * s * in.n / (2.0 * (1.0 - in.rho)) + in.delta * in.L1 / (in.r * (1.0 - in.rho)) +
         2.0 * in.M * in.M / alpha;
}

/// Constant step minimizing alpha sigma^2 n / (2(1-rho)) + 2 M^2 / alpha.
inline double optimal_constant_step(const BoundInputs& in) {
  check_rho_lambda(in);
  const double s = in.sigma();
  return 2.0 * in.M * std::sqrt((1.0 - in.rho) / (s * s * in.n));
}

/// Projection-free bound, one value per horizon. The F term carries the 1/n
/// and the sum over agents.
inline std::vector<double> projection_free_bound(const BoundInputs& in, double alpha0) {
  check_rho_lambda(in);
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha0 must lie in (0, 1)");
  const int T = in.horizon();
  const double rho = in.rho;
  const double n = in.n;
  const double L = in.L;
  const double per_round = 2.0 * L * alpha0 * in.M + 2.0 * in.Ls * alpha0 * alpha0 * in.M * in.M;
  const double eps_coef = 9.0 * L / n + (4.0 * L / n) * std::pow(rho, -2.0) / (1.0 - in.lambda / rho);
  const auto init = detail::initial_mixing_weights(T, rho, in.lambda);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(T));
  double sNu = 0.0, sGeo = 0.0, sF = 0.0, sEps = 0.0;
  for (int t = 1; t <= T; ++t) {
    const auto ut = static_cast<std::size_t>(t - 1);
    sNu = rho * sNu + in.nu[ut];
    sGeo = rho * sGeo + 1.0;
    sF = rho * sF + detail::row_sum(in.F[ut]);
    sEps = rho * sEps + detail::row_sum(in.eps[ut]);
    out.push_back(L * sNu + per_round * sGeo + 8.0 * L / n * sF + 4.0 * L * in.gamma * in.x1_norm_sum * init[ut] +
                  eps_coef * sEps);
  }
  return out;
}

/// (2 L alpha0 M + 2 Ls alpha0^2 M^2) / (1 - rho)
inline double projection_free_asymptote(const BoundInputs& in, double alpha0) {
  check_rho_lambda(in);
  return (2.0 * in.L * alpha0 * in.M + 2.0 * in.Ls * alpha0 * alpha0 * in.M * in.M) / (1.0 - in.rho);
}

// -- consensus error decomposition -------------------------------------------------------

struct DecompositionReport {
  bool pass = true;
  /// min over (i, t) of rhs - lhs.
  double min_slack = std::numeric_limits<double>::infinity();
  int worst_agent = 0;
  int worst_round = 0;
};

/// Checks, for every agent i and round t,
///   ||x_i^t - xbar^t|| <= gamma lambda^(t-2) sum_j ||x_j^1|| + (1/n) sum_j ||eps_{j,t-1}||
///                         + ||eps_{i,t-1}|| + gamma sum_{s=1}^{t-2} lambda^(t-s-2) sum_j ||eps_{j,s}||.
inline DecompositionReport decomposition_check(const Trace& trace, const network::MixingConstants& mc,
                                                      double tol = 1e-9) {
  DecompositionReport rep;
  if (trace.rounds.empty()) return rep;
  const int T = trace.horizon();
  const double n = trace.n;
  double x1 = 0.0;
  for (const auto& x : trace.rounds.front().x) x1 += x.norm();

  // E[s] = sum_j ||eps_{j,s}||, read from round s+1.
  auto E = [&](int s) { return detail::row_sum(trace.rounds[static_cast<std::size_t>(s)].eps_norm); };
  double tail = 0.0;  // sum_{s=1}^{t-2} lambda^(t-2-s) E[s]
  double lam_pow = 1.0 / mc.lambda;
  for (int t = 1; t <= T; ++t) {
    if (t >= 3) tail = mc.lambda * tail + E(t - 2);
    const auto& rec = trace.rounds[static_cast<std::size_t>(t - 1)];
    Vector mean = Vector::Zero(trace.d);
    for (const auto& x : rec.x) mean += x;
    mean /= n;
    const double e_prev = detail::row_sum(rec.eps_norm);
    for (int i = 0; i < trace.n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const double lhs = (rec.x[ui] - mean).norm();
      const double rhs = mc.gamma * lam_pow * x1 + e_prev / n + rec.eps_norm[ui] + mc.gamma * tail;
      const double slack = rhs - lhs;
      if (slack < rep.min_slack) {
        rep.min_slack = slack;
        rep.worst_agent = i;
        rep.worst_round = t;
      }
      if (lhs > rhs + tol) rep.pass = false;
    }
    lam_pow *= mc.lambda;
  }
  return rep;
}

}  // namespace dffr::bounds
