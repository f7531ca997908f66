#pragma once

// Round-synchronous update rules over a fixed network:
//
//  * gradient-free: two-point sphere estimator, gossip, step, projection onto
//    the shrunk set;
//  * projection-free: linear minimization oracle, gossip, line search along
//    v_i^t - x_i^t applied from z_i^{t+1};
//  * projected gradient descent baseline.
//
// Every agent in a round reads only the previous round's states and its own
// RNG stream.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dffr/error.hpp"
#include "dffr/geometry.hpp"
#include "dffr/network.hpp"
#include "dffr/objectives.hpp"
#include "dffr/trace.hpp"
#include "dffr/vector.hpp"

namespace dffr::algorithms {

using geometry::BoxSet;
using geometry::ShrunkSet;
using network::WeightMatrix;
using objectives::ObjectiveStream;

using Rng = std::mt19937_64;

struct AgentState {
  Vector x;
  Vector z;
  double eps_norm = 0.0;
};

using States = std::vector<AgentState>;

/// alpha_t = scale / t^power. power = 0 is a constant step.
struct StepSchedule {
  double scale = 1.0;
  double power = 0.5;

  double at(int t) const { return scale / std::pow(static_cast<double>(t), power); }
  bool constant() const noexcept { return power == 0.0; }
  bool operator==(const StepSchedule&) const = default;
};

enum class LineSearch { Exact1D, FixedAlpha0 };

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::ProjectedGD;
  StepSchedule schedule{2.0, 0.5};
  double delta = 0.01;
  LineSearch line_search = LineSearch::Exact1D;
  double alpha0 = 0.002;
  bool clamp_to_x = false;
  std::uint64_t seed = 0;

  bool operator==(const AlgorithmConfig&) const = default;
};

/// Checks the config against a feasible box. Throws ConstraintViolation.
inline void validate(const AlgorithmConfig& cfg, const BoxSet& set) {
  if (cfg.kind == AlgorithmKind::Scripted) throw Error(ErrorCode::ConstraintViolation, "scripted runs have no update rule");
  if (cfg.kind != AlgorithmKind::ProjectionFree) {
    if (!(cfg.schedule.scale > 0.0) || !std::isfinite(cfg.schedule.scale))
      throw Error(ErrorCode::ConstraintViolation, "step size must be positive");
    if (!(cfg.schedule.power >= 0.0))
      throw Error(ErrorCode::ConstraintViolation, "step schedule must be non-increasing (power >= 0)");
  }
  if (cfg.kind == AlgorithmKind::GradientFree) {
    const double r = set.inradius();
    if (!(cfg.delta > 0.0 && cfg.delta < r)) throw Error(ErrorCode::ConstraintViolation, "delta must lie in (0, r)");
  }
  if (cfg.kind == AlgorithmKind::ProjectionFree && cfg.line_search == LineSearch::FixedAlpha0 &&
      !(cfg.alpha0 > 0.0 && cfg.alpha0 < 1.0))
    throw Error(ErrorCode::ConstraintViolation, "alpha0 must lie in (0, 1)");
}

inline std::vector<Rng> make_agent_rngs(std::uint64_t seed, int n) {
  std::vector<Rng> rngs;
  rngs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rngs.emplace_back(agent_seed(seed, static_cast<std::uint64_t>(i)));
  return rngs;
}

namespace detail {

inline AgentVectors decisions(const States& states) {
  AgentVectors x;
  x.reserve(states.size());
  for (const auto& s : states) x.push_back(s.x);
  return x;
}

inline void check_sizes(const States& states, const ObjectiveStream& stream, const WeightMatrix& wm) {
  if (static_cast<int>(states.size()) != wm.n() || wm.n() != stream.agents())
    throw Error(ErrorCode::DimensionMismatch, "agent count differs across states, network and stream");
}

}  // namespace detail

// -- gradient-free ------------------------------------------------------------------

struct Alg1Step {
  States next;
  AgentVectors g;
  AgentVectors u;
};

/// One gradient-free round. Queries only loss values.
inline Alg1Step alg1_step(const States& states, const ObjectiveStream& stream, const WeightMatrix& wm,
                          const ShrunkSet& shrunk, int t, double alpha_t, std::vector<Rng>& rngs) {
  detail::check_sizes(states, stream, wm);
  if (rngs.size() != states.size()) throw Error(ErrorCode::DimensionMismatch, "need one RNG stream per agent");
  const int n = wm.n();
  const int d = stream.dim();
  const double delta = shrunk.delta();
  const AgentVectors z = network::gossip_average(wm, detail::decisions(states));

  Alg1Step out;
  out.next.resize(static_cast<std::size_t>(n));
  out.g.resize(static_cast<std::size_t>(n));
  out.u.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vector& x = states[ui].x;
    Vector u = geometry::sample_unit_sphere(rngs[ui], d);
    const Vector probe = x + delta * u;
    if (!shrunk.base().contains(probe))
      throw Error(ErrorCode::EvaluationOutsideX, "perturbed query point left X at agent " + std::to_string(i));
    stream.check_index(i, t);
    const double diff = stream.value(i, t, probe) - stream.value(i, t, x);
    Vector g = (d / delta) * diff * u;
    Vector xn = geometry::project(shrunk, z[ui] - alpha_t * g);
    out.next[ui].eps_norm = (xn - z[ui]).norm();
    out.next[ui].x = std::move(xn);
    out.next[ui].z = z[ui];
    out.g[ui] = std::move(g);
    out.u[ui] = std::move(u);
  }
  return out;
}

struct SmoothedValue {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E_v[f_i^t(x + delta v)], v uniform in the unit ball.
template <class R>
SmoothedValue smoothed_value(const ObjectiveStream& stream, int i, int t, const Vector& x, double delta, R& rng,
                             std::size_t mc_samples) {
  if (mc_samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two Monte Carlo samples");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < mc_samples; ++k) {
    const double f = stream.value(i, t, x + delta * geometry::sample_unit_ball(rng, stream.dim()));
    const double dlt = f - mean;
    mean += dlt / static_cast<double>(k + 1);
    m2 += dlt * (f - mean);
  }
  const double var = m2 / static_cast<double>(mc_samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(mc_samples))};
}

// -- projection-free ------------------------------------------------------------------

struct Alg2Options {
  LineSearch line_search = LineSearch::Exact1D;
  double alpha0 = 0.002;
  bool clamp_to_x = false;
};

struct Alg2Step {
  States next;
  std::vector<double> alpha;
};

/// Step coefficient minimizing f_i^t(z + alpha h) over [0, 1].
inline double exact_line_search(const ObjectiveStream& stream, int i, int t, const Vector& z, const Vector& h) {
  if (auto cf = stream.closed_form_line_search(i, t, z, h)) return *cf;
  return objectives::golden_section([&](double a) { return stream.value(i, t, z + a * h); }, 0.0, 1.0, 1e-10);
}

/// One projection-free round. Without clamp_to_x the update is applied
/// verbatim, so a decision can leave X when z_i^{t+1} != x_i^t.
inline Alg2Step alg2_step(const States& states, const ObjectiveStream& stream, const WeightMatrix& wm,
                          const BoxSet& set, int t, const Alg2Options& opt) {
  detail::check_sizes(states, stream, wm);
  const int n = wm.n();
  const AgentVectors z = network::gossip_average(wm, detail::decisions(states));
  Alg2Step out;
  out.next.resize(static_cast<std::size_t>(n));
  out.alpha.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vector& x = states[ui].x;
    stream.check_index(i, t);
    const Vector v = geometry::lmo(set, stream.grad(i, t, x));
    const Vector h = v - x;
    const double alpha =
        opt.line_search == LineSearch::Exact1D ? exact_line_search(stream, i, t, z[ui], h) : opt.alpha0;
    Vector xn = z[ui] + alpha * h;
    if (opt.clamp_to_x) xn = geometry::project(set, xn);
    out.next[ui].eps_norm = (xn - z[ui]).norm();
    out.next[ui].x = std::move(xn);
    out.next[ui].z = z[ui];
    out.alpha[ui] = alpha;
  }
  return out;
}

// -- projected gradient baseline ---------------------------------------------------------

inline States dogd_step(const States& states, const ObjectiveStream& stream, const WeightMatrix& wm, const BoxSet& set,
                        int t, double alpha_t) {
  detail::check_sizes(states, stream, wm);
  const int n = wm.n();
  const AgentVectors z = network::gossip_average(wm, detail::decisions(states));
  States next(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vector g = objectives::gradient(stream, set, i, t, states[ui].x);
    next[ui].x = geometry::project(set, z[ui] - alpha_t * g);
    next[ui].z = z[ui];
    next[ui].eps_norm = (next[ui].x - z[ui]).norm();
  }
  return next;
}

// -- round engine ------------------------------------------------------------------------

struct StepOutcome {
  States next;
  std::vector<double> aux;
};

/// Advances every agent by one round under `cfg`.
inline StepOutcome advance(const States& states, const ObjectiveStream& stream, const WeightMatrix& wm,
                           const BoxSet& set, const std::optional<ShrunkSet>& shrunk, const AlgorithmConfig& cfg,
                           int t, std::vector<Rng>& rngs) {
  StepOutcome out;
  switch (cfg.kind) {
    case AlgorithmKind::GradientFree: {
      auto r = alg1_step(states, stream, wm, *shrunk, t, cfg.schedule.at(t), rngs);
      for (const auto& g : r.g) out.aux.push_back(g.norm());
      out.next = std::move(r.next);
      break;
    }
    case AlgorithmKind::ProjectionFree: {
      auto r = alg2_step(states, stream, wm, set, t, {cfg.line_search, cfg.alpha0, cfg.clamp_to_x});
      out.aux = std::move(r.alpha);
      out.next = std::move(r.next);
      break;
    }
    case AlgorithmKind::ProjectedGD: {
      out.next = dogd_step(states, stream, wm, set, t, cfg.schedule.at(t));
      out.aux.assign(states.size(), 0.0);
      break;
    }
    case AlgorithmKind::Scripted:
      throw Error(ErrorCode::InvalidArgument, "scripted traces are not simulated");
  }
  return out;
}

/// The set decisions must stay in: X_delta for gradient-free, X otherwise.
inline BoxSet decision_set(const AlgorithmConfig& cfg, const BoxSet& set) {
  if (cfg.kind == AlgorithmKind::GradientFree) return ShrunkSet(set, cfg.delta).as_box();
  return set;
}

/// Default initialization: every agent at the projection of 0 onto the decision set.
inline AgentVectors default_initial(const AlgorithmConfig& cfg, const BoxSet& set, int n) {
  const Vector x0 = geometry::project(decision_set(cfg, set), Vector::Zero(set.dim()));
  return AgentVectors(static_cast<std::size_t>(n), x0);
}

/// Runs rounds 1..T. Each round records the decisions and the revealed losses,
/// then applies the update. The update after round T is computed only to
/// fill Trace::tail_eps; its states are discarded.
inline Trace run(const ObjectiveStream& stream, const WeightMatrix& wm, const BoxSet& set, const AlgorithmConfig& cfg,
                 int T, std::optional<AgentVectors> initial = std::nullopt) {
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  if (stream.horizon() < T) throw Error(ErrorCode::InvalidArgument, "stream horizon shorter than run horizon");
  if (set.dim() != stream.dim()) throw Error(ErrorCode::DimensionMismatch, "set and stream dimensions differ");
  validate(cfg, set);
  const int n = wm.n();
  if (n != stream.agents()) throw Error(ErrorCode::DimensionMismatch, "network and stream agent counts differ");

  std::optional<ShrunkSet> shrunk;
  if (cfg.kind == AlgorithmKind::GradientFree) shrunk.emplace(set, cfg.delta);
  const BoxSet feasible = decision_set(cfg, set);

  AgentVectors init = initial ? std::move(*initial) : default_initial(cfg, set, n);
  if (static_cast<int>(init.size()) != n) throw Error(ErrorCode::DimensionMismatch, "one initial state per agent");
  States states(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (init[ui].size() != set.dim() || !feasible.contains(init[ui]))
      throw Error(ErrorCode::OutOfFeasibleSet, "initial state of agent " + std::to_string(i) + " not feasible");
    states[ui] = {init[ui], init[ui], 0.0};
  }

  auto rngs = make_agent_rngs(cfg.seed, n);
  Trace trace;
  trace.kind = cfg.kind;
  trace.n = n;
  trace.d = set.dim();
  trace.rounds.reserve(static_cast<std::size_t>(T));

  for (int t = 1; t <= T; ++t) {
    RoundRecord rec;
    rec.t = t;
    const auto opt = objectives::round_optimum(stream, t, set);
    rec.x_star = opt.x_star;
    rec.f_star = opt.f_star;
    for (int i = 0; i < n; ++i) {
      const auto& s = states[static_cast<std::size_t>(i)];
      rec.x.push_back(s.x);
      rec.z.push_back(s.z);
      rec.eps_norm.push_back(s.eps_norm);
      rec.local_loss.push_back(stream.value(i, t, s.x));
      rec.global_loss.push_back(stream.global_value(t, s.x));
    }
    StepOutcome step = advance(states, stream, wm, set, shrunk, cfg, t, rngs);
    rec.aux = std::move(step.aux);
    trace.rounds.push_back(std::move(rec));
    if (t < T) {
      states = std::move(step.next);
    } else {
      for (const auto& s : step.next) trace.tail_eps.push_back(s.eps_norm);
    }
  }
  return trace;
}

}  // namespace dffr::algorithms
