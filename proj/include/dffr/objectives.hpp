#pragma once

// Time-varying per-agent convex losses f_i^t.
//
// Agents are indexed 0..n-1 and rounds 1..horizon. Streams are pure
// functions of (i, t, x); the order in which losses are revealed is the
// round engine's business.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dffr/error.hpp"
#include "dffr/geometry.hpp"
#include "dffr/vector.hpp"

namespace dffr::objectives {

using geometry::BoxSet;

/// Gradient-norm bound L, smoothness L_s and value bound L_1 over a set.
struct StreamConstants {
  double L = 0.0;
  double Ls = 0.0;
  double L1 = 0.0;
};

class ObjectiveStream {
 public:
  ObjectiveStream(int agents, int dim, int horizon) : n_(agents), d_(dim), horizon_(horizon) {
    if (agents < 1 || dim < 1 || horizon < 1)
      throw Error(ErrorCode::InvalidArgument, "stream needs n, d, horizon >= 1");
  }
  virtual ~ObjectiveStream() = default;

  int agents() const noexcept { return n_; }
  int dim() const noexcept { return d_; }
  int horizon() const noexcept { return horizon_; }

  /// Raw evaluators. No membership check; see evaluate()/gradient() below.
  virtual double value(int i, int t, const Vector& x) const = 0;
  virtual Vector grad(int i, int t, const Vector& x) const = 0;

  virtual StreamConstants constants(const BoxSet& set, int horizon) const = 0;

  /// argmin over `set` of the network loss, if known in closed form.
  virtual std::optional<Vector> closed_form_minimizer(int /*t*/, const BoxSet& /*set*/) const { return std::nullopt; }

  /// argmin over alpha in [0,1] of f_i^t(z + alpha h), if known in closed form.
  virtual std::optional<double> closed_form_line_search(int /*i*/, int /*t*/, const Vector& /*z*/,
                                                        const Vector& /*h*/) const {
    return std::nullopt;
  }

  /// Network loss f_t(x) = (1/n) sum_i f_i^t(x).
  double global_value(int t, const Vector& x) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += value(i, t, x);
    return s / n_;
  }

  Vector global_grad(int t, const Vector& x) const {
    Vector g = Vector::Zero(d_);
    for (int i = 0; i < n_; ++i) g += grad(i, t, x);
    return g / n_;
  }

  void check_index(int i, int t) const {
    if (i < 0 || i >= n_) throw Error(ErrorCode::IndexOutOfRange, "agent index " + std::to_string(i));
    if (t < 1 || t > horizon_) throw Error(ErrorCode::IndexOutOfRange, "round " + std::to_string(t));
  }

 private:
  int n_;
  int d_;
  int horizon_;
};

/// f_i^t(x) = ||a_i x - c(t) 1||^2 with c(t) = amplitude / t^power.
class QuadraticTrackingStream final : public ObjectiveStream {
 public:
  QuadraticTrackingStream(std::vector<double> scales, double amplitude, double power, int dim, int horizon)
      : ObjectiveStream(static_cast<int>(scales.size()), dim, horizon),
        a_(std::move(scales)),
        amplitude_(amplitude),
        power_(power) {
    for (double a : a_)
      if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "scales must be positive");
    if (!std::isfinite(amplitude) || !(power >= 0.0))
      throw Error(ErrorCode::InvalidArgument, "target path needs finite amplitude and power >= 0");
    for (double a : a_) {
      sum_a_ += a;
      sum_a2_ += a * a;
    }
  }

  const std::vector<double>& scales() const noexcept { return a_; }
  double amplitude() const noexcept { return amplitude_; }
  double power() const noexcept { return power_; }

  double target(int t) const { return amplitude_ / std::pow(static_cast<double>(t), power_); }

  double value(int i, int t, const Vector& x) const override {
    const double a = a_[static_cast<std::size_t>(i)];
    return (a * x.array() - target(t)).square().sum();
  }

  Vector grad(int i, int t, const Vector& x) const override {
    const double a = a_[static_cast<std::size_t>(i)];
    return (2.0 * a * (a * x.array() - target(t))).matrix();
  }

  // c(t) is monotone in t, and |a x - c| is convex in both x and c, so the
  // extremes over the box and t in [1, horizon] sit at box corners and at
  // t = 1 or t = horizon. Coordinates are maximized independently, which is
  // exact for d = 1 and an upper bound otherwise.
  StreamConstants constants(const BoxSet& set, int horizon) const override {
    const double c_hi = target(1);
    const double c_lo = target(std::max(1, horizon));
    StreamConstants k;
    for (double a : a_) {
      double sq = 0.0;
      for (int j = 0; j < set.dim(); ++j) {
        double worst = 0.0;
        for (double xb : {set.lower()[j], set.upper()[j]})
          for (double c : {c_lo, c_hi}) worst = std::max(worst, std::abs(a * xb - c));
        sq += worst * worst;
      }
      k.L = std::max(k.L, 2.0 * a * std::sqrt(sq));
      k.L1 = std::max(k.L1, sq);
      k.Ls = std::max(k.Ls, 2.0 * a * a);
    }
    return k;
  }

  /// The network loss separates by coordinate; each coordinate's minimizer
  /// is (sum a_i) c / (sum a_i^2), clamped to the box.
  std::optional<Vector> closed_form_minimizer(int t, const BoxSet& set) const override {
    const double xhat = sum_a_ * target(t) / sum_a2_;
    return geometry::project(set, Vector::Constant(dim(), xhat));
  }

  std::optional<double> closed_form_line_search(int i, int t, const Vector& z, const Vector& h) const override {
    const double a = a_[static_cast<std::size_t>(i)];
    const double hh = h.squaredNorm();
    if (hh == 0.0) return 0.0;
    const double slope = (a * z.array() - target(t)).matrix().dot(h);
    return std::clamp(-slope / (a * hh), 0.0, 1.0);
  }

 private:
  std::vector<double> a_;
  double amplitude_;
  double power_;
  double sum_a_ = 0.0;
  double sum_a2_ = 0.0;
};

/// Four agents, d = 1, X = [-10, 10], scales (1, 2, 3, 6), target 60 / t^2.
inline std::shared_ptr<QuadraticTrackingStream> paper_tracking_stream(int horizon = 1001) {
  return std::make_shared<QuadraticTrackingStream>(std::vector<double>{1.0, 2.0, 3.0, 6.0}, 60.0, 2.0, 1, horizon);
}

inline BoxSet paper_tracking_set() { return BoxSet::cube(1, -10.0, 10.0); }

// -- plug-in streams ------------------------------------------------------------

/// Stream backed by callables; used for custom registrations.
class FunctionStream final : public ObjectiveStream {
 public:
  using ValueFn = std::function<double(int, int, const Vector&)>;
  using GradFn = std::function<Vector(int, int, const Vector&)>;
  using ConstantsFn = std::function<StreamConstants(const BoxSet&, int)>;

  FunctionStream(int agents, int dim, int horizon, ValueFn value, GradFn grad, ConstantsFn constants)
      : ObjectiveStream(agents, dim, horizon),
        value_(std::move(value)),
        grad_(std::move(grad)),
        constants_(std::move(constants)) {}

  double value(int i, int t, const Vector& x) const override { return value_(i, t, x); }
  Vector grad(int i, int t, const Vector& x) const override { return grad_(i, t, x); }
  StreamConstants constants(const BoxSet& set, int horizon) const override { return constants_(set, horizon); }

 private:
  ValueFn value_;
  GradFn grad_;
  ConstantsFn constants_;
};

using StreamParams = std::map<std::string, double>;
using StreamFactory =
    std::function<std::shared_ptr<ObjectiveStream>(const StreamParams&, int agents, int dim, int horizon)>;

namespace detail {

inline double param(const StreamParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline std::map<std::string, StreamFactory>& registry() {
  static std::map<std::string, StreamFactory> reg = [] {
    std::map<std::string, StreamFactory> r;
    // f_i^t(x) = value
    r["constant"] = [](const StreamParams& p, int n, int d, int T) -> std::shared_ptr<ObjectiveStream> {
      const double c = param(p, "value", 0.0);
      return std::make_shared<FunctionStream>(
          n, d, T, [c](int, int, const Vector&) { return c; },
          [d](int, int, const Vector&) { return Vector(Vector::Zero(d)); },
          [c](const BoxSet&, int) { return StreamConstants{0.0, 0.0, std::abs(c)}; });
    };
    // f_i^t(x) = slope * sum_k x_k + offset
    r["linear"] = [](const StreamParams& p, int n, int d, int T) -> std::shared_ptr<ObjectiveStream> {
      const double s = param(p, "slope", 1.0);
      const double b = param(p, "offset", 0.0);
      return std::make_shared<FunctionStream>(
          n, d, T, [s, b](int, int, const Vector& x) { return s * x.sum() + b; },
          [s, d](int, int, const Vector&) { return Vector(Vector::Constant(d, s)); },
          [s, b, d](const BoxSet& set, int) {
            const double reach = set.lower().cwiseAbs().cwiseMax(set.upper().cwiseAbs()).sum();
            return StreamConstants{std::abs(s) * std::sqrt(static_cast<double>(d)), 0.0, std::abs(s) * reach + std::abs(b)};
          });
    };
    return r;
  }();
  return reg;
}

}  // namespace detail

/// Registers a named stream kind for the "custom" config entry. Returns false
/// if the name was already taken.
inline bool register_stream(const std::string& name, StreamFactory factory) {
  return detail::registry().emplace(name, std::move(factory)).second;
}

inline std::shared_ptr<ObjectiveStream> make_custom_stream(const std::string& name, const StreamParams& params,
                                                           int agents, int dim, int horizon) {
  auto& reg = detail::registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw Error(ErrorCode::InvalidArgument, "no custom stream registered as '" + name + "'");
  return it->second(params, agents, dim, horizon);
}

inline bool has_custom_stream(const std::string& name) { return detail::registry().count(name) > 0; }

// -- checked evaluation --------------------------------------------------------

inline double evaluate(const ObjectiveStream& s, const BoxSet& set, int i, int t, const Vector& x) {
  s.check_index(i, t);
  if (!set.contains(x)) throw Error(ErrorCode::OutOfFeasibleSet, "evaluation point outside X");
  return s.value(i, t, x);
}

inline Vector gradient(const ObjectiveStream& s, const BoxSet& set, int i, int t, const Vector& x) {
  s.check_index(i, t);
  if (!set.contains(x)) throw Error(ErrorCode::OutOfFeasibleSet, "gradient point outside X");
  return s.grad(i, t, x);
}

// -- per-round optimum -----------------------------------------------------------

struct RoundOptimum {
  int t = 0;
  Vector x_star;
  double f_star = 0.0;
};

struct OracleOptions {
  /// Cross-check against the uniform-grid brute force.
  bool verify = false;
  /// Absolute grid pitch of the brute-force oracle.
  double grid_pitch = 1e-3;
  double tolerance = 1e-5;
  /// Refuse grids with more points than this.
  double max_grid_points = 2e7;
};

/// Golden-section minimization of a unimodal function on [lo, hi] down to an
/// interval of width `tol`.
template <class F>
double golden_section(F&& f, double lo, double hi, double tol = 1e-10) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  // Endpoints can beat the interior bracket when the minimizer is on the boundary.
  double best = 0.5 * (a + b);
  double fbest = f(best);
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe < fbest) {
      fbest = fe;
      best = e;
    }
  }
  return best;
}

namespace detail {

/// Projected gradient descent with backtracking on the network loss.
inline Vector projected_descent(const ObjectiveStream& s, int t, const BoxSet& set, double tol = 1e-10,
                                int max_iter = 200000) {
  Vector x = geometry::project(set, Vector::Zero(s.dim()));
  double fx = s.global_value(t, x);
  double step = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector g = s.global_grad(t, x);
    // Gradient mapping norm at unit step measures stationarity on the box.
    if ((x - geometry::project(set, x - g)).norm() <= tol) break;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector y = geometry::project(set, x - step * g);
      const double fy = s.global_value(t, y);
      if (fy <= fx - (0.5 / step) * (y - x).squaredNorm() + 1e-15 * std::abs(fx)) {
        moved = (y != x);
        x = y;
        fx = fy;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace detail

/// Exhaustive grid minimum of the network loss at round t.
inline RoundOptimum grid_optimum(const ObjectiveStream& s, int t, const BoxSet& set, double pitch,
                                 double max_points = 2e7) {
  const int d = set.dim();
  std::vector<long> counts(static_cast<std::size_t>(d));
  double total = 1.0;
  for (int k = 0; k < d; ++k) {
    counts[static_cast<std::size_t>(k)] =
        static_cast<long>(std::floor((set.upper()[k] - set.lower()[k]) / pitch + 1e-9)) + 1;
    total *= static_cast<double>(counts[static_cast<std::size_t>(k)] + 1);
  }
  if (total > max_points) throw Error(ErrorCode::InvalidArgument, "brute-force grid too large");
  std::vector<long> idx(static_cast<std::size_t>(d), 0);
  RoundOptimum best{t, Vector(), std::numeric_limits<double>::infinity()};
  Vector x(d);
  // Each axis gets its regular points plus the upper bound itself.
  while (true) {
    for (int k = 0; k < d; ++k) {
      const long ik = idx[static_cast<std::size_t>(k)];
      x[k] = ik == counts[static_cast<std::size_t>(k)] ? set.upper()[k]
                                                       : std::min(set.upper()[k], set.lower()[k] + ik * pitch);
    }
    const double f = s.global_value(t, x);
    if (f < best.f_star) {
      best.f_star = f;
      best.x_star = x;
    }
    int k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] > counts[static_cast<std::size_t>(k)]) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) break;
  }
  return best;
}

/// x_*^t in argmin over `set` of f_t. Closed form where the stream has one,
/// golden section for d = 1, projected gradient descent otherwise.
inline RoundOptimum round_optimum(const ObjectiveStream& s, int t, const BoxSet& set, const OracleOptions& opt = {}) {
  if (t < 1 || t > s.horizon()) throw Error(ErrorCode::IndexOutOfRange, "round " + std::to_string(t));
  if (set.dim() != s.dim()) throw Error(ErrorCode::DimensionMismatch, "set and stream dimensions differ");
  RoundOptimum out{t, Vector(), 0.0};
  if (auto cf = s.closed_form_minimizer(t, set)) {
    out.x_star = *cf;
  } else if (s.dim() == 1) {
    const double x = golden_section([&](double v) { return s.global_value(t, Vector::Constant(1, v)); },
                                    set.lower()[0], set.upper()[0]);
    out.x_star = Vector::Constant(1, x);
  } else {
    out.x_star = detail::projected_descent(s, t, set);
  }
  out.f_star = s.global_value(t, out.x_star);
  if (opt.verify) {
    const RoundOptimum grid = grid_optimum(s, t, set, opt.grid_pitch, opt.max_grid_points);
    if (std::abs(grid.f_star - out.f_star) > opt.tolerance)
      throw Error(ErrorCode::OracleDisagreement, "round " + std::to_string(t) + ": oracle f* " +
                                                     std::to_string(out.f_star) + " vs grid " +
                                                     std::to_string(grid.f_star));
  }
  return out;
}

inline RoundOptimum round_optimum(const ObjectiveStream& s, int t, const geometry::ShrunkSet& set,
                                  const OracleOptions& opt = {}) {
  return round_optimum(s, t, set.as_box(), opt);
}

// -- assumption audit ------------------------------------------------------------

struct AssumptionReport {
  /// Smallest f(y) - f(x) - <grad f(x), y - x>; convexity wants >= 0.
  double convexity_worst = std::numeric_limits<double>::infinity();
  /// Largest f(y) - f(x) - <grad f(x), y - x> - Ls/2 ||y - x||^2.
  double smoothness_worst = -std::numeric_limits<double>::infinity();
  /// Largest |f| - L1 and ||grad f|| - L.
  double value_bound_worst = -std::numeric_limits<double>::infinity();
  double gradient_bound_worst = -std::numeric_limits<double>::infinity();
  bool convex_ok = true;
  bool smooth_ok = true;
  bool value_bound_ok = true;
  bool gradient_bound_ok = true;
  std::size_t samples = 0;

  bool pass() const { return convex_ok && smooth_ok && value_bound_ok && gradient_bound_ok; }
};

/// Monte Carlo audit of convexity, smoothness and the L / L_1 bounds on
/// random (i, t, x, y). Every box vertex at t = 1 is probed as well.
/// Tolerances are 1e-9 relative to the magnitudes involved.
template <class Rng>
AssumptionReport verify_assumptions(const ObjectiveStream& s, const BoxSet& set, std::size_t sample_count, Rng& rng,
                                    const StreamConstants& k, int probe_horizon) {
  if (sample_count < 1) throw Error(ErrorCode::InvalidArgument, "sample_count must be >= 1");
  probe_horizon = std::clamp(probe_horizon, 1, s.horizon());
  AssumptionReport rep;
  std::uniform_int_distribution<int> agent(0, s.agents() - 1);
  std::uniform_int_distribution<int> round(1, probe_horizon);

  auto bounds = [&](int i, int t, const Vector& x) {
    const double fx = s.value(i, t, x);
    const double gx = s.grad(i, t, x).norm();
    const double vexcess = std::abs(fx) - k.L1;
    const double gexcess = gx - k.L;
    rep.value_bound_worst = std::max(rep.value_bound_worst, vexcess);
    rep.gradient_bound_worst = std::max(rep.gradient_bound_worst, gexcess);
    if (vexcess > 1e-9 * std::max(1.0, k.L1)) rep.value_bound_ok = false;
    if (gexcess > 1e-9 * std::max(1.0, k.L)) rep.gradient_bound_ok = false;
  };

  for (std::size_t n = 0; n < sample_count; ++n) {
    const int i = agent(rng);
    const int t = round(rng);
    const Vector x = geometry::sample_in_box(rng, set);
    const Vector y = geometry::sample_in_box(rng, set);
    const double fx = s.value(i, t, x);
    const double fy = s.value(i, t, y);
    const double lin = s.grad(i, t, x).dot(y - x);
    const double scale = 1e-9 * std::max({1.0, std::abs(fx), std::abs(fy)});
    const double conv = fy - fx - lin;
    const double smooth = conv - 0.5 * k.Ls * (y - x).squaredNorm();
    rep.convexity_worst = std::min(rep.convexity_worst, conv);
    rep.smoothness_worst = std::max(rep.smoothness_worst, smooth);
    if (conv < -scale) rep.convex_ok = false;
    if (smooth > scale) rep.smooth_ok = false;
    bounds(i, t, x);
    ++rep.samples;
  }
  if (set.dim() <= 10) {
    const std::uint32_t vertices = 1u << set.dim();
    for (int i = 0; i < s.agents(); ++i)
      for (std::uint32_t mask = 0; mask < vertices; ++mask) {
        Vector x(set.dim());
        for (int j = 0; j < set.dim(); ++j) x[j] = (mask >> j & 1u) ? set.upper()[j] : set.lower()[j];
        bounds(i, 1, x);
      }
  }
  return rep;
}

template <class Rng>
AssumptionReport verify_assumptions(const ObjectiveStream& s, const BoxSet& set, std::size_t sample_count, Rng& rng) {
  return verify_assumptions(s, set, sample_count, rng, s.constants(set, s.horizon()), s.horizon());
}

}  // namespace dffr::objectives
