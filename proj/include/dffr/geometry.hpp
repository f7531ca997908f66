#pragma once

// Axis-aligned feasible boxes, their shrunk copies, Euclidean projection,
// the linear minimization oracle and uniform sphere/ball sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dffr/error.hpp"
#include "dffr/vector.hpp"

namespace dffr::geometry {

inline constexpr double kMembershipTol = 1e-9;

class BoxSet {
 public:
  BoxSet(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() < 1 || lower_.size() != upper_.size())
      throw Error(ErrorCode::InvalidSet, "box bounds must be non-empty and of equal dimension");
    if (!lower_.allFinite() || !upper_.allFinite()) throw Error(ErrorCode::InvalidSet, "box bounds must be finite");
    for (Eigen::Index k = 0; k < lower_.size(); ++k)
      if (!(lower_[k] < upper_[k])) throw Error(ErrorCode::InvalidSet, "box requires lower < upper in every coordinate");
  }

  /// Same interval [lo, hi] in each of d coordinates.
  static BoxSet cube(int d, double lo, double hi) {
    return BoxSet(Vector::Constant(d, lo), Vector::Constant(d, hi));
  }

  int dim() const noexcept { return static_cast<int>(lower_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }

  /// Norm of the farthest corner; equals both sup ||x|| and the circumradius.
  double norm_bound() const {
    return lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs()).norm();
  }
  double circumradius() const { return norm_bound(); }

  bool origin_interior() const { return (lower_.array() < 0.0).all() && (upper_.array() > 0.0).all(); }

  /// Largest rho with rho * unit ball inside the box. Requires the origin in
  /// the interior.
  double inradius() const {
    if (!origin_interior()) throw Error(ErrorCode::InvalidSet, "inradius requires the origin in the box interior");
    return lower_.cwiseAbs().cwiseMin(upper_.cwiseAbs()).minCoeff();
  }

  bool contains(const Vector& x, double tol = kMembershipTol) const {
    if (x.size() != lower_.size()) return false;
    return ((x - lower_).array() >= -tol).all() && ((upper_ - x).array() >= -tol).all();
  }

  /// Largest coordinate-wise excursion outside the box (0 when inside).
  double violation(const Vector& x) const {
    return std::max({0.0, (lower_ - x).maxCoeff(), (x - upper_).maxCoeff()});
  }

  bool operator==(const BoxSet& o) const { return lower_ == o.lower_ && upper_ == o.upper_; }

 private:
  Vector lower_;
  Vector upper_;
};

/// The base box scaled by factor = 1 - delta / r. Stored by its factor; the
/// scaled bounds are produced on demand.
class ShrunkSet {
 public:
  ShrunkSet(BoxSet base, double delta) : base_(std::move(base)), delta_(delta) {
    const double r = base_.inradius();
    if (!(delta > 0.0 && delta < r)) throw Error(ErrorCode::InvalidShrink, "delta must lie in (0, r)");
    factor_ = 1.0 - delta / r;
  }

  const BoxSet& base() const noexcept { return base_; }
  double delta() const noexcept { return delta_; }
  double factor() const noexcept { return factor_; }
  int dim() const noexcept { return base_.dim(); }

  BoxSet as_box() const { return BoxSet(factor_ * base_.lower(), factor_ * base_.upper()); }
  bool contains(const Vector& x, double tol = kMembershipTol) const { return as_box().contains(x, tol); }

 private:
  BoxSet base_;
  double delta_;
  double factor_;
};

// -- projection --------------------------------------------------------------

inline Vector project(const BoxSet& set, const Vector& y) {
  if (y.size() != set.dim()) throw Error(ErrorCode::DimensionMismatch, "projection input has wrong dimension");
  require_finite(y, "projection input is not finite");
  return y.cwiseMax(set.lower()).cwiseMin(set.upper());
}

inline Vector project(const ShrunkSet& set, const Vector& y) { return project(set.as_box(), y); }

/// Slack of the projection inequality
///   2<x - z, m> <= ||z - nvec||^2 - ||z - x||^2 - ||x - nvec||^2,  x = P(nvec - m).
/// Non-negative for every z in the set.
template <class Set>
double lemma2_gap(const Set& set, const Vector& m, const Vector& nvec, const Vector& z) {
  if (!set.contains(z)) throw Error(ErrorCode::ZNotInSet, "comparison point z must lie in the set");
  const Vector x = project(set, nvec - m);
  return ((z - nvec).squaredNorm() - (z - x).squaredNorm() - (x - nvec).squaredNorm()) - 2.0 * (x - z).dot(m);
}

/// Vertex minimizing <g, v> over the box. Zero coordinates pick the lower bound.
inline Vector lmo(const BoxSet& set, const Vector& g) {
  if (g.size() != set.dim()) throw Error(ErrorCode::DimensionMismatch, "lmo input has wrong dimension");
  require_finite(g, "lmo input is not finite");
  Vector v(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) v[k] = g[k] < 0.0 ? set.upper()[k] : set.lower()[k];
  return v;
}

// -- sampling ------------------------------------------------------------------

/// Uniform on the unit sphere via a normalized isotropic Gaussian.
template <class Rng>
Vector sample_unit_sphere(Rng& rng, int d) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector u(d);
  double norm2 = 0.0;
  do {
    for (int k = 0; k < d; ++k) u[k] = gauss(rng);
    norm2 = u.squaredNorm();
  } while (norm2 == 0.0);
  return u / std::sqrt(norm2);
}

/// Uniform in the unit ball: a sphere sample scaled by U^(1/d).
template <class Rng>
Vector sample_unit_ball(Rng& rng, int d) {
  Vector u = sample_unit_sphere(rng, d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return u * std::pow(unif(rng), 1.0 / d);
}

template <class Rng>
Vector sample_in_box(Rng& rng, const BoxSet& set) {
  Vector x(set.dim());
  for (int k = 0; k < set.dim(); ++k) {
    std::uniform_real_distribution<double> unif(set.lower()[k], set.upper()[k]);
    x[k] = unif(rng);
  }
  return x;
}

struct ContainmentReport {
  bool pass = true;
  double worst_violation = 0.0;
  std::size_t checked = 0;
};

/// Checks x + delta * v in the base set for x in the shrunk set and v in the
/// unit ball. Besides `samples` random pairs, every shrunk-box vertex is paired
/// with the outward axis directions (the extreme case) when d <= 10.
template <class Rng>
ContainmentReport minkowski_containment_check(const ShrunkSet& shrunk, std::size_t samples, Rng& rng,
                                              double tol = 1e-12) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be >= 1");
  const BoxSet inner = shrunk.as_box();
  const BoxSet& outer = shrunk.base();
  const int d = shrunk.dim();
  ContainmentReport rep;
  auto probe = [&](const Vector& x, const Vector& v) {
    const double viol = outer.violation(x + shrunk.delta() * v);
    rep.worst_violation = std::max(rep.worst_violation, viol);
    ++rep.checked;
  };
  for (std::size_t s = 0; s < samples; ++s) probe(sample_in_box(rng, inner), sample_unit_ball(rng, d));
  if (d <= 10) {
    const std::uint32_t vertices = 1u << d;
    for (std::uint32_t mask = 0; mask < vertices; ++mask) {
      Vector x(d);
      for (int k = 0; k < d; ++k) x[k] = (mask >> k & 1u) ? inner.upper()[k] : inner.lower()[k];
      for (int k = 0; k < d; ++k) {
        Vector v = Vector::Zero(d);
        v[k] = (mask >> k & 1u) ? 1.0 : -1.0;
        probe(x, v);
      }
    }
  }
  rep.pass = rep.worst_violation <= tol;
  return rep;
}

}  // namespace dffr::geometry
