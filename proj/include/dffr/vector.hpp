#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dffr/error.hpp"

namespace dffr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One d-vector per agent.
using AgentVectors = std::vector<Vector>;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorCode::NonFiniteInput, what);
}

/// SplitMix64 finalizer. Used to derive independent per-agent RNG seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for agent `agent` given a master seed: mix64(seed ^ agent).
constexpr std::uint64_t agent_seed(std::uint64_t master, std::uint64_t agent) {
  return mix64(master ^ agent);
}

}  // namespace dffr
