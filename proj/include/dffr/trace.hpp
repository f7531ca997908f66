#pragma once

#include <string>
#include <vector>

#include "dffr/vector.hpp"

namespace dffr {

enum class AlgorithmKind { GradientFree, ProjectionFree, ProjectedGD, Scripted };

inline std::string to_string(AlgorithmKind k) {
  switch (k) {
    case AlgorithmKind::GradientFree: return "gradient_free";
    case AlgorithmKind::ProjectionFree: return "projection_free";
    case AlgorithmKind::ProjectedGD: return "projected_gd";
    case AlgorithmKind::Scripted: return "scripted";
  }
  return "unknown";
}

/// Everything observed in round t, before that round's update is applied.
struct RoundRecord {
  int t = 0;
  AgentVectors x;                   // decisions x_i^t
  AgentVectors z;                   // consensus iterates z_i^t (z_i^1 = x_i^1)
  std::vector<double> eps_norm;     // ||x_i^t - z_i^t||
  std::vector<double> local_loss;   // f_i^t(x_i^t)
  std::vector<double> global_loss;  // f_t(x_i^t)
  std::vector<double> aux;          // ||g_i^t|| (gradient-free) or alpha_i^t (projection-free)
  Vector x_star;
  double f_star = 0.0;
};

struct Trace {
  AlgorithmKind kind = AlgorithmKind::Scripted;
  int n = 0;
  int d = 0;
  std::vector<RoundRecord> rounds;
  /// ||x_i^{T+1} - z_i^{T+1}|| from the update that follows the last recorded
  /// round. Only the bound evaluators read it.
  std::vector<double> tail_eps;

  int horizon() const noexcept { return static_cast<int>(rounds.size()); }
};

}  // namespace dffr
