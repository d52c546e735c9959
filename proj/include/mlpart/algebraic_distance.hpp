#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlpart/graph.hpp"
#include "mlpart/random.hpp"

namespace mlpart {

/// Lazy random-walk relaxation settings. Defaults: alpha 0.5, five test
/// vectors, twenty sweeps.
struct RelaxationParams {
  double alpha = 0.5;
  int num_vectors = 5;
  int num_iterations = 20;
  std::uint64_t rng_seed = 1;
};

class DegenerateVolume : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Couplings below this value are clamped before taking 1/rho.
inline constexpr double kRhoFloor = 1e-12;

/// Per-edge algebraic distances. Small rho means strongly coupled endpoints.
struct AlgebraicDistances {
  std::vector<double> rho;

  double operator[](EdgeId e) const { return rho[e]; }
  double clamped(EdgeId e) const { return std::max(rho[e], kRhoFloor); }
  /// Connection strength 1/rho of edge e.
  double strength(EdgeId e) const { return 1.0 / clamped(e); }
};

/// omega_ij / sqrt(c(i) c(j)) per edge.
inline std::vector<double> volume_normalized_weights(const Graph& g) {
  std::vector<double> result(g.m());
  for (EdgeId e = 0; e < g.m(); ++e) {
    const auto& edge = g.edge(e);
    const double cu = g.node_weight(edge.u);
    const double cv = g.node_weight(edge.v);
    if (!(cu > 0.0) || !(cv > 0.0)) {
      throw DegenerateVolume("zero-volume endpoint on edge {" + std::to_string(edge.u) + "," +
                             std::to_string(edge.v) + "}");
    }
    result[e] = edge.weight / std::sqrt(cu * cv);
  }
  return result;
}

/// One application of H = (1 - alpha) I + alpha D^-1 W on chi, with W the
/// normalized weights. Isolated nodes keep their value.
inline std::vector<double> jor_sweep(const Graph& g, std::span<const double> omega_tilde,
                                     std::span<const double> chi, double alpha) {
  std::vector<double> next(g.n());
  for (NodeId v = 0; v < g.n(); ++v) {
    auto nb = g.neighbors(v);
    auto ids = g.incident_edges(v);
    double degree = 0.0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      degree += omega_tilde[ids[i]];
      weighted += omega_tilde[ids[i]] * chi[nb[i]];
    }
    next[v] = degree > 0.0 ? (1.0 - alpha) * chi[v] + alpha * (weighted / degree) : chi[v];
  }
  return next;
}

/// Relaxes R random test vectors and assembles
/// rho_uv = sqrt(sum_r (chi_u - chi_v)^2) for every edge. Vector r is drawn
/// from its own stream seeded with rng_seed + r.
inline AlgebraicDistances algebraic_distances(const Graph& g, const RelaxationParams& params) {
  if (params.alpha < 0.0 || params.alpha > 1.0) {
    throw std::invalid_argument("relaxation alpha must lie in [0, 1]");
  }
  if (params.num_vectors < 1) throw std::invalid_argument("need at least one test vector");
  if (params.num_iterations < 0) throw std::invalid_argument("negative iteration count");

  const auto omega_tilde = volume_normalized_weights(g);
  std::vector<double> squared(g.m(), 0.0);
  std::vector<double> chi(g.n());
  for (int r = 0; r < params.num_vectors; ++r) {
    Rng rng(params.rng_seed + static_cast<std::uint64_t>(r));
    for (auto& x : chi) x = rng.uniform(-0.5, 0.5);
    for (int it = 0; it < params.num_iterations; ++it) chi = jor_sweep(g, omega_tilde, chi, params.alpha);
    for (EdgeId e = 0; e < g.m(); ++e) {
      const double d = chi[g.edge(e).u] - chi[g.edge(e).v];
      squared[e] += d * d;
    }
  }
  AlgebraicDistances result;
  result.rho.resize(g.m());
  std::transform(squared.begin(), squared.end(), result.rho.begin(),
                 [](double s) { return std::sqrt(s); });
  return result;
}

}  // namespace mlpart
