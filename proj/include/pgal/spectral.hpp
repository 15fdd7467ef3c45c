#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pgal/fields.hpp"
#include "pgal/geometry.hpp"

namespace pgal {

/// Coefficients of a function against an EigenBasis.
struct SpectralVector {
  Eigen::VectorXd coeffs;
  std::uint64_t basis_id = 0;

  Eigen::Index size() const { return coeffs.size(); }
};

/// u and its derivatives at the grid nodes, from spectral synthesis.
struct Synthesis {
  Eigen::VectorXd value;
  /// ∂_i u
  std::array<Eigen::VectorXd, 2> partial;
  /// ∂_i∂_j u for (0,0), (0,1), (1,1)
  std::array<Eigen::VectorXd, 3> second;
  /// (∇u)^i
  std::array<Eigen::VectorXd, 2> gradient;
  /// H̃^a_b of u
  std::array<std::array<Eigen::VectorXd, 2>, 2> hessian;
  bool has_derivatives = false;

  /// Chart jets of u at every node (order 2 if derivatives were synthesized, else 0).
  ScalarSamples jets() const;
};

/// α_k = ⟨samples, e_k⟩_quad for k < n (n < 0 means the full basis).
SpectralVector project(const QuadratureGrid& grid, const EigenBasis& basis, std::span<const double> samples,
                       int n = -1);

Synthesis synthesize(const EigenBasis& basis, const SpectralVector& v, bool with_derivatives);
Synthesis synthesize(const EigenBasis& basis, const Eigen::VectorXd& alpha, bool with_derivatives);

/// Coefficient-wise multiplication by λ_k^s.
SpectralVector apply_lambda_s(const EigenBasis& basis, const SpectralVector& v, double s);

/// (Σ λ_k^{2s} α_k²)^{1/2}
double sobolev_norm(const EigenBasis& basis, const SpectralVector& v, double s);
double sobolev_norm(const EigenBasis& basis, const Eigen::VectorXd& alpha, double s);

/// ⟨v, w⟩_s = Σ λ_k^{2s} v_k w_k
double sobolev_inner(const EigenBasis& basis, const SpectralVector& v, const SpectralVector& w, double s);

/// (Σ λ_k^{-2} ⟨F, e_k⟩²)^{1/2}
double hminus1_norm_of_functional(const EigenBasis& basis, const Eigen::VectorXd& pairings);

SpectralVector unit_vector(const EigenBasis& basis, int k);
SpectralVector zero_vector(const EigenBasis& basis);

}  // namespace pgal
