#pragma once

#include <cstdint>
#include <vector>

#include "pgal/fields.hpp"

namespace pgal {

/// Smooth random fields on a manifold, evaluated in chart jets at grid nodes.
/// Scalars are combinations of low eigenmodes; vector fields combine smooth frame fields
/// (coordinate fields on tori; Killing and gradient fields of ambient coordinates on S²).
class RandomFields {
 public:
  RandomFields(const ManifoldSpec& spec, std::uint64_t seed);

  ScalarSamples scalar(const QuadratureGrid& grid);
  VectorSamples vector(const QuadratureGrid& grid);
  TensorSamples tensor(const QuadratureGrid& grid);

  /// Coefficients of the last scalar() draw against enumerate_modes(spec, band).
  const std::vector<double>& last_scalar_coefficients() const { return last_; }
  int band() const { return band_; }

 private:
  std::vector<double> draw(int count);
  Jet2 scalar_at(const std::vector<double>& c, const ChartPoint<Jet2>& x) const;
  JetVector vector_at(const std::vector<double>& c, const ChartPoint<Jet2>& x) const;

  ManifoldSpec spec_;
  std::vector<ModeLabel> modes_;
  int band_ = 0;
  std::uint64_t state_;
  std::vector<double> last_;
};

struct IdentityResiduals {
  double integration_by_parts = 0.0;
  double trace_identity = 0.0;
  double laplace_reduction = 0.0;
  double stokes = 0.0;
  double transpose_symmetry = 0.0;
};

/// Runs `trials` random (f, A, test function) triples and returns the worst residual of each kind.
IdentityResiduals run_identity_suite(const ManifoldSpec& spec, std::array<int, 2> resolution, int trials,
                                     std::uint64_t seed);

/// (Aᵀ)^i_j = g^ik A^l_k g_lj.
TensorSamples transpose(const QuadratureGrid& grid, const TensorSamples& a);

}  // namespace pgal
