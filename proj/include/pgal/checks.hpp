#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgal/model.hpp"

namespace pgal {

struct ParabolicityReport {
  double min_eigenvalue = 0.0;
  double c = 0.0;
  /// max |g(A′ξ,η) − g(A′η,ξ)| over unit coordinate pairs.
  double symmetry_residual = 0.0;
  bool pass = false;
};

struct GrowthReport {
  double empirical_C = 0.0;
  double declared_C = 0.0;
  /// sup N at the outermost probe divided by sup N at half that λ.
  double outer_doubling_ratio = 0.0;
  std::vector<double> probed_lambdas;
  bool pass = false;
};

struct CompatReport {
  double max_residual = 0.0;
  double worst_lambda = 0.0;
  bool pass = false;
};

/// Evenly spaced λ samples over the model's declared range.
std::vector<double> default_lambda_samples(const ModelInfo& info, int count = 11);

/// Smallest eigenvalue of sym(gA′) relative to g over nodes × λ samples.
ParabolicityReport check_parabolicity(const CoefficientModel& model, const QuadratureGrid& grid,
                                      std::span<const double> lambdas);

/// |f| + |A| + |λA′| + |Div A| ≤ C̄(1+|λ|). Besides the given samples, probes ±R·2^k
/// (k = 1..4, R = largest |λ| sample) so that superlinear growth is caught.
GrowthReport check_growth(const CoefficientModel& model, const QuadratureGrid& grid,
                          std::span<const double> lambdas);

/// max over λ of ‖Div f(·,λ) − DivDiv A(·,λ)‖_{L²}.
CompatReport check_geometry_compat(const CoefficientModel& model, const QuadratureGrid& grid,
                                   std::span<const double> lambdas, double tolerance = 1e-8);

/// Div f(·,λ) − DivDiv A(·,λ) at every node for frozen λ.
std::vector<double> compat_defect(const CoefficientModel& model, const QuadratureGrid& grid, double lambda);

}  // namespace pgal
