#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "pgal/fields.hpp"
#include "pgal/geometry.hpp"
#include "pgal/jet.hpp"

namespace pgal {

/// Flux (contravariant) and diffusion ([i][j] = A^i_j) at one point and one λ.
template <class S>
struct Coefficients {
  std::array<S, 2> flux{};
  ChartMatrix<S> diffusion{};
};

struct LambdaRange {
  double lo = -2.0;
  double hi = 3.0;
};

struct ModelInfo {
  std::string name;
  std::map<std::string, double> parameters;
  bool is_linear_diffusion = false;
  /// Declared lower bound for the smallest eigenvalue of sym(gA′).
  double parabolicity_c = 0.0;
  /// Declared C̄ in |f| + |A| + |λA′| + |Div A| ≤ C̄(1 + |λ|).
  double growth_C = 0.0;
  /// Declared sup of |A′| over all λ, used for step-size guards.
  double derivative_bound = 0.0;
  LambdaRange lambda_range;
};

/// Scalar noise amplitude Φ(x, λ).
class NoiseModel {
 public:
  virtual ~NoiseModel() = default;
  virtual double phi(const Point& x, double lambda) const = 0;
  virtual double phi_dlambda(const Point& x, double lambda) const = 0;
  virtual std::string name() const = 0;
  virtual double sigma() const = 0;
};

class CoefficientModel {
 public:
  explicit CoefficientModel(ManifoldSpec spec) : spec_(spec) {}
  virtual ~CoefficientModel() = default;

  virtual Coefficients<double> evaluate(const ChartPoint<double>& x, double lambda) const = 0;
  virtual Coefficients<Jet1> evaluate(const ChartPoint<Jet1>& x, const Jet1& lambda) const = 0;
  virtual Coefficients<Jet2> evaluate(const ChartPoint<Jet2>& x, const Jet2& lambda) const = 0;

  const ModelInfo& info() const { return info_; }
  ModelInfo& info() { return info_; }
  const ManifoldSpec& spec() const { return spec_; }

  /// A, A′, A″ and f, f′ at a point via a λ-jet.
  Coefficients<Jet1> lambda_jet(const Point& x, double lambda) const;

 protected:
  ManifoldSpec spec_;
  ModelInfo info_;
};

/// Routes the three virtual overloads to a single `compute<S>` template in Derived.
template <class Derived>
class ModelBase : public CoefficientModel {
 public:
  using CoefficientModel::CoefficientModel;
  Coefficients<double> evaluate(const ChartPoint<double>& x, double lambda) const override {
    return self().template compute<double>(x, lambda);
  }
  Coefficients<Jet1> evaluate(const ChartPoint<Jet1>& x, const Jet1& lambda) const override {
    return self().template compute<Jet1>(x, lambda);
  }
  Coefficients<Jet2> evaluate(const ChartPoint<Jet2>& x, const Jet2& lambda) const override {
    return self().template compute<Jet2>(x, lambda);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

using ModelPtr = std::shared_ptr<const CoefficientModel>;
using NoisePtr = std::shared_ptr<const NoiseModel>;
using Parameters = std::map<std::string, double>;

/// Registry: "heat", "aniso_linear", "bounded_nonlinear", "burgers", "compat_pair".
/// Unknown names or parameter keys raise ConfigError.
ModelPtr make_model(const std::string& name, const ManifoldSpec& spec, const Parameters& params = {},
                    std::optional<LambdaRange> range = std::nullopt);

std::vector<std::string> model_names();

/// "additive_mode" (σ·e_1) or "multiplicative_bounded" (σλψ(x) with a compact λ-cutoff).
NoisePtr make_noise(const std::string& name, const ManifoldSpec& spec, double sigma);
std::vector<std::string> noise_names();

/// Smooth truncation χ: identity on [0,1], constant −½ below −1 and 3/2 above 2.
template <class S>
S chi(const S& lambda);
double chi_derivative(double lambda);

/// f̃(λ) = f(χ(λ)), Ã(λ) = A(χ(λ)).
ModelPtr truncate(const ModelPtr& base);

// -- standard form ------------------------------------------------------------------

/// Diffusion density a_x(λ) of the standard form Div(a_x(u)∇u), as (1,1) components.
class DiffusionDensity {
 public:
  virtual ~DiffusionDensity() = default;
  virtual ChartMatrix<double> evaluate(const ChartPoint<double>& x, double z) const = 0;
  virtual ChartMatrix<Jet1> evaluate(const ChartPoint<Jet1>& x, const Jet1& z) const = 0;
  virtual ChartMatrix<Jet2> evaluate(const ChartPoint<Jet2>& x, const Jet2& z) const = 0;
};

/// Built-in densities: "identity" (δ), "arctan" ((1+λ²)⁻¹δ), "zero".
std::shared_ptr<const DiffusionDensity> make_density(const std::string& name, const ManifoldSpec& spec);

/// Model with A(x,λ) = ∫₀^λ a(x,z) dz and flux f^i = g^ij (Div A(·,λ))_j, so that
/// DivDiv A(u) − Div f(u) = Div(a(u)∇u). The flux is NaN under Jet2 evaluation and its
/// second λ-derivative is NaN under Jet1 evaluation.
ModelPtr from_standard_form(std::shared_ptr<const DiffusionDensity> a, const ManifoldSpec& spec,
                            double tolerance = 1e-10);

/// Adaptive Simpson for vector-valued integrands; QuadratureFailure past depth 40.
std::vector<double> adaptive_simpson(const std::function<std::vector<double>(double)>& f, double a,
                                     double b, double tolerance);

// -- sampling along a solution --------------------------------------------------------

/// Coefficients at every node with λ = u(node); u carries chart jets of the solution.
struct ModelSamples {
  VectorSamples flux;
  TensorSamples diffusion;
};
ModelSamples sample_along(const CoefficientModel& model, const QuadratureGrid& grid,
                          const ScalarSamples& u);

/// Coefficients at every node with λ frozen to a constant.
ModelSamples sample_frozen(const CoefficientModel& model, const QuadratureGrid& grid, double lambda);

// -- template definitions -------------------------------------------------------------

namespace detail {
inline double smooth_integral(double s) {
  // ∫₀^s of the quintic smoothstep
  const double s2 = s * s, s4 = s2 * s2;
  return s4 * s2 - 3.0 * s4 * s + 2.5 * s4;
}
template <int N>
Jet<N> smooth_integral(const Jet<N>& s) {
  const double v = s.v;
  const double f1 = 6 * std::pow(v, 5) - 15 * std::pow(v, 4) + 10 * std::pow(v, 3);
  const double f2 = 30 * std::pow(v, 4) - 60 * std::pow(v, 3) + 30 * v * v;
  return s.chain(smooth_integral(v), f1, f2);
}
}  // namespace detail

template <class S>
S chi(const S& lambda) {
  const double v = value_of(lambda);
  if (v >= 0.0 && v <= 1.0) return lambda;
  if (v <= -1.0) return S(-0.5);
  if (v >= 2.0) return S(1.5);
  if (v < 0.0) return detail::smooth_integral(lambda + 1.0) - 0.5;
  return 1.5 - detail::smooth_integral(2.0 - lambda);
}

}  // namespace pgal
