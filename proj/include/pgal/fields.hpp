#pragma once

#include <array>
#include <vector>

#include "pgal/geometry.hpp"
#include "pgal/jet.hpp"

namespace pgal {

using JetVector = std::array<Jet2, 2>;
using JetTensor = ChartMatrix<Jet2>;

/// Field samples at grid nodes. Each entry is a chart jet; `order` says how many
/// of its derivative levels are trustworthy (0 = values only).
template <class T>
struct FieldSamples {
  std::vector<T> at;
  int order = 0;
};

using ScalarSamples = FieldSamples<Jet2>;
/// Contravariant components X^i.
using VectorSamples = FieldSamples<JetVector>;
/// Covariant components ω_i.
using OneFormSamples = FieldSamples<JetVector>;
/// (1,1) components stored as [i][j] = T^i_j.
using TensorSamples = FieldSamples<JetTensor>;

/// Γ with its first chart partials packed into jets (Hessian part unused).
using ChristoffelJets = std::array<std::array<std::array<Jet2, 2>, 2>, 2>;

ChristoffelJets christoffel_jets(const Christoffel& gamma, const ChristoffelDerivative& dgamma);
ChristoffelJets christoffel_jets(const ManifoldSpec& spec, const Point& x);

/// Inverse metric at a point with exact first and second partials.
JetTensor inverse_metric_jets(const ManifoldSpec& spec, const Point& x);
JetTensor metric_jets(const ManifoldSpec& spec, const Point& x);

// Pointwise formulas. Results are exact to one derivative order less than the input.
Jet2 div_vector_at(const ChristoffelJets& gamma, const JetVector& x);
Jet2 div_oneform_at(const JetTensor& ginv, const ChristoffelJets& gamma, const JetVector& w);
JetVector div_tensor_at(const ChristoffelJets& gamma, const JetTensor& t);

/// Div X = ∂_k X^k + Γ^j_kj X^k.
ScalarSamples div_vector(const QuadratureGrid& grid, const VectorSamples& x);
/// Div ω = g^ij ∂_i ω_j − Γ^k_il g^il ω_k.
ScalarSamples div_oneform(const QuadratureGrid& grid, const OneFormSamples& w);
/// (Div T)_i = ∂_j T^j_i + Γ^j_jl T^l_i − Γ^l_ji T^j_l.
OneFormSamples div_tensor(const QuadratureGrid& grid, const TensorSamples& t);
/// Div(Div T); needs second-order samples.
ScalarSamples div_div(const QuadratureGrid& grid, const TensorSamples& t);

/// Chart-jet seeds of the node coordinates.
ChartPoint<Jet2> node_jets(const Point& p);

/// g-norms at a node: |X|² = g_ij X^i X^j, |ω|² = g^ij ω_i ω_j, |A|² = tr(Aᵀ g A g⁻¹).
double vector_norm(const Mat2& g, const std::array<double, 2>& x);
double oneform_norm(const Mat2& ginv, const std::array<double, 2>& w);
double tensor_norm(const Mat2& g, const Mat2& ginv, const Mat2& a);

Mat2 to_mat(const ChartMatrix<double>& a);
Mat2 values_of(const JetTensor& a);
std::array<double, 2> values_of(const JetVector& x);

/// Values of a scalar sample set.
std::vector<double> values_of(const ScalarSamples& s);

}  // namespace pgal
