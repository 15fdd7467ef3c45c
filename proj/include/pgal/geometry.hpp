#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pgal/error.hpp"
#include "pgal/jet.hpp"

namespace pgal {

enum class ManifoldKind { Torus1, Torus2, Sphere2 };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& name);

/// One of the built-in compact manifolds. Chart coordinates are (x) on T¹,
/// (x, y) on T², and (θ, φ) on the unit sphere.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::Torus1;
  std::array<double, 2> periods{2.0 * std::numbers::pi, 2.0 * std::numbers::pi};

  static ManifoldSpec torus1(double period = 2.0 * std::numbers::pi);
  static ManifoldSpec torus2(double period_x = 2.0 * std::numbers::pi,
                             double period_y = 2.0 * std::numbers::pi);
  static ManifoldSpec sphere2();

  int dimension() const { return kind == ManifoldKind::Torus1 ? 1 : 2; }
  double analytic_volume() const;
};

using Point = std::array<double, 2>;
using Mat2 = Eigen::Matrix2d;

/// Γ^i_jk stored as [i][j][k].
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;
/// ∂_m Γ^i_jk stored as [m][i][j][k].
using ChristoffelDerivative = std::array<Christoffel, 2>;

template <class S>
using ChartPoint = std::array<S, 2>;
template <class S>
using ChartMatrix = std::array<std::array<S, 2>, 2>;

/// Metric components g_ij at a chart point, for any scalar type.
template <class S>
ChartMatrix<S> metric_at(const ManifoldSpec& spec, const ChartPoint<S>& x) {
  ChartMatrix<S> g{};
  g[0][0] = S(1.0);
  if (spec.kind == ManifoldKind::Torus2) {
    g[1][1] = S(1.0);
  } else if (spec.kind == ManifoldKind::Sphere2) {
    using std::sin;
    const S s = sin(x[0]);
    g[1][1] = s * s;
  }
  return g;
}

/// Inverse metric components g^ij at a chart point.
template <class S>
ChartMatrix<S> inverse_metric_at(const ManifoldSpec& spec, const ChartPoint<S>& x) {
  ChartMatrix<S> gi{};
  gi[0][0] = S(1.0);
  if (spec.kind == ManifoldKind::Torus2) {
    gi[1][1] = S(1.0);
  } else if (spec.kind == ManifoldKind::Sphere2) {
    using std::sin;
    const S s = sin(x[0]);
    gi[1][1] = S(1.0) / (s * s);
  }
  return gi;
}

/// Closed-form Γ and ∂Γ at a chart point.
void christoffel_at(const ManifoldSpec& spec, const Point& x, Christoffel& gamma,
                    ChristoffelDerivative& dgamma);

/// Chart geometry evaluated at quadrature nodes. Weights carry the √det g factor.
struct QuadratureGrid {
  ManifoldSpec spec;
  std::array<int, 2> resolution{0, 1};
  std::vector<Point> nodes;
  std::vector<double> weights;
  std::vector<Mat2> metric;
  std::vector<Mat2> inverse_metric;
  std::vector<Christoffel> christoffel;
  std::vector<ChristoffelDerivative> christoffel_derivative;

  std::size_t size() const { return nodes.size(); }
  int dimension() const { return spec.dimension(); }
};

/// Trapezoidal rule on tori, Gauss–Legendre in cos θ times uniform φ on S².
/// For T¹ only resolution[0] is used.
QuadratureGrid build_grid(const ManifoldSpec& spec, std::array<int, 2> resolution);

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

/// Σ weightᵢ · sampleᵢ.
double integrate(const QuadratureGrid& grid, std::span<const double> samples);

/// Integer label of a basis mode: (k, 0) on T¹, (kx, ky) on T², (l, m) on S².
/// Torus convention: k ≥ 0 selects cos(k·2πx/L) and k < 0 selects sin(|k|·2πx/L).
struct ModeLabel {
  int a = 0;
  int b = 0;
  auto operator<=>(const ModeLabel&) const = default;
};

/// Closed-form eigenfunction of −Δ with unit L² norm, for any scalar type.
template <class S>
S eval_mode(const ManifoldSpec& spec, ModeLabel label, const ChartPoint<S>& x);

double mode_eigenvalue(const ManifoldSpec& spec, ModeLabel label);

/// Laplace–Beltrami eigenpairs with tabulated values and derivatives at the grid nodes.
/// Tables are node-major (rows = nodes, columns = modes).
struct EigenBasis {
  int n = 0;
  int dim = 1;
  std::uint64_t id = 0;
  std::vector<double> mu;
  std::vector<double> lambda;
  std::vector<ModeLabel> labels;

  Eigen::MatrixXd value;
  /// ∂_i e_k (covariant components of de_k).
  std::array<Eigen::MatrixXd, 2> partial;
  /// ∂_i∂_j e_k for (i,j) = (0,0), (0,1), (1,1).
  std::array<Eigen::MatrixXd, 3> second;
  /// (∇e_k)^i = g^ij ∂_j e_k.
  std::array<Eigen::MatrixXd, 2> gradient;
  /// H̃^a_b = ∇^a∇_b e_k stored as hessian[a][b].
  std::array<std::array<Eigen::MatrixXd, 2>, 2> hessian;

  /// Value, first and second chart partials of e_k at a node.
  Jet2 jet(std::size_t node, int k) const;
};

EigenBasis build_basis(const ManifoldSpec& spec, const QuadratureGrid& grid, int n);

/// Modes with the n smallest eigenvalues, ties broken lexicographically on the label.
std::vector<ModeLabel> enumerate_modes(const ManifoldSpec& spec, int n);

// -- implementation of the templated mode evaluation --------------------------------

namespace detail {

template <class S>
S torus_factor(int k, double period, const S& x) {
  using std::cos;
  using std::sin;
  const double w = 2.0 * std::numbers::pi / period;
  if (k == 0) return S(1.0 / std::sqrt(period));
  const double c = std::sqrt(2.0 / period);
  if (k > 0) return c * cos(x * (w * k));
  return c * sin(x * (w * -k));
}

double sphere_normalization(int l, int m);

/// Associated Legendre P_l^m(cos θ) (without Condon–Shortley phase) as a function of θ.
template <class S>
S legendre_theta(int l, int m, const S& theta) {
  using std::cos;
  using std::sin;
  const S z = cos(theta);
  const S s = sin(theta);
  S pmm(1.0);
  double dfact = 1.0;
  for (int i = 1; i <= m; ++i) {
    pmm = pmm * s * dfact;
    dfact += 2.0;
  }
  if (l == m) return pmm;
  S pm1 = z * pmm * double(2 * m + 1);
  if (l == m + 1) return pm1;
  S pl(0.0);
  for (int ll = m + 2; ll <= l; ++ll) {
    pl = (z * pm1 * double(2 * ll - 1) - pmm * double(ll + m - 1)) / double(ll - m);
    pmm = pm1;
    pm1 = pl;
  }
  return pl;
}

}  // namespace detail

template <class S>
S eval_mode(const ManifoldSpec& spec, ModeLabel label, const ChartPoint<S>& x) {
  using std::cos;
  using std::sin;
  switch (spec.kind) {
    case ManifoldKind::Torus1:
      return detail::torus_factor(label.a, spec.periods[0], x[0]);
    case ManifoldKind::Torus2:
      return detail::torus_factor(label.a, spec.periods[0], x[0]) *
             detail::torus_factor(label.b, spec.periods[1], x[1]);
    case ManifoldKind::Sphere2: {
      const int l = label.a;
      const int m = label.b;
      const int am = m < 0 ? -m : m;
      const S p = detail::legendre_theta(l, am, x[0]) * detail::sphere_normalization(l, am);
      if (m == 0) return p;
      if (m > 0) return p * cos(x[1] * double(m)) * std::numbers::sqrt2;
      return p * sin(x[1] * double(am)) * std::numbers::sqrt2;
    }
  }
  return S(0.0);
}

}  // namespace pgal
