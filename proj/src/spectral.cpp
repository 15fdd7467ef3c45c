#include "pgal/spectral.hpp"

#include <cmath>

namespace pgal {

namespace {

void require_basis(const EigenBasis& basis, const SpectralVector& v) {
  if (v.coeffs.size() != basis.n) throw Error(Errc::ShapeMismatch, "coefficient count differs from basis size");
}

}  // namespace

ScalarSamples Synthesis::jets() const {
  ScalarSamples s{std::vector<Jet2>(value.size()), has_derivatives ? 2 : 0};
  for (Eigen::Index n = 0; n < value.size(); ++n) {
    Jet2 j(value[n]);
    if (has_derivatives) {
      j.d = {partial[0][n], partial[1][n]};
      j.h = {second[0][n], second[1][n], second[1][n], second[2][n]};
    }
    s.at[n] = j;
  }
  return s;
}

SpectralVector project(const QuadratureGrid& grid, const EigenBasis& basis, std::span<const double> samples,
                       int n) {
  if (samples.size() != grid.size() || Eigen::Index(grid.size()) != basis.value.rows())
    throw Error(Errc::LengthMismatch, "sample count differs from node count");
  if (n < 0 || n > basis.n) n = basis.n;
  Eigen::VectorXd ws(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) ws[i] = grid.weights[i] * samples[i];
  SpectralVector v{Eigen::VectorXd::Zero(basis.n), basis.id};
  v.coeffs.head(n) = basis.value.leftCols(n).transpose() * ws;
  return v;
}

Synthesis synthesize(const EigenBasis& basis, const Eigen::VectorXd& alpha, bool with_derivatives) {
  if (alpha.size() != basis.n) throw Error(Errc::ShapeMismatch, "coefficient count differs from basis size");
  Synthesis s;
  s.value = basis.value * alpha;
  s.has_derivatives = with_derivatives;
  if (!with_derivatives) return s;
  const bool two = basis.dim == 2;
  const Eigen::Index rows = basis.value.rows();
  for (int i = 0; i < 2; ++i) {
    s.partial[i] = (i == 0 || two) ? Eigen::VectorXd(basis.partial[i] * alpha) : Eigen::VectorXd::Zero(rows);
    s.gradient[i] = (i == 0 || two) ? Eigen::VectorXd(basis.gradient[i] * alpha) : Eigen::VectorXd::Zero(rows);
  }
  for (int i = 0; i < 3; ++i)
    s.second[i] = (i == 0 || two) ? Eigen::VectorXd(basis.second[i] * alpha) : Eigen::VectorXd::Zero(rows);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      s.hessian[a][b] = ((a == 0 && b == 0) || two) ? Eigen::VectorXd(basis.hessian[a][b] * alpha)
                                                    : Eigen::VectorXd::Zero(rows);
  return s;
}

Synthesis synthesize(const EigenBasis& basis, const SpectralVector& v, bool with_derivatives) {
  require_basis(basis, v);
  return synthesize(basis, v.coeffs, with_derivatives);
}

SpectralVector apply_lambda_s(const EigenBasis& basis, const SpectralVector& v, double s) {
  require_basis(basis, v);
  SpectralVector out = v;
  for (int k = 0; k < basis.n; ++k) out.coeffs[k] *= std::pow(basis.lambda[k], s);
  return out;
}

double sobolev_norm(const EigenBasis& basis, const Eigen::VectorXd& alpha, double s) {
  if (alpha.size() != basis.n) throw Error(Errc::ShapeMismatch, "coefficient count differs from basis size");
  double acc = 0.0;
  for (int k = 0; k < basis.n; ++k) acc += std::pow(basis.lambda[k], 2.0 * s) * alpha[k] * alpha[k];
  return std::sqrt(acc);
}

double sobolev_norm(const EigenBasis& basis, const SpectralVector& v, double s) {
  require_basis(basis, v);
  return sobolev_norm(basis, v.coeffs, s);
}

double sobolev_inner(const EigenBasis& basis, const SpectralVector& v, const SpectralVector& w, double s) {
  require_basis(basis, v);
  require_basis(basis, w);
  double acc = 0.0;
  for (int k = 0; k < basis.n; ++k) acc += std::pow(basis.lambda[k], 2.0 * s) * v.coeffs[k] * w.coeffs[k];
  return acc;
}

double hminus1_norm_of_functional(const EigenBasis& basis, const Eigen::VectorXd& pairings) {
  return sobolev_norm(basis, pairings, -1.0);
}

SpectralVector unit_vector(const EigenBasis& basis, int k) {
  SpectralVector v = zero_vector(basis);
  v.coeffs[k] = 1.0;
  return v;
}

SpectralVector zero_vector(const EigenBasis& basis) { return {Eigen::VectorXd::Zero(basis.n), basis.id}; }

}  // namespace pgal
