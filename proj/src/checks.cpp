#include "pgal/checks.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace pgal {

namespace {

/// max that keeps a NaN once seen.
double nan_max(double a, double b) { return (std::isnan(a) || std::isnan(b)) ? std::nan("") : std::max(a, b); }

double smallest_generalized_eigenvalue(const Mat2& s, const Mat2& g, int dim) {
  if (dim == 1) return s(0, 0) / g(0, 0);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat2> es(s, g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// sup over nodes of |f| + |A| + |λA′| + |Div A| at frozen λ.
double growth_sup(const CoefficientModel& model, const QuadratureGrid& grid, double lambda) {
  const auto frozen = sample_frozen(model, grid, lambda);
  const auto div = div_tensor(grid, frozen.diffusion);
  double sup = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto& g = grid.metric[n];
    const auto& gi = grid.inverse_metric[n];
    const auto lj = model.lambda_jet(grid.nodes[n], lambda);
    Mat2 a, ap;
    std::array<double, 2> f{lj.flux[0].v, lj.flux[1].v};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        a(i, j) = lj.diffusion[i][j].v;
        ap(i, j) = lj.diffusion[i][j].d[0];
      }
    const double total = vector_norm(g, f) + tensor_norm(g, gi, a) +
                         std::abs(lambda) * tensor_norm(g, gi, ap) +
                         oneform_norm(gi, values_of(div.at[n]));
    sup = nan_max(sup, total);
  }
  return sup;
}

}  // namespace

std::vector<double> default_lambda_samples(const ModelInfo& info, int count) {
  std::vector<double> out;
  const auto& r = info.lambda_range;
  for (int i = 0; i < count; ++i) out.push_back(r.lo + (r.hi - r.lo) * i / double(count - 1));
  return out;
}

ParabolicityReport check_parabolicity(const CoefficientModel& model, const QuadratureGrid& grid,
                                      std::span<const double> lambdas) {
  ParabolicityReport rep;
  rep.c = model.info().parabolicity_c;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  const int dim = grid.dimension();
  for (double l : lambdas) {
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const auto lj = model.lambda_jet(grid.nodes[n], l);
      Mat2 ap;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) ap(i, j) = lj.diffusion[i][j].d[0];
      const Mat2& g = grid.metric[n];
      const Mat2 b = g * ap;
      if (dim == 2) rep.symmetry_residual = std::max(rep.symmetry_residual, std::abs(b(0, 1) - b(1, 0)));
      const Mat2 s = 0.5 * (b + b.transpose());
      rep.min_eigenvalue = std::min(rep.min_eigenvalue, smallest_generalized_eigenvalue(s, g, dim));
    }
  }
  rep.pass = rep.c > 0.0 && rep.min_eigenvalue >= rep.c * (1.0 - 1e-12) && rep.symmetry_residual <= 1e-12;
  return rep;
}

GrowthReport check_growth(const CoefficientModel& model, const QuadratureGrid& grid,
                          std::span<const double> lambdas) {
  GrowthReport rep;
  rep.declared_C = model.info().growth_C;
  double r = 0.0;
  for (double l : lambdas) {
    rep.probed_lambdas.push_back(l);
    r = std::max(r, std::abs(l));
  }
  if (r == 0.0) r = 1.0;
  for (int k = 1; k <= 4; ++k) {
    rep.probed_lambdas.push_back(r * std::ldexp(1.0, k));
    rep.probed_lambdas.push_back(-r * std::ldexp(1.0, k));
  }
  double outer = 0.0, half = 0.0;
  for (double l : rep.probed_lambdas) {
    const double sup = growth_sup(model, grid, l);
    rep.empirical_C = nan_max(rep.empirical_C, sup / (1.0 + std::abs(l)));
    if (std::abs(l) == r * 16.0) outer = std::max(outer, sup);
    if (std::abs(l) == r * 8.0) half = std::max(half, sup);
  }
  rep.outer_doubling_ratio = half > 0.0 ? outer / half : 0.0;
  rep.pass = std::isfinite(rep.empirical_C) && rep.empirical_C <= rep.declared_C * (1.0 + 1e-12);
  return rep;
}

std::vector<double> compat_defect(const CoefficientModel& model, const QuadratureGrid& grid, double lambda) {
  const auto frozen = sample_frozen(model, grid, lambda);
  const auto divf = div_vector(grid, frozen.flux);
  const auto divdiv = div_div(grid, frozen.diffusion);
  std::vector<double> out(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) out[n] = divf.at[n].v - divdiv.at[n].v;
  return out;
}

CompatReport check_geometry_compat(const CoefficientModel& model, const QuadratureGrid& grid,
                                   std::span<const double> lambdas, double tolerance) {
  CompatReport rep;
  for (double l : lambdas) {
    auto d = compat_defect(model, grid, l);
    for (double& x : d) x *= x;
    const double r = std::sqrt(std::abs(integrate(grid, d)));
    if (!(r <= rep.max_residual)) {
      rep.max_residual = r;
      rep.worst_lambda = l;
    }
  }
  rep.pass = rep.max_residual <= tolerance;
  return rep;
}

}  // namespace pgal
