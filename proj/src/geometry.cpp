#include "pgal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace pgal {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t bits_of(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  return u;
}

}  // namespace

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Torus1: return "torus1";
    case ManifoldKind::Torus2: return "torus2";
    case ManifoldKind::Sphere2: return "sphere2";
  }
  return "unknown";
}

ManifoldKind manifold_kind_from_string(const std::string& name) {
  if (name == "torus1") return ManifoldKind::Torus1;
  if (name == "torus2") return ManifoldKind::Torus2;
  if (name == "sphere2") return ManifoldKind::Sphere2;
  throw Error(Errc::ConfigError, "unknown manifold kind '" + name + "'");
}

ManifoldSpec ManifoldSpec::torus1(double period) {
  ManifoldSpec s;
  s.kind = ManifoldKind::Torus1;
  s.periods = {period, 1.0};
  return s;
}

ManifoldSpec ManifoldSpec::torus2(double period_x, double period_y) {
  ManifoldSpec s;
  s.kind = ManifoldKind::Torus2;
  s.periods = {period_x, period_y};
  return s;
}

ManifoldSpec ManifoldSpec::sphere2() {
  ManifoldSpec s;
  s.kind = ManifoldKind::Sphere2;
  s.periods = {kPi, 2.0 * kPi};
  return s;
}

double ManifoldSpec::analytic_volume() const {
  switch (kind) {
    case ManifoldKind::Torus1: return periods[0];
    case ManifoldKind::Torus2: return periods[0] * periods[1];
    case ManifoldKind::Sphere2: return 4.0 * kPi;
  }
  return 0.0;
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(count, 0.0);
  weights.assign(count, 0.0);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= count; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = count * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[count - 1 - i] = z;
    nodes[i] = -z;
    weights[i] = w;
    weights[count - 1 - i] = w;
  }
}

void christoffel_at(const ManifoldSpec& spec, const Point& x, Christoffel& gamma,
                    ChristoffelDerivative& dgamma) {
  gamma = {};
  dgamma = {};
  if (spec.kind != ManifoldKind::Sphere2) return;
  const double s = std::sin(x[0]), c = std::cos(x[0]);
  gamma[0][1][1] = -s * c;
  gamma[1][0][1] = gamma[1][1][0] = c / s;
  dgamma[0][0][1][1] = -std::cos(2.0 * x[0]);
  dgamma[0][1][0][1] = dgamma[0][1][1][0] = -1.0 / (s * s);
}

QuadratureGrid build_grid(const ManifoldSpec& spec, std::array<int, 2> resolution) {
  const int dim = spec.dimension();
  if (resolution[0] < 4 || (dim == 2 && resolution[1] < 4))
    throw Error(Errc::InvalidResolution, "each axis needs at least 4 nodes");
  if (dim == 1) resolution[1] = 1;

  QuadratureGrid grid;
  grid.spec = spec;
  grid.resolution = resolution;
  const std::size_t count = std::size_t(resolution[0]) * resolution[1];
  grid.nodes.reserve(count);
  grid.weights.reserve(count);

  if (spec.kind == ManifoldKind::Sphere2) {
    std::vector<double> z, wz;
    gauss_legendre(resolution[0], z, wz);
    const double dphi = 2.0 * kPi / resolution[1];
    // θ ascending means z descending
    for (int i = resolution[0] - 1; i >= 0; --i) {
      const double theta = std::acos(z[i]);
      for (int j = 0; j < resolution[1]; ++j) {
        grid.nodes.push_back({theta, j * dphi});
        grid.weights.push_back(wz[i] * dphi);
      }
    }
  } else {
    const double hx = spec.periods[0] / resolution[0];
    const double hy = dim == 2 ? spec.periods[1] / resolution[1] : 1.0;
    for (int i = 0; i < resolution[0]; ++i)
      for (int j = 0; j < resolution[1]; ++j) {
        grid.nodes.push_back({i * hx, dim == 2 ? j * hy : 0.0});
        grid.weights.push_back(hx * hy);
      }
  }

  grid.metric.resize(count);
  grid.inverse_metric.resize(count);
  grid.christoffel.resize(count);
  grid.christoffel_derivative.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto g = metric_at<double>(spec, grid.nodes[k]);
    const auto gi = inverse_metric_at<double>(spec, grid.nodes[k]);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        grid.metric[k](a, b) = g[a][b];
        grid.inverse_metric[k](a, b) = gi[a][b];
      }
    Christoffel gam;
    ChristoffelDerivative dgam;
    christoffel_at(spec, grid.nodes[k], gam, dgam);
    grid.christoffel[k] = gam;
    grid.christoffel_derivative[k] = dgam;
  }
  return grid;
}

double integrate(const QuadratureGrid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size())
    throw Error(Errc::LengthMismatch, "sample count differs from node count");
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) acc += grid.weights[i] * samples[i];
  return acc;
}

double mode_eigenvalue(const ManifoldSpec& spec, ModeLabel label) {
  switch (spec.kind) {
    case ManifoldKind::Torus1: {
      const double w = 2.0 * kPi / spec.periods[0] * label.a;
      return w * w;
    }
    case ManifoldKind::Torus2: {
      const double wx = 2.0 * kPi / spec.periods[0] * label.a;
      const double wy = 2.0 * kPi / spec.periods[1] * label.b;
      return wx * wx + wy * wy;
    }
    case ManifoldKind::Sphere2:
      return double(label.a) * (label.a + 1);
  }
  return 0.0;
}

std::vector<ModeLabel> enumerate_modes(const ManifoldSpec& spec, int n) {
  std::vector<ModeLabel> out;
  if (n <= 0) return out;
  auto by_mu = [&](const ModeLabel& p, const ModeLabel& q) {
    const double mp = mode_eigenvalue(spec, p), mq = mode_eigenvalue(spec, q);
    if (mp != mq) return mp < mq;
    return p < q;
  };
  if (spec.kind == ManifoldKind::Sphere2) {
    for (int l = 0; int(out.size()) < n; ++l)
      for (int m = -l; m <= l && int(out.size()) < n; ++m) out.push_back({l, m});
    return out;
  }
  if (spec.kind == ManifoldKind::Torus1) {
    for (int k = 0; int(out.size()) < n; ++k) {
      if (k == 0) {
        out.push_back({0, 0});
      } else {
        out.push_back({-k, 0});
        if (int(out.size()) < n) out.push_back({k, 0});
      }
    }
    return out;
  }
  for (int K = 1;; K *= 2) {
    std::vector<ModeLabel> cand;
    for (int a = -K; a <= K; ++a)
      for (int b = -K; b <= K; ++b) cand.push_back({a, b});
    std::sort(cand.begin(), cand.end(), by_mu);
    if (int(cand.size()) < n) continue;
    const double wx = 2.0 * kPi / spec.periods[0] * (K + 1);
    const double wy = 2.0 * kPi / spec.periods[1] * (K + 1);
    const double outside = std::min(wx * wx, wy * wy);
    if (mode_eigenvalue(spec, cand[n - 1]) < outside) {
      cand.resize(n);
      return cand;
    }
  }
}

namespace detail {

double sphere_normalization(int l, int m) {
  double ratio = 1.0;
  for (int k = l - m + 1; k <= l + m; ++k) ratio /= k;
  return std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * ratio);
}

}  // namespace detail

Jet2 EigenBasis::jet(std::size_t node, int k) const {
  Jet2 j(value(node, k));
  j.d = {partial[0](node, k), partial[1](node, k)};
  j.h = {second[0](node, k), second[1](node, k), second[1](node, k), second[2](node, k)};
  return j;
}

EigenBasis build_basis(const ManifoldSpec& spec, const QuadratureGrid& grid, int n) {
  if (n < 1) throw Error(Errc::UnderResolved, "basis needs at least one mode");
  EigenBasis basis;
  basis.n = n;
  basis.dim = spec.dimension();
  basis.labels = enumerate_modes(spec, n);

  int max_a = 0, max_b = 0;
  for (const auto& lab : basis.labels) {
    max_a = std::max(max_a, std::abs(lab.a));
    max_b = std::max(max_b, std::abs(lab.b));
  }
  if (spec.kind == ManifoldKind::Sphere2) {
    if (max_a >= grid.resolution[0] || 2 * max_a >= grid.resolution[1])
      throw Error(Errc::UnderResolved, "degree " + std::to_string(max_a) +
                                           " exceeds what the sphere grid integrates exactly");
  } else {
    if (2 * max_a >= grid.resolution[0] ||
        (spec.kind == ManifoldKind::Torus2 && 2 * max_b >= grid.resolution[1]))
      throw Error(Errc::UnderResolved, "wavenumber at or above Nyquist");
  }

  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(h, std::uint64_t(spec.kind));
  h = fnv1a(h, bits_of(spec.periods[0]));
  h = fnv1a(h, bits_of(spec.periods[1]));
  h = fnv1a(h, std::uint64_t(grid.resolution[0]));
  h = fnv1a(h, std::uint64_t(grid.resolution[1]));
  h = fnv1a(h, std::uint64_t(n));
  basis.id = h;

  for (const auto& lab : basis.labels) {
    const double mu = mode_eigenvalue(spec, lab);
    basis.mu.push_back(mu);
    basis.lambda.push_back(std::sqrt(1.0 + mu));
  }

  const Eigen::Index rows = Eigen::Index(grid.size());
  auto zero = [&] { return Eigen::MatrixXd::Zero(rows, n); };
  basis.value = zero();
  for (auto& m : basis.partial) m = zero();
  for (auto& m : basis.second) m = zero();
  for (auto& m : basis.gradient) m = zero();
  for (auto& row : basis.hessian)
    for (auto& m : row) m = zero();

  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& p = grid.nodes[i];
    const ChartPoint<Jet2> x{Jet2::variable(p[0], 0), Jet2::variable(p[1], 1)};
    const Mat2& gi = grid.inverse_metric[i];
    const Christoffel& gam = grid.christoffel[i];
    for (int k = 0; k < n; ++k) {
      const Jet2 e = eval_mode(spec, basis.labels[k], x);
      basis.value(i, k) = e.v;
      basis.partial[0](i, k) = e.d[0];
      basis.partial[1](i, k) = e.d[1];
      basis.second[0](i, k) = e.hess(0, 0);
      basis.second[1](i, k) = e.hess(0, 1);
      basis.second[2](i, k) = e.hess(1, 1);
      for (int a = 0; a < 2; ++a)
        basis.gradient[a](i, k) = gi(a, 0) * e.d[0] + gi(a, 1) * e.d[1];
      // covariant Hessian ∇_c∂_b e, then raise the first index
      double cov[2][2];
      for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b)
          cov[c][b] = e.hess(c, b) - gam[0][c][b] * e.d[0] - gam[1][c][b] * e.d[1];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          basis.hessian[a][b](i, k) = gi(a, 0) * cov[0][b] + gi(a, 1) * cov[1][b];
    }
  }
  return basis;
}

}  // namespace pgal
