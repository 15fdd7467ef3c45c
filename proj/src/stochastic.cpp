#include "pgal/stochastic.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "pgal/checks.hpp"

namespace pgal {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
constexpr long kBlock = 64;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * b;
  hi = std::uint32_t(p >> 32);
  lo = std::uint32_t(p);
}

double unit_open_closed(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t(hi) << 32 | lo) >> 11;
  return (double(bits) + 1.0) * 0x1.0p-53;
}

double weighted_sq(const EigenBasis& basis, const Eigen::VectorXd& a, double power) {
  double acc = 0.0;
  for (int k = 0; k < basis.n; ++k) acc += std::pow(basis.lambda[k], power) * a[k] * a[k];
  return acc;
}

void require_sde(const AssemblyWorkspace& ws) {
  const auto& info = ws.model().info();
  if (!info.is_linear_diffusion) throw Error(Errc::NotLinearDiffusion, info.name);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kW0;
      k[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

double keyed_normal(std::uint64_t seed, std::uint64_t sample, std::uint64_t step) {
  const auto r = philox4x32({std::uint32_t(step), std::uint32_t(step >> 32), std::uint32_t(sample),
                             std::uint32_t(sample >> 32)},
                            {std::uint32_t(seed), std::uint32_t(seed >> 32)});
  const double u1 = unit_open_closed(r[0], r[1]);
  const double u2 = unit_open_closed(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

WienerPath::WienerPath(std::uint64_t seed, std::uint64_t sample_index, double dt)
    : seed_(seed), sample_(sample_index), dt_(dt), sqrt_dt_(std::sqrt(dt)) {
  if (!(dt > 0.0)) throw Error(Errc::ConfigError, "dt must be positive");
}

double WienerPath::increment(std::uint64_t step) const { return sqrt_dt_ * keyed_normal(seed_, sample_, step); }

bool wiener_sanity(std::uint64_t seed, double dt) {
  const WienerPath w(seed, ~std::uint64_t(0), dt);
  constexpr int n = 10000;
  Moments m;
  for (int i = 0; i < n; ++i) m.add(w.increment(std::uint64_t(i)));
  const double mean_sigma = std::sqrt(dt / n);
  // variance of the sample variance of N(0, dt) is 2dt²/(n−1)
  const double var_sigma = dt * std::sqrt(2.0 / (n - 1));
  return std::abs(m.mean) <= 5.0 * mean_sigma && std::abs(m.variance() - dt) <= 5.0 * var_sigma;
}

void Moments::add(double x) {
  ++n;
  const double d = x - mean;
  mean += d / double(n);
  m2 += d * (x - mean);
}

void Moments::merge(const Moments& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double total = double(n + o.n);
  const double d = o.mean - mean;
  mean += d * double(o.n) / total;
  m2 += o.m2 + d * d * double(n) * double(o.n) / total;
  n += o.n;
}

double Moments::stderr_of_mean() const { return n > 0 ? std::sqrt(variance() / double(n)) : 0.0; }

GalerkinState em_step(const AssemblyWorkspace& ws, const GalerkinState& state, double dt, double dw) {
  require_sde(ws);
  GalerkinState out{state.t + dt, state.alpha + dt * rhs_deterministic(ws, state.alpha)};
  if (ws.noise() && dw != 0.0) out.alpha += dw * rhs_noise(ws, state.alpha);
  if (!out.alpha.allFinite()) throw BlowupError(out.t, -1, "nonfinite coefficients");
  return out;
}

SdePath simulate_path(const AssemblyWorkspace& ws, const SpectralVector& u0, const SdeConfig& config) {
  require_sde(ws);
  if (!(config.T > 0.0) || !(config.dt > 0.0) || config.output_stride < 1)
    throw Error(Errc::ConfigError, "T, dt and output_stride must be positive");
  if (u0.coeffs.size() != ws.n()) throw Error(Errc::ShapeMismatch, "initial coefficients differ from basis size");
  const long nsteps = std::max(1LL, std::llround(config.T / config.dt));
  const double h = config.T / double(nsteps);
  const WienerPath w(config.seed, config.sample_index, h);
  const auto& basis = ws.basis();

  SdePath path;
  const bool keep_all = !config.lags.empty();
  std::vector<Eigen::VectorXd> all;
  GalerkinState s{0.0, u0.coeffs};
  path.states.push_back(s);
  if (keep_all) all.push_back(s.alpha);
  double grad_prev = weighted_sq(basis, s.alpha, 2.0) - s.alpha.squaredNorm();
  double h2_prev = weighted_sq(basis, s.alpha, 4.0);
  for (long k = 0; k < nsteps; ++k) {
    const double dw = w.increment(std::uint64_t(k));
    const Eigen::VectorXd b = rhs_noise(ws, s.alpha);
    path.ito_term += b.dot(s.alpha) * dw;
    GalerkinState next{0.0, s.alpha + h * rhs_deterministic(ws, s.alpha) + dw * b};
    next.t = config.T * double(k + 1) / double(nsteps);
    if (!next.alpha.allFinite()) throw BlowupError(next.t, long(config.sample_index), "nonfinite coefficients");
    s = std::move(next);
    const double grad = weighted_sq(basis, s.alpha, 2.0) - s.alpha.squaredNorm();
    const double h2 = weighted_sq(basis, s.alpha, 4.0);
    path.grad_integral += 0.5 * h * (grad + grad_prev);
    path.h2_integral += 0.5 * h * (h2 + h2_prev);
    grad_prev = grad;
    h2_prev = h2;
    if ((k + 1) % config.output_stride == 0 || k + 1 == nsteps) path.states.push_back(s);
    if (keep_all) all.push_back(s.alpha);
  }
  for (int lag : config.lags) {
    double acc = 0.0;
    long count = 0;
    for (std::size_t i = 0; i + std::size_t(lag) < all.size(); ++i, ++count)
      acc += (all[i + std::size_t(lag)] - all[i]).squaredNorm();
    path.holder.push_back(count > 0 ? acc / double(count) / (lag * h) : std::nan(""));
  }
  return path;
}

void EnsembleStats::merge(const EnsembleStats& o) {
  if (o.M == 0) return;
  if (M == 0) {
    *this = o;
    return;
  }
  M += o.M;
  for (std::size_t t = 0; t < times.size(); ++t) {
    for (std::size_t k = 0; k < coeff[t].size(); ++k) {
      coeff[t][k].merge(o.coeff[t][k]);
      coeff_sq[t][k].merge(o.coeff_sq[t][k]);
    }
    l2sq[t].merge(o.l2sq[t]);
    h1sq[t].merge(o.h1sq[t]);
  }
  grad_integral.merge(o.grad_integral);
  h2_integral.merge(o.h2_integral);
  ito_term.merge(o.ito_term);
  for (std::size_t i = 0; i < holder.size(); ++i) holder[i].merge(o.holder[i]);
  rng_sane = rng_sane && o.rng_sane;
}

EnsembleStats run_ensemble(const AssemblyWorkspace& ws, const SpectralVector& u0, const EnsembleConfig& config) {
  require_sde(ws);
  if (config.M < 1 || config.threads < 1) throw Error(Errc::ConfigError, "M and threads must be positive");
  const long nblocks = (config.M + kBlock - 1) / kBlock;
  std::vector<EnsembleStats> blocks(static_cast<std::size_t>(nblocks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nblocks));
  std::atomic<long> next{0};

  auto work = [&]() {
    for (long b = next++; b < nblocks; b = next++) {
      try {
        EnsembleStats st;
        for (long i = b * kBlock; i < std::min(config.M, (b + 1) * kBlock); ++i) {
          SdeConfig pc{config.T, config.dt, config.seed, std::uint64_t(i), config.output_stride, config.lags};
          const auto path = simulate_path(ws, u0, pc);
          if (st.M == 0) {
            for (const auto& s : path.states) st.times.push_back(s.t);
            const std::size_t nt = st.times.size();
            st.coeff.assign(nt, std::vector<Moments>(std::size_t(ws.n())));
            st.coeff_sq = st.coeff;
            st.l2sq.assign(nt, {});
            st.h1sq.assign(nt, {});
            st.lags = config.lags;
            st.holder.assign(config.lags.size(), {});
          }
          ++st.M;
          for (std::size_t t = 0; t < path.states.size(); ++t) {
            const auto& a = path.states[t].alpha;
            for (int k = 0; k < ws.n(); ++k) {
              st.coeff[t][std::size_t(k)].add(a[k]);
              st.coeff_sq[t][std::size_t(k)].add(a[k] * a[k]);
            }
            st.l2sq[t].add(a.squaredNorm());
            st.h1sq[t].add(weighted_sq(ws.basis(), a, 2.0));
          }
          st.grad_integral.add(path.grad_integral);
          st.h2_integral.add(path.h2_integral);
          st.ito_term.add(path.ito_term);
          for (std::size_t l = 0; l < path.holder.size(); ++l) st.holder[l].add(path.holder[l]);
        }
        blocks[std::size_t(b)] = std::move(st);
      } catch (...) {
        errors[std::size_t(b)] = std::current_exception();
      }
    }
  };
  const int nthreads = int(std::min<long>(config.threads, nblocks));
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  EnsembleStats out;
  for (const auto& b : blocks) out.merge(b);
  out.dt = config.T / double(std::max(1LL, std::llround(config.T / config.dt)));
  out.lags = config.lags;
  out.rng_sane = wiener_sanity(config.seed, out.dt);
  return out;
}

IsometryReport ito_isometry_check(double T, double dt, long M, std::uint64_t seed,
                                  const std::function<double(double)>& integrand) {
  if (!(T > 0.0) || !(dt > 0.0) || M < 2) throw Error(Errc::ConfigError, "T, dt must be positive and M ≥ 2");
  const long nsteps = std::max(1LL, std::llround(T / dt));
  const double h = T / double(nsteps);
  std::vector<double> f(static_cast<std::size_t>(nsteps));
  IsometryReport rep;
  for (long i = 0; i < nsteps; ++i) {
    f[std::size_t(i)] = integrand(T * double(i) / double(nsteps));
    rep.expected += f[std::size_t(i)] * f[std::size_t(i)] * h;
  }
  Moments m;
  for (long s = 0; s < M; ++s) {
    const WienerPath w(seed, std::uint64_t(s), h);
    double x = 0.0;
    for (long i = 0; i < nsteps; ++i)
      if (f[std::size_t(i)] != 0.0) x += f[std::size_t(i)] * w.increment(std::uint64_t(i));
    m.add(x * x);
  }
  rep.estimate = m.mean;
  rep.stderr_of_mean = m.stderr_of_mean();
  rep.pass = std::abs(rep.estimate - rep.expected) <= 4.0 * rep.stderr_of_mean;
  return rep;
}

HolderReport holder_half_check(const EnsembleStats& stats) {
  HolderReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool finite = !stats.holder.empty();
  for (std::size_t i = 0; i < stats.holder.size(); ++i) {
    const double q = stats.holder[i].mean;
    rep.lag_times.push_back(stats.lags[i] * stats.dt);
    rep.quotient.push_back(q);
    rep.stderr_of_mean.push_back(stats.holder[i].stderr_of_mean());
    finite = finite && std::isfinite(q);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  rep.c_emp = hi;
  rep.spread = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  if (rep.quotient.size() >= 2 && rep.quotient.front() > 0.0 && rep.quotient.back() > 0.0)
    rep.slope = std::log(rep.quotient.back() / rep.quotient.front()) /
                std::log(rep.lag_times.back() / rep.lag_times.front());
  rep.pass = finite && rep.spread <= 2.0;
  return rep;
}

double stochastic_energy_bound(const AssemblyWorkspace& ws, const SpectralVector& u0, double T) {
  const auto& model = ws.model();
  const auto& info = model.info();
  const auto& grid = ws.grid();
  std::vector<double> probes = default_lambda_samples(info, 41);
  double r = 0.0;
  for (double l : probes) r = std::max(r, std::abs(l));
  std::vector<double> outer;
  for (int k = 1; k <= 6; ++k) {
    outer.push_back(r * std::ldexp(1.0, k));
    outer.push_back(-r * std::ldexp(1.0, k));
  }
  probes.insert(probes.end(), outer.begin(), outer.end());

  auto sup_sq_integral = [&](auto magnitude) {
    std::vector<double> sq(grid.size());
    for (std::size_t n = 0; n < grid.size(); ++n) {
      double s = 0.0, s5 = 0.0, s6 = 0.0;
      for (double l : probes) {
        const double m = magnitude(n, l);
        s = std::max(s, m);
        if (std::abs(l) == r * 32.0) s5 = std::max(s5, m);
        if (std::abs(l) == r * 64.0) s6 = std::max(s6, m);
      }
      if (s6 > s5 * (1.0 + 1e-9)) return std::numeric_limits<double>::infinity();
      sq[n] = s * s;
    }
    return integrate(grid, sq);
  };
  const double f_sup = sup_sq_integral([&](std::size_t n, double l) {
    const auto c = model.evaluate(grid.nodes[n], l);
    std::array<double, 2> f = c.flux;
    if (ws.dim() == 1) f[1] = 0.0;
    return vector_norm(grid.metric[n], f);
  });
  double phi_sup = 0.0;
  if (ws.noise())
    phi_sup = sup_sq_integral(
        [&](std::size_t n, double l) { return std::abs(ws.noise()->phi(grid.nodes[n], l)); });
  const double x = 0.5 * u0.coeffs.squaredNorm() + T * (f_sup + phi_sup);
  const double c = info.growth_C;
  return x * (1.0 + c * T * std::exp(c * T));
}

}  // namespace pgal
