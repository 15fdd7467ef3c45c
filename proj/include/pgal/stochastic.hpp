#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "pgal/galerkin.hpp"

namespace pgal {

/// Philox4x32-10 block cipher.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Standard normal keyed by (seed, sample, step), via Box–Muller on one Philox block.
double keyed_normal(std::uint64_t seed, std::uint64_t sample, std::uint64_t step);

/// Increments ΔW_i ~ N(0, dt) reproducible from (seed, sample_index, step).
class WienerPath {
 public:
  WienerPath(std::uint64_t seed, std::uint64_t sample_index, double dt);
  double increment(std::uint64_t step) const;
  double dt() const { return dt_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t sample_index() const { return sample_; }

 private:
  std::uint64_t seed_, sample_;
  double dt_, sqrt_dt_;
};

/// Mean and variance of a 10⁴-draw batch within 5σ of (0, dt).
bool wiener_sanity(std::uint64_t seed, double dt);

/// Streaming mean/variance with Chan's merge.
struct Moments {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const Moments& o);
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
  double stderr_of_mean() const;
};

struct SdeConfig {
  double T = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
  int output_stride = 1;
  /// Hölder lags in steps.
  std::vector<int> lags;
};

struct SdePath {
  std::vector<GalerkinState> states;
  /// ∫‖∇u‖², ∫‖u‖²_{H²} (trapezoid on steps).
  double grad_integral = 0.0;
  double h2_integral = 0.0;
  /// Σ (∫Φ(u)u dV) ΔW, left point.
  double ito_term = 0.0;
  /// time-averaged ‖u(t+L dt) − u(t)‖²/(L dt) per lag
  std::vector<double> holder;
};

/// α ← α + dt·α̇(α) + ΔW·b(α). NotLinearDiffusion; Blowup.
GalerkinState em_step(const AssemblyWorkspace& ws, const GalerkinState& state, double dt, double dw);

/// Blowup carries time and sample index.
SdePath simulate_path(const AssemblyWorkspace& ws, const SpectralVector& u0, const SdeConfig& config);

struct EnsembleConfig {
  long M = 1000;
  double T = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  int threads = 1;
  int output_stride = 1;
  std::vector<int> lags{1, 10, 100};
};

struct EnsembleStats {
  long M = 0;
  double dt = 0.0;
  std::vector<double> times;
  /// [time][k] moments of α_k and α_k²
  std::vector<std::vector<Moments>> coeff;
  std::vector<std::vector<Moments>> coeff_sq;
  /// [time] moments of ‖u‖²_{L²} and ‖u‖²_{H¹}
  std::vector<Moments> l2sq;
  std::vector<Moments> h1sq;
  Moments grad_integral;
  Moments h2_integral;
  Moments ito_term;
  std::vector<int> lags;
  std::vector<Moments> holder;
  bool rng_sane = true;

  void merge(const EnsembleStats& o);
};

/// Paths in blocks of 64 merged in index order, so results do not depend on thread count.
EnsembleStats run_ensemble(const AssemblyWorkspace& ws, const SpectralVector& u0, const EnsembleConfig& config);

struct IsometryReport {
  double estimate = 0.0;
  double expected = 0.0;
  double stderr_of_mean = 0.0;
  bool pass = false;
};

/// E[(Σ f(t_i)ΔW_i)²] against Σ f(t_i)² dt; pass within 4 standard errors.
IsometryReport ito_isometry_check(double T, double dt, long M, std::uint64_t seed,
                                  const std::function<double(double)>& integrand);

struct HolderReport {
  std::vector<double> lag_times;
  std::vector<double> quotient;
  std::vector<double> stderr_of_mean;
  double c_emp = 0.0;
  /// max/min quotient over lags
  double spread = 0.0;
  /// log-log slope between the smallest and largest lag
  double slope = 0.0;
  bool pass = false;
};

/// Pass iff all quotients are finite and spread ≤ 2.
HolderReport holder_half_check(const EnsembleStats& stats);

/// Right side of the stochastic energy estimate with the model's constants:
/// X(1 + C̄T e^{C̄T}), X = ½‖u₀‖² + T(‖sup|f|‖² + ‖sup|Φ|‖²). +inf for unbounded f or Φ.
double stochastic_energy_bound(const AssemblyWorkspace& ws, const SpectralVector& u0, double T);

}  // namespace pgal
