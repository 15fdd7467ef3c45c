#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "pgal/galerkin.hpp"

namespace pgal {

enum class Scheme { Auto, RK4, ImexCNAB2 };

std::string to_string(Scheme s);
/// "auto", "RK4", "IMEX-CNAB2"; ConfigError otherwise.
Scheme scheme_from_string(const std::string& name);

struct SolverConfig {
  double dt = 1e-3;
  double T = 1.0;
  Scheme scheme = Scheme::Auto;
  int output_stride = 1;
  /// EnergyViolation when |ledger residual| > energy_tolerance·(1 + ‖u₀‖²).
  double energy_tolerance = 1e-4;
  bool check_energy = true;
};

/// One monitor row at an output time.
struct MonitorRow {
  double t = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
  double hm1_dt = 0.0;
  double energy_residual = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double dissipation = 0.0;
  /// α·(diffusion pairing), the quadrature route of the dissipation.
  double dissipation_trace = 0.0;
  double flux_work = 0.0;
  double gronwall_margin = 0.0;
};

struct SolverRun {
  SolverConfig config;
  Scheme scheme_used = Scheme::RK4;
  long steps = 0;
  /// RK4 substeps per step from the stability guard.
  int substeps = 1;
  std::vector<GalerkinState> snapshots;
  std::vector<MonitorRow> monitors;
  double max_energy_residual = 0.0;
  double hm1_dt_integral = 0.0;
  double hm1_dt_bound = 0.0;
  double gronwall_margin = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
};

/// Classical RK4 on rhs_deterministic. Blowup on nonfinite output.
GalerkinState step_rk4(const AssemblyWorkspace& ws, const GalerkinState& state, double dt);

/// Largest RK4 step admitted by the guard 0.9/(μ_max·(derivative_bound + ε)); +inf if unbounded.
double rk4_stable_dt(const AssemblyWorkspace& ws);

/// Crank–Nicolson on the linear diffusion operator, Adams–Bashforth 2 on the flux.
class ImexStepper {
 public:
  /// NotLinearDiffusion or SingularSystem.
  ImexStepper(const AssemblyWorkspace& ws, double dt);

  /// First call uses forward Euler on the flux.
  GalerkinState step(const GalerkinState& state);
  void reset() { previous_flux_.reset(); }
  /// Seeds the Adams–Bashforth history with the flux at an earlier state.
  void prime(const GalerkinState& previous);
  const Eigen::MatrixXd& linear() const { return l_; }

 private:
  const AssemblyWorkspace* ws_;
  double dt_;
  Eigen::MatrixXd l_;
  Eigen::MatrixXd explicit_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::optional<Eigen::VectorXd> previous_flux_;
};

/// Single IMEX step from rest (Euler flux start).
GalerkinState step_imex(const AssemblyWorkspace& ws, const GalerkinState& state, double dt);

/// Integrates to T with monitors every output_stride steps.
/// Blowup, EnergyViolation, NotLinearDiffusion (IMEX on nonlinear diffusion), ConfigError.
SolverRun solve(const AssemblyWorkspace& ws, const SpectralVector& u0, const SolverConfig& config);

}  // namespace pgal
