#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pgal/model.hpp"
#include "pgal/spectral.hpp"

namespace pgal {

struct GalerkinState {
  double t = 0.0;
  Eigen::VectorXd alpha;
};

/// Grid, basis, model and ε bundled with weighted basis tables for RHS assembly.
class AssemblyWorkspace {
 public:
  AssemblyWorkspace(QuadratureGrid grid, EigenBasis basis, ModelPtr model, double epsilon = 0.0,
                    NoisePtr noise = nullptr);

  const QuadratureGrid& grid() const { return grid_; }
  const EigenBasis& basis() const { return basis_; }
  const CoefficientModel& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  const NoiseModel* noise() const { return noise_.get(); }
  const NoisePtr& noise_ptr() const { return noise_; }
  double epsilon() const { return epsilon_; }
  int n() const { return basis_.n; }
  int dim() const { return basis_.dim; }

  /// Node weights as a vector.
  const Eigen::VectorXd& weights() const { return w_; }

  /// Σ_nodes [F^i ∂_i e_j + T^a_b H̃_j^b_a] where F and T are already weight-scaled.
  Eigen::VectorXd pair(const std::array<Eigen::VectorXd, 2>& flux,
                       const std::array<std::array<Eigen::VectorXd, 2>, 2>& tensor) const;

 private:
  QuadratureGrid grid_;
  EigenBasis basis_;
  ModelPtr model_;
  double epsilon_;
  NoisePtr noise_;
  Eigen::VectorXd w_;
};

/// α̇_j = ∫⟨f(u), ∇e_j⟩ + ∫ tr(A(u) ∘ H̃^{e_j}) − ε μ_j α_j.
Eigen::VectorXd rhs_deterministic(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha);
Eigen::VectorXd rhs_deterministic(const AssemblyWorkspace& ws, const GalerkinState& state);

/// Flux part only: ∫⟨f(u), ∇e_j⟩.
Eigen::VectorXd rhs_flux(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha);

/// b_j = ∫ Φ(x, u) e_j. Zero when the workspace has no noise.
Eigen::VectorXd rhs_noise(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha);

/// L_jk = ∫ tr(A(e_k) ∘ H̃^{e_j}) − ε μ_j δ_jk for linear diffusion; NotLinearDiffusion otherwise.
Eigen::MatrixXd linear_operator(const AssemblyWorkspace& ws);

/// ⟨DivDiv A(u_n), e_j⟩ by the strong route (jets and double divergence).
Eigen::VectorXd strong_diffusion_pairing(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha);

/// Energy terms of u_n at one instant.
struct EnergyTerms {
  double half_l2sq = 0.0;
  /// ∫⟨Div A(u), ∇u⟩, strong route.
  double dissipation = 0.0;
  /// ∫⟨f(u), ∇u⟩
  double flux_work = 0.0;
  /// ε Σ μ_k α_k²
  double eps_dissipation = 0.0;
  double h1_sq = 0.0;
  double grad_sq = 0.0;
  double hm1_dt = 0.0;
  double f_sq = 0.0;
  double div_a_sq = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
};
EnergyTerms energy_terms(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha);

/// Cumulative ledger along a trajectory; time integrals by trapezoid on the given states.
struct EnergyLedger {
  std::vector<double> t;
  std::vector<EnergyTerms> terms;
  /// ½‖u‖² − ½‖u₀‖² + ∫(diss + ε-term − flux work)
  std::vector<double> residual;
  /// ∫‖∂t u‖²_{H⁻¹}
  double hm1_dt_integral = 0.0;
  /// 3∫(‖f‖² + ‖Div A‖² + ε²‖∇u‖²)
  double hm1_dt_bound = 0.0;
  /// max over t of ‖u(t)‖² + c∫‖∇u‖² − (‖u₀‖² + C̄t)e^{C̄t}
  double gronwall_margin = 0.0;
  double max_abs_residual() const;
};
EnergyLedger energy_ledger(const AssemblyWorkspace& ws, const std::vector<GalerkinState>& trajectory);

/// Test function φ(t, x) = θ(t) ψ(x) with ψ in the basis span.
struct SpaceTimeTest {
  std::function<double(double)> theta;
  std::function<double(double)> theta_dot;
  Eigen::VectorXd psi;
};

/// |∫∫ (u ∂tφ + f(u)·∇φ + tr(A(u) ∘ H̃^φ) + ε u Δφ) + ∫ u₀ φ(0)|, trapezoid in t.
double weak_residual(const AssemblyWorkspace& ws, const std::vector<GalerkinState>& trajectory,
                     const SpaceTimeTest& phi);

struct Entropy {
  std::function<double(double)> s;
  std::function<double(double)> s2;
};

struct EntropyReport {
  std::vector<double> t;
  std::vector<double> integral;
  /// D(t) = ∫S(u(t)) − ∫S(u₀) + ∫₀ᵗ∫ (S″⟨A′∇u,∇u⟩ + εS″|∇u|²)
  std::vector<double> defect;
  double max_defect = 0.0;
};

/// NotCompatible when the model fails the geometry compatibility check.
EntropyReport entropy_residual(const AssemblyWorkspace& ws, const std::vector<GalerkinState>& trajectory,
                               const Entropy& entropy);

}  // namespace pgal
