#pragma once

// Linearization of the stochastic dynamics around the locked classical
// state at orientation theta = 0. Fluctuations are ordered like the state
// vector, c = (b_+, b_-, bp_+, bp_-), and obey dc = A c dt + noise with
//
//   A = L - gamma I,   L = [ T T 0 R ]
//                          [ T T R 0 ]
//                          [ 0 R T T ]
//                          [ R 0 T T ]
//
//   R_{m,q} = f_{m,q} g_{m+q}                     (saturated gain)
//   T_{m,n} = -kappa sum_q f_{m,q} f_{n,m+q-n} rho_q rho_{m+q-n}
//
// and stationary diffusion D with R in the same off-diagonal pattern per
// sector: D = blkdiag([0 R; R 0], [0 R; R 0]).
//
// Exact consequences of R rho = gamma rho used as invariants:
//   u0 = (rho, -rho, -rho, rho):  A u0 = 0          (orientation Goldstone)
//   u1 = (rho, -rho, rho, -rho):  A u1 = -2 gamma u1
//   u0^T D u0 = u1^T D u1 = -4 gamma |rho|^2

#include <Eigen/Core>

#include "spopo/comb.hpp"
#include "spopo/steady_state.hpp"

namespace spopo {

struct LinearModel {
  int n_side = 0;
  OpoParams params;
  Eigen::VectorXd rho;
  Eigen::MatrixXd R;       // M x M
  Eigen::MatrixXd T;       // M x M
  Eigen::MatrixXd L_full;  // 4M x 4M
  Eigen::MatrixXd A;       // L_full - gamma I
  Eigen::MatrixXd D;       // 4M x 4M stationary diffusion

  bool trivial() const { return rho.norm() == 0.0; }
};

// Quadratic saturation correction T(rho); zero for the trivial state.
Eigen::MatrixXd saturation_matrix(const CombModel& model,
                                  const OpoParams& params,
                                  const Eigen::VectorXd& rho);

// Builds the linear model and always cross-validates A against the
// centered-difference Jacobian of the nonlinear drift at the classical
// state (tolerance fd_tol in max-norm). Throws std::runtime_error with the
// worst entry when the check fails; this guards the analytic block
// formulas against regressions.
LinearModel build_linear_model(const CombModel& model, const OpoParams& params,
                               const Eigen::VectorXd& rho,
                               double fd_tol = 1e-6);

// Goldstone direction (rho, -rho, -rho, rho) and its damped partner
// (rho, -rho, rho, -rho).
Eigen::VectorXd goldstone_vector(const LinearModel& lm);
Eigen::VectorXd damped_partner_vector(const LinearModel& lm);

struct EigenIdentityReport {
  double gain_residual = 0.0;       // ||R rho - gamma rho|| / (gamma ||rho||)
  double dark_pair_residual = 0.0;  // ||Lv w1 + 2 gamma w1|| / (gamma ||w1||)
  double goldstone_residual = 0.0;  // ||A u0|| / (gamma ||u0||)
  double diffusion_residual = 0.0;  // |u0^T D u0 + 4 g |rho|^2| / (g |rho|^2)
};

// Evaluates the invariants above. Lv is the 2M x 2M rotation-difference
// block [ -gamma I, R; R, -gamma I ] acting on w1 = (rho, -rho). Throws
// std::domain_error for the trivial state, where all four are undefined.
EigenIdentityReport verify_eigenrelation(const LinearModel& lm);

}  // namespace spopo
