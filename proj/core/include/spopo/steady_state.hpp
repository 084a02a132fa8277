#pragma once

// Classical (mean-field) steady state above threshold. The common amplitude
// profile rho_m of the two counter-rotating components obeys
//   d rho / dt = R(rho) rho - gamma rho
// with the saturated gain matrix
//   R_{m,q}(rho) = f_{m,q} g_{m+q},
//   g_j = gamma sigma alpha_j - kappa C_j(rho, rho),
// where C is the mismatch-weighted convolution. The steady state satisfies
// R(rho) rho = gamma rho, i.e. rho is an eigenvector of its own gain matrix.

#include <Eigen/Core>
#include <cstdint>

#include "spopo/comb.hpp"
#include "spopo/supermodes.hpp"

namespace spopo {

struct SteadyStateOptions {
  // Relaxation stage: RK4 on the classical equation from a small seed along
  // the leading supermode until the residual drops below relax_tol * gamma
  // * ||rho||, then Newton polishing to newton_tol (relative).
  double seed_scale = 1e-3;     // seed amplitude in units of sqrt(gamma/kappa)
  double relax_tol = 1e-8;
  int max_relax_steps = 200000;
  double newton_tol = 1e-12;
  int max_newton_steps = 50;
};

struct SteadyState {
  Eigen::VectorXd rho;      // size 2 n_side + 1; zero vector below threshold
  bool trivial = true;      // true when sigma <= threshold_sigma
  double residual = 0.0;    // ||R rho - gamma rho|| / (gamma ||rho||), 0 for trivial
  int relax_steps = 0;
  int newton_steps = 0;
};

// Saturated gain matrix R(rho) for real amplitudes.
Eigen::MatrixXd gain_matrix(const CombModel& model, const OpoParams& params,
                            const Eigen::VectorXd& rho);

// Right-hand side R(rho) rho - gamma rho.
Eigen::VectorXd classical_rhs(const CombModel& model, const OpoParams& params,
                              const Eigen::VectorXd& rho);

// Two-stage solve (relaxation, then Newton). Returns the trivial state when
// sigma <= threshold_sigma. Throws std::invalid_argument when kappa <= 0
// above threshold (the gain cannot saturate) and std::runtime_error when
// either stage fails to converge. The sign gauge makes the projection of
// rho onto the leading supermode positive.
SteadyState solve_steady_state(const CombModel& model,
                               const SupermodeBasis& basis,
                               const OpoParams& params,
                               const SteadyStateOptions& options = {});

// Integrates the classical equation from the given seed with fixed-step RK4
// over [0, t_final] and returns ||rho(t_final)|| / ||seed||. No threshold
// gate is applied; a ratio above 1 for a small seed indicates net gain.
// Useful for locating the oscillation onset dynamically.
double probe_seed_growth(const CombModel& model, const OpoParams& params,
                         const Eigen::VectorXd& seed, double t_final,
                         double dt);

struct PhaseLockReport {
  bool locked = false;
  double max_residual = 0.0;  // max on-manifold deviation relative to ||rho||
  double theta = 0.0;         // orientation angle reached by the test run
};

// Integrates the full complex classical dynamics from a randomly phased
// perturbation of the steady state and checks that the system settles onto
// the locked manifold s_{m,+} = rho_m exp(-i theta), s_{m,-} = rho_m
// exp(+i theta) for a common theta. locked is true when the residual stays
// below 1e-6 * ||rho||.
PhaseLockReport check_phase_locking(const CombModel& model,
                                    const OpoParams& params,
                                    const Eigen::VectorXd& rho,
                                    std::uint64_t seed = 1);

}  // namespace spopo
