#pragma once

// Phase-space stochastic model of the intracavity signal dynamics in the
// doubled (off-diagonal coherent) representation. A configuration holds
// two independent complex fields per comb tooth and rotation component:
//
//   x = [ s_{m,+}  (M entries, m ascending)
//         s_{m,-}  (M entries)
//         sp_{m,+} (M entries)
//         sp_{m,-} (M entries) ],  M = 2 n_side + 1.
//
// sp is an independent copy that averages to the conjugate field; the pair
// (s, sp) is not constrained to be conjugate along a single trajectory.
//
// Drift (per tooth m, with C the mismatch-weighted convolution):
//   G_j(s)   = gamma sigma alpha_j - kappa C_j(s_+, s_-)
//   Gp_j(sp) = gamma sigma alpha_j - kappa C_j(sp_+, sp_-)
//   A_{m,+}  = -gamma s_{m,+}  + sum_q f_{m,q} G_{m+q}(s)  sp_{q,-}
//   A_{m,-}  = -gamma s_{m,-}  + sum_q f_{m,q} G_{m+q}(s)  sp_{q,+}
//   Ap_{m,+} = -gamma sp_{m,+} + sum_q f_{m,q} Gp_{m+q}(sp) s_{q,-}
//   Ap_{m,-} = -gamma sp_{m,-} + sum_q f_{m,q} Gp_{m+q}(sp) s_{q,+}
//
// Diffusion: within the s sector, D couples opposite rotation components,
//   D_{(m,l),(q,-l)} = N_{m,q}(s) = f_{m,q} G_{m+q}(s),
// and likewise in the sp sector with Gp. There is no cross-sector noise.

#include <Eigen/Core>
#include <complex>
#include <span>

#include "spopo/comb.hpp"

namespace spopo {

using StateVec = Eigen::VectorXcd;  // size 4 * (2 n_side + 1)

// Locked-manifold configuration s_{m,+} = rho_m exp(-i theta),
// s_{m,-} = rho_m exp(+i theta), sp = conjugate values.
StateVec classical_state(const Eigen::VectorXd& rho, double theta);

// Drift vector A(x).
StateVec drift(const CombModel& model, const OpoParams& params,
               const StateVec& x);

// Centered-difference Jacobian of the drift, column i obtained from real
// perturbations of coordinate i. The drift is polynomial in the
// coordinates, so this equals the analytic Jacobian up to O(h^2).
Eigen::MatrixXcd numeric_jacobian(const CombModel& model,
                                  const OpoParams& params, const StateVec& x,
                                  double h = 1e-5);

// Full 4M x 4M diffusion matrix D(x) (complex symmetric, block diagonal
// over the s and sp sectors).
Eigen::MatrixXcd diffusion_matrix(const CombModel& model,
                                  const OpoParams& params, const StateVec& x);

// Explicit noise factorizations B with B B^T = D (plain transpose).
// Both modes build B from 2-column blocks: the block for (m, q, l) has
// rows (m, l) = c (1, i) and (q, -l) = c (1, -i), all other rows zero.
// Such a block feeds 2 c^2 into D_{(m,l),(q,-l)} and nothing into the
// diagonal, so the block scale fixes the mode:
//   verbatim: one block per ordered pair (m, q) and per l in {+, -};
//             each coupling is covered twice, so c = sqrt(N_{m,q}) / 2.
//             Column count 4 M^2 per sector.
//   reduced:  blocks with l = + only, each coupling covered once,
//             c = sqrt(N_{m,q} / 2). Column count 2 M^2 per sector,
//             exactly half the noises, same B B^T.
// Square roots of the complex block weights use the principal branch.
enum class NoiseMode { reduced, verbatim };

// Number of real Wiener increments consumed per step (both sectors).
int noise_dimension(int n_modes, NoiseMode mode);

// Materializes B (4M x noise_dimension); intended for verification, the
// steppers use apply_noise instead.
Eigen::MatrixXcd noise_matrix(const CombModel& model, const OpoParams& params,
                              const StateVec& x, NoiseMode mode);

// Adds B(x_eval) * dw to x in place without materializing B. dw holds the
// real Wiener increments (variance dt per entry for a step of size dt) in
// block order: s sector first, then sp, each looping m ascending, q
// ascending, l = + then - (verbatim) or l = + only (reduced). Throws
// std::invalid_argument when dw.size() != noise_dimension.
void apply_noise(const CombModel& model, const OpoParams& params,
                 const StateVec& x_eval, StateVec& x,
                 std::span<const double> dw, NoiseMode mode);

enum class Stepper { euler_maruyama, semi_implicit_midpoint };

struct StepOptions {
  int max_fixed_point_iters = 20;
  double fixed_point_tol = 1e-12;
};

struct StepResult {
  int fixed_point_iters = 0;
  bool fixed_point_fallback = false;
};

// One Ito step of size dt. The noise coefficient is evaluated at the
// pre-step state in both schemes; the midpoint scheme makes only the drift
// implicit, solving x_mid = x + (dt/2) A(x_mid) by fixed-point iteration
// (falling back to the explicit midpoint when it fails to contract).
StepResult step(const CombModel& model, const OpoParams& params, StateVec& x,
                double dt, std::span<const double> dw, Stepper stepper,
                NoiseMode mode, const StepOptions& options = {});

}  // namespace spopo
