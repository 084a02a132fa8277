#pragma once

// Squeezing spectra of quadrature observables in the linearized model.
// For a quadrature Q = q^T c the measured normalized variance is
//   V(omega) = 1 + 2 gamma Re S_Q(omega),
//   S_Q(omega) = y_+^T D y_-,  y_pm = ((+-i omega) I - A)^(-1) q,
// using plain (non-conjugating) transposes throughout. Above threshold the
// orientation Goldstone mode is deflated first: A -> A - gamma u0 u0^T /
// |u0|^2 and q -> q - u0 (u0^T q) / |u0|^2. Undamped orientation diffusion
// then no longer enters the stationary spectrum, which corresponds to
// measuring in the frame co-rotating with the lobe orientation.

#include <Eigen/Core>
#include <complex>

#include "spopo/linear_model.hpp"
#include "spopo/supermodes.hpp"

namespace spopo {

// Dark-mode quadrature variances of the co-rotating linearized theory:
//   V_Y(omega) = 1 - 1 / (1 + (omega / 2 gamma)^2),  V_X == 1.
double analytic_dark_y(double omega, double gamma);
double analytic_dark_x(double omega, double gamma);

// Below-threshold quadrature variances for a supermode with gain parameter
// mu = sigma * Lambda_k:
//   V_pm(omega) = 1 +- 4 mu / ((1 -+ mu)^2 + (omega / gamma)^2).
// first = amplified (X), second = squeezed (Y).
struct QuadraturePair {
  double x = 0.0;
  double y = 0.0;
};
QuadraturePair analytic_supermode_variances(double mu, double omega,
                                            double gamma);

// Quadrature direction vectors (size 4M).
// Above threshold (nontrivial rho):
//   dark Y: u1 / (sqrt(2) |rho|)
//   dark X: i u0 / (sqrt(2) |rho|)
// Throws std::domain_error for the trivial state.
Eigen::VectorXcd dark_y_vector(const LinearModel& lm);
Eigen::VectorXcd dark_x_vector(const LinearModel& lm);
// Any state, supermode k of the basis:
//   X: (i / sqrt(2)) (v_k, -v_k, -v_k,  v_k)
//   Y: (1 / sqrt(2)) (v_k, -v_k,  v_k, -v_k)
Eigen::VectorXcd supermode_x_vector(const SupermodeBasis& basis, int k);
Eigen::VectorXcd supermode_y_vector(const SupermodeBasis& basis, int k);

struct SpectrumOptions {
  // Stability gate: largest eigenvalue of A must lie below
  // zero_tol * gamma; above threshold exactly one eigenvalue may sit in
  // (-zero_tol * gamma, zero_tol * gamma) for the Goldstone mode.
  double zero_tol = 1e-6;
};

// Evaluates V(omega) on a frequency grid. Throws std::runtime_error naming
// the offending eigenvalue when the linearization is not stable (e.g. the
// trivial state above threshold).
Eigen::VectorXd numeric_spectrum(const LinearModel& lm,
                                 const Eigen::VectorXcd& q,
                                 const Eigen::VectorXd& omegas,
                                 const SpectrumOptions& options = {});

}  // namespace spopo
