#pragma once

// Frequency-comb model for a degenerate parametric oscillator with two
// counter-rotating transverse components. Comb teeth are indexed by
// m in [-n_side, n_side]; arrays store index m at position m + n_side.
// Pairwise sums m + q live in [-2 n_side, 2 n_side] and are stored at
// position m + q + 2 n_side in "extended" arrays.

#include <Eigen/Core>

namespace spopo {

// Loss rate gamma, nonlinear saturation strength kappa and pump rate sigma
// (sigma is measured in units of the oscillation threshold of a lossless
// reference mode, i.e. the gain term enters as gamma * sigma).
struct OpoParams {
  double gamma = 1.0;
  double kappa = 1.0;
  double sigma = 0.0;
};

// Throws std::invalid_argument unless gamma > 0, kappa >= 0, sigma >= 0
// and all three are finite.
void validate(const OpoParams& params);

enum class PumpKind { monochromatic, gaussian, sech2 };

// Real pump amplitude envelope alpha_m, m in [-n_side, n_side], normalized
// so that sum_m alpha_m^2 == 1 (enforced to 1e-12 by the builders).
struct PumpSpectrum {
  int n_side = 0;
  Eigen::VectorXd alpha;  // size 2 * n_side + 1

  int size() const { return static_cast<int>(alpha.size()); }
  // alpha_{j} for any integer j; zero outside [-n_side, n_side].
  double at(int j) const {
    return (j >= -n_side && j <= n_side) ? alpha[j + n_side] : 0.0;
  }
};

// Builds a normalized pump envelope.
//   monochromatic: alpha_m = delta_{m,0} (width is ignored)
//   gaussian:      alpha_m proportional to exp(-m^2 / (2 width^2))
//   sech2:         alpha_m proportional to sech(m / width)^2
// Throws std::invalid_argument for n_side < 0 or, for the shaped kinds,
// width <= 0.
PumpSpectrum build_pump_spectrum(int n_side, PumpKind kind, double width = 1.0);

// Normalizes an explicit amplitude vector of size 2 * n_side + 1.
// Throws std::invalid_argument on size mismatch, non-finite entries or an
// all-zero vector.
PumpSpectrum build_pump_spectrum(int n_side, const Eigen::VectorXd& amplitudes);

enum class MismatchKind { perfect, quadratic };

// Phase-mismatch reduction factor f_{m,q}, a symmetric (2n+1) x (2n+1)
// matrix with f in [-1, 1].
//   perfect:   f == 1 everywhere (u, v, w ignored)
//   quadratic: f = sinc(phi) with
//              phi_{m,q} = u (m+q) + v (m+q)^2 - w (m^2 + q^2)
// sinc(x) = sin(x) / x with sinc(0) = 1.
Eigen::MatrixXd build_mismatch(int n_side, MismatchKind kind, double u = 0.0,
                               double v = 0.0, double w = 0.0);

// Validates an explicit mismatch matrix (square of size 2 n_side + 1,
// symmetric to 1e-12, entries finite and |f| <= 1 + 1e-12).
Eigen::MatrixXd build_mismatch(int n_side, const Eigen::MatrixXd& values);

// Parametric coupling matrix L_{m,q} = f_{m,q} * alpha_{m+q}; the pump
// envelope vanishes outside its comb, so entries with |m + q| > n_side
// are zero. Symmetric because f is symmetric and alpha depends on m + q.
Eigen::MatrixXd build_coupling_matrix(const PumpSpectrum& pump,
                                      const Eigen::MatrixXd& mismatch);

// A comb model bundles the three ingredients above.
struct CombModel {
  int n_side = 0;
  PumpSpectrum pump;
  Eigen::MatrixXd mismatch;  // f_{m,q}
  Eigen::MatrixXd coupling;  // L_{m,q}

  int modes() const { return 2 * n_side + 1; }
};

CombModel make_comb_model(const PumpSpectrum& pump,
                          const Eigen::MatrixXd& mismatch);

// Mismatch-weighted convolution
//   out_j = sum_n f_{n, j-n} a_n b_{j-n},  j in [-2 n_side, 2 n_side],
// with both n and j - n restricted to [-n_side, n_side]. The result has
// size 4 n_side + 1 and stores index j at position j + 2 n_side.
Eigen::VectorXd mismatch_convolution(const Eigen::MatrixXd& mismatch,
                                     const Eigen::VectorXd& a,
                                     const Eigen::VectorXd& b);
Eigen::VectorXcd mismatch_convolution(const Eigen::MatrixXd& mismatch,
                                      const Eigen::VectorXcd& a,
                                      const Eigen::VectorXcd& b);

}  // namespace spopo
