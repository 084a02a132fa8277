#pragma once

// Estimators applied to trajectory ensembles: lobe-orientation tracking,
// its diffusion law, and spectra of the dark quadratures measured in the
// co-rotating frame.

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "spopo/ensemble.hpp"

namespace spopo {

// Maps an angle to (-pi, pi].
double wrap_angle(double angle);

struct ThetaEstimate {
  double theta = 0.0;
  // Set when a sector product falls below (1e-6 ||rho||^2)^2, or the two
  // sector phasors cancel, so the angle carries no information.
  bool degenerate = false;
};

// Orientation estimate from the doubled-angle sector products
//   z1 = (sum_m rho_m s_{m,-})  conj(sum_m rho_m s_{m,+}),
//   z2 = (sum_m rho_m sp_{m,+}) conj(sum_m rho_m sp_{m,-}),
//   theta = arg(z1/|z1| + z2/|z2|) / 2, in (-pi/2, pi/2].
// Exact modulo pi on the locked manifold. Each sector alone also responds
// to the damped dark-pair fluctuation, which would rotate the squeezed
// quadrature into the frame angle; that component enters the two sectors
// with opposite sign and cancels from the combination, leaving the pure
// orientation. Throws std::domain_error when ||rho|| = 0.
ThetaEstimate estimate_theta(const Eigen::VectorXd& rho, const StateVec& x);

struct UnwrapResult {
  Eigen::VectorXd theta;  // continuous series, theta[0] = wrapped[0]
  // Steps whose doubled-angle increment exceeded pi/2 in magnitude; the
  // small-step assumption is unreliable there.
  int flagged_steps = 0;
};

// Unwraps an orientation series. The estimator determines theta only up
// to multiples of pi (it halves a difference of two arguments), so the
// unwrap operates on the doubled angle: each increment of 2 theta is
// mapped to (-pi, pi] and halved, which removes the spurious half-turn
// hops a direct unwrap would keep.
UnwrapResult unwrap_phase_series(const Eigen::VectorXd& wrapped);

struct DarkQuadratures {
  std::complex<double> x;
  std::complex<double> y;
};

// Dark-mode quadratures in the frame rotated by theta:
//   s_d  = ( i / (sqrt(2)|rho|)) sum_n rho_n (e^{ i theta} s_{n,+}  - e^{-i theta} s_{n,-})
//   sp_d = (-i / (sqrt(2)|rho|)) sum_n rho_n (e^{-i theta} sp_{n,+} - e^{ i theta} sp_{n,-})
//   X = sp_d + s_d,  Y = i (sp_d - s_d).
// sp_d carries the conjugated frame phases (it stands for the conjugate
// amplitude), which makes both quadratures vanish identically on the
// locked manifold at every theta. Plain products; in this representation
// equal-time moments estimate normally ordered expectations, e.g.
// <Y^2> -> -1/2 for the dark mode.
DarkQuadratures dark_quadratures(const Eigen::VectorXd& rho, const StateVec& x,
                                 double theta);

// Mean lagged products out[j] = mean_t x_t x_{t+j} for j = 0..n_lags,
// each lag averaged over its own (n - j) pairs. Throws when
// n_lags >= series size.
Eigen::VectorXcd correlogram(const Eigen::VectorXcd& series, int n_lags);

// Two-sided lag-windowed spectral estimate evaluated at each omega:
//   S(omega) = dtau (w_0 c_0 + 2 sum_{j>=1} w_j c_j cos(omega j dtau)),
//   w_j = (1 + cos(pi j / L)) / 2  (Hann lag window, L = corr.size() - 1),
// reported as the normalized variance V = 1 + 2 gamma Re S.
Eigen::VectorXd spectrum_from_correlogram(const Eigen::VectorXcd& corr,
                                          double dtau,
                                          const Eigen::VectorXd& omegas,
                                          double gamma);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

// Weighted least squares for y = intercept + slope * t.
LineFit weighted_line_fit(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights);

// Accumulates the orientation diffusion law V_theta(t) = Var(theta(t) -
// theta(0)) over an ensemble and fits its slope, expected at
// gamma / (4 |rho|^2). accumulate may be called concurrently for records
// of different chunks (sequentially within a chunk); finalize afterwards.
class PhaseDiffusionAnalysis {
 public:
  PhaseDiffusionAnalysis(Eigen::VectorXd rho, Eigen::VectorXd save_times,
                         int n_chunks);

  void accumulate(const TrajectoryRecord& record);

  struct Result {
    Eigen::VectorXd t;
    Eigen::VectorXd variance;
    Eigen::VectorXd variance_err;  // jackknife standard error per time
    double slope = 0.0;
    double slope_err = 0.0;
    double intercept = 0.0;
    double predicted_slope = 0.0;
    int n_used = 0;
    double flag_rate = 0.0;
  };

  // Fits over save times >= fit_t_min with weights 1 / variance^2 and
  // jackknifes the slope over kJackknifeBlocks chunk blocks. Throws
  // std::runtime_error when fewer than 100 trajectories survived or when
  // more than 1 percent of unwrap steps were flagged.
  Result finalize(double gamma, double fit_t_min) const;

 private:
  struct ChunkPartial {
    long count = 0;
    long flagged = 0;
    long degenerate = 0;
    long steps = 0;
    Eigen::VectorXd sum;
    Eigen::VectorXd sum_sq;
  };

  Eigen::VectorXd rho_;
  Eigen::VectorXd save_times_;
  std::vector<ChunkPartial> chunks_;
};

enum class QuadratureChannel { dark_y, dark_x };

struct HomodyneOptions {
  QuadratureChannel channel = QuadratureChannel::dark_y;
  double transient = 0.0;    // saves before this time are discarded
  double window_time = 0.0;  // lag window length; <= 0 selects 8 / gamma
  int decimate = 1;          // use every decimate-th save of the segment
  double min_segment = 50.0; // required stationary span in units of 1/gamma
};

// Per-trajectory correlogram estimator of a dark-quadrature spectrum. The
// frame angle is re-estimated at every used save and unwrapped, so the
// quadratures co-rotate with the lobe. Same threading contract as
// PhaseDiffusionAnalysis.
class HomodyneAnalysis {
 public:
  HomodyneAnalysis(Eigen::VectorXd rho, Eigen::VectorXd save_times,
                   int n_chunks, double gamma, HomodyneOptions options);

  void accumulate(const TrajectoryRecord& record);

  struct Result {
    Eigen::VectorXd omega;
    Eigen::VectorXd variance;
    Eigen::VectorXd variance_err;  // jackknife standard error per frequency
    std::complex<double> equal_time = 0.0;  // mean of Q^2 over the segment
    double equal_time_err = 0.0;
    int n_used = 0;
  };

  // Throws std::runtime_error when fewer than 100 trajectories survived or
  // when the two segment halves disagree in mean square beyond 3 standard
  // errors (stationarity check).
  Result finalize(const Eigen::VectorXd& omegas) const;

  double sample_spacing() const { return dtau_; }
  int lags() const { return n_lags_; }

 private:
  struct ChunkPartial {
    long count = 0;
    Eigen::VectorXcd corr_sum;
    std::complex<double> half_diff_sum = 0.0;
    double half_diff_sq_sum = 0.0;
  };

  Eigen::VectorXd rho_;
  Eigen::VectorXd save_times_;
  double gamma_ = 1.0;
  HomodyneOptions options_;
  std::vector<int> used_saves_;
  double dtau_ = 0.0;
  int n_lags_ = 0;
  std::vector<ChunkPartial> chunks_;
};

}  // namespace spopo
