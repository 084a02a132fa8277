#include "spopo/spectra.hpp"

#include <Eigen/Dense>
#include <complex>
#include <sstream>
#include <stdexcept>

namespace spopo {

double analytic_dark_y(double omega, double gamma) {
  const double x = omega / (2.0 * gamma);
  return 1.0 - 1.0 / (1.0 + x * x);
}

double analytic_dark_x(double omega, double gamma) {
  (void)omega;
  (void)gamma;
  return 1.0;
}

QuadraturePair analytic_supermode_variances(double mu, double omega,
                                            double gamma) {
  const double w2 = (omega / gamma) * (omega / gamma);
  QuadraturePair pair;
  pair.x = 1.0 + 4.0 * mu / ((1.0 - mu) * (1.0 - mu) + w2);
  pair.y = 1.0 - 4.0 * mu / ((1.0 + mu) * (1.0 + mu) + w2);
  return pair;
}

namespace {

Eigen::VectorXcd stacked(const Eigen::VectorXd& v, double s0, double s1,
                         double s2, double s3, std::complex<double> scale) {
  const int m = static_cast<int>(v.size());
  Eigen::VectorXcd q(4 * m);
  for (int i = 0; i < m; ++i) {
    q[i] = scale * s0 * v[i];
    q[m + i] = scale * s1 * v[i];
    q[2 * m + i] = scale * s2 * v[i];
    q[3 * m + i] = scale * s3 * v[i];
  }
  return q;
}

}  // namespace

Eigen::VectorXcd dark_y_vector(const LinearModel& lm) {
  if (lm.trivial()) {
    throw std::domain_error("dark quadratures need a nontrivial rho");
  }
  const double scale = 1.0 / (std::sqrt(2.0) * lm.rho.norm());
  return stacked(lm.rho, 1.0, -1.0, 1.0, -1.0, scale);
}

Eigen::VectorXcd dark_x_vector(const LinearModel& lm) {
  if (lm.trivial()) {
    throw std::domain_error("dark quadratures need a nontrivial rho");
  }
  const std::complex<double> scale(0.0, 1.0 / (std::sqrt(2.0) * lm.rho.norm()));
  return stacked(lm.rho, 1.0, -1.0, -1.0, 1.0, scale);
}

Eigen::VectorXcd supermode_x_vector(const SupermodeBasis& basis, int k) {
  if (k < 0 || k >= basis.eigenvalues.size()) {
    throw std::invalid_argument("supermode index out of range");
  }
  const std::complex<double> scale(0.0, 1.0 / std::sqrt(2.0));
  return stacked(basis.modes.col(k), 1.0, -1.0, -1.0, 1.0, scale);
}

Eigen::VectorXcd supermode_y_vector(const SupermodeBasis& basis, int k) {
  if (k < 0 || k >= basis.eigenvalues.size()) {
    throw std::invalid_argument("supermode index out of range");
  }
  return stacked(basis.modes.col(k), 1.0, -1.0, 1.0, -1.0,
                 1.0 / std::sqrt(2.0));
}

Eigen::VectorXd numeric_spectrum(const LinearModel& lm,
                                 const Eigen::VectorXcd& q,
                                 const Eigen::VectorXd& omegas,
                                 const SpectrumOptions& options) {
  const Eigen::Index dim = lm.A.rows();
  if (q.size() != dim) {
    throw std::invalid_argument("quadrature vector size does not match A");
  }
  const double gamma = lm.params.gamma;
  const double tol = options.zero_tol * gamma;

  // Stability gate. A is symmetric, so its spectrum is real.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lm.A,
                                                          Eigen::EigenvaluesOnly);
  const Eigen::VectorXd evals = es.eigenvalues();
  int near_zero = 0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] > tol) {
      std::ostringstream msg;
      msg << "linearized dynamics are unstable: eigenvalue " << evals[i]
          << " of the drift matrix is positive";
      throw std::runtime_error(msg.str());
    }
    if (std::abs(evals[i]) < tol) ++near_zero;
  }

  Eigen::MatrixXd a = lm.A;
  Eigen::VectorXcd qt = q;
  if (!lm.trivial()) {
    if (near_zero > 1) {
      std::ostringstream msg;
      msg << "linearized dynamics are unstable: " << near_zero
          << " drift eigenvalues sit at zero, expected only the orientation "
             "mode";
      throw std::runtime_error(msg.str());
    }
    // Deflate the orientation Goldstone mode: shift it to -gamma and drop
    // the quadrature's component along it. This is the co-rotating frame.
    Eigen::VectorXd u0(dim);
    u0 << lm.rho, -lm.rho, -lm.rho, lm.rho;
    const double u0_norm2 = u0.squaredNorm();
    a -= gamma * (u0 * u0.transpose()) / u0_norm2;
    const Eigen::VectorXcd u0c = u0.cast<std::complex<double>>();
    qt -= u0c * (u0c.transpose() * qt)(0) / u0_norm2;
  } else if (near_zero > 0) {
    std::ostringstream msg;
    msg << "linearized dynamics are unstable: a drift eigenvalue sits at "
           "zero for the trivial state";
    throw std::runtime_error(msg.str());
  }

  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  const Eigen::MatrixXcd dc = lm.D.cast<std::complex<double>>();
  const Eigen::MatrixXcd id =
      Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::VectorXd out(omegas.size());
  for (Eigen::Index i = 0; i < omegas.size(); ++i) {
    const std::complex<double> iw(0.0, omegas[i]);
    const Eigen::VectorXcd y_plus =
        (iw * id - ac).partialPivLu().solve(qt);
    const Eigen::VectorXcd y_minus =
        (-iw * id - ac).partialPivLu().solve(qt);
    // Plain transposes: S = y_+^T D y_-.
    const std::complex<double> s =
        (y_plus.transpose() * dc * y_minus)(0);
    out[i] = 1.0 + 2.0 * gamma * s.real();
  }
  return out;
}

}  // namespace spopo
