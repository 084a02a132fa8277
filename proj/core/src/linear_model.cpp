#include "spopo/linear_model.hpp"

#include <sstream>
#include <stdexcept>

#include "spopo/positive_p.hpp"

namespace spopo {

Eigen::MatrixXd saturation_matrix(const CombModel& model,
                                  const OpoParams& params,
                                  const Eigen::VectorXd& rho) {
  const int m_count = model.modes();
  if (rho.size() != m_count) {
    throw std::invalid_argument("rho size does not match the comb");
  }
  const int n = model.n_side;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m_count, m_count);
  for (int im = 0; im < m_count; ++im) {
    for (int in = 0; in < m_count; ++in) {
      double sum = 0.0;
      for (int iq = 0; iq < m_count; ++iq) {
        // downconverted partner index m + q - n must stay on the comb
        const int ip = im + iq - in;
        if (ip < 0 || ip >= m_count) continue;
        sum += model.mismatch(im, iq) * model.mismatch(in, ip) * rho[iq] *
               rho[ip];
      }
      t(im, in) = -params.kappa * sum;
    }
  }
  return t;
}

LinearModel build_linear_model(const CombModel& model, const OpoParams& params,
                               const Eigen::VectorXd& rho, double fd_tol) {
  validate(params);
  const int m = model.modes();
  if (rho.size() != m) {
    throw std::invalid_argument("rho size does not match the comb");
  }

  LinearModel lm;
  lm.n_side = model.n_side;
  lm.params = params;
  lm.rho = rho;
  lm.R = gain_matrix(model, params, rho);
  lm.T = saturation_matrix(model, params, rho);

  lm.L_full = Eigen::MatrixXd::Zero(4 * m, 4 * m);
  const auto place = [&](int bi, int bj, const Eigen::MatrixXd& block) {
    lm.L_full.block(bi * m, bj * m, m, m) = block;
  };
  place(0, 0, lm.T);
  place(0, 1, lm.T);
  place(0, 3, lm.R);
  place(1, 0, lm.T);
  place(1, 1, lm.T);
  place(1, 2, lm.R);
  place(2, 1, lm.R);
  place(2, 2, lm.T);
  place(2, 3, lm.T);
  place(3, 0, lm.R);
  place(3, 2, lm.T);
  place(3, 3, lm.T);
  lm.A = lm.L_full -
         params.gamma * Eigen::MatrixXd::Identity(4 * m, 4 * m);

  lm.D = Eigen::MatrixXd::Zero(4 * m, 4 * m);
  const auto place_d = [&](int bi, int bj) {
    lm.D.block(bi * m, bj * m, m, m) = lm.R;
  };
  place_d(0, 1);
  place_d(1, 0);
  place_d(2, 3);
  place_d(3, 2);

  // Guard the analytic blocks against the nonlinear drift itself. The drift
  // is holomorphic in the coordinates, so the complex Jacobian at the real
  // theta = 0 state is real and must equal A.
  const Eigen::MatrixXcd jac =
      numeric_jacobian(model, params, classical_state(rho, 0.0));
  const Eigen::MatrixXd diff = (jac - lm.A.cast<std::complex<double>>())
                                   .cwiseAbs();
  Eigen::Index wi = 0, wj = 0;
  const double worst = diff.maxCoeff(&wi, &wj);
  if (!(worst <= fd_tol)) {
    std::ostringstream msg;
    msg << "analytic linearization disagrees with the finite-difference "
           "Jacobian: entry ("
        << wi << ", " << wj << ") differs by " << worst;
    throw std::runtime_error(msg.str());
  }
  return lm;
}

Eigen::VectorXd goldstone_vector(const LinearModel& lm) {
  const int m = static_cast<int>(lm.rho.size());
  Eigen::VectorXd u(4 * m);
  u << lm.rho, -lm.rho, -lm.rho, lm.rho;
  return u;
}

Eigen::VectorXd damped_partner_vector(const LinearModel& lm) {
  const int m = static_cast<int>(lm.rho.size());
  Eigen::VectorXd u(4 * m);
  u << lm.rho, -lm.rho, lm.rho, -lm.rho;
  return u;
}

EigenIdentityReport verify_eigenrelation(const LinearModel& lm) {
  if (lm.trivial()) {
    throw std::domain_error(
        "eigenrelation checks are undefined for the trivial state");
  }
  const int m = static_cast<int>(lm.rho.size());
  const double gamma = lm.params.gamma;
  const double rho_norm = lm.rho.norm();

  EigenIdentityReport report;
  report.gain_residual =
      (lm.R * lm.rho - gamma * lm.rho).norm() / (gamma * rho_norm);

  Eigen::MatrixXd lv = -gamma * Eigen::MatrixXd::Identity(2 * m, 2 * m);
  lv.block(0, m, m, m) = lm.R;
  lv.block(m, 0, m, m) = lm.R;
  Eigen::VectorXd w1(2 * m);
  w1 << lm.rho, -lm.rho;
  report.dark_pair_residual =
      (lv * w1 + 2.0 * gamma * w1).norm() / (gamma * w1.norm());

  const Eigen::VectorXd u0 = goldstone_vector(lm);
  report.goldstone_residual = (lm.A * u0).norm() / (gamma * u0.norm());

  const double rho2 = rho_norm * rho_norm;
  const double quad = u0.dot(lm.D * u0);
  report.diffusion_residual =
      std::abs(quad + 4.0 * gamma * rho2) / (gamma * rho2);
  return report;
}

}  // namespace spopo
