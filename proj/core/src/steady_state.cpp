#include "spopo/steady_state.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "spopo/linear_model.hpp"
#include "spopo/positive_p.hpp"

namespace spopo {

namespace {

// Extended gain profile g_j = gamma sigma alpha_j - kappa C_j(rho, rho)
// over j in [-2 n_side, 2 n_side], stored at j + 2 n_side.
Eigen::VectorXd gain_profile(const CombModel& model, const OpoParams& params,
                             const Eigen::VectorXd& rho) {
  Eigen::VectorXd g = -params.kappa *
                      mismatch_convolution(model.mismatch, rho, rho);
  const int n2 = 2 * model.n_side;
  for (int j = -n2; j <= n2; ++j) {
    g[j + n2] += params.gamma * params.sigma * model.pump.at(j);
  }
  return g;
}

Eigen::VectorXd rk4_step(const CombModel& model, const OpoParams& params,
                         const Eigen::VectorXd& rho, double dt) {
  const Eigen::VectorXd k1 = classical_rhs(model, params, rho);
  const Eigen::VectorXd k2 =
      classical_rhs(model, params, rho + 0.5 * dt * k1);
  const Eigen::VectorXd k3 =
      classical_rhs(model, params, rho + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = classical_rhs(model, params, rho + dt * k3);
  return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Eigen::MatrixXd gain_matrix(const CombModel& model, const OpoParams& params,
                            const Eigen::VectorXd& rho) {
  const int m = model.modes();
  if (rho.size() != m) {
    throw std::invalid_argument("rho size does not match the comb");
  }
  const Eigen::VectorXd g = gain_profile(model, params, rho);
  Eigen::MatrixXd r(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      r(i, j) = model.mismatch(i, j) * g[i + j];
    }
  }
  return r;
}

Eigen::VectorXd classical_rhs(const CombModel& model, const OpoParams& params,
                              const Eigen::VectorXd& rho) {
  return gain_matrix(model, params, rho) * rho - params.gamma * rho;
}

SteadyState solve_steady_state(const CombModel& model,
                               const SupermodeBasis& basis,
                               const OpoParams& params,
                               const SteadyStateOptions& options) {
  validate(params);
  const int m = model.modes();
  SteadyState state;
  state.rho = Eigen::VectorXd::Zero(m);
  if (params.sigma <= basis.threshold_sigma) {
    return state;  // below (or at) threshold the cavity stays dark
  }
  if (params.kappa <= 0.0) {
    throw std::invalid_argument(
        "kappa must be positive above threshold: the gain cannot saturate");
  }
  state.trivial = false;

  // Relaxation from a small seed along the leading supermode. The step is
  // shortened with the pump so the strongest gain stays well resolved.
  const double gamma = params.gamma;
  const double ratio = params.sigma / basis.threshold_sigma;
  const double dt = 0.02 / (gamma * std::max(1.0, ratio));
  Eigen::VectorXd rho =
      options.seed_scale * std::sqrt(gamma / params.kappa) * basis.modes.col(0);
  bool relaxed = false;
  for (int step = 0; step < options.max_relax_steps; ++step) {
    rho = rk4_step(model, params, rho, dt);
    if (!rho.allFinite()) {
      throw std::runtime_error("steady-state relaxation diverged");
    }
    const double res = classical_rhs(model, params, rho).norm();
    if (res < options.relax_tol * gamma * rho.norm() && rho.norm() > 0.0) {
      relaxed = true;
      state.relax_steps = step + 1;
      break;
    }
  }
  if (!relaxed) {
    throw std::runtime_error("steady-state relaxation did not converge");
  }

  // Newton polishing on F(rho) = R(rho) rho - gamma rho with Jacobian
  // R + 2 T - gamma I.
  bool polished = false;
  for (int iter = 0; iter < options.max_newton_steps; ++iter) {
    const Eigen::VectorXd f = classical_rhs(model, params, rho);
    if (f.norm() <= options.newton_tol * gamma * rho.norm()) {
      polished = true;
      state.newton_steps = iter;
      break;
    }
    const Eigen::MatrixXd jac = gain_matrix(model, params, rho) +
                                2.0 * saturation_matrix(model, params, rho) -
                                gamma * Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd delta = jac.partialPivLu().solve(f);
    rho -= delta;
  }
  if (!polished) {
    throw std::runtime_error("steady-state Newton polish did not converge");
  }

  if (basis.modes.col(0).dot(rho) < 0.0) rho = -rho;
  state.rho = rho;
  state.residual =
      classical_rhs(model, params, rho).norm() / (gamma * rho.norm());
  return state;
}

double probe_seed_growth(const CombModel& model, const OpoParams& params,
                         const Eigen::VectorXd& seed, double t_final,
                         double dt) {
  validate(params);
  if (!(t_final > 0.0) || !(dt > 0.0)) {
    throw std::invalid_argument("probe horizon and step must be positive");
  }
  if (!(seed.norm() > 0.0)) {
    throw std::invalid_argument("probe seed must be nonzero");
  }
  const int n_steps = static_cast<int>(std::ceil(t_final / dt - 1e-9));
  const double h = t_final / n_steps;
  Eigen::VectorXd rho = seed;
  for (int i = 0; i < n_steps; ++i) {
    rho = rk4_step(model, params, rho, h);
  }
  return rho.norm() / seed.norm();
}

PhaseLockReport check_phase_locking(const CombModel& model,
                                    const OpoParams& params,
                                    const Eigen::VectorXd& rho,
                                    std::uint64_t seed) {
  using cd = std::complex<double>;
  const int m = model.modes();
  if (rho.size() != m || !(rho.norm() > 0.0)) {
    throw std::invalid_argument("phase locking needs a nontrivial rho");
  }

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
  const double theta0 = angle(gen);
  StateVec x = classical_state(rho, theta0);
  const double kick = 0.05 * rho.cwiseAbs().maxCoeff();
  for (int i = 0; i < 2 * m; ++i) {  // perturb the s sector
    x[i] += kick * cd(normal(gen), normal(gen));
  }
  for (int i = 0; i < 2 * m; ++i) {  // keep sp the conjugate copy
    x[2 * m + i] = std::conj(x[i]);
  }

  // Noiseless relaxation of the full complex dynamics.
  const double dt = 0.005 / params.gamma;
  const int n_steps = static_cast<int>(std::lround(40.0 / params.gamma / dt));
  for (int i = 0; i < n_steps; ++i) {
    const StateVec k1 = drift(model, params, x);
    const StateVec k2 = drift(model, params, x + 0.5 * dt * k1);
    const StateVec k3 = drift(model, params, x + 0.5 * dt * k2);
    const StateVec k4 = drift(model, params, x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  PhaseLockReport report;
  cd overlap = 0.0;
  for (int i = 0; i < m; ++i) overlap += rho[i] * x[i];
  report.theta = -std::arg(overlap);
  const StateVec target = classical_state(rho, report.theta);
  report.max_residual = (x - target).cwiseAbs().maxCoeff() / rho.norm();
  report.locked = report.max_residual < 1e-6;
  return report;
}

}  // namespace spopo
