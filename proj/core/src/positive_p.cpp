#include "spopo/positive_p.hpp"

#include <cmath>
#include <stdexcept>

namespace spopo {

using cd = std::complex<double>;

StateVec classical_state(const Eigen::VectorXd& rho, double theta) {
  const int m = static_cast<int>(rho.size());
  const cd minus = std::exp(cd(0.0, -theta));
  const cd plus = std::exp(cd(0.0, theta));
  StateVec x(4 * m);
  for (int i = 0; i < m; ++i) {
    x[i] = rho[i] * minus;
    x[m + i] = rho[i] * plus;
    x[2 * m + i] = rho[i] * plus;
    x[3 * m + i] = rho[i] * minus;
  }
  return x;
}

namespace {

// Saturated gain profile of one sector over j in [-2n, 2n], stored at
// j + 2n: G_j = gamma sigma alpha_j - kappa C_j(a, b).
Eigen::VectorXcd sector_gain(const CombModel& model, const OpoParams& params,
                             const Eigen::VectorXcd& a,
                             const Eigen::VectorXcd& b) {
  Eigen::VectorXcd g =
      -params.kappa * mismatch_convolution(model.mismatch, a, b);
  const int n2 = 2 * model.n_side;
  for (int j = -n2; j <= n2; ++j) {
    g[j + n2] += params.gamma * params.sigma * model.pump.at(j);
  }
  return g;
}

}  // namespace

StateVec drift(const CombModel& model, const OpoParams& params,
               const StateVec& x) {
  const int m = model.modes();
  if (x.size() != 4 * m) {
    throw std::invalid_argument("state size does not match the comb");
  }
  const Eigen::VectorXcd s_plus = x.segment(0, m);
  const Eigen::VectorXcd s_minus = x.segment(m, m);
  const Eigen::VectorXcd sp_plus = x.segment(2 * m, m);
  const Eigen::VectorXcd sp_minus = x.segment(3 * m, m);
  const Eigen::VectorXcd g = sector_gain(model, params, s_plus, s_minus);
  const Eigen::VectorXcd gp = sector_gain(model, params, sp_plus, sp_minus);

  StateVec a(4 * m);
  for (int im = 0; im < m; ++im) {
    cd sum_p = 0.0, sum_m = 0.0, sump_p = 0.0, sump_m = 0.0;
    for (int iq = 0; iq < m; ++iq) {
      const double f = model.mismatch(im, iq);
      const int jg = im + iq;  // (m + q) + 2 n_side
      sum_p += f * g[jg] * sp_minus[iq];
      sum_m += f * g[jg] * sp_plus[iq];
      sump_p += f * gp[jg] * s_minus[iq];
      sump_m += f * gp[jg] * s_plus[iq];
    }
    a[im] = -params.gamma * s_plus[im] + sum_p;
    a[m + im] = -params.gamma * s_minus[im] + sum_m;
    a[2 * m + im] = -params.gamma * sp_plus[im] + sump_p;
    a[3 * m + im] = -params.gamma * sp_minus[im] + sump_m;
  }
  return a;
}

Eigen::MatrixXcd numeric_jacobian(const CombModel& model,
                                  const OpoParams& params, const StateVec& x,
                                  double h) {
  const int dim = static_cast<int>(x.size());
  Eigen::MatrixXcd jac(dim, dim);
  StateVec xp = x, xm = x;
  for (int i = 0; i < dim; ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    jac.col(i) = (drift(model, params, xp) - drift(model, params, xm)) /
                 (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return jac;
}

Eigen::MatrixXcd diffusion_matrix(const CombModel& model,
                                  const OpoParams& params, const StateVec& x) {
  const int m = model.modes();
  if (x.size() != 4 * m) {
    throw std::invalid_argument("state size does not match the comb");
  }
  const Eigen::VectorXcd g =
      sector_gain(model, params, x.segment(0, m), x.segment(m, m));
  const Eigen::VectorXcd gp =
      sector_gain(model, params, x.segment(2 * m, m), x.segment(3 * m, m));
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4 * m, 4 * m);
  for (int sector = 0; sector < 2; ++sector) {
    const int base = sector * 2 * m;
    const Eigen::VectorXcd& gain = sector == 0 ? g : gp;
    for (int im = 0; im < m; ++im) {
      for (int iq = 0; iq < m; ++iq) {
        const cd n_mq = model.mismatch(im, iq) * gain[im + iq];
        d(base + im, base + m + iq) = n_mq;
        d(base + m + iq, base + im) = n_mq;
      }
    }
  }
  return d;
}

int noise_dimension(int n_modes, NoiseMode mode) {
  const int m2 = n_modes * n_modes;
  return mode == NoiseMode::reduced ? 4 * m2 : 8 * m2;
}

namespace {

// Shared block walk: visits every noise block in increment order and hands
// the callback the two affected rows and the column scale c.
template <typename Fn>
void for_each_noise_block(const CombModel& model, const OpoParams& params,
                          const StateVec& x_eval, NoiseMode mode, Fn&& fn) {
  const int m = model.modes();
  const Eigen::VectorXcd g = sector_gain(model, params, x_eval.segment(0, m),
                                         x_eval.segment(m, m));
  const Eigen::VectorXcd gp = sector_gain(
      model, params, x_eval.segment(2 * m, m), x_eval.segment(3 * m, m));
  const int n_l = mode == NoiseMode::verbatim ? 2 : 1;
  for (int sector = 0; sector < 2; ++sector) {
    const int base = sector * 2 * m;
    const Eigen::VectorXcd& gain = sector == 0 ? g : gp;
    for (int im = 0; im < m; ++im) {
      for (int iq = 0; iq < m; ++iq) {
        const cd n_mq = model.mismatch(im, iq) * gain[im + iq];
        for (int il = 0; il < n_l; ++il) {
          // il = 0 is l = +; rows are (m, l) and (q, -l).
          const int row_m = base + il * m + im;
          const int row_q = base + (1 - il) * m + iq;
          const cd c = mode == NoiseMode::verbatim
                           ? 0.5 * std::sqrt(n_mq)
                           : std::sqrt(0.5 * n_mq);
          fn(row_m, row_q, c);
        }
      }
    }
  }
}

}  // namespace

Eigen::MatrixXcd noise_matrix(const CombModel& model, const OpoParams& params,
                              const StateVec& x, NoiseMode mode) {
  const int m = model.modes();
  Eigen::MatrixXcd b =
      Eigen::MatrixXcd::Zero(4 * m, noise_dimension(m, mode));
  int col = 0;
  for_each_noise_block(model, params, x, mode,
                       [&](int row_m, int row_q, cd c) {
                         b(row_m, col) += c;
                         b(row_q, col) += c;
                         b(row_m, col + 1) += c * cd(0.0, 1.0);
                         b(row_q, col + 1) += c * cd(0.0, -1.0);
                         col += 2;
                       });
  return b;
}

void apply_noise(const CombModel& model, const OpoParams& params,
                 const StateVec& x_eval, StateVec& x,
                 std::span<const double> dw, NoiseMode mode) {
  const int m = model.modes();
  if (static_cast<int>(dw.size()) != noise_dimension(m, mode)) {
    throw std::invalid_argument("wrong number of noise increments");
  }
  std::size_t k = 0;
  for_each_noise_block(model, params, x_eval, mode,
                       [&](int row_m, int row_q, cd c) {
                         const double w1 = dw[k];
                         const double w2 = dw[k + 1];
                         k += 2;
                         x[row_m] += c * cd(w1, w2);
                         x[row_q] += c * cd(w1, -w2);
                       });
}

StepResult step(const CombModel& model, const OpoParams& params, StateVec& x,
                double dt, std::span<const double> dw, Stepper stepper,
                NoiseMode mode, const StepOptions& options) {
  StepResult result;
  const StateVec x_pre = x;
  if (stepper == Stepper::euler_maruyama) {
    x += dt * drift(model, params, x_pre);
  } else {
    // Drift-implicit midpoint: x_mid = x + (dt/2) A(x_mid) by fixed-point
    // iteration, noise still explicit at the pre-step state.
    StateVec x_mid = x_pre;
    bool converged = false;
    for (int it = 1; it <= options.max_fixed_point_iters; ++it) {
      const StateVec next =
          x_pre + (0.5 * dt) * drift(model, params, x_mid);
      const double delta = (next - x_mid).norm();
      x_mid = next;
      result.fixed_point_iters = it;
      if (delta <= options.fixed_point_tol * std::max(1.0, x_mid.norm())) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      x_mid = x_pre + (0.5 * dt) * drift(model, params, x_pre);
      result.fixed_point_fallback = true;
    }
    x += dt * drift(model, params, x_mid);
  }
  apply_noise(model, params, x_pre, x, dw, mode);
  return result;
}

}  // namespace spopo
