#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "spopo/comb.hpp"
#include "spopo/linear_model.hpp"
#include "spopo/spectra.hpp"
#include "spopo/steady_state.hpp"
#include "spopo/supermodes.hpp"

using namespace spopo;

namespace {

struct Solved {
  CombModel model;
  SupermodeBasis basis;
  OpoParams params;
  SteadyState state;
  LinearModel lm;
};

Solved solve_gaussian(int n_side, MismatchKind kind, double ratio) {
  const PumpSpectrum pump =
      build_pump_spectrum(n_side, PumpKind::gaussian, 2.0);
  const Eigen::MatrixXd f = (kind == MismatchKind::perfect)
                                ? build_mismatch(n_side, kind)
                                : build_mismatch(n_side, kind, 0.1, 0.05, 0.02);
  Solved out{make_comb_model(pump, f), {}, {1.0, 1.0, 0.0}, {}, {}};
  out.basis = decompose(out.model.coupling);
  out.params.sigma = ratio * out.basis.threshold_sigma;
  out.state = solve_steady_state(out.model, out.basis, out.params);
  out.lm = build_linear_model(out.model, out.params, out.state.rho);
  return out;
}

}  // namespace

TEST_CASE("single-mode blocks reduce to scalars") {
  const Solved s = solve_gaussian(0, MismatchKind::perfect, 2.0);
  REQUIRE(s.lm.R.rows() == 1);
  // At sigma = 2 the locked amplitude is 1, so R = gamma and T = -kappa.
  CHECK(std::abs(s.lm.R(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(s.lm.T(0, 0) + 1.0) < 1e-10);
  REQUIRE(s.lm.A.rows() == 4);
  CHECK((s.lm.A - s.lm.A.transpose()).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("stability matrix assembles the documented block pattern") {
  const Solved s = solve_gaussian(2, MismatchKind::quadratic, 1.7);
  const int m = s.lm.n_side * 2 + 1;
  const Eigen::MatrixXd& L = s.lm.L_full;
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(m, m);
  auto block = [&](int i, int j) { return L.block(i * m, j * m, m, m); };
  CHECK((block(0, 0) - s.lm.T).norm() < 1e-14);
  CHECK((block(0, 1) - s.lm.T).norm() < 1e-14);
  CHECK((block(0, 2) - Z).norm() == 0.0);
  CHECK((block(0, 3) - s.lm.R).norm() < 1e-14);
  CHECK((block(1, 2) - s.lm.R).norm() < 1e-14);
  CHECK((block(2, 1) - s.lm.R).norm() < 1e-14);
  CHECK((block(3, 0) - s.lm.R).norm() < 1e-14);
  CHECK((block(2, 2) - s.lm.T).norm() < 1e-14);
  const Eigen::MatrixXd expected_a =
      L - s.params.gamma * Eigen::MatrixXd::Identity(4 * m, 4 * m);
  CHECK((s.lm.A - expected_a).norm() == 0.0);
  CHECK((s.lm.T - s.lm.T.transpose()).lpNorm<Eigen::Infinity>() < 1e-13);

  // Noise matrix: off-diagonal R blocks within each sector pair.
  const Eigen::MatrixXd& D = s.lm.D;
  CHECK((D.block(0, 0, m, m) - Z).norm() == 0.0);
  CHECK((D.block(0, m, m, m) - s.lm.R).norm() < 1e-14);
  CHECK((D.block(m, 0, m, m) - s.lm.R).norm() < 1e-14);
  CHECK((D.block(0, 2 * m, 2 * m, 2 * m)).norm() == 0.0);
  CHECK((D.block(2 * m, 3 * m, m, m) - s.lm.R).norm() < 1e-14);
}

TEST_CASE("below threshold the gain block is the pumped coupling") {
  const PumpSpectrum pump = build_pump_spectrum(2, PumpKind::gaussian, 2.0);
  const CombModel model =
      make_comb_model(pump, build_mismatch(2, MismatchKind::perfect));
  const OpoParams params{1.0, 1.0, 0.4};
  const Eigen::VectorXd rho = Eigen::VectorXd::Zero(5);
  const LinearModel lm = build_linear_model(model, params, rho);
  CHECK(lm.trivial());
  CHECK(lm.T.norm() == 0.0);
  CHECK((lm.R - params.gamma * params.sigma * model.coupling).norm() < 1e-14);
  CHECK_THROWS_AS(verify_eigenrelation(lm), std::domain_error);
}

TEST_CASE("steady states satisfy the locked-eigenvector identities") {
  for (double ratio : {1.2, 2.0, 5.0}) {
    const Solved s = solve_gaussian(2, MismatchKind::perfect, ratio);
    const EigenIdentityReport report = verify_eigenrelation(s.lm);
    CHECK(report.gain_residual < 1e-10);
    CHECK(report.dark_pair_residual < 1e-10);
    CHECK(report.goldstone_residual < 1e-10);
    CHECK(report.diffusion_residual < 1e-10);

    const Eigen::VectorXd u0 = goldstone_vector(s.lm);
    const Eigen::VectorXd u1 = damped_partner_vector(s.lm);
    CHECK((s.lm.A * u0).norm() < 1e-9 * s.params.gamma * u0.norm());
    CHECK((s.lm.A * u1 + 2.0 * s.params.gamma * u1).norm() <
          1e-9 * s.params.gamma * u1.norm());
    const double norm_sq = s.state.rho.squaredNorm();
    CHECK(std::abs(u0.dot(s.lm.D * u0) + 4.0 * s.params.gamma * norm_sq) <
          1e-9 * s.params.gamma * norm_sq);
    CHECK(std::abs(u1.dot(s.lm.D * u1) + 4.0 * s.params.gamma * norm_sq) <
          1e-9 * s.params.gamma * norm_sq);
  }
}

TEST_CASE("identity report flags states that are not steady") {
  const Solved s = solve_gaussian(1, MismatchKind::perfect, 2.0);
  Eigen::VectorXd rho = s.state.rho;
  rho[0] += 0.3 * rho.norm();
  const LinearModel lm = build_linear_model(s.model, s.params, rho);
  const EigenIdentityReport report = verify_eigenrelation(lm);
  CHECK(report.gain_residual > 1e-3);
}

TEST_CASE("dark quadrature spectra match the closed forms above threshold") {
  const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(41, 0.0, 10.0);
  for (double ratio : {1.2, 2.0, 5.0}) {
    const Solved s = solve_gaussian(2, MismatchKind::quadratic, ratio);
    const Eigen::VectorXd vy =
        numeric_spectrum(s.lm, dark_y_vector(s.lm), omegas);
    const Eigen::VectorXd vx =
        numeric_spectrum(s.lm, dark_x_vector(s.lm), omegas);
    for (int i = 0; i < omegas.size(); ++i) {
      CHECK(std::abs(vy[i] - analytic_dark_y(omegas[i], s.params.gamma)) <
            1e-8);
      CHECK(std::abs(vx[i] - analytic_dark_x(omegas[i], s.params.gamma)) <
            1e-8);
    }
    CHECK(vy[0] < 1e-8);          // perfect suppression at zero frequency
    CHECK(std::abs(vy[vy.size() - 1] - (1.0 - 1.0 / 26.0)) < 1e-8);
  }
}

TEST_CASE("below threshold the leading pair is minimum uncertainty") {
  const PumpSpectrum pump = build_pump_spectrum(2, PumpKind::gaussian, 2.0);
  const CombModel model =
      make_comb_model(pump, build_mismatch(2, MismatchKind::perfect));
  const SupermodeBasis basis = decompose(model.coupling);
  const OpoParams params{1.0, 1.0, 0.5 * basis.threshold_sigma};
  const LinearModel lm =
      build_linear_model(model, params, Eigen::VectorXd::Zero(5));

  const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(21, 0.0, 6.0);
  const double mu = params.sigma * basis.eigenvalues[0];
  REQUIRE(std::abs(mu - 0.5) < 1e-12);
  const Eigen::VectorXd vx =
      numeric_spectrum(lm, supermode_x_vector(basis, 0), omegas);
  const Eigen::VectorXd vy =
      numeric_spectrum(lm, supermode_y_vector(basis, 0), omegas);
  for (int i = 0; i < omegas.size(); ++i) {
    const QuadraturePair a =
        analytic_supermode_variances(mu, omegas[i], params.gamma);
    CHECK(std::abs(vx[i] - a.x) < 1e-10);
    CHECK(std::abs(vy[i] - a.y) < 1e-10);
    CHECK(std::abs(vx[i] * vy[i] - 1.0) < 1e-9);
  }
  CHECK(std::abs(vy[0] - 1.0 / 9.0) < 1e-10);
  CHECK(std::abs(vx[0] - 9.0) < 1e-10);
}

TEST_CASE("orientation quadrature is shot noise after deflation") {
  const Solved s = solve_gaussian(2, MismatchKind::perfect, 2.0);
  const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(11, 0.0, 8.0);
  const Eigen::VectorXcd q =
      std::complex<double>(0.0, 1.0) * goldstone_vector(s.lm).cast<std::complex<double>>() /
      (std::sqrt(2.0) * s.state.rho.norm());
  const Eigen::VectorXd v = numeric_spectrum(s.lm, q, omegas);
  for (int i = 0; i < v.size(); ++i) {
    CHECK(std::abs(v[i] - 1.0) < 1e-10);
  }
}

TEST_CASE("spectrum refuses an unstable trivial state") {
  const PumpSpectrum pump = build_pump_spectrum(1, PumpKind::gaussian, 2.0);
  const CombModel model =
      make_comb_model(pump, build_mismatch(1, MismatchKind::perfect));
  const SupermodeBasis basis = decompose(model.coupling);
  const OpoParams params{1.0, 1.0, 1.5 * basis.threshold_sigma};
  const LinearModel lm =
      build_linear_model(model, params, Eigen::VectorXd::Zero(3));
  const Eigen::VectorXd omegas = Eigen::VectorXd::Constant(1, 0.0);
  CHECK_THROWS_AS(
      numeric_spectrum(lm, supermode_y_vector(basis, 0), omegas),
      std::runtime_error);
}

TEST_CASE("supermode quadrature vectors follow the sector pattern") {
  const PumpSpectrum pump = build_pump_spectrum(1, PumpKind::gaussian, 2.0);
  const CombModel model =
      make_comb_model(pump, build_mismatch(1, MismatchKind::perfect));
  const SupermodeBasis basis = decompose(model.coupling);
  const Eigen::VectorXd v = basis.modes.col(0);
  const Eigen::VectorXcd qx = supermode_x_vector(basis, 0);
  const Eigen::VectorXcd qy = supermode_y_vector(basis, 0);
  const double inv = 1.0 / std::sqrt(2.0);
  const std::complex<double> im(0.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(qx[i] - im * inv * v[i]) < 1e-15);
    CHECK(std::abs(qx[3 + i] + im * inv * v[i]) < 1e-15);
    CHECK(std::abs(qx[6 + i] + im * inv * v[i]) < 1e-15);
    CHECK(std::abs(qx[9 + i] - im * inv * v[i]) < 1e-15);
    CHECK(std::abs(qy[i] - inv * v[i]) < 1e-15);
    CHECK(std::abs(qy[3 + i] + inv * v[i]) < 1e-15);
    CHECK(std::abs(qy[6 + i] - inv * v[i]) < 1e-15);
    CHECK(std::abs(qy[9 + i] + inv * v[i]) < 1e-15);
  }
}
