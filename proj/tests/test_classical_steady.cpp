#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "spopo/comb.hpp"
#include "spopo/field_profile.hpp"
#include "spopo/steady_state.hpp"
#include "spopo/supermodes.hpp"

using namespace spopo;

namespace {

CombModel single_mode_model() {
  return make_comb_model(build_pump_spectrum(0, PumpKind::monochromatic),
                         build_mismatch(0, MismatchKind::perfect));
}

CombModel gaussian_model(int n_side, MismatchKind kind) {
  const PumpSpectrum pump =
      build_pump_spectrum(n_side, PumpKind::gaussian, 2.0);
  const Eigen::MatrixXd f = (kind == MismatchKind::perfect)
                                ? build_mismatch(n_side, kind)
                                : build_mismatch(n_side, kind, 0.1, 0.05, 0.02);
  return make_comb_model(pump, f);
}

}  // namespace

TEST_CASE("single-mode amplitude follows the saturation law") {
  const CombModel model = single_mode_model();
  const SupermodeBasis basis = decompose(model.coupling);
  const double triples[][3] = {{1.0, 1.0, 2.0},
                               {0.31, 2.7, 1.45},
                               {4.2, 0.08, 5.6},
                               {0.9, 0.9, 1.02}};
  for (const auto& triple : triples) {
    const OpoParams params{triple[0], triple[1], triple[2]};
    const SteadyState state = solve_steady_state(model, basis, params);
    REQUIRE_FALSE(state.trivial);
    const double expected =
        params.gamma * (params.sigma - 1.0) / params.kappa;
    CHECK(std::abs(state.rho[0] * state.rho[0] / expected - 1.0) < 1e-10);
    CHECK(state.rho[0] > 0.0);
    CHECK(state.residual <= 1e-12);
  }
}

TEST_CASE("states at or below threshold are trivial") {
  const CombModel model = gaussian_model(2, MismatchKind::perfect);
  const SupermodeBasis basis = decompose(model.coupling);
  for (double ratio : {0.3, 0.9, 1.0}) {
    const OpoParams params{1.0, 1.0, ratio * basis.threshold_sigma};
    const SteadyState state = solve_steady_state(model, basis, params);
    CHECK(state.trivial);
    CHECK(state.rho.norm() == 0.0);
  }
}

TEST_CASE("multimode steady state satisfies the gain eigenrelation") {
  for (MismatchKind kind : {MismatchKind::perfect, MismatchKind::quadratic}) {
    const CombModel model = gaussian_model(2, kind);
    const SupermodeBasis basis = decompose(model.coupling);
    for (double ratio : {1.2, 2.0, 5.0}) {
      const OpoParams params{1.0, 1.0, ratio * basis.threshold_sigma};
      const SteadyState state = solve_steady_state(model, basis, params);
      REQUIRE_FALSE(state.trivial);

      const Eigen::MatrixXd gain = gain_matrix(model, params, state.rho);
      const double residual = (gain * state.rho - params.gamma * state.rho)
                                  .norm() /
                              (params.gamma * state.rho.norm());
      CHECK(residual < 1e-12);
      // Sign gauge: positive overlap with the leading supermode.
      CHECK(basis.modes.col(0).dot(state.rho) > 0.0);
    }
  }
}

TEST_CASE("saturation requires a positive kappa above threshold") {
  const CombModel model = single_mode_model();
  const SupermodeBasis basis = decompose(model.coupling);
  CHECK_THROWS_AS(
      solve_steady_state(model, basis, OpoParams{1.0, 0.0, 2.0}),
      std::invalid_argument);
}

TEST_CASE("classical rhs matches the gain matrix form") {
  const CombModel model = gaussian_model(2, MismatchKind::quadratic);
  const OpoParams params{1.3, 0.7, 2.1};
  Eigen::VectorXd rho(5);
  rho << 0.4, -0.1, 0.9, 0.3, -0.2;
  const Eigen::VectorXd rhs = classical_rhs(model, params, rho);
  const Eigen::VectorXd expected =
      gain_matrix(model, params, rho) * rho - params.gamma * rho;
  CHECK((rhs - expected).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("seed growth probe brackets the oscillation onset") {
  const CombModel model = single_mode_model();
  const OpoParams below{1.0, 1.0, 0.7};
  const OpoParams above{1.0, 1.0, 1.3};
  Eigen::VectorXd seed(1);
  seed << 1e-8;
  CHECK(probe_seed_growth(model, below, seed, 4.0, 0.02) < 1.0);
  CHECK(probe_seed_growth(model, above, seed, 4.0, 0.02) > 1.0);

  // With no pump the probe decays at the bare loss rate.
  const OpoParams off{1.0, 1.0, 0.0};
  const double ratio = probe_seed_growth(model, off, seed, 2.0, 0.01);
  CHECK(std::abs(ratio / std::exp(-2.0) - 1.0) < 1e-8);
}

TEST_CASE("random perturbations relock the orientation manifold") {
  const CombModel model = gaussian_model(1, MismatchKind::perfect);
  const SupermodeBasis basis = decompose(model.coupling);
  const OpoParams params{1.0, 1.0, 2.0 * basis.threshold_sigma};
  const SteadyState state = solve_steady_state(model, basis, params);
  const PhaseLockReport report =
      check_phase_locking(model, params, state.rho, 7);
  CHECK(report.locked);
  CHECK(report.max_residual < 1e-6);
}

TEST_CASE("ring field is a running wave in one transverse lobe") {
  Eigen::VectorXd rho(1);
  rho << 1.3;
  FieldScales scales;  // waist 1, omega0 1, k0 1
  const double r = 0.8, phi = 0.4, z = 2.3, t = 1.7, theta = 0.3;
  const double value = field_value(rho, theta, CavityGeometry::ring, scales, r,
                                   phi, z, t);
  const double profile = std::sqrt(8.0 / 3.14159265358979323846) * r *
                         std::exp(-r * r) * std::cos(phi - theta);
  const double expected =
      profile * rho[0] * std::sin(scales.k0 * z - scales.omega0 * t);
  CHECK(std::abs(value - expected) < 1e-12);
}

TEST_CASE("linear cavity field uses standing waves") {
  Eigen::VectorXd rho(1);
  rho << 0.9;
  FieldScales scales;
  const double r = 1.1, phi = -0.2, z = 5.0, t = 0.6;
  const double value = field_value(rho, 0.0, CavityGeometry::fabry_perot,
                                   scales, r, phi, z, t);
  const double standing =
      std::sin(scales.k0 * (z + scales.cavity_length / 2.0));
  const double expected = transverse_profile(r, phi, scales.waist) * rho[0] *
                          standing * -std::sin(scales.omega0 * t);
  CHECK(std::abs(value - expected) < 1e-12);
}

TEST_CASE("field vanishes on the nodal line and on axis") {
  Eigen::VectorXd rho(1);
  rho << 1.0;
  FieldScales scales;
  const double theta = 0.7;
  const double half_pi = 3.14159265358979323846 / 2.0;
  for (double z : {0.0, 1.0, 40.0}) {
    CHECK(std::abs(field_value(rho, theta, CavityGeometry::ring, scales, 1.0,
                               theta + half_pi, z, 0.3)) < 1e-12);
    CHECK(std::abs(field_value(rho, theta, CavityGeometry::ring, scales, 0.0,
                               0.0, z, 0.3)) < 1e-12);
  }
  // The lobe peaks at r = waist / sqrt(2).
  const double peak = transverse_profile(1.0 / std::sqrt(2.0), 0.0, 1.0);
  CHECK(peak > transverse_profile(0.5, 0.0, 1.0));
  CHECK(peak > transverse_profile(1.0, 0.0, 1.0));
}

TEST_CASE("field sampling covers the tensor grid in order") {
  Eigen::VectorXd rho(1);
  rho << 1.0;
  FieldScales scales;
  FieldGrid grid;
  grid.r = Eigen::VectorXd::LinSpaced(2, 0.5, 1.0);
  grid.phi = Eigen::VectorXd::LinSpaced(3, 0.0, 2.0);
  grid.z = Eigen::VectorXd::LinSpaced(2, 0.0, 3.0);
  grid.t = Eigen::VectorXd::Zero(1);
  const Eigen::MatrixXd rows =
      sample_field(rho, 0.0, CavityGeometry::ring, scales, grid);
  REQUIRE(rows.rows() == 12);
  REQUIRE(rows.cols() == 5);
  // r varies fastest.
  CHECK(rows(0, 0) == 0.5);
  CHECK(rows(1, 0) == 1.0);
  CHECK(rows(1, 1) == 0.0);
  CHECK(rows(2, 1) == doctest::Approx(1.0));
  const double direct = field_value(rho, 0.0, CavityGeometry::ring, scales,
                                    rows(5, 0), rows(5, 1), rows(5, 2),
                                    rows(5, 3));
  CHECK(rows(5, 4) == doctest::Approx(direct).epsilon(1e-14));
}
