#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "spopo/comb.hpp"

using namespace spopo;

namespace {

// Reference values below were computed independently with 64-bit floats
// and are frozen; the builders must reproduce them, not the other way
// around.
constexpr double kGaussN2W2[5] = {0.33422053208036295, 0.4862880047660552,
                                  0.5510365003456089, 0.4862880047660552,
                                  0.33422053208036295};
constexpr double kSech2N1W1[3] = {0.3610878536568716, 0.8597855103936954,
                                  0.3610878536568716};
constexpr double kGaussN8W2Center = 0.5311259662561981;
constexpr double kGaussN8W2Next = 0.46871702010334515;
constexpr double kSinc155 = 0.6450217833479723;

}  // namespace

TEST_CASE("monochromatic pump is a single center tooth") {
  const PumpSpectrum pump = build_pump_spectrum(2, PumpKind::monochromatic);
  REQUIRE(pump.alpha.size() == 5);
  Eigen::VectorXd expected(5);
  expected << 0, 0, 1, 0, 0;
  CHECK((pump.alpha - expected).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(build_pump_spectrum(0, PumpKind::monochromatic).alpha[0] == 1.0);
}

TEST_CASE("very wide gaussian approaches the flat comb") {
  const PumpSpectrum pump = build_pump_spectrum(1, PumpKind::gaussian, 1e8);
  const double flat = 1.0 / std::sqrt(3.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(pump.alpha[i] == doctest::Approx(flat).epsilon(1e-13));
  }
}

TEST_CASE("gaussian envelope reproduces frozen values") {
  const PumpSpectrum pump = build_pump_spectrum(2, PumpKind::gaussian, 2.0);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(pump.alpha[i] - kGaussN2W2[i]) < 1e-14);
  }
  const PumpSpectrum wide = build_pump_spectrum(8, PumpKind::gaussian, 2.0);
  CHECK(std::abs(wide.alpha[8] - kGaussN8W2Center) < 1e-14);
  CHECK(std::abs(wide.alpha[9] - kGaussN8W2Next) < 1e-14);
  CHECK(std::abs(wide.alpha[7] - kGaussN8W2Next) < 1e-14);
}

TEST_CASE("sech2 envelope reproduces frozen values") {
  const PumpSpectrum pump = build_pump_spectrum(1, PumpKind::sech2, 1.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(pump.alpha[i] - kSech2N1W1[i]) < 1e-14);
  }
}

TEST_CASE("pump envelopes are unit normalized") {
  for (int n : {0, 1, 3, 8}) {
    for (double w : {0.5, 2.0, 7.5}) {
      CHECK(std::abs(build_pump_spectrum(n, PumpKind::gaussian, w)
                         .alpha.squaredNorm() -
                     1.0) < 1e-12);
      CHECK(std::abs(
                build_pump_spectrum(n, PumpKind::sech2, w).alpha.squaredNorm() -
                1.0) < 1e-12);
    }
    CHECK(std::abs(build_pump_spectrum(n, PumpKind::monochromatic)
                       .alpha.squaredNorm() -
                   1.0) < 1e-12);
  }
}

TEST_CASE("explicit pump amplitudes are normalized and validated") {
  Eigen::VectorXd raw(3);
  raw << 3.0, 0.0, -4.0;
  const PumpSpectrum pump = build_pump_spectrum(1, raw);
  CHECK(pump.alpha[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(pump.alpha[2] == doctest::Approx(-0.8).epsilon(1e-14));

  CHECK_THROWS_AS(build_pump_spectrum(2, raw), std::invalid_argument);
  CHECK_THROWS_AS(build_pump_spectrum(1, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
  Eigen::VectorXd bad(3);
  bad << 1.0, std::nan(""), 0.0;
  CHECK_THROWS_AS(build_pump_spectrum(1, bad), std::invalid_argument);
}

TEST_CASE("pump argument validation") {
  CHECK_THROWS_AS(build_pump_spectrum(-1, PumpKind::monochromatic),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_pump_spectrum(2, PumpKind::gaussian, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_pump_spectrum(2, PumpKind::sech2, -1.0),
                  std::invalid_argument);
}

TEST_CASE("out-of-comb pump samples read as zero") {
  const PumpSpectrum pump = build_pump_spectrum(1, PumpKind::gaussian, 1e8);
  CHECK(pump.at(2) == 0.0);
  CHECK(pump.at(-2) == 0.0);
  CHECK(pump.at(0) == pump.alpha[1]);
}

TEST_CASE("perfect mismatch is all ones") {
  const Eigen::MatrixXd f = build_mismatch(2, MismatchKind::perfect);
  CHECK(f.rows() == 5);
  CHECK((f.array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic mismatch matches the sinc law") {
  // u = pi puts the (1, 0) pair exactly on the first sinc zero.
  const Eigen::MatrixXd fpi =
      build_mismatch(1, MismatchKind::quadratic, 3.14159265358979323846);
  CHECK(std::abs(fpi(2, 1)) < 1e-12);
  CHECK(fpi(1, 1) == 1.0);  // m + q = 0 and w = 0: phi = 0

  const Eigen::MatrixXd f =
      build_mismatch(2, MismatchKind::quadratic, 0.3, 0.1, 0.05);
  // (m, q) = (1, 2): phi = 0.3 * 3 + 0.1 * 9 - 0.05 * 5 = 1.55.
  CHECK(std::abs(f(3, 4) - kSinc155) < 1e-14);
  CHECK((f - f.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("explicit mismatch is validated") {
  Eigen::MatrixXd good = Eigen::MatrixXd::Constant(3, 3, 0.5);
  CHECK(build_mismatch(1, good)(0, 0) == 0.5);

  Eigen::MatrixXd asym = good;
  asym(0, 1) = 0.9;
  CHECK_THROWS_AS(build_mismatch(1, asym), std::invalid_argument);

  Eigen::MatrixXd large = good;
  large(1, 1) = 1.5;
  CHECK_THROWS_AS(build_mismatch(1, large), std::invalid_argument);
  CHECK_THROWS_AS(build_mismatch(2, good), std::invalid_argument);
}

TEST_CASE("coupling matrix samples the pump at tooth sums") {
  // Monochromatic pump: only m + q = 0 couples, i.e. the exchange matrix.
  const PumpSpectrum mono = build_pump_spectrum(1, PumpKind::monochromatic);
  const Eigen::MatrixXd f = build_mismatch(1, MismatchKind::perfect);
  const Eigen::MatrixXd ex = build_coupling_matrix(mono, f);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
  expected(0, 2) = expected(1, 1) = expected(2, 0) = 1.0;
  CHECK((ex - expected).cwiseAbs().maxCoeff() == 0.0);

  // Flat pump: corners with |m + q| = 2 fall outside the comb.
  const PumpSpectrum flat = build_pump_spectrum(1, PumpKind::gaussian, 1e8);
  const Eigen::MatrixXd l = build_coupling_matrix(flat, f);
  CHECK(l(0, 0) == 0.0);
  CHECK(l(2, 2) == 0.0);
  CHECK(l(0, 1) == doctest::Approx(flat.alpha[0]).epsilon(1e-15));
  CHECK((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("comb model bundles consistent pieces") {
  const PumpSpectrum pump = build_pump_spectrum(2, PumpKind::gaussian, 2.0);
  const Eigen::MatrixXd f =
      build_mismatch(2, MismatchKind::quadratic, 0.1, 0.05, 0.02);
  const CombModel model = make_comb_model(pump, f);
  CHECK(model.n_side == 2);
  CHECK(model.modes() == 5);
  CHECK(model.coupling(2, 2) == doctest::Approx(pump.alpha[2] * f(2, 2)));

  const Eigen::MatrixXd wrong = build_mismatch(1, MismatchKind::perfect);
  CHECK_THROWS_AS(make_comb_model(pump, wrong), std::invalid_argument);
}

TEST_CASE("mismatch convolution matches the direct double loop") {
  const int n = 2;
  const Eigen::MatrixXd f =
      build_mismatch(n, MismatchKind::quadratic, 0.2, 0.03, 0.01);
  Eigen::VectorXcd a(2 * n + 1), b(2 * n + 1);
  a << std::complex<double>(0.3, -1.1), std::complex<double>(0.7, 0.2),
      std::complex<double>(-0.4, 0.9), std::complex<double>(1.2, 0.1),
      std::complex<double>(0.05, -0.6);
  b << std::complex<double>(-0.8, 0.3), std::complex<double>(0.1, 1.4),
      std::complex<double>(0.6, -0.2), std::complex<double>(-1.0, 0.5),
      std::complex<double>(0.9, 0.7);

  const Eigen::VectorXcd got = mismatch_convolution(f, a, b);
  REQUIRE(got.size() == 4 * n + 1);
  for (int j = -2 * n; j <= 2 * n; ++j) {
    std::complex<double> want = 0.0;
    for (int nn = -n; nn <= n; ++nn) {
      const int other = j - nn;
      if (other < -n || other > n) continue;
      want += f(nn + n, other + n) * a[nn + n] * b[other + n];
    }
    CHECK(std::abs(got[j + 2 * n] - want) < 1e-14);
  }

  // Unit vectors pick out a single mismatch entry.
  Eigen::VectorXd ea = Eigen::VectorXd::Zero(5), eb = Eigen::VectorXd::Zero(5);
  ea[3] = 1.0;  // m = 1
  eb[1] = 1.0;  // q = -1
  const Eigen::VectorXd single = mismatch_convolution(f, ea, eb);
  for (int j = -4; j <= 4; ++j) {
    const double want = (j == 0) ? f(3, 1) : 0.0;
    CHECK(std::abs(single[j + 4] - want) == 0.0);
  }
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(validate(OpoParams{1.0, 0.0, 2.0}));
  CHECK_THROWS_AS(validate(OpoParams{0.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(OpoParams{-1.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(OpoParams{1.0, -0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(OpoParams{1.0, 1.0, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(validate(OpoParams{1.0, 1.0, std::nan("")}),
                  std::invalid_argument);
}
