#include "spopo/comb.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace spopo {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(x) / x;
}

PumpSpectrum normalized(int n_side, Eigen::VectorXd alpha) {
  const double norm = alpha.norm();
  if (!(norm > 0.0) || !alpha.allFinite()) {
    throw std::invalid_argument("pump amplitudes must be finite and not all zero");
  }
  alpha /= norm;
  PumpSpectrum pump;
  pump.n_side = n_side;
  pump.alpha = std::move(alpha);
  return pump;
}

}  // namespace

void validate(const OpoParams& params) {
  if (!(std::isfinite(params.gamma) && params.gamma > 0.0)) {
    throw std::invalid_argument("gamma must be finite and positive");
  }
  if (!(std::isfinite(params.kappa) && params.kappa >= 0.0)) {
    throw std::invalid_argument("kappa must be finite and non-negative");
  }
  if (!(std::isfinite(params.sigma) && params.sigma >= 0.0)) {
    throw std::invalid_argument("sigma must be finite and non-negative");
  }
}

PumpSpectrum build_pump_spectrum(int n_side, PumpKind kind, double width) {
  if (n_side < 0) throw std::invalid_argument("n_side must be non-negative");
  const int m = 2 * n_side + 1;
  Eigen::VectorXd alpha(m);
  switch (kind) {
    case PumpKind::monochromatic:
      alpha.setZero();
      alpha[n_side] = 1.0;
      break;
    case PumpKind::gaussian: {
      if (!(width > 0.0)) {
        throw std::invalid_argument("gaussian pump width must be positive");
      }
      for (int i = 0; i < m; ++i) {
        const double tooth = i - n_side;
        alpha[i] = std::exp(-tooth * tooth / (2.0 * width * width));
      }
      break;
    }
    case PumpKind::sech2: {
      if (!(width > 0.0)) {
        throw std::invalid_argument("sech2 pump width must be positive");
      }
      for (int i = 0; i < m; ++i) {
        const double c = std::cosh((i - n_side) / width);
        alpha[i] = 1.0 / (c * c);
      }
      break;
    }
  }
  return normalized(n_side, std::move(alpha));
}

PumpSpectrum build_pump_spectrum(int n_side,
                                 const Eigen::VectorXd& amplitudes) {
  if (n_side < 0) throw std::invalid_argument("n_side must be non-negative");
  if (amplitudes.size() != 2 * n_side + 1) {
    throw std::invalid_argument(
        "pump amplitude vector must have 2 n_side + 1 entries, got " +
        std::to_string(amplitudes.size()));
  }
  return normalized(n_side, amplitudes);
}

Eigen::MatrixXd build_mismatch(int n_side, MismatchKind kind, double u,
                               double v, double w) {
  if (n_side < 0) throw std::invalid_argument("n_side must be non-negative");
  const int m = 2 * n_side + 1;
  Eigen::MatrixXd f(m, m);
  if (kind == MismatchKind::perfect) {
    f.setOnes();
    return f;
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double mm = i - n_side;
      const double qq = j - n_side;
      const double s = mm + qq;
      const double phi = u * s + v * s * s - w * (mm * mm + qq * qq);
      f(i, j) = sinc(phi);
    }
  }
  return f;
}

Eigen::MatrixXd build_mismatch(int n_side, const Eigen::MatrixXd& values) {
  const int m = 2 * n_side + 1;
  if (values.rows() != m || values.cols() != m) {
    throw std::invalid_argument("mismatch matrix must be square of size 2 n_side + 1");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("mismatch matrix must be finite");
  }
  const double scale = std::max(values.cwiseAbs().maxCoeff(), 1.0);
  if ((values - values.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("mismatch matrix must be symmetric");
  }
  if (values.cwiseAbs().maxCoeff() > 1.0 + 1e-12) {
    throw std::invalid_argument("mismatch entries must lie in [-1, 1]");
  }
  return values;
}

Eigen::MatrixXd build_coupling_matrix(const PumpSpectrum& pump,
                                      const Eigen::MatrixXd& mismatch) {
  const int m = pump.size();
  if (mismatch.rows() != m || mismatch.cols() != m) {
    throw std::invalid_argument("pump and mismatch sizes disagree");
  }
  Eigen::MatrixXd coupling(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      coupling(i, j) =
          mismatch(i, j) * pump.at(i - pump.n_side + j - pump.n_side);
    }
  }
  return coupling;
}

CombModel make_comb_model(const PumpSpectrum& pump,
                          const Eigen::MatrixXd& mismatch) {
  CombModel model;
  model.n_side = pump.n_side;
  model.pump = pump;
  model.mismatch = build_mismatch(pump.n_side, mismatch);
  model.coupling = build_coupling_matrix(pump, model.mismatch);
  return model;
}

namespace {

template <typename Vec>
Vec convolve(const Eigen::MatrixXd& mismatch, const Vec& a, const Vec& b) {
  const int m = static_cast<int>(a.size());
  if (b.size() != m || mismatch.rows() != m || mismatch.cols() != m) {
    throw std::invalid_argument("convolution operand sizes disagree");
  }
  Vec out = Vec::Zero(2 * m - 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      // index sum (i - n) + (j - n) lands at position i + j in the
      // extended array of size 4 n + 1
      out[i + j] += mismatch(i, j) * a[i] * b[j];
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd mismatch_convolution(const Eigen::MatrixXd& mismatch,
                                     const Eigen::VectorXd& a,
                                     const Eigen::VectorXd& b) {
  return convolve(mismatch, a, b);
}

Eigen::VectorXcd mismatch_convolution(const Eigen::MatrixXd& mismatch,
                                      const Eigen::VectorXcd& a,
                                      const Eigen::VectorXcd& b) {
  return convolve(mismatch, a, b);
}

}  // namespace spopo
