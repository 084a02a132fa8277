#include "spopo/supermodes.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace spopo {

SupermodeBasis decompose(const Eigen::MatrixXd& coupling) {
  if (coupling.size() == 0) {
    throw std::invalid_argument("coupling matrix is empty");
  }
  if (coupling.rows() != coupling.cols()) {
    throw std::invalid_argument("coupling matrix must be square");
  }
  if (!coupling.allFinite()) {
    throw std::invalid_argument("coupling matrix must be finite");
  }
  const double scale = std::max(coupling.cwiseAbs().maxCoeff(), 1.0);
  if ((coupling - coupling.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * scale) {
    throw std::invalid_argument("coupling matrix must be symmetric");
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(coupling);
  if (solver.info() != Eigen::Success) {
    throw std::invalid_argument("eigendecomposition failed");
  }
  const Eigen::VectorXd raw_values = solver.eigenvalues();
  const Eigen::MatrixXd raw_vectors = solver.eigenvectors();

  const int m = static_cast<int>(raw_values.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(raw_values[a]);
    const double mb = std::abs(raw_values[b]);
    if (ma != mb) return ma > mb;
    // magnitude tie: the positive eigenvalue first
    return raw_values[a] > raw_values[b];
  });

  SupermodeBasis basis;
  basis.eigenvalues.resize(m);
  basis.modes.resize(m, m);
  for (int k = 0; k < m; ++k) {
    basis.eigenvalues[k] = raw_values[order[k]];
    Eigen::VectorXd v = raw_vectors.col(order[k]);
    const double vmax = v.cwiseAbs().maxCoeff();
    for (int i = 0; i < m; ++i) {
      if (std::abs(v[i]) > 1e-12 * vmax) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    basis.modes.col(k) = v;
  }

  basis.threshold_sigma = basis.eigenvalues[0] > 0.0
                              ? 1.0 / basis.eigenvalues[0]
                              : std::numeric_limits<double>::infinity();
  return basis;
}

}  // namespace spopo
