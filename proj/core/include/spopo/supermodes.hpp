#pragma once

// Eigenmodes of the symmetric coupling matrix. Each eigenpair (Lambda_k, v_k)
// describes a pump-defined superposition of comb teeth that experiences
// parametric gain gamma * sigma * Lambda_k; the first supermode therefore
// sets the oscillation threshold sigma_th = 1 / Lambda_0.

#include <Eigen/Core>

namespace spopo {

struct SupermodeBasis {
  // Sorted by descending |Lambda|; ties between +x and -x put +x first.
  Eigen::VectorXd eigenvalues;
  // Orthonormal eigenvectors as columns, in the same order. The sign of
  // each column is fixed so that its first component with magnitude above
  // 1e-12 times the column max-norm is positive.
  Eigen::MatrixXd modes;
  // 1 / eigenvalues[0] when eigenvalues[0] > 0, +infinity otherwise.
  double threshold_sigma = 0.0;
};

// Decomposes a coupling matrix. Throws std::invalid_argument if the input
// is empty, non-square, non-finite or not symmetric (tolerance 1e-12
// relative to the max-norm).
SupermodeBasis decompose(const Eigen::MatrixXd& coupling);

}  // namespace spopo
