#include "spopo/field_profile.hpp"

#include <cmath>
#include <stdexcept>

namespace spopo {

double transverse_profile(double r, double phi, double waist) {
  if (!(waist > 0.0)) {
    throw std::invalid_argument("waist must be positive");
  }
  const double w2 = waist * waist;
  return std::sqrt(8.0 / 3.14159265358979323846) / w2 * r *
         std::exp(-r * r / w2) * std::cos(phi);
}

double field_value(const Eigen::VectorXd& rho, double theta,
                   CavityGeometry geometry, const FieldScales& scales,
                   double r, double phi, double z, double t) {
  const int n = static_cast<int>(rho.size() - 1) / 2;
  if (rho.size() != 2 * n + 1) {
    throw std::invalid_argument("rho must have odd length");
  }
  const double profile = transverse_profile(r, phi - theta, scales.waist);
  double sum = 0.0;
  for (int m = -n; m <= n; ++m) {
    const double k_m = scales.k0 + m * scales.dk;
    const double omega_m = scales.omega0 + m * scales.comb_spacing;
    // Im of the longitudinal mode times exp(-i omega_m t).
    double longitudinal;
    if (geometry == CavityGeometry::ring) {
      longitudinal = std::sin(k_m * z - omega_m * t);
    } else {
      longitudinal = -std::sin(k_m * (z + 0.5 * scales.cavity_length)) *
                     std::sin(omega_m * t);
    }
    sum += rho[m + n] * longitudinal;
  }
  return profile * sum;
}

Eigen::MatrixXd sample_field(const Eigen::VectorXd& rho, double theta,
                             CavityGeometry geometry,
                             const FieldScales& scales, const FieldGrid& grid) {
  const Eigen::Index rows =
      grid.r.size() * grid.phi.size() * grid.z.size() * grid.t.size();
  if (rows == 0) {
    throw std::invalid_argument("field grid has an empty axis");
  }
  Eigen::MatrixXd out(rows, 5);
  Eigen::Index row = 0;
  for (Eigen::Index it = 0; it < grid.t.size(); ++it) {
    for (Eigen::Index iz = 0; iz < grid.z.size(); ++iz) {
      for (Eigen::Index ip = 0; ip < grid.phi.size(); ++ip) {
        for (Eigen::Index ir = 0; ir < grid.r.size(); ++ir) {
          out(row, 0) = grid.r[ir];
          out(row, 1) = grid.phi[ip];
          out(row, 2) = grid.z[iz];
          out(row, 3) = grid.t[it];
          out(row, 4) = field_value(rho, theta, geometry, scales, grid.r[ir],
                                    grid.phi[ip], grid.z[iz], grid.t[it]);
          ++row;
        }
      }
    }
  }
  return out;
}

}  // namespace spopo
