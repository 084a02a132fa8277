#pragma once

// Real-space reconstruction of the signal field emitted by the locked
// state. The transverse part is a first-order Hermite-Gauss lobe rotated
// by the orientation angle theta; the longitudinal part is a comb sum
//   F(z, t) = sum_m rho_m Im{ u_m(z) exp(-i omega_m t) }
// with u_m(z) = exp(i k_m z) for a ring cavity and
// u_m(z) = sin(k_m (z + cavity_length / 2)) for a linear (Fabry-Perot)
// cavity. All scales here are display conventions, not dynamical inputs.

#include <Eigen/Core>

namespace spopo {

enum class CavityGeometry { ring, fabry_perot };

struct FieldScales {
  double waist = 1.0;          // transverse mode waist w_s
  double omega0 = 1.0;         // carrier frequency of tooth m = 0
  double comb_spacing = 0.05;  // free spectral range Omega
  double k0 = 1.0;             // carrier wavenumber (c = 1 convention)
  double dk = 0.05;            // wavenumber step per tooth
  double cavity_length = 2.0 * 3.14159265358979323846 / 0.05;
};

// Normalized first-order transverse profile
//   H(r, phi) = sqrt(8 / pi) / waist^2 * r * exp(-r^2 / waist^2) * cos(phi).
double transverse_profile(double r, double phi, double waist);

// Field value at (r, phi, z, t) for orientation theta. The profile has a
// nodal line along phi = theta +- pi/2.
double field_value(const Eigen::VectorXd& rho, double theta,
                   CavityGeometry geometry, const FieldScales& scales,
                   double r, double phi, double z, double t);

struct FieldGrid {
  Eigen::VectorXd r;
  Eigen::VectorXd phi;
  Eigen::VectorXd z;
  Eigen::VectorXd t;
};

// Samples field_value over the tensor grid. Rows are ordered with t
// slowest, then z, then phi, then r; columns are (r, phi, z, t, value).
Eigen::MatrixXd sample_field(const Eigen::VectorXd& rho, double theta,
                             CavityGeometry geometry,
                             const FieldScales& scales, const FieldGrid& grid);

}  // namespace spopo
