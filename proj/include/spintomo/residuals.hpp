#pragma once

// Residual verification of the vector evolution equations in the Wigner,
// Husimi, optical and symplectic representations against oracle trajectories.
//
// For a truncating field (phi = c0 + c1 q + c2 q^2/2, uniform A and B), with
// particle mass m, grid scale constants M, w, v = (p - eA/c)/m and S the spin
// coupling matrix, the right-hand sides are
//   Wigner:     -v dW/dq + e (c1 + c2 q) dW/dp + S W
//   Husimi:     -(p/m) Q_q - (sp^2/m) Q_qp + e c1 Q_p + e c2 (q Q_p + sq^2 Q_qp)
//               + (eA/mc) Q_q + S Q,   sq^2 = hbar/(2 M w), sp^2 = hbar M w / 2
//   optical:    (M w/m)[cos^2 w_theta - sin cos (w + X w_X)]
//               + (e/(M w))[c1 sin w_X + c2 (sin cos (w + X w_X) + sin^2 w_theta)]
//               + (eA/mc) cos w_X + S w
//   symplectic: (mu/m) M_nu + e nu c1 M_X - e c2 nu M_mu + (eA mu/mc) M_X + S M
// where M_mu = -d/dX M[q W] and M_nu = -d/dX M[p W] are taken from sections
// of the weighted Wigner components.

#include <memory>
#include <optional>
#include <vector>

#include "spintomo/dynamics.hpp"

namespace spintomo {

struct ResidualOptions {
  /// Required for the optical (uniform theta grid starting at 0) and
  /// symplectic representations.
  std::optional<TomogramDomain> domain;
};

struct ResidualReport {
  Representation representation = Representation::Wigner;
  std::vector<double> times;     // interior frame times
  std::vector<double> max_norm;  // max |LHS - RHS| over components and domain
  std::vector<double> l2_norm;   // quadrature L2 norm summed over components
  double max_residual = 0.0;
  double l2_residual = 0.0;
  double max_lhs = 0.0;  // largest |dv/dt|, for scale
};

/// Throws InvalidArgument for fewer than 3 frames or non-uniform times and
/// UnsupportedOperation for a non-truncating field.
ResidualReport residual_check(const Trajectory& traj, const EMFieldConfig& field,
                              Representation repr, std::shared_ptr<const SpinFrame> frame,
                              const ResidualOptions& options = {});

struct ConvergenceOptions {
  Representation representation = Representation::Wigner;
  PhaseSpaceGrid grid;  // coarsest level
  EMFieldConfig field;
  SpinMatrix spin_state;
  GaussianPacket packet;
  double dt = 0.05;
  int n_intervals = 4;
  int oracle_substeps = 4;
  int n_theta = 32;
  std::vector<std::pair<double, double>> symplectic_samples;
  int levels = 2;
};

struct ConvergenceReport {
  Representation representation = Representation::Wigner;
  std::vector<double> dt;
  std::vector<double> dx;
  std::vector<ResidualReport> levels;
  /// max residual on the coarse level's interior times divided by the finer
  /// level's max residual at the same times.
  std::vector<double> ratios;
};

/// Halves dt and dx (and doubles the angular sampling) per level, runs the
/// oracle with dt/oracle_substeps and checks the residuals on each level.
ConvergenceReport convergence_study(const ConvergenceOptions& options);

}  // namespace spintomo
