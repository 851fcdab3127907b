#pragma once

// Spin-1 (any spin) particle in a 1-D electromagnetic configuration:
//   H = (p - eA/c)^2 / 2m + e phi - (kappa/s) s.B
// Exact-oracle spinor propagation, the spin coupling matrix S acting on
// frame weights, and the direct vector Wigner solver for fields whose
// phase-space operator series truncate.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spintomo/vector_portrait.hpp"

namespace spintomo {

/// Field configuration.  phi(q,t) = c0 + c1 q + c2 q^2/2 with the coefficients
/// from phi_coeffs, plus an optional arbitrary phi_extra(q,t).  The vector
/// potential is longitudinal: a uniform a_uniform(t) plus an optional
/// q-dependent a_profile(q,t).  The uniform magnetic field b(t) enters through
/// the Zeeman term only; for motion restricted to one axis its transverse
/// orbital coupling is not part of the model.
struct EMFieldConfig {
  double charge = 1.0;
  double light_speed = 1.0;
  double kappa = 1.0;
  double mass = 1.0;
  Spin spin{2};

  std::function<Eigen::Vector3d(double)> phi_coeffs;
  std::function<double(double, double)> phi_extra;
  std::function<double(double)> a_uniform;
  std::function<double(double, double)> a_profile;
  std::function<Vec3(double)> b;
  /// Set when any of the functions depends on t; used for energy bookkeeping.
  bool time_dependent = false;

  Eigen::Vector3d phi_at(double t) const;
  double phi(double q, double t) const;
  double a(double q, double t) const;
  double a_at(double t) const;  // uniform part
  Vec3 b_at(double t) const;

  /// phi at most quadratic and A uniform: the phase-space series truncate.
  bool truncating() const { return !phi_extra && !a_profile; }
  /// A uniform so kinetic and potential parts separate.
  bool separable() const { return !a_profile; }

  /// Throws InvalidArgument on non-finite or non-positive constants.
  void validate() const;

  /// Static configuration: phi = (1/2) m omega^2 q^2 / e (+ offset), uniform B.
  static EMFieldConfig harmonic(double mass, double omega, const Vec3& b = Vec3::Zero(),
                                double kappa = 1.0, double charge = 1.0);
  /// Static configuration with the given polynomial coefficients and uniform A, B.
  static EMFieldConfig constant(const Eigen::Vector3d& phi, double a, const Vec3& b,
                                double kappa = 1.0, double charge = 1.0, double mass = 1.0);
};

enum class Scheme { SplitStepStrang, Rk4, WignerSpectral };
const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct PropagatorConfig {
  double dt = 1e-3;
  int n_steps = 1000;
  Scheme scheme = Scheme::SplitStepStrang;
  int record_every = 1;

  void validate() const;
};

/// Spinor wave function: rows are grid points, columns spin components.
using SpinorField = Eigen::MatrixXcd;

/// H psi with the kinetic term spectral and the Zeeman term an exact
/// (2s+1)x(2s+1) action per grid point.
SpinorField hamiltonian_apply(const SpinorField& psi, const PhaseSpaceGrid& grid,
                              const EMFieldConfig& field, double t);

/// <psi|H|psi> for a grid-normalized spinor.
double energy(const SpinorField& psi, const PhaseSpaceGrid& grid, const EMFieldConfig& field,
              double t);
/// Tr{rho H}.
double energy(const SpinorDensity& rho, const EMFieldConfig& field, double t);

struct Trajectory {
  std::vector<double> times;
  std::vector<SpinorDensity> states;
};

/// Unitary propagation of rho0 decomposed into pure spinors.  Records t = 0
/// and every record_every steps.  Throws SchemeMismatch for split-step with a
/// q-dependent vector potential or for the wigner-spectral scheme.
Trajectory evolve_oracle(const SpinorDensity& rho0, const EMFieldConfig& field,
                         const PropagatorConfig& prop);

/// S_jk = -(2 kappa / (hbar s)) Im Tr{U_j (s.B) D_k}, so dw/dt = S w for the
/// frame weights under the Zeeman term.
struct SpinCouplingMatrix {
  Eigen::MatrixXd entries;
  Vec3 field_value = Vec3::Zero();
};

SpinCouplingMatrix spin_coupling_matrix(const SpinFrame& frame, const Vec3& b, double kappa,
                                        double hbar = 1.0);

/// Spin-only evolution: weights from exp(S t) w0 at each time.
std::vector<Eigen::VectorXd> evolve_spin_weights(const SpinCouplingMatrix& s,
                                                 const Eigen::VectorXd& w0,
                                                 const std::vector<double>& times);
/// Reference: exp(-iHt/hbar) rho exp(iHt/hbar) with H = -(kappa/s) s.B, then
/// projected onto the frame.
std::vector<Eigen::VectorXd> spin_oracle_weights(const SpinFrame& frame, const SpinMatrix& rho0,
                                                 const Vec3& b, double kappa, double hbar,
                                                 const std::vector<double>& times);

struct LarmorFit {
  double omega = 0.0;
  double rms_residual = 0.0;
};

/// Least-squares fit of a common angular frequency to one or more series,
/// each modelled as a0 + sum_{h=1..harmonics} (a_h cos h w t + b_h sin h w t).
/// The search covers frequencies up to the sampling limit.
LarmorFit fit_larmor(const std::vector<double>& times,
                     const std::vector<Eigen::VectorXd>& series, int harmonics);

struct ConservedRecord {
  double t = 0.0;
  double trace = 0.0;
  double energy = 0.0;
  double norm_sum = 0.0;
  double residual_max = 0.0;
};

struct VectorTrajectory {
  std::vector<VectorDistribution> frames;
  std::vector<ConservedRecord> conserved;
};

/// Direct integration of the vector Wigner equation for truncating fields.
/// Each step applies the exact affine phase-space flow of the midpoint
/// Hamiltonian (three Fourier shears and a shift) and exp(S dt) to the
/// components.  Throws UnsupportedOperation for non-truncating fields.
VectorTrajectory evolve_wigner_vector(const VectorDistribution& v0, const EMFieldConfig& field,
                                      const PropagatorConfig& prop);

}  // namespace spintomo
