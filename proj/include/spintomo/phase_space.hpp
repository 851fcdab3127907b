#pragma once

// Spinless phase-space transforms on a 1-D position grid: density kernel <->
// Wigner function, Wigner -> optical tomogram (Radon) and back by filtered
// back-projection, symplectic sections, Husimi smoothing and the Fourier
// multipliers used by the tomographic evolution operators.

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spintomo/errors.hpp"

namespace spintomo {

/// Sampling of the Wigner function produced from an n-point position grid:
/// 2n positions at spacing dx/2 and 2n momenta spanning pi*hbar/dx.
struct WignerLattice {
  int nq = 0;
  int np = 0;
  double q0 = 0.0;
  double dq = 0.0;
  double p0 = 0.0;
  double dp = 0.0;

  double q(int i) const { return q0 + i * dq; }
  double p(int m) const { return p0 + m * dp; }
  double q_length() const { return nq * dq; }
  double p_length() const { return np * dp; }
  Eigen::VectorXd qs() const;
  Eigen::VectorXd ps() const;
};

/// Uniform 1-D position grid with the scale constants hbar, m, omega.
///
/// Wave functions sampled on it have the conjugate momentum spacing
/// 2*pi*hbar/(n dx), so dx * dp * n = 2*pi*hbar.
struct PhaseSpaceGrid {
  int n = 64;
  double q_min = -8.0;
  double q_max = 8.0;
  double hbar = 1.0;
  double mass = 1.0;
  double omega = 1.0;
  int dimension = 1;

  double length() const { return q_max - q_min; }
  double dx() const { return length() / n; }
  double position(int a) const { return q_min + a * dx(); }
  /// Momentum step of the wave-function FFT grid.
  double dp() const { return 2.0 * M_PI * hbar / (n * dx()); }
  Eigen::VectorXd positions() const;
  WignerLattice lattice() const;

  /// Throws InvalidArgument on a malformed grid and UnsupportedOperation
  /// for dimension != 1.
  void validate() const;

  friend bool operator==(const PhaseSpaceGrid&, const PhaseSpaceGrid&) = default;
};

enum class FieldKind { DensityMatrix, Wigner, Husimi, Optical, SymplecticSection };

const char* to_string(FieldKind k);

/// Spatial density kernel rho(x_a, x_b) on the position grid; the trace is
/// sum_a rho(x_a, x_a) dx.
struct DensityKernel {
  PhaseSpaceGrid grid;
  Eigen::MatrixXcd values;

  double trace() const;
  double hermiticity_residual() const;
};

/// Real field on the Wigner lattice, values(i, m) at (q_i, p_m).
struct PhaseSpaceField {
  PhaseSpaceGrid grid;
  FieldKind kind = FieldKind::Wigner;
  Eigen::MatrixXd values;

  WignerLattice lattice() const { return grid.lattice(); }
  double integral() const;
};

/// Sample points for tomograms: a symmetric uniform X grid, optical angles in
/// [0, pi) and symplectic (mu, nu) pairs.
struct TomogramDomain {
  Eigen::VectorXd x;
  Eigen::VectorXd theta;
  std::vector<std::pair<double, double>> symplectic;

  /// X half-width defaults to hypot(max |q|, max |p| / (m omega)) over the
  /// lattice, which bounds every projection; n_x defaults to the lattice size.
  static TomogramDomain optical(const PhaseSpaceGrid& grid, int n_theta, int n_x = 0,
                                double x_half = 0.0);
  static TomogramDomain symplectic_samples(const PhaseSpaceGrid& grid,
                                           std::vector<std::pair<double, double>> samples,
                                           int n_x = 0, double x_half = 0.0);

  double dx() const { return x.size() > 1 ? x(1) - x(0) : 0.0; }
  double x_half() const { return 0.5 * x.size() * dx(); }
  void validate() const;
};

/// Optical tomogram values(m, i) = w(X_m, theta_i).
struct Tomogram {
  PhaseSpaceGrid grid;
  TomogramDomain domain;
  Eigen::MatrixXd values;

  /// Integral over X of every angle slice.
  Eigen::VectorXd slice_integrals() const;
};

struct SymplecticSection {
  double mu = 1.0;
  double nu = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd values;

  double integral() const;
};

/// Complex Wigner transform of an arbitrary kernel (no Hermiticity check).
Eigen::MatrixXcd wigner_transform(const PhaseSpaceGrid& grid, const Eigen::MatrixXcd& kernel);
/// Inverse of wigner_transform on its image.
Eigen::MatrixXcd kernel_from_wigner(const PhaseSpaceGrid& grid, const Eigen::MatrixXcd& w);

/// W(q,p) = (2 pi hbar)^-1 int rho(q+u/2, q-u/2) e^{-ipu/hbar} du.
/// Throws InvalidState when rho deviates from Hermitian by more than 1e-8.
/// If imag_residue is given it receives max |Im W| before it is discarded.
PhaseSpaceField wigner_from_density(const DensityKernel& rho, double* imag_residue = nullptr);
DensityKernel density_from_wigner(const PhaseSpaceField& w);

/// Marginals of W along X = q cos(theta) + p sin(theta) / (m omega), computed
/// from the Fourier slice of the sampled W.
Tomogram optical_tomogram(const PhaseSpaceField& w, const TomogramDomain& domain);
/// Same for several fields on one lattice (shares the trigonometric tables).
std::vector<Eigen::MatrixXd> optical_tomograms(const PhaseSpaceGrid& grid,
                                               const std::vector<Eigen::MatrixXd>& fields,
                                               const TomogramDomain& domain);
/// One marginal at an arbitrary angle evaluated at arbitrary X points.
Eigen::VectorXd radon_profile(const PhaseSpaceField& w, double theta, const Eigen::VectorXd& x);

/// Filtered back-projection onto the grid's Wigner lattice.  Throws
/// UndersampledDomain for fewer than 16 angles.
PhaseSpaceField wigner_from_optical(const Tomogram& tomogram);

/// M(X, mu, nu) = w(X/r, theta)/r with r = hypot(mu, nu m omega) and
/// theta = atan2(nu m omega, mu).  theta (mod pi) must be one of the tomogram
/// angles; the section is sampled at X = r * (tomogram X grid).  Throws
/// InvalidArgument for (mu, nu) = (0, 0).
SymplecticSection symplectic_section(const Tomogram& tomogram, double mu, double nu);
/// Symplectic section taken directly from a Wigner field.
SymplecticSection symplectic_section(const PhaseSpaceField& w, double mu, double nu,
                                     const Eigen::VectorXd& x);

/// Q = W smoothed by a Gaussian with variances hbar/(2 m omega) in q and
/// hbar m omega / 2 in p, i.e. <alpha|rho|alpha>/(2 pi hbar).
PhaseSpaceField husimi_from_wigner(const PhaseSpaceField& w);

struct InverseDerivative {
  Eigen::VectorXd values;
  bool boundary_leak = false;  // input did not decay to 1e-8 at the ends
};

/// Fourier multiplier 1/(ik) with the k = 0 mode dropped.
InverseDerivative inv_ddX(const Eigen::VectorXd& profile, double dx);
/// Spectral derivative of a periodic profile.
Eigen::VectorXd ddX(const Eigen::VectorXd& profile, double dx);

/// Spectral partial derivatives of a lattice field.
Eigen::MatrixXd lattice_d_dq(const WignerLattice& lat, const Eigen::MatrixXd& f);
Eigen::MatrixXd lattice_d_dp(const WignerLattice& lat, const Eigen::MatrixXd& f);

}  // namespace spintomo
