#pragma once

// Joint spin (x) space states and their (2s+1)^2-component vector
// distributions: w_j = spatial transform of Tr_spin{rho U_j}.

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spintomo/phase_space.hpp"
#include "spintomo/spin_frames.hpp"

namespace spintomo {

enum class Representation { Wigner, Husimi, Optical, SymplecticSection };

const char* to_string(Representation r);
/// Accepts "wigner", "husimi", "optical", "symplectic" / "symplectic-section".
Representation representation_from_string(const std::string& name);

struct StateCheck {
  double hermiticity = 0.0;    // max |rho - rho^dagger|
  double trace = 0.0;          // sum_j int rho_jj(x,x) dx
  double min_expectation = 0;  // min <phi|rho|phi> over random unit phi
};

/// Density matrix of a (2s+1)-component spinor on a 1-D grid.  The matrix has
/// (2s+1)n rows; row/column index spin * n + a, so block (j,k) is the spatial
/// kernel rho_jk(x_a, x_b).
class SpinorDensity {
 public:
  /// Throws InvalidArgument on a shape mismatch and InvalidState when the
  /// matrix is not Hermitian to 1e-8.
  SpinorDensity(Spin spin, PhaseSpaceGrid grid, Eigen::MatrixXcd matrix);

  /// rho_spin (x) |psi><psi| for a spatial wave function normalized on the grid.
  static SpinorDensity product(const SpinMatrix& rho_spin, const PhaseSpaceGrid& grid,
                               const Eigen::VectorXcd& psi);
  /// rho_spin (x) kernel.
  static SpinorDensity product(const SpinMatrix& rho_spin, const DensityKernel& kernel);
  /// sum_i p_i |psi_i><psi_i| with psi_i given as n x (2s+1) spinor fields.
  static SpinorDensity mixture(Spin spin, const PhaseSpaceGrid& grid,
                               const std::vector<Eigen::MatrixXcd>& spinors,
                               const std::vector<double>& probabilities);

  Spin spin() const { return spin_; }
  int spin_dim() const { return spin_.dim(); }
  const PhaseSpaceGrid& grid() const { return grid_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  Eigen::MatrixXcd block(int j, int k) const;

  double trace() const;
  /// Reduced spin density matrix sum_a rho_jk(x_a, x_a) dx.
  SpinMatrix spin_reduced() const;
  /// Spatial kernel Tr_spin{rho U} = sum_kl U(l,k) rho_kl.
  Eigen::MatrixXcd contract(const SpinMatrix& u) const;

  StateCheck check(std::uint64_t seed = 12345) const;
  /// Throws InvalidState unless Hermitian to 1e-12, unit trace to 1e-10 and
  /// <phi|rho|phi> >= -1e-10 for 100 random test vectors.
  void validate() const;

 private:
  Spin spin_;
  PhaseSpaceGrid grid_;
  Eigen::MatrixXcd matrix_;
};

struct GaussianPacket {
  double q0 = 0.0;
  double p0 = 0.0;
  double width = 1.0;  // psi ~ exp(-(x - q0)^2 / (2 width^2) + i p0 x / hbar)
};

/// Grid-normalized Gaussian wave packet.
Eigen::VectorXcd gaussian_packet(const PhaseSpaceGrid& grid, const GaussianPacket& packet);

/// Mixture of `rank` random spinors whose components are Gaussian packets
/// with random centres, momenta, widths and spin amplitudes.
SpinorDensity random_spinor_density(Spin spin, const PhaseSpaceGrid& grid, int rank,
                                    std::uint64_t seed);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 between two states
/// on the same grid; both are normalized to unit trace first.
double fidelity(const SpinorDensity& rho, const SpinorDensity& sigma);

/// Components over a shared domain.  Wigner/Husimi components live on the
/// grid's Wigner lattice; optical components are (X, theta) tables and
/// symplectic ones (X, sample) tables.
struct VectorDistribution {
  Representation representation = Representation::Wigner;
  PhaseSpaceGrid grid;
  TomogramDomain domain;
  std::shared_ptr<const SpinFrame> frame;
  double time = 0.0;
  std::vector<Eigen::MatrixXd> components;
  double max_imag_residue = 0.0;

  /// Integral of one component; for tomograms the mean over slices of the
  /// X integral.
  double integral(std::size_t j) const;
  Eigen::VectorXd integrals() const;
  /// sum_j Tr{D_j} * integral_j, i.e. the sum of the s_z-projector integrals
  /// for the standard spin-1 frame.
  double normalization_sum() const;
};

/// Throws InvalidArgument on a spin mismatch or a missing domain.
VectorDistribution to_vector(const SpinorDensity& rho, std::shared_ptr<const SpinFrame> frame,
                             Representation repr,
                             const std::optional<TomogramDomain>& domain = std::nullopt);

/// Inverse map through the quantizer.  Husimi and symplectic inputs throw
/// UnsupportedOperation; reconstruct those through the Wigner route.
SpinorDensity from_vector(const VectorDistribution& v);

struct ComponentAudit {
  double integral = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
};

struct AuditReport {
  Representation representation = Representation::Wigner;
  std::vector<ComponentAudit> components;
  double normalization_sum = 0.0;
  double max_imag_residue = 0.0;

  bool normalization_ok = false;  // |sum - 1| <= 1e-8
  bool realness_ok = false;       // imaginary residue <= 1e-12
  bool nonnegative_ok = false;    // min >= -1e-9 (Wigner: always true)
  bool integrals_ok = false;      // each integral in [-1e-9, 1 + 1e-9]
  /// Wigner components with negative values; expected, not a failure.
  bool negativity_expected = false;
  /// Pointwise values above 1 (recorded only).
  bool exceeds_unit_pointwise = false;

  bool passed() const { return normalization_ok && realness_ok && nonnegative_ok && integrals_ok; }
};

AuditReport audit(const VectorDistribution& v);

}  // namespace spintomo
