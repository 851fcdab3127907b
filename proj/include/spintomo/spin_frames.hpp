#pragma once

// Spin operators, rank-one spin projectors and the (2s+1)^2 projector frames
// used to build vector distributions, together with their dual frames.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spintomo/errors.hpp"

namespace spintomo {

using Complex = std::complex<double>;
using SpinMatrix = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;

/// Spin quantum number stored as 2s so half-integers are exact.
class Spin {
 public:
  constexpr Spin() = default;
  explicit constexpr Spin(int twice_s) : twice_(twice_s) {}

  /// Throws InvalidArgument unless 2s is a non-negative integer.
  static Spin from_value(double s);

  constexpr int twice() const { return twice_; }
  constexpr int dim() const { return twice_ + 1; }
  constexpr double value() const { return 0.5 * twice_; }

  friend constexpr bool operator==(Spin, Spin) = default;

 private:
  int twice_ = 2;
};

/// Unit 3-vector.
class Direction {
 public:
  /// Normalizes the input; throws InvalidArgument on a zero or non-finite vector.
  explicit Direction(const Vec3& v);
  Direction(double x, double y, double z) : Direction(Vec3(x, y, z)) {}

  static Direction x() { return Direction(1, 0, 0); }
  static Direction y() { return Direction(0, 1, 0); }
  static Direction z() { return Direction(0, 0, 1); }

  const Vec3& vec() const { return v_; }

 private:
  Vec3 v_;
};

struct SpinOperators {
  SpinMatrix sx, sy, sz;

  /// n.s for an arbitrary (not necessarily unit) 3-vector.
  SpinMatrix along(const Vec3& n) const {
    return n.x() * sx + n.y() * sy + n.z() * sz;
  }
};

/// Angular momentum matrices in the basis where s_z = diag(s, s-1, ..., -s).
SpinOperators spin_operators(Spin s);

/// Rank-one projector onto the eigenvector of n.s with eigenvalue m.
/// The eigenvector phase makes its first nonzero component real positive.
SpinMatrix eigenprojector(Spin s, const Direction& n, double m);

/// A (2s+1)^2 element frame of spin projectors and its dual.
///
/// With w_j = Tr{rho U_j} the state is recovered as rho = sum_j w_j D_j, and
/// Tr{U_j D_k} = delta_jk.  Entry (k,l) of D_j is the frame-index-j component
/// of the quantizer vector D_(kl).
class SpinFrame {
 public:
  /// Builds projectors for (direction, eigenvalue) pairs and solves the dual.
  SpinFrame(Spin s, std::vector<Direction> directions,
            std::vector<double> eigenvalues);

  Spin spin() const { return spin_; }
  int dim() const { return spin_.dim(); }
  std::size_t size() const { return dequantizer_.size(); }

  const std::vector<Direction>& directions() const { return directions_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const std::vector<SpinMatrix>& dequantizer() const { return dequantizer_; }
  const std::vector<SpinMatrix>& quantizer() const { return quantizer_; }
  /// Real Gram matrix Tr{U_j U_k}.
  const Eigen::MatrixXd& gram() const { return gram_; }

  /// Tr{D_j}; the trace of rho is sum_j trace_weights()[j] * w_j.
  const Eigen::VectorXd& trace_weights() const { return trace_weights_; }

  /// w_j = Tr{rho U_j}.
  Eigen::VectorXd weights(const SpinMatrix& rho) const;
  /// sum_j w_j D_j.
  SpinMatrix reconstruct(const Eigen::VectorXd& w) const;

  /// Quantizer vector D_(kl) over the frame index (0-based k,l).
  Eigen::VectorXcd quantizer_vector(int k, int l) const;

  /// max_{j,k} |Tr{U_j D_k} - delta_jk|
  double duality_residual() const;
  /// max |sum_j U_j(kl) D_j(k'l') - delta_lk' delta_kl'|, i.e. the
  /// superoperator rho -> sum_j Tr{rho U_j} D_j compared with the identity.
  double completeness_residual() const;
  /// max |D_j - D_j^dagger| over the dual frame.
  double quantizer_hermiticity_residual() const;
  double gram_condition_number() const;

 private:
  Spin spin_;
  std::vector<Direction> directions_;
  std::vector<double> eigenvalues_;
  std::vector<SpinMatrix> dequantizer_;
  std::vector<SpinMatrix> quantizer_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd trace_weights_;
};

/// Dual frame by Gram inversion.  Throws DegenerateFrame when the Gram
/// condition number exceeds 1e12; the message names the frame elements that
/// dominate the near-null combination.
std::vector<SpinMatrix> solve_dual_frame(const std::vector<SpinMatrix>& dequantizer);

/// Gram matrix Re Tr{U_j U_k}.
Eigen::MatrixXd frame_gram(const std::vector<SpinMatrix>& dequantizer);

/// Spin-1 frame ordered as (z,+1) (z,0) (z,-1) (x,+1) (x,0) (xy,+1) (xy,0)
/// (yz,0) (xz,0), with e_xy, e_yz, e_xz the normalized face diagonals.
SpinFrame build_spin1_frame();

/// (2s+1)^2 random directions/eigenvalues, resampled until the Gram
/// condition number is below 1e6.  Throws FrameSearchFailure after 1000
/// rejected draws.
SpinFrame random_frame(Spin s, std::uint64_t seed);

/// Tabulated spin-1 frame entries used as check data for build_spin1_frame().
struct TabulatedSpin1Frame {
  std::vector<SpinMatrix> dequantizer;  // 9 projectors
  /// Quantizer vectors keyed by 0-based matrix index (k,l), k <= l.
  std::vector<std::pair<std::pair<int, int>, Eigen::VectorXcd>> quantizer_vectors;
};
const TabulatedSpin1Frame& tabulated_spin1_frame();

struct FrameDiffEntry {
  std::string item;  // e.g. "U6" or "D(1,2)"
  int index = 0;     // matrix element (row-major) or frame index
  Complex recomputed;
  Complex tabulated;
  double abs_diff = 0.0;
};

/// Elementwise comparison of a computed spin-1 frame against the tabulated
/// projectors and quantizer vectors.
std::vector<FrameDiffEntry> compare_with_tabulated(const SpinFrame& frame);

}  // namespace spintomo
