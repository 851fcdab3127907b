#include "spintomo/vector_portrait.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace spintomo {

const char* to_string(Representation r) {
  switch (r) {
    case Representation::Wigner: return "wigner";
    case Representation::Husimi: return "husimi";
    case Representation::Optical: return "optical";
    case Representation::SymplecticSection: return "symplectic";
  }
  return "unknown";
}

Representation representation_from_string(const std::string& name) {
  if (name == "wigner") return Representation::Wigner;
  if (name == "husimi") return Representation::Husimi;
  if (name == "optical") return Representation::Optical;
  if (name == "symplectic" || name == "symplectic-section") {
    return Representation::SymplecticSection;
  }
  throw InvalidArgument("unknown representation '" + name + "'");
}

SpinorDensity::SpinorDensity(Spin spin, PhaseSpaceGrid grid, Eigen::MatrixXcd matrix)
    : spin_(spin), grid_(std::move(grid)), matrix_(std::move(matrix)) {
  grid_.validate();
  const Eigen::Index size = static_cast<Eigen::Index>(spin_.dim()) * grid_.n;
  if (matrix_.rows() != size || matrix_.cols() != size) {
    std::ostringstream msg;
    msg << "spinor density must be " << size << "x" << size << ", got " << matrix_.rows() << "x"
        << matrix_.cols();
    throw InvalidArgument(msg.str());
  }
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-8) {
    std::ostringstream msg;
    msg << "spinor density is not Hermitian (max deviation " << herm << ")";
    throw InvalidState(msg.str());
  }
}

SpinorDensity SpinorDensity::product(const SpinMatrix& rho_spin, const PhaseSpaceGrid& grid,
                                     const Eigen::VectorXcd& psi) {
  return product(rho_spin, DensityKernel{grid, psi * psi.adjoint()});
}

SpinorDensity SpinorDensity::product(const SpinMatrix& rho_spin, const DensityKernel& kernel) {
  const int d = static_cast<int>(rho_spin.rows());
  if (rho_spin.cols() != d || d < 1) throw InvalidArgument("spin density must be square");
  const int n = kernel.grid.n;
  if (kernel.values.rows() != n || kernel.values.cols() != n) {
    throw InvalidArgument("spatial kernel does not match its grid");
  }
  Eigen::MatrixXcd m(d * n, d * n);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) m.block(j * n, k * n, n, n) = rho_spin(j, k) * kernel.values;
  }
  return SpinorDensity(Spin(d - 1), kernel.grid, std::move(m));
}

SpinorDensity SpinorDensity::mixture(Spin spin, const PhaseSpaceGrid& grid,
                                     const std::vector<Eigen::MatrixXcd>& spinors,
                                     const std::vector<double>& probabilities) {
  if (spinors.size() != probabilities.size()) {
    throw InvalidArgument("mixture needs one probability per spinor");
  }
  const int d = spin.dim();
  const int n = grid.n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d * n, d * n);
  for (std::size_t i = 0; i < spinors.size(); ++i) {
    if (spinors[i].rows() != n || spinors[i].cols() != d) {
      throw InvalidArgument("spinor field must be n x (2s+1)");
    }
    const Eigen::Map<const Eigen::VectorXcd> v(spinors[i].data(), d * n);
    m.noalias() += probabilities[i] * v * v.adjoint();
  }
  return SpinorDensity(spin, grid, std::move(m));
}

Eigen::MatrixXcd SpinorDensity::block(int j, int k) const {
  const int n = grid_.n;
  return matrix_.block(j * n, k * n, n, n);
}

double SpinorDensity::trace() const { return matrix_.diagonal().real().sum() * grid_.dx(); }

SpinMatrix SpinorDensity::spin_reduced() const {
  const int d = spin_dim();
  const int n = grid_.n;
  SpinMatrix r(d, d);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      r(j, k) = matrix_.block(j * n, k * n, n, n).diagonal().sum() * grid_.dx();
    }
  }
  return r;
}

Eigen::MatrixXcd SpinorDensity::contract(const SpinMatrix& u) const {
  const int d = spin_dim();
  const int n = grid_.n;
  if (u.rows() != d || u.cols() != d) throw InvalidArgument("spin operator dimension mismatch");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      if (u(l, k) != Complex(0.0)) out.noalias() += u(l, k) * matrix_.block(k * n, l * n, n, n);
    }
  }
  return out;
}

StateCheck SpinorDensity::check(std::uint64_t seed) const {
  StateCheck c;
  c.hermiticity = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  c.trace = trace();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto size = matrix_.rows();
  c.min_expectation = std::numeric_limits<double>::infinity();
  Eigen::VectorXcd phi(size);
  for (int trial = 0; trial < 100; ++trial) {
    for (Eigen::Index i = 0; i < size; ++i) phi(i) = Complex(normal(rng), normal(rng));
    phi.normalize();
    const double e = (phi.adjoint() * matrix_ * phi)(0).real() * grid_.dx();
    c.min_expectation = std::min(c.min_expectation, e);
  }
  return c;
}

void SpinorDensity::validate() const {
  const StateCheck c = check();
  std::ostringstream msg;
  if (c.hermiticity > 1e-12) {
    msg << "spinor density is not Hermitian (max deviation " << c.hermiticity << ")";
  } else if (std::abs(c.trace - 1.0) > 1e-10) {
    msg << "spinor density trace is " << c.trace << ", expected 1";
  } else if (c.min_expectation < -1e-10) {
    msg << "spinor density is not positive semidefinite (<phi|rho|phi> = " << c.min_expectation
        << ")";
  } else {
    return;
  }
  throw InvalidState(msg.str());
}

Eigen::VectorXcd gaussian_packet(const PhaseSpaceGrid& grid, const GaussianPacket& packet) {
  if (!(packet.width > 0.0)) throw InvalidArgument("packet width must be positive");
  Eigen::VectorXcd psi(grid.n);
  for (int a = 0; a < grid.n; ++a) {
    const double x = grid.position(a);
    const double u = (x - packet.q0) / packet.width;
    psi(a) = std::polar(std::exp(-0.5 * u * u), packet.p0 * x / grid.hbar);
  }
  psi /= std::sqrt(psi.squaredNorm() * grid.dx());
  return psi;
}

SpinorDensity random_spinor_density(Spin spin, const PhaseSpaceGrid& grid, int rank,
                                    std::uint64_t seed) {
  if (rank < 1) throw InvalidArgument("rank must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal;
  const double half = 0.5 * grid.length();
  std::vector<Eigen::MatrixXcd> spinors;
  std::vector<double> probabilities;
  double total = 0.0;
  for (int r = 0; r < rank; ++r) {
    Eigen::VectorXcd amp(spin.dim());
    for (int s = 0; s < spin.dim(); ++s) amp(s) = Complex(normal(rng), normal(rng));
    amp.normalize();
    Eigen::MatrixXcd psi(grid.n, spin.dim());
    for (int s = 0; s < spin.dim(); ++s) {
      GaussianPacket packet;
      packet.q0 = grid.q_min + half + (uniform(rng) - 0.5) * 0.25 * half;
      packet.p0 = (uniform(rng) - 0.5) * 2.0;
      packet.width = 0.7 + 0.6 * uniform(rng);
      psi.col(s) = amp(s) * gaussian_packet(grid, packet);
    }
    spinors.push_back(std::move(psi));
    probabilities.push_back(0.2 + uniform(rng));
    total += probabilities.back();
  }
  for (double& p : probabilities) p /= total;
  return SpinorDensity::mixture(spin, grid, spinors, probabilities);
}

namespace {

// Square roots of the eigenvalues above the round-off floor dim * eps * max.
Eigen::VectorXd root_spectrum(const Eigen::VectorXd& ev) {
  const double floor = ev.size() * std::numeric_limits<double>::epsilon() *
                       std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  return ev.unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
}

Eigen::MatrixXcd sqrt_psd(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::VectorXd ev = root_spectrum(es.eigenvalues());
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const SpinorDensity& rho, const SpinorDensity& sigma) {
  if (!(rho.grid() == sigma.grid()) || rho.spin() != sigma.spin()) {
    throw InvalidArgument("fidelity needs states on the same grid and spin");
  }
  const double dx = rho.grid().dx();
  const Eigen::MatrixXcd a = rho.matrix() * (dx / rho.trace());
  const Eigen::MatrixXcd b = sigma.matrix() * (dx / sigma.trace());
  const Eigen::MatrixXcd ra = sqrt_psd(0.5 * (a + a.adjoint()));
  const Eigen::MatrixXcd inner = ra * b * ra;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (inner + inner.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  const double root = root_spectrum(es.eigenvalues()).sum();
  return root * root;
}

double VectorDistribution::integral(std::size_t j) const {
  const Eigen::MatrixXd& c = components.at(j);
  switch (representation) {
    case Representation::Wigner:
    case Representation::Husimi: {
      const WignerLattice lat = grid.lattice();
      return c.sum() * lat.dq * lat.dp;
    }
    case Representation::Optical:
    case Representation::SymplecticSection:
      if (c.cols() == 0) return 0.0;
      return c.sum() * domain.dx() / static_cast<double>(c.cols());
  }
  return 0.0;
}

Eigen::VectorXd VectorDistribution::integrals() const {
  Eigen::VectorXd v(components.size());
  for (std::size_t j = 0; j < components.size(); ++j) v(j) = integral(j);
  return v;
}

double VectorDistribution::normalization_sum() const {
  if (!frame) throw InvalidArgument("vector distribution has no frame");
  return frame->trace_weights().dot(integrals());
}

VectorDistribution to_vector(const SpinorDensity& rho, std::shared_ptr<const SpinFrame> frame,
                             Representation repr, const std::optional<TomogramDomain>& domain) {
  if (!frame) throw InvalidArgument("to_vector needs a frame");
  if (frame->spin() != rho.spin()) {
    throw InvalidArgument("frame spin dimension " + std::to_string(frame->dim()) +
                          " does not match state dimension " + std::to_string(rho.spin_dim()));
  }
  const bool tomographic =
      repr == Representation::Optical || repr == Representation::SymplecticSection;
  if (tomographic && !domain) {
    throw InvalidArgument(std::string(to_string(repr)) + " representation needs a domain");
  }
  if (repr == Representation::Optical && domain->theta.size() == 0) {
    throw InvalidArgument("optical domain has no angles");
  }
  if (repr == Representation::SymplecticSection && domain->symplectic.empty()) {
    throw InvalidArgument("symplectic domain has no (mu, nu) samples");
  }

  VectorDistribution v;
  v.representation = repr;
  v.grid = rho.grid();
  if (domain) v.domain = *domain;
  v.frame = frame;

  std::vector<Eigen::MatrixXd> wigner;
  wigner.reserve(frame->size());
  for (const SpinMatrix& u : frame->dequantizer()) {
    const Eigen::MatrixXcd w = wigner_transform(rho.grid(), rho.contract(u));
    v.max_imag_residue = std::max(v.max_imag_residue, w.imag().cwiseAbs().maxCoeff());
    wigner.push_back(w.real());
  }

  switch (repr) {
    case Representation::Wigner:
      v.components = std::move(wigner);
      break;
    case Representation::Husimi:
      for (auto& w : wigner) {
        v.components.push_back(
            husimi_from_wigner(PhaseSpaceField{rho.grid(), FieldKind::Wigner, std::move(w)}).values);
      }
      break;
    case Representation::Optical:
      v.components = optical_tomograms(rho.grid(), wigner, *domain);
      break;
    case Representation::SymplecticSection:
      domain->validate();
      for (auto& w : wigner) {
        const PhaseSpaceField field{rho.grid(), FieldKind::Wigner, std::move(w)};
        Eigen::MatrixXd table(domain->x.size(), domain->symplectic.size());
        for (std::size_t i = 0; i < domain->symplectic.size(); ++i) {
          const auto [mu, nu] = domain->symplectic[i];
          table.col(static_cast<Eigen::Index>(i)) =
              symplectic_section(field, mu, nu, domain->x).values;
        }
        v.components.push_back(std::move(table));
      }
      break;
  }
  return v;
}

SpinorDensity from_vector(const VectorDistribution& v) {
  if (!v.frame) throw InvalidArgument("vector distribution has no frame");
  const SpinFrame& frame = *v.frame;
  if (v.components.size() != frame.size()) {
    throw InvalidArgument("component count does not match the frame");
  }
  std::vector<Eigen::MatrixXcd> kernels;
  kernels.reserve(frame.size());
  switch (v.representation) {
    case Representation::Wigner:
      for (const auto& c : v.components) {
        kernels.push_back(kernel_from_wigner(v.grid, c.cast<Complex>()));
      }
      break;
    case Representation::Optical:
      for (const auto& c : v.components) {
        const PhaseSpaceField w = wigner_from_optical(Tomogram{v.grid, v.domain, c});
        kernels.push_back(kernel_from_wigner(v.grid, w.values.cast<Complex>()));
      }
      break;
    case Representation::Husimi:
      throw UnsupportedOperation(
          "Husimi vectors have no stable inverse; reconstruct through the Wigner representation");
    case Representation::SymplecticSection:
      throw UnsupportedOperation(
          "symplectic sections are not inverted directly; reconstruct from the optical tomogram");
  }
  const int d = frame.dim();
  const int n = v.grid.n;
  Eigen::MatrixXcd m(d * n, d * n);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
      for (std::size_t l = 0; l < frame.size(); ++l) {
        const Complex coeff = frame.quantizer()[l](j, k);
        if (coeff != Complex(0.0)) b.noalias() += coeff * kernels[l];
      }
      m.block(j * n, k * n, n, n) = b;
    }
  }
  // Remove roundoff-level anti-Hermitian residue so the result is a valid density.
  Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
  return SpinorDensity(frame.spin(), v.grid, std::move(herm));
}

AuditReport audit(const VectorDistribution& v) {
  AuditReport r;
  r.representation = v.representation;
  r.max_imag_residue = v.max_imag_residue;
  double global_min = std::numeric_limits<double>::infinity();
  bool integrals_ok = true;
  for (std::size_t j = 0; j < v.components.size(); ++j) {
    ComponentAudit c;
    c.integral = v.integral(j);
    if (v.components[j].size() > 0) {
      c.min_value = v.components[j].minCoeff();
      c.max_value = v.components[j].maxCoeff();
    }
    global_min = std::min(global_min, c.min_value);
    integrals_ok = integrals_ok && c.integral >= -1e-9 && c.integral <= 1.0 + 1e-9;
    r.exceeds_unit_pointwise = r.exceeds_unit_pointwise || c.max_value > 1.0;
    r.components.push_back(c);
  }
  r.normalization_sum = v.frame ? v.normalization_sum() : 0.0;
  r.normalization_ok = v.frame != nullptr && std::abs(r.normalization_sum - 1.0) <= 1e-8;
  r.realness_ok = r.max_imag_residue <= 1e-12;
  r.integrals_ok = integrals_ok;
  if (v.representation == Representation::Wigner) {
    r.nonnegative_ok = true;
    r.negativity_expected = global_min < -1e-9;
  } else {
    r.nonnegative_ok = global_min >= -1e-9;
  }
  return r;
}

}  // namespace spintomo
