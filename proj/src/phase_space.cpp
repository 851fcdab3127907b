#include "spintomo/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spintomo/fft.hpp"

namespace spintomo {

namespace {

using Complex = std::complex<double>;
constexpr Complex kI(0.0, 1.0);

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

double default_x_half(const PhaseSpaceGrid& grid) {
  const WignerLattice lat = grid.lattice();
  const double q_ext = std::max(std::abs(grid.q_min), std::abs(grid.q_max));
  const double p_ext = std::max(std::abs(lat.p0), std::abs(lat.p(lat.np - 1)));
  return std::hypot(q_ext, p_ext / (grid.mass * grid.omega));
}

// Highest angular frequency of a slice that the lattice resolves in both axes.
double lattice_k_max(const WignerLattice& lat, double mw) {
  return M_PI / std::max(lat.dq, lat.dp / mw);
}

// chi(k_n) = int W(q,p) exp(i k_n (q cos(theta) + p sin(theta)/(m omega))) dq dp
// for every field, by trapezoidal sums over the lattice.
std::vector<Eigen::VectorXcd> slice_spectra(const WignerLattice& lat, double mw,
                                            const std::vector<const Eigen::MatrixXd*>& fields,
                                            double theta, const Eigen::VectorXd& k) {
  const Eigen::VectorXd qs = lat.qs();
  const Eigen::VectorXd ps = lat.ps();
  const double c = std::cos(theta);
  const double s = std::sin(theta) / mw;
  const auto nk = k.size();
  Eigen::MatrixXd cp(lat.np, nk), sp(lat.np, nk);
  for (Eigen::Index n = 0; n < nk; ++n) {
    for (int j = 0; j < lat.np; ++j) {
      const double phase = k(n) * s * ps(j);
      cp(j, n) = std::cos(phase);
      sp(j, n) = std::sin(phase);
    }
  }
  Eigen::MatrixXcd eq(lat.nq, nk);
  for (Eigen::Index n = 0; n < nk; ++n) {
    for (int i = 0; i < lat.nq; ++i) eq(i, n) = std::polar(1.0, k(n) * c * qs(i));
  }
  const double cell = lat.dq * lat.dp;
  std::vector<Eigen::VectorXcd> out;
  out.reserve(fields.size());
  Eigen::MatrixXd g, h;
  for (const auto* f : fields) {
    g.noalias() = (*f) * cp;
    h.noalias() = (*f) * sp;
    Eigen::VectorXcd chi(nk);
    for (Eigen::Index n = 0; n < nk; ++n) {
      Complex acc = 0.0;
      for (int i = 0; i < lat.nq; ++i) acc += eq(i, n) * Complex(g(i, n), h(i, n));
      chi(n) = acc * cell;
    }
    out.push_back(std::move(chi));
  }
  return out;
}

// Evaluates (dk / 2pi) [chi_0 + 2 Re sum_{n>0} chi_n e^{-i k_n X}].
Eigen::MatrixXcd inverse_slice_table(const Eigen::VectorXd& k, const Eigen::VectorXd& x) {
  const double dk = k.size() > 1 ? k(1) - k(0) : 0.0;
  Eigen::MatrixXcd e(x.size(), k.size());
  for (Eigen::Index n = 0; n < k.size(); ++n) {
    const double weight = (n == 0 ? 1.0 : 2.0) * dk / (2.0 * M_PI);
    for (Eigen::Index m = 0; m < x.size(); ++m) e(m, n) = weight * std::polar(1.0, -k(n) * x(m));
  }
  return e;
}

Eigen::VectorXd radial_wavenumbers(double dk, double k_max, int n_max) {
  int count = static_cast<int>(std::floor(k_max / dk)) + 1;
  if (n_max > 0) count = std::min(count, n_max);
  Eigen::VectorXd k(count);
  for (int n = 0; n < count; ++n) k(n) = n * dk;
  return k;
}

void require_same_lattice(const PhaseSpaceGrid& grid, const Eigen::MatrixXd& f) {
  const WignerLattice lat = grid.lattice();
  if (f.rows() != lat.nq || f.cols() != lat.np) {
    throw InvalidArgument("field shape does not match the grid's Wigner lattice");
  }
}

}  // namespace

const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::DensityMatrix: return "density-matrix";
    case FieldKind::Wigner: return "wigner";
    case FieldKind::Husimi: return "husimi";
    case FieldKind::Optical: return "optical";
    case FieldKind::SymplecticSection: return "symplectic-section";
  }
  return "unknown";
}

Eigen::VectorXd WignerLattice::qs() const {
  Eigen::VectorXd v(nq);
  for (int i = 0; i < nq; ++i) v(i) = q(i);
  return v;
}

Eigen::VectorXd WignerLattice::ps() const {
  Eigen::VectorXd v(np);
  for (int m = 0; m < np; ++m) v(m) = p(m);
  return v;
}

Eigen::VectorXd PhaseSpaceGrid::positions() const {
  Eigen::VectorXd v(n);
  for (int a = 0; a < n; ++a) v(a) = position(a);
  return v;
}

WignerLattice PhaseSpaceGrid::lattice() const {
  WignerLattice lat;
  lat.nq = 2 * n;
  lat.np = 2 * n;
  lat.q0 = q_min;
  lat.dq = 0.5 * dx();
  lat.dp = M_PI * hbar / (2.0 * n * dx());
  lat.p0 = -n * lat.dp;
  return lat;
}

void PhaseSpaceGrid::validate() const {
  if (dimension != 1) {
    throw UnsupportedOperation("only one spatial dimension is implemented");
  }
  if (!is_power_of_two(n) || n < 32) {
    throw InvalidArgument("grid size must be a power of two >= 32, got " + std::to_string(n));
  }
  if (!(std::isfinite(q_min) && std::isfinite(q_max) && q_max > q_min)) {
    throw InvalidArgument("grid needs finite q_min < q_max");
  }
  if (!(hbar > 0.0 && mass > 0.0 && omega > 0.0) ||
      !(std::isfinite(hbar) && std::isfinite(mass) && std::isfinite(omega))) {
    throw InvalidArgument("hbar, mass and omega must be positive and finite");
  }
  const double consistency = dx() * dp() * n / (2.0 * M_PI * hbar);
  if (std::abs(consistency - 1.0) > 1e-10) {
    throw InvalidArgument("grid spacings are not FFT-consistent");
  }
}

double DensityKernel::trace() const { return values.diagonal().real().sum() * grid.dx(); }

double DensityKernel::hermiticity_residual() const {
  if (values.size() == 0) return 0.0;
  return (values - values.adjoint()).cwiseAbs().maxCoeff();
}

double PhaseSpaceField::integral() const {
  const WignerLattice lat = lattice();
  return values.sum() * lat.dq * lat.dp;
}

TomogramDomain TomogramDomain::optical(const PhaseSpaceGrid& grid, int n_theta, int n_x,
                                       double x_half) {
  if (n_theta < 1) throw InvalidArgument("need at least one angle");
  TomogramDomain d;
  if (n_x <= 0) n_x = grid.lattice().nq;
  if (x_half <= 0.0) x_half = default_x_half(grid);
  const double step = 2.0 * x_half / n_x;
  d.x.resize(n_x);
  for (int m = 0; m < n_x; ++m) d.x(m) = -x_half + (m + 0.5) * step;
  d.theta.resize(n_theta);
  for (int i = 0; i < n_theta; ++i) d.theta(i) = M_PI * i / n_theta;
  return d;
}

TomogramDomain TomogramDomain::symplectic_samples(const PhaseSpaceGrid& grid,
                                                  std::vector<std::pair<double, double>> samples,
                                                  int n_x, double x_half) {
  TomogramDomain d = optical(grid, 1, n_x, x_half);
  d.theta.resize(0);
  d.symplectic = std::move(samples);
  return d;
}

void TomogramDomain::validate() const {
  if (x.size() < 2) throw InvalidArgument("tomogram X grid needs at least two points");
  const double step = dx();
  for (Eigen::Index m = 1; m < x.size(); ++m) {
    if (std::abs(x(m) - x(m - 1) - step) > 1e-9 * std::max(1.0, std::abs(step))) {
      throw InvalidArgument("tomogram X grid must be uniform");
    }
  }
  if (std::abs(x(0) + x(x.size() - 1)) > 1e-9 * std::max(1.0, std::abs(x(0)))) {
    throw InvalidArgument("tomogram X grid must be symmetric about zero");
  }
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (theta(i) < 0.0 || theta(i) >= M_PI) {
      throw InvalidArgument("optical angles must lie in [0, pi)");
    }
    if (i > 0 && !(theta(i) > theta(i - 1))) {
      throw InvalidArgument("optical angles must be strictly increasing");
    }
  }
  for (const auto& [mu, nu] : symplectic) {
    if (mu == 0.0 && nu == 0.0) throw InvalidArgument("symplectic sample (0, 0)");
  }
}

Eigen::VectorXd Tomogram::slice_integrals() const {
  return values.colwise().sum().transpose() * domain.dx();
}

double SymplecticSection::integral() const {
  return x.size() > 1 ? values.sum() * (x(1) - x(0)) : 0.0;
}

Eigen::MatrixXcd wigner_transform(const PhaseSpaceGrid& grid, const Eigen::MatrixXcd& kernel) {
  const int n = grid.n;
  if (kernel.rows() != n || kernel.cols() != n) {
    throw InvalidArgument("kernel shape does not match the position grid");
  }
  const int m2 = 2 * n;
  // Column j collects rho(x_a, x_b) with a + b = j, indexed by r = (a - b - parity)/2.
  Eigen::MatrixXcd buf = Eigen::MatrixXcd::Zero(m2, m2);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int j = a + b;
      const int d = a - b;
      const int r = (d - (j & 1)) / 2;
      const double sign = (r & 1) ? -1.0 : 1.0;
      buf(((r % m2) + m2) % m2, j) = sign * kernel(a, b);
    }
  }
  fft::transform_columns(buf, fft::kForward);
  const double scale = grid.dx() / (M_PI * grid.hbar);
  Eigen::MatrixXcd w(m2, m2);
  for (int j = 0; j < m2; ++j) {
    const int parity = j & 1;
    for (int m = 0; m < m2; ++m) {
      const Complex phase =
          parity ? std::polar(1.0, -M_PI * (m - n) / static_cast<double>(m2)) : Complex(1.0);
      w(j, m) = scale * phase * buf(m, j);
    }
  }
  return w;
}

Eigen::MatrixXcd kernel_from_wigner(const PhaseSpaceGrid& grid, const Eigen::MatrixXcd& w) {
  const int n = grid.n;
  const int m2 = 2 * n;
  if (w.rows() != m2 || w.cols() != m2) {
    throw InvalidArgument("field shape does not match the grid's Wigner lattice");
  }
  const double scale = M_PI * grid.hbar / grid.dx() / m2;
  Eigen::MatrixXcd buf(m2, m2);
  for (int j = 0; j < m2; ++j) {
    const int parity = j & 1;
    for (int m = 0; m < m2; ++m) {
      const Complex phase =
          parity ? std::polar(1.0, M_PI * (m - n) / static_cast<double>(m2)) : Complex(1.0);
      buf(m, j) = scale * phase * w(j, m);
    }
  }
  fft::transform_columns(buf, fft::kBackward);
  Eigen::MatrixXcd kernel(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int j = a + b;
      const int r = (a - b - (j & 1)) / 2;
      const double sign = (r & 1) ? -1.0 : 1.0;
      kernel(a, b) = sign * buf(((r % m2) + m2) % m2, j);
    }
  }
  return kernel;
}

PhaseSpaceField wigner_from_density(const DensityKernel& rho, double* imag_residue) {
  rho.grid.validate();
  const double herm = rho.hermiticity_residual();
  if (herm > 1e-8) {
    std::ostringstream msg;
    msg << "density kernel is not Hermitian (max |rho - rho^dagger| = " << herm << ")";
    throw InvalidState(msg.str());
  }
  const Eigen::MatrixXcd w = wigner_transform(rho.grid, rho.values);
  if (imag_residue != nullptr) *imag_residue = w.imag().cwiseAbs().maxCoeff();
  return PhaseSpaceField{rho.grid, FieldKind::Wigner, w.real()};
}

DensityKernel density_from_wigner(const PhaseSpaceField& w) {
  w.grid.validate();
  require_same_lattice(w.grid, w.values);
  return DensityKernel{w.grid, kernel_from_wigner(w.grid, w.values.cast<Complex>())};
}

std::vector<Eigen::MatrixXd> optical_tomograms(const PhaseSpaceGrid& grid,
                                               const std::vector<Eigen::MatrixXd>& fields,
                                               const TomogramDomain& domain) {
  grid.validate();
  domain.validate();
  if (domain.theta.size() == 0) throw InvalidArgument("optical domain has no angles");
  const WignerLattice lat = grid.lattice();
  std::vector<const Eigen::MatrixXd*> ptrs;
  for (const auto& f : fields) {
    require_same_lattice(grid, f);
    ptrs.push_back(&f);
  }
  const double mw = grid.mass * grid.omega;
  const auto nx = static_cast<int>(domain.x.size());
  const double dk = 2.0 * M_PI / (nx * domain.dx());
  const Eigen::VectorXd k = radial_wavenumbers(dk, lattice_k_max(lat, mw), nx / 2);
  const Eigen::MatrixXcd inv = inverse_slice_table(k, domain.x);

  std::vector<Eigen::MatrixXd> out(fields.size(), Eigen::MatrixXd(nx, domain.theta.size()));
  for (Eigen::Index i = 0; i < domain.theta.size(); ++i) {
    const auto spectra = slice_spectra(lat, mw, ptrs, domain.theta(i), k);
    for (std::size_t f = 0; f < fields.size(); ++f) out[f].col(i) = (inv * spectra[f]).real();
  }
  return out;
}

Tomogram optical_tomogram(const PhaseSpaceField& w, const TomogramDomain& domain) {
  auto values = optical_tomograms(w.grid, {w.values}, domain);
  return Tomogram{w.grid, domain, std::move(values.front())};
}

Eigen::VectorXd radon_profile(const PhaseSpaceField& w, double theta, const Eigen::VectorXd& x) {
  w.grid.validate();
  require_same_lattice(w.grid, w.values);
  const WignerLattice lat = w.grid.lattice();
  const double mw = w.grid.mass * w.grid.omega;
  const double support = default_x_half(w.grid);
  const double dk = 2.0 * M_PI / (2.0 * support);
  const Eigen::VectorXd k = radial_wavenumbers(dk, lattice_k_max(lat, mw), 0);
  const auto spectra = slice_spectra(lat, mw, {&w.values}, theta, k);
  Eigen::VectorXd out = (inverse_slice_table(k, x) * spectra.front()).real();
  for (Eigen::Index m = 0; m < x.size(); ++m) {
    if (std::abs(x(m)) > support) out(m) = 0.0;
  }
  return out;
}

PhaseSpaceField wigner_from_optical(const Tomogram& tomogram) {
  const auto& dom = tomogram.domain;
  tomogram.grid.validate();
  dom.validate();
  const auto n_theta = static_cast<int>(dom.theta.size());
  if (n_theta < 16) {
    throw UndersampledDomain("filtered back-projection needs at least 16 angles, got " +
                             std::to_string(n_theta));
  }
  const auto nx = static_cast<int>(dom.x.size());
  if (tomogram.values.rows() != nx || tomogram.values.cols() != n_theta) {
    throw InvalidArgument("tomogram values do not match its domain");
  }
  const double step = dom.dx();
  const int npad = next_power_of_two(2 * nx);
  constexpr int kUpsample = 4;
  const int nfine = npad * kUpsample;

  // Band-limited ramp response sampled on the X grid.
  Eigen::VectorXcd ramp = Eigen::VectorXcd::Zero(npad);
  for (int t = 0; t < npad; ++t) {
    const int n = t <= npad / 2 ? t : t - npad;
    if (n == 0) {
      ramp(t) = M_PI / (2.0 * step * step);
    } else if (n % 2 != 0) {
      ramp(t) = -2.0 / (M_PI * double(n) * n * step * step);
    }
  }
  fft::transform(ramp, fft::kForward);
  const Eigen::VectorXd kpad = fft::wavenumbers(npad, npad * step);
  const double k_nyq = M_PI / step;
  Eigen::VectorXd response(npad);
  for (int t = 0; t < npad; ++t) {
    const double ak = std::abs(kpad(t));
    double window = 1.0;
    if (ak > 0.8 * k_nyq) window = 0.5 * (1.0 + std::cos(M_PI * (ak - 0.8 * k_nyq) / (0.2 * k_nyq)));
    response(t) = ramp(t).real() * step * window;
  }

  // Periodic trapezoid weights in theta (period pi).
  Eigen::VectorXd dtheta(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    const double prev = i == 0 ? dom.theta(n_theta - 1) - M_PI : dom.theta(i - 1);
    const double next = i == n_theta - 1 ? dom.theta(0) + M_PI : dom.theta(i + 1);
    dtheta(i) = 0.5 * (next - prev);
  }

  const WignerLattice lat = tomogram.grid.lattice();
  const double mw = tomogram.grid.mass * tomogram.grid.omega;
  const Eigen::VectorXd qs = lat.qs();
  const Eigen::VectorXd ps = lat.ps();
  const double x0 = dom.x(0);
  const double fine_step = step / kUpsample;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(lat.nq, lat.np);
  Eigen::VectorXcd spec(npad), fine(nfine);
  for (int i = 0; i < n_theta; ++i) {
    spec.setZero();
    spec.head(nx) = tomogram.values.col(i).cast<Complex>();
    fft::transform(spec, fft::kForward);
    for (int t = 0; t < npad; ++t) spec(t) *= response(t);
    fine.setZero();
    for (int t = 0; t < npad / 2; ++t) fine(t) = spec(t);
    for (int t = npad / 2 + 1; t < npad; ++t) fine(nfine - npad + t) = spec(t);
    fine(npad / 2) = 0.5 * spec(npad / 2);
    fine(nfine - npad / 2) = 0.5 * spec(npad / 2);
    fft::transform(fine, fft::kBackward);
    const Eigen::VectorXd filtered = fine.real() / static_cast<double>(npad);

    const double c = std::cos(dom.theta(i));
    const double s = std::sin(dom.theta(i)) / mw;
    const double weight = dtheta(i) / (2.0 * M_PI * mw);
    for (int m = 0; m < lat.np; ++m) {
      const double xp = ps(m) * s - x0;
      for (int j = 0; j < lat.nq; ++j) {
        const double t = (qs(j) * c + xp) / fine_step;
        const double fl = std::floor(t);
        const double frac = t - fl;
        int i0 = static_cast<int>(fl) % nfine;
        if (i0 < 0) i0 += nfine;
        const int i1 = (i0 + 1) % nfine;
        w(j, m) += weight * ((1.0 - frac) * filtered(i0) + frac * filtered(i1));
      }
    }
  }
  return PhaseSpaceField{tomogram.grid, FieldKind::Wigner, std::move(w)};
}

namespace {

// Band-limited interpolation of a periodic uniformly sampled profile.
Eigen::VectorXd trig_interpolate(const Eigen::VectorXd& samples, double x0, double step,
                                 const Eigen::VectorXd& at, double cutoff) {
  const auto n = static_cast<int>(samples.size());
  Eigen::VectorXcd f = samples.cast<Complex>();
  fft::transform(f, fft::kForward);
  const Eigen::VectorXd k = fft::wavenumbers(n, n * step);
  Eigen::VectorXd out(at.size());
  for (Eigen::Index m = 0; m < at.size(); ++m) {
    if (std::abs(at(m)) > cutoff) {
      out(m) = 0.0;
      continue;
    }
    Complex acc = 0.0;
    for (int t = 0; t < n; ++t) {
      const double weight = (n % 2 == 0 && t == n / 2) ? 0.0 : 1.0;
      acc += weight * f(t) * std::polar(1.0, k(t) * (at(m) - x0));
    }
    if (n % 2 == 0) acc += f(n / 2) * std::cos(k(n / 2) * (at(m) - x0));
    out(m) = acc.real() / n;
  }
  return out;
}

// Reduces (mu, nu) to (r, theta in [0, pi), mirror) with X -> mirror * X / r.
struct SectionGeometry {
  double r;
  double theta;
  double mirror;
};

SectionGeometry section_geometry(double mu, double nu, double mw) {
  if (mu == 0.0 && nu == 0.0) throw InvalidArgument("symplectic parameters (0, 0)");
  SectionGeometry g{std::hypot(mu, nu * mw), std::atan2(nu * mw, mu), 1.0};
  if (g.theta < 0.0) {
    g.theta += M_PI;
    g.mirror = -1.0;
  } else if (g.theta >= M_PI) {
    g.theta -= M_PI;
    g.mirror = -1.0;
  }
  return g;
}

}  // namespace

SymplecticSection symplectic_section(const Tomogram& tomogram, double mu, double nu) {
  const double mw = tomogram.grid.mass * tomogram.grid.omega;
  const SectionGeometry g = section_geometry(mu, nu, mw);
  const auto& dom = tomogram.domain;
  Eigen::Index slice = -1;
  for (Eigen::Index i = 0; i < dom.theta.size(); ++i) {
    if (std::abs(dom.theta(i) - g.theta) < 1e-9) slice = i;
  }
  if (slice < 0) {
    std::ostringstream msg;
    msg << "angle " << g.theta << " of (mu, nu) = (" << mu << ", " << nu
        << ") is not sampled by the tomogram";
    throw InvalidArgument(msg.str());
  }
  SymplecticSection out;
  out.mu = mu;
  out.nu = nu;
  out.x = g.r * dom.x;
  const Eigen::VectorXd at = g.mirror * dom.x;
  out.values = trig_interpolate(tomogram.values.col(slice), dom.x(0), dom.dx(), at,
                                dom.x_half()) /
               g.r;
  return out;
}

SymplecticSection symplectic_section(const PhaseSpaceField& w, double mu, double nu,
                                     const Eigen::VectorXd& x) {
  const double mw = w.grid.mass * w.grid.omega;
  const SectionGeometry g = section_geometry(mu, nu, mw);
  SymplecticSection out;
  out.mu = mu;
  out.nu = nu;
  out.x = x;
  out.values = radon_profile(w, g.theta, g.mirror * x / g.r) / g.r;
  return out;
}

PhaseSpaceField husimi_from_wigner(const PhaseSpaceField& w) {
  w.grid.validate();
  require_same_lattice(w.grid, w.values);
  const WignerLattice lat = w.grid.lattice();
  const double var_q = w.grid.hbar / (2.0 * w.grid.mass * w.grid.omega);
  const double var_p = 0.5 * w.grid.hbar * w.grid.mass * w.grid.omega;
  Eigen::MatrixXcd f = w.values.cast<Complex>();
  fft::transform_2d(f, fft::kForward);
  const Eigen::VectorXd kq = fft::wavenumbers(lat.nq, lat.q_length());
  const Eigen::VectorXd kp = fft::wavenumbers(lat.np, lat.p_length());
  const double norm = 1.0 / (static_cast<double>(lat.nq) * lat.np);
  for (int m = 0; m < lat.np; ++m) {
    for (int i = 0; i < lat.nq; ++i) {
      f(i, m) *= norm * std::exp(-0.5 * (var_q * kq(i) * kq(i) + var_p * kp(m) * kp(m)));
    }
  }
  fft::transform_2d(f, fft::kBackward);
  return PhaseSpaceField{w.grid, FieldKind::Husimi, f.real()};
}

InverseDerivative inv_ddX(const Eigen::VectorXd& profile, double dx) {
  const auto n = static_cast<int>(profile.size());
  InverseDerivative out;
  if (n == 0) return out;
  const double scale = profile.cwiseAbs().maxCoeff();
  const double edge = std::max(std::abs(profile(0)), std::abs(profile(n - 1)));
  out.boundary_leak = scale > 0.0 && edge > 1e-8 * std::max(scale, 1.0);
  Eigen::VectorXcd f = profile.cast<Complex>();
  fft::transform(f, fft::kForward);
  const Eigen::VectorXd k = fft::wavenumbers(n, n * dx);
  for (int t = 0; t < n; ++t) {
    const bool drop = t == 0 || (n % 2 == 0 && t == n / 2);
    f(t) = drop ? Complex(0.0) : f(t) / (kI * k(t)) / static_cast<double>(n);
  }
  fft::transform(f, fft::kBackward);
  out.values = f.real();
  return out;
}

Eigen::VectorXd ddX(const Eigen::VectorXd& profile, double dx) {
  const auto n = static_cast<int>(profile.size());
  return fft::derivative(profile.cast<Complex>(), n * dx).real();
}

Eigen::MatrixXd lattice_d_dq(const WignerLattice& lat, const Eigen::MatrixXd& f) {
  Eigen::MatrixXcd g = f.cast<Complex>();
  fft::transform_columns(g, fft::kForward);
  const Eigen::VectorXd k = fft::wavenumbers(static_cast<int>(f.rows()), lat.q_length());
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    const bool nyq = f.rows() % 2 == 0 && i == f.rows() / 2;
    g.row(i) *= nyq ? Complex(0.0) : kI * k(i) / static_cast<double>(f.rows());
  }
  fft::transform_columns(g, fft::kBackward);
  return g.real();
}

Eigen::MatrixXd lattice_d_dp(const WignerLattice& lat, const Eigen::MatrixXd& f) {
  Eigen::MatrixXcd g = f.cast<Complex>();
  fft::transform_rows(g, fft::kForward);
  const Eigen::VectorXd k = fft::wavenumbers(static_cast<int>(f.cols()), lat.p_length());
  for (Eigen::Index m = 0; m < g.cols(); ++m) {
    const bool nyq = f.cols() % 2 == 0 && m == f.cols() / 2;
    g.col(m) *= nyq ? Complex(0.0) : kI * k(m) / static_cast<double>(f.cols());
  }
  fft::transform_rows(g, fft::kBackward);
  return g.real();
}

}  // namespace spintomo
