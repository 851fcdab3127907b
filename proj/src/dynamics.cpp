#include "spintomo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "spintomo/fft.hpp"

namespace spintomo {

namespace {

constexpr Complex kI(0.0, 1.0);

bool finite(double x) { return std::isfinite(x); }

// Zeeman operator -(kappa/s) s.B.
SpinMatrix zeeman(const EMFieldConfig& field, const Vec3& b) {
  if (field.spin.twice() == 0) return SpinMatrix::Zero(1, 1);
  return -(field.kappa / field.spin.value()) * spin_operators(field.spin).along(b);
}

// exp(-i h tau) for Hermitian h.
SpinMatrix unitary(const SpinMatrix& h, double tau) {
  Eigen::SelfAdjointEigenSolver<SpinMatrix> es(h);
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases(i) = std::polar(1.0, -es.eigenvalues()(i) * tau);
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Eigen::Vector3d EMFieldConfig::phi_at(double t) const {
  return phi_coeffs ? phi_coeffs(t) : Eigen::Vector3d::Zero();
}

double EMFieldConfig::phi(double q, double t) const {
  const Eigen::Vector3d c = phi_at(t);
  double v = c(0) + c(1) * q + 0.5 * c(2) * q * q;
  if (phi_extra) v += phi_extra(q, t);
  return v;
}

double EMFieldConfig::a_at(double t) const { return a_uniform ? a_uniform(t) : 0.0; }

double EMFieldConfig::a(double q, double t) const {
  return a_at(t) + (a_profile ? a_profile(q, t) : 0.0);
}

Vec3 EMFieldConfig::b_at(double t) const { return b ? b(t) : Vec3::Zero(); }

void EMFieldConfig::validate() const {
  if (!finite(charge) || !finite(kappa)) throw InvalidArgument("charge and kappa must be finite");
  if (!(finite(mass) && mass > 0.0)) throw InvalidArgument("mass must be positive and finite");
  if (!(finite(light_speed) && light_speed > 0.0)) {
    throw InvalidArgument("light speed must be positive and finite");
  }
  if (spin.twice() < 0) throw InvalidArgument("spin must be non-negative");
  if (!phi_at(0.0).allFinite() || !b_at(0.0).allFinite() || !finite(a_at(0.0))) {
    throw InvalidArgument("field values at t = 0 are not finite");
  }
}

EMFieldConfig EMFieldConfig::harmonic(double mass, double omega, const Vec3& b, double kappa,
                                      double charge) {
  if (charge == 0.0) throw InvalidArgument("a harmonic potential needs nonzero charge");
  return constant(Eigen::Vector3d(0.0, 0.0, mass * omega * omega / charge), 0.0, b, kappa, charge,
                  mass);
}

EMFieldConfig EMFieldConfig::constant(const Eigen::Vector3d& phi, double a, const Vec3& b,
                                      double kappa, double charge, double mass) {
  EMFieldConfig f;
  f.charge = charge;
  f.kappa = kappa;
  f.mass = mass;
  if (!phi.isZero(0.0)) f.phi_coeffs = [phi](double) { return phi; };
  if (a != 0.0) f.a_uniform = [a](double) { return a; };
  if (!b.isZero(0.0)) f.b = [b](double) { return b; };
  return f;
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::SplitStepStrang: return "split-step-strang";
    case Scheme::Rk4: return "rk4-ode";
    case Scheme::WignerSpectral: return "wigner-spectral";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "split-step-strang" || name == "split-step") return Scheme::SplitStepStrang;
  if (name == "rk4-ode" || name == "rk4") return Scheme::Rk4;
  if (name == "wigner-spectral") return Scheme::WignerSpectral;
  throw InvalidArgument("unknown scheme '" + name + "'");
}

void PropagatorConfig::validate() const {
  if (!(dt > 0.0 && finite(dt))) throw InvalidArgument("dt must be positive");
  if (n_steps < 0) throw InvalidArgument("n_steps must be non-negative");
  if (record_every < 1) throw InvalidArgument("record_every must be >= 1");
}

SpinorField hamiltonian_apply(const SpinorField& psi, const PhaseSpaceGrid& grid,
                              const EMFieldConfig& field, double t) {
  const int n = grid.n;
  const auto d = psi.cols();
  if (psi.rows() != n || d != field.spin.dim()) {
    throw InvalidArgument("spinor field must be n x (2s+1)");
  }
  const double hbar = grid.hbar;
  const Eigen::VectorXd k = fft::wavenumbers(n, grid.length());
  const Eigen::VectorXd q = grid.positions();
  Eigen::VectorXd a(n), v(n);
  for (int i = 0; i < n; ++i) {
    a(i) = field.charge / field.light_speed * field.a(q(i), t);
    v(i) = field.charge * field.phi(q(i), t);
  }
  auto momentum = [&](const Eigen::VectorXcd& f) {
    Eigen::VectorXcd g = f;
    fft::transform(g, fft::kForward);
    for (int i = 0; i < n; ++i) g(i) *= hbar * k(i) / static_cast<double>(n);
    fft::transform(g, fft::kBackward);
    return g;
  };
  SpinorField out(n, d);
  for (Eigen::Index s = 0; s < d; ++s) {
    const Eigen::VectorXcd f = psi.col(s);
    const Eigen::VectorXcd pi = momentum(f) - (a.array() * f.array()).matrix();
    const Eigen::VectorXcd pi2 = momentum(pi) - (a.array() * pi.array()).matrix();
    out.col(s) = pi2 / (2.0 * field.mass) + (v.array() * f.array()).matrix();
  }
  out.noalias() += psi * zeeman(field, field.b_at(t)).transpose();
  return out;
}

double energy(const SpinorField& psi, const PhaseSpaceGrid& grid, const EMFieldConfig& field,
              double t) {
  const SpinorField h = hamiltonian_apply(psi, grid, field, t);
  return (psi.conjugate().cwiseProduct(h)).sum().real() * grid.dx();
}

double energy(const SpinorDensity& rho, const EMFieldConfig& field, double t) {
  const int n = rho.grid().n;
  const int d = rho.spin_dim();
  Complex total = 0.0;
  SpinorField col(n, d);
  for (int k = 0; k < d; ++k) {
    for (int b = 0; b < n; ++b) {
      for (int j = 0; j < d; ++j) col.col(j) = rho.matrix().block(j * n, k * n + b, n, 1);
      total += hamiltonian_apply(col, rho.grid(), field, t)(b, k);
    }
  }
  return total.real() * rho.grid().dx();
}

namespace {

struct Ensemble {
  std::vector<SpinorField> members;
  std::vector<double> weights;
};

Ensemble decompose(const SpinorDensity& rho) {
  const int n = rho.grid().n;
  const int d = rho.spin_dim();
  const double dx = rho.grid().dx();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix() * dx);
  Ensemble e;
  const double cutoff = 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff());
  for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
    const double lambda = es.eigenvalues()(i);
    if (lambda <= cutoff) break;
    const Eigen::VectorXcd v = es.eigenvectors().col(i) / std::sqrt(dx);
    e.members.push_back(Eigen::Map<const SpinorField>(v.data(), n, d));
    e.weights.push_back(lambda);
  }
  return e;
}

SpinorDensity assemble(const Ensemble& e, const SpinorDensity& like) {
  return SpinorDensity::mixture(like.spin(), like.grid(), e.members, e.weights);
}

void orthonormalize(std::vector<SpinorField>& members, double dx) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Complex overlap = members[j].conjugate().cwiseProduct(members[i]).sum() * dx;
      members[i] -= overlap * members[j];
    }
    members[i] /= std::sqrt(members[i].squaredNorm() * dx);
  }
}

class SplitStep {
 public:
  SplitStep(const PhaseSpaceGrid& grid, const EMFieldConfig& field)
      : grid_(grid), field_(field), k_(fft::wavenumbers(grid.n, grid.length())),
        q_(grid.positions()) {}

  void step(SpinorField& psi, double t, double dt) {
    const double tm = t + 0.5 * dt;
    const double hbar = grid_.hbar;
    const int n = grid_.n;
    Eigen::VectorXcd half(n);
    for (int i = 0; i < n; ++i) {
      half(i) = std::polar(1.0, -field_.charge * field_.phi(q_(i), tm) * 0.5 * dt / hbar);
    }
    const SpinMatrix uz = unitary(zeeman(field_, field_.b_at(tm)), 0.5 * dt / hbar).transpose();
    const double shift = field_.charge / field_.light_speed * field_.a_at(tm);
    Eigen::VectorXcd kinetic(n);
    for (int i = 0; i < n; ++i) {
      const double pk = hbar * k_(i) - shift;
      kinetic(i) = std::polar(1.0 / n, -pk * pk * dt / (2.0 * field_.mass * hbar));
    }
    auto potential = [&] {
      psi = half.asDiagonal() * psi;
      psi = psi * uz;
    };
    potential();
    fft::transform_columns(psi, fft::kForward);
    psi = kinetic.asDiagonal() * psi;
    fft::transform_columns(psi, fft::kBackward);
    potential();
  }

 private:
  const PhaseSpaceGrid& grid_;
  const EMFieldConfig& field_;
  Eigen::VectorXd k_;
  Eigen::VectorXd q_;
};

void rk4_step(SpinorField& psi, const PhaseSpaceGrid& grid, const EMFieldConfig& field, double t,
              double dt) {
  const Complex f = -kI / grid.hbar;
  const SpinorField k1 = f * hamiltonian_apply(psi, grid, field, t);
  const SpinorField k2 = f * hamiltonian_apply(psi + 0.5 * dt * k1, grid, field, t + 0.5 * dt);
  const SpinorField k3 = f * hamiltonian_apply(psi + 0.5 * dt * k2, grid, field, t + 0.5 * dt);
  const SpinorField k4 = f * hamiltonian_apply(psi + dt * k3, grid, field, t + dt);
  psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory evolve_oracle(const SpinorDensity& rho0, const EMFieldConfig& field,
                         const PropagatorConfig& prop) {
  field.validate();
  prop.validate();
  rho0.validate();
  if (field.spin != rho0.spin()) throw InvalidArgument("field spin does not match the state");
  if (prop.scheme == Scheme::WignerSpectral) {
    throw SchemeMismatch("wigner-spectral propagates vector distributions, not spinor states");
  }
  if (prop.scheme == Scheme::SplitStepStrang && !field.separable()) {
    throw SchemeMismatch(
        "split-step needs a uniform vector potential; use rk4-ode or move the q dependence into "
        "phi");
  }
  const PhaseSpaceGrid& grid = rho0.grid();
  Ensemble e = decompose(rho0);
  SplitStep split(grid, field);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(assemble(e, rho0));
  double t = 0.0;
  for (int step = 1; step <= prop.n_steps; ++step) {
    for (auto& psi : e.members) {
      if (prop.scheme == Scheme::SplitStepStrang) {
        split.step(psi, t, prop.dt);
      } else {
        rk4_step(psi, grid, field, t, prop.dt);
      }
    }
    t = step * prop.dt;
    if (step % 1000 == 0) orthonormalize(e.members, grid.dx());
    if (step % prop.record_every == 0) {
      traj.times.push_back(t);
      traj.states.push_back(assemble(e, rho0));
    }
  }
  return traj;
}

SpinCouplingMatrix spin_coupling_matrix(const SpinFrame& frame, const Vec3& b, double kappa,
                                        double hbar) {
  if (!b.allFinite() || !std::isfinite(kappa) || !(hbar > 0.0)) {
    throw InvalidArgument("spin coupling needs finite B, kappa and positive hbar");
  }
  if (frame.spin().twice() == 0) throw InvalidArgument("spin 0 has no Zeeman coupling");
  const SpinMatrix m = spin_operators(frame.spin()).along(b);
  const auto size = static_cast<Eigen::Index>(frame.size());
  SpinCouplingMatrix s;
  s.field_value = b;
  s.entries.resize(size, size);
  const double scale = -2.0 * kappa / (hbar * frame.spin().value());
  for (Eigen::Index j = 0; j < size; ++j) {
    const SpinMatrix um = frame.dequantizer()[j] * m;
    for (Eigen::Index k = 0; k < size; ++k) {
      s.entries(j, k) = scale * (um * frame.quantizer()[k]).trace().imag();
    }
  }
  return s;
}

std::vector<Eigen::VectorXd> evolve_spin_weights(const SpinCouplingMatrix& s,
                                                 const Eigen::VectorXd& w0,
                                                 const std::vector<double>& times) {
  if (w0.size() != s.entries.rows()) throw InvalidArgument("weight vector size mismatch");
  std::vector<Eigen::VectorXd> out;
  out.reserve(times.size());
  for (double t : times) {
    const Eigen::MatrixXd e = (s.entries * t).exp();
    out.push_back(e * w0);
  }
  return out;
}

std::vector<Eigen::VectorXd> spin_oracle_weights(const SpinFrame& frame, const SpinMatrix& rho0,
                                                 const Vec3& b, double kappa, double hbar,
                                                 const std::vector<double>& times) {
  if (frame.spin().twice() == 0) throw InvalidArgument("spin 0 has no Zeeman coupling");
  const SpinMatrix h = -(kappa / frame.spin().value()) * spin_operators(frame.spin()).along(b);
  std::vector<Eigen::VectorXd> out;
  out.reserve(times.size());
  for (double t : times) {
    const SpinMatrix u = unitary(h, t / hbar);
    out.push_back(frame.weights(u * rho0 * u.adjoint()));
  }
  return out;
}

namespace {

double fit_cost(const std::vector<double>& times, const std::vector<Eigen::VectorXd>& series,
                int harmonics, double omega) {
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd x(n, 1 + 2 * harmonics);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int h = 1; h <= harmonics; ++h) {
      x(i, 2 * h - 1) = std::cos(h * omega * times[i]);
      x(i, 2 * h) = std::sin(h * omega * times[i]);
    }
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  double cost = 0.0;
  for (const auto& y : series) {
    const Eigen::VectorXd coeff = qr.solve(y);
    cost += (y - x * coeff).squaredNorm();
  }
  return cost;
}

}  // namespace

LarmorFit fit_larmor(const std::vector<double>& times,
                     const std::vector<Eigen::VectorXd>& series, int harmonics) {
  if (times.size() < static_cast<std::size_t>(4 * harmonics + 4)) {
    throw InvalidArgument("too few samples for a frequency fit");
  }
  if (harmonics < 1) throw InvalidArgument("need at least one harmonic");
  for (const auto& y : series) {
    if (y.size() != static_cast<Eigen::Index>(times.size())) {
      throw InvalidArgument("series length does not match the time samples");
    }
  }
  const double span = times.back() - times.front();
  double min_step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < times.size(); ++i) min_step = std::min(min_step, times[i] - times[i - 1]);
  if (!(span > 0.0 && min_step > 0.0)) throw InvalidArgument("times must be increasing");

  const double omega_max = 0.95 * M_PI / (min_step * harmonics);
  const double omega_min = 2.0 * M_PI / span;
  const double step = 2.0 * M_PI / (8.0 * span);
  const int n_scan = std::min(20000, static_cast<int>((omega_max - omega_min) / step) + 1);
  double best = omega_min;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_scan; ++i) {
    const double w = omega_min + i * step;
    const double c = fit_cost(times, series, harmonics, w);
    if (c < best_cost) {
      best_cost = c;
      best = w;
    }
  }
  double lo = std::max(omega_min * 0.5, best - step);
  double hi = best + step;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = fit_cost(times, series, harmonics, x1);
  double f2 = fit_cost(times, series, harmonics, x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = fit_cost(times, series, harmonics, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = fit_cost(times, series, harmonics, x2);
    }
  }
  LarmorFit fit;
  fit.omega = 0.5 * (lo + hi);
  const double total = static_cast<double>(times.size() * std::max<std::size_t>(series.size(), 1));
  fit.rms_residual = std::sqrt(fit_cost(times, series, harmonics, fit.omega) / total);
  return fit;
}

namespace {

// f(q, p) -> f(q + shift_m, p) for column m (shift along the q axis).
void shift_along_q(Eigen::MatrixXd& f, const Eigen::VectorXd& shifts, double length) {
  const auto n = f.rows();
  Eigen::MatrixXcd g = f.cast<Complex>();
  fft::transform_columns(g, fft::kForward);
  const Eigen::VectorXd k = fft::wavenumbers(static_cast<int>(n), length);
  for (Eigen::Index m = 0; m < g.cols(); ++m) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double phase = k(i) * shifts(m);
      g(i, m) *= (n % 2 == 0 && i == n / 2) ? Complex(std::cos(phase)) : std::polar(1.0, phase);
    }
  }
  fft::transform_columns(g, fft::kBackward);
  f = g.real() / static_cast<double>(n);
}

// f(q, p) -> f(q, p + shift_i) for row i (shift along the p axis).
void shift_along_p(Eigen::MatrixXd& f, const Eigen::VectorXd& shifts, double length) {
  const auto n = f.cols();
  Eigen::MatrixXcd g = f.cast<Complex>();
  fft::transform_rows(g, fft::kForward);
  const Eigen::VectorXd k = fft::wavenumbers(static_cast<int>(n), length);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double phase = k(m) * shifts(i);
      g(i, m) *= (n % 2 == 0 && m == n / 2) ? Complex(std::cos(phase)) : std::polar(1.0, phase);
    }
  }
  fft::transform_rows(g, fft::kBackward);
  f = g.real() / static_cast<double>(n);
}

// f -> f(F z + g) on the lattice, F unimodular.
void affine_pullback(Eigen::MatrixXd& f, const WignerLattice& lat, const Eigen::Matrix2d& F,
                     const Eigen::Vector2d& g) {
  const Eigen::VectorXd qs = lat.qs();
  const Eigen::VectorXd ps = lat.ps();
  if (g(0) != 0.0) shift_along_q(f, Eigen::VectorXd::Constant(lat.np, g(0)), lat.q_length());
  if (g(1) != 0.0) shift_along_p(f, Eigen::VectorXd::Constant(lat.nq, g(1)), lat.p_length());
  const double a = F(0, 0), b = F(0, 1), c = F(1, 0), d = F(1, 1);
  if (std::abs(b) < 1e-300 && std::abs(c) < 1e-300) {
    if (std::abs(a - 1.0) > 1e-14 || std::abs(d - 1.0) > 1e-14) {
      throw UnsupportedOperation("phase-space step is a pure dilation; reduce dt");
    }
    return;
  }
  if (std::abs(c) >= std::abs(b)) {
    // Q(alpha) P(c) Q(beta), applied right to left.
    const double alpha = (d - 1.0) / c;
    const double beta = (a - 1.0) / c;
    shift_along_q(f, beta * ps, lat.q_length());
    shift_along_p(f, c * qs, lat.p_length());
    shift_along_q(f, alpha * ps, lat.q_length());
  } else {
    // P(alpha) Q(b) P(gamma), applied right to left.
    const double alpha = (a - 1.0) / b;
    const double gamma = (d - 1.0) / b;
    shift_along_p(f, gamma * qs, lat.p_length());
    shift_along_q(f, b * ps, lat.q_length());
    shift_along_p(f, alpha * qs, lat.p_length());
  }
}

// Weyl-symbol energy of a Wigner vector for a truncating field.
double wigner_energy(const VectorDistribution& v, const EMFieldConfig& field, double t) {
  const WignerLattice lat = v.grid.lattice();
  const Eigen::VectorXd qs = lat.qs();
  const Eigen::VectorXd ps = lat.ps();
  const double a = field.charge / field.light_speed * field.a_at(t);
  Eigen::MatrixXd h(lat.nq, lat.np);
  for (int m = 0; m < lat.np; ++m) {
    const double kin = (ps(m) - a) * (ps(m) - a) / (2.0 * field.mass);
    for (int i = 0; i < lat.nq; ++i) h(i, m) = kin + field.charge * field.phi(qs(i), t);
  }
  const SpinMatrix z = zeeman(field, field.b_at(t));
  const double cell = lat.dq * lat.dp;
  double e = 0.0;
  for (std::size_t j = 0; j < v.components.size(); ++j) {
    const double spatial = v.components[j].cwiseProduct(h).sum() * cell;
    const double spin = (v.frame->quantizer()[j] * z).trace().real() * v.integral(j);
    e += v.frame->trace_weights()(static_cast<Eigen::Index>(j)) * spatial + spin;
  }
  return e;
}

ConservedRecord wigner_record(const VectorDistribution& v, const EMFieldConfig& field) {
  ConservedRecord r;
  r.t = v.time;
  r.norm_sum = v.normalization_sum();
  r.trace = r.norm_sum;
  r.energy = wigner_energy(v, field, v.time);
  return r;
}

}  // namespace

VectorTrajectory evolve_wigner_vector(const VectorDistribution& v0, const EMFieldConfig& field,
                                      const PropagatorConfig& prop) {
  if (v0.representation != Representation::Wigner) {
    throw InvalidArgument("evolve_wigner_vector needs a Wigner vector");
  }
  if (!v0.frame) throw InvalidArgument("vector distribution has no frame");
  field.validate();
  prop.validate();
  if (!field.truncating()) {
    throw UnsupportedOperation(
        "the phase-space operator series does not truncate for this field; use the oracle "
        "propagator and residual checks instead");
  }
  if (prop.scheme != Scheme::WignerSpectral) {
    throw SchemeMismatch("evolve_wigner_vector runs the wigner-spectral scheme only");
  }
  if (field.spin != v0.frame->spin()) throw InvalidArgument("field spin does not match the frame");

  const WignerLattice lat = v0.grid.lattice();
  const double hbar = v0.grid.hbar;
  const double e = field.charge;
  const double m = field.mass;

  VectorTrajectory out;
  out.frames.push_back(v0);
  out.conserved.push_back(wigner_record(v0, field));
  VectorDistribution v = v0;
  double t = v0.time;
  for (int step = 1; step <= prop.n_steps; ++step) {
    const double tm = t + 0.5 * prop.dt;
    const Eigen::Vector3d c = field.phi_at(tm);
    // d/dt (q, p, 1) for q' = (p - eA/c)/m, p' = -e (c1 + c2 q).
    Eigen::Matrix3d gen = Eigen::Matrix3d::Zero();
    gen(0, 1) = 1.0 / m;
    gen(0, 2) = -e * field.a_at(tm) / (field.light_speed * m);
    gen(1, 0) = -e * c(2);
    gen(1, 2) = -e * c(1);
    const Eigen::Matrix3d flow = (gen * prop.dt).exp();
    const Eigen::Matrix2d forward = flow.topLeftCorner<2, 2>();
    const Eigen::Vector2d offset = flow.topRightCorner<2, 1>();
    Eigen::Matrix2d inverse;
    inverse << forward(1, 1), -forward(0, 1), -forward(1, 0), forward(0, 0);
    inverse /= forward.determinant();
    const Eigen::Vector2d g = -inverse * offset;
    for (auto& comp : v.components) affine_pullback(comp, lat, inverse, g);

    const Vec3 b = field.b_at(tm);
    if (!b.isZero(0.0)) {
      const Eigen::MatrixXd prop_s =
          (spin_coupling_matrix(*v.frame, b, field.kappa, hbar).entries * prop.dt).exp();
      std::vector<Eigen::MatrixXd> mixed(v.components.size(),
                                         Eigen::MatrixXd::Zero(lat.nq, lat.np));
      for (std::size_t j = 0; j < mixed.size(); ++j) {
        for (std::size_t k = 0; k < mixed.size(); ++k) {
          const double w = prop_s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
          if (w != 0.0) mixed[j] += w * v.components[k];
        }
      }
      v.components = std::move(mixed);
    }
    t = v0.time + step * prop.dt;
    v.time = t;
    if (step % prop.record_every == 0) {
      out.frames.push_back(v);
      out.conserved.push_back(wigner_record(v, field));
    }
  }
  return out;
}

}  // namespace spintomo
